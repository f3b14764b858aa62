"""Transformer-encoder scorer over phone-wise feature sequences.

Input features (M, D) are projected into the evaluation embedding, prepended
with one learned [CLS] token per scored aspect, given fixed sinusoidal
positional encodings, and passed through pre-norm encoder blocks
(multi-head self-attention, then a GELU feed-forward, each with residual
connection and layer norm). The encoder output at each [CLS] position goes
through a per-aspect linear head and tanh, so every score lies in (-1, 1).

Forward and backward are hand-rolled NumPy in float64; the attention inner
products run on the active kernel backend. Gradients are exact (the test
suite checks every parameter against central finite differences).

Checkpoints store a version header, the config, and the flat parameter
arrays in declared order; binary (float64 little-endian) by default, JSON
when the path ends in ".json".
"""

import json
import struct
from dataclasses import asdict, dataclass

import numpy as np

from seqprof import kernels
from seqprof.errors import CheckpointError, ConfigError, LengthError, ShapeError

_LN_EPS = 1e-5
_GELU_C = np.sqrt(2.0 / np.pi)
_GELU_A = 0.044715

CHECKPOINT_FORMAT = "seqprof-scorer"
CHECKPOINT_VERSION = 1
_MAGIC = b"SQPF"


@dataclass(frozen=True)
class ScorerConfig:
    input_dim: int
    embed_dim: int = 24
    heads: int = 8
    layers: int = 3
    aspects: int = 3
    max_len: int = 64
    seed: int = 0

    def __post_init__(self):
        if min(self.input_dim, self.embed_dim, self.heads, self.layers, self.max_len) < 1:
            raise ConfigError("all scorer dimensions must be positive")
        if self.embed_dim % self.heads != 0:
            raise ConfigError(
                f"embed_dim {self.embed_dim} not divisible by heads {self.heads}"
            )
        if self.aspects < 1:
            raise ConfigError("need at least one aspect head")


def param_specs(config):
    """Declared (name, shape) list; fixes parameter and checkpoint order."""
    d, e, a = config.input_dim, config.embed_dim, config.aspects
    f = 4 * e
    specs = [("in_w", (d, e)), ("in_b", (e,)), ("cls", (a, e))]
    for i in range(config.layers):
        p = f"l{i}."
        specs += [
            (p + "ln1_g", (e,)), (p + "ln1_b", (e,)),
            (p + "qkv_w", (e, 3 * e)), (p + "qkv_b", (3 * e,)),
            (p + "attn_w", (e, e)), (p + "attn_b", (e,)),
            (p + "ln2_g", (e,)), (p + "ln2_b", (e,)),
            (p + "ffn1_w", (e, f)), (p + "ffn1_b", (f,)),
            (p + "ffn2_w", (f, e)), (p + "ffn2_b", (e,)),
        ]
    specs += [("head_w", (a, e)), ("head_b", (a,))]
    return specs


def sinusoidal_encoding(length, dim):
    pos = np.arange(length, dtype=np.float64)[:, None]
    idx = np.arange(0, dim, 2, dtype=np.float64)
    angles = pos / np.power(10000.0, idx / dim)
    pe = np.zeros((length, dim))
    pe[:, 0::2] = np.sin(angles)
    pe[:, 1::2] = np.cos(angles[:, : dim // 2])
    return pe


def _gelu(x):
    inner = _GELU_C * (x + _GELU_A * x**3)
    return 0.5 * x * (1.0 + np.tanh(inner))


def _gelu_grad(x):
    inner = _GELU_C * (x + _GELU_A * x**3)
    t = np.tanh(inner)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t**2) * _GELU_C * (1.0 + 3.0 * _GELU_A * x**2)


def _layernorm(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = (x - mu) * inv
    return xhat * g + b, (xhat, inv)


def _layernorm_backward(dy, g, cache):
    xhat, inv = cache
    dxhat = dy * g
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    mean_dxhat = dxhat.mean(axis=-1, keepdims=True)
    mean_dxhat_xhat = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat)
    return dx, dg, db


class ScorerModel:
    """Config plus named parameter arrays, with forward/backward passes."""

    def __init__(self, config, params):
        self.config = config
        self.params = params
        self.pos = sinusoidal_encoding(config.aspects + config.max_len, config.embed_dim)

    @classmethod
    def initialize(cls, config):
        """Fan-scaled uniform init, deterministic in the config seed."""
        rng = np.random.default_rng(config.seed)
        params = {}
        for name, shape in param_specs(config):
            if name.endswith(("ln1_g", "ln2_g")):
                params[name] = np.ones(shape)
            elif name == "cls":
                limit = np.sqrt(3.0 / config.embed_dim)
                params[name] = rng.uniform(-limit, limit, shape)
            elif name == "head_w":
                limit = np.sqrt(6.0 / (config.embed_dim + 1))
                params[name] = rng.uniform(-limit, limit, shape)
            elif len(shape) == 2:
                limit = np.sqrt(6.0 / (shape[0] + shape[1]))
                params[name] = rng.uniform(-limit, limit, shape)
            else:
                params[name] = np.zeros(shape)
        return cls(config, params)

    def parameter_count(self):
        return sum(p.size for p in self.params.values())

    def _check_features(self, features):
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.config.input_dim:
            raise ShapeError(
                f"expected (M, {self.config.input_dim}) features, got {features.shape}"
            )
        if features.shape[0] < 1:
            raise ShapeError("empty feature sequence")
        if features.shape[0] > self.config.max_len:
            raise LengthError(
                f"sequence length {features.shape[0]} exceeds max_len {self.config.max_len}"
            )
        return features

    def _batch(self, features_list):
        feats = [self._check_features(f) for f in features_list]
        cfg = self.config
        b = len(feats)
        m = max(f.shape[0] for f in feats)
        s = cfg.aspects + m
        x = np.zeros((b, m, cfg.input_dim))
        mask = np.zeros((b, s))
        mask[:, : cfg.aspects] = 1.0
        for i, f in enumerate(feats):
            x[i, : f.shape[0]] = f
            mask[i, cfg.aspects : cfg.aspects + f.shape[0]] = 1.0
        return x, mask

    def _forward(self, x, mask, want_cache):
        cfg = self.config
        p = self.params
        b, m, _ = x.shape
        a = cfg.aspects
        s = a + m
        h = cfg.heads
        dh = cfg.embed_dim // h

        tokens = x.reshape(b * m, -1) @ p["in_w"] + p["in_b"]
        stream = np.empty((b, s, cfg.embed_dim))
        stream[:, :a] = p["cls"]
        stream[:, a:] = tokens.reshape(b, m, cfg.embed_dim)
        stream = stream + self.pos[:s]

        caches = []
        for i in range(cfg.layers):
            pre = f"l{i}."
            n1, ln1_cache = _layernorm(stream, p[pre + "ln1_g"], p[pre + "ln1_b"])
            qkv = n1.reshape(b * s, -1) @ p[pre + "qkv_w"] + p[pre + "qkv_b"]
            qkv = qkv.reshape(b, s, 3, h, dh).transpose(2, 0, 3, 1, 4)
            q, k, v = np.ascontiguousarray(qkv[0]), np.ascontiguousarray(qkv[1]), np.ascontiguousarray(qkv[2])
            ctx, probs = kernels.attention_forward(q, k, v, mask)
            merged = ctx.transpose(0, 2, 1, 3).reshape(b, s, cfg.embed_dim)
            proj = merged.reshape(b * s, -1) @ p[pre + "attn_w"] + p[pre + "attn_b"]
            mid = stream + proj.reshape(b, s, -1)

            n2, ln2_cache = _layernorm(mid, p[pre + "ln2_g"], p[pre + "ln2_b"])
            f1 = n2.reshape(b * s, -1) @ p[pre + "ffn1_w"] + p[pre + "ffn1_b"]
            a1 = _gelu(f1)
            f2 = a1 @ p[pre + "ffn2_w"] + p[pre + "ffn2_b"]
            out = mid + f2.reshape(b, s, -1)

            if want_cache:
                caches.append(
                    dict(stream=stream, n1=n1, ln1=ln1_cache, q=q, k=k, v=v,
                         probs=probs, merged=merged, mid=mid, n2=n2,
                         ln2=ln2_cache, f1=f1, a1=a1)
                )
            stream = out

        cls_out = stream[:, :a, :]
        logits = np.einsum("bae,ae->ba", cls_out, p["head_w"]) + p["head_b"]
        scores = np.tanh(logits)
        cache = dict(x=x, mask=mask, caches=caches, cls_out=cls_out, scores=scores) if want_cache else None
        return scores, cache

    def forward(self, features):
        """Per-aspect scores in (-1, 1) for one feature sequence."""
        x, mask = self._batch([features])
        scores, _ = self._forward(x, mask, want_cache=False)
        return scores[0]

    def batch_forward(self, features_list):
        x, mask = self._batch(features_list)
        scores, _ = self._forward(x, mask, want_cache=False)
        return scores

    def batch_forward_backward(self, features_list, dscores):
        """Scores plus exact parameter gradients composed with dscores."""
        x, mask = self._batch(features_list)
        scores, cache = self._forward(x, mask, want_cache=True)
        dscores = np.asarray(dscores, dtype=np.float64)
        if dscores.shape != scores.shape:
            raise ShapeError(f"output gradient shape {dscores.shape} != {scores.shape}")
        return scores, self._backward(dscores, cache)

    def backward(self, features, dout):
        """Single-sequence parameter gradients for an output gradient (A,)."""
        _, grads = self.batch_forward_backward([features], np.asarray(dout)[None, :])
        return grads

    def _backward(self, dscores, cache):
        cfg = self.config
        p = self.params
        x, mask = cache["x"], cache["mask"]
        b, m, _ = x.shape
        a = cfg.aspects
        s = a + m
        h = cfg.heads
        dh = cfg.embed_dim // h
        grads = {}

        dlogits = dscores * (1.0 - cache["scores"] ** 2)
        grads["head_w"] = np.einsum("ba,bae->ae", dlogits, cache["cls_out"])
        grads["head_b"] = dlogits.sum(axis=0)
        dstream = np.zeros((b, s, cfg.embed_dim))
        dstream[:, :a, :] = dlogits[:, :, None] * p["head_w"][None, :, :]

        for i in range(cfg.layers - 1, -1, -1):
            pre = f"l{i}."
            c = cache["caches"][i]

            df2 = dstream.reshape(b * s, -1)
            grads[pre + "ffn2_w"] = c["a1"].T @ df2
            grads[pre + "ffn2_b"] = df2.sum(axis=0)
            da1 = df2 @ p[pre + "ffn2_w"].T
            df1 = da1 * _gelu_grad(c["f1"])
            grads[pre + "ffn1_w"] = c["n2"].reshape(b * s, -1).T @ df1
            grads[pre + "ffn1_b"] = df1.sum(axis=0)
            dn2 = (df1 @ p[pre + "ffn1_w"].T).reshape(b, s, -1)
            dmid_ln, dg2, db2 = _layernorm_backward(dn2, p[pre + "ln2_g"], c["ln2"])
            grads[pre + "ln2_g"] = dg2
            grads[pre + "ln2_b"] = db2
            dmid = dstream + dmid_ln

            dproj = dmid.reshape(b * s, -1)
            grads[pre + "attn_w"] = c["merged"].reshape(b * s, -1).T @ dproj
            grads[pre + "attn_b"] = dproj.sum(axis=0)
            dmerged = (dproj @ p[pre + "attn_w"].T).reshape(b, s, h, dh).transpose(0, 2, 1, 3)
            dq, dk, dv = kernels.attention_backward(
                np.ascontiguousarray(dmerged), c["probs"], c["q"], c["k"], c["v"]
            )
            dqkv = np.empty((3, b, h, s, dh))
            dqkv[0], dqkv[1], dqkv[2] = dq, dk, dv
            dqkv = dqkv.transpose(1, 3, 0, 2, 4).reshape(b * s, 3 * cfg.embed_dim)
            grads[pre + "qkv_w"] = c["n1"].reshape(b * s, -1).T @ dqkv
            grads[pre + "qkv_b"] = dqkv.sum(axis=0)
            dn1 = (dqkv @ p[pre + "qkv_w"].T).reshape(b, s, -1)
            dstream_ln, dg1, db1 = _layernorm_backward(dn1, p[pre + "ln1_g"], c["ln1"])
            grads[pre + "ln1_g"] = dg1
            grads[pre + "ln1_b"] = db1
            dstream = dmid + dstream_ln

        grads["cls"] = dstream[:, :a, :].sum(axis=0)
        dtok = dstream[:, a:, :] * mask[:, a:, None]
        grads["in_w"] = x.reshape(b * m, -1).T @ dtok.reshape(b * m, -1)
        grads["in_b"] = dtok.reshape(b * m, -1).sum(axis=0)
        return grads


def save_model(model, path):
    """Write a checkpoint; JSON when the path ends in .json, binary otherwise."""
    path = str(path)
    config = asdict(model.config)
    specs = param_specs(model.config)
    if path.endswith(".json"):
        payload = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": config,
            "params": {name: model.params[name].tolist() for name, _ in specs},
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
        return
    header = json.dumps(
        {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": config,
            "params": [[name, list(shape)] for name, shape in specs],
        }
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for name, _ in specs:
            fh.write(np.ascontiguousarray(model.params[name], dtype="<f8").tobytes())


def _checked_config(header):
    if header.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"not a scorer checkpoint (format {header.get('format')!r})")
    if header.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version {header.get('version')} unsupported "
            f"(expected {CHECKPOINT_VERSION})"
        )
    try:
        return ScorerConfig(**header["config"])
    except (KeyError, TypeError, ConfigError) as exc:
        raise CheckpointError(f"bad checkpoint config: {exc}") from exc


def load_model(path):
    """Read a checkpoint written by save_model; CheckpointError on damage."""
    path = str(path)
    if path.endswith(".json"):
        try:
            with open(path, encoding="utf-8") as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"unreadable checkpoint: {exc}") from exc
        config = _checked_config(payload)
        params = {}
        for name, shape in param_specs(config):
            if name not in payload.get("params", {}):
                raise CheckpointError(f"missing parameter {name}")
            arr = np.asarray(payload["params"][name], dtype=np.float64)
            if arr.shape != shape:
                raise CheckpointError(f"parameter {name}: shape {arr.shape}, expected {shape}")
            params[name] = arr
        return ScorerModel(config, params)

    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise CheckpointError(f"unreadable checkpoint: {exc}") from exc
    if len(blob) < 8 or blob[:4] != _MAGIC:
        raise CheckpointError("not a scorer checkpoint (bad magic)")
    (header_len,) = struct.unpack("<I", blob[4:8])
    if len(blob) < 8 + header_len:
        raise CheckpointError("truncated checkpoint header")
    try:
        header = json.loads(blob[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from exc
    config = _checked_config(header)
    params = {}
    offset = 8 + header_len
    for name, shape in param_specs(config):
        nbytes = int(np.prod(shape)) * 8
        chunk = blob[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(f"truncated checkpoint at parameter {name}")
        params[name] = np.frombuffer(chunk, dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(blob):
        raise CheckpointError("trailing bytes after parameters")
    return ScorerModel(config, params)
