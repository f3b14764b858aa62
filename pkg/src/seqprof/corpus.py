"""Sample data model, synthetic corpus generation, augmentation, JSONL I/O.

The generator stands in for a scored read-aloud corpus: each speaker draws a
latent proficiency theta in [0, 1] from a (typically top-heavy) Beta
distribution; phone-wise feature rows are an affine blend of two anchor
vectors, theta * u + (1 - theta) * v, plus noise; per-aspect labels are the
median of simulated rater scores around a monotone map of theta onto the
label scale. An optional out-of-distribution cohort uses a different label
scale, shifted feature means, and a small fraction of mismatched-reference
samples labelled with the lowest score.

Augmentation couples each sample with pseudo references: the reference is
passed through a noisy channel (per-phone substitution / deletion /
insertion), except for a configurable fraction that instead borrows an
unrelated sample's reference. Each pseudo reference gets the
normalized-mutual-information pseudo-score and feature rows rebuilt against
it (aligned rows reuse the base rows, insertions get fresh noise rows).
`quality_coupling` scales the channel error rates down for high-scoring
samples, mimicking a recognizer that transcribes proficient speech more
faithfully; 0 keeps the channel identical for every sample.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from seqprof.alignment import PLACEHOLDER, align, validate_phones
from seqprof.errors import ConfigError, ParseError, ValidationError
from seqprof.info import nmi
from seqprof.scales import ScoreScale

ASPECTS = ("pronunciation", "rhythm", "intonation")

IN_DIST = "in-dist"
OOD = "ood"


@dataclass
class Sample:
    """One scored (or unscored) sentence.

    `features` has one row per phone of `pseudo_reference` when present,
    otherwise per phone of `reference`.
    """

    id: str
    cohort: str
    reference: tuple[str, ...]
    features: np.ndarray
    scores: dict[str, float] | None
    scale: ScoreScale
    pseudo_reference: tuple[str, ...] | None = None
    pseudo_score: float | None = None

    @property
    def speaker(self):
        return self.id.split("#", 1)[0].rsplit("_", 1)[0]

    def validate(self):
        validate_phones(self.reference, f"sample {self.id}: reference")
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise ValidationError(f"sample {self.id}: features must be a matrix")
        expected = len(self.pseudo_reference) if self.pseudo_reference else len(self.reference)
        if feats.shape[0] != expected:
            raise ValidationError(
                f"sample {self.id}: {feats.shape[0]} feature rows for {expected} phones"
            )
        if self.pseudo_reference is not None:
            validate_phones(self.pseudo_reference, f"sample {self.id}: pseudo_reference")
            if self.pseudo_score is None:
                raise ValidationError(f"sample {self.id}: pseudo_reference without pseudo_score")
            if not 0.0 <= self.pseudo_score <= 1.0:
                raise ValidationError(f"sample {self.id}: pseudo_score outside [0, 1]")
        if self.scores is not None:
            for aspect, value in self.scores.items():
                if not self.scale.a <= value <= self.scale.b:
                    raise ValidationError(
                        f"sample {self.id}: {aspect} score {value} outside "
                        f"[{self.scale.a}, {self.scale.b}]"
                    )
        return self


@dataclass
class AugmentedSample:
    """A base sample coupled with one pseudo reference and its pseudo-score."""

    base: Sample
    ordinal: int
    pseudo_reference: tuple[str, ...]
    features_hyp: np.ndarray
    pseudo_score: float

    def flatten(self):
        """The JSONL/pipeline representation of this augmented sample."""
        return Sample(
            id=f"{self.base.id}#aug{self.ordinal}",
            cohort=self.base.cohort,
            reference=self.base.reference,
            features=self.features_hyp,
            scores=self.base.scores,
            scale=self.base.scale,
            pseudo_reference=self.pseudo_reference,
            pseudo_score=self.pseudo_score,
        )


@dataclass(frozen=True)
class OODBlock:
    """Out-of-distribution cohort parameters."""

    scale: ScoreScale = field(default_factory=lambda: ScoreScale(1.0, 5.0))
    feature_shift: float = 1.0
    n_speakers: int = 40
    sentences_per_speaker: int = 15
    mismatch_rate: float = 0.05
    proficiency_alpha: float | None = None
    proficiency_beta: float | None = None

    def __post_init__(self):
        if self.n_speakers < 1 or self.sentences_per_speaker < 1:
            raise ConfigError("OOD cohort needs positive speaker and sentence counts")
        if not 0.0 <= self.mismatch_rate <= 1.0:
            raise ConfigError("mismatch_rate must lie in [0, 1]")


@dataclass(frozen=True)
class GenConfig:
    n_speakers: int = 125
    sentences_per_speaker: int = 20
    alphabet_size: int = 16
    proficiency_alpha: float = 5.0
    proficiency_beta: float = 1.5
    feature_dim: int = 10
    noise_std: float = 0.3
    rater_count: int = 5
    rater_noise_std: float = 0.75
    min_len: int = 4
    max_len: int = 14
    scale: ScoreScale = field(default_factory=lambda: ScoreScale(1.0, 10.0))
    seed: int = 0
    ood: OODBlock | None = None

    def __post_init__(self):
        if self.n_speakers < 1 or self.sentences_per_speaker < 1:
            raise ConfigError("need positive speaker and sentence counts")
        if self.alphabet_size < 4:
            raise ConfigError("alphabet_size must be at least 4")
        if self.feature_dim < 1:
            raise ConfigError("feature_dim must be positive")
        if self.noise_std < 0 or self.rater_noise_std < 0:
            raise ConfigError("noise levels must be non-negative")
        if self.rater_count < 1:
            raise ConfigError("rater_count must be positive")
        if not 1 <= self.min_len <= self.max_len:
            raise ConfigError("need 1 <= min_len <= max_len")
        if self.proficiency_alpha <= 0 or self.proficiency_beta <= 0:
            raise ConfigError("Beta distribution parameters must be positive")


def _alphabet(size):
    return [f"p{i:02d}" for i in range(size)]


def _rater_label(theta, scale, rng, count, noise_std):
    base = scale.a + theta * (scale.b - scale.a)
    votes = base + rng.normal(0.0, noise_std, count)
    return float(np.clip(np.median(votes), scale.a, scale.b))


def generate_corpus(cfg):
    """Deterministic synthetic corpus for the given config (see module doc)."""
    rng = np.random.default_rng(cfg.seed)
    phones = _alphabet(cfg.alphabet_size)
    u = rng.normal(0.0, 1.0, cfg.feature_dim)
    v = rng.normal(0.0, 1.0, cfg.feature_dim)

    def reference(length):
        return tuple(phones[i] for i in rng.integers(0, len(phones), length))

    def feature_rows(theta, length, shift):
        base = theta * u + (1.0 - theta) * v + shift
        return base + rng.normal(0.0, cfg.noise_std, (length, cfg.feature_dim))

    samples = []
    for sp in range(cfg.n_speakers):
        theta = rng.beta(cfg.proficiency_alpha, cfg.proficiency_beta)
        for sent in range(cfg.sentences_per_speaker):
            length = int(rng.integers(cfg.min_len, cfg.max_len + 1))
            ref = reference(length)
            feats = feature_rows(theta, length, 0.0)
            scores = {
                aspect: _rater_label(theta, cfg.scale, rng, cfg.rater_count, cfg.rater_noise_std)
                for aspect in ASPECTS
            }
            samples.append(
                Sample(
                    id=f"sp{sp:04d}_u{sent:03d}",
                    cohort=IN_DIST,
                    reference=ref,
                    features=feats,
                    scores=scores,
                    scale=cfg.scale,
                ).validate()
            )

    if cfg.ood is not None:
        ood = cfg.ood
        alpha = ood.proficiency_alpha if ood.proficiency_alpha is not None else cfg.proficiency_alpha
        beta = ood.proficiency_beta if ood.proficiency_beta is not None else cfg.proficiency_beta
        for sp in range(ood.n_speakers):
            theta = rng.beta(alpha, beta)
            for sent in range(ood.sentences_per_speaker):
                length = int(rng.integers(cfg.min_len, cfg.max_len + 1))
                ref = reference(length)
                if rng.random() < ood.mismatch_rate:
                    # Off-task recording: the audio does not read this
                    # reference, so feature rows carry no proficiency signal
                    # and graders assign the lowest score.
                    feats = rng.normal(0.0, 1.0, (length, cfg.feature_dim)) + ood.feature_shift
                    scores = {aspect: ood.scale.a for aspect in ASPECTS}
                else:
                    feats = feature_rows(theta, length, ood.feature_shift)
                    scores = {
                        aspect: _rater_label(theta, ood.scale, rng, cfg.rater_count,
                                             cfg.rater_noise_std * ood.scale.width / cfg.scale.width)
                        for aspect in ASPECTS
                    }
                samples.append(
                    Sample(
                        id=f"ood{sp:04d}_u{sent:03d}",
                        cohort=OOD,
                        reference=ref,
                        features=feats,
                        scores=scores,
                        scale=ood.scale,
                    ).validate()
                )
    return samples


def speaker_split(samples, test_fraction):
    """Deterministic speaker-disjoint split into (train, test)."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError("test_fraction must lie strictly between 0 and 1")
    speakers = sorted({s.speaker for s in samples})
    n_test = max(1, round(len(speakers) * test_fraction))
    test_speakers = set(speakers[len(speakers) - n_test:])
    train = [s for s in samples if s.speaker not in test_speakers]
    test = [s for s in samples if s.speaker in test_speakers]
    return train, test


def _channel_pass(ref, rates, rng, alphabet, index):
    sub, dele, ins = rates
    out = []
    for tok in ref:
        roll = rng.random()
        if roll < sub:
            # uniform over the other tokens
            pick = int(rng.integers(len(alphabet) - 1))
            if pick >= index[tok]:
                pick += 1
            out.append(alphabet[pick])
        elif roll < sub + dele:
            continue
        elif roll < sub + dele + ins:
            out.append(tok)
            out.append(alphabet[int(rng.integers(len(alphabet)))])
        else:
            out.append(tok)
    if not out:
        # the channel may not emit an empty transcription
        out.append(alphabet[int(rng.integers(len(alphabet)))])
    return tuple(out)


def _hyp_features(sample, pseudo_ref, rng, dim):
    alignment = align(sample.reference, pseudo_ref)
    rows = []
    ref_pos = 0
    for r, h in alignment.pairs:
        if r != PLACEHOLDER and h != PLACEHOLDER:
            rows.append(sample.features[ref_pos])
            ref_pos += 1
        elif h == PLACEHOLDER:
            ref_pos += 1
        else:
            rows.append(rng.normal(0.0, 1.0, dim))
    return np.asarray(rows)


def augment(samples, nbest, mismatch_rate, channel, seed, quality_coupling=0.0):
    """Spawn `nbest` pseudo-referenced, pseudo-scored variants per sample.

    channel is the (substitution, deletion, insertion) per-phone error-rate
    triple. A `mismatch_rate` fraction of variants instead takes another
    sample's reference wholesale (simulated off-task input).
    """
    samples = list(samples)
    if not samples:
        raise ConfigError("cannot augment an empty corpus")
    if nbest < 1:
        raise ConfigError("nbest must be at least 1")
    sub, dele, ins = (float(r) for r in channel)
    if min(sub, dele, ins) < 0 or sub + dele + ins > 1.0:
        raise ConfigError("channel rates must be non-negative and sum to at most 1")
    if not 0.0 <= mismatch_rate <= 1.0:
        raise ConfigError("mismatch_rate must lie in [0, 1]")
    if not 0.0 <= quality_coupling <= 1.0:
        raise ConfigError("quality_coupling must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    alphabet = sorted({tok for s in samples for tok in s.reference})
    index = {tok: i for i, tok in enumerate(alphabet)}
    dim = samples[0].features.shape[1]

    out = []
    for idx, sample in enumerate(samples):
        severity = 1.0
        if quality_coupling > 0.0 and sample.scores:
            rel = np.mean([
                (score - sample.scale.a) / sample.scale.width
                for score in sample.scores.values()
            ])
            severity = 1.0 - quality_coupling * float(rel)
        rates = (sub * severity, dele * severity, ins * severity)
        for k in range(nbest):
            if len(samples) > 1 and rng.random() < mismatch_rate:
                other = int(rng.integers(len(samples) - 1))
                if other >= idx:
                    other += 1
                pseudo = samples[other].reference
            else:
                pseudo = _channel_pass(sample.reference, rates, rng, alphabet, index)
            out.append(
                AugmentedSample(
                    base=sample,
                    ordinal=k,
                    pseudo_reference=pseudo,
                    features_hyp=_hyp_features(sample, pseudo, rng, dim),
                    pseudo_score=nmi(sample.reference, pseudo),
                )
            )
    return out


def _sample_to_dict(sample):
    record = {
        "id": sample.id,
        "cohort": sample.cohort,
        "reference": list(sample.reference),
        "features": np.asarray(sample.features, dtype=np.float64).tolist(),
        "scores": sample.scores,
        "scale": [sample.scale.a, sample.scale.b],
    }
    if sample.pseudo_reference is not None:
        record["pseudo_reference"] = list(sample.pseudo_reference)
        record["pseudo_score"] = sample.pseudo_score
    return record


def save_corpus(samples, path):
    """Write samples (and/or augmented samples) as one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            if isinstance(sample, AugmentedSample):
                sample = sample.flatten()
            fh.write(json.dumps(_sample_to_dict(sample)) + "\n")


def _sample_from_dict(record, line):
    try:
        scale = record["scale"]
        sample = Sample(
            id=record["id"],
            cohort=record.get("cohort", IN_DIST),
            reference=tuple(record["reference"]),
            features=np.asarray(record["features"], dtype=np.float64),
            scores=record.get("scores"),
            scale=ScoreScale(float(scale[0]), float(scale[1])),
            pseudo_reference=(
                tuple(record["pseudo_reference"]) if "pseudo_reference" in record else None
            ),
            pseudo_score=record.get("pseudo_score"),
        )
    except (KeyError, TypeError, IndexError, ValueError, ConfigError) as exc:
        raise ParseError(f"bad sample record: {exc}", line=line) from exc
    try:
        return sample.validate()
    except ValidationError as exc:
        raise ValidationError(f"line {line}: {exc}") from exc


def load_corpus(path):
    """Read a JSONL corpus; empty file gives an empty list."""
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line=line_no) from exc
            if not isinstance(record, dict):
                raise ParseError("expected a JSON object", line=line_no)
            samples.append(_sample_from_dict(record, line_no))
    return samples
