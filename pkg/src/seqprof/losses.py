"""Training objectives and their discrete-distribution counterparts.

The central objective is the interpolated MSE

    L(y) = (1-rho)/N * sum (y_t - s_t)^2
         + rho/N     * sum exp(-(shat_t - s_t)^2 / 2) * (y_t - shat_t)^2

mixing the error against human scores s_t with a Gaussian-kernel-weighted
error against anchor predictions shat_t. All scores are expected on a
common target scale before entering the loss.

The discrete cross-entropy / KL-divergence forms over marking bands are the
origin of this objective: freezing the KL expectation weights at the
band distribution centered on the human score and modelling both predictive
distributions as unit-variance Gaussians over the bands collapses the
band-wise regularized cross-entropy into the kernel-weighted quadratic
above. `band_objective_values` implements that band-wise objective directly
(via discretized Gaussians) so tests can confirm both routes share their
minimizer, which `imse_minimizer` gives in closed form.

Losses here are positive quantities to be minimized. KL divergence uses the
standard orientation sum p*log(p/q) >= 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from seqprof.errors import ConfigError, InfiniteLossError, InvalidDistribution, ShapeError


@dataclass(frozen=True)
class LossConfig:
    """Interpolation weight rho in [0, 1] and the Gaussian kernel width."""

    rho: float = 0.25
    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [0, 1], got {self.rho}")
        if not self.sigma > 0.0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")


def _paired(pred, target, name):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.size == 0:
        raise ShapeError(f"{name}: got shapes {pred.shape} and {target.shape}")
    return pred, target


def mse(pred, target):
    """Mean squared error over all elements."""
    pred, target = _paired(pred, target, "mse")
    return float(np.mean((pred - target) ** 2))


def kernel_weight(score, pseudo_score, sigma=1.0):
    """Gaussian kernel distance exp(-(shat - s)^2 / (2 sigma^2)), in (0, 1]."""
    s = np.asarray(score, dtype=np.float64)
    s_hat = np.asarray(pseudo_score, dtype=np.float64)
    w = np.exp(-((s_hat - s) ** 2) / (2.0 * sigma * sigma))
    return float(w) if w.ndim == 0 else w


def imse(pred, human, pseudo, cfg):
    """Interpolated MSE and its gradient w.r.t. pred.

    rho=0 reduces to plain MSE against the human scores, rho=1 to the
    kernel-weighted MSE against the pseudo scores alone. Arrays of any
    common shape are averaged over all elements (so per-aspect matrices
    yield the mean of per-aspect losses).
    """
    pred, human = _paired(pred, human, "imse")
    pseudo = np.asarray(pseudo, dtype=np.float64)
    if pseudo.shape != pred.shape:
        raise ShapeError(f"imse: pseudo shape {pseudo.shape} != pred shape {pred.shape}")
    rho = cfg.rho
    n = pred.size
    weights = kernel_weight(human, pseudo, cfg.sigma)
    r_human = pred - human
    r_pseudo = pred - pseudo
    loss = (1.0 - rho) * np.mean(r_human**2) + rho * np.mean(weights * r_pseudo**2)
    grad = (2.0 * (1.0 - rho) / n) * r_human + (2.0 * rho / n) * (weights * r_pseudo)
    return float(loss), grad


def imse_minimizer(score, pseudo_score, rho, sigma=1.0):
    """Closed-form minimizer of the per-sample interpolated loss.

    y* = [(1-rho) s + rho k shat] / [(1-rho) + rho k], k the kernel weight.
    """
    k = kernel_weight(score, pseudo_score, sigma)
    return ((1.0 - rho) * score + rho * k * pseudo_score) / ((1.0 - rho) + rho * k)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability masses over an increasing grid of marking-band values."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        if values.ndim != 1 or values.shape != probs.shape or values.size < 2:
            raise InvalidDistribution("need matching 1-d grids with at least 2 bands")
        if np.any(np.diff(values) <= 0):
            raise InvalidDistribution("band values must be strictly increasing")
        if np.any(probs < 0):
            raise InvalidDistribution("negative band probability")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise InvalidDistribution(f"band probabilities sum to {probs.sum()}")

    @classmethod
    def one_hot(cls, values, index):
        probs = np.zeros(len(values))
        probs[index] = 1.0
        return cls(values, probs)

    def band_of(self, value):
        """Index of the band whose value is closest to the given point."""
        return int(np.argmin(np.abs(self.values - value)))


def _check_grids(p, q, name):
    if p.values.shape != q.values.shape or not np.allclose(p.values, q.values, atol=1e-12):
        raise ShapeError(f"{name}: band grids differ")


def cross_entropy(target, model):
    """-sum target(y) log model(y); one-hot targets reduce to -log model(s)."""
    _check_grids(target, model, "cross_entropy")
    support = target.probs > 0
    if np.any(model.probs[support] <= 0):
        raise InfiniteLossError("model assigns zero mass where the target has mass")
    return float(-(target.probs[support] * np.log(model.probs[support])).sum())


def kld(p, q):
    """Kullback-Leibler divergence sum p log(p/q), non-negative."""
    _check_grids(p, q, "kld")
    support = p.probs > 0
    if np.any(q.probs[support] <= 0):
        raise InfiniteLossError("q assigns zero mass where p has mass")
    return float((p.probs[support] * np.log(p.probs[support] / q.probs[support])).sum())


def kld_regularized(target, model, anchor, rho):
    """Cross-entropy plus rho times the model-to-anchor KL divergence."""
    return cross_entropy(target, model) + rho * kld(model, anchor)


def gaussian_band_distribution(center, band_edges, sigma=1.0):
    """Unit-area discretization of a Gaussian over consecutive band edges.

    Band masses are CDF differences, renormalized over the covered range;
    band values are the interval midpoints.
    """
    edges = np.asarray(band_edges, dtype=np.float64)
    z = (edges - center) / (sigma * math.sqrt(2.0))
    cdf = np.array([math.erf(x) for x in z])
    probs = (cdf[1:] - cdf[:-1]) / 2.0
    probs = probs / probs.sum()
    values = (edges[:-1] + edges[1:]) / 2.0
    return DiscreteDistribution(values, probs)


def band_objective_values(candidates, score, pseudo_score, rho, band_edges, sigma=1.0):
    """Band-wise regularized objective evaluated at candidate predictions.

    Discretizes the score-centered and anchor-centered Gaussians over the
    band grid, freezes the KL weights at the score-centered distribution
    (the anchor band's mass relative to the score band's), and charges each
    candidate y the weighted negative log masses of its band:

        obj(y) = -(1-rho) log p[band(y)] - rho w log q[band(y)],
        w = p[band(shat)] / p[band(s)].

    Returns the objective per candidate; its grid argmin agrees with
    `imse_minimizer` to within one band width.
    """
    p = gaussian_band_distribution(score, band_edges, sigma)
    q = gaussian_band_distribution(pseudo_score, band_edges, sigma)
    weight = p.probs[p.band_of(pseudo_score)] / p.probs[p.band_of(score)]
    idx = np.clip(np.searchsorted(band_edges, candidates, side="right") - 1, 0, len(p.probs) - 1)
    return -(1.0 - rho) * np.log(p.probs[idx]) - rho * weight * np.log(q.probs[idx])
