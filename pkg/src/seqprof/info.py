"""Entropy, mutual information and the normalized-mutual-information score.

A (reference, hypothesis) sentence pair is scored by aligning the two phone
sequences, normalizing the resulting confusion matrix into a joint
distribution, and computing

    NI = 2 * I(ref, hyp) / (H(ref) + H(hyp))

in nats. NI lies in [0, 1]: 0 for independent sequences, 1 when either
sequence determines the other. Marginals are taken from the alignment pair
list (placeholder included) so the joint and the marginals stay consistent.
"""

from dataclasses import dataclass

import numpy as np

from seqprof.alignment import sentence_confusion
from seqprof.errors import EmptyMatrix, InvalidDistribution

_SUM_TOL = 1e-8


@dataclass(frozen=True)
class JointDistribution:
    """Normalized confusion counts with their row/column marginals."""

    phone_set: tuple[str, ...]
    probs: np.ndarray
    marginal_ref: np.ndarray
    marginal_hyp: np.ndarray


def normalize(matrix):
    """Joint distribution from a confusion matrix; EmptyMatrix if total is 0."""
    if matrix.total <= 0:
        raise EmptyMatrix("cannot normalize a confusion matrix with zero total")
    probs = matrix.counts.astype(np.float64) / matrix.total
    return JointDistribution(
        phone_set=tuple(matrix.phone_set),
        probs=probs,
        marginal_ref=probs.sum(axis=1),
        marginal_hyp=probs.sum(axis=0),
    )


def entropy(marginal):
    """Shannon entropy of a probability vector, in nats; 0 ln 0 taken as 0."""
    p = np.asarray(marginal, dtype=np.float64)
    if np.any(p < 0):
        raise InvalidDistribution("negative probability entry")
    total = p.sum()
    if abs(total - 1.0) > _SUM_TOL:
        raise InvalidDistribution(f"probabilities sum to {total}, expected 1")
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def mutual_information(joint):
    """Mutual information of a JointDistribution, in nats (clamped at 0).

    Computed as sum p * (ln p - ln p_ref - ln p_hyp); the log-difference
    form makes a perfectly diagonal joint reproduce the entropy sum exactly,
    so identical sequences score NI = 1 without rounding residue.
    """
    p = joint.probs
    ref = np.broadcast_to(joint.marginal_ref[:, None], p.shape)
    hyp = np.broadcast_to(joint.marginal_hyp[None, :], p.shape)
    nz = p > 0
    pn = p[nz]
    value = float((pn * (np.log(pn) - np.log(ref[nz]) - np.log(hyp[nz]))).sum())
    return max(value, 0.0)


def nmi(ref, hyp):
    """Normalized mutual information of an aligned sentence pair, in [0, 1].

    If both marginal entropies are zero (both sides of the alignment are
    constant) the score is 1 when every aligned pair matches and 0
    otherwise.
    """
    matrix = sentence_confusion(ref, hyp)
    joint = normalize(matrix)
    h_ref = entropy(joint.marginal_ref)
    h_hyp = entropy(joint.marginal_hyp)
    if h_ref + h_hyp == 0.0:
        diagonal = sum(
            matrix.counts[i, i]
            for i in range(len(matrix.phone_set))
        )
        return 1.0 if diagonal == matrix.total else 0.0
    value = 2.0 * mutual_information(joint) / (h_ref + h_hyp)
    return min(max(value, 0.0), 1.0)
