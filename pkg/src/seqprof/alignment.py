"""Phone-sequence alignment and confusion-matrix accumulation.

A reference and a hypothesis phone sequence are aligned by minimum edit
distance (unit costs; deterministic traceback preferring match, then
substitution, then deletion, then insertion). Aligned token pairs are
counted into a sentence-level confusion matrix whose phone set includes the
reserved placeholder ``*`` standing in for the missing side of insertions
and deletions.

Phone sequences are plain sequences of non-empty string tokens; any finite
alphabet is accepted, only ``*`` is reserved.
"""

from dataclasses import dataclass

import numpy as np

from seqprof import kernels
from seqprof.errors import InvalidInput

PLACEHOLDER = "*"

PhoneSeq = tuple[str, ...]


def parse_phones(text):
    """Split a whitespace-separated token string into a phone tuple."""
    return tuple(text.split())


def validate_phones(seq, name="sequence"):
    """Check a sequence is usable for alignment; returns it as a tuple."""
    seq = tuple(seq)
    if len(seq) == 0:
        raise InvalidInput(f"{name} is empty")
    for tok in seq:
        if tok == PLACEHOLDER:
            raise InvalidInput(f"{name} contains the reserved placeholder {PLACEHOLDER!r}")
        if not isinstance(tok, str) or not tok:
            raise InvalidInput(f"{name} contains a non-string or empty token: {tok!r}")
    return seq


@dataclass(frozen=True)
class Alignment:
    """An aligned pair list plus its edit cost.

    Either side of a pair may be the placeholder, never both. Dropping
    placeholder entries from the first components reproduces the reference;
    from the second components, the hypothesis.
    """

    pairs: tuple[tuple[str, str], ...]
    cost: int

    def ref_tokens(self):
        return tuple(r for r, _ in self.pairs if r != PLACEHOLDER)

    def hyp_tokens(self):
        return tuple(h for _, h in self.pairs if h != PLACEHOLDER)

    def mirrored(self):
        """The same alignment read in the (hyp, ref) direction."""
        return Alignment(tuple((h, r) for r, h in self.pairs), self.cost)


def align(ref, hyp):
    """Minimum-edit-cost alignment of two phone sequences.

    Raises InvalidInput for empty sequences or sequences containing ``*``.
    """
    ref = validate_phones(ref, "ref")
    hyp = validate_phones(hyp, "hyp")

    vocab = {}
    for tok in ref:
        vocab.setdefault(tok, len(vocab))
    for tok in hyp:
        vocab.setdefault(tok, len(vocab))
    tokens = list(vocab)

    ref_ids = np.fromiter((vocab[t] for t in ref), dtype=np.int32, count=len(ref))
    hyp_ids = np.fromiter((vocab[t] for t in hyp), dtype=np.int32, count=len(hyp))
    cost, id_pairs = kernels.align_ids(ref_ids, hyp_ids)

    pairs = tuple(
        (
            PLACEHOLDER if r < 0 else tokens[r],
            PLACEHOLDER if h < 0 else tokens[h],
        )
        for r, h in id_pairs.tolist()
    )
    return Alignment(pairs=pairs, cost=cost)


class ConfusionMatrix:
    """Joint (ref, hyp) token counts accumulated from alignment pair lists.

    The phone set grows on demand as unseen tokens arrive; `counts[i, j]`
    holds how often phone_set[i] on the reference side was aligned with
    phone_set[j] on the hypothesis side.
    """

    def __init__(self):
        self.phone_set = []
        self._index = {}
        self.counts = np.zeros((0, 0), dtype=np.int64)
        self.total = 0

    def _slot(self, token):
        idx = self._index.get(token)
        if idx is None:
            idx = len(self.phone_set)
            self._index[token] = idx
            self.phone_set.append(token)
            grown = np.zeros((idx + 1, idx + 1), dtype=np.int64)
            grown[:idx, :idx] = self.counts
            self.counts = grown
        return idx

    def add_pair(self, ref_token, hyp_token):
        if ref_token == PLACEHOLDER and hyp_token == PLACEHOLDER:
            raise InvalidInput("both sides of an alignment pair are placeholders")
        i = self._slot(ref_token)
        j = self._slot(hyp_token)
        self.counts[i, j] += 1
        self.total += 1

    def marginal_ref_counts(self):
        return self.counts.sum(axis=1)

    def marginal_hyp_counts(self):
        return self.counts.sum(axis=0)

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return (
            self.phone_set == other.phone_set
            and self.total == other.total
            and np.array_equal(self.counts, other.counts)
        )


def accumulate(alignment, matrix):
    """Count every pair of an alignment into the matrix; returns the matrix."""
    for ref_token, hyp_token in alignment.pairs:
        matrix.add_pair(ref_token, hyp_token)
    return matrix


def sentence_confusion(ref, hyp):
    """Confusion matrix of a single aligned sentence pair."""
    return accumulate(align(ref, hyp), ConfusionMatrix())
