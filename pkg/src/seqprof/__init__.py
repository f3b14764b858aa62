"""Imbalance-robust sequence proficiency scoring.

Building blocks: edit-distance phone alignment with confusion-matrix
accumulation, normalized-mutual-information pseudo-scoring, a synthetic
corpus generator with a noisy-channel augmenter, a transformer-encoder
scorer with hand-rolled backpropagation, interpolated-MSE training
objectives, a two-stage training pipeline (anchor pre-training, then
anchor-regularized training), and evaluation/reporting utilities.
"""

__version__ = "0.1.0"

from seqprof.alignment import Alignment, ConfusionMatrix, accumulate, align, sentence_confusion
from seqprof.info import JointDistribution, entropy, mutual_information, nmi, normalize
from seqprof.scales import ScoreScale, from_target, to_target

__all__ = [
    "Alignment",
    "ConfusionMatrix",
    "JointDistribution",
    "ScoreScale",
    "accumulate",
    "align",
    "entropy",
    "from_target",
    "mutual_information",
    "nmi",
    "normalize",
    "sentence_confusion",
    "to_target",
    "__version__",
]
