from .featurizer import (
    DEFAULT_GROUPS,
    FEATURE_GROUPS,
    ReviewFeaturizer,
    char_ngrams,
    check_space,
    extract_features,
)
from .pos import TAGSET, pos_tag
from .readability import READABILITY_FEATURES, SCALE_INVARIANT, count_syllables, readability_scores

__all__ = [
    "DEFAULT_GROUPS",
    "FEATURE_GROUPS",
    "READABILITY_FEATURES",
    "SCALE_INVARIANT",
    "TAGSET",
    "ReviewFeaturizer",
    "char_ngrams",
    "check_space",
    "count_syllables",
    "extract_features",
    "pos_tag",
    "readability_scores",
]
