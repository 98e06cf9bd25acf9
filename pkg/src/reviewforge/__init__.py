"""Context-conditioned fake review generation and detection."""

from .boosting import AdaBoostDetector, ClassificationReport, FakeReviewDetector, classification_report
from .corpus import Context, ParallelCorpus, RawRecord, Vocabulary, build_context, build_vocabulary, clean_text, split_corpus
from .decoding import GenerationParams, GrammarSet, PenaltyDecoder, generate_review
from .features import ReviewFeaturizer
from .lm import NGramLM, greedy_decode
from .obfuscation import KeyboardWeights, Obfuscator, SpellingRuleSet

__version__ = "0.1.0"

__all__ = [
    "AdaBoostDetector",
    "ClassificationReport",
    "Context",
    "FakeReviewDetector",
    "GenerationParams",
    "GrammarSet",
    "KeyboardWeights",
    "NGramLM",
    "Obfuscator",
    "ParallelCorpus",
    "PenaltyDecoder",
    "RawRecord",
    "ReviewFeaturizer",
    "SpellingRuleSet",
    "Vocabulary",
    "build_context",
    "build_vocabulary",
    "classification_report",
    "clean_text",
    "generate_review",
    "greedy_decode",
    "split_corpus",
]
