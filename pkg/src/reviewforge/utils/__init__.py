from .validation import (
    check_count,
    check_documents,
    check_non_positive,
    check_probability,
    check_tokens,
    item_rng,
    resolve_rng,
    sha256_hex,
)

__all__ = [
    "check_count",
    "check_documents",
    "check_non_positive",
    "check_probability",
    "check_tokens",
    "item_rng",
    "resolve_rng",
    "sha256_hex",
]
