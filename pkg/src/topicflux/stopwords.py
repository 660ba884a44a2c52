"""Versioned English stopword list shipped with the package.

The list is frozen data: tokenization, language detection, and fitted term
models all depend on it, so a fitted model records the list's hash and a
loader refuses to mix models built against a different list.
"""

from __future__ import annotations

import hashlib
from importlib import resources

STOPWORDS_VERSION = "en-glasgow-318"

_cache: frozenset[str] | None = None
_hash_cache: str | None = None


def _raw_bytes() -> bytes:
    return resources.files("topicflux.data").joinpath("stopwords_en.txt").read_bytes()


def english_stopwords() -> frozenset[str]:
    global _cache
    if _cache is None:
        _cache = frozenset(_raw_bytes().decode("utf-8").split())
    return _cache


def stopwords_hash() -> str:
    """sha256 of the raw list file; stored in model manifests."""
    global _hash_cache
    if _hash_cache is None:
        _hash_cache = hashlib.sha256(_raw_bytes()).hexdigest()
    return _hash_cache
