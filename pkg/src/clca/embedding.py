"""Deterministic text embeddings via signed feature hashing.

The built-in embedder replaces a hosted embedding service so the whole
pipeline runs offline and reproducibly: tokens are hashed with FNV-1a
64-bit, bucketed mod dim with a sign bit, then L2-normalized. Not
semantically meaningful, but stable across platforms.
"""

from __future__ import annotations

import re

import numpy as np

from .schemas import DialogueRecord

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF
_MSB = 1 << 63

# ASCII-only alphanumeric runs; anything else separates tokens.
# Multilingual tokenization is out of scope.
_TOKEN_RE = re.compile(r"[0-9a-z]+")


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def embed_text(text: str, dim: int = 64) -> np.ndarray:
    """Hash tokens into a signed `dim`-bucket vector and L2-normalize.

    Empty text (no tokens) yields the zero vector; any other input has
    unit L2 norm.
    """
    if dim < 1:
        raise ValueError("embedding dim must be >= 1")
    v = np.zeros(dim, dtype=np.float64)
    for tok in tokenize(text):
        h = fnv1a64(tok.encode("utf-8"))
        sign = 1.0 if (h & _MSB) == 0 else -1.0
        v[h % dim] += sign
    norm = float(np.linalg.norm(v))
    if norm > 0.0:
        v /= norm
    return v


def dialogue_text(record: DialogueRecord) -> str:
    """Flatten a conversation to the canonical embedding input: turns in
    order, each prefixed by its speaker, joined with single spaces."""
    return " ".join(f"{t.speaker}: {t.message}" for t in record.conversation)


def embed_dialogue(record: DialogueRecord, dim: int = 64) -> np.ndarray:
    return embed_text(dialogue_text(record), dim)
