"""Deterministic sentence embeddings.

The built-in embedder is a hashed TF-IDF: each token is mapped to one of D
coordinates by FNV-1a 64 with a sign taken from the hash's top bit, weighted
by sublinear term frequency times smoothed IDF, then L2-normalized. It is
fully reproducible: plain float64 arithmetic, tokens accumulated in first
appearance order, no randomness. Sessions may instead carry precomputed
vectors (e.g. from a neural sentence encoder); those are passed through
untouched.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .errors import InvalidDimension, NotAvailable

if TYPE_CHECKING:
    from .session import Session

DEFAULT_DIM = 256

# Unicode alphanumeric runs: word characters minus the underscore.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _U64
    return h


def tokenize(text: str) -> list[str]:
    """Lowercased maximal runs of Unicode alphanumerics, in order."""
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


@dataclass(frozen=True)
class EmbeddingMatrix:
    """One vector per sentence, uniform dimension.

    ``source`` is "builtin_hashed_tfidf" or "external". Built-in vectors are
    unit length except for non-lexical (tokenless) sentences, which embed to
    the zero vector and are flagged in ``non_lexical``.
    """

    vectors: tuple[tuple[float, ...], ...]
    source: str
    non_lexical: tuple[bool, ...]

    @property
    def dim(self) -> int:
        return len(self.vectors[0]) if self.vectors else 0


def embed_corpus(sentences: Sequence[str], dim: int = DEFAULT_DIM) -> EmbeddingMatrix:
    """Embed a corpus with the hashed TF-IDF scheme.

    For each sentence, distinct tokens are visited in first-appearance order.
    A token w with in-sentence count c contributes
    ``sign(w) * (1 + ln c) * (ln((1 + S) / (1 + df(w))) + 1)`` at coordinate
    ``fnv1a64(w) mod dim``, where sign(w) is +1 when bit 63 of the hash is 0
    and -1 otherwise, S is the corpus size and df(w) the number of sentences
    containing w. Vectors are then L2-normalized.
    """
    if dim < 2:
        raise InvalidDimension(f"embedding dimension must be >= 2, got {dim}")
    if not sentences:
        raise ValueError("cannot embed an empty corpus")

    token_lists = [tokenize(s) for s in sentences]
    n_sentences = len(sentences)
    df: Counter[str] = Counter()
    for tokens in token_lists:
        df.update(set(tokens))

    vectors: list[tuple[float, ...]] = []
    non_lexical: list[bool] = []
    for tokens in token_lists:
        vec = [0.0] * dim
        if not tokens:
            vectors.append(tuple(vec))
            non_lexical.append(True)
            continue
        counts = Counter(tokens)
        seen: set[str] = set()
        for tok in tokens:  # first-appearance order
            if tok in seen:
                continue
            seen.add(tok)
            h = fnv1a64(tok.encode("utf-8"))
            sign = 1.0 if (h >> 63) == 0 else -1.0
            tf = 1.0 + math.log(counts[tok])
            idf = math.log((1.0 + n_sentences) / (1.0 + df[tok])) + 1.0
            vec[h % dim] += sign * tf * idf
        norm = math.sqrt(sum(v * v for v in vec))
        if norm > 0.0:
            vec = [v / norm for v in vec]
        vectors.append(tuple(vec))
        non_lexical.append(False)

    return EmbeddingMatrix(
        vectors=tuple(vectors),
        source="builtin_hashed_tfidf",
        non_lexical=tuple(non_lexical),
    )


def external_embeddings(session: "Session") -> EmbeddingMatrix:
    """Return the session's precomputed vectors verbatim (no renormalization)."""
    if session.external_embeddings is None:
        raise NotAvailable(f"session {session.id!r} has no external embeddings")
    return EmbeddingMatrix(
        vectors=session.external_embeddings,
        source="external",
        non_lexical=tuple(s.non_lexical for s in session.sentences),
    )
