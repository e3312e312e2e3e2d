"""Title keyword extraction and similarity-then-frequency term retrieval.

Retrieval is two-stage: the top ``3k`` candidates by cosine similarity are
re-ranked by corpus frequency and the first ``k`` survive. Frequency demotes
rare proper nouns that would make poor imagery without discarding the
similarity neighborhood.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import DimensionMismatch, MalformedLine, UnknownWord

EMBEDDING_DIM = 300

# Compact English stopword list for the built-in keyword fallback.
STOPWORDS = frozenset(
    """a about above after again all also an and any are as at be because been
    before being below between both but by could did do does doing down during
    each few for from further had has have having he her here hers him his how
    i if in into is it its itself just me more most my no nor not now of off
    on once only or other our out over own per s same she should so some such
    t than that the their theirs them then there these they this those through
    to too under until up very was we were what when where which while who why
    will with you your""".split()
)

_TOKEN_RE = re.compile(r"[a-z][a-z'-]*")


@dataclass
class EmbeddingEntry:
    vector: np.ndarray
    frequency: int


class EmbeddingTable:
    """Immutable word -> (vector, frequency) store with a dense matrix view."""

    def __init__(self, entries: dict[str, EmbeddingEntry]):
        dims = {e.vector.shape[0] for e in entries.values()}
        if len(dims) > 1:
            raise DimensionMismatch(f"mixed vector dimensions: {sorted(dims)}")
        self._entries = dict(entries)
        self._words = list(self._entries.keys())
        self._matrix = (
            np.stack([self._entries[w].vector for w in self._words])
            if self._words
            else np.zeros((0, 0))
        )
        self._index = {w: i for i, w in enumerate(self._words)}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, word: str) -> bool:
        return word in self._entries

    @property
    def dimension(self) -> int:
        return self._matrix.shape[1] if len(self._words) else 0

    @property
    def words(self) -> list[str]:
        return list(self._words)

    def vector(self, word: str) -> np.ndarray:
        try:
            return self._entries[word].vector
        except KeyError:
            raise UnknownWord(word) from None

    def frequency(self, word: str) -> int:
        try:
            return self._entries[word].frequency
        except KeyError:
            raise UnknownWord(word) from None

    def matrix(self) -> np.ndarray:
        return self._matrix


@dataclass
class KeywordSet:
    """Scored keywords, scores non-increasing in [0, 1], terms distinct."""

    keywords: list[tuple[str, float]]

    def __post_init__(self):
        terms = [t for t, _ in self.keywords]
        if len(terms) != len(set(terms)):
            raise ValueError("keyword terms must be distinct")
        scores = [s for _, s in self.keywords]
        if any(s1 < s2 for s1, s2 in zip(scores, scores[1:])):
            raise ValueError("keyword scores must be non-increasing")
        if any(s < 0 or s > 1 for s in scores):
            raise ValueError("keyword scores must lie in [0, 1]")

    @property
    def terms(self) -> list[str]:
        return [t for t, _ in self.keywords]


@dataclass
class RelatedTerm:
    term: str
    similarity: float
    frequency: int
    rank: int  # 1-based, dense


def load_embeddings(data: bytes | str, expected_dim: int | None = EMBEDDING_DIM) -> EmbeddingTable:
    """Parse the embedding file: ``word c1 .. cD freq`` per line, whitespace-split.

    ``expected_dim`` pins the vector dimension (the bundled corpus format is
    300-dimensional); pass None to accept whatever the first line carries.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    entries: dict[str, EmbeddingEntry] = {}
    dim = expected_dim
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 3:
            raise MalformedLine(f"line {lineno}: expected word, components, frequency")
        word = parts[0]
        try:
            components = [float(p) for p in parts[1:-1]]
            frequency = int(parts[-1])
        except ValueError as exc:
            raise MalformedLine(f"line {lineno}: {exc}") from exc
        if frequency < 0:
            raise MalformedLine(f"line {lineno}: negative frequency")
        if dim is None:
            dim = len(components)
        if len(components) != dim:
            raise DimensionMismatch(
                f"line {lineno}: vector has {len(components)} components, expected {dim}"
            )
        entries[word] = EmbeddingEntry(np.asarray(components, dtype=np.float64), frequency)
    return EmbeddingTable(entries)


class KeywordProvider(Protocol):
    def score_terms(self, title: str) -> list[tuple[str, float]]:
        """Return (term, score) pairs for a chart title."""


class FallbackKeywordProvider:
    """Stopword filter plus corpus-rarity scoring; no external model needed.

    Rarity is ``1 / (1 + frequency)`` against the embedding corpus when one
    is supplied, normalized so the rarest surviving token scores 1.0.
    """

    def __init__(self, table: EmbeddingTable | None = None):
        self.table = table

    def score_terms(self, title: str) -> list[tuple[str, float]]:
        tokens = _TOKEN_RE.findall(title.lower())
        seen = []
        for tok in tokens:
            if tok in STOPWORDS or len(tok) < 2:
                continue
            if tok not in seen:
                seen.append(tok)
        if not seen:
            return []
        raw = []
        for tok in seen:
            freq = 0
            if self.table is not None and tok in self.table:
                freq = self.table.frequency(tok)
            raw.append((tok, 1.0 / (1.0 + freq)))
        top = max(score for _, score in raw)
        return [(tok, score / top) for tok, score in raw]


def extract_keywords(title: str, provider: KeywordProvider | None = None) -> KeywordSet:
    """Score title terms via the provider (built-in fallback when None).

    External provider scores are clamped to [0, 1]; duplicates keep their
    best score; output is sorted by descending score, stable on ties.
    """
    if provider is None:
        provider = FallbackKeywordProvider()
    scored = provider.score_terms(title)
    best: dict[str, float] = {}
    order: list[str] = []
    for term, score in scored:
        score = min(1.0, max(0.0, float(score)))
        if term not in best:
            order.append(term)
            best[term] = score
        else:
            best[term] = max(best[term], score)
    ranked = sorted(order, key=lambda t: -best[t])
    return KeywordSet(keywords=[(t, best[t]) for t in ranked])


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def related_terms(keyword: str, table: EmbeddingTable, k: int) -> list[RelatedTerm]:
    """Top ``3k``-by-cosine candidates re-ranked by descending frequency, first ``k`` kept.

    The keyword itself and zero-norm vectors are excluded. Ties are resolved
    deterministically (similarity, then frequency, then term) so results are
    reproducible across runs.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if keyword not in table:
        raise UnknownWord(keyword)
    qvec = table.vector(keyword)
    qnorm = float(np.linalg.norm(qvec))
    if qnorm == 0.0 or len(table) <= 1:
        return []
    matrix = table.matrix()
    norms = np.linalg.norm(matrix, axis=1)
    words = table.words
    candidates = []
    for i, word in enumerate(words):
        if word == keyword or norms[i] == 0.0:
            continue
        sim = float(matrix[i] @ qvec / (norms[i] * qnorm))
        candidates.append((word, sim))
    candidates.sort(key=lambda ws: (-ws[1], ws[0]))
    pool = candidates[: 3 * k]
    pool.sort(key=lambda ws: (-table.frequency(ws[0]), -ws[1], ws[0]))
    return [
        RelatedTerm(term=w, similarity=s, frequency=table.frequency(w), rank=i + 1)
        for i, (w, s) in enumerate(pool[:k])
    ]
