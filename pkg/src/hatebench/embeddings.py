"""Word-vector tables: loading, OOV policies, cosine neighbor probes."""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .utils import derive_seed


class EmbeddingParseError(ValueError):
    """A vector file line does not match the expected format."""


class WordNotFoundError(KeyError):
    """Query word absent from the table's vocabulary."""


@dataclass
class EmbeddingTable:
    """Vocabulary -> dense vector map of fixed dimension.

    Immutable by convention after construction; `provenance` is either
    "pretrained" or "learned:<model-name>".
    """

    dim: int
    vocab: dict[str, int]
    vectors: np.ndarray  # (|vocab|, dim) float64
    provenance: str = "pretrained"
    _norms: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.vectors.shape != (len(self.vocab), self.dim):
            raise ValueError(
                f"vector matrix shape {self.vectors.shape} inconsistent with "
                f"|vocab|={len(self.vocab)}, dim={self.dim}"
            )
        if not np.isfinite(self.vectors).all():
            raise ValueError("embedding table contains non-finite entries")

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def __len__(self) -> int:
        return len(self.vocab)

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.vocab[word]]

    @property
    def norms(self) -> np.ndarray:
        if self._norms is None:
            self._norms = np.linalg.norm(self.vectors, axis=1)
        return self._norms

    def words(self) -> list[str]:
        out = [""] * len(self.vocab)
        for w, i in self.vocab.items():
            out[i] = w
        return out


# ---------------------------------------------------------------------------
# OOV policy

class OovPolicy:
    """What `lookup` returns for a token missing from the table.

    ZERO: the zero vector. RANDOM: one fixed uniform(-scale, +scale) vector
    per (word, seed), cached, so repeated lookups agree. SKIP: the token is
    reported absent and excluded from averaging.
    """

    ZERO = "zero"
    RANDOM = "random"
    SKIP = "skip"

    def __init__(self, kind: str, scale: float = 0.25, seed: int = 0):
        if kind not in (self.ZERO, self.RANDOM, self.SKIP):
            raise ValueError(f"unknown OOV policy kind {kind!r}")
        self.kind = kind
        self.scale = scale
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    @classmethod
    def zero(cls) -> "OovPolicy":
        return cls(cls.ZERO)

    @classmethod
    def random(cls, scale: float = 0.25, seed: int = 0) -> "OovPolicy":
        return cls(cls.RANDOM, scale=scale, seed=seed)

    @classmethod
    def skip(cls) -> "OovPolicy":
        return cls(cls.SKIP)

    def vector_for(self, word: str, dim: int) -> np.ndarray | None:
        if self.kind == self.SKIP:
            return None
        if self.kind == self.ZERO:
            return np.zeros(dim)
        cached = self._cache.get(word)
        if cached is None or cached.shape[0] != dim:
            rng = np.random.default_rng(derive_seed("oov", self.seed, word))
            cached = rng.uniform(-self.scale, self.scale, size=dim)
            self._cache[word] = cached
        return cached


def lookup(table: EmbeddingTable, token: str, policy: OovPolicy) -> np.ndarray | None:
    """Stored row for in-vocab tokens, policy result otherwise (None = absent)."""
    idx = table.vocab.get(token)
    if idx is not None:
        return table.vectors[idx]
    return policy.vector_for(token, table.dim)


# ---------------------------------------------------------------------------
# Loading

def load_embedding_table(path: str | Path, expected_dim: int) -> EmbeddingTable:
    """Parse a plain-text vector file ("word v1 ... v_d" per line, no header).

    First occurrence wins on duplicate words (a warning is emitted); lines
    with the wrong component count or non-finite values raise
    :class:`EmbeddingParseError` with the line number.
    """
    path = Path(path)
    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            word = parts[0]
            comps = parts[1:]
            if comps and comps[-1] == "":  # tolerate trailing space
                comps = comps[:-1]
            if len(comps) != expected_dim:
                raise EmbeddingParseError(
                    f"{path}: line {lineno}: expected {expected_dim} components, "
                    f"found {len(comps)}"
                )
            try:
                vec = np.array(comps, dtype=np.float64)
            except ValueError:
                raise EmbeddingParseError(
                    f"{path}: line {lineno}: non-numeric vector component"
                ) from None
            if not np.isfinite(vec).all():
                raise EmbeddingParseError(f"{path}: line {lineno}: non-finite vector component")
            if word in vocab:
                warnings.warn(f"{path}: line {lineno}: duplicate word {word!r}, keeping first")
                continue
            vocab[word] = len(rows)
            rows.append(vec)
    vectors = np.vstack(rows) if rows else np.zeros((0, expected_dim))
    return EmbeddingTable(dim=expected_dim, vocab=vocab, vectors=vectors, provenance="pretrained")


def save_embedding_table(table: EmbeddingTable, path: str | Path) -> None:
    """Write in the same plain-text format accepted by the loader."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for word in table.words():
            comps = " ".join(repr(float(v)) for v in table.vector(word))
            fh.write(f"{word} {comps}\n")


# ---------------------------------------------------------------------------
# Neighbor probes

def cosine_similarities(table: EmbeddingTable, vec: np.ndarray) -> np.ndarray:
    """Cosine of `vec` against every row; zero-norm pairs get similarity 0."""
    qn = float(np.linalg.norm(vec))
    denom = table.norms * qn
    dots = table.vectors @ vec
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(denom > 0.0, dots / np.where(denom > 0.0, denom, 1.0), 0.0)
    return sims


def nearest_neighbors(
    table: EmbeddingTable, word: str, n: int
) -> list[tuple[str, float]]:
    """Top-n cosine neighbors, similarity descending, ties broken by word.

    The query word itself is excluded; result length is min(n, |vocab|-1).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if word not in table.vocab:
        raise WordNotFoundError(word)
    sims = cosine_similarities(table, table.vector(word))
    query_idx = table.vocab[word]
    words = table.words()

    order = np.argsort(-sims, kind="stable")
    result: list[tuple[str, float]] = []
    i = 0
    while i < order.size and len(result) < n:
        # gather the whole group of exactly-equal similarities, then sort
        # it lexicographically so ties are deterministic
        j = i
        s = sims[order[i]]
        while j < order.size and sims[order[j]] == s:
            j += 1
        group = sorted(
            words[idx] for idx in order[i:j] if idx != query_idx
        )
        for w in group:
            result.append((w, float(s)))
            if len(result) == n:
                break
        i = j
    return result


def neighbor_diff_report(
    pretrained: EmbeddingTable,
    learned: EmbeddingTable,
    words: Sequence[str],
    n: int,
) -> list[dict]:
    """Side-by-side neighbor lists for each word; absence is recorded per cell."""
    report = []
    for word in words:
        row = {"word": word, "pretrained": None, "learned": None}
        if word in pretrained:
            row["pretrained"] = nearest_neighbors(pretrained, word, n)
        if word in learned:
            row["learned"] = nearest_neighbors(learned, word, n)
        report.append(row)
    return report


def render_neighbor_report(report: list[dict], columns: tuple[str, str] = ("pretrained", "learned")) -> str:
    """Markdown table with one row per word and one column per table."""
    present = [c for c in columns if any(r.get(c) is not None for r in report)] or list(columns[:1])
    header = "| word | " + " | ".join(present) + " |"
    sep = "|" + "---|" * (len(present) + 1)
    lines = [header, sep]
    for row in report:
        cells = []
        for col in present:
            neigh = row.get(col)
            cells.append(
                "absent" if neigh is None else ", ".join(w for w, _ in neigh)
            )
        lines.append("| " + row["word"] + " | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
