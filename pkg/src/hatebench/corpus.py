"""Labeled tweet corpus: loading, tweet tokenization, stratified fold plans."""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EMPTY_TOKEN = "<empty>"

FORMATS = ("csv", "tsv", "jsonl")
REQUIRED_FIELDS = ("id", "text", "label")


class DatasetError(ValueError):
    """An input file violates the dataset schema."""


class StratificationError(ValueError):
    """A fold plan cannot satisfy the per-class stratification bound."""


class Label(IntEnum):
    """Tweet class with a fixed integer encoding (stable across runs so
    confusion matrices and stored reports stay comparable)."""

    RACIST = 0
    SEXIST = 1
    NONE = 2

    @classmethod
    def parse(cls, raw: str) -> "Label":
        try:
            return cls[str(raw).strip().upper()]
        except KeyError:
            raise DatasetError(
                f"unknown label {raw!r}; expected one of "
                + ", ".join(m.name.lower() for m in cls)
            ) from None


N_CLASSES = len(Label)


@dataclass(frozen=True)
class TweetRecord:
    id: str
    text: str
    label: Label


@dataclass(frozen=True)
class Dataset:
    """Immutable ordered collection of records with unique ids."""

    records: tuple[TweetRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    @cached_property
    def class_counts(self) -> dict[Label, int]:
        counts = {label: 0 for label in Label}
        for rec in self.records:
            counts[rec.label] += 1
        return counts

    def labels(self) -> np.ndarray:
        return np.array([int(r.label) for r in self.records], dtype=np.int64)

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(tuple(self.records[i] for i in indices))

    @cached_property
    def content_hash(self) -> str:
        """Digest of the canonical JSON-lines serialization."""
        h = hashlib.sha256()
        for rec in self.records:
            h.update(_record_json(rec).encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


def _record_json(rec: TweetRecord) -> str:
    return json.dumps(
        {"id": rec.id, "text": rec.text, "label": rec.label.name.lower()},
        ensure_ascii=False,
        sort_keys=True,
    )


def _build_dataset(rows: Iterable[tuple[int, dict]], source: str) -> Dataset:
    records = []
    seen_ids: set[str] = set()
    for lineno, row in rows:
        for field in REQUIRED_FIELDS:
            if field not in row or row[field] is None:
                raise DatasetError(f"{source}: row {lineno}: missing column {field!r}")
        rec_id = str(row["id"])
        text = str(row["text"])
        if not text:
            raise DatasetError(f"{source}: row {lineno}: empty text for id {rec_id!r}")
        if rec_id in seen_ids:
            raise DatasetError(f"{source}: row {lineno}: duplicate id {rec_id!r}")
        seen_ids.add(rec_id)
        try:
            label = Label.parse(row["label"])
        except DatasetError as exc:
            raise DatasetError(f"{source}: row {lineno}: {exc}") from None
        records.append(TweetRecord(id=rec_id, text=text, label=label))
    return Dataset(tuple(records))


def load_dataset(path: str | Path, format: str | None = None) -> Dataset:
    """Load a labeled corpus from CSV/TSV (header id,text,label) or JSON lines.

    Row order is preserved. Raises :class:`DatasetError` naming the offending
    column or row for schema violations, unknown labels, duplicate ids and
    empty text.
    """
    path = Path(path)
    fmt = format or {".csv": "csv", ".tsv": "tsv", ".jsonl": "jsonl"}.get(path.suffix, None)
    if fmt not in FORMATS:
        raise DatasetError(f"unsupported dataset format {fmt!r}; expected one of {FORMATS}")

    if fmt in ("csv", "tsv"):
        delim = "," if fmt == "csv" else "\t"
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh, delimiter=delim)
            if reader.fieldnames is None:
                raise DatasetError(f"{path}: empty file, expected a header row")
            for field in REQUIRED_FIELDS:
                if field not in reader.fieldnames:
                    raise DatasetError(f"{path}: missing column {field!r} in header")
            rows = ((i + 2, row) for i, row in enumerate(reader))
            return _build_dataset(rows, str(path))

    def _jsonl_rows():
        with path.open(encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DatasetError(f"{path}: row {i + 1}: invalid JSON ({exc})") from None
                yield i + 1, obj

    return _build_dataset(_jsonl_rows(), str(path))


def save_dataset(dataset: Dataset, path: str | Path, format: str = "jsonl") -> None:
    """Serialize a dataset; the jsonl form is the canonical one used for hashing."""
    path = Path(path)
    if format == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for rec in dataset.records:
                fh.write(_record_json(rec) + "\n")
        return
    if format in ("csv", "tsv"):
        delim = "," if format == "csv" else "\t"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, delimiter=delim)
            writer.writerow(REQUIRED_FIELDS)
            for rec in dataset.records:
                writer.writerow([rec.id, rec.text, rec.label.name.lower()])
        return
    raise DatasetError(f"unsupported dataset format {format!r}")


# ---------------------------------------------------------------------------
# Tokenization

@dataclass(frozen=True)
class TokenizerPolicy:
    """Tweet-cleaning knobs; the policy fully determines tokenize output."""

    lowercase: bool = True
    strip_urls: bool = True
    strip_mentions: bool = True
    keep_hashtag_word: bool = True  # "#Foo" -> "foo"; when off the hashtag is dropped


DEFAULT_POLICY = TokenizerPolicy()

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#(\w+)")
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str, policy: TokenizerPolicy = DEFAULT_POLICY) -> list[str]:
    """Split tweet text into tokens (maximal alphanumeric runs).

    Degenerate input yields an empty list, never an error.
    """
    s = text
    if policy.strip_urls:
        s = _URL_RE.sub(" ", s)
    if policy.strip_mentions:
        s = _MENTION_RE.sub(" ", s)
    s = _HASHTAG_RE.sub(r"\1" if policy.keep_hashtag_word else " ", s)
    if policy.lowercase:
        s = s.lower()
    return _TOKEN_RE.findall(s)


def tokenize_records(
    records: Sequence[TweetRecord], policy: TokenizerPolicy = DEFAULT_POLICY
) -> list[list[str]]:
    """Tokenize each record; tweets that clean down to nothing keep a single
    reserved token so corpus-level counts match the source file."""
    out = []
    for rec in records:
        toks = tokenize(rec.text, policy)
        out.append(toks if toks else [EMPTY_TOKEN])
    return out


# ---------------------------------------------------------------------------
# Fold plans

@dataclass(frozen=True)
class FoldPlan:
    """Stratified assignment of record indices to folds."""

    k: int
    seed: int
    assignments: np.ndarray  # index -> fold, shape (n,)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def make_folds(dataset: Dataset, k: int, seed: int) -> FoldPlan:
    """Stratified k-fold plan, deterministic given (dataset order, k, seed).

    Every class present in the dataset is spread so that per-fold counts
    differ from count/k by at most one. Classes with fewer than k members
    make stratification impossible and raise :class:`StratificationError`.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    for label, count in dataset.class_counts.items():
        if 0 < count < k:
            raise StratificationError(
                f"class {label.name} has only {count} records, fewer than k={k}"
            )
    if len(dataset) == 0:
        raise StratificationError("cannot fold an empty dataset")

    rng = np.random.default_rng(seed)
    assignments = np.empty(len(dataset), dtype=np.int32)
    for label in Label:  # fixed class order keeps the plan reproducible
        idxs = np.array(
            [i for i, rec in enumerate(dataset.records) if rec.label == label],
            dtype=np.int64,
        )
        if idxs.size == 0:
            continue
        rng.shuffle(idxs)
        assignments[idxs] = np.arange(idxs.size, dtype=np.int32) % k
    return FoldPlan(k=k, seed=seed, assignments=assignments)
