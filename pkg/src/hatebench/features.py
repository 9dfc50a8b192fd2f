"""Baseline feature extractors: char n-grams, word TF-IDF, vector averaging.

All fitted vocabularies order their columns lexicographically and are fit on
training-fold text only; transforms are pure and never produce columns
outside the fitted vocabulary.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .embeddings import EmbeddingTable, OovPolicy, lookup


def char_ngrams(text: str, n_min: int, n_max: int) -> Counter:
    """Multiset of contiguous character n-grams of the lowercased text.

    Spaces count as characters; text shorter than n contributes nothing
    for that n.
    """
    if not (1 <= n_min <= n_max):
        raise ValueError(f"invalid n-gram range [{n_min}, {n_max}]")
    s = text.lower()
    grams: Counter = Counter()
    for n in range(n_min, n_max + 1):
        for i in range(len(s) - n + 1):
            grams[s[i : i + n]] += 1
    return grams


@dataclass(frozen=True)
class CharNgramVocab:
    n_min: int
    n_max: int
    min_doc_freq: int
    index: dict[str, int]  # gram -> column, lexicographic order


def fit_char_vocab(
    train_texts: Sequence[str], n_min: int, n_max: int, min_doc_freq: int = 2
) -> CharNgramVocab:
    """Collect grams with document frequency >= min_doc_freq, columns ordered
    lexicographically. An empty resulting vocabulary warns but is legal."""
    if len(train_texts) == 0:
        raise ValueError("cannot fit a char n-gram vocabulary on an empty corpus")
    df: Counter = Counter()
    for text in train_texts:
        df.update(set(char_ngrams(text, n_min, n_max)))
    kept = sorted(g for g, d in df.items() if d >= min_doc_freq)
    if not kept:
        warnings.warn("char n-gram vocabulary is empty after the min_doc_freq filter")
    return CharNgramVocab(
        n_min=n_min,
        n_max=n_max,
        min_doc_freq=min_doc_freq,
        index={g: i for i, g in enumerate(kept)},
    )


def transform_char(vocab: CharNgramVocab, texts: Sequence[str]) -> sp.csr_matrix:
    """Raw gram counts as a sparse matrix; unseen grams are ignored."""
    data, indices, indptr = [], [], [0]
    for text in texts:
        row = Counter()
        for gram, count in char_ngrams(text, vocab.n_min, vocab.n_max).items():
            col = vocab.index.get(gram)
            if col is not None:
                row[col] += count
        for col in sorted(row):
            indices.append(col)
            data.append(float(row[col]))
        indptr.append(len(indices))
    return sp.csr_matrix(
        (data, indices, indptr), shape=(len(texts), len(vocab.index)), dtype=np.float64
    )


# ---------------------------------------------------------------------------
# TF-IDF

@dataclass(frozen=True)
class TfidfModel:
    """Smoothed-idf model: idf(t) = ln((1 + N) / (1 + df(t))) + 1."""

    index: dict[str, int]  # term -> column, lexicographic order
    idf: np.ndarray  # (n_terms,)
    norm: str = "l2"  # "l2" | "none"


def fit_tfidf(train_token_seqs: Sequence[Sequence[str]], norm: str = "l2") -> TfidfModel:
    if len(train_token_seqs) == 0:
        raise ValueError("cannot fit TF-IDF on an empty corpus")
    if norm not in ("l2", "none"):
        raise ValueError(f"unknown norm {norm!r}")
    n_docs = len(train_token_seqs)
    df: Counter = Counter()
    for toks in train_token_seqs:
        df.update(set(toks))
    terms = sorted(df)
    idf = np.array(
        [math.log((1.0 + n_docs) / (1.0 + df[t])) + 1.0 for t in terms], dtype=np.float64
    )
    return TfidfModel(index={t: i for i, t in enumerate(terms)}, idf=idf, norm=norm)


def transform_tfidf(
    model: TfidfModel, token_seqs: Sequence[Sequence[str]]
) -> sp.csr_matrix:
    """count(t) * idf(t) rows, L2-normalized when the model says so.

    Terms outside the fitted vocabulary are ignored; an all-unseen document
    becomes a zero row.
    """
    data, indices, indptr = [], [], [0]
    for toks in token_seqs:
        counts = Counter(toks)
        row = {}
        for term, count in counts.items():
            col = model.index.get(term)
            if col is not None:
                row[col] = count * model.idf[col]
        cols = sorted(row)
        vals = np.array([row[c] for c in cols], dtype=np.float64)
        if model.norm == "l2" and vals.size:
            norm = float(np.sqrt(np.sum(vals * vals)))
            if norm > 0.0:
                vals = vals / norm
        indices.extend(cols)
        data.extend(vals.tolist())
        indptr.append(len(indices))
    return sp.csr_matrix(
        (data, indices, indptr),
        shape=(len(token_seqs), len(model.index)),
        dtype=np.float64,
    )


# ---------------------------------------------------------------------------
# Bag-of-words vector averaging

def bowv(
    tokens: Sequence[str], table: EmbeddingTable, policy: OovPolicy
) -> np.ndarray:
    """Componentwise mean of the tokens' vectors.

    Tokens the policy reports absent are excluded from both the sum and the
    denominator; if every token is absent the result is the zero vector.
    """
    total = np.zeros(table.dim)
    count = 0
    for tok in tokens:
        vec = lookup(table, tok, policy)
        if vec is None:
            continue
        total += vec
        count += 1
    if count == 0:
        return total
    return total / count


def bowv_matrix(
    token_seqs: Sequence[Sequence[str]], table: EmbeddingTable, policy: OovPolicy
) -> np.ndarray:
    return np.vstack([bowv(toks, table, policy) for toks in token_seqs])


# ---------------------------------------------------------------------------
# Serialization (reproducibility audits)

def vocab_to_json(obj: CharNgramVocab | TfidfModel) -> str:
    if isinstance(obj, CharNgramVocab):
        doc = {
            "schema": "hatebench/char-ngram-vocab/1",
            "n_min": obj.n_min,
            "n_max": obj.n_max,
            "min_doc_freq": obj.min_doc_freq,
            "terms": [{"term": g, "index": i} for g, i in sorted(obj.index.items(), key=lambda kv: kv[1])],
        }
    else:
        doc = {
            "schema": "hatebench/tfidf/1",
            "norm": obj.norm,
            "terms": [
                {"term": t, "index": i, "idf": float(obj.idf[i])}
                for t, i in sorted(obj.index.items(), key=lambda kv: kv[1])
            ],
        }
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)


def vocab_from_json(text: str) -> CharNgramVocab | TfidfModel:
    doc = json.loads(text)
    schema = doc.get("schema")
    if schema == "hatebench/char-ngram-vocab/1":
        return CharNgramVocab(
            n_min=doc["n_min"],
            n_max=doc["n_max"],
            min_doc_freq=doc["min_doc_freq"],
            index={e["term"]: e["index"] for e in doc["terms"]},
        )
    if schema == "hatebench/tfidf/1":
        terms = sorted(doc["terms"], key=lambda e: e["index"])
        return TfidfModel(
            index={e["term"]: e["index"] for e in terms},
            idf=np.array([e["idf"] for e in terms], dtype=np.float64),
            norm=doc["norm"],
        )
    raise ValueError(f"unknown vocabulary schema {schema!r}")
