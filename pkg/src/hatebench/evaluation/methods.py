"""The benchmark method registry: every comparison row as a fit/predict pair.

Part A are the sparse/static baselines, part B the neural classifiers used
directly, part C the stacks that feed neural-learned embeddings into a
gradient boosted tree classifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..classifiers import GbdtParams, balanced_weights, train_gbdt, train_linear
from ..corpus import DEFAULT_POLICY, TokenizerPolicy, TweetRecord, tokenize_records
from ..embeddings import EmbeddingTable, OovPolicy
from ..features import (
    bowv_matrix,
    fit_char_vocab,
    fit_tfidf,
    transform_char,
    transform_tfidf,
)
from ..neural import (
    CnnSpec,
    EmbeddingInit,
    FastTextSpec,
    LstmSpec,
    TrainHyper,
    extract_embeddings,
    predict_proba_batch,
    train_neural,
)
from ..utils import derive_seed

Predictor = Callable[[Sequence[TweetRecord]], np.ndarray]


class MethodConfigError(ValueError):
    """An experiment spec cannot be realized (bad method id, override, or
    missing pretrained table)."""


@dataclass(frozen=True)
class MethodDef:
    id: str
    part: str  # "A" | "B" | "C"
    title: str
    needs_pretrained: bool = False
    arch: str | None = None  # cnn | lstm | fasttext
    init: str | None = None  # "random" | "glove"


_DEFS = [
    MethodDef("CHAR_NGRAM_LR", "A", "Char n-grams + logistic regression"),
    MethodDef("TFIDF_SVM", "A", "TF-IDF + balanced SVM"),
    MethodDef("TFIDF_GBDT", "A", "TF-IDF + GBDT"),
    MethodDef("BOWV_SVM", "A", "Averaged word vectors + balanced SVM", needs_pretrained=True),
    MethodDef("BOWV_GBDT", "A", "Averaged word vectors + GBDT", needs_pretrained=True),
    MethodDef("CNN_RAND", "B", "CNN, random embeddings", arch="cnn", init="random"),
    MethodDef("CNN_GLOVE", "B", "CNN, GloVe embeddings", needs_pretrained=True, arch="cnn", init="glove"),
    MethodDef("FASTTEXT_RAND", "B", "FastText-style, random embeddings", arch="fasttext", init="random"),
    MethodDef("FASTTEXT_GLOVE", "B", "FastText-style, GloVe embeddings", needs_pretrained=True, arch="fasttext", init="glove"),
    MethodDef("LSTM_RAND", "B", "LSTM, random embeddings", arch="lstm", init="random"),
    MethodDef("LSTM_GLOVE", "B", "LSTM, GloVe embeddings", needs_pretrained=True, arch="lstm", init="glove"),
    MethodDef("CNN_GLOVE_GBDT", "C", "CNN (GloVe) embeddings + GBDT", needs_pretrained=True, arch="cnn", init="glove"),
    MethodDef("CNN_RAND_GBDT", "C", "CNN (random) embeddings + GBDT", arch="cnn", init="random"),
    MethodDef("FASTTEXT_GLOVE_GBDT", "C", "FastText-style (GloVe) embeddings + GBDT", needs_pretrained=True, arch="fasttext", init="glove"),
    MethodDef("FASTTEXT_RAND_GBDT", "C", "FastText-style (random) embeddings + GBDT", arch="fasttext", init="random"),
    MethodDef("LSTM_GLOVE_GBDT", "C", "LSTM (GloVe) embeddings + GBDT", needs_pretrained=True, arch="lstm", init="glove"),
    MethodDef("LSTM_RAND_GBDT", "C", "LSTM (random) embeddings + GBDT", arch="lstm", init="random"),
]

METHODS: dict[str, MethodDef] = {d.id: d for d in _DEFS}

_FEATURE_KEYS = {"ngram_min", "ngram_max", "min_doc_freq", "tfidf_norm"}
_LINEAR_KEYS = {"C"}
_GBDT_KEYS = {"n_rounds", "max_depth", "gbdt_learning_rate", "min_samples_leaf", "dense_cap"}
_NEURAL_KEYS = {
    "epochs",
    "batch_size",
    "max_len",
    "learn_rate",
    "optimizer",
    "embedding_dim",
    "hidden_size",
    "maps_per_width",
    "filter_widths",
    "dropout",
    "oov_scale",
}

_ALLOWED_OVERRIDES = {
    "CHAR_NGRAM_LR": _FEATURE_KEYS | _LINEAR_KEYS,
    "TFIDF_SVM": _FEATURE_KEYS | _LINEAR_KEYS,
    "TFIDF_GBDT": _FEATURE_KEYS | _GBDT_KEYS,
    "BOWV_SVM": _LINEAR_KEYS,
    "BOWV_GBDT": _GBDT_KEYS,
}
for _d in _DEFS:
    if _d.part == "B":
        _ALLOWED_OVERRIDES[_d.id] = set(_NEURAL_KEYS)
    elif _d.part == "C":
        _ALLOWED_OVERRIDES[_d.id] = _NEURAL_KEYS | _GBDT_KEYS


def validate_overrides(method_id: str, overrides: dict) -> None:
    if method_id not in METHODS:
        raise MethodConfigError(
            f"unknown method id {method_id!r}; valid ids: {', '.join(METHODS)}"
        )
    allowed = _ALLOWED_OVERRIDES[method_id]
    unknown = set(overrides) - allowed
    if unknown:
        raise MethodConfigError(
            f"method {method_id}: unknown override(s) {sorted(unknown)}; "
            f"allowed: {sorted(allowed)}"
        )


@dataclass
class MethodContext:
    """Everything a pipeline needs besides the training records."""

    policy: TokenizerPolicy = DEFAULT_POLICY
    pretrained: EmbeddingTable | None = None
    overrides: dict = field(default_factory=dict)
    fold_seed: int = 0
    n_classes: int = 3
    prelearned: EmbeddingTable | None = None  # full-corpus table under the leaky protocol


def _labels(records: Sequence[TweetRecord]) -> np.ndarray:
    return np.array([int(r.label) for r in records], dtype=np.int64)


def _present_weights(y: np.ndarray) -> dict[int, float]:
    values, counts = np.unique(y, return_counts=True)
    return balanced_weights({int(v): int(c) for v, c in zip(values, counts)})


def _gbdt_params(ov: dict) -> GbdtParams:
    return GbdtParams(
        n_rounds=int(ov.get("n_rounds", 100)),
        max_depth=int(ov.get("max_depth", 6)),
        learning_rate=float(ov.get("gbdt_learning_rate", 0.3)),
        min_samples_leaf=int(ov.get("min_samples_leaf", 1)),
        dense_cap=int(ov.get("dense_cap", 20000)),
    )


def build_net_spec(mdef: MethodDef, ov: dict):
    dim = int(ov.get("embedding_dim", 200))
    if mdef.arch == "cnn":
        widths = tuple(int(w) for w in ov.get("filter_widths", (3, 4, 5)))
        return CnnSpec(
            filter_widths=widths,
            maps_per_width=int(ov.get("maps_per_width", 100)),
            dropout=float(ov.get("dropout", 0.5)),
            embedding_dim=dim,
        )
    if mdef.arch == "lstm":
        return LstmSpec(
            hidden_size=int(ov.get("hidden_size", 200)),
            dropout=float(ov.get("dropout", 0.5)),
            embedding_dim=dim,
        )
    return FastTextSpec(embedding_dim=dim)


def build_hyper(mdef: MethodDef, ov: dict, seed: int) -> TrainHyper:
    default_opt = "rmsprop" if mdef.arch == "fasttext" else "adam"
    default_batch = 64 if mdef.arch == "fasttext" else 128
    return TrainHyper(
        optimizer=str(ov.get("optimizer", default_opt)),
        learn_rate=float(ov.get("learn_rate", 1e-3)),
        batch_size=int(ov.get("batch_size", default_batch)),
        epochs=int(ov.get("epochs", 10)),
        max_len=int(ov.get("max_len", 30)),
        seed=seed,
    )


def _embedding_init(mdef: MethodDef, ctx: MethodContext) -> EmbeddingInit:
    scale = float(ctx.overrides.get("oov_scale", 0.25))
    seed = derive_seed(ctx.fold_seed, "embed-init")
    if mdef.init == "glove":
        if ctx.pretrained is None:
            raise MethodConfigError(f"method {mdef.id} requires a pretrained embedding table")
        return EmbeddingInit.pretrained(ctx.pretrained, scale=scale, seed=seed)
    return EmbeddingInit.random(scale=scale, seed=seed)


def train_method_learner(mdef: MethodDef, records: Sequence[TweetRecord], ctx: MethodContext):
    """Fit the neural stage of a part B/C method (also used by the leaky
    protocol's single full-corpus pass)."""
    spec = build_net_spec(mdef, ctx.overrides)
    hyper = build_hyper(mdef, ctx.overrides, seed=ctx.fold_seed)
    init = _embedding_init(mdef, ctx)
    return train_neural(spec, init, records, hyper=hyper, policy=ctx.policy,
                        name=f"{mdef.arch}_{mdef.init}")


def fit_method(
    mdef: MethodDef, train_records: Sequence[TweetRecord], ctx: MethodContext
) -> tuple[Predictor, dict]:
    """Fit one benchmark method on training records only.

    Returns (predictor, fit_info); the predictor maps records to label
    arrays, fit_info carries training history/models for logging.
    """
    validate_overrides(mdef.id, ctx.overrides)
    y = _labels(train_records)
    ov = ctx.overrides
    policy = ctx.policy

    if mdef.id == "CHAR_NGRAM_LR":
        vocab = fit_char_vocab(
            [r.text for r in train_records],
            int(ov.get("ngram_min", 1)),
            int(ov.get("ngram_max", 4)),
            int(ov.get("min_doc_freq", 2)),
        )
        model = train_linear(
            transform_char(vocab, [r.text for r in train_records]),
            y,
            loss="logistic",
            C=float(ov.get("C", 1.0)),
            seed=ctx.fold_seed,
            n_classes=ctx.n_classes,
        )
        return (lambda recs: model.predict(transform_char(vocab, [r.text for r in recs]))), {}

    if mdef.id in ("TFIDF_SVM", "TFIDF_GBDT"):
        tfidf = fit_tfidf(tokenize_records(train_records, policy), norm=str(ov.get("tfidf_norm", "l2")))
        x_train = transform_tfidf(tfidf, tokenize_records(train_records, policy))
        if mdef.id == "TFIDF_SVM":
            model = train_linear(
                x_train,
                y,
                loss="hinge",
                weights=_present_weights(y),
                C=float(ov.get("C", 1.0)),
                seed=ctx.fold_seed,
                n_classes=ctx.n_classes,
            )
        else:
            model = train_gbdt(x_train, y, params=_gbdt_params(ov), seed=ctx.fold_seed,
                               n_classes=ctx.n_classes)
        return (
            lambda recs: model.predict(transform_tfidf(tfidf, tokenize_records(recs, policy)))
        ), {}

    if mdef.id in ("BOWV_SVM", "BOWV_GBDT"):
        if ctx.pretrained is None:
            raise MethodConfigError(f"method {mdef.id} requires a pretrained embedding table")
        table = ctx.pretrained
        skip = OovPolicy.skip()
        x_train = bowv_matrix(tokenize_records(train_records, policy), table, skip)
        if mdef.id == "BOWV_SVM":
            model = train_linear(
                x_train, y, loss="hinge", weights=_present_weights(y),
                C=float(ov.get("C", 1.0)), seed=ctx.fold_seed, n_classes=ctx.n_classes,
            )
        else:
            model = train_gbdt(x_train, y, params=_gbdt_params(ov), seed=ctx.fold_seed,
                               n_classes=ctx.n_classes)
        return (
            lambda recs: model.predict(bowv_matrix(tokenize_records(recs, policy), table, skip))
        ), {}

    if mdef.part == "B":
        model = train_method_learner(mdef, train_records, ctx)
        return (
            lambda recs: np.argmax(
                predict_proba_batch(model, tokenize_records(recs, policy)), axis=1
            ).astype(np.int64)
        ), {"history": model.history, "model": model}

    if mdef.part == "C":
        info: dict = {}
        if ctx.prelearned is not None:
            table = ctx.prelearned
        else:
            learner = train_method_learner(mdef, train_records, ctx)
            table = extract_embeddings(learner)
            info = {"history": learner.history, "model": learner}
        skip = OovPolicy.skip()
        x_train = bowv_matrix(tokenize_records(train_records, policy), table, skip)
        gbdt = train_gbdt(x_train, y, params=_gbdt_params(ov), seed=ctx.fold_seed,
                          n_classes=ctx.n_classes)
        return (
            lambda recs: gbdt.predict(bowv_matrix(tokenize_records(recs, policy), table, skip))
        ), info

    raise MethodConfigError(f"unknown method id {mdef.id!r}")
