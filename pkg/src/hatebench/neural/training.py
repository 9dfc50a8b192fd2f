"""Training loop, prediction, and learned-embedding extraction."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..corpus import Dataset, TokenizerPolicy, TweetRecord, DEFAULT_POLICY, tokenize_records
from ..embeddings import EmbeddingTable, OovPolicy
from ..features import bowv
from ..utils import derive_seed
from .encoding import PAD_TOKEN, UNK_TOKEN, build_vocab, encode_batch
from .nets import EmbeddingInit, NetSpec, NeuralNet, build_net, make_embedding_matrix
from .optim import Adam, RmsProp


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; message carries epoch/batch/parameter norms."""


@dataclass(frozen=True)
class TrainHyper:
    """Optimization knobs. batch_size=None picks the per-architecture default
    (64 for the averaging model, 128 otherwise)."""

    optimizer: str = "adam"  # "adam" | "rmsprop"
    learn_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    rho: float = 0.9
    eps: float = 1e-8
    batch_size: int | None = None
    epochs: int = 10
    max_len: int = 30
    seed: int = 0


def default_hyper(spec: NetSpec, seed: int = 0) -> TrainHyper:
    if spec.kind == "fasttext":
        return TrainHyper(optimizer="rmsprop", batch_size=64, seed=seed)
    return TrainHyper(optimizer="adam", batch_size=128, seed=seed)


def _resolve_batch_size(spec: NetSpec, hyper: TrainHyper) -> int:
    if hyper.batch_size is not None:
        return hyper.batch_size
    return 64 if spec.kind == "fasttext" else 128


@dataclass
class TrainedNeuralModel:
    """Frozen training result: the net (parameters + vocab), the spec and
    hyperparameters it was trained with, and the per-epoch log."""

    net: NeuralNet
    spec: NetSpec
    hyper: TrainHyper
    history: list[dict] = field(default_factory=list)
    name: str = "model"
    policy: TokenizerPolicy = DEFAULT_POLICY

    @property
    def vocab(self) -> dict[str, int]:
        return self.net.vocab


def _make_optimizer(hyper: TrainHyper, params):
    if hyper.optimizer == "adam":
        return Adam(params, lr=hyper.learn_rate, beta1=hyper.beta1, beta2=hyper.beta2, eps=hyper.eps)
    if hyper.optimizer == "rmsprop":
        return RmsProp(params, lr=hyper.learn_rate, rho=hyper.rho, eps=hyper.eps)
    raise ValueError(f"unknown optimizer {hyper.optimizer!r}")


def train_neural(
    spec: NetSpec,
    init: EmbeddingInit,
    train: Dataset | Sequence[TweetRecord],
    hyper: TrainHyper | None = None,
    policy: TokenizerPolicy = DEFAULT_POLICY,
    name: str | None = None,
) -> TrainedNeuralModel:
    """Train one model on labeled records with mini-batch backprop.

    Deterministic given the hyper seed: parameter init, shuffling and
    dropout all derive from it. Raises :class:`TrainingDivergedError` with
    diagnostics if the loss goes non-finite.
    """
    records = train.records if isinstance(train, Dataset) else tuple(train)
    if not records:
        raise ValueError("training set is empty")
    hyper = hyper or default_hyper(spec)
    name = name or f"{spec.kind}_{init.kind}"

    seqs = tokenize_records(records, policy)
    labels = np.array([int(r.label) for r in records], dtype=np.int64)
    vocab = build_vocab(seqs)
    embed = make_embedding_matrix(vocab, spec.embedding_dim, init)
    net = build_net(spec, vocab, embed, seed=derive_seed("net-init", hyper.seed))
    idx, mask = encode_batch(seqs, vocab, hyper.max_len)

    n = len(records)
    batch_size = _resolve_batch_size(spec, hyper)
    optimizer = _make_optimizer(hyper, net.params)
    shuffle_rng = np.random.default_rng(derive_seed("shuffle", hyper.seed))
    dropout_rng = np.random.default_rng(derive_seed("dropout", hyper.seed))

    history: list[dict] = []
    for epoch in range(hyper.epochs):
        tick = time.perf_counter()
        order = shuffle_rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, batch_size):
            rows = order[start : start + batch_size]
            loss, grads = net.loss_and_grads(
                idx[rows], mask[rows], labels[rows], train=True, rng=dropout_rng
            )
            if not np.isfinite(loss):
                norms = ", ".join(f"{k}={v:.3g}" for k, v in net.param_norms().items())
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {start // batch_size} "
                    f"(parameter norms: {norms})"
                )
            optimizer.step(net.params, grads)
            loss_sum += loss * rows.size
        accuracy = _train_accuracy(net, idx, mask, labels, batch_size)
        history.append(
            {
                "epoch": epoch,
                "loss": loss_sum / n,
                "accuracy": accuracy,
                "wall_time_s": time.perf_counter() - tick,
            }
        )
    return TrainedNeuralModel(
        net=net, spec=spec, hyper=hyper, history=history, name=name, policy=policy
    )


def _train_accuracy(net: NeuralNet, idx, mask, labels, batch_size: int) -> float:
    hits = 0
    for start in range(0, labels.shape[0], batch_size):
        sl = slice(start, start + batch_size)
        probs = net.predict_proba_encoded(idx[sl], mask[sl])
        hits += int((np.argmax(probs, axis=1) == labels[sl]).sum())
    return hits / labels.shape[0]


def predict_proba_batch(model: TrainedNeuralModel, token_seqs: Sequence[Sequence[str]]) -> np.ndarray:
    """Class-probability rows for already-tokenized inputs; dropout disabled."""
    idx, mask = encode_batch(token_seqs, model.vocab, model.hyper.max_len)
    out = []
    step = _resolve_batch_size(model.spec, model.hyper)
    for start in range(0, idx.shape[0], step):
        out.append(model.net.predict_proba_encoded(idx[start : start + step], mask[start : start + step]))
    return np.vstack(out) if out else np.zeros((0, model.spec.n_classes))


def predict_proba(model: TrainedNeuralModel, tokens: Sequence[str]) -> np.ndarray:
    return predict_proba_batch(model, [list(tokens)])[0]


def predict_labels_batch(model: TrainedNeuralModel, token_seqs) -> np.ndarray:
    return np.argmax(predict_proba_batch(model, token_seqs), axis=1).astype(np.int64)


def extract_embeddings(model: TrainedNeuralModel) -> EmbeddingTable:
    """The embedding layer as a table keyed by the training vocabulary.

    PAD/UNK rows are dropped; provenance records the model name.
    """
    embed = model.net.params["embed"]
    words = [
        (word, row)
        for word, row in sorted(model.vocab.items(), key=lambda kv: kv[1])
        if word not in (PAD_TOKEN, UNK_TOKEN)
    ]
    vocab = {word: i for i, (word, _) in enumerate(words)}
    vectors = np.array([embed[row] for _, row in words], dtype=np.float64)
    if not words:
        vectors = np.zeros((0, model.spec.embedding_dim))
    return EmbeddingTable(
        dim=model.spec.embedding_dim,
        vocab=vocab,
        vectors=vectors,
        provenance=f"learned:{model.name}",
    )


def tweet_embedding(table: EmbeddingTable, tokens: Sequence[str]) -> np.ndarray:
    """Mean of known-token vectors; OOV tokens are skipped entirely."""
    return bowv(tokens, table, OovPolicy.skip())
