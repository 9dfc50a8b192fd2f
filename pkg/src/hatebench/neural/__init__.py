"""Neural classifiers that learn task-specific word embeddings.

Three architectures over a shared trainable embedding layer: a
multi-width convolutional net with max-over-time pooling, a single-layer
LSTM read out at the last real token, and an embedding-averaging
("fasttext" style) linear classifier. Forward and backward passes are
written directly in numpy and verified by central-difference checks.
"""

from .encoding import PAD, UNK, PAD_TOKEN, UNK_TOKEN, build_vocab, encode_batch
from .nets import CnnSpec, EmbeddingInit, FastTextSpec, LstmSpec, build_net, make_embedding_matrix
from .training import (
    TrainHyper,
    TrainedNeuralModel,
    TrainingDivergedError,
    extract_embeddings,
    predict_proba,
    predict_proba_batch,
    train_neural,
    tweet_embedding,
)
from .gradcheck import gradient_check
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "PAD",
    "UNK",
    "PAD_TOKEN",
    "UNK_TOKEN",
    "build_vocab",
    "encode_batch",
    "CnnSpec",
    "LstmSpec",
    "FastTextSpec",
    "EmbeddingInit",
    "build_net",
    "make_embedding_matrix",
    "TrainHyper",
    "TrainedNeuralModel",
    "TrainingDivergedError",
    "train_neural",
    "predict_proba",
    "predict_proba_batch",
    "extract_embeddings",
    "tweet_embedding",
    "gradient_check",
    "save_checkpoint",
    "load_checkpoint",
]
