"""Token-sequence encoding: vocabulary building, padding, masking."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

PAD = 0
UNK = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


def build_vocab(token_seqs: Sequence[Sequence[str]]) -> dict[str, int]:
    """Word -> index map with reserved PAD=0 and UNK=1 rows.

    Words are indexed in sorted order so the vocabulary is a pure function
    of the token multiset.
    """
    words = sorted({tok for seq in token_seqs for tok in seq} - {PAD_TOKEN, UNK_TOKEN})
    vocab = {PAD_TOKEN: PAD, UNK_TOKEN: UNK}
    for word in words:
        vocab[word] = len(vocab)
    return vocab


def encode_batch(
    token_seqs: Sequence[Sequence[str]], vocab: Mapping[str, int], max_len: int
) -> tuple[np.ndarray, np.ndarray]:
    """Truncate/right-pad each sequence to max_len.

    Returns (indices int32 (B, max_len), mask bool (B, max_len)); the mask
    marks real tokens, so purely-padded positions never contribute to means
    or pooled activations downstream.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    batch = len(token_seqs)
    idx = np.zeros((batch, max_len), dtype=np.int32)
    mask = np.zeros((batch, max_len), dtype=bool)
    for row, seq in enumerate(token_seqs):
        for col, tok in enumerate(seq[:max_len]):
            idx[row, col] = vocab.get(tok, UNK)
            mask[row, col] = True
    return idx, mask
