"""Benchmark harness for tweet hate-speech classification methods.

Covers sparse baselines (char n-grams, TF-IDF, averaged word vectors),
three neural classifiers that learn task-specific word embeddings
(CNN, LSTM, embedding-averaging "fasttext" style), and stacks of those
learned embeddings with gradient boosted trees, all evaluated under
stratified k-fold cross-validation with support-weighted macro metrics.
"""

__version__ = "0.1.0"
