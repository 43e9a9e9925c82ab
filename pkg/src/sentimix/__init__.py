"""Sentiment classification for Hindi-English code-mixed tweets.

Classical tf-idf/embedding baselines and character-CNN + word-embedding LSTM
models on top of a small reverse-mode autodiff engine.
"""
from .corpus import (
    LABELS, CorpusFormatError, Dataset, LangTag, SentimentLabel, Split, Token, Tweet,
    class_distribution, parse_dataset, read_dataset, save_dataset, write_dataset,
)
from .preprocess import PreprocessConfig, clean_dataset, clean_tweet, normalize_elongation
from .metrics import Metrics, evaluate, results_table

__version__ = "0.1.0"
