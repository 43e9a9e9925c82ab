from .model import (
    BRANCHES, Batch, CharCnnConfig, CharVocab, LstmLayer, ModelSpec, SsLstmModel, embed_chars,
    embed_words, lstm_last_hidden, ss_lstm_forward,
)
from .train import (
    EpochRecord, GridCell, GridResult, History, NeuralTrainConfig, cell_seed, evaluate_model,
    grid_search, train_model,
)
