"""Latent-space citation backtesting engine.

Thin Python veneer over the C++ core: corpus stores, synthetic corpora,
exact range queries, confusion scoring, and walk-forward backtests.
"""

from citescope._citescope import (
    Article,
    Corpus,
    RangeIndex,
    __version__,
    distance,
    grid_search,
    load_corpus,
    make_corpus,
    n_predictions_for,
    run_backtest,
    store_write,
    synth_corpus,
)

__all__ = [
    "Article",
    "Corpus",
    "RangeIndex",
    "__version__",
    "distance",
    "grid_search",
    "load_corpus",
    "make_corpus",
    "n_predictions_for",
    "run_backtest",
    "store_write",
    "synth_corpus",
]
