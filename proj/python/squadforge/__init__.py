"""Captain prediction, lineup selection and season backtesting for fantasy football."""

from ._core import (
    Model,
    SquadforgeError,
    auc_roc,
    fit,
    label_captain,
    normalize_market,
    precision_at,
    replay_synthetic,
    run_cli,
    score_player,
    select_lineup,
)

__all__ = [
    "Model",
    "SquadforgeError",
    "auc_roc",
    "fit",
    "label_captain",
    "normalize_market",
    "precision_at",
    "replay_synthetic",
    "run_cli",
    "score_player",
    "select_lineup",
]
