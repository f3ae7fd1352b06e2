from koopman_mpc.koopman.bank_store import load_bank, save_bank
from koopman_mpc.koopman.dictionary import Dictionary, LiftedState, Observation, lift
from koopman_mpc.koopman.rom import (
    FitResult,
    KoopmanModelBank,
    SnapshotSet,
    assemble,
    evaluate_bank,
    fit,
    fit_normal_equations,
    holdout_split,
    predict,
    project,
    train_bank,
)

__all__ = [
    "Dictionary",
    "FitResult",
    "KoopmanModelBank",
    "LiftedState",
    "Observation",
    "SnapshotSet",
    "assemble",
    "evaluate_bank",
    "fit",
    "fit_normal_equations",
    "holdout_split",
    "lift",
    "load_bank",
    "predict",
    "project",
    "save_bank",
    "train_bank",
]
