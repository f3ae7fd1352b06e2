import logging
import warnings

from koopman_mpc.commands.common import config_from_args
from koopman_mpc.config import WORKERS
from koopman_mpc.errors import RankDeficientWarning
from koopman_mpc.koopman.bank_store import save_bank
from koopman_mpc.koopman.rom import evaluate_bank, holdout_split, train_bank
from koopman_mpc.run_config import RunConfig
from koopman_mpc.sim.training import generate_training_data

logger = logging.getLogger(__name__)


def cmd_train(cfg: RunConfig):
    """Simulate training data, fit the 7-model bank, persist it."""
    timing = cfg.timing
    horizon = cfg.mpc.model_copy(update={"t_s": timing.t_s})
    log = generate_training_data(cfg.training_config(), cfg.motor, horizon, timing)
    train_log, test_log = holdout_split(log, cfg.koopman.holdout_fraction)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RankDeficientWarning)
        bank = train_bank(
            train_log,
            cfg.koopman.dictionary,
            tol=cfg.koopman.tol,
            min_pairs=cfg.koopman.min_pairs,
            method=cfg.koopman.method,
            workers=WORKERS,
        )
    path = save_bank(bank, cfg.bank_path)

    holdout = evaluate_bank(bank, test_log)
    meta = bank.training_metadata
    print(f"Model bank: {path} (k={bank.k}, {bank.dictionary.describe()})")
    print(" vec  pairs   residual   holdout_rms_d  holdout_rms_q")
    for v, (count, residual) in enumerate(zip(meta.sample_counts, meta.residuals)):
        rms_d, rms_q, _ = holdout[v]
        print(f"  {v}   {count:5d}  {residual:.3e}   {rms_d:10.4f} A  {rms_q:10.4f} A")
    for w in caught:
        if issubclass(w.category, RankDeficientWarning):
            logger.warning(f"RankDeficient: {w.message}")
    return path


def handle(args) -> int:
    cmd_train(config_from_args(args))
    return 0


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "train", parents=parents, help="Generate data and fit the Koopman model bank"
    )
    parser.set_defaults(handler=handle, stage="train")
