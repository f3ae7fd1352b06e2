"""Text persistence for the Koopman model bank.

Layout::

    # koopman-model-bank v1
    dictionary: identity constant=false
    k: 4
    speed_rpm: 1000
    t_s: 5.0000000000000002e-05
    sample_counts: 812 403 ...
    residuals: 1.2e-03 ...
    [K0]
    <k rows of k values>
    ...
    [K6]
    [P]
    <4 rows of k values>

Floats are written with 17 significant digits so a load reproduces the
saved arrays bit for bit.
"""

import logging
from pathlib import Path

import numpy as np

from koopman_mpc.errors import MissingModel, ModelFormatError
from koopman_mpc.koopman.dictionary import N_OBSERVABLES, Dictionary
from koopman_mpc.koopman.rom import N_VECTORS, KoopmanModelBank, TrainingMetadata

logger = logging.getLogger(__name__)

MAGIC = "# koopman-model-bank v1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _rows(matrix: np.ndarray) -> list[str]:
    return [" ".join(_fmt(x) for x in row) for row in matrix]


def save_bank(bank: KoopmanModelBank, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = bank.training_metadata
    lines = [
        MAGIC,
        f"dictionary: {bank.dictionary.describe()}",
        f"k: {bank.k}",
        f"speed_rpm: {_fmt(meta.speed_rpm)}",
        f"t_s: {_fmt(meta.t_s)}",
        f"sample_counts: {' '.join(str(c) for c in meta.sample_counts)}",
        f"residuals: {' '.join(_fmt(r) for r in meta.residuals)}",
    ]
    for v, matrix in enumerate(bank.matrices):
        lines.append(f"[K{v}]")
        lines.extend(_rows(matrix))
    lines.append("[P]")
    lines.extend(_rows(bank.projection))
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Saved model bank (k={bank.k}) to {path}")
    return path


def load_bank(path: Path) -> KoopmanModelBank:
    path = Path(path)
    if not path.exists():
        raise MissingModel(path)
    lines = [line.strip() for line in path.read_text().splitlines() if line.strip()]
    if not lines or lines[0] != MAGIC:
        raise ModelFormatError(f"{path}: not a model bank file")

    header: dict[str, str] = {}
    blocks: dict[str, list[list[float]]] = {}
    current = None
    for line in lines[1:]:
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            blocks[current] = []
        elif current is None:
            key, _, value = line.partition(":")
            header[key.strip()] = value.strip()
        else:
            blocks[current].append([float(x) for x in line.split()])

    try:
        dictionary = Dictionary.parse(header["dictionary"])
        k = int(header["k"])
        metadata = TrainingMetadata(
            speed_rpm=float(header["speed_rpm"]),
            t_s=float(header["t_s"]),
            sample_counts=[int(c) for c in header["sample_counts"].split()],
            residuals=[float(r) for r in header["residuals"].split()],
        )
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"{path}: bad header ({e})") from e

    if dictionary.k != k:
        raise ModelFormatError(f"{path}: k={k} does not match dictionary ({dictionary.k})")
    names = [f"K{v}" for v in range(N_VECTORS)]
    if sorted(b for b in blocks if b != "P") != sorted(names) or "P" not in blocks:
        raise ModelFormatError(f"{path}: expected {N_VECTORS} matrices and P")
    matrices = np.array([blocks[n] for n in names])
    projection = np.array(blocks["P"])
    if matrices.shape != (N_VECTORS, k, k) or projection.shape != (N_OBSERVABLES, k):
        raise ModelFormatError(f"{path}: matrix dimensions do not match k={k}")
    return KoopmanModelBank(matrices, projection, dictionary, metadata)
