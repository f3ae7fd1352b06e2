"""Exception and warning types shared across the toolkit.

Every error carries the pipeline ``stage`` it belongs to so the command line
can name the failing stage in its exit message.
"""


class KoopmanMpcError(Exception):
    stage = "run"

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


class ConfigError(KoopmanMpcError):
    stage = "config"


class InsufficientData(KoopmanMpcError):
    stage = "train"

    def __init__(self, vector_index: int, count: int, required: int):
        super().__init__(
            f"Vector {vector_index}: {count} snapshot pairs, {required} required"
        )
        self.vector_index = vector_index
        self.count = count
        self.required = required


class CoverageError(KoopmanMpcError):
    stage = "train"

    def __init__(self, counts: dict[int, int], required: int):
        self.vector_indices = sorted(v for v, c in counts.items() if c < required)
        self.counts = counts
        self.required = required
        detail = ", ".join(f"{v}: {counts[v]}" for v in self.vector_indices)
        super().__init__(
            f"Training data under-covers vector(s) {self.vector_indices} "
            f"({detail}; {required} pairs required)"
        )


class MissingModel(KoopmanMpcError):
    stage = "run"

    def __init__(self, path):
        super().__init__(f"No Koopman model bank at {path}; run `train` first")
        self.path = path


class ModelFormatError(KoopmanMpcError):
    stage = "run"


class WindowError(KoopmanMpcError):
    stage = "analysis"


class ZeroFundamental(KoopmanMpcError):
    stage = "analysis"


class SegmentTooShort(KoopmanMpcError):
    stage = "analysis"


class StepNotFound(KoopmanMpcError):
    stage = "analysis"


class ReportIoError(KoopmanMpcError):
    stage = "report"


class RankDeficientWarning(UserWarning):
    def __init__(self, retained: int, k: int, vector_index: int | None = None):
        where = "" if vector_index is None else f" (vector {vector_index})"
        super().__init__(f"Retained rank {retained} < k={k}{where}")
        self.retained = retained
        self.k = k
        self.vector_index = vector_index


class OvermodulationWarning(UserWarning):
    pass


class ShortSegmentWarning(UserWarning):
    pass
