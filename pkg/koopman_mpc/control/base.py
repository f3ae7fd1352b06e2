from typing import Literal, NamedTuple, Protocol


class Sample(NamedTuple):
    """What a controller sees at the start of a period."""

    time: float
    i_d: float
    i_q: float
    eps_el: float
    omega_el: float
    i_d_ref: float
    i_q_ref: float
    u_dc: float


class Actuation(NamedTuple):
    """A controller command.

    ``mode == "switch"``: ``legs`` are +/-1 half-bridge commands held for the
    whole period. ``mode == "duty"``: ``u_dq`` at ``angle`` is the voltage the
    PWM realises and ``legs`` are the duty ratios it implies.
    """

    mode: Literal["switch", "duty"]
    legs: tuple[float, float, float]
    vector_index: int = -1
    best_cost: float = float("nan")
    overmodulated: bool = False
    u_dq: tuple[float, float] = (0.0, 0.0)
    angle: float = 0.0


class Controller(Protocol):
    name: str

    def reset(self) -> None: ...

    def initial_actuation(self) -> Actuation: ...

    def control(self, sample: Sample) -> Actuation: ...
