"""Observables and the lifting dictionary."""

import math
from functools import lru_cache
from typing import Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from sklearn.preprocessing import PolynomialFeatures

OBSERVABLE_NAMES = ("i_d", "i_q", "sin_eps", "cos_eps")
N_OBSERVABLES = len(OBSERVABLE_NAMES)


class Observation(NamedTuple):
    i_d: float
    i_q: float
    sin_eps: float
    cos_eps: float

    @classmethod
    def from_angle(cls, i_d: float, i_q: float, eps: float) -> "Observation":
        return cls(i_d, i_q, math.sin(eps), math.cos(eps))


class LiftedState(NamedTuple):
    z: np.ndarray


@lru_cache(maxsize=None)
def _polynomial_features(degree: int) -> PolynomialFeatures:
    features = PolynomialFeatures(degree=degree, include_bias=False)
    features.fit(np.zeros((1, N_OBSERVABLES)))
    return features


class Dictionary(BaseModel):
    """Ordered basis functions psi_1..psi_k over the 4 observables.

    The identity observables always lead, so the first 4 lifted components
    reproduce the observation. ``identity`` gives plain DMD.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["identity", "monomial"] = "identity"
    degree: int = Field(2, ge=1, le=2)
    include_constant: bool = False

    @property
    def names(self) -> list[str]:
        if self.kind == "identity":
            names = list(OBSERVABLE_NAMES)
        else:
            names = [
                n.replace(" ", "*")
                for n in _polynomial_features(self.degree).get_feature_names_out(
                    OBSERVABLE_NAMES
                )
            ]
        if self.include_constant:
            names.append("1")
        return names

    @property
    def k(self) -> int:
        return len(self.names)

    def evaluate(self, observations: np.ndarray) -> np.ndarray:
        """Lift an (m, 4) array (or a single 4-vector) to (m, k)."""
        y = np.atleast_2d(np.asarray(observations, dtype=float))
        if self.kind == "identity":
            z = y.copy()
        else:
            z = _polynomial_features(self.degree).transform(y)
        if self.include_constant:
            z = np.hstack([z, np.ones((z.shape[0], 1))])
        return z

    def describe(self) -> str:
        text = self.kind
        if self.kind == "monomial":
            text += f" degree={self.degree}"
        return text + f" constant={'true' if self.include_constant else 'false'}"

    @classmethod
    def parse(cls, text: str) -> "Dictionary":
        parts = text.split()
        fields: dict = {"kind": parts[0]}
        for part in parts[1:]:
            key, value = part.split("=")
            if key == "degree":
                fields["degree"] = int(value)
            elif key == "constant":
                fields["include_constant"] = value == "true"
        return cls(**fields)


def lift(y, d: Dictionary) -> LiftedState:
    return LiftedState(d.evaluate(np.asarray(y, dtype=float))[0])
