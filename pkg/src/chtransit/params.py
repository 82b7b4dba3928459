"""Nondimensional model parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


def _finite(**kw):
    for name, v in kw.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of ``u_t = -D^2 u - lam D u + D(gamma2 u^2 + gamma3 u^3)``."""

    lam: float
    gamma2: float
    gamma3: float

    def __post_init__(self):
        _finite(lam=self.lam, gamma2=self.gamma2, gamma3=self.gamma3)
        if not self.gamma3 > 0:
            raise ValueError(f"gamma3 > 0 required (cubic coefficient), got {self.gamma3!r}")

    def with_lambda(self, lam: float) -> "ModelParams":
        return replace(self, lam=float(lam))


@dataclass(frozen=True)
class CoupledParams:
    """Entropy-coupled system: ``S_t = mu D S - alpha1 S - alpha2 u^2`` and a
    ``gamma1 S u`` term inside the chemical potential."""

    base: ModelParams
    mu: float
    alpha1: float
    alpha2: float
    gamma1: float

    def __post_init__(self):
        _finite(mu=self.mu, alpha1=self.alpha1, alpha2=self.alpha2, gamma1=self.gamma1)
        if self.mu < 0:
            raise ValueError("mu >= 0 required")
        for name in ("alpha1", "alpha2", "gamma1"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} > 0 required")

    @property
    def lam(self) -> float:
        return self.base.lam

    @property
    def gamma2(self) -> float:
        return self.base.gamma2

    @property
    def gamma3(self) -> float:
        return self.base.gamma3

    @property
    def coupling(self) -> float:
        """``alpha2 gamma1 / alpha1``, the shift of the effective cubic coefficient at mu = 0."""
        return self.alpha2 * self.gamma1 / self.alpha1

    def with_lambda(self, lam: float) -> "CoupledParams":
        return replace(self, base=self.base.with_lambda(lam))
