"""Physical parameters, critical curves and the metastable band.

The molar Gibbs energy of the regular-solution (Hildebrand) model is

    g(u) = RT [u ln u + (1 - u) ln(1 - u)] + a u (1 - u)

up to terms linear in ``u``.  The spinodal expansion about ``u0`` uses
``lambda = -g''(u0)``, ``b2 = -g'''(u0)/2`` and ``b3 = -g''''(u0)/6``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .branch import BifurcationBranch

U0_EDGE = 1e-6


@dataclass(frozen=True)
class MaterialParams:
    a: float
    R: float
    u0: float
    l: float = 1.0
    k: float = 1.0
    C: float = math.pi**2

    def __post_init__(self):
        for name in ("a", "R", "l", "k", "C"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if not 0 < self.u0 < 1:
            raise ValueError("u0 must lie in (0, 1)")

    def with_u0(self, u0: float) -> "MaterialParams":
        return MaterialParams(self.a, self.R, float(u0), self.l, self.k, self.C)

    @property
    def mixing(self) -> float:
        return self.u0 * (1 - self.u0)

    @property
    def t1(self) -> float:
        """Temperature where the homogeneous state loses convexity, ``lambda(T1) = 0``."""
        return 2 * self.a * self.mixing / self.R


def lambda_of_T(mat: MaterialParams, T: float) -> float:
    """Nondimensional control parameter ``2 a l^2/k - l^2 R T/(k u0 (1 - u0))``."""
    if T < 0:
        raise ValueError("temperature must be non-negative")
    return 2 * mat.a * mat.l**2 / mat.k - mat.l**2 * mat.R * T / (mat.k * mat.mixing)


def T_of_lambda(mat: MaterialParams, lam: float) -> float:
    return (2 * mat.a * mat.l**2 / mat.k - lam) * mat.k * mat.mixing / (mat.l**2 * mat.R)


def dlambda_dT(mat: MaterialParams) -> float:
    return -mat.l**2 * mat.R / (mat.k * mat.mixing)


def critical_temperature(mat: MaterialParams, L: float) -> float | None:
    """Temperature ``T0`` where ``lambda(T0) = C/L^2``; ``None`` when the box is too small.

    ``L = inf`` gives the bulk value ``T1``.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    geom = 0.0 if math.isinf(L) else mat.C * mat.k / (mat.l**2 * L**2)
    T0 = mat.mixing * (2 * mat.a - geom) / mat.R
    scale = mat.mixing * 2 * mat.a / mat.R
    if T0 < -1e-12 * scale:
        return None
    return max(T0, 0.0)


def critical_length(mat: MaterialParams) -> float:
    """Smallest container size ``L0`` admitting phase separation at any ``T >= 0``."""
    return math.sqrt(mat.C * mat.k / (2 * mat.a * mat.l**2))


# --------------------------------------------------------------------------
# spinodal expansion


@dataclass(frozen=True)
class SpinodalCoefficients:
    lam: float
    b2: float
    b3: float
    b3_printed: float


def _check_u0(u0: float):
    if u0 < U0_EDGE or u0 > 1 - U0_EDGE:
        raise ValueError(f"u0={u0!r} within {U0_EDGE} of a pure component")


def gibbs_derivative(mat: MaterialParams, T: float, order: int, u: float | None = None) -> float:
    """``d^order g/du^order`` of the molar free energy at ``u`` (default ``u0``)."""
    u = mat.u0 if u is None else u
    RT = mat.R * T
    if order == 2:
        return RT / (u * (1 - u)) - 2 * mat.a
    if order == 3:
        return RT * (-1 / u**2 + 1 / (1 - u) ** 2)
    if order == 4:
        return RT * (2 / u**3 + 2 / (1 - u) ** 3)
    raise ValueError("orders 2, 3 and 4 are supported")


def b3_printed(mat: MaterialParams, T: float) -> float:
    """Cubic coefficient from the reference closed-form expansion, kept for comparison."""
    u = mat.u0
    return -(1 - u - 2 * u**2 + 3 * u**3) / (3 * u**3 * (1 - u) ** 4) * mat.R * T


def spinodal_coefficients(mat: MaterialParams, T: float) -> SpinodalCoefficients:
    """``dv/dt = lam v + b2 v^2 + b3 v^3`` coefficients at ``(u0, T)``."""
    if not T > 0:
        raise ValueError("T must be positive")
    _check_u0(mat.u0)
    lam = 2 * mat.a - mat.R * T / mat.mixing
    b2 = -gibbs_derivative(mat, T, 3) / 2
    b3 = -gibbs_derivative(mat, T, 4) / 6
    return SpinodalCoefficients(lam, b2, b3, b3_printed(mat, T))


def beta_derived(u0: float) -> float:
    return 3 * (1 - 2 * u0) ** 2 / (16 * (1 - 3 * u0 + 3 * u0**2))


def beta_printed(u0: float) -> float:
    return 3 * (1 - 2 * u0) ** 2 * (1 - u0) / (16 * (1 - u0 - 2 * u0**2 + 3 * u0**3))


@dataclass
class TStarResult:
    T_star: float
    T_star_printed: float
    T0: float
    notes: list[str] = field(default_factory=list)


def _discriminant_over_T(mat: MaterialParams, T: float) -> float:
    c = spinodal_coefficients(mat, T)
    return (c.b2**2 - 4 * c.b3 * c.lam) / T


def t_star(mat: MaterialParams) -> TStarResult:
    """Saddle-node temperature of the spinodal equation, ``b2^2 - 4 b3 lam = 0``."""
    _check_u0(mat.u0)
    T0 = mat.t1
    printed = T0 / (1 - beta_printed(mat.u0))
    f = lambda T: _discriminant_over_T(mat, T)  # noqa: E731
    if abs(f(T0)) <= 1e-14 * max(1.0, abs(f(10 * T0))):
        Ts = T0
    else:
        lo, hi = T0, 10 * T0
        if f(lo) * f(hi) > 0:
            raise ValueError(f"no saddle-node root in (0, {hi!r}]")
        Ts = brentq(f, lo, hi, xtol=1e-14 * T0, rtol=4 * np.finfo(float).eps)
    notes = []
    if abs(Ts - printed) > 1e-9 * T0:
        notes.append(
            f"u0={mat.u0!r}: discriminant root T*={Ts!r} differs from closed form with printed beta ({printed!r})"
        )
    return TStarResult(Ts, printed, T0, notes)


# --------------------------------------------------------------------------
# thermodynamic quantities


def latent_heat(u_steady, alpha1: float, alpha2: float, T: float) -> float:
    """Enthalpy released on the jump, ``-(alpha2 T/alpha1) int u^2``.

    ``u_steady`` is a :class:`SpectralField` or directly the value of ``int u^2``.
    """
    if not alpha1 > 0:
        raise ValueError("alpha1 must be positive")
    if hasattr(u_steady, "domain"):
        coeffs = u_steady.spectral()
        sq = u_steady.domain.volume * float(np.sum(u_steady.domain.parseval_weights() * coeffs**2))
    else:
        sq = float(u_steady)
    return -(alpha2 * T / alpha1) * sq


def _second_derivative(T: np.ndarray, F: np.ndarray) -> float:
    coef = np.polyfit(T, F, 2)
    return 2.0 * coef[0]


def heat_capacity_jump(
    branch: BifurcationBranch, mat: MaterialParams, T0: float, min_rows: int = 3, window: float | None = None
) -> float:
    """``C(T0-) - C(T0+)`` with ``C = -T d^2F/dT^2`` from branch free energies.

    The branch is indexed by ``lambda``; each row maps to ``T`` through
    :func:`lambda_of_T`.  The ordered side is ``T < T0``.  A side with fewer
    than ``min_rows`` converged rows and identically zero energy contributes 0.
    """
    rows = [r for r in branch if r.converged and math.isfinite(r.energy)]
    T = np.array([T_of_lambda(mat, r.lam) for r in rows])
    F = np.array([r.energy for r in rows])
    sel = np.ones_like(T, dtype=bool) if window is None else np.abs(T - T0) <= window
    below = sel & (T < T0)
    above = sel & (T > T0)
    if np.count_nonzero(below) < min_rows:
        raise ValueError("insufficient branch resolution below T0")
    d2_ordered = _second_derivative(T[below], F[below])
    if np.count_nonzero(above) >= min_rows:
        d2_disordered = _second_derivative(T[above], F[above])
    elif np.all(np.abs(F[above]) < 1e-14):
        d2_disordered = 0.0  # trivial state, F identically zero
    else:
        raise ValueError("insufficient branch resolution above T0")
    return -T0 * d2_ordered + T0 * d2_disordered


# --------------------------------------------------------------------------
# diagram


@dataclass
class DiagramRow:
    u0: float
    T: float
    T0: float
    T_star: float
    region: str


def classify_region(T: float, T0: float, Ts: float) -> str:
    if T < T0:
        return "unstable"
    if T < Ts:
        return "metastable"
    return "stable"


def default_T_grid(mat: MaterialParams, u0_grid, n: int = 200) -> np.ndarray:
    T1 = max(mat.with_u0(u).t1 for u in u0_grid)
    return np.linspace(1.2 * T1 / n, 1.2 * T1, n)


def curves(mat: MaterialParams, u0_grid) -> list[dict]:
    out = []
    for u in u0_grid:
        res = t_star(mat.with_u0(float(u)))
        out.append({"u0": float(u), "T0": res.T0, "Tstar": res.T_star, "Tstar_printed": res.T_star_printed})
    return out


def emit_diagram(mat: MaterialParams, u0_grid, T_grid=None) -> list[DiagramRow]:
    """Region of every ``(u0, T)`` pair bounded by the ``T0`` and ``T*`` curves."""
    u0_grid = [float(u) for u in u0_grid]
    if not u0_grid:
        raise ValueError("empty u0 grid")
    T_grid = default_T_grid(mat, u0_grid) if T_grid is None else np.asarray(T_grid, dtype=float)
    if T_grid.size == 0:
        raise ValueError("empty T grid")
    rows = []
    for c in curves(mat, u0_grid):
        for T in T_grid:
            rows.append(DiagramRow(c["u0"], float(T), c["T0"], c["Tstar"], classify_region(T, c["T0"], c["Tstar"])))
    return rows


def discrepancy_log(mat: MaterialParams, u0_grid) -> list[str]:
    """Mismatches between derived and printed spinodal quantities over ``u0_grid``."""
    log = []
    for u in map(float, u0_grid):
        m = mat.with_u0(u)
        T = m.t1
        c = spinodal_coefficients(m, T)
        if abs(c.b3 - c.b3_printed) > 1e-12 * abs(c.b3):
            log.append(f"u0={u!r}: b3 from g'''' = {c.b3!r}, printed expression = {c.b3_printed!r} (T={T!r})")
        log.extend(t_star(m).notes)
    return log
