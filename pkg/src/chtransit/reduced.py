"""Finite-dimensional center-manifold equations and their analysis.

The rectangular family is

    dy_i/dt = beta1 y_i - a1 y_i^3 - a2 y_i sum_{j != i} y_j^2,

a gradient flow of ``V = -beta1 |y|^2/2 + a1 sum y_i^4/4 + a2 sum_{i<j} y_i^2 y_j^2/2``.
The loop family is the isotropic ``dy/dt = beta1 y - a1 |y|^2 y`` on R^2 and the
scalar family is ``dv/dt = beta1 v + q v^2 - a1 v^3``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure
from .params import CoupledParams, ModelParams
from .spectral import DomainSpec

FAMILIES = ("rect_cubic", "loop", "whole_space", "scalar_quadratic_cubic")
ZERO_TOL = 1e-9
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50
BLOWUP = 1e6


@dataclass(frozen=True)
class ReducedSystem:
    family: str
    m: int
    beta1: float
    a1: float
    a2: float = 0.0
    q: float = 0.0
    n: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family in ("rect_cubic", "whole_space") and self.m not in (1, 2, 3):
            raise ValueError("rectangular reduced systems support m = 1..3")
        if self.family == "loop" and self.m != 2:
            raise ValueError("loop reduced system is two-dimensional")
        if self.family == "scalar_quadratic_cubic" and self.m != 1:
            raise ValueError("scalar system has m = 1")

    @classmethod
    def scalar(cls, beta1: float, q: float, c: float) -> "ReducedSystem":
        """``dv/dt = beta1 v + q v^2 + c v^3``."""
        return cls("scalar_quadratic_cubic", 1, float(beta1), -float(c), 0.0, float(q))

    @property
    def c(self) -> float:
        return -self.a1

    @property
    def is_cubic_gradient(self) -> bool:
        return self.family in ("rect_cubic", "whole_space")

    def with_beta1(self, beta1: float) -> "ReducedSystem":
        return ReducedSystem(self.family, self.m, float(beta1), self.a1, self.a2, self.q, self.n)


@dataclass
class Equilibrium:
    y: np.ndarray
    jacobian_eigenvalues: list[float]
    stability: str
    symmetry_class: str
    residual: float = 0.0
    active_modes: int = 0

    def to_dict(self) -> dict:
        return {
            "y": [float(v) for v in self.y],
            "jacobian_eigenvalues": [float(v) for v in self.jacobian_eigenvalues],
            "stability": self.stability,
            "symmetry_class": self.symmetry_class,
            "residual": float(self.residual),
        }


@dataclass
class LineOrbit:
    direction: np.ndarray
    symmetry_class: str
    residual: float
    radial_rate: float


@dataclass
class LineOrbitResult:
    orbits: list[LineOrbit]
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def n_lines(self) -> int:
        return len(self.orbits) // 2

    def __len__(self):
        return len(self.orbits)


# --------------------------------------------------------------------------
# construction


def build_reduced_system(
    params: ModelParams, domain: DomainSpec, lam: float | None = None, coupled: CoupledParams | None = None
) -> ReducedSystem:
    """Reduced equations on the first eigenspace of ``domain`` at ``lam``."""
    from .classifier import loop_sigma, rectangular_geometry, reduced_coefficients

    lam = params.lam if lam is None else float(lam)
    if domain.kind == "rectangular":
        L, m = rectangular_geometry(domain)
        if m > 3:
            raise ValueError("reduced systems support multiplicity up to 3")
        beta1, s1, s2 = reduced_coefficients(params, L, lam, coupled)
        scale = math.pi**2 / (2 * L**2)
        return ReducedSystem("rect_cubic", m, beta1, scale * s1, scale * s2)
    if domain.kind == "loop":
        r0 = domain.r0
        rho = 1.0 / r0**2
        return ReducedSystem("loop", 2, rho * (lam - rho), loop_sigma(params, r0, lam) / r0**2)
    # torus: translation invariance reduces the cubic form to the even (cosine) subspace
    n = domain.dim
    beta1, s1, s2 = reduced_coefficients(params, math.pi, lam, coupled)
    return ReducedSystem("whole_space", min(n, 3), beta1, 0.5 * s1, 0.5 * s2, n=n)


# --------------------------------------------------------------------------
# field, jacobian, energy


def vector_field(system: ReducedSystem, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if system.family == "scalar_quadratic_cubic":
        return system.beta1 * y + system.q * y**2 - system.a1 * y**3
    r2 = float(np.dot(y, y))
    if system.family == "loop":
        return system.beta1 * y - system.a1 * r2 * y
    y2 = y**2
    return system.beta1 * y - system.a1 * y**3 - system.a2 * y * (r2 - y2)


def jacobian(system: ReducedSystem, y) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1)
    if system.family == "scalar_quadratic_cubic":
        v = y[0]
        return np.array([[system.beta1 + 2 * system.q * v - 3 * system.a1 * v**2]])
    r2 = float(np.dot(y, y))
    if system.family == "loop":
        return (system.beta1 - system.a1 * r2) * np.eye(y.size) - 2 * system.a1 * np.outer(y, y)
    y2 = y**2
    J = -2 * system.a2 * np.outer(y, y)
    np.fill_diagonal(J, system.beta1 - 3 * system.a1 * y2 - system.a2 * (r2 - y2))
    return J


def energy(system: ReducedSystem, y) -> float:
    """Lyapunov function ``V`` with ``vector_field = -grad V``."""
    y = np.asarray(y, dtype=float)
    r2 = float(np.dot(y, y))
    if system.family == "scalar_quadratic_cubic":
        v = float(y.reshape(-1)[0])
        return -system.beta1 * v**2 / 2 - system.q * v**3 / 3 + system.a1 * v**4 / 4
    if system.family == "loop":
        return -system.beta1 * r2 / 2 + system.a1 * r2**2 / 4
    y2 = y**2
    cross = (r2**2 - float(np.sum(y2**2))) / 2  # sum_{i<j} y_i^2 y_j^2
    return -system.beta1 * r2 / 2 + system.a1 * float(np.sum(y2**2)) / 4 + system.a2 * cross / 2


def cubic_part(system: ReducedSystem, y) -> np.ndarray:
    """The field with ``beta1`` removed."""
    return vector_field(system.with_beta1(0.0), y)


# --------------------------------------------------------------------------
# equilibria


def _stability(eigs: np.ndarray) -> str:
    if np.any(np.abs(eigs) <= ZERO_TOL):
        return "degenerate"
    if np.all(eigs < 0):
        return "attractor"
    if np.all(eigs > 0):
        return "repeller"
    return "saddle"


def _class_name(p: int, m: int) -> str:
    if p == 0:
        return "origin"
    if p == 1:
        return "axis"
    return "full_diagonal" if p == m else "face_diagonal"


def newton_polish(system: ReducedSystem, y0, tol: float = NEWTON_TOL, maxit: int = NEWTON_MAXIT) -> np.ndarray:
    """Damped Newton iteration on the vector field."""
    y = np.array(y0, dtype=float).reshape(-1)
    f = vector_field(system, y)
    for _ in range(maxit):
        nf = float(np.linalg.norm(f))
        if nf < tol:
            break
        try:
            step = np.linalg.solve(jacobian(system, y), -f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jacobian(system, y), -f, rcond=None)[0]
        t = 1.0
        while t > 1e-4:
            trial = y + t * step
            ft = vector_field(system, trial)
            if np.linalg.norm(ft) < nf:
                y, f = trial, ft
                break
            t *= 0.5
        else:
            break
    return y


def _make_equilibrium(system: ReducedSystem, y: np.ndarray, cls: str, p: int) -> Equilibrium:
    J = jacobian(system, y)
    eigs = np.linalg.eigvalsh(J) if system.family != "scalar_quadratic_cubic" else np.diag(J)
    res = float(np.linalg.norm(vector_field(system, y)))
    return Equilibrium(y, [float(e) for e in eigs], _stability(eigs), cls, res, p)


def stratum_denominator(system: ReducedSystem, p: int) -> float:
    return system.a1 + (p - 1) * system.a2


def find_equilibria(system: ReducedSystem) -> list[Equilibrium]:
    """All nonzero equilibria, seeded from the closed-form strata and polished."""
    if system.family == "loop":
        raise ValueError("loop equilibria form a circle; use the amplitude sqrt(beta1/a1) directly")
    if system.family == "scalar_quadratic_cubic":
        out = []
        for v in np.roots([-system.a1, system.q, system.beta1]) if system.a1 else (
            [-system.beta1 / system.q] if system.q else []
        ):
            if abs(np.imag(v)) < 1e-12 and abs(v) > 0:
                y = newton_polish(system, [float(np.real(v))])
                out.append(_make_equilibrium(system, y, "axis", 1))
        return sorted(out, key=lambda e: e.y[0])
    m = system.m
    if system.beta1 == 0:
        return []
    out = []
    for p in range(1, m + 1):
        denom = stratum_denominator(system, p)
        ratio = system.beta1 / denom if denom != 0 else -1.0
        if ratio <= 0:
            if system.beta1 > 0:
                warnings.warn(
                    f"stratum with {p} active modes is empty (a1+(p-1)a2={denom:.6g})", RuntimeWarning, stacklevel=2
                )
            continue
        amp = math.sqrt(ratio)
        for idx in itertools.combinations(range(m), p):
            for signs in itertools.product((1.0, -1.0), repeat=p):
                y0 = np.zeros(m)
                y0[list(idx)] = amp * np.array(signs)
                y = newton_polish(system, y0)
                out.append(_make_equilibrium(system, y, _class_name(p, m), p))
    return out


def block_eigenvalues(system: ReducedSystem, p: int) -> list[float]:
    """Closed-form Jacobian spectrum at a seed with ``p`` active coordinates."""
    b, a1, a2, m = system.beta1, system.a1, system.a2, system.m
    D = a1 + (p - 1) * a2
    zero_modes = [b * (a1 - a2) / D] * (m - p)
    active = [-2 * b] + [-2 * b * (a1 - a2) / D] * (p - 1)
    return sorted(zero_modes + active)


# --------------------------------------------------------------------------
# straight-line orbits


def candidate_directions(m: int) -> list[tuple[np.ndarray, str]]:
    """Unit vectors of the axis, face-diagonal and full-diagonal lines (one per line)."""
    out = []
    for p in range(1, m + 1):
        for idx in itertools.combinations(range(m), p):
            for tail in itertools.product((1.0, -1.0), repeat=p - 1):
                d = np.zeros(m)
                d[list(idx)] = (1.0,) + tail
                out.append((d / np.linalg.norm(d), _class_name(p, m)))
    return out


def tangential_residual(system: ReducedSystem, d: np.ndarray) -> tuple[float, float]:
    """Relative component of the cubic field orthogonal to ``d`` and the radial rate."""
    g = cubic_part(system, d)
    radial = float(np.dot(g, d))
    perp = g - radial * d
    scale = max(float(np.linalg.norm(g)), 1e-300)
    return float(np.linalg.norm(perp)) / scale, radial


def find_straight_line_orbits(system: ReducedSystem, tol: float = 1e-12) -> LineOrbitResult:
    """Verified invariant rays of the cubic field (two per line)."""
    if not system.is_cubic_gradient or system.m not in (2, 3):
        raise ValueError("straight-line orbits need a rect_cubic system with m in {2, 3}")
    res = LineOrbitResult([])
    scale = max(abs(system.a1), abs(system.a2), 1e-300)
    if abs(system.a1 - system.a2) <= 1e-12 * scale:
        res.degenerate = True
        res.notes.append("non-isolated line family: a1 == a2 makes every line through the origin invariant")
    if system.m == 2 and abs(system.a1 + system.a2) <= 1e-12 * scale:
        res.degenerate = True
        res.notes.append("cubic field vanishes on the diagonals (sigma1 + sigma2 = 0)")
    for d, cls in candidate_directions(system.m):
        r, rate = tangential_residual(system, d)
        if r < tol:
            for s in (1.0, -1.0):
                res.orbits.append(LineOrbit(s * d, cls, r, rate))
    return res


# --------------------------------------------------------------------------
# stability of the origin at criticality


def _cubic_rows(system: ReducedSystem, Y: np.ndarray) -> np.ndarray:
    """Cubic field of the rectangular family evaluated row-wise."""
    Y2 = Y * Y
    r2 = np.sum(Y2, axis=1, keepdims=True)
    return -system.a1 * Y2 * Y - system.a2 * Y * (r2 - Y2)


def classify_origin(system: ReducedSystem, n_starts: int = 32, n_iter: int = 2000) -> str:
    """``'asymptotically_stable'`` or ``'unstable'`` for the system at ``beta1 = 0``.

    Maximizes the radial component of the cubic field over the unit sphere by
    multi-start projected gradient ascent; the verdict is cross-checked against the
    stratum sign test ``a1 > 0`` and ``a1 + (m-1) a2 > 0``.
    """
    if system.family == "scalar_quadratic_cubic":
        if system.q != 0:
            return "unstable"
        if system.a1 == 0:
            raise NumericalFailure("indeterminate: quartic and quadratic terms both vanish")
        return "asymptotically_stable" if system.a1 > 0 else "unstable"
    if system.family == "loop":
        if abs(system.a1) < 1e-12:
            raise NumericalFailure("indeterminate: cubic form vanishes on the sphere")
        return "asymptotically_stable" if system.a1 > 0 else "unstable"
    m = system.m
    rng = np.random.default_rng(12345)
    Y = np.vstack([d for d, _ in candidate_directions(m)] + [rng.standard_normal((n_starts, m))])
    Y /= np.linalg.norm(Y, axis=1)[:, None]
    # projected gradient ascent of h(y) = <g(y), y>; grad h = 4 g(y) by homogeneity
    eta = 0.1 / max(abs(system.a1), abs(system.a2), 1e-300)
    best = -math.inf
    for _ in range(n_iter):
        G = _cubic_rows(system, Y)
        h = np.einsum("ij,ij->i", G, Y)
        best = max(best, float(np.max(h)))
        tang = G - h[:, None] * Y
        Y = Y + 4 * eta * tang
        Y /= np.linalg.norm(Y, axis=1)[:, None]
        if float(np.max(np.abs(tang))) < 1e-14 * max(abs(system.a1), abs(system.a2)):
            break
    if abs(best) < 1e-12:
        raise NumericalFailure("indeterminate: cubic radial form vanishes on the sphere")
    verdict = "asymptotically_stable" if best < 0 else "unstable"
    sign_test = system.a1 > 0 and system.a1 + (m - 1) * system.a2 > 0
    if sign_test != (verdict == "asymptotically_stable"):
        warnings.warn("sphere optimization disagrees with the stratum sign test", RuntimeWarning, stacklevel=2)
    return verdict


# --------------------------------------------------------------------------
# integration and folds


def integrate(system: ReducedSystem, y0, t_end: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Classical RK4 with fixed step; returns ``(t, Y)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = int(math.ceil(t_end / dt - 1e-12))
    y = np.array(y0, dtype=float).reshape(-1)
    Y = np.empty((n + 1, y.size))
    Y[0] = y
    f = lambda z: vector_field(system, z)  # noqa: E731
    for i in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP:
            raise NumericalFailure(f"reduced trajectory blew up at t={(i + 1) * dt:.6g}")
        Y[i + 1] = y
    return dt * np.arange(n + 1), Y


def fold_point(system: ReducedSystem, lam_range: tuple[float, float] | None = None) -> tuple[float, float]:
    """Saddle-node ``(lambda*, v*)`` of ``dv/dt = lambda v + q v^2 + c v^3``."""
    if system.family != "scalar_quadratic_cubic":
        raise ValueError("fold points are defined for the scalar quadratic-cubic family")
    q, c = system.q, system.c
    if q == 0:
        lam_star, v_star = 0.0, 0.0
    elif c == 0:
        raise NumericalFailure("no fold: transcritical crossing without a cubic term")
    else:
        lam_star, v_star = q**2 / (4 * c), -q / (2 * c)
    if lam_range is not None and not (lam_range[0] <= lam_star <= lam_range[1]):
        raise NumericalFailure(f"no fold in sweep range {lam_range}")
    return lam_star, v_star


def scalar_branch(q: float, c: float, lam) -> np.ndarray:
    """Equilibrium of the scalar family that bifurcates from ``v = 0`` at ``lam = 0``."""
    lam = np.asarray(lam, dtype=float)
    if q == 0:
        with np.errstate(invalid="ignore"):
            return np.sqrt(-lam / c)
    disc = q**2 - 4 * c * lam
    with np.errstate(invalid="ignore"):
        return -2 * lam / (q + math.copysign(1.0, q) * np.sqrt(disc))
