"""Pseudospectral time integration of the Cahn-Hilliard equation.

The scheme is first-order, linearly stabilized and semi-implicit:

    (c^{n+1} - c^n)/dt = -k^2 c^{n+1} - k F^n - s k (c^{n+1} - c^n),

where ``k`` is the ``-Laplacian`` eigenvalue of the coefficient, ``F`` is the
spectral transform of ``f(u) = -lam u + gamma2 u^2 + gamma3 u^3 (+ gamma1 S u)``
and ``s`` is the stabilization constant.  Fixed points of the update are exact
steady states of the semi-discrete equation for any ``dt``, so steady-state
sweeps can use large steps.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .branch import BifurcationBranch, BranchRow
from .errors import NumericalFailure, UnsupportedPrediction
from .params import CoupledParams, ModelParams
from .spectral import (
    PERIODIC,
    DomainSpec,
    ModeIndex,
    SpectralField,
    first_eigenspace,
    to_nodal_array,
    to_spectral_array,
    truncate_spectral,
)


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    stabilization: float | None = None  # None: chosen from the current state every step
    dealias: bool = False
    steady_tol: float = 1e-9
    max_time: float = 1e4
    init_amplitude: float = 1e-4
    init_mode: str | None = None  # mode label; default is the first basis mode
    init_noise: float = 0.0
    seed: int = 0
    check_every: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.stabilization is not None and self.stabilization < 0:
            raise ValueError("stabilization must be >= 0")
        if not self.steady_tol > 0 or not self.max_time > 0:
            raise ValueError("steady_tol and max_time must be positive")
        if self.check_every < 1:
            raise ValueError("check_every must be >= 1")


@dataclass
class SimState:
    u: SpectralField
    S: SpectralField | None = None
    t: float = 0.0

    @property
    def domain(self) -> DomainSpec:
        return self.u.domain

    def copy(self) -> "SimState":
        S = None if self.S is None else SpectralField(self.S.domain, self.S.spectral().copy(), "spectral")
        return SimState(SpectralField(self.u.domain, self.u.spectral().copy(), "spectral"), S, self.t)


@dataclass
class Observables:
    mass: float
    free_energy: float
    amplitudes: dict[str, float] = field(default_factory=dict)


def _split(params):
    if isinstance(params, CoupledParams):
        return params.base, params
    return params, None


def parse_mode(label: str, ndim: int) -> ModeIndex:
    """Inverse of :meth:`ModeIndex.label` (``"1_0"``, ``"1s_2"``)."""
    parts = label.split("_")
    if len(parts) != ndim:
        raise ValueError(f"mode label {label!r} has {len(parts)} entries, domain has {ndim} axes")
    ks, ps = [], []
    for p in parts:
        if p.endswith("s"):
            ks.append(int(p[:-1]))
            ps.append("s")
        else:
            ks.append(int(p))
            ps.append("c")
    return ModeIndex(tuple(ks), tuple(ps))


def tracked_modes(domain: DomainSpec) -> list[ModeIndex]:
    return first_eigenspace(domain)[1]


class Integrator:
    """Per-(domain, params, config) cache of spectral operators."""

    def __init__(self, domain: DomainSpec, params, config: SolverConfig):
        self.domain = domain
        self.params, self.coupled = _split(params)
        self.config = config
        self.kappa = domain.laplacian_eigenvalues()
        self.weights = domain.parseval_weights()
        self.padded = None
        if config.dealias:
            n = domain.grid_points_per_dim
            m = 3 * n // 2
            m += m % 2
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                self.padded = domain.with_grid(m)
        lam = self.params.lam
        rate = lam**2 / 4.0  # largest linear growth rate max_k k(lam - k)
        if lam > 0 and config.dt * rate >= 0.5:
            warnings.warn(
                f"dt*max growth rate = {config.dt * rate:.3g} >= 0.5; reduce dt for accurate transients",
                RuntimeWarning,
                stacklevel=3,
            )

    # nonlinear evaluation -------------------------------------------------

    def _nodal(self, c: np.ndarray) -> np.ndarray:
        if self.padded is None:
            return to_nodal_array(self.domain, c)
        return to_nodal_array(self.domain, c, self.padded.grid_points_per_dim)

    def _spectral(self, v: np.ndarray) -> np.ndarray:
        if self.padded is None:
            return to_spectral_array(self.domain, v)
        return truncate_spectral(self.padded, to_spectral_array(self.padded, v), self.domain.grid_points_per_dim)

    def nonlinear(self, cu: np.ndarray, cS: np.ndarray | None) -> tuple[np.ndarray, np.ndarray, float]:
        """Spectral transforms of ``gamma2 u^2 + gamma3 u^3 (+ gamma1 S u)`` and ``u^2``; also max|u|."""
        p = self.params
        u = self._nodal(cu)
        if not np.all(np.isfinite(u)):
            raise NumericalFailure("non-finite values in u")
        u2 = u * u
        N = p.gamma2 * u2 + p.gamma3 * u2 * u
        if cS is not None:
            S = self._nodal(cS)
            N = N + self.coupled.gamma1 * S * u
        return self._spectral(N), self._spectral(u2), float(np.max(np.abs(u)))

    def stabilization(self, umax: float, cS: np.ndarray | None) -> float:
        if self.config.stabilization is not None:
            return self.config.stabilization
        p = self.params
        s = abs(p.lam) + 2 * abs(p.gamma2) * umax + 3 * p.gamma3 * umax**2
        if cS is not None:
            s += self.coupled.gamma1 * float(np.max(np.abs(self._nodal(cS))))
        return s

    # stepping ----------------------------------------------------------------

    def step_arrays(self, cu: np.ndarray, cS: np.ndarray | None):
        dt, k = self.config.dt, self.kappa
        Nh, u2h, umax = self.nonlinear(cu, cS)
        s = self.stabilization(umax, cS)
        Fh = -self.params.lam * cu + Nh
        # kappa = 0 leaves the mean coefficient untouched, so mass is conserved exactly
        new_u = (cu * (1 + dt * s * k) - dt * k * Fh) / (1 + dt * k * k + dt * s * k)
        new_S = None
        if cS is not None:
            cp = self.coupled
            new_S = (cS - dt * cp.alpha2 * u2h) / (1 + dt * (cp.mu * k + cp.alpha1))
        if not np.all(np.isfinite(new_u)) or (new_S is not None and not np.all(np.isfinite(new_S))):
            raise NumericalFailure("non-finite coefficients after step; reduce dt or increase stabilization")
        return new_u, new_S

    def rhs_arrays(self, cu: np.ndarray, cS: np.ndarray | None):
        k = self.kappa
        Nh, u2h, _ = self.nonlinear(cu, cS)
        du = -k * k * cu + self.params.lam * k * cu - k * Nh
        du[(0,) * du.ndim] = 0.0
        dS = None
        if cS is not None:
            cp = self.coupled
            dS = -(cp.mu * k + cp.alpha1) * cS - cp.alpha2 * u2h
        return du, dS

    def residual(self, cu: np.ndarray, cS: np.ndarray | None) -> float:
        """``max |du/dt|`` on the grid (and ``|dS/dt|`` for coupled runs)."""
        du, dS = self.rhs_arrays(cu, cS)
        r = float(np.max(np.abs(to_nodal_array(self.domain, du))))
        if dS is not None:
            r = max(r, float(np.max(np.abs(to_nodal_array(self.domain, dS)))))
        return r

    def free_energy(self, cu: np.ndarray) -> float:
        p = self.params
        grad = 0.5 * float(np.sum(self.weights * self.kappa * cu * cu))
        u = to_nodal_array(self.domain, cu)
        bulk = float(np.mean(-0.5 * p.lam * u**2 + p.gamma2 * u**3 / 3 + p.gamma3 * u**4 / 4))
        return self.domain.volume * (grad + bulk)


# --------------------------------------------------------------------------
# public operations


def initial_state(domain: DomainSpec, params, config: SolverConfig) -> SimState:
    """Seeded first eigenmode plus optional reproducible noise."""
    _, coupled = _split(params)
    mode = parse_mode(config.init_mode, domain.ndim) if config.init_mode else tracked_modes(domain)[0]
    u = SpectralField.from_modes(domain, {mode: config.init_amplitude}).spectral().copy()
    if config.init_noise > 0:
        rng = np.random.default_rng(config.seed)
        noise = to_spectral_array(domain, rng.standard_normal(domain.shape))
        u += config.init_noise * noise
    u[(0,) * u.ndim] = 0.0
    S = SpectralField(domain, np.zeros(domain.shape), "spectral") if coupled is not None else None
    return SimState(SpectralField(domain, u, "spectral"), S, 0.0)


def step(state: SimState, params, config: SolverConfig, integrator: Integrator | None = None) -> SimState:
    """One stabilized semi-implicit step."""
    integ = integrator or Integrator(state.domain, params, config)
    if integ.coupled is not None and state.S is None:
        raise ValueError("coupled parameters need a state with an S field")
    cS = None if state.S is None or integ.coupled is None else state.S.spectral()
    cu, cS = integ.step_arrays(state.u.spectral(), cS)
    S = None if cS is None else SpectralField(state.domain, cS, "spectral")
    return SimState(SpectralField(state.domain, cu, "spectral"), S, state.t + config.dt)


def observables(state: SimState, params, tracked: list[ModeIndex] | None = None) -> Observables:
    base, _ = _split(params)
    integ = Integrator(state.domain, base, SolverConfig(dt=1.0))
    cu = state.u.spectral()
    modes = tracked if tracked is not None else tracked_modes(state.domain)
    amps = {m.label(): state.u.amplitude(m) for m in modes}
    return Observables(state.u.integral(), integ.free_energy(cu), amps)


def steady_residual(state: SimState, params, config: SolverConfig | None = None) -> float:
    integ = Integrator(state.domain, params, config or SolverConfig(dt=1.0))
    cS = None if state.S is None or integ.coupled is None else state.S.spectral()
    return integ.residual(state.u.spectral(), cS)


def run_to_steady(state: SimState, params, config: SolverConfig) -> tuple[SimState, str]:
    """Integrate until the residual drops below ``steady_tol`` or ``max_time`` passes.

    Returns the final state and ``"converged"`` or ``"max_time"``.
    """
    integ = Integrator(state.domain, params, config)
    cu = state.u.spectral().copy()
    cS = None if state.S is None or integ.coupled is None else state.S.spectral().copy()
    t = state.t
    t_end = state.t + config.max_time
    status = "max_time"
    stepn = 0
    while True:
        if stepn % config.check_every == 0:
            res = integ.residual(cu, cS)
            if not math.isfinite(res):
                raise NumericalFailure(f"residual non-finite at t={t:.6g}")
            if res < config.steady_tol:
                status = "converged"
                break
            if float(np.max(np.abs(cu))) > 1e6:
                raise NumericalFailure(f"solution blew up at t={t:.6g}")
        if t >= t_end:
            break
        cu, cS = integ.step_arrays(cu, cS)
        t += config.dt
        stepn += 1
    S = None if cS is None else SpectralField(state.domain, cS, "spectral")
    return SimState(SpectralField(state.domain, cu, "spectral"), S, t), status


def reference_coefficient(params, domain: DomainSpec) -> float:
    """Scale ``c`` of the continuous law ``|a| ~ c sqrt(lam - lam0)`` used for jump detection.

    For Type-I parameters this is the predicted coefficient.  Otherwise the
    magnitude of the onset cubic coefficient sets a comparable scale.
    """
    from .classifier import critical_value, onset_sigmas, predict_amplitudes, rectangular_geometry

    base, coupled = _split(params)
    lam0 = critical_value(domain)
    eps = 1e-6 * max(lam0, 1.0)
    try:
        preds = predict_amplitudes(base, domain, lam0 + eps, coupled)
    except UnsupportedPrediction:
        preds = []
    if preds:
        return max(amp * math.sqrt(d["active_modes"]) for d, amp in preds) / math.sqrt(eps)
    if domain.kind == "rectangular":
        s1, _ = onset_sigmas(base, rectangular_geometry(domain)[0], coupled)
    elif domain.kind == "loop":
        s1 = 2 * (0.75 * base.gamma3 - domain.r0**2 * base.gamma2**2 / 6)
    else:
        s1, _ = onset_sigmas(base, math.pi, coupled)
    return math.sqrt(2.0 / abs(s1)) if s1 != 0 else 1.0


def _amplitude_norm(amps: dict[str, float]) -> float:
    return math.sqrt(sum(a * a for a in amps.values()))


def _solve_row(args):
    domain, params, config, lam, seed_state = args
    p = params.with_lambda(lam)
    state = seed_state if seed_state is not None else initial_state(domain, p, config)
    state = SimState(state.u, state.S, 0.0)
    try:
        final, status = run_to_steady(state, p, config)
    except NumericalFailure as exc:
        return None, "failed", str(exc)
    return final, status, ""


def sweep_branch(
    params,
    lams,
    config: SolverConfig,
    domain: DomainSpec,
    continuation: bool = True,
    jobs: int = 1,
    tracked: list[ModeIndex] | None = None,
) -> BifurcationBranch:
    """Steady states along a monotone list of ``lambda`` values."""
    from .classifier import critical_value

    lams = [float(v) for v in lams]
    modes = tracked if tracked is not None else tracked_modes(domain)
    branch = BifurcationBranch(tracked=[m.label() for m in modes])
    if not lams:
        return branch
    lam0 = critical_value(domain)
    coeff = reference_coefficient(params, domain)
    # an unmoved seed at lambda0 passes the residual test, so it must not count as a far branch
    floor = max(1e-6, 10.0 * (abs(config.init_amplitude) + abs(config.init_noise)))

    results = []
    if continuation or jobs <= 1:
        prev = None
        for lam in lams:
            seed_state = None
            if continuation and prev is not None:
                amp = float(np.max(np.abs(prev.u.spectral())))
                if amp > 1e-6:
                    seed_state = prev
            final, status, msg = _solve_row((domain, params, config, lam, seed_state))
            results.append((final, status, msg))
            if final is not None:
                prev = final
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_solve_row, [(domain, params, config, lam, None) for lam in lams]))

    for lam, (final, status, msg) in zip(lams, results):
        p = params.with_lambda(lam)
        if final is None:
            nan = float("nan")
            branch.append(BranchRow(lam, {k: nan for k in branch.tracked}, nan, nan, nan, "failed", 0.0, msg))
            continue
        obs = observables(final, p, modes)
        amp = _amplitude_norm(obs.amplitudes)
        scale = coeff * math.sqrt(max(lam - lam0, 0.0))
        if status == "converged" and amp > floor and amp > 10.0 * scale:
            status = "jumped"
        branch.append(BranchRow(lam, obs.amplitudes, amp, obs.free_energy, obs.mass, status, final.t, msg))
    return branch


# --------------------------------------------------------------------------
# exponents and translation invariance


def fit_power_law(x, y) -> tuple[float, float]:
    """Least-squares slope of ``log y`` against ``log x`` and its standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fit = stats.linregress(np.log(x), np.log(y))
    return float(fit.slope), float(fit.stderr)


def fit_exponent(
    branch: BifurcationBranch, lam0: float, window: tuple[float, float] = (1e-3, 1e-1), min_rows: int = 5
) -> tuple[float, float]:
    """Critical exponent of ``amplitude ~ (lam - lam0)^beta`` over ``window``."""
    lo, hi = window
    rows = [
        r
        for r in branch
        if r.converged and lo * (1 - 1e-12) <= r.lam - lam0 <= hi * (1 + 1e-12) and r.amplitude > 0
    ]
    if len(rows) < min_rows:
        raise ValueError(f"need at least {min_rows} converged supercritical rows in {window}, got {len(rows)}")
    return fit_power_law([r.lam - lam0 for r in rows], [r.amplitude for r in rows])


def translate(state: SimState, shift) -> SimState:
    """Translate a state on a fully periodic domain by ``shift`` (one entry per axis)."""
    domain = state.domain
    shift = np.asarray(shift, dtype=float).reshape(-1)
    if len(shift) != domain.ndim:
        raise ValueError("shift needs one entry per axis")
    if any(ax.kind != PERIODIC for ax in domain.axes):
        raise ValueError("translation invariance needs periodic axes")

    def shift_array(c):
        n = domain.grid_points_per_dim
        half = n // 2
        out = c.copy()
        for d, (ax, s) in enumerate(zip(domain.axes, shift)):
            out = np.moveaxis(out, d, -1)
            phase = np.array([ax.wavenumber(k) * s for k in range(1, half)])
            a = out[..., 1:half].copy()
            b = out[..., half + 1 :].copy()
            out[..., 1:half] = a * np.cos(phase) - b * np.sin(phase)
            out[..., half + 1 :] = a * np.sin(phase) + b * np.cos(phase)
            out = np.moveaxis(out, -1, d)
        return out

    u = SpectralField(domain, shift_array(state.u.spectral()), "spectral")
    S = None if state.S is None else SpectralField(domain, shift_array(state.S.spectral()), "spectral")
    return SimState(u, S, state.t)


def torus_invariance_check(state: SimState, shift, params, config: SolverConfig | None = None) -> float:
    """Steady residual of ``state`` translated by ``shift``."""
    if state.domain.kind != "torus":
        raise ValueError("torus_invariance_check needs a torus domain")
    return steady_residual(translate(state, shift), params, config)


def with_dt(config: SolverConfig, dt: float) -> SolverConfig:
    return replace(config, dt=float(dt))
