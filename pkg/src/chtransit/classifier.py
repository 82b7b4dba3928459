"""Closed-form dynamic transition criteria.

Every ``classify_*`` function returns a :class:`TransitionReport`.  Verdicts
follow the closed-form thresholds; where the truncated reduced system tells a
different story (stability of the origin for ``m = 3``, the torus even
subspace) the report carries a note rather than a silently changed verdict.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum

from .errors import ResonanceError, UnsupportedPrediction
from .params import CoupledParams, ModelParams
from .spectral import DomainSpec, first_eigenspace

PI2 = math.pi**2
POLE_GUARD = 1e-8


class TransitionType(str, Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    TYPE_III = "TypeIII"
    AT_THRESHOLD = "AtThreshold"
    TYPE_II_OR_III = "TypeII_or_TypeIII"
    DEFERRED = "DeferredToCubic"


@dataclass
class TransitionReport:
    transition_type: TransitionType
    lambda_critical: float
    threshold_gamma3: float | None
    margin: float | None
    predicted_equilibria: dict = field(default_factory=dict)
    predicted_amplitude_coefficient: float | None = None
    critical_exponent: float | None = None
    sigma: float | None = None
    geometry: str = ""
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["transition_type"] = self.transition_type.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TransitionReport":
        d = dict(d)
        d["transition_type"] = TransitionType(d["transition_type"])
        return cls(**d)


def tie_tolerance(gamma2: float) -> float:
    return 1e-9 * max(1.0, gamma2**2)


def _verdict(margin: float, gamma2: float) -> TransitionType:
    if abs(margin) < tie_tolerance(gamma2):
        return TransitionType.AT_THRESHOLD
    return TransitionType.TYPE_I if margin > 0 else TransitionType.TYPE_II


def _finalize(report: TransitionReport) -> TransitionReport:
    t = report.transition_type
    if t is TransitionType.TYPE_I:
        report.critical_exponent = 0.5
    elif t is TransitionType.TYPE_III:
        report.critical_exponent = 1.0
    else:
        report.critical_exponent = None
        report.predicted_amplitude_coefficient = None
    return report


# --------------------------------------------------------------------------
# reduced coefficients


def _guard(lam: float, pole: float):
    if abs(lam - pole) < POLE_GUARD:
        raise ResonanceError(f"lambda={lam!r} within {POLE_GUARD} of slaving pole {pole!r}")


def reduced_coefficients(
    params: ModelParams, L: float, lam: float, coupled: CoupledParams | None = None
) -> tuple[float, float, float]:
    """``(beta1, sigma1, sigma2)`` of the cubic center-manifold equations on a box
    whose longest side is ``L``.  ``coupled`` adds the entropy corrections."""
    p4, p2 = 4 * PI2 / L**2, 2 * PI2 / L**2
    _guard(lam, p4)
    _guard(lam, p2)
    rho1 = PI2 / L**2
    g2, g3 = params.gamma2, params.gamma3
    beta1 = rho1 * (lam - rho1)
    sigma1 = 1.5 * g3 + g2**2 / (lam - p4)
    sigma2 = 3.0 * g3 + 4.0 * g2**2 / (lam - p2)
    if coupled is not None:
        a1, a2g1, mu = coupled.alpha1, coupled.alpha2 * coupled.gamma1, coupled.mu
        sigma1 -= a2g1 / a1 + a2g1 / (2.0 * (a1 + 4 * PI2 * mu / L**2))
        sigma2 -= a2g1 / a1 + 2.0 * a2g1 / (a1 + 2 * PI2 * mu / L**2)
    return beta1, sigma1, sigma2


def onset_sigmas(params: ModelParams, L: float, coupled: CoupledParams | None = None) -> tuple[float, float]:
    """``(sigma1, sigma2)`` evaluated at ``lam = pi^2/L^2``."""
    _, s1, s2 = reduced_coefficients(params, L, PI2 / L**2, coupled)
    return s1, s2


def loop_sigma(params: ModelParams, r0: float, lam: float) -> float:
    """Cubic coefficient (times ``r0^2``) of the loop reduced equations."""
    pole = 4.0 / r0**2
    _guard(lam, pole)
    return 0.75 * params.gamma3 + params.gamma2**2 / (2.0 * (lam - pole))


# --------------------------------------------------------------------------
# minimal attractors from reduced Jacobians


def _jacobian_inventory(m: int, sigma1: float, sigma2: float) -> dict:
    from .reduced import ReducedSystem, find_equilibria

    # structure is invariant under beta1 > 0 scaling; beta1 = 1 keeps eigenvalues O(1)
    sysm = ReducedSystem("rect_cubic", m, 1.0, sigma1, sigma2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        eqs = find_equilibria(sysm)
    by_class: dict[str, dict] = {}
    for e in eqs:
        entry = by_class.setdefault(e.symmetry_class, {"count": 0, "attractors": 0})
        entry["count"] += 1
        entry["attractors"] += e.stability == "attractor"
    attracting = sorted(c for c, v in by_class.items() if v["attractors"])
    return {
        "nonzero_equilibria": len(eqs),
        "expected_count": 3**m - 1,
        "classes": by_class,
        "minimal_attractors": sum(v["attractors"] for v in by_class.values()),
        "attracting_classes": attracting,
    }


def _prose_table_class(m: int, gamma3: float, L: float, gamma2: float) -> str | None:
    # symmetry-section criteria: axis class below 22/9, diagonal class above
    unit = L**2 * gamma2**2 / PI2
    if gamma2 == 0:
        return None
    return "axis" if gamma3 < 22.0 / 9.0 * unit else "full_diagonal"


def _multi_mode_type1(report: TransitionReport, m: int, s1: float, s2: float, params: ModelParams, L: float):
    inv = _jacobian_inventory(m, s1, s2)
    report.predicted_equilibria.update(inv)
    if inv["nonzero_equilibria"] != 3**m - 1:
        report.notes.append(
            f"reduced system has {inv['nonzero_equilibria']} nonzero equilibria, not 3^m-1={3**m - 1}: "
            "a stratum with sigma1+(p-1)sigma2 <= 0 is empty"
        )
    att = inv["attracting_classes"]
    prose = _prose_table_class(m, params.gamma3, L, params.gamma2)
    if prose is not None and att and prose not in att:
        report.notes.append(
            f"Jacobian-derived attracting class {att} differs from the symmetry-section criteria table ({prose})"
        )
    if att == ["axis"]:
        report.predicted_amplitude_coefficient = math.sqrt(2.0 / s1)
    elif att:
        p = m if att[-1] == "full_diagonal" else 2
        report.predicted_amplitude_coefficient = math.sqrt(2.0 / (s1 + (p - 1) * s2))


def _origin_note(report: TransitionReport, m: int, s1: float, s2: float):
    stable = s1 > 0 and s1 + (m - 1) * s2 > 0
    closed_form = report.transition_type is TransitionType.TYPE_I
    if report.transition_type is not TransitionType.AT_THRESHOLD and stable != closed_form:
        report.notes.append(
            "origin of the truncated reduced system at onset is "
            + ("asymptotically stable" if stable else "unstable")
            + f" (sigma1={s1:.6g}, sigma1+{m - 1}*sigma2={s1 + (m - 1) * s2:.6g}), "
            "disagreeing with the closed-form threshold"
        )
    report.predicted_equilibria["reduced_origin_stable"] = stable


# --------------------------------------------------------------------------
# classifiers


def classify_rectangular(params: ModelParams, L: float, m: int) -> TransitionReport:
    """Box with longest side ``L`` of multiplicity ``m`` (1..3), Neumann conditions."""
    if m not in (1, 2, 3):
        raise ValueError(f"multiplicity m must be 1, 2 or 3, got {m!r}")
    if not L > 0:
        raise ValueError("L must be positive")
    g2, g3 = params.gamma2, params.gamma3
    lam0 = PI2 / L**2
    unit = L**2 * g2**2 / PI2
    s1, s2 = onset_sigmas(params, L)
    geometry = f"rectangular(L={L!r}, m={m})"
    if m == 1:
        thr = 2.0 / 9.0 * unit
        margin = g3 - thr
        rep = TransitionReport(_verdict(margin, g2), lam0, thr, margin, sigma=s1, geometry=geometry)
        if rep.transition_type is TransitionType.TYPE_I:
            rep.predicted_equilibria = {"count": 2, "stability": "attractor", "side": "lambda>lambda_c"}
            rep.predicted_amplitude_coefficient = math.sqrt(2.0 / s1)
        elif rep.transition_type is TransitionType.TYPE_II:
            rep.predicted_equilibria = {
                "count": 2,
                "stability": "saddle",
                "side": "lambda<lambda_c",
                "saddle_node_bifurcations": 2,
            }
        return _finalize(rep)

    thr = 26.0 / 27.0 * unit
    margin = g3 - thr
    rep = TransitionReport(_verdict(margin, g2), lam0, thr, margin, sigma=s1 + s2, geometry=geometry)
    if rep.transition_type is TransitionType.TYPE_I:
        rep.predicted_equilibria = {"count": 3**m - 1, "side": "lambda>lambda_c", "attractor": f"S^{m - 1}"}
        _multi_mode_type1(rep, m, s1, s2, params, L)
    elif rep.transition_type is TransitionType.TYPE_II:
        rep.predicted_equilibria = {
            "count_each_side": 3**m - 1,
            "saddle_node": "lambda<lambda_c (located numerically)",
        }
    _origin_note(rep, m, s1, s2)
    return _finalize(rep)


def classify_loop(params: ModelParams, r0: float) -> TransitionReport:
    """Thin annulus of mean radius ``r0`` and unit gap."""
    if not r0 >= 1:
        raise ValueError("loop classification needs r0 >= 1")
    g2, g3 = params.gamma2, params.gamma3
    lam0 = 1.0 / r0**2
    thr = 2.0 * r0**2 * g2**2 / 9.0
    margin = g3 - thr
    sigma = 0.75 * g3 - r0**2 * g2**2 / 6.0
    rep = TransitionReport(_verdict(margin, g2), lam0, thr, margin, sigma=sigma, geometry=f"loop(r0={r0!r})")
    if rep.transition_type is TransitionType.TYPE_I:
        rep.predicted_equilibria = {"attractor": "S^1", "structure": "cycle of singular points", "side": "lambda>lambda_c"}
        rep.predicted_amplitude_coefficient = 1.0 / math.sqrt(sigma)
    elif rep.transition_type is TransitionType.TYPE_II:
        rep.predicted_equilibria = {
            "invariant_set": "S^1 of singular points on lambda<lambda_c",
            "singularity_separation": "lambda*<lambda_c",
        }
    return _finalize(rep)


def classify_whole_space(params: ModelParams, n: int) -> TransitionReport:
    """Periodic ``[0, 2 pi)^n`` (bulk sample), ``n >= 2``."""
    if n < 2:
        raise ValueError("whole-space classification needs n >= 2")
    g2, g3 = params.gamma2, params.gamma3
    thr = 14.0 / 27.0 * g2**2
    margin = g3 - thr
    s1, s2 = onset_sigmas(params, math.pi)
    rep = TransitionReport(_verdict(margin, g2), 1.0, thr, margin, sigma=s1 + s2, geometry=f"torus(n={n})")
    if rep.transition_type is TransitionType.TYPE_I:
        rep.predicted_equilibria = {
            "attractor": f"S^{2 * n - 1}",
            "singularity_tori": [{"dimension": n - k, "count": math.comb(n, k)} for k in range(n)],
        }
        if s1 > 0:
            rep.predicted_amplitude_coefficient = math.sqrt(2.0 / s1)
    # the cubic form is translation invariant, so the even subspace decides origin stability
    _origin_note(rep, min(n, 3), s1, s2)
    return _finalize(rep)


def classify_coupled(params: CoupledParams, L: float, m: int) -> TransitionReport:
    """Entropy-coupled system on a box with longest side ``L`` of multiplicity ``m``."""
    if m < 1:
        raise ValueError("m >= 1 required")
    g2, g3 = params.gamma2, params.gamma3
    a1, a2g1, mu = params.alpha1, params.alpha2 * params.gamma1, params.mu
    lam0 = PI2 / L**2
    geometry = f"rectangular(L={L!r}, m={m}), coupled"
    if m == 1:
        shift = a2g1 / a1 + a2g1 * L**2 / (2.0 * (a1 * L**2 + 4 * PI2 * mu)) + L**2 * g2**2 / (3 * PI2)
        sigma = 1.5 * g3 - shift
        thr = shift / 1.5
    else:
        shift = (
            a2g1 * (2.0 / a1 + L**2 / (2.0 * (a1 * L**2 + 4 * PI2 * mu)) + 2.0 * L**2 / (a1 * L**2 + 2 * PI2 * mu))
            + 13.0 * L**2 * g2**2 / (3 * PI2)
        )
        sigma = 4.5 * g3 - shift
        thr = shift / 4.5
    margin = g3 - thr
    rep = TransitionReport(_verdict(margin, g2), lam0, thr, margin, sigma=sigma, geometry=geometry)
    s1, s2 = onset_sigmas(params.base, L, params)
    if rep.transition_type is TransitionType.TYPE_I:
        if m == 1:
            rep.predicted_equilibria = {"count": 2, "stability": "attractor", "side": "lambda>lambda_c"}
            rep.predicted_amplitude_coefficient = math.sqrt(2.0 / s1)
        else:
            rep.predicted_equilibria = {"count": 3**m - 1, "side": "lambda>lambda_c", "attractor": f"S^{m - 1}"}
            _multi_mode_type1(rep, min(m, 3), s1, s2, params.base, L)
    elif rep.transition_type is TransitionType.TYPE_II:
        rep.predicted_equilibria = {"saddle_node": "lambda<lambda_c"}
    if m >= 2:
        _origin_note(rep, min(m, 3), s1, s2)
    return _finalize(rep)


def classify_general(params: ModelParams, m: int, a: float, L: float | None = None) -> TransitionReport:
    """Smooth domain with first-eigenvalue multiplicity ``m``.

    ``a`` is ``int e1^3`` for ``m = 1``; for ``m >= 2`` any nonzero value declares
    ``x = 0`` an isolated zero of the quadratic interaction system. The first
    eigenvalue is unknown here, so ``lambda_critical`` is NaN unless ``L`` is given.
    """
    g2 = params.gamma2
    lam0 = PI2 / L**2 if L else math.nan
    if g2 == 0:
        rep = TransitionReport(TransitionType.TYPE_I, lam0, 0.0, params.gamma3, geometry=f"general(m={m})")
        rep.predicted_equilibria = {"min_singular_points": 2 * m, "attractor": f"S^{m - 1}"}
        return _finalize(rep)
    if a != 0:
        if m == 1:
            rep = TransitionReport(TransitionType.TYPE_III, lam0, None, None, geometry="general(m=1)")
            slope = 1.0 / (g2 * a)
            rep.predicted_equilibria = {"linear_slope": slope, "saddle_node": "lambda<lambda_c", "sectors": 2}
            rep.predicted_amplitude_coefficient = slope
            return _finalize(rep)
        rep = TransitionReport(TransitionType.TYPE_II_OR_III, lam0, None, None, geometry=f"general(m={m})")
        rep.predicted_equilibria = {"at_least_one_each_side": True, "saddle_node": "lambda<lambda_c"}
        return _finalize(rep)
    if L is not None:
        rep = classify_rectangular(params, L, m)
        rep.notes.append("quadratic interaction vanishes; verdict from the cubic analysis")
        return rep
    rep = TransitionReport(TransitionType.DEFERRED, lam0, None, None, geometry=f"general(m={m})")
    rep.notes.append("int e1^3 = 0: transition type decided by the cubic terms (supply L)")
    return _finalize(rep)


# --------------------------------------------------------------------------
# amplitudes


def rectangular_geometry(domain: DomainSpec) -> tuple[float, int]:
    """Longest side and its multiplicity."""
    L = max(domain.lengths)
    m = sum(1 for x in domain.lengths if abs(x - L) <= 1e-9 * L)
    return L, m


def _strata(m: int, dlam: float, s1: float, s2: float, kind: str) -> list[tuple[dict, float]]:
    names = {1: "axis", m: "full_diagonal"}
    out = []
    for p in range(1, m + 1):
        denom = s1 + (p - 1) * s2
        if denom <= 0:
            continue
        desc = {
            "stratum": names.get(p, "face_diagonal"),
            "active_modes": p,
            "count": math.comb(m, p) * 2**p,
            "family": kind,
        }
        out.append((desc, math.sqrt(2.0 * dlam / denom)))
    return out


def predict_amplitudes(
    params: ModelParams, domain: DomainSpec, lam: float | None = None, coupled: CoupledParams | None = None
) -> list[tuple[dict, float]]:
    """Leading-order amplitude of each active first-eigenmode coefficient."""
    lam = params.lam if lam is None else lam
    if domain.kind == "rectangular":
        L, m = rectangular_geometry(domain)
        rep = classify_coupled(coupled, L, m) if coupled else classify_rectangular(params, L, m)
        lam0 = PI2 / L**2
    elif domain.kind == "loop":
        rep = classify_loop(params, domain.r0)
        lam0 = 1.0 / domain.r0**2
    else:
        if domain.dim == 1:
            rep = classify_rectangular(params, math.pi, 1)
        else:
            rep = classify_whole_space(params, domain.dim)
        lam0 = 1.0
    if rep.transition_type is not TransitionType.TYPE_I:
        raise UnsupportedPrediction(f"amplitude law holds only for Type-I transitions, got {rep.transition_type.value}")
    dlam = lam - lam0
    if dlam < 0:
        raise UnsupportedPrediction("no bifurcated states below the critical value in the Type-I regime")
    if domain.kind == "loop":
        sigma = loop_sigma(params, domain.r0, lam)
        return [({"stratum": "circle", "active_modes": 2, "count": math.inf, "family": "loop"}, math.sqrt(dlam / sigma))]
    if domain.kind == "rectangular":
        _, s1, s2 = reduced_coefficients(params, L, lam, coupled)
        return _strata(m, dlam, s1, s2, "rectangular")
    _, s1, s2 = reduced_coefficients(params, math.pi, lam)
    out = _strata(min(domain.dim, 3), dlam, s1, s2, "torus_even_subspace")
    for desc, _ in out:
        desc["singularity_torus_dimension"] = desc["active_modes"]
    return out


def critical_value(domain: DomainSpec) -> float:
    """First nonzero eigenvalue of ``-Laplacian``, i.e. the critical ``lambda``."""
    return first_eigenspace(domain)[0]
