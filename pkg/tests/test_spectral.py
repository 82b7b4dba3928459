import math
import warnings

import numpy as np
import pytest

from chtransit.spectral import (
    DomainSpec,
    ModeIndex,
    SpectralField,
    build_basis,
    eigenfunction,
    first_eigenspace,
    growth_rate,
    mode_product_integral,
    project_zero_mean,
    to_nodal_array,
    to_spectral_array,
    transform,
    truncate_spectral,
)


def all_domains():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [
            DomainSpec.rectangular(math.pi, 32),
            DomainSpec.rectangular((2.0, 1.0), 16),
            DomainSpec.rectangular((1.0, 1.5, 2.0), 16),
            DomainSpec.loop(3.0, 32),
            DomainSpec.torus(1, 32),
            DomainSpec.torus(2, 16),
        ]


@pytest.mark.parametrize("domain", all_domains(), ids=lambda d: d.describe())
def test_round_trip_and_parseval(domain):
    rng = np.random.default_rng(3)
    u = rng.standard_normal(domain.shape)
    c = to_spectral_array(domain, u)
    assert np.max(np.abs(to_nodal_array(domain, c) - u)) < 1e-12
    parseval = float(np.sum(domain.parseval_weights() * c**2))
    assert parseval == pytest.approx(float(np.mean(u**2)), rel=1e-12)


@pytest.mark.parametrize("domain", all_domains(), ids=lambda d: d.describe())
def test_coefficients_of_eigenfunction(domain):
    entries = build_basis(domain, 4)[:3]
    coords = domain.coordinates()
    u = sum((i + 1) * 0.1 * eigenfunction(domain, e.mode, coords) for i, e in enumerate(entries))
    fld = SpectralField(domain, u)
    for i, e in enumerate(entries):
        assert fld.amplitude(e.mode) == pytest.approx((i + 1) * 0.1, abs=1e-13)


def test_padding_matches_direct_evaluation():
    d = DomainSpec.rectangular((math.pi, 2.0), 16)
    mode = ModeIndex((2, 1))
    c = SpectralField.from_modes(d, {mode: 0.7}).spectral()
    fine = to_nodal_array(d, c, 24)
    fine_d = d.with_grid(24)
    direct = 0.7 * eigenfunction(d, mode, fine_d.coordinates())
    assert np.max(np.abs(fine - direct)) < 1e-13
    back = truncate_spectral(fine_d, to_spectral_array(fine_d, fine), 16)
    assert np.max(np.abs(back - c)) < 1e-13


def test_periodic_padding_keeps_sine_modes():
    d = DomainSpec.torus(1, 16)
    mode = ModeIndex((3,), ("s",))
    c = SpectralField.from_modes(d, {mode: 1.0}).spectral()
    fine = to_nodal_array(d, c, 24)
    x = d.with_grid(24).coordinates()[0]
    assert np.max(np.abs(fine - np.sin(3 * x))) < 1e-13


def test_first_eigenspace_examples():
    rho, modes = first_eigenspace(DomainSpec.rectangular(math.pi))
    assert rho == pytest.approx(1.0) and modes == [ModeIndex((1,))]
    rho, modes = first_eigenspace(DomainSpec.rectangular((math.pi, math.pi)))
    assert rho == pytest.approx(1.0) and len(modes) == 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rho, modes = first_eigenspace(DomainSpec.loop(3.0))
    assert rho == pytest.approx(1 / 9) and [m.parity[0] for m in modes] == ["c", "s"]
    rho, modes = first_eigenspace(DomainSpec.torus(2))
    assert rho == pytest.approx(1.0) and len(modes) == 4


def test_degenerate_ordering_is_lexicographic():
    basis = build_basis(DomainSpec.rectangular((2 * math.pi, math.pi)), 4)
    tie = [e.mode.k for e in basis if abs(e.eigenvalue - 1.0) < 1e-12]
    assert tie == [(0, 1), (2, 0)]


def test_growth_rate():
    d = DomainSpec.rectangular(math.pi)
    assert growth_rate(d, ModeIndex((1,)), 1.05) == pytest.approx(0.05)


def test_mode_product_integrals_match_quadrature():
    d = DomainSpec.rectangular((2.0, 1.0), 64)
    cases = [
        [ModeIndex((1, 0))] * 4,
        [ModeIndex((2, 0)), ModeIndex((1, 0)), ModeIndex((1, 0))],
        [ModeIndex((1, 1)), ModeIndex((1, 0)), ModeIndex((0, 1))],
    ]
    coords = d.coordinates()
    for modes in cases:
        prod = np.prod([eigenfunction(d, m, coords) for m in modes], axis=0)
        assert mode_product_integral(d, modes) == pytest.approx(float(np.mean(prod)) * d.volume, abs=1e-12)
    assert mode_product_integral(d, [ModeIndex((1, 0))] * 4) == pytest.approx(0.75)
    t = DomainSpec.torus(2, 32)
    tc = t.coordinates()
    modes = [ModeIndex((1, 0), ("s", "c")), ModeIndex((1, 1), ("s", "s")), ModeIndex((2, 1), ("c", "s"))]
    prod = np.prod([eigenfunction(t, m, tc) for m in modes], axis=0)
    assert mode_product_integral(t, modes) == pytest.approx(float(np.mean(prod)) * t.volume, abs=1e-12)


def test_zero_mean_projection_and_transform():
    d = DomainSpec.rectangular(math.pi, 32)
    fld = SpectralField(d, np.cos(d.coordinates()[0]) + 0.3)
    z = project_zero_mean(fld)
    assert abs(z.mean()) < 1e-15
    assert transform(transform(z, "to_spectral"), "to_nodal").nodal() == pytest.approx(z.nodal())
    with pytest.raises(ValueError):
        transform(z, "sideways")


@pytest.mark.parametrize(
    "kwargs",
    [dict(kind="rectangular", lengths=(1.0,), grid_points_per_dim=15), dict(kind="rectangular", lengths=(-1.0,)),
     dict(kind="loop", r0=0.3), dict(kind="torus", dim=0), dict(kind="sphere")],
)
def test_invalid_domains(kwargs):
    with pytest.raises(ValueError):
        DomainSpec(**kwargs)


def test_invalid_modes():
    with pytest.raises(ValueError):
        ModeIndex((0, 0))
    with pytest.raises(ValueError):
        ModeIndex((0,), ("s",))
    with pytest.raises(ValueError):
        SpectralField.from_modes(DomainSpec.rectangular(1.0), {ModeIndex((1,), "s"): 1.0})
