"""Eigenbases, transforms and mode-product integrals for the supported domains.

Three domain families are supported, each a tensor product of one-dimensional
axes:

* ``rectangular`` -- ``(0, L_1) x ... x (0, L_n)`` with Neumann conditions,
  cosine modes ``cos(k pi x / L)`` on cell-centred grids (DCT-II).
* ``loop`` -- thin annulus in ``(theta, r)`` with the separable Laplacian
  ``d_rr + r0**-2 d_thth``; Fourier modes in ``theta``, cosine modes in ``r``.
* ``torus`` -- ``[0, 2 pi)**n`` periodic, Fourier modes on each axis.

Eigenfunctions are unnormalised products of amplitude-one cosines/sines, and a
``spectral`` array holds the coefficients of that basis.  Along a periodic axis
of ``n`` points the layout is ``[cos 0, cos 1, ..., cos n/2, sin 1, ...,
sin (n/2 - 1)]``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.fft as sfft

NEUMANN = "neumann"
PERIODIC = "periodic"

DOMAIN_KINDS = ("rectangular", "loop", "torus")

# relative tolerance for calling two eigenvalues degenerate
DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class Axis:
    kind: str
    length: float
    scale: float = 1.0  # metric factor multiplying d^2/dx^2 along this axis
    origin: float = 0.0

    def wavenumber(self, k: int) -> float:
        if self.kind == NEUMANN:
            return math.pi * k / self.length
        return 2.0 * math.pi * k / self.length

    def eigenvalue(self, k: int) -> float:
        return self.scale * self.wavenumber(k) ** 2

    def coordinates(self, n: int) -> np.ndarray:
        h = self.length / n
        if self.kind == NEUMANN:
            return self.origin + (np.arange(n) + 0.5) * h
        return self.origin + np.arange(n) * h

    def layout(self, n: int) -> list[tuple[int, str]]:
        """(k, parity) for every coefficient index along this axis."""
        if self.kind == NEUMANN:
            return [(k, "c") for k in range(n)]
        half = n // 2
        return [(k, "c") for k in range(half + 1)] + [(k, "s") for k in range(1, half)]

    def index_of(self, k: int, parity: str, n: int) -> int:
        if self.kind == NEUMANN:
            if parity != "c" or not 0 <= k < n:
                raise ValueError(f"mode ({k}, {parity}) not representable on {n} Neumann points")
            return k
        half = n // 2
        if parity == "c" and 0 <= k <= half:
            return k
        if parity == "s" and 1 <= k < half:
            return half + k
        raise ValueError(f"mode ({k}, {parity}) not representable on {n} periodic points")

    def eigenvalues(self, n: int) -> np.ndarray:
        return np.array([self.eigenvalue(k) for k, _ in self.layout(n)])

    def parseval_weights(self, n: int) -> np.ndarray:
        """Discrete mean of e_k**2 on the grid for each layout index."""
        w = []
        for k, _ in self.layout(n):
            if k == 0 or (self.kind == PERIODIC and k == n // 2):
                w.append(1.0)
            else:
                w.append(0.5)
        return np.array(w)


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    lengths: tuple[float, ...] = ()
    r0: float | None = None
    dim: int | None = None
    grid_points_per_dim: int = 64

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        n = self.grid_points_per_dim
        if n < 16 or n % 2:
            raise ValueError("grid_points_per_dim must be an even integer >= 16")
        if self.kind == "rectangular":
            if not 1 <= len(self.lengths) <= 3:
                raise ValueError("rectangular domains have 1 to 3 lengths")
            if any(not (L > 0 and math.isfinite(L)) for L in self.lengths):
                raise ValueError("all lengths must be positive and finite")
            object.__setattr__(self, "lengths", tuple(float(L) for L in self.lengths))
        elif self.kind == "loop":
            if self.r0 is None or not self.r0 > 0.5:
                raise ValueError("loop domain needs mean radius r0 > 1/2 (unit gap)")
            if self.r0 < 3:
                warnings.warn("thin-gap loop approximation assumes r0 >> 1 (r0 < 3)", stacklevel=3)
        else:
            if self.dim is None or self.dim < 1:
                raise ValueError("torus dimension must be >= 1")

    @classmethod
    def rectangular(cls, lengths: Sequence[float] | float, n: int = 64) -> "DomainSpec":
        if np.isscalar(lengths):
            lengths = (float(lengths),)
        return cls("rectangular", lengths=tuple(lengths), grid_points_per_dim=n)

    @classmethod
    def loop(cls, r0: float, n: int = 64) -> "DomainSpec":
        return cls("loop", r0=float(r0), grid_points_per_dim=n)

    @classmethod
    def torus(cls, dim: int, n: int = 64) -> "DomainSpec":
        return cls("torus", dim=int(dim), grid_points_per_dim=n)

    def with_grid(self, n: int) -> "DomainSpec":
        return DomainSpec(self.kind, self.lengths, self.r0, self.dim, n)

    @property
    def axes(self) -> tuple[Axis, ...]:
        if self.kind == "rectangular":
            return tuple(Axis(NEUMANN, L) for L in self.lengths)
        if self.kind == "loop":
            return (
                Axis(PERIODIC, 2.0 * math.pi, 1.0 / self.r0**2),
                Axis(NEUMANN, 1.0, origin=self.r0 - 0.5),
            )
        return tuple(Axis(PERIODIC, 2.0 * math.pi) for _ in range(self.dim))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.grid_points_per_dim,) * self.ndim

    @property
    def volume(self) -> float:
        return float(np.prod([ax.length for ax in self.axes]))

    def coordinates(self, n: int | None = None) -> list[np.ndarray]:
        """Meshgrid of nodal coordinates (``ij`` indexing)."""
        n = n or self.grid_points_per_dim
        return np.meshgrid(*[ax.coordinates(n) for ax in self.axes], indexing="ij")

    def laplacian_eigenvalues(self, n: int | None = None) -> np.ndarray:
        """Array of ``-Laplacian`` eigenvalues in spectral layout."""
        n = n or self.grid_points_per_dim
        grids = np.meshgrid(*[ax.eigenvalues(n) for ax in self.axes], indexing="ij")
        return np.sum(grids, axis=0)

    def parseval_weights(self, n: int | None = None) -> np.ndarray:
        n = n or self.grid_points_per_dim
        grids = np.meshgrid(*[ax.parseval_weights(n) for ax in self.axes], indexing="ij")
        return np.prod(grids, axis=0)

    def describe(self) -> str:
        if self.kind == "rectangular":
            geo = "lengths=" + ",".join(repr(L) for L in self.lengths)
        elif self.kind == "loop":
            geo = f"r0={self.r0!r}"
        else:
            geo = f"dim={self.dim}"
        return f"{self.kind}({geo})"


@dataclass(frozen=True)
class ModeIndex:
    """Wave-number vector, one entry per axis, plus per-axis cos/sin parity."""

    k: tuple[int, ...]
    parity: tuple[str, ...] | None = None

    def __post_init__(self):
        k = tuple(int(v) for v in self.k)
        parity = self.parity or ("c",) * len(k)
        if isinstance(parity, str):
            parity = (parity,) * len(k)
        parity = tuple({"cos": "c", "cosine": "c", "sin": "s", "sine": "s"}.get(p, p) for p in parity)
        if len(parity) != len(k):
            raise ValueError("parity must have one entry per axis")
        if any(p not in ("c", "s") for p in parity):
            raise ValueError("parity entries must be 'c' or 's'")
        if any(ki < 0 for ki in k):
            raise ValueError("wave numbers are non-negative; use parity for sine modes")
        if all(ki == 0 for ki in k):
            raise ValueError("the constant mode is excluded by the zero-mean constraint")
        if any(ki == 0 and p == "s" for ki, p in zip(k, parity)):
            raise ValueError("sin(0 x) is identically zero")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "parity", parity)

    def label(self) -> str:
        parts = []
        for ki, p in zip(self.k, self.parity):
            parts.append(f"{ki}" if p == "c" else f"{ki}s")
        return "_".join(parts)

    def sort_key(self):
        return (self.k, self.parity)


class BasisEntry(NamedTuple):
    mode: ModeIndex
    eigenvalue: float


def _check_mode(domain: DomainSpec, mode: ModeIndex):
    if len(mode.k) != domain.ndim:
        raise ValueError(f"mode {mode.k} has wrong dimension for {domain.describe()}")
    for ax, p in zip(domain.axes, mode.parity):
        if ax.kind == NEUMANN and p != "c":
            raise ValueError("Neumann axes carry cosine modes only")


def eigenvalue(domain: DomainSpec, mode: ModeIndex) -> float:
    """``rho_K`` with ``-Laplacian e_K = rho_K e_K``."""
    _check_mode(domain, mode)
    return float(sum(ax.eigenvalue(k) for ax, k in zip(domain.axes, mode.k)))


def build_basis(domain: DomainSpec, max_modes_per_dim: int = 32) -> list[BasisEntry]:
    """All nonconstant modes with wave numbers below ``max_modes_per_dim``.

    Sorted ascending by eigenvalue; degenerate eigenvalues (relative 1e-9) are
    ordered lexicographically by wave-number vector, then parity.
    """
    per_axis = []
    for ax in domain.axes:
        opts = [(k, "c") for k in range(max_modes_per_dim)]
        if ax.kind == PERIODIC:
            opts += [(k, "s") for k in range(1, max_modes_per_dim)]
        per_axis.append(opts)
    entries = []
    for combo in itertools.product(*per_axis):
        k = tuple(c[0] for c in combo)
        if not any(k):
            continue
        mode = ModeIndex(k, tuple(c[1] for c in combo))
        entries.append(BasisEntry(mode, eigenvalue(domain, mode)))
    entries.sort(key=lambda e: e.eigenvalue)

    out: list[BasisEntry] = []
    group: list[BasisEntry] = []
    for e in entries:
        if group and abs(e.eigenvalue - group[0].eigenvalue) > DEGENERACY_RTOL * group[0].eigenvalue:
            out.extend(sorted(group, key=lambda g: g.mode.sort_key()))
            group = []
        group.append(e)
    out.extend(sorted(group, key=lambda g: g.mode.sort_key()))
    return out


def first_eigenspace(domain: DomainSpec) -> tuple[float, list[ModeIndex]]:
    """Smallest eigenvalue and the modes spanning its eigenspace."""
    basis = build_basis(domain, max_modes_per_dim=3)
    rho1 = basis[0].eigenvalue
    modes = [e.mode for e in basis if abs(e.eigenvalue - rho1) <= DEGENERACY_RTOL * rho1]
    return rho1, modes


def growth_rate(domain: DomainSpec, mode: ModeIndex, lam: float) -> float:
    """Linear growth rate ``|K|^2 (lambda - |K|^2)`` of a single mode."""
    rho = eigenvalue(domain, mode)
    return rho * (lam - rho)


def eigenfunction(domain: DomainSpec, mode: ModeIndex, coords: Sequence[np.ndarray]) -> np.ndarray:
    _check_mode(domain, mode)
    out = np.ones_like(np.asarray(coords[0], dtype=float))
    for ax, x, k, p in zip(domain.axes, coords, mode.k, mode.parity):
        arg = ax.wavenumber(k) * (np.asarray(x) - ax.origin)
        out = out * (np.cos(arg) if p == "c" else np.sin(arg))
    return out


# --------------------------------------------------------------------------
# transforms


def _split_periodic(c: np.ndarray):
    n = c.shape[-1]
    half = n // 2
    return c[..., : half + 1], c[..., half + 1 :]


def _forward_axis(a: np.ndarray, ax: Axis) -> np.ndarray:
    """Nodal -> coefficients along the last axis."""
    n = a.shape[-1]
    if ax.kind == NEUMANN:
        y = sfft.dct(a, type=2, axis=-1) / n
        y[..., 0] *= 0.5
        return y
    f = sfft.rfft(a, axis=-1)
    cos = 2.0 * f.real / n
    cos[..., 0] *= 0.5
    cos[..., n // 2] *= 0.5
    sin = -2.0 * f.imag[..., 1 : n // 2] / n
    return np.concatenate([cos, sin], axis=-1)


def _inverse_axis(c: np.ndarray, ax: Axis, n_out: int) -> np.ndarray:
    """Coefficients -> nodal values on ``n_out >= n`` points along the last axis."""
    n = c.shape[-1]
    if n_out < n:
        raise ValueError("inverse transform cannot coarsen; truncate coefficients instead")
    if ax.kind == NEUMANN:
        y = np.zeros(c.shape[:-1] + (n_out,))
        y[..., :n] = c * n_out
        y[..., 0] *= 2.0
        return sfft.idct(y, type=2, axis=-1)
    cos, sin = _split_periodic(c)
    half = n // 2
    F = np.zeros(c.shape[:-1] + (n_out // 2 + 1,), dtype=complex)
    F[..., 0] = n_out * cos[..., 0]
    F[..., 1:half] = 0.5 * n_out * (cos[..., 1:half] - 1j * sin)
    F[..., half] = (0.5 if n_out > n else 1.0) * n_out * cos[..., half]
    return sfft.irfft(F, n=n_out, axis=-1)


def _truncate_axis(c: np.ndarray, ax: Axis, n: int) -> np.ndarray:
    """Keep the coefficients representable on ``n`` points along the last axis."""
    if ax.kind == NEUMANN:
        return c[..., :n]
    cos, sin = _split_periodic(c)
    half = n // 2
    return np.concatenate([cos[..., : half + 1], sin[..., : half - 1]], axis=-1)


def _apply_axes(a: np.ndarray, axes: Sequence[Axis], fn) -> np.ndarray:
    out = a
    for i, ax in enumerate(axes):
        out = np.moveaxis(fn(np.moveaxis(out, i, -1), ax), -1, i)
    return out


def to_spectral_array(domain: DomainSpec, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != domain.ndim:
        raise ValueError(f"array of rank {values.ndim} for {domain.ndim}-d domain")
    return _apply_axes(values, domain.axes, _forward_axis)


def to_nodal_array(domain: DomainSpec, coeffs: np.ndarray, n_out: int | None = None) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != domain.ndim:
        raise ValueError(f"array of rank {coeffs.ndim} for {domain.ndim}-d domain")
    n_out = n_out or coeffs.shape[0]
    return _apply_axes(coeffs, domain.axes, lambda c, ax: _inverse_axis(c, ax, n_out))


def truncate_spectral(domain: DomainSpec, coeffs: np.ndarray, n: int) -> np.ndarray:
    return _apply_axes(coeffs, domain.axes, lambda c, ax: _truncate_axis(c, ax, n))


@dataclass
class SpectralField:
    """A scalar field on a domain, stored either as nodal values or coefficients."""

    domain: DomainSpec
    data: np.ndarray
    space: str = "nodal"

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.space not in ("nodal", "spectral"):
            raise ValueError("space must be 'nodal' or 'spectral'")
        if self.data.shape != self.domain.shape:
            raise ValueError(f"grid {self.data.shape} does not match domain grid {self.domain.shape}")

    @classmethod
    def zeros(cls, domain: DomainSpec) -> "SpectralField":
        return cls(domain, np.zeros(domain.shape))

    @classmethod
    def from_modes(cls, domain: DomainSpec, amplitudes: dict) -> "SpectralField":
        c = np.zeros(domain.shape)
        n = domain.grid_points_per_dim
        for mode, amp in amplitudes.items():
            mode = mode if isinstance(mode, ModeIndex) else ModeIndex(tuple(mode))
            _check_mode(domain, mode)
            idx = tuple(ax.index_of(k, p, n) for ax, k, p in zip(domain.axes, mode.k, mode.parity))
            c[idx] += amp
        return cls(domain, c, "spectral")

    def nodal(self) -> np.ndarray:
        return self.data if self.space == "nodal" else to_nodal_array(self.domain, self.data)

    def spectral(self) -> np.ndarray:
        return self.data if self.space == "spectral" else to_spectral_array(self.domain, self.data)

    def amplitude(self, mode: ModeIndex) -> float:
        n = self.domain.grid_points_per_dim
        _check_mode(self.domain, mode)
        idx = tuple(ax.index_of(k, p, n) for ax, k, p in zip(self.domain.axes, mode.k, mode.parity))
        return float(self.spectral()[idx])

    def coefficients(self, atol: float = 0.0) -> dict[ModeIndex, float]:
        """Nonconstant coefficients with magnitude above ``atol``."""
        c = self.spectral()
        n = self.domain.grid_points_per_dim
        layouts = [ax.layout(n) for ax in self.domain.axes]
        out = {}
        for idx in zip(*np.nonzero(np.abs(c) > atol)):
            ks = [layouts[d][i] for d, i in enumerate(idx)]
            k = tuple(e[0] for e in ks)
            if not any(k):
                continue
            out[ModeIndex(k, tuple(e[1] for e in ks))] = float(c[idx])
        return out

    def mean(self) -> float:
        c = self.spectral()
        return float(c[(0,) * c.ndim])

    def integral(self) -> float:
        return self.mean() * self.domain.volume


def transform(fld: SpectralField, direction: str) -> SpectralField:
    if direction == "to_spectral":
        return SpectralField(fld.domain, fld.spectral(), "spectral")
    if direction == "to_nodal":
        return SpectralField(fld.domain, fld.nodal(), "nodal")
    raise ValueError("direction must be 'to_spectral' or 'to_nodal'")


def project_zero_mean(fld: SpectralField) -> SpectralField:
    """Remove the constant mode; other coefficients are untouched."""
    if fld.space == "spectral":
        c = fld.data.copy()
        c[(0,) * c.ndim] = 0.0
        return SpectralField(fld.domain, c, "spectral")
    return SpectralField(fld.domain, fld.data - fld.data.mean(), "nodal")


# --------------------------------------------------------------------------
# closed-form products of eigenfunctions


def _axis_product_integral(ax: Axis, ks: Sequence[int], parities: Sequence[str]) -> float:
    p = len(ks)
    n_sin = sum(1 for q in parities if q == "s")
    if n_sin % 2:
        return 0.0
    total = 0
    for signs in itertools.product((1, -1), repeat=p):
        if sum(s * k for s, k in zip(signs, ks)) != 0:
            continue
        weight = 1
        for s, q in zip(signs, parities):
            if q == "s":
                weight *= s
        total += weight
    if ax.kind == NEUMANN:
        # zero net frequency integrates to L; nonzero integer multiples of pi/L vanish
        return ax.length * total / 2**p
    return ax.length * total * (-1) ** (n_sin // 2) / 2**p


def mode_product_integral(domain: DomainSpec, modes: Iterable[ModeIndex]) -> float:
    """Exact integral over the domain of a product of 2-4 eigenfunctions."""
    modes = [m if isinstance(m, ModeIndex) else ModeIndex(tuple(m)) for m in modes]
    if not 2 <= len(modes) <= 4:
        raise ValueError("mode_product_integral takes 2 to 4 modes")
    for m in modes:
        _check_mode(domain, m)
    value = 1.0
    for d, ax in enumerate(domain.axes):
        value *= _axis_product_integral(ax, [m.k[d] for m in modes], [m.parity[d] for m in modes])
        if value == 0.0:
            return 0.0
    return value
