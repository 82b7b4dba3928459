"""Independent reference computations used by the test suite.

None of these share code with the package beyond plain numpy/scipy: the
Galerkin solver projects with Gauss-Legendre quadrature instead of the DCT,
Jacobians come from finite differences, and equilibria from brute-force
multi-start Newton iterations.
"""

import itertools
import math

import numpy as np
from scipy.optimize import brentq, root


def galerkin_steady(L, lam, gamma2, gamma3, guess, n_modes=32, n_quad=256):
    """Steady cosine coefficients ``c_1..c_N`` of the 1-D Neumann problem."""
    xq, wq = np.polynomial.legendre.leggauss(n_quad)
    x = 0.5 * L * (xq + 1)
    w = 0.5 * L * wq
    k = np.arange(1, n_modes + 1)
    rho = (np.pi * k / L) ** 2
    basis = np.cos(np.outer(k, x) * np.pi / L)

    def resid(c):
        u = c @ basis
        N = gamma2 * u**2 + gamma3 * u**3
        proj = (2.0 / L) * basis @ (w * N)
        return (lam - rho) * c - proj

    c0 = np.zeros(n_modes)
    c0[: len(guess)] = guess
    sol = root(resid, c0, method="hybr", tol=1e-14)
    return sol.x, float(np.max(np.abs(resid(sol.x))))


def galerkin_stability(L, lam, gamma2, gamma3, c, n_quad=256):
    """Largest eigenvalue of the Galerkin linearization (times -rho)."""
    n_modes = len(c)
    xq, wq = np.polynomial.legendre.leggauss(n_quad)
    x = 0.5 * L * (xq + 1)
    w = 0.5 * L * wq
    k = np.arange(1, n_modes + 1)
    rho = (np.pi * k / L) ** 2
    basis = np.cos(np.outer(k, x) * np.pi / L)
    u = c @ basis
    dN = 2 * gamma2 * u + 3 * gamma3 * u**2
    M = (2.0 / L) * (basis * (w * dN)) @ basis.T
    A = np.diag(rho) @ (np.diag(lam - rho) - M)
    return float(np.max(np.linalg.eigvals(A).real))


def fd_jacobian(f, y, h=1e-6):
    y = np.asarray(y, float)
    J = np.empty((y.size, y.size))
    for j in range(y.size):
        e = np.zeros_like(y)
        e[j] = h
        J[:, j] = (f(y + e) - f(y - e)) / (2 * h)
    return J


def multistart_roots(f, m, bound, per_dim=21, tol=1e-10):
    """Distinct nonzero roots from Newton iterations on a ``per_dim^m`` grid."""
    found = []
    axis = np.linspace(-bound, bound, per_dim)
    for start in itertools.product(axis, repeat=m):
        y = np.array(start, float)
        for _ in range(100):
            fy = f(y)
            if np.linalg.norm(fy) < 1e-14:
                break
            J = fd_jacobian(f, y, 1e-7)
            try:
                y = y - np.linalg.solve(J, fy)
            except np.linalg.LinAlgError:
                break
            if np.linalg.norm(y) > 1e3:
                break
        if np.linalg.norm(f(y)) < tol and np.linalg.norm(y) > 1e-6:
            if not any(np.linalg.norm(y - z) < 1e-6 for z in found):
                found.append(y)
    return found


def sphere_scan_line_directions(g, m, n=400000, seed=0, tol=1e-6):
    """Unit directions where ``g(d)`` is parallel to ``d`` found by dense sampling + polishing."""
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n, m))
    pts /= np.linalg.norm(pts, axis=1)[:, None]

    def perp(d):
        d = d / np.linalg.norm(d)
        gd = g(d)
        return gd - np.dot(gd, d) * d

    vals = np.array([np.linalg.norm(perp(p)) / max(np.linalg.norm(g(p)), 1e-300) for p in pts[:20000]])
    cands = pts[:20000][np.argsort(vals)[:2000]]
    found = []
    for c in cands:
        sol = root(lambda z: np.append(perp(z)[:-1], np.dot(z, z) - 1.0), c, tol=1e-14)
        d = sol.x / np.linalg.norm(sol.x)
        if np.linalg.norm(perp(d)) < tol and not any(np.linalg.norm(d - z) < 1e-5 for z in found):
            found.append(d)
    return found


def bisect(f, lo, hi, tol=1e-14):
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def hildebrand_g(u, a, R, T):
    return R * T * (u * math.log(u) + (1 - u) * math.log(1 - u)) + a * u * (1 - u)


def fd_derivative(fun, x, order, h=1e-3):
    """Central finite differences (8th-order stencils) for derivatives 3 and 4."""
    if order == 3:
        c = {1: -488 / 240, 2: 338 / 240, 3: -72 / 240, 4: 7 / 240}
        return sum(v * (fun(x + k * h) - fun(x - k * h)) for k, v in c.items()) / h**3
    if order == 4:
        c0 = 2730 / 240
        c = {1: -1952 / 240, 2: 676 / 240, 3: -96 / 240, 4: 7 / 240}
        return (c0 * fun(x) + sum(v * (fun(x + k * h) + fun(x - k * h)) for k, v in c.items())) / h**4
    raise ValueError(order)


def fold_by_continuation(q, c, lam_lo=-5.0, lam_hi=5.0, n=20001):
    """Smallest lambda with real nonzero equilibria of lam + q v + c v^2 = 0, by dense sweep + brentq."""
    lams = np.linspace(lam_lo, lam_hi, n)
    disc = q * q - 4 * c * lams
    idx = np.nonzero(np.diff(np.sign(disc)))[0]
    if idx.size == 0:
        return None
    i = idx[0]
    lam_star = brentq(lambda l: q * q - 4 * c * l, lams[i], lams[i + 1], xtol=1e-15)
    return lam_star, -q / (2 * c)
