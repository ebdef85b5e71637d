"""Brute-force reference for the scalar thresholding problem.

Minimises g(x) = 0.5 (x - r)^2 + rho(x) over x >= 0, with rho built by
integrating its derivative (never from the closed forms under test).
"""
import numpy as np
from scipy import integrate, optimize


def rho_prime(family, lam, a, x):
    x = np.asarray(x, dtype=np.float64)
    if family == "group-lasso":
        return np.full_like(x, lam)
    if family == "group-mcp":
        return np.maximum(lam - x / a, 0.0)
    # SCAD: lam for x <= lam, then (a lam - x)_+ / (a - 1)
    return np.where(x <= lam, lam, np.maximum(a * lam - x, 0.0) / (a - 1.0))


def rho_quad(family, lam, a, t):
    """Adaptive quadrature of rho' on [0, t]."""
    if t <= 0.0:
        return 0.0
    kinks = [k for k in (lam, a * lam) if 0.0 < k < t]
    val, _ = integrate.quad(lambda x: float(rho_prime(family, lam, a, x)), 0.0, t,
                            points=kinks or None, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def rho_trapezoid(family, lam, a, t):
    """rho' is piecewise linear, so the trapezoid rule with the kinks as nodes is exact."""
    if t <= 0.0:
        return 0.0
    nodes = np.array(sorted({0.0, t, *(k for k in (lam, a * lam) if 0.0 < k < t)}))
    return float(integrate.trapezoid(rho_prime(family, lam, a, nodes), nodes))


def scalar_minimizer(family, lam, a, r, grid=2001):
    """argmin_{x >= 0} 0.5 (x - r)^2 + rho(x): dense grid, then bounded Brent."""
    if r == 0.0:
        return 0.0
    xs = np.linspace(0.0, r, grid)
    # cumulative trapezoid of rho' is exact up to O(h^2) at the kinks
    dr = rho_prime(family, lam, a, xs)
    rho = np.concatenate([[0.0], np.cumsum(0.5 * (dr[1:] + dr[:-1]) * np.diff(xs))])
    g = 0.5 * (xs - r) ** 2 + rho
    k = int(np.argmin(g))
    h = xs[1] - xs[0]
    lo, hi = max(0.0, xs[k] - 2 * h), min(r, xs[k] + 2 * h)

    def obj(x):
        return 0.5 * (x - r) ** 2 + rho_trapezoid(family, lam, a, x)

    res = optimize.minimize_scalar(obj, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10})
    best = res.x
    # endpoints may beat an interior Brent point when the minimiser sits on 0 or r
    for cand in (lo, hi):
        if obj(cand) < obj(best):
            best = cand
    return float(best)
