"""Independent oracles used by the test suite.

These deliberately avoid the library's own code paths: the eigenvalue
oracle integrates the ODE by shooting, the polynomial oracle is a dense
grid scan, and derivative checks use central finite differences on the
plain functional values.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp


def shooting_lambda1(p: float, length: float = 1.0) -> float:
    """First Dirichlet eigenvalue of -(|u'|^{p-2}u')' = lam*|u|^{p-2}u on (0, length).

    Shoot with lam = 1, u(0) = 0, u'(0) = 1, in flux form
        u' = sign(w)|w|^{1/(p-1)},   w' = -|u|^{p-2}u,
    find the first interior zero x0 of u, and use the p-homogeneous scaling
    u(c x): lam scales as c^p, so lambda1 = (x0/length)^p.
    """

    def rhs(_x, yz):
        u, w = yz
        return [np.sign(w) * abs(w) ** (1.0 / (p - 1.0)), -np.sign(u) * abs(u) ** (p - 1.0)]

    def hit_zero(_x, yz):
        return yz[0]

    hit_zero.terminal = True
    hit_zero.direction = -1.0

    sol = solve_ivp(
        rhs,
        (0.0, 50.0),
        [0.0, 1.0],
        events=hit_zero,
        rtol=1e-11,
        atol=1e-13,
        max_step=0.01,
        dense_output=False,
    )
    if sol.t_events[0].size == 0:
        raise RuntimeError(f"shooting found no zero crossing for p={p}")
    x0 = float(sol.t_events[0][0])
    return (x0 / length) ** p


def picone_poly_min(p: float, q: float, n_grid: int = 200_001, s_max: float | None = None) -> tuple[float, float]:
    """Brute-force global minimum of the quartic-like polynomial

        f(s) = (q-1)s^p + q s^{p-1} - (p-q)s + (q-p+1),  s >= 0,

    by dense grid scan plus golden-section refinement around the best cell.
    Returns (min value, argmin).
    """
    if s_max is None:
        s_max = max(4.0, ((p - q) / (q - 1.0)) ** (1.0 / (p - 1.0)) + 2.0)

    def f(s):
        return (q - 1.0) * s**p + q * s ** (p - 1.0) - (p - q) * s + (q - p + 1.0)

    s = np.linspace(0.0, s_max, n_grid)
    vals = f(s)
    k = int(np.argmin(vals))
    lo = s[max(k - 1, 0)]
    hi = s[min(k + 1, n_grid - 1)]
    # golden-section refine inside [lo, hi]
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(d)
        if b - a < 1e-14 * max(1.0, abs(a)):
            break
    s_star = 0.5 * (a + b)
    candidates = [(float(f(0.0)), 0.0), (float(f(s_star)), float(s_star)), (float(vals[k]), float(s[k]))]
    return min(candidates, key=lambda t: t[0])


def central_diff_directional(fun, vals: np.ndarray, direction: np.ndarray, eps: float) -> float:
    """Central finite difference of fun along direction at vals."""
    return (fun(vals + eps * direction) - fun(vals - eps * direction)) / (2.0 * eps)
