"""Brute-force references for validating the library.

Nothing here calls the modules it checks.  Kronecker products are formed
densely, integrals use a self-contained Gauss-Kronrod rule, and maximisers
scan or bisect without derivatives.  Slow on purpose.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np
from scipy import stats

__all__ = [
    "MAX_DENSE",
    "dense_kron",
    "dense_quadform",
    "dense_logdet",
    "unit_kron",
    "ks_one_sample",
    "ks_two_sample",
    "integrate_1d",
    "golden_section_max",
    "grid_scan_max",
    "wishart_logpdf",
    "mvn_logpdf",
]

MAX_DENSE = 4096


def dense_kron(factors) -> np.ndarray:
    """Explicit ``F_1 (x) ... (x) F_k`` (last factor varies fastest)."""
    mats = [np.atleast_2d(np.asarray(f, dtype=float)) for f in factors]
    rows = math.prod(m.shape[0] for m in mats)
    cols = math.prod(m.shape[1] for m in mats)
    if rows > MAX_DENSE or cols > MAX_DENSE:
        raise ValueError(f"dense Kronecker product {rows}x{cols} exceeds {MAX_DENSE}")
    return reduce(np.kron, mats)


def unit_kron(multi_index, dims) -> np.ndarray:
    """``e_{i_1} (x) ... (x) e_{i_k}`` for a 1-based multi-index."""
    vecs = []
    for i, p in zip(multi_index, dims):
        e = np.zeros(p)
        e[i - 1] = 1.0
        vecs.append(e)
    return reduce(np.kron, vecs)


def dense_quadform(x, mu, sigma) -> float:
    d = np.asarray(x, dtype=float) - np.asarray(mu, dtype=float)
    return float(d @ np.linalg.solve(sigma, d))


def dense_logdet(sigma) -> float:
    sign, val = np.linalg.slogdet(sigma)
    if sign <= 0:
        raise ValueError("matrix is not positive definite")
    return float(val)


def mvn_logpdf(x, mu, sigma) -> float:
    p = len(mu)
    return -0.5 * (p * math.log(2 * math.pi) + dense_logdet(sigma) + dense_quadform(x, mu, sigma))


def wishart_logpdf(a, dof, scale) -> float:
    """Wishart ``W_p(dof, scale)`` log density with the multivariate gamma written out."""
    a = np.asarray(a, dtype=float)
    p = a.shape[0]
    log_gamma_p = 0.25 * p * (p - 1) * math.log(math.pi) + sum(
        math.lgamma(0.5 * dof - 0.5 * j) for j in range(p)
    )
    trace = float(np.trace(np.linalg.solve(scale, a)))
    return (
        0.5 * (dof - p - 1) * dense_logdet(a)
        - 0.5 * trace
        - 0.5 * dof * p * math.log(2)
        - 0.5 * dof * dense_logdet(scale)
        - log_gamma_p
    )


def ks_two_sample(a, b):
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value (reliable for n >= 50)."""
    res = stats.ks_2samp(np.asarray(a), np.asarray(b), method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_one_sample(a, cdf):
    """One-sample KS against a callable CDF, asymptotic p-value."""
    res = stats.kstest(np.asarray(a), cdf, method="asymp")
    return float(res.statistic), float(res.pvalue)


# Gauss-Kronrod 7/15 nodes on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])


def _gk15(f, a, b):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    x = np.concatenate([c - h * _XGK[:-1], [c], c + h * _XGK[:-1][::-1]])
    fx = np.array([f(v) for v in x])
    wk = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
    kron = h * float(np.dot(wk, fx))
    # Gauss nodes are the odd-indexed Kronrod nodes
    gauss_idx = [1, 3, 5, 7, 9, 11, 13]
    wg = np.concatenate([_WG[:-1], [_WG[-1]], _WG[:-1][::-1]])
    gauss = h * float(np.dot(wg, fx[gauss_idx]))
    return kron, abs(kron - gauss)


def _adaptive(f, a, b, tol, depth=0, max_depth=60):
    val, err = _gk15(f, a, b)
    if err <= tol or depth >= max_depth or b - a < 1e-300:
        return val, err
    m = 0.5 * (a + b)
    v1, e1 = _adaptive(f, a, m, 0.5 * tol, depth + 1, max_depth)
    v2, e2 = _adaptive(f, m, b, 0.5 * tol, depth + 1, max_depth)
    return v1 + v2, e1 + e2


def integrate_1d(f, domain, tol=1e-12, mode="adaptive", half_period=None, n_half=120):
    """Integrate ``f`` over ``domain = (a, b)``; ``b`` may be ``inf``.

    ``mode="adaptive"`` bisects with a 15-point Gauss-Kronrod rule; an
    infinite upper limit is mapped by ``t = a + u / (1 - u)``.

    ``mode="oscillatory"`` integrates over consecutive half periods starting
    at ``a`` and averages neighbouring partial sums repeatedly until one
    value remains.

    Returns
    -------
    (value, error_estimate)
    """
    a, b = float(domain[0]), float(domain[1])
    if mode == "adaptive":
        if math.isinf(b):
            def g(u):
                if u >= 1.0:
                    return 0.0
                return f(a + u / (1 - u)) / (1 - u) ** 2

            return _adaptive(g, 0.0, 1.0, tol)
        return _adaptive(f, a, b, tol)
    if mode != "oscillatory" or half_period is None:
        raise ValueError("oscillatory mode needs half_period")
    pieces = []
    for j in range(n_half):
        lo = a + j * half_period
        pieces.append(_adaptive(f, lo, lo + half_period, tol / n_half)[0])
    partial = np.cumsum(pieces)

    def averaged(sums):
        while sums.size > 1:
            sums = 0.5 * (sums[:-1] + sums[1:])
        return float(sums[0])

    value = averaged(partial)
    return value, abs(value - averaged(partial[:-1]))


_INVPHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f, bracket, tol=1e-10, polish=True):
    """Argmax of a unimodal ``f`` on ``bracket`` by golden-section search.

    Comparing function values cannot locate a smooth maximum better than
    about ``sqrt(eps)`` relative.  With ``polish`` the result is refined by
    parabolic interpolation through points ``1e-5 |y|`` apart, far enough
    that the rounding noise of ``f`` does not matter.
    """
    lo, hi = map(float, bracket)
    a, b = lo, hi
    c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    y = 0.5 * (a + b)
    if not polish:
        return y
    for _ in range(2):
        h = 1e-5 * max(abs(y), 1e-8)
        if y - h <= lo or y + h >= hi:
            break
        fm, f0, fp = f(y - h), f(y), f(y + h)
        curv = fp - 2 * f0 + fm
        if not curv < 0:
            break
        step = 0.5 * h * (fp - fm) / curv
        if abs(step) > h:
            break
        y -= step
    return y


def grid_scan_max(f, bracket, points=10**6, refinements=1):
    """Argmax over an evenly spaced grid; each refinement rescans +-2 cells around the best."""
    a, b = map(float, bracket)
    best = a
    for _ in range(refinements + 1):
        xs = np.linspace(a, b, int(points))
        vals = f(xs)
        i = int(np.nanargmax(vals))
        best = float(xs[i])
        step = xs[1] - xs[0]
        a, b = max(xs[0], best - 2 * step), min(xs[-1], best + 2 * step)
    return best
