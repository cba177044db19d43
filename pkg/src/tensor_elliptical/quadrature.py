"""Integration over the half line used by the generator and density code.

Non-oscillatory integrals go through QUADPACK (``scipy.integrate.quad``).
Signed weighting functions of the form ``sin(c t) * h(t)`` are summed over
half periods and the resulting alternating series is accelerated with the
Euler transformation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError

__all__ = ["QuadratureConfig", "integrate_halfline", "euler_sum", "integrate_oscillatory"]

METHODS = ("adaptive", "gauss", "oscillatory")


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for one-dimensional integrals.

    ``method`` is ``"adaptive"`` (QUADPACK with subdivision), ``"gauss"``
    (fixed-node composite Gauss-Legendre in ``log t``) or ``"oscillatory"``
    (half-period partial sums with Euler acceleration).
    """

    method: str = "adaptive"
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_subdivisions: int = 500
    nodes: int = 96
    max_half_periods: int = 400

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown quadrature method {self.method!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_subdivisions < 1 or self.nodes < 1:
            raise DomainError("max_subdivisions and nodes must be at least 1")


DEFAULT = QuadratureConfig()


def _quad(f, a, b, config):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info = integrate.quad(
            f, a, b,
            epsabs=config.abs_tol, epsrel=config.rel_tol,
            limit=config.max_subdivisions, full_output=1,
        )[:3]
    return value, err


def integrate_halfline(f, config: QuadratureConfig = DEFAULT, splits=(), tol_factor=1e3):
    """Integrate ``f`` over ``(0, inf)``.

    Parameters
    ----------
    f : callable
        Scalar integrand.
    splits : sequence of float
        Interior points where the integrand changes scale (peaks, kinks).
        The range is cut there and the last piece is integrated to infinity.
    tol_factor : float
        The call fails when the achieved error exceeds ``tol_factor`` times
        the requested tolerance.

    Returns
    -------
    (value, error_estimate)
    """
    if config.method == "gauss":
        return _gauss_log(f, config, splits)
    pts = sorted(s for s in splits if s > 0 and np.isfinite(s))
    edges = [0.0, *pts, np.inf]
    total, total_err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = _quad(f, a, b, config)
        total += v
        total_err += e
    bound = tol_factor * max(config.abs_tol, config.rel_tol * abs(total))
    if not np.isfinite(total) or total_err > bound:
        raise QuadratureError("half-line integral did not converge", total, total_err)
    return total, total_err


def _gauss_log(f, config, splits, span=40.0, panels=40):
    # fixed-node Gauss-Legendre in s = log t, centred on the split points
    pts = [v for v in splits if v > 0 and np.isfinite(v)] or [1.0]
    centre = math.exp(float(np.mean(np.log(pts))))

    def rule(nodes):
        x, w = np.polynomial.legendre.leggauss(nodes)
        edges = np.linspace(-span, span, panels + 1)
        mid, half = 0.5 * (edges[:-1] + edges[1:]), 0.5 * np.diff(edges)
        s = (mid[:, None] + half[:, None] * x).ravel()
        ws = (half[:, None] * w).ravel()
        t = centre * np.exp(s)
        return float(sum(wi * ti * f(ti) for wi, ti in zip(ws, t)))

    nodes = max(config.nodes // 8, 4)
    value = rule(nodes)
    return value, abs(value - rule(max(nodes // 2, 2)))


def euler_sum(terms, tol=1e-15):
    """Euler-transformed sum of an alternating series.

    ``terms`` are the signed terms ``c_0, c_1, ...``.  The transformation
    ``sum_n (-1)^n Delta^n a_0 / 2^(n+1)`` with ``a_j = (-1)^j c_j`` is applied
    to the whole sequence; it also assigns the Abel value to bounded
    non-convergent series such as ``1 - 1 + 1 - ...``.

    Returns
    -------
    (value, error_estimate)
    """
    c = np.asarray(terms, dtype=float)
    a = c * (-1.0) ** np.arange(c.size)
    total = 0.0
    last = np.inf
    diff = a.copy()
    for n in range(c.size):
        term = (-1.0) ** n * diff[0] / 2.0 ** (n + 1)
        total += term
        last = abs(term)
        if last < tol * max(abs(total), 1.0) and n > 2:
            break
        diff = np.diff(diff)
        if diff.size == 0:
            break
    return total, last


def integrate_oscillatory(f, half_period: float, config: QuadratureConfig = DEFAULT,
                          head: int = 0):
    """Integrate a sign-alternating integrand over ``(0, inf)``.

    The integrand must change sign exactly at multiples of ``half_period``
    (for example ``sin(pi t / half_period) * h(t)`` with ``h > 0``).

    The first ``head`` half periods are summed directly; the rest of the
    series is Euler-accelerated.  Terms are added in blocks until the
    accelerated value stabilises.

    Returns
    -------
    (value, error_estimate)
    """
    if not half_period > 0:
        raise DomainError("half_period must be positive")

    def piece(j):
        v, _ = _quad(f, j * half_period, (j + 1) * half_period, config)
        return v

    head_sum = sum(piece(j) for j in range(head))
    terms = [piece(head + j) for j in range(24)]
    prev, _ = euler_sum(terms)
    tol = max(config.abs_tol, config.rel_tol * abs(prev + head_sum))
    err = np.inf
    while len(terms) < config.max_half_periods:
        start = head + len(terms)
        terms.extend(piece(start + j) for j in range(16))
        cur, _ = euler_sum(terms)
        err = abs(cur - prev)
        prev = cur
        tol = max(config.abs_tol, config.rel_tol * abs(cur + head_sum))
        if err <= tol:
            break
    value = head_sum + prev
    if not err <= 1e3 * tol:
        raise QuadratureError("oscillatory integral did not stabilise", value, err)
    return value, err

