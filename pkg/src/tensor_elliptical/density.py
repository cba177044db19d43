"""Densities, characteristic functions and mixture-representation integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import DomainError
from .generators import log_g_eval, psi_eval, weighting
from .kron_cov import SeparableCovariance
from .quadrature import QuadratureConfig
from .sampling import TEModel, as_generator
from .tensor_core import DataTensor, as_shape

__all__ = [
    "QuadratureConfig",
    "Expectation",
    "logpdf",
    "pdf",
    "charfun",
    "pdf_via_mixture",
    "expect_via_mixture",
    "quadform_density",
    "quadform_logdensity",
]


def _rows(model: TEModel, x) -> tuple[np.ndarray, bool]:
    if isinstance(x, DataTensor):
        if x.shape != model.shape:
            raise DomainError(f"tensor shape {x.shape.dims} != model shape {model.shape.dims}")
        x = x.values
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    x = x.reshape(1, -1) if single else x
    if x.shape[-1] != model.pstar:
        raise DomainError(f"expected vectors of length {model.pstar}, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise DomainError("x contains non-finite values")
    return x, single


def logpdf(model: TEModel, x):
    """``-1/2 log|Sigma| + log g((x - mu)' Sigma^{-1} (x - mu))``.

    ``x`` may be a :class:`DataTensor`, one vec-order row or an ``(n, p*)`` batch.
    """
    rows, single = _rows(model, x)
    q = np.atleast_1d(model.cov.quad_form(rows, model.mu))
    out = -0.5 * model.cov.log_det() + np.atleast_1d(log_g_eval(model.family, q, model.pstar))
    return float(out[0]) if single else out


def pdf(model: TEModel, x):
    return np.exp(logpdf(model, x))


def charfun(model: TEModel, s, quadrature: QuadratureConfig | None = None):
    """``exp(i s' mu) psi(s' Sigma s)``."""
    rows, single = _rows(model, s)
    z = model.cov.sqrt_apply(rows)
    quad = np.sum(z * z, axis=1)
    psi = np.array([psi_eval(model.family, v, model.pstar, quadrature) for v in quad])
    out = np.exp(1j * (rows @ model.mu)) * psi
    return complex(out[0]) if single else out


def _log_gauss_factory(model: TEModel, q: float) -> Callable[[float], float]:
    """``t -> log f_N(x; mu, Sigma/t)`` given the Mahalanobis form ``q`` of ``x``."""
    p = model.pstar
    const = -0.5 * p * math.log(2 * math.pi) - 0.5 * model.cov.log_det()

    def log_fn(t):
        return const + 0.5 * p * np.log(t) - 0.5 * t * q

    return log_fn


def _peak(spec, log_fn):
    grid = spec.scale * np.geomspace(1e-10, 1e10, 1201)
    vals = np.zeros_like(grid)
    if spec.continuous_density is not None:
        with np.errstate(divide="ignore"):
            vals = np.log(np.abs(spec.continuous_density(grid))) + log_fn(grid)
    else:
        vals = log_fn(grid)
    candidates = [float(np.max(vals))] + [float(log_fn(t)) for t, _ in spec.point_masses]
    i = int(np.argmax(vals))
    return max(candidates), float(grid[i])


def pdf_via_mixture(model: TEModel, x, q: QuadratureConfig | None = None):
    """Density from the weighting representation ``int W(t) f_N(x; mu, Sigma/t) dt``.

    Point masses are summed exactly.  Continuous weights use adaptive
    quadrature split at the peak of the integrand; signed weights use the
    Euler-accelerated half-period sum.
    """
    rows, single = _rows(model, x)
    spec = weighting(model.family, model.pstar)
    qf = np.atleast_1d(model.cov.quad_form(rows, model.mu))
    out = np.empty(qf.size)
    for i, qi in enumerate(qf):
        log_fn = _log_gauss_factory(model, float(qi))
        shift, t_peak = _peak(spec, log_fn)
        val, _ = spec.integrate(
            lambda t: math.exp(log_fn(t) - shift), q,
            splits=tuple(t_peak * c for c in (0.0625, 0.25, 1.0, 4.0, 16.0, 64.0)),
        )
        out[i] = val * math.exp(shift)
    return float(out[0]) if single else out


@dataclass(frozen=True)
class Expectation:
    """Estimate of ``E[B(x)]`` with its Monte Carlo standard error (0 when exact)."""

    value: float
    stderr: float = 0.0


def _log_nodes(spec, step=0.05, span=40.0):
    # trapezoid rule in log t: smooth, decaying integrands converge geometrically
    s = np.arange(-span, span + step / 2, step)
    t = spec.scale * np.exp(s)
    w = step * spec.continuous_density(t) * t
    keep = np.abs(w) > 1e-18 * np.max(np.abs(w))
    return t[keep], w[keep]


def _absolutely_integrable(spec) -> bool:
    hp = spec.half_period or spec.scale
    t1, t2 = 1e2 * hp, 1e4 * hp

    def mass(upper):
        t = np.geomspace(1e-12 * hp, upper, 200001)
        return np.trapezoid(np.abs(spec.continuous_density(t)), t)

    m1, m2 = mass(t1), mass(t2)
    return m2 <= 1.001 * m1


def expect_via_mixture(
    model: TEModel,
    b: Callable,
    method: str = "monte_carlo",
    q: QuadratureConfig | None = None,
    rng=None,
    n_inner: int = 20000,
) -> Expectation:
    """``E[B(x)] = int W(t) E_{N(mu, Sigma/t)}[B(x)] dt``.

    Parameters
    ----------
    b : callable
        For ``method="monte_carlo"``: maps an ``(n, p*)`` array of vec-order
        rows to ``n`` values.  For ``method="closed_form"``: maps
        ``(mean, cov)`` of a Gaussian (``cov`` a :class:`SeparableCovariance`)
        to ``E_N[B]``.
    method : {"monte_carlo", "closed_form"}
        Monte Carlo reuses the same standard normals at every node of a
        log-spaced trapezoid rule over ``t`` (common random numbers), so the
        reported standard error covers the whole estimate.
    """
    spec = weighting(model.family, model.pstar)
    if method == "closed_form":
        val, _ = spec.integrate(lambda t: float(b(model.mu, model.cov.scaled(1.0 / t))), q)
        return Expectation(val, 0.0)
    if method != "monte_carlo":
        raise DomainError(f"unknown expectation method {method!r}")
    if rng is None:
        raise DomainError("monte carlo expectation needs an rng")
    if spec.signed and not _absolutely_integrable(spec):
        raise DomainError(
            "signed weighting is not absolutely integrable against E|B|; "
            "use method='closed_form'"
        )
    gen = as_generator(rng)
    z = model.cov.sqrt_apply(gen.standard_normal((int(n_inner), model.pstar)))
    acc = np.zeros(z.shape[0])
    nodes = list(spec.point_masses)
    if spec.continuous_density is not None:
        t, w = _log_nodes(spec)
        # renormalise so the rule integrates W exactly
        target = 1.0 - spec.point_weight
        w = w * (target / np.sum(w))
        nodes += list(zip(t, w))
    for t, w in nodes:
        acc += w * np.asarray(b(model.mu + z / math.sqrt(t)), dtype=float)
    return Expectation(float(np.mean(acc)), float(np.std(acc, ddof=1) / math.sqrt(acc.size)))


def quadform_logdensity(a, sigma1, shape, family) -> float:
    """Log density of ``A = X_(1) X_(1)'`` when ``x ~ TE(0, Sigma_1 (x) I (x) ... (x) I, g)``.

    ``log f(A) = (m p_1/2) log pi - log Gamma_{p_1}(m/2) - (m/2) log|Sigma_1|
    + ((m - p_1 - 1)/2) log|A| + log g(tr Sigma_1^{-1} A)`` with ``m = p*/p_1``.
    At ``p_1 = 1`` this is the law of ``sigma R^2``; for the normal generator
    it is the Wishart ``W_{p_1}(m, Sigma_1)`` density.
    """
    shape = as_shape(shape)
    p1 = shape.dims[0]
    m = shape.pstar // p1
    if m < p1:
        raise DomainError(f"A is singular: p*/p_1 = {m} < p_1 = {p1}")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    s1 = SeparableCovariance([sigma1])
    if a.shape != (p1, p1):
        raise DomainError(f"A must be {p1}x{p1}")
    if not np.allclose(a, a.T, rtol=1e-12, atol=0):
        raise DomainError("A must be symmetric")
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise DomainError("A is not positive definite") from None
    logdet_a = 2 * float(np.sum(np.log(np.diag(chol))))
    trace = float(np.trace(s1.factor_inverse(1) @ a))
    return (
        0.5 * m * p1 * math.log(math.pi)
        - special.multigammaln(0.5 * m, p1)
        - 0.5 * m * s1.log_det()
        + 0.5 * (m - p1 - 1) * logdet_a
        + float(log_g_eval(family, trace, shape.pstar))
    )


def quadform_density(a, sigma1, shape, family) -> float:
    return math.exp(quadform_logdensity(a, sigma1, shape, family))
