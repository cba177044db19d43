"""Catalog of tensor elliptical families.

Each family bundles a density generator ``g`` (normalised for dimension
``p*``), its weighting function ``W`` over Gaussian precision scales, a
sampler for the generating radius, and the maximiser ``y_g`` of
``y^{d/2} g(y)``.

Conventions
-----------
* ``g`` includes its normalising constant, so ``|Sigma|^{-1/2} g(q)`` is a
  density on ``R^{p*}``.
* ``W`` mixes ``N(mu, Sigma / t)``: ``f(x) = int W(t) f_N(x; mu, Sigma/t) dt``.
"""

from __future__ import annotations

import math
import shlex
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, NotAScaleMixtureError
from .quadrature import QuadratureConfig, integrate_halfline, integrate_oscillatory

__all__ = [
    "WeightingSpec",
    "GeneratorFamily",
    "Normal",
    "EpsContaminated",
    "StudentT",
    "Cauchy",
    "Quartic",
    "Custom",
    "g_eval",
    "log_g_eval",
    "weighting",
    "radial_pdf",
    "radial_cdf",
    "psi_eval",
    "psi_via_radial",
    "sphere_cf",
    "y_g_solve",
    "parse_family",
]

LOG_2PI = math.log(2 * math.pi)


@dataclass(frozen=True)
class WeightingSpec:
    """Weighting function as point masses plus an optional continuous part.

    Attributes
    ----------
    point_masses : tuple of (t, weight)
    continuous_density : callable or None
        ``W(t)`` on ``(0, inf)``; vectorised over numpy arrays.
    signed : bool
        True when ``W`` takes negative values.
    half_period : float or None
        Spacing of the sign changes of a signed ``W``.
    sampler : callable or None
        ``sampler(generator, size)`` drawing from the normalised continuous part.
    scale : float
        Where the continuous part carries its mass; used to split integrals.
    """

    point_masses: tuple = ()
    continuous_density: Callable | None = None
    signed: bool = False
    half_period: float | None = None
    sampler: Callable | None = field(default=None, compare=False)
    scale: float = 1.0

    def __post_init__(self):
        for t, _ in self.point_masses:
            if not t > 0:
                raise DomainError(f"point-mass locations must be positive, got {t}")
        if self.signed and self.half_period is None:
            raise DomainError("a signed weighting needs its half period")

    @property
    def point_weight(self) -> float:
        return float(sum(w for _, w in self.point_masses))

    def integrate(self, h, config: QuadratureConfig | None = None, splits=()):
        """``sum_j w_j h(t_j) + int W(t) h(t) dt`` for a positive function ``h``."""
        config = config or QuadratureConfig()
        total = sum(w * h(t) for t, w in self.point_masses)
        err = 0.0
        if self.continuous_density is not None:
            W = self.continuous_density

            def integrand(t):
                return W(t) * h(t) if t > 0 else 0.0

            if self.signed or config.method == "oscillatory":
                if self.half_period is None:
                    raise DomainError("oscillatory quadrature needs a half period")
                v, err = integrate_oscillatory(integrand, self.half_period, config)
            else:
                v, err = integrate_halfline(integrand, config, splits=(self.scale, *splits))
            total += v
        return float(total), float(err)

    def total_mass(self, config: QuadratureConfig | None = None) -> float:
        return self.integrate(lambda t: 1.0, config)[0]


class GeneratorFamily:
    """Base class for a density-generator family.

    Subclasses implement :meth:`log_g`; the remaining hooks are optional.
    """

    name = "family"

    def check_dimension(self, pstar: int) -> None:
        if int(pstar) < 1:
            raise DomainError(f"dimension must be positive, got {pstar}")

    def log_g(self, y, pstar):
        raise NotImplementedError

    def dlog_g(self, y, pstar):
        """Derivative of ``log g``; ``None`` means use finite differences."""
        return None

    def weighting(self, pstar) -> WeightingSpec:
        raise DomainError(f"no weighting available for family {self.name!r}")

    def sample_radial(self, gen: np.random.Generator, pstar: int, size: int) -> np.ndarray:
        """Default: mixture construction ``R = sqrt(chi2_p / t)`` with ``t ~ W``."""
        t = sample_weighting(self.weighting(pstar), gen, size)
        q = gen.chisquare(pstar, size)
        return np.sqrt(q / t)

    def y_g_closed_form(self, d: int):
        return None

    def psi(self, x, pstar, config: QuadratureConfig | None = None) -> float:
        spec = self.weighting(pstar)
        x = float(x)
        if x == 0.0:
            return 1.0
        val, _ = spec.integrate(lambda t: math.exp(-x / (2 * t)), config, splits=(x / 2,))
        return val

    def to_spec(self) -> str:
        return self.name


def sample_weighting(spec: WeightingSpec, gen: np.random.Generator, size: int) -> np.ndarray:
    """Draw precision scales ``t`` from a nonnegative weighting function."""
    if spec.signed:
        raise NotAScaleMixtureError(
            "weighting function takes negative values: not a scale mixture of multilinear normals"
        )
    locs = [t for t, _ in spec.point_masses]
    probs = [w for _, w in spec.point_masses]
    rest = 1.0 - sum(probs)
    if spec.continuous_density is not None:
        if spec.sampler is None:
            raise DomainError("continuous weighting has no sampler")
        probs = probs + [max(rest, 0.0)]
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    cat = gen.choice(probs.size, size=size, p=probs) if probs.size > 1 else np.zeros(size, int)
    out = np.empty(size)
    for j, t in enumerate(locs):
        out[cat == j] = t
    if spec.continuous_density is not None:
        mask = cat == len(locs)
        out[mask] = spec.sampler(gen, int(mask.sum()))
    return out


@dataclass(frozen=True)
class Normal(GeneratorFamily):
    """Multilinear normal: ``g(y) = (2 pi)^{-p/2} exp(-y/2)``."""

    name = "normal"

    def log_g(self, y, pstar):
        return -0.5 * pstar * LOG_2PI - 0.5 * np.asarray(y, dtype=float)

    def dlog_g(self, y, pstar):
        return np.full_like(np.asarray(y, dtype=float), -0.5)

    def weighting(self, pstar):
        return WeightingSpec(point_masses=((1.0, 1.0),))

    def sample_radial(self, gen, pstar, size):
        return np.sqrt(gen.chisquare(pstar, size))

    def y_g_closed_form(self, d):
        return float(d)

    def psi(self, x, pstar, config=None):
        return math.exp(-0.5 * float(x))


@dataclass(frozen=True)
class EpsContaminated(GeneratorFamily):
    """Two-component normal mixture with contaminant covariance ``sigma^2 Sigma``.

    The contaminant sits at precision scale ``t = sigma^{-2}`` in the
    weighting function.
    """

    epsilon: float
    sigma: float
    name = "eps_contaminated"

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    def _parts(self, y, pstar):
        y = np.asarray(y, dtype=float)
        a = math.log1p(-self.epsilon) - 0.5 * y
        b = math.log(self.epsilon) - pstar * math.log(self.sigma) - 0.5 * y / self.sigma**2
        return a, b

    def log_g(self, y, pstar):
        a, b = self._parts(y, pstar)
        return -0.5 * pstar * LOG_2PI + np.logaddexp(a, b)

    def dlog_g(self, y, pstar):
        a, b = self._parts(y, pstar)
        wa = special.expit(a - b)
        return -0.5 * wa - 0.5 * (1 - wa) / self.sigma**2

    def weighting(self, pstar):
        return WeightingSpec(
            point_masses=((1.0, 1.0 - self.epsilon), (self.sigma**-2, self.epsilon))
        )

    def psi(self, x, pstar, config=None):
        x = float(x)
        return (1 - self.epsilon) * math.exp(-0.5 * x) + self.epsilon * math.exp(
            -0.5 * x * self.sigma**2
        )

    def to_spec(self):
        return f"{self.name} epsilon={self.epsilon!r} sigma={self.sigma!r}"


@dataclass(frozen=True)
class StudentT(GeneratorFamily):
    """Tensor t: Gaussian scale mixture with ``t ~ Gamma(nu/2, rate nu/2)``.

    ``g(y) = Gamma((p+nu)/2) / (Gamma(nu/2) (nu pi)^{p/2}) (1 + y/nu)^{-(p+nu)/2}``.
    """

    nu: float
    name = "student_t"

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"nu must be positive, got {self.nu}")

    def log_g(self, y, pstar):
        nu = self.nu
        y = np.asarray(y, dtype=float)
        const = (
            special.gammaln(0.5 * (pstar + nu))
            - special.gammaln(0.5 * nu)
            - 0.5 * pstar * math.log(nu * math.pi)
        )
        return const - 0.5 * (pstar + nu) * np.log1p(y / nu)

    def dlog_g(self, y, pstar):
        y = np.asarray(y, dtype=float)
        return -0.5 * (pstar + self.nu) / (self.nu + y)

    def weighting(self, pstar):
        nu = self.nu
        half = 0.5 * nu
        log_c = -special.gammaln(half)

        def W(t):
            t = np.asarray(t, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.exp(half * np.log(half * t) - half * t - np.log(t) + log_c)
            return np.where(t > 0, out, 0.0)

        def sampler(gen, size):
            return gen.gamma(half, 1.0 / half, size)

        return WeightingSpec(continuous_density=W, sampler=sampler, scale=1.0)

    def sample_radial(self, gen, pstar, size):
        t = gen.gamma(0.5 * self.nu, 2.0 / self.nu, size)
        return np.sqrt(gen.chisquare(pstar, size) / t)

    def y_g_closed_form(self, d):
        return float(d)

    def to_spec(self):
        if self.nu == 1:
            return "cauchy"
        return f"{self.name} nu={self.nu!r}"


def Cauchy() -> StudentT:
    """Tensor Cauchy, the ``nu = 1`` member of :class:`StudentT`."""
    return StudentT(1.0)


@dataclass(frozen=True)
class Quartic(GeneratorFamily):
    """Scalar law ``f(x) = sqrt(2) / (pi sigma) (1 + (x/sigma)^4)^{-1}``.

    Only defined for ``p* = 1``.  Its weighting function
    ``W(t) = sigma sin(sigma^2 t / 2) / sqrt(pi t)`` changes sign, so it is
    not a scale mixture of normals.
    """

    sigma: float = 1.0
    name = "quartic"

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    def check_dimension(self, pstar):
        if int(pstar) != 1:
            raise DomainError(f"quartic family requires p* = 1, got {pstar}")

    def log_g(self, y, pstar):
        self.check_dimension(pstar)
        y = np.asarray(y, dtype=float)
        s = self.sigma
        return math.log(math.sqrt(2) / (math.pi * s)) - np.log1p((y / s**2) ** 2)

    def dlog_g(self, y, pstar):
        y = np.asarray(y, dtype=float)
        s2 = self.sigma**2
        return -2 * y / s2**2 / (1 + (y / s2) ** 2)

    def weighting(self, pstar):
        self.check_dimension(pstar)
        s = self.sigma

        def W(t):
            t = np.asarray(t, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = s * np.sin(0.5 * s * s * t) / np.sqrt(math.pi * t)
            return np.where(t > 0, out, 0.0)

        return WeightingSpec(
            continuous_density=W, signed=True, half_period=2 * math.pi / s**2, scale=1.0 / s**2
        )

    def cdf_abs(self, r):
        """CDF of ``|X|``, from the closed-form antiderivative of ``1/(1+u^4)``."""
        u = np.asarray(r, dtype=float) / self.sigma
        r2 = math.sqrt(2)
        anti = (
            np.log((u * u + r2 * u + 1) / (u * u - r2 * u + 1))
            + 2 * np.arctan(r2 * u + 1)
            + 2 * np.arctan(r2 * u - 1)
        ) / (4 * r2)
        return 2 * r2 / math.pi * anti

    def sample_radial(self, gen, pstar, size):
        self.check_dimension(pstar)
        v = gen.random(size)
        # tail: 1 - F(u) ~ 2 sqrt(2) / (3 pi u^3)
        hi = self.sigma * (2 * (2 * math.sqrt(2) / (3 * math.pi * np.maximum(1 - v, 1e-300))) ** (1 / 3) + 2)
        lo = np.zeros(size)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self.cdf_abs(mid) < v
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-15 * np.maximum(hi, 1e-300)):
                break
        return 0.5 * (lo + hi)

    def y_g_closed_form(self, d):
        if d != 1:
            return None
        return self.sigma**2 / math.sqrt(3)

    def to_spec(self):
        return f"{self.name} sigma={self.sigma!r}"


@dataclass(frozen=True)
class Custom(GeneratorFamily):
    """User-supplied family.

    Parameters
    ----------
    g : callable
        Density generator for the model's own dimension; the ``pstar``
        argument of the evaluation functions is ignored.
    radial_sampler : callable, optional
        ``radial_sampler(generator, size)`` returning draws of the radius.
    weighting_spec : WeightingSpec, optional

    Callables must be safe to call from several threads.
    """

    g: Callable
    radial_sampler: Callable | None = None
    weighting_spec: WeightingSpec | None = None
    name: str = "custom"

    def log_g(self, y, pstar):
        y = np.asarray(y, dtype=float)
        vals = np.vectorize(self.g, otypes=[float])(y)
        with np.errstate(divide="ignore"):
            return np.log(vals)

    def weighting(self, pstar):
        if self.weighting_spec is None:
            raise DomainError("no weighting available for this custom family")
        return self.weighting_spec

    def sample_radial(self, gen, pstar, size):
        if self.radial_sampler is None:
            raise DomainError("custom family has no radial sampler")
        return np.asarray(self.radial_sampler(gen, size), dtype=float).reshape(size)

    def psi(self, x, pstar, config=None):
        if self.weighting_spec is not None:
            return super().psi(x, pstar, config)
        return psi_via_radial(self, x, pstar, config)


# -- module-level operations -------------------------------------------------


def log_g_eval(family: GeneratorFamily, y, pstar: int):
    family.check_dimension(pstar)
    if np.any(np.asarray(y) < 0):
        raise DomainError("generator argument must be nonnegative")
    out = family.log_g(y, pstar)
    return float(out) if np.ndim(out) == 0 else out


def g_eval(family: GeneratorFamily, y, pstar: int):
    """Density generator ``g(y)`` including its normalising constant."""
    out = np.exp(log_g_eval(family, y, pstar))
    return float(out) if np.ndim(out) == 0 else out


def weighting(family: GeneratorFamily, pstar: int) -> WeightingSpec:
    family.check_dimension(pstar)
    return family.weighting(pstar)


def _log_sphere_area(pstar):
    # log of 2 pi^{p/2} / Gamma(p/2)
    return math.log(2) + 0.5 * pstar * math.log(math.pi) - special.gammaln(0.5 * pstar)


def radial_pdf(family: GeneratorFamily, r, pstar: int):
    """Density of the generating radius, ``2 pi^{p/2}/Gamma(p/2) r^{p-1} g(r^2)``."""
    family.check_dimension(pstar)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.log(r)
        power = np.where(r > 0, (pstar - 1) * log_r, 0.0 if pstar == 1 else -np.inf)
    out = np.exp(_log_sphere_area(pstar) + power + family.log_g(r * r, pstar))
    return float(out) if out.ndim == 0 else out


def radial_cdf(family: GeneratorFamily, r, pstar: int, nodes: int = 20):
    """CDF of the radius by Gauss-Legendre integration of :func:`radial_pdf`.

    Consecutive sorted abscissae (merged with a geometric grid) are integrated
    panel by panel and accumulated, so large batches are cheap.
    """
    r = np.asarray(r, dtype=float)
    flat = r.reshape(-1)
    rmax = float(np.max(flat)) if flat.size else 0.0
    grid = np.concatenate([np.linspace(0, min(rmax, 1.0), 41)])
    if rmax > 1:
        grid = np.concatenate([grid, np.geomspace(1.0, rmax, int(math.log(rmax) / math.log(1.02)) + 2)])
    knots = np.unique(np.concatenate([[0.0], grid, flat]))
    x, w = np.polynomial.legendre.leggauss(nodes)
    a, b = knots[:-1], knots[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = radial_pdf(family, pts.reshape(-1), pstar).reshape(pts.shape)
    pieces = half * (vals @ w)
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    out = cum[np.searchsorted(knots, flat)]
    out = np.minimum(out, 1.0).reshape(r.shape)
    return float(out) if out.ndim == 0 else out


SERIES_LIMIT = 30.0
RANGE_LIMIT = 1e6


def sphere_cf(pstar: int, x) -> float:
    """Characteristic generator ``Omega_p(x)`` of the uniform law on the unit sphere.

    Uses the power series ``sum_m (-x/4)^m / (m! (p/2)_m)`` for ``x <= 30``
    and the equivalent Bessel form ``Gamma(p/2) (2/sqrt x)^{p/2-1} J_{p/2-1}(sqrt x)``
    above, where the alternating series loses digits to cancellation.
    """
    pstar = int(pstar)
    if pstar < 1:
        raise DomainError("dimension must be positive")
    x = float(x)
    if x < 0:
        raise DomainError("sphere_cf argument must be nonnegative")
    if x > RANGE_LIMIT:
        raise OverflowError(f"sphere_cf argument {x} exceeds {RANGE_LIMIT}")
    if x <= SERIES_LIMIT:
        a = 0.5 * pstar
        term, total, m = 1.0, 1.0, 0
        while True:
            term *= -x / (4.0 * (m + 1) * (a + m))
            total += term
            m += 1
            if abs(term) < 1e-16 * max(abs(total), 1e-300) or m > 500:
                return total
    s = math.sqrt(x)
    nu = 0.5 * pstar - 1
    return float(
        math.exp(special.gammaln(0.5 * pstar) + nu * math.log(2 / s)) * special.jv(nu, s)
    )


def psi_eval(family: GeneratorFamily, x, pstar: int, quadrature: QuadratureConfig | None = None):
    """Characteristic generator ``psi(x)``.

    Closed forms for Normal and point-mass families, weighting-function
    quadrature for continuous mixtures (oscillatory for signed weights),
    and the sphere/radial route for custom families without a weighting.
    """
    family.check_dimension(pstar)
    if x < 0:
        raise DomainError("psi argument must be nonnegative")
    return float(family.psi(x, pstar, quadrature))


def psi_via_radial(family: GeneratorFamily, x, pstar: int, quadrature: QuadratureConfig | None = None):
    """``psi(x) = int Omega_p(x r^2) h_R(r) dr`` from the radial law."""
    x = float(x)
    if x == 0:
        return 1.0
    config = quadrature or QuadratureConfig(abs_tol=1e-12, rel_tol=1e-10)

    def integrand(r):
        z = x * r * r
        if z > RANGE_LIMIT:
            return 0.0
        return sphere_cf(pstar, z) * radial_pdf(family, r, pstar)

    # cut the oscillation of Omega into finite panels up to where h_R is negligible
    width = 2 * math.pi / math.sqrt(x)
    edges = [0.0]
    while edges[-1] < 200 and len(edges) < 4000:
        edges.append(edges[-1] + width)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, _ = integrate.quad(integrand, a, b, epsabs=config.abs_tol, epsrel=config.rel_tol,
                         limit=config.max_subdivisions)
        total += v
    return float(total)


def _objective(family, d):
    def f(u):
        y = math.exp(u)
        return 0.5 * d * u + float(family.log_g(y, d))

    return f


def _dobjective(family, d):
    def df(u):
        y = math.exp(u)
        dl = family.dlog_g(y, d)
        if dl is None:
            h = 1e-6 * max(y, 1e-8)
            dl = (float(family.log_g(y + h, d)) - float(family.log_g(y - h, d))) / (2 * h)
        return 0.5 * d + y * float(dl)

    return df


def y_g_solve(family: GeneratorFamily, total_dim: int, numeric: bool = False) -> float:
    """Maximiser ``y_g`` of ``y^{d/2} g(y)`` over ``(0, inf)`` with ``g`` in dimension ``d``.

    Closed forms are used where known unless ``numeric`` is set.  Otherwise
    a log-spaced scan over ``(1e-8, 1e3 d)`` locates the global peak, golden
    section narrows the bracket and a root of the derivative polishes it.
    """
    d = int(total_dim)
    if d < 1:
        raise DomainError("dimension must be positive")
    if not numeric:
        closed = family.y_g_closed_form(d)
        if closed is not None:
            return float(closed)
    f = _objective(family, d)
    lo, hi = math.log(1e-8), math.log(1e3 * d)
    us = np.linspace(lo, hi, 4001)
    vals = np.array([f(u) for u in us])
    if not np.any(np.isfinite(vals)):
        raise DomainError("objective is not finite anywhere on the search bracket")
    i = int(np.nanargmax(vals))
    if i == 0 or i == us.size - 1:
        raise DomainError("no interior maximum of y^{d/2} g(y) on the search bracket")
    a, b = us[i - 1], us[i + 1]
    df = _dobjective(family, d)
    if not df(a) > 0 > df(b):
        # derivative unusable on the grid bracket: narrow by golden section first
        a, b = _golden(f, a, b, 1e-7)
        if not df(a) > 0 > df(b):
            return math.exp(0.5 * (a + b))
    u = optimize.brentq(df, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return math.exp(u)


_INVPHI = (math.sqrt(5) - 1) / 2


def _golden(f, a, b, tol):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return a, b


_FAMILIES = {
    "normal": (Normal, ()),
    "eps_contaminated": (EpsContaminated, ("epsilon", "sigma")),
    "student_t": (StudentT, ("nu",)),
    "cauchy": (None, ()),
    "quartic": (Quartic, ("sigma",)),
}


def parse_family(text) -> GeneratorFamily:
    """Parse ``"student_t nu=5"`` style specifications (or a ``{name, params}`` dict)."""
    if isinstance(text, GeneratorFamily):
        return text
    if isinstance(text, dict):
        extra = set(text) - {"name", "params"}
        if extra:
            raise DomainError(f"unknown family fields {sorted(extra)}")
        name = text.get("name")
        params = dict(text.get("params") or {})
    else:
        tokens = shlex.split(str(text))
        if not tokens:
            raise DomainError("empty family specification")
        name, params = tokens[0], {}
        for tok in tokens[1:]:
            key, sep, val = tok.partition("=")
            if not sep:
                raise DomainError(f"expected key=value, got {tok!r}")
            params[key] = val
    if name not in _FAMILIES:
        raise DomainError(f"unknown family {name!r}; expected one of {sorted(_FAMILIES)}")
    cls, allowed = _FAMILIES[name]
    unknown = set(params) - set(allowed)
    if unknown:
        raise DomainError(f"unknown parameters {sorted(unknown)} for family {name!r}")
    try:
        values = {k: float(v) for k, v in params.items()}
    except (TypeError, ValueError) as exc:
        raise DomainError(f"non-numeric family parameter: {exc}") from None
    if name == "cauchy":
        return Cauchy()
    missing = [k for k in allowed if k not in values and not (cls is Quartic)]
    if missing:
        raise DomainError(f"missing parameters {missing} for family {name!r}")
    return cls(**values)
