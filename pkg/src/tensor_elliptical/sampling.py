"""Samplers for tensor elliptical models and affine maps between models.

Two independent routes produce draws:

* :func:`sample_te` uses the stochastic representation
  ``x = mu + R Sigma^{1/2} u`` with ``u`` uniform on the sphere.
* :func:`sample_mixture` draws a precision scale ``t`` from the weighting
  function and then ``x ~ N(mu, Sigma / t)``.

Samples are returned as ``(n, p*)`` arrays whose rows are vec-order tensors.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .generators import GeneratorFamily, parse_family, sample_weighting, weighting
from .kron_cov import SeparableCovariance
from .tensor_core import TensorShape, as_shape, mode_multiply

__all__ = [
    "RngStream",
    "TEModel",
    "sphere_sample",
    "radial_sample",
    "sample_te",
    "sample_mixture",
    "affine_transform",
]


class RngStream:
    """Deterministic random stream built on numpy's PCG64.

    Parameters
    ----------
    seed : int
        Unsigned 64-bit seed.

    Substreams derived with :meth:`substream` are statistically independent
    of the parent and of each other, and depend only on the seed and label.
    """

    def __init__(self, seed: int, _spawn_key: tuple = ()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self._key = tuple(_spawn_key)
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=self._key))
        )

    def substream(self, label: str) -> "RngStream":
        return RngStream(self.seed, self._key + (zlib.crc32(str(label).encode()),))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self._key})"


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(rng).generator


@dataclass(frozen=True)
class TEModel:
    """Location, separable covariance and generator family of a TE law."""

    shape: TensorShape
    mu: np.ndarray
    cov: SeparableCovariance
    family: GeneratorFamily

    def __init__(self, shape, mu, cov, family):
        shape = as_shape(shape)
        if not isinstance(cov, SeparableCovariance):
            cov = SeparableCovariance(cov)
        if cov.shape != shape:
            raise DomainError(f"covariance shape {cov.shape.dims} != model shape {shape.dims}")
        mu = np.array(mu, dtype=float).reshape(-1)
        if mu.size != shape.pstar:
            raise DomainError(f"mu has length {mu.size}, expected {shape.pstar}")
        if not np.all(np.isfinite(mu)):
            raise DomainError("mu must be finite")
        family = parse_family(family)
        family.check_dimension(shape.pstar)
        mu.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "family", family)

    @classmethod
    def standard(cls, shape, family="normal") -> "TEModel":
        shape = as_shape(shape)
        return cls(shape, np.zeros(shape.pstar), [np.eye(p) for p in shape.dims], family)

    @property
    def pstar(self) -> int:
        return self.shape.pstar


def sphere_sample(pstar: int, rng, size: int | None = None) -> np.ndarray:
    """Uniform draw(s) on the unit sphere in ``R^{p*}`` via normalised Gaussians."""
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    z = gen.standard_normal((n, pstar))
    norms = np.linalg.norm(z, axis=1)
    bad = norms == 0
    while np.any(bad):
        z[bad] = gen.standard_normal((int(bad.sum()), pstar))
        norms[bad] = np.linalg.norm(z[bad], axis=1)
        bad = norms == 0
    u = z / norms[:, None]
    return u[0] if size is None else u


def radial_sample(family: GeneratorFamily, pstar: int, rng, size: int | None = None):
    """Draw(s) of the generating radius ``R``."""
    family.check_dimension(pstar)
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    r = np.asarray(family.sample_radial(gen, pstar, n), dtype=float)
    return float(r[0]) if size is None else r


def _check_n(n):
    n = int(n)
    if n < 1:
        raise DomainError(f"sample size must be at least 1, got {n}")
    return n


def sample_te(model: TEModel, n: int, rng) -> np.ndarray:
    """``n`` draws ``mu + R Sigma^{1/2} u`` with independent ``R`` and ``u``."""
    n = _check_n(n)
    gen = as_generator(rng)
    r = radial_sample(model.family, model.pstar, gen, n)
    u = sphere_sample(model.pstar, gen, n)
    return model.mu + r[:, None] * model.cov.sqrt_apply(u)


def sample_mixture(model: TEModel, n: int, rng, return_scales: bool = False):
    """``n`` two-stage draws: ``t ~ W`` then ``x ~ N(mu, Sigma / t)``.

    Raises
    ------
    NotAScaleMixtureError
        When the weighting function takes negative values.
    """
    n = _check_n(n)
    gen = as_generator(rng)
    spec = weighting(model.family, model.pstar)
    t = sample_weighting(spec, gen, n)
    z = gen.standard_normal((n, model.pstar))
    x = model.mu + model.cov.sqrt_apply(z) / np.sqrt(t)[:, None]
    return (x, t) if return_scales else x


def affine_transform(model: TEModel, a_factors, b=None) -> TEModel:
    """Law of ``A x + b`` for ``A = A_1 (x) ... (x) A_k``.

    Each ``A_r`` must be square and nonsingular, so the covariance
    ``A Sigma A'`` keeps its Kronecker structure with factors ``A_r Sigma_r A_r'``.
    """
    k = model.shape.order
    if isinstance(a_factors, np.ndarray) and a_factors.ndim == 2:
        if k > 1:
            raise DomainError("a dense transformation is not Kronecker structured; pass factors")
        a_factors = [a_factors]
    mats = [np.atleast_2d(np.asarray(a, dtype=float)) for a in a_factors]
    if len(mats) != k:
        raise DomainError(f"expected {k} factor matrices, got {len(mats)}")
    for r, (a, p) in enumerate(zip(mats, model.shape.dims), start=1):
        if a.shape != (p, p):
            raise DomainError(f"factor {r} must be {p}x{p}, got {a.shape}")
        s = np.linalg.svd(a, compute_uv=False)
        if not s[-1] > 1e-12 * s[0]:
            raise DomainError(f"factor {r} is singular")
    new_factors = []
    for a, sig in zip(mats, model.cov.factors):
        m = a @ sig @ a.T
        new_factors.append(0.5 * (m + m.T))
    mu = mode_multiply(model.mu, mats, model.shape)
    if b is not None:
        b = np.asarray(b, dtype=float).reshape(-1)
        if b.size != model.pstar:
            raise DomainError(f"b has length {b.size}, expected {model.pstar}")
        mu = mu + b
    return TEModel(model.shape, mu, new_factors, model.family)
