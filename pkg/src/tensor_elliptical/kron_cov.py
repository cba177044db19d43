"""Separable covariance ``Sigma = Sigma_1 (x) ... (x) Sigma_k``.

Everything is computed factor by factor from per-factor eigendecompositions;
the ``p* x p*`` matrix is never formed here.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DomainError
from .tensor_core import TensorShape, as_shape, mode_multiply

__all__ = [
    "SeparableCovariance",
    "log_det",
    "quad_form",
    "sqrt_apply",
    "inverse_apply",
    "normalize",
]

SYMMETRY_RTOL = 1e-12
PD_RTOL = 1e-10


class SeparableCovariance:
    """Kronecker product of symmetric positive-definite factors.

    Parameters
    ----------
    factors : sequence of ndarray
        Factor ``r`` is ``p_r x p_r``.
    shape : TensorShape, optional
        Inferred from the factor sizes when omitted.

    Raises
    ------
    DomainError
        If a factor is not square, not symmetric to relative ``1e-12``, has
        the wrong size, or has ``min eig <= 1e-10 * max eig``.
    """

    def __init__(self, factors: Sequence, shape=None):
        mats = []
        for r, f in enumerate(factors, start=1):
            f = np.atleast_2d(np.asarray(f, dtype=float))
            if f.ndim != 2 or f.shape[0] != f.shape[1]:
                raise DomainError(f"factor {r} must be square, got shape {f.shape}")
            if not np.all(np.isfinite(f)):
                raise DomainError(f"factor {r} has non-finite entries")
            scale = max(np.max(np.abs(f)), np.finfo(float).tiny)
            if np.max(np.abs(f - f.T)) > SYMMETRY_RTOL * scale:
                raise DomainError(f"factor {r} is not symmetric")
            mats.append(0.5 * (f + f.T))
        if not mats:
            raise DomainError("at least one factor is required")
        inferred = TensorShape(tuple(m.shape[0] for m in mats))
        if shape is not None:
            shape = as_shape(shape)
            if shape != inferred:
                raise DomainError(
                    f"factor sizes {inferred.dims} do not match shape {shape.dims}"
                )
        self.shape = inferred
        self.factors = tuple(mats)
        for m in self.factors:
            m.setflags(write=False)

        self._evals = []
        self._evecs = []
        for r, m in enumerate(self.factors, start=1):
            w, v = np.linalg.eigh(m)
            if not (w[0] > PD_RTOL * w[-1] and w[-1] > 0):
                raise DomainError(
                    f"factor {r} is not positive definite (eigenvalues {w[0]:.3g}..{w[-1]:.3g})"
                )
            self._evals.append(w)
            self._evecs.append(v)
        self._sqrt = [v * np.sqrt(w) @ v.T for w, v in zip(self._evals, self._evecs)]
        self._inv_sqrt = [v / np.sqrt(w) @ v.T for w, v in zip(self._evals, self._evecs)]
        self._inv = [v / w @ v.T for w, v in zip(self._evals, self._evecs)]

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def pstar(self) -> int:
        return self.shape.pstar

    def factor_eigenvalues(self, r: int) -> np.ndarray:
        return self._evals[r - 1].copy()

    def factor_sqrt(self, r: int) -> np.ndarray:
        return self._sqrt[r - 1]

    def factor_inverse(self, r: int) -> np.ndarray:
        return self._inv[r - 1]

    def log_det(self) -> float:
        p = self.pstar
        return float(sum(p / w.size * np.sum(np.log(w)) for w in self._evals))

    def apply(self, v) -> np.ndarray:
        """``Sigma @ v`` for vec-order rows ``v``."""
        return mode_multiply(self._check_vec(v), self.factors, self.shape)

    def sqrt_apply(self, u) -> np.ndarray:
        return mode_multiply(self._check_vec(u), self._sqrt, self.shape)

    def inverse_apply(self, v) -> np.ndarray:
        return mode_multiply(self._check_vec(v), self._inv, self.shape)

    def whiten(self, v) -> np.ndarray:
        """``Sigma^{-1/2} @ v`` with the symmetric root."""
        return mode_multiply(self._check_vec(v), self._inv_sqrt, self.shape)

    def quad_form(self, x, mu=None) -> np.ndarray | float:
        """``(x - mu)' Sigma^{-1} (x - mu)`` for one row or a batch of rows."""
        x = self._check_vec(x)
        if mu is not None:
            x = x - self._check_vec(mu)
        z = self.whiten(x)
        q = np.sum(z * z, axis=-1)
        return float(q) if np.ndim(q) == 0 else q

    def scaled(self, c: float) -> "SeparableCovariance":
        """Covariance ``c * Sigma`` with the scalar absorbed into factor 1."""
        if not c > 0:
            raise DomainError(f"scale must be positive, got {c}")
        return SeparableCovariance([self.factors[0] * c, *self.factors[1:]])

    def with_factor(self, r: int, factor) -> "SeparableCovariance":
        mats = list(self.factors)
        mats[r - 1] = factor
        return SeparableCovariance(mats)

    def _check_vec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1:] != (self.pstar,):
            raise DomainError(f"expected trailing length {self.pstar}, got shape {v.shape}")
        return v

    def __repr__(self):
        return f"SeparableCovariance(shape={self.shape.dims})"


def log_det(cov: SeparableCovariance) -> float:
    """``log |Sigma| = sum_r (p*/p_r) log |Sigma_r|``."""
    return cov.log_det()


def quad_form(x, mu, cov: SeparableCovariance):
    """Mahalanobis form ``(x - mu)' Sigma^{-1} (x - mu)`` via mode-wise whitening."""
    return cov.quad_form(x, mu)


def sqrt_apply(cov: SeparableCovariance, u) -> np.ndarray:
    """``Sigma^{1/2} u`` where each factor uses its symmetric square root."""
    return cov.sqrt_apply(u)


def inverse_apply(cov: SeparableCovariance, v) -> np.ndarray:
    return cov.inverse_apply(v)


def normalize(cov: SeparableCovariance) -> SeparableCovariance:
    """Rescale factors 2..k to have last diagonal entry 1, moving the scale into factor 1.

    The Kronecker product is unchanged.
    """
    mats = [np.array(f) for f in cov.factors]
    total = 1.0
    for r in range(1, len(mats)):
        c = mats[r][-1, -1]
        if not c > 0:
            raise DomainError(f"factor {r + 1} has non-positive last diagonal entry {c}")
        mats[r] = mats[r] / c
        mats[r][-1, -1] = 1.0
        total *= c
    mats[0] = mats[0] * total
    return SeparableCovariance(mats)
