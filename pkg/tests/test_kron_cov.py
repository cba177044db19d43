import math

import numpy as np
import pytest

from tensor_elliptical import kron_cov, oracles
from tensor_elliptical.errors import DomainError
from tensor_elliptical.kron_cov import SeparableCovariance, normalize

from conftest import random_spd


def _factors(rng, dims):
    return [random_spd(rng, p) for p in dims]


class TestConstruction:
    def test_rejects_asymmetric(self):
        with pytest.raises(DomainError):
            SeparableCovariance([np.array([[1.0, 0.5], [0.0, 1.0]])])

    def test_rejects_indefinite(self):
        with pytest.raises(DomainError):
            SeparableCovariance([np.diag([1.0, -1.0])])

    def test_shape_from_factors(self):
        cov = SeparableCovariance([np.eye(2), np.eye(3)])
        assert cov.shape.dims == (2, 3)
        assert cov.pstar == 6


class TestLogDet:
    def test_identity(self):
        assert kron_cov.log_det(SeparableCovariance([np.eye(2), np.eye(3)])) == 0.0

    def test_hand_example(self):
        cov = SeparableCovariance([np.array([[2.0]]), np.diag([3.0, 3.0])])
        assert math.isclose(kron_cov.log_det(cov), math.log(36), rel_tol=1e-14)

    def test_random_vs_dense(self, rng):
        f = _factors(rng, (2, 3, 2))
        ref = oracles.dense_logdet(oracles.dense_kron(f))
        assert abs(kron_cov.log_det(SeparableCovariance(f)) - ref) < 1e-10 * abs(ref)


class TestQuadForm:
    def test_at_mean(self, rng):
        cov = SeparableCovariance(_factors(rng, (2, 3)))
        mu = rng.standard_normal(6)
        assert kron_cov.quad_form(mu, mu, cov) == 0.0

    def test_identity_unit_vector(self):
        cov = SeparableCovariance([np.eye(2), np.eye(2)])
        e = np.zeros(4)
        e[0] = 1
        assert kron_cov.quad_form(e, np.zeros(4), cov) == pytest.approx(1.0, rel=1e-15)

    def test_random_vs_dense(self, rng):
        f = _factors(rng, (2, 3, 2))
        x, mu = rng.standard_normal(12), rng.standard_normal(12)
        ref = oracles.dense_quadform(x, mu, oracles.dense_kron(f))
        assert float(kron_cov.quad_form(x, mu, SeparableCovariance(f))) == pytest.approx(ref, rel=1e-10)

    def test_batched(self, rng):
        cov = SeparableCovariance(_factors(rng, (2, 2)))
        x = rng.standard_normal((7, 4))
        q = cov.quad_form(x)
        dense = oracles.dense_kron(cov.factors)
        np.testing.assert_allclose(q, [oracles.dense_quadform(r, np.zeros(4), dense) for r in x], rtol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            kron_cov.quad_form(np.zeros(3), np.zeros(4), SeparableCovariance([np.eye(2), np.eye(2)]))


class TestApply:
    def test_sqrt_identity(self, rng):
        u = rng.standard_normal(6)
        np.testing.assert_array_equal(
            kron_cov.sqrt_apply(SeparableCovariance([np.eye(2), np.eye(3)]), u), u)

    def test_sqrt_scalar(self):
        out = kron_cov.sqrt_apply(SeparableCovariance([np.array([[4.0]])]), np.array([3.0]))
        np.testing.assert_allclose(out, [6.0], rtol=1e-15)

    def test_sqrt_twice_is_sigma(self, rng):
        cov = SeparableCovariance(_factors(rng, (2, 3)))
        u = rng.standard_normal(6)
        twice = kron_cov.sqrt_apply(cov, kron_cov.sqrt_apply(cov, u))
        np.testing.assert_allclose(twice, oracles.dense_kron(cov.factors) @ u, rtol=1e-10)

    def test_inverse(self, rng):
        v = rng.standard_normal(6)
        np.testing.assert_array_equal(
            kron_cov.inverse_apply(SeparableCovariance([np.eye(2), np.eye(3)]), v), v)
        np.testing.assert_allclose(
            kron_cov.inverse_apply(SeparableCovariance([np.array([[4.0]])]), np.array([1.0])), [0.25])
        cov = SeparableCovariance(_factors(rng, (2, 3)))
        np.testing.assert_allclose(kron_cov.inverse_apply(cov, v),
                                   np.linalg.solve(oracles.dense_kron(cov.factors), v), rtol=1e-10)


class TestNormalize:
    def test_already_normalized(self):
        f = [np.diag([2.0, 3.0]), np.array([[2.0, 0.3], [0.3, 1.0]])]
        out = normalize(SeparableCovariance(f))
        for a, b in zip(out.factors, f):
            np.testing.assert_allclose(a, b, rtol=1e-15)

    def test_scale_moves_to_first(self):
        out = normalize(SeparableCovariance([np.eye(2), 4 * np.eye(2)]))
        np.testing.assert_allclose(out.factors[1], np.eye(2))
        np.testing.assert_allclose(out.factors[0], 4 * np.eye(2))

    def test_dense_unchanged(self, rng):
        cov = SeparableCovariance(_factors(rng, (2, 3, 2)))
        out = normalize(cov)
        for f in out.factors[1:]:
            assert f[-1, -1] == pytest.approx(1.0, rel=1e-15)
        np.testing.assert_allclose(oracles.dense_kron(out.factors), oracles.dense_kron(cov.factors),
                                   rtol=1e-12)
