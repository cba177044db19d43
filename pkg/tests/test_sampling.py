import math

import numpy as np
import pytest
from scipy import stats

from tensor_elliptical import oracles
from tensor_elliptical.density import logpdf
from tensor_elliptical.errors import DomainError, NotAScaleMixtureError
from tensor_elliptical.generators import Custom, EpsContaminated, Normal, Quartic, StudentT
from tensor_elliptical.sampling import (
    RngStream,
    TEModel,
    affine_transform,
    radial_sample,
    sample_mixture,
    sample_te,
    sphere_sample,
)

from conftest import random_spd


def _model(rng, family, dims=(2, 2)):
    p = int(np.prod(dims))
    return TEModel(dims, rng.standard_normal(p), [random_spd(rng, d) for d in dims], family)


class TestRngStream:
    def test_reproducible(self):
        a = RngStream(42).generator.standard_normal(5)
        b = RngStream(42).generator.standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_substreams_differ(self):
        root = RngStream(42)
        a = root.substream("a").generator.standard_normal(5)
        b = root.substream("b").generator.standard_normal(5)
        assert not np.array_equal(a, b)
        np.testing.assert_array_equal(a, RngStream(42).substream("a").generator.standard_normal(5))

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(DomainError):
            RngStream(seed)


class TestModel:
    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            TEModel((2, 2), np.zeros(4), [np.eye(2), np.eye(3)], Normal())

    def test_mu_length(self):
        with pytest.raises(DomainError):
            TEModel((2, 2), np.zeros(3), [np.eye(2), np.eye(2)], Normal())

    def test_quartic_dimension(self):
        with pytest.raises(DomainError):
            TEModel.standard((2,), Quartic())


class TestSphere:
    def test_unit_norm(self):
        u = sphere_sample(7, RngStream(1), 1000)
        np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-14)

    def test_one_dimensional_signs(self):
        u = sphere_sample(1, RngStream(2), 10000).ravel()
        assert set(np.unique(u)) == {-1.0, 1.0}
        counts = [np.sum(u > 0), np.sum(u < 0)]
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_archimedes(self):
        u = sphere_sample(3, RngStream(3), 10000)
        _, p = oracles.ks_one_sample(u[:, 0], stats.uniform(-1, 2).cdf)
        assert p > 1e-3


class TestRadialSample:
    def test_normal_chi2(self):
        r = radial_sample(Normal(), 2, RngStream(4), 20000)
        _, p = oracles.ks_one_sample(r**2, stats.chi2(2).cdf)
        assert p > 1e-3

    def test_student_t_f_ratio(self):
        r = radial_sample(StudentT(5), 3, RngStream(5), 20000)
        _, p = oracles.ks_one_sample(r**2 / 3, stats.f(3, 5).cdf)
        assert p > 1e-3

    @pytest.mark.parametrize("fam", [Normal(), StudentT(1), EpsContaminated(0.2, 2.0)])
    def test_nonnegative(self, fam):
        assert np.all(radial_sample(fam, 3, RngStream(6), 1000) >= 0)

    def test_quartic_inverse_cdf(self):
        r = radial_sample(Quartic(1.5), 1, RngStream(7), 20000)
        _, p = oracles.ks_one_sample(r, Quartic(1.5).cdf_abs)
        assert p > 1e-3


class TestSampleTE:
    def test_degenerate_radius(self, rng):
        fam = Custom(g=lambda y: 1.0, radial_sampler=lambda gen, size: np.zeros(size))
        model = TEModel((2, 2), rng.standard_normal(4), [np.eye(2), np.eye(2)], fam)
        x = sample_te(model, 10, RngStream(8))
        np.testing.assert_array_equal(x, np.tile(model.mu, (10, 1)))

    def test_covariance(self):
        model = TEModel.standard((2, 2), Normal())
        x = sample_te(model, 20000, RngStream(9))
        cov = np.cov(x.T)
        assert np.linalg.norm(cov - np.eye(4)) / 2 < 0.05

    def test_quad_form_chi2(self, rng):
        model = _model(rng, Normal(), (2, 3))
        x = sample_te(model, 20000, RngStream(10))
        _, p = oracles.ks_one_sample(model.cov.quad_form(x, model.mu), stats.chi2(6).cdf)
        assert p > 1e-3

    def test_deterministic(self, rng):
        model = _model(rng, StudentT(3))
        np.testing.assert_array_equal(sample_te(model, 50, RngStream(11)), sample_te(model, 50, RngStream(11)))

    def test_n_zero(self, rng):
        with pytest.raises(DomainError):
            sample_te(_model(rng, Normal()), 0, RngStream(1))


class TestSampleMixture:
    def test_normal_matches_representation(self, rng):
        model = _model(rng, Normal())
        a = sample_te(model, 20000, RngStream(12))
        b, t = sample_mixture(model, 20000, RngStream(13), return_scales=True)
        assert np.all(t == 1.0)
        _, p = oracles.ks_two_sample(model.cov.quad_form(a, model.mu), model.cov.quad_form(b, model.mu))
        assert p > 1e-3

    def test_student_t_matches_representation(self, rng):
        model = _model(rng, StudentT(5))
        a = sample_te(model, 20000, RngStream(14))
        b = sample_mixture(model, 20000, RngStream(15))
        _, p = oracles.ks_two_sample(model.cov.quad_form(a, model.mu), model.cov.quad_form(b, model.mu))
        assert p > 1e-3

    def test_eps_proportions(self, rng):
        model = _model(rng, EpsContaminated(0.2, 2.0))
        n = 20000
        _, t = sample_mixture(model, n, RngStream(16), return_scales=True)
        frac = np.mean(t == 0.25)
        assert set(np.unique(t)) == {0.25, 1.0}
        assert abs(frac - 0.2) < 4 * math.sqrt(0.2 * 0.8 / n)

    def test_quartic_refused(self):
        with pytest.raises(NotAScaleMixtureError, match="not a scale mixture"):
            sample_mixture(TEModel.standard((1,), Quartic()), 10, RngStream(17))


class TestAffine:
    def test_identity(self, rng):
        model = _model(rng, StudentT(5))
        out = affine_transform(model, [np.eye(2), np.eye(2)])
        np.testing.assert_array_equal(out.mu, model.mu)
        for a, b in zip(out.cov.factors, model.cov.factors):
            np.testing.assert_allclose(a, b, rtol=1e-15)

    def test_change_of_variables(self, rng):
        model = _model(rng, StudentT(5))
        mats = [rng.standard_normal((2, 2)) + 2 * np.eye(2) for _ in range(2)]
        b = rng.standard_normal(4)
        out = affine_transform(model, mats, b)
        a = oracles.dense_kron(mats)
        y = out.mu + rng.standard_normal((20, 4))
        x = np.linalg.solve(a, (y - b).T).T
        np.testing.assert_allclose(logpdf(out, y), logpdf(model, x) - np.linalg.slogdet(a)[1],
                                   rtol=1e-10)

    def test_singular_factor(self, rng):
        with pytest.raises(DomainError, match="singular"):
            affine_transform(_model(rng, Normal()), [np.eye(2), np.ones((2, 2))])

    def test_dense_rejected(self, rng):
        with pytest.raises(DomainError, match="Kronecker"):
            affine_transform(_model(rng, Normal()), np.eye(4))
