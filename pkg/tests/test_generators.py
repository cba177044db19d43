import math

import numpy as np
import pytest
from scipy import special, stats

from tensor_elliptical import oracles
from tensor_elliptical.errors import DomainError, NotAScaleMixtureError
from tensor_elliptical.generators import (
    Cauchy,
    Custom,
    EpsContaminated,
    Normal,
    Quartic,
    StudentT,
    g_eval,
    parse_family,
    psi_eval,
    psi_via_radial,
    radial_cdf,
    radial_pdf,
    sample_weighting,
    sphere_cf,
    weighting,
    y_g_solve,
)


class TestGenerator:
    def test_normal_at_zero(self):
        assert g_eval(Normal(), 0.0, 2) == pytest.approx(1 / (2 * math.pi), rel=1e-15)

    def test_student_t_normal_limit(self):
        ref = math.exp(-0.5) / math.sqrt(2 * math.pi)
        assert g_eval(StudentT(1e6), 1.0, 1) == pytest.approx(ref, rel=1e-4)

    def test_student_t_matches_scipy(self):
        # scalar t density at x equals g(x^2) in dimension 1
        for nu in (1.0, 3.0, 7.5):
            x = np.linspace(-4, 4, 9)
            np.testing.assert_allclose(g_eval(StudentT(nu), x**2, 1), stats.t(nu).pdf(x), rtol=1e-13)

    def test_student_t_multivariate(self):
        x = np.array([0.3, -1.2, 0.5])
        ref = stats.multivariate_t(np.zeros(3), np.eye(3), df=5).pdf(x)
        assert g_eval(StudentT(5), x @ x, 3) == pytest.approx(ref, rel=1e-12)

    def test_quartic_at_zero(self):
        assert g_eval(Quartic(), 0.0, 1) == pytest.approx(math.sqrt(2) / math.pi, rel=1e-15)

    def test_quartic_only_scalar(self):
        with pytest.raises(DomainError):
            g_eval(Quartic(), 1.0, 2)

    def test_eps_contaminated_mixture(self):
        fam = EpsContaminated(0.1, 3.0)
        y = 2.0
        ref = 0.9 * stats.norm.pdf(math.sqrt(y)) + 0.1 * stats.norm(scale=3.0).pdf(math.sqrt(y))
        assert g_eval(fam, y, 1) == pytest.approx(ref, rel=1e-14)

    def test_negative_argument(self):
        with pytest.raises(DomainError):
            g_eval(Normal(), -1.0, 2)

    @pytest.mark.parametrize("kwargs", [{"epsilon": 1.5, "sigma": 1.0}, {"epsilon": 0.1, "sigma": -1.0}])
    def test_eps_parameter_checks(self, kwargs):
        with pytest.raises(DomainError):
            EpsContaminated(**kwargs)


class TestWeighting:
    def test_normal_point_mass(self):
        spec = weighting(Normal(), 3)
        assert spec.point_masses == ((1.0, 1.0),)
        assert spec.continuous_density is None

    def test_eps_point_masses(self):
        spec = weighting(EpsContaminated(0.2, 2.0), 2)
        assert dict(spec.point_masses) == pytest.approx({1.0: 0.8, 0.25: 0.2})

    def test_student_t_nu2_is_exponential(self):
        t = np.linspace(0.1, 5, 20)
        np.testing.assert_allclose(weighting(StudentT(2), 3).continuous_density(t), np.exp(-t), rtol=1e-13)

    def test_quartic_value(self):
        w = weighting(Quartic(), 1)
        assert float(w.continuous_density(math.pi)) == pytest.approx(1 / math.pi, rel=1e-14)
        assert w.signed

    @pytest.mark.parametrize("fam", [Normal(), EpsContaminated(0.2, 2.0), StudentT(1), StudentT(4.5),
                                     Quartic(1.0), Quartic(0.5)])
    def test_total_mass(self, fam):
        pstar = 1 if isinstance(fam, Quartic) else 3
        assert weighting(fam, pstar).total_mass() == pytest.approx(1.0, abs=1e-8)

    def test_custom_without_weighting(self):
        fam = Custom(g=lambda y: math.exp(-y / 2) / (2 * math.pi))
        with pytest.raises(DomainError, match="no weighting"):
            weighting(fam, 2)

    def test_signed_cannot_be_sampled(self):
        with pytest.raises(NotAScaleMixtureError, match="not a scale mixture"):
            sample_weighting(weighting(Quartic(), 1), np.random.default_rng(0), 10)


class TestRadial:
    def test_half_normal(self):
        assert radial_pdf(Normal(), 0.0, 1) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-15)

    def test_rayleigh(self):
        assert radial_pdf(Normal(), 1.0, 2) == pytest.approx(math.exp(-0.5), rel=1e-15)

    @pytest.mark.parametrize("fam", [Normal(), StudentT(3), EpsContaminated(0.2, 2.0)])
    def test_zero_radius(self, fam):
        assert radial_pdf(fam, 0.0, 3) == 0.0

    def test_cdf_is_chi(self):
        r = np.linspace(0.1, 6, 30)
        np.testing.assert_allclose(radial_cdf(Normal(), r, 6), stats.chi(6).cdf(r), rtol=1e-11, atol=1e-14)

    def test_cdf_student_t(self):
        r = np.array([0.5, 1.0, 3.0, 10.0])
        ref = stats.f(3, 5).cdf(r**2 / 3)
        np.testing.assert_allclose(radial_cdf(StudentT(5), r, 3), ref, rtol=1e-10)

    def test_quartic_cdf_closed_form(self):
        r = np.array([0.5, 1.0, 4.0])
        num = [oracles.integrate_1d(lambda v: 2 * math.sqrt(2) / math.pi / (1 + v**4), (0, x))[0] for x in r]
        np.testing.assert_allclose(Quartic().cdf_abs(r), num, rtol=1e-12)


class TestCharacteristicGenerator:
    @pytest.mark.parametrize("fam", [Normal(), StudentT(3), EpsContaminated(0.1, 3.0)])
    def test_at_zero(self, fam):
        assert psi_eval(fam, 0.0, 2) == 1.0

    def test_normal(self):
        assert psi_eval(Normal(), 2.0, 3) == pytest.approx(math.exp(-1), rel=1e-15)

    def test_student_t_closed_form(self):
        # scalar t characteristic function: K_{nu/2}(sqrt(nu) |s|) (sqrt(nu)|s|)^{nu/2} / (Gamma(nu/2) 2^{nu/2-1})
        nu, s = 4.0, 1.3
        z = math.sqrt(nu) * s
        ref = special.kv(nu / 2, z) * z ** (nu / 2) / (special.gamma(nu / 2) * 2 ** (nu / 2 - 1))
        assert psi_eval(StudentT(nu), s * s, 1) == pytest.approx(ref, rel=1e-9)

    def test_quartic_closed_form(self):
        for x in (0.5, 2.0, 9.0):
            a = math.sqrt(x) / math.sqrt(2)
            ref = math.exp(-a) * (math.cos(a) + math.sin(a))
            assert psi_eval(Quartic(), x, 1) == pytest.approx(ref, rel=1e-8, abs=1e-12)

    @pytest.mark.parametrize("fam", [StudentT(5), EpsContaminated(0.2, 2.0)])
    def test_weighting_matches_radial(self, fam):
        for x in (0.3, 2.0, 7.0):
            assert psi_eval(fam, x, 3) == pytest.approx(psi_via_radial(fam, x, 3), rel=1e-7)

    def test_custom_via_radial(self):
        fam = Custom(g=lambda y: math.exp(-y / 2) / (2 * math.pi) ** 1.5)
        assert psi_eval(fam, 2.0, 3) == pytest.approx(math.exp(-1), rel=1e-7)


class TestSphereCF:
    @pytest.mark.parametrize("d", [1, 2, 3, 10])
    def test_at_zero(self, d):
        assert sphere_cf(d, 0.0) == 1.0

    def test_three_sphere(self):
        assert abs(sphere_cf(3, math.pi**2)) < 1e-12
        for x in (0.5, 10.0, 50.0, 400.0):
            s = math.sqrt(x)
            assert sphere_cf(3, x) == pytest.approx(math.sin(s) / s, rel=1e-10, abs=1e-13)

    def test_one_sphere_is_cos(self):
        for x in (1.0, 25.0, 100.0):
            assert sphere_cf(1, x) == pytest.approx(math.cos(math.sqrt(x)), abs=1e-12)

    def test_monte_carlo(self):
        rng = np.random.default_rng(3)
        u = rng.standard_normal((200000, 4))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        vals = np.cos(2.0 * u[:, 0])
        se = vals.std() / math.sqrt(vals.size)
        assert abs(vals.mean() - sphere_cf(4, 4.0)) < 4 * se

    def test_range(self):
        with pytest.raises(OverflowError):
            sphere_cf(3, 2e6)


class TestYg:
    def test_normal(self):
        assert y_g_solve(Normal(), 6) == 6.0
        assert y_g_solve(Normal(), 6, numeric=True) == pytest.approx(6.0, rel=1e-10)

    @pytest.mark.parametrize("nu", [1.0, 3.0, 10.0])
    def test_student_t(self, nu):
        assert y_g_solve(StudentT(nu), 5) == 5.0
        assert y_g_solve(StudentT(nu), 5, numeric=True) == pytest.approx(5.0, rel=1e-10)

    def test_eps_against_grid(self):
        fam = EpsContaminated(0.1, 3.0)
        d = 4

        def objective(y):
            return 0.5 * d * np.log(y) + np.log(g_eval(fam, y, d))

        ref = oracles.grid_scan_max(objective, (1e-8, 1e3 * d), points=10**6, refinements=2)
        assert abs(y_g_solve(fam, d) - ref) < 1e-6
        # golden section resolves a smooth maximum only to about sqrt(eps)
        assert y_g_solve(fam, d) == pytest.approx(
            oracles.golden_section_max(objective, (1.0, 40.0), tol=1e-12), rel=1e-7)

    def test_quartic(self):
        assert y_g_solve(Quartic(), 1) == pytest.approx(1 / math.sqrt(3), rel=1e-15)
        assert y_g_solve(Quartic(), 1, numeric=True) == pytest.approx(1 / math.sqrt(3), rel=1e-9)


class TestParseFamily:
    @pytest.mark.parametrize("text,expected", [
        ("normal", Normal()),
        ("eps_contaminated epsilon=0.1 sigma=3", EpsContaminated(0.1, 3.0)),
        ("student_t nu=5", StudentT(5.0)),
        ("cauchy", StudentT(1.0)),
        ("quartic sigma=1", Quartic(1.0)),
        ("quartic", Quartic(1.0)),
        ({"name": "student_t", "params": {"nu": 4}}, StudentT(4.0)),
    ])
    def test_grammar(self, text, expected):
        assert parse_family(text) == expected

    def test_round_trip(self):
        for fam in (Normal(), EpsContaminated(0.25, 1.5), StudentT(3.5), Cauchy(), Quartic(2.0)):
            assert parse_family(fam.to_spec()) == fam

    @pytest.mark.parametrize("text", ["gamma", "student_t", "student_t nu=abc", "normal mu=1",
                                      "student_t nu=-1"])
    def test_rejects(self, text):
        with pytest.raises(DomainError):
            parse_family(text)
