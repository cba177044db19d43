"""Acceptance checks, runnable from the library, the CLI and the test suite.

Every check compares a library computation against an independent
reference from :mod:`tensor_elliptical.oracles` or a closed form.  Library
functions are looked up through their modules at call time, so tests can
perturb one and watch the relevant check fail.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import density, generators, kron_cov, mle, oracles, quadrature, sampling, tensor_core
from .generators import EpsContaminated, Normal, Quartic, StudentT
from .sampling import RngStream, TEModel

DEFAULT_SEED = 20240607
KS_LEVEL = 1e-3


@dataclass(frozen=True)
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.criterion:2d} {self.name}: {self.detail}"


def _result(criterion, name, parts):
    """``parts`` is a list of ``(label, passed, measured)``."""
    passed = all(p for _, p, _ in parts)
    detail = "; ".join(f"{label} {m}" + ("" if p else " (FAIL)") for label, p, m in parts)
    return CheckResult(criterion, name, passed, detail)


def _rel(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.abs(b)))


def _random_spd(rng, p):
    a = rng.standard_normal((p, p))
    return a @ a.T + p * np.eye(p)


def _random_shape(rng, max_pstar=36):
    while True:
        k = int(rng.integers(1, 4))
        dims = tuple(int(d) for d in rng.integers(1, 7, size=k))
        if math.prod(dims) <= max_pstar and math.prod(dims) > 1:
            return dims


# criterion 1
def check_vec_convention(seed=DEFAULT_SEED):
    dims = (2, 3, 4)
    shape = tensor_core.TensorShape(dims)
    bad = 0
    for idx in np.ndindex(*dims):
        one = tuple(i + 1 for i in idx)
        e = oracles.unit_kron(one, dims)
        pos = tensor_core.linear_index(one, shape)
        arr = np.zeros(dims)
        arr[idx] = 1.0
        v = tensor_core.vec(tensor_core.DataTensor.from_array(arr))
        if int(np.argmax(e)) != pos or not np.array_equal(v, e):
            bad += 1
    return _result(1, "vec convention", [("mismatches over 24 basis tensors", bad == 0, bad)])


def _battery(seed):
    rng = RngStream(seed).substream("kron-battery").generator
    for _ in range(100):
        dims = _random_shape(rng)
        yield dims, [_random_spd(rng, p) for p in dims], rng


# criterion 2
def check_log_det(seed=DEFAULT_SEED):
    worst = 0.0
    for dims, factors, _ in _battery(seed):
        cov = kron_cov.SeparableCovariance(factors)
        ref = oracles.dense_logdet(oracles.dense_kron(factors))
        worst = max(worst, abs(kron_cov.log_det(cov) - ref) / abs(ref))
    return _result(2, "log-determinant identity", [("max rel err", worst < 1e-10, f"{worst:.2e}")])


# criterion 3
def check_quad_form(seed=DEFAULT_SEED):
    worst = 0.0
    for dims, factors, rng in _battery(seed):
        cov = kron_cov.SeparableCovariance(factors)
        p = math.prod(dims)
        x, mu = rng.standard_normal(p), rng.standard_normal(p)
        ref = oracles.dense_quadform(x, mu, oracles.dense_kron(factors))
        worst = max(worst, abs(float(kron_cov.quad_form(x, mu, cov)) - ref) / ref)
    return _result(3, "quadratic form identity", [("max rel err", worst < 1e-10, f"{worst:.2e}")])


def _disk_integral(model, r_max, panels=400, nodes=20, angles=64):
    # polar coordinates in the whitened plane: x = mu + Sigma^{1/2} r (cos a, sin a)
    sigma = model.cov.factors[0]
    evals, evecs = np.linalg.eigh(sigma)
    root = evecs @ np.diag(np.sqrt(evals)) @ evecs.T
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, r_max, panels + 1)
    mid, half = 0.5 * (edges[:-1] + edges[1:]), 0.5 * np.diff(edges)
    r = (mid[:, None] + half[:, None] * gx).reshape(-1)
    wr = (half[:, None] * gw).reshape(-1)
    a = 2 * math.pi * np.arange(angles) / angles
    circle = np.stack([np.cos(a), np.sin(a)], axis=1)
    pts = model.mu + (r[:, None, None] * circle[None]).reshape(-1, 2) @ root.T
    vals = np.exp(density.logpdf(model, pts)).reshape(r.size, angles)
    jac = math.sqrt(np.prod(evals))
    return float(np.sum(wr * r * vals.mean(axis=1)) * 2 * math.pi * jac)


# criterion 4
def check_normalization(seed=DEFAULT_SEED):
    rng = RngStream(seed).substream("normalization").generator
    sigma = _random_spd(rng, 2)
    mu = rng.standard_normal(2)
    parts = []
    normal = TEModel((2,), mu, [sigma], Normal())
    r0 = 12.0
    total = _disk_integral(normal, r0) + math.exp(-0.5 * r0 * r0)
    parts.append(("normal |I-1|", abs(total - 1) < 1e-6, f"{abs(total - 1):.2e}"))
    nu = 3.0
    t = TEModel((2,), mu, [sigma], StudentT(nu))
    r0 = 10 * math.sqrt(2 * nu / (nu - 2))
    tail = (1 + r0 * r0 / nu) ** (-nu / 2)
    total = _disk_integral(t, r0) + tail
    parts.append(("student_t(3) |I-1|", abs(total - 1) < 1e-4, f"{abs(total - 1):.2e}"))
    return _result(4, "density normalization", parts)


# criterion 5
def check_mixture_identity(seed=DEFAULT_SEED):
    rng = RngStream(seed).substream("mixture-identity").generator
    parts = []
    for fam in (StudentT(3), StudentT(5), StudentT(10), EpsContaminated(0.2, 2.0)):
        model = TEModel((2, 2), rng.standard_normal(4), [_random_spd(rng, 2), _random_spd(rng, 2)], fam)
        x = model.mu + 2.0 * rng.standard_normal((20, 4))
        err = _rel(density.pdf_via_mixture(model, x), np.exp(density.logpdf(model, x)))
        parts.append((fam.to_spec(), err < 1e-6, f"{err:.2e}"))
    return _result(5, "generator/mixture identity", parts)


# criterion 6
def check_signed_weight(seed=DEFAULT_SEED):
    model = TEModel.standard((1,), Quartic(1.0))
    xs = np.array([0.0, 0.5, 1.0, 2.0])
    ref = math.sqrt(2) / math.pi / (1 + xs**4)
    err = _rel(density.pdf_via_mixture(model, xs[:, None]), ref)
    parts = [("quartic pdf max rel err", err < 1e-4, f"{err:.2e}")]

    def w(t):
        return math.sin(t / 2) / math.sqrt(math.pi * t) if t > 0 else 0.0

    lib, _ = quadrature.integrate_oscillatory(w, 2 * math.pi)
    orc, _ = oracles.integrate_1d(w, (0.0, math.inf), tol=1e-11, mode="oscillatory",
                                  half_period=2 * math.pi)
    parts.append(("weight integral (library) |I-1|", abs(lib - 1) < 1e-6, f"{abs(lib - 1):.2e}"))
    parts.append(("weight integral (oracle) |I-1|", abs(orc - 1) < 1e-6, f"{abs(orc - 1):.2e}"))
    return _result(6, "signed weighting example", parts)


# criterion 7
def check_sampler_agreement(seed=DEFAULT_SEED):
    root = RngStream(seed)
    rng = root.substream("sampler-model").generator
    nu = 5.0
    model = TEModel((2, 2), rng.standard_normal(4), [_random_spd(rng, 2), _random_spd(rng, 2)], StudentT(nu))
    n = 20000
    a = sampling.sample_te(model, n, root.substream("sampler-representation"))
    b = sampling.sample_mixture(model, n, root.substream("sampler-mixture"))
    qa, qb = model.cov.quad_form(a, model.mu), model.cov.quad_form(b, model.mu)
    _, p2 = oracles.ks_two_sample(qa, qb)
    f = stats.f(4, nu).cdf
    _, pa = oracles.ks_one_sample(qa / 4, f)
    _, pb = oracles.ks_one_sample(qb / 4, f)
    return _result(7, "sampler agreement", [
        ("two-sample KS p", p2 > KS_LEVEL, f"{p2:.3g}"),
        ("representation vs F(4,5) p", pa > KS_LEVEL, f"{pa:.3g}"),
        ("mixture vs F(4,5) p", pb > KS_LEVEL, f"{pb:.3g}"),
    ])


# criterion 8
def check_radial_law(seed=DEFAULT_SEED):
    root = RngStream(seed)
    rng = root.substream("radial-model").generator
    model = TEModel((2, 3), rng.standard_normal(6), [_random_spd(rng, 2), _random_spd(rng, 3)], Normal())
    x = sampling.sample_te(model, 20000, root.substream("radial-draws"))
    q = model.cov.quad_form(x, model.mu)
    _, p1 = oracles.ks_one_sample(q, stats.chi2(6).cdf)
    _, p2 = oracles.ks_one_sample(np.sqrt(q), lambda r: generators.radial_cdf(Normal(), r, 6))
    return _result(8, "radial law", [
        ("quad form vs chi2(6) p", p1 > KS_LEVEL, f"{p1:.3g}"),
        ("radius vs radial_pdf p", p2 > KS_LEVEL, f"{p2:.3g}"),
    ])


# criterion 9
def check_charfun(seed=DEFAULT_SEED):
    root = RngStream(seed)
    rng = root.substream("cf-model").generator
    factors = [_random_spd(rng, 2), _random_spd(rng, 2)]
    mu = rng.standard_normal(4)
    normal = TEModel((2, 2), mu, factors, Normal())
    dense = oracles.dense_kron(factors)
    s = 0.3 * rng.standard_normal((10, 4))
    ref = np.array([np.exp(1j * v @ mu - 0.5 * v @ dense @ v) for v in s])
    got = density.charfun(normal, s)
    err = float(np.max(np.abs(got - ref) / np.abs(ref)))
    parts = [("normal max rel err", err < 1e-12, f"{err:.2e}")]

    t = TEModel((2, 2), mu, factors, StudentT(4))
    x = sampling.sample_te(t, 10**6, root.substream("cf-draws"))
    s = 0.3 * rng.standard_normal((5, 4))
    got = density.charfun(t, s)
    worst = 0.0
    for v, phi in zip(s, got):
        arg = x @ v
        for comp, target in ((np.cos(arg), phi.real), (np.sin(arg), phi.imag)):
            se = np.std(comp, ddof=1) / math.sqrt(comp.size)
            worst = max(worst, abs(np.mean(comp) - target) / se)
    parts.append(("student_t(4) max |z| over 5 points", worst < 3, f"{worst:.2f}"))
    return _result(9, "characteristic function", parts)


# criterion 10
def check_affine(seed=DEFAULT_SEED):
    root = RngStream(seed)
    rng = root.substream("affine-model").generator
    model = TEModel((2, 2), rng.standard_normal(4), [_random_spd(rng, 2), _random_spd(rng, 2)], StudentT(5))
    a_factors = [rng.standard_normal((2, 2)) + 2 * np.eye(2) for _ in range(2)]
    b = rng.standard_normal(4)
    image = sampling.affine_transform(model, a_factors, b)
    a = oracles.dense_kron(a_factors)
    y = image.mu + 2.0 * rng.standard_normal((20, 4))
    x = np.linalg.solve(a, (y - b).T).T
    _, logabs = np.linalg.slogdet(a)
    lhs = density.logpdf(image, y)
    rhs = density.logpdf(model, x) - logabs
    err = _rel(np.exp(lhs), np.exp(rhs))
    c = np.array([1.0, -0.5, 0.25, 2.0])
    xs = sampling.sample_te(model, 20000, root.substream("affine-source"))
    ys = sampling.sample_te(image, 20000, root.substream("affine-image"))
    _, p = oracles.ks_two_sample((xs @ a.T + b) @ c, ys @ c)
    return _result(10, "affine transformation", [
        ("density identity max rel err", err < 1e-10, f"{err:.2e}"),
        ("linear functional KS p", p > KS_LEVEL, f"{p:.3g}"),
    ])


# criterion 11
def check_quadform_density(seed=DEFAULT_SEED):
    root = RngStream(seed)
    rng = root.substream("quadform").generator
    parts = []
    grid = np.geomspace(1e-3, 50.0, 40)
    sigma = 2.5
    worst = 0.0
    for fam in (Normal(), StudentT(5), EpsContaminated(0.1, 3.0)):
        got = np.array([density.quadform_density([[v]], [[sigma]], (1, 4), fam) for v in grid])
        r = np.sqrt(grid / sigma)
        ref = generators.radial_pdf(fam, r, 4) / (2 * np.sqrt(grid * sigma))
        worst = max(worst, _rel(got, ref))
    parts.append(("p1=1 reduction max rel err", worst < 1e-10, f"{worst:.2e}"))

    sigma1 = _random_spd(rng, 2)
    worst = 0.0
    for _ in range(10):
        a = _random_spd(rng, 2)
        got = density.quadform_density(a, sigma1, (2, 3), Normal())
        ref = math.exp(oracles.wishart_logpdf(a, 3, sigma1))
        worst = max(worst, abs(got - ref) / ref)
    parts.append(("Wishart max rel err", worst < 1e-10, f"{worst:.2e}"))

    model = TEModel((2, 3), np.zeros(6), [sigma1, np.eye(3)], StudentT(5))
    x = sampling.sample_te(model, 20000, root.substream("quadform-draws"))
    inv = np.linalg.inv(sigma1)
    stat = []
    for row in x:
        x1 = tensor_core.mode_unfold(row, 1, (2, 3))
        stat.append(np.trace(inv @ x1 @ x1.T))
    _, p = oracles.ks_one_sample(np.array(stat),
                                 lambda v: generators.radial_cdf(model.family, np.sqrt(v), 6))
    parts.append(("trace statistic KS p", p > KS_LEVEL, f"{p:.3g}"))
    return _result(11, "quadratic-form density", parts)


# criterion 12
def check_mle(seed=DEFAULT_SEED):
    root = RngStream(seed)
    parts = []
    tilde = kron_cov.SeparableCovariance([np.eye(2), np.eye(3)])
    worst = 0.0
    for fam in (Normal(), StudentT(5)):
        for conv in mle.CONVENTIONS:
            _, rescale, _ = mle.y_g_rescale(tilde, fam, 50, 6, conv)
            worst = max(worst, abs(rescale - 1))
    parts.append(("(a) max |rescale-1|", worst < 1e-8, f"{worst:.2e}"))

    rng = root.substream("mle-model").generator
    truth = kron_cov.normalize(kron_cov.SeparableCovariance([_random_spd(rng, 2), _random_spd(rng, 3)]))
    model = TEModel((2, 3), np.zeros(6), truth, Normal())
    x = sampling.sample_te(model, 2000, root.substream("mle-draws"))
    report = mle.fit(x, (2, 3), Normal())
    est = kron_cov.normalize(report.factors)
    errs = [np.linalg.norm(e - t) / np.linalg.norm(t) for e, t in zip(est.factors, truth.factors)]
    parts.append(("(b) max factor rel err", max(errs) < 0.1, f"{max(errs):.3f}"))

    steps = np.diff(report.loglik_trajectory)
    drop = float(-np.min(steps)) if steps.size else 0.0
    parts.append(("(c) largest loglik decrease", drop <= 1e-10, f"{max(drop, 0.0) + 0.0:.2e}"))

    worst = 0.0
    base_factors = report.factors.factors
    for fam in (Normal(), StudentT(5)):
        for conv in mle.CONVENTIONS:
            base = mle.joint_loglik(x, report.factors, fam, conv)
            c = 3.7
            moved = kron_cov.SeparableCovariance(
                [base_factors[0] / c, base_factors[1] * c]
            )
            worst = max(worst, abs(mle.joint_loglik(x, moved, fam, conv) - base) / abs(base))
    parts.append(("(d) rescaling invariance rel err", worst < 1e-12, f"{worst:.2e}"))
    return _result(12, "maximum likelihood", parts)


# criterion 13
def check_weight_normalization(seed=DEFAULT_SEED):
    families = [Normal(), EpsContaminated(0.2, 2.0), EpsContaminated(0.1, 3.0),
                StudentT(1), StudentT(3), StudentT(5), StudentT(10), Quartic(1.0), Quartic(2.0)]
    parts = []
    for fam in families:
        pstar = 1 if isinstance(fam, Quartic) else 4
        err = abs(generators.weighting(fam, pstar).total_mass() - 1)
        parts.append((fam.to_spec(), err < 1e-8, f"{err:.1e}"))
    return _result(13, "weight normalization", parts)


# criterion 14
def check_determinism(seed=DEFAULT_SEED):
    from . import cli, fileio

    rng = RngStream(seed).substream("determinism").generator
    model = TEModel((2, 2), rng.standard_normal(4), [_random_spd(rng, 2), _random_spd(rng, 2)], StudentT(5))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "model.json")
        fileio.write_model(path, model)
        blobs = []
        for k in range(2):
            out = os.path.join(tmp, f"out{k}.json")
            code = cli.main(["sample", path, "-n", "50", "--seed", str(seed % 2**64), "-o", out])
            with open(out, "rb") as fh:
                blobs.append((code, fh.read()))
    same = blobs[0][0] == 0 and blobs[1][0] == 0 and blobs[0][1] == blobs[1][1]
    return _result(14, "sampling determinism", [("byte-identical", same, same)])


SUITES = {
    "core": (check_vec_convention, check_log_det, check_quad_form, check_weight_normalization),
    "density": (check_normalization, check_mixture_identity, check_signed_weight,
                check_charfun, check_quadform_density),
    "sampling": (check_sampler_agreement, check_radial_law, check_affine, check_determinism),
    "mle": (check_mle,),
}
SUITES["all"] = (
    check_vec_convention, check_log_det, check_quad_form, check_normalization,
    check_mixture_identity, check_signed_weight, check_sampler_agreement, check_radial_law,
    check_charfun, check_affine, check_quadform_density, check_mle,
    check_weight_normalization, check_determinism,
)


def run_suite(name: str, seed: int = DEFAULT_SEED, report=None) -> list[CheckResult]:
    """Run the checks of suite ``name`` in order; ``report`` receives each result as it lands."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    results = []
    for check in SUITES[name]:
        try:
            res = check(seed=seed)
        except Exception as exc:  # a crash is a failure, not an abort
            crit = SUITES["all"].index(check) + 1
            res = CheckResult(crit, check.__name__, False, f"raised {type(exc).__name__}: {exc}")
        results.append(res)
        if report is not None:
            report(res)
    return results
