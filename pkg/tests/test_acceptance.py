"""Acceptance gate: the ten primary verification criteria, one test (and one
printed pass/fail line) each, at their stated tolerances and budgets.

Stochastic criteria run at fixed seeds, so every number below is
reproducible bit for bit; criterion 10 checks exactly that.
"""

import itertools
import json
import math
import time

import numpy as np

from bgcs import cli, coherent, fock, measure, mc, pathint, specfun

ACCEPT_SEED = mc.DEFAULT_SEED


def _report(num, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, detail


def test_criterion_01_bessel_reduction():
    """F_1(K; x) = Gamma(K) x^((1-K)/2) I_{K-1}(2 sqrt x) to 1e-10."""
    t0 = time.monotonic()
    worst = 0.0
    for k in (1.0, 2.0, 5.0):
        for x in (0.1, 1.0, 10.0):
            f_val = coherent.f_series(k, [x])
            bessel = (specfun.gamma(k) * x ** (0.5 * (1.0 - k))
                      * specfun.bessel_i(k - 1.0, 2.0 * math.sqrt(x)))
            worst = max(worst, abs(f_val - bessel) / abs(bessel))
    dt = time.monotonic() - t0
    _report(1, worst <= 1e-10 and dt < 1.0,
            f"series/Bessel reduction worst rel err {worst:.3e} (<=1e-10), {dt:.2f}s (<1s)")


def test_criterion_02_algebra_suite():
    """All structure relations and the subsidiary condition on interior
    states to 1e-12, N <= 3, cutoff <= 6, K in {0.5, 1, 2.5, N+2}."""
    t0 = time.monotonic()
    worst = 0.0
    for n in (1, 2, 3):
        pairs = [(a, b) for a in range(1, n + 2) for b in range(1, n + 2)]
        for k in (0.5, 1.0, 2.5, float(n + 2)):
            for cutoff in (2, 6):
                space = fock.rep_space(n, k, cutoff)
                for first, second in itertools.product(pairs, pairs):
                    worst = max(worst, fock.commutator_residual(space, first, second))
                worst = max(worst, fock.subsidiary_residual(space))
    dt = time.monotonic() - t0
    _report(2, worst <= 1e-12 and dt < 10.0,
            f"algebra + subsidiary worst interior residual {worst:.3e} (<=1e-12), "
            f"{dt:.1f}s (<10s)")


def test_criterion_03_eigen_property():
    """Lowering-generator eigen-residual <= 1e-12 on 100 seeded labels per
    (N, K) in {1,2,3} x {0.5, 1, 2.5}."""
    t0 = time.monotonic()
    worst = 0.0
    for n in (1, 2, 3):
        for k in (0.5, 1.0, 2.5):
            rng = np.random.default_rng([ACCEPT_SEED, n, int(10 * k)])
            space = fock.rep_space(n, k, 6)
            for _ in range(100):
                z = rng.normal(scale=0.7, size=n) + 1j * rng.normal(scale=0.7, size=n)
                for alpha in range(1, n + 1):
                    worst = max(worst, coherent.eigen_residual(z, space, alpha))
    dt = time.monotonic() - t0
    _report(3, worst <= 1e-12 and dt < 10.0,
            f"eigen-property worst interior residual {worst:.3e} (<=1e-12) over 900 labels, "
            f"{dt:.1f}s (<10s)")


def test_criterion_04_moment_identity():
    """Radial moment identity to 1e-8 for N <= 3, all n_alpha <= 4,
    K in {0.5, 1, N+0.5, 5}."""
    t0 = time.monotonic()
    worst = 0.0
    count = 0
    for n in (1, 2, 3):
        model_ks = (0.5, 1.0, n + 0.5, 5.0)
        occupations = list(itertools.product(range(5), repeat=n))
        for k in model_ks:
            model = measure.MeasureModel(n, k)
            for occ in occupations:
                worst = max(worst, measure.moment_check(model, occ).rel_err)
                count += 1
    dt = time.monotonic() - t0
    _report(4, worst <= 1e-8 and dt < 60.0,
            f"moment identity worst rel err {worst:.3e} (<=1e-8) over {count} instances, "
            f"{dt:.1f}s (<60s)")


def test_criterion_05_resolution_of_unity():
    """Gram deviation <= 1e-8: N=1 cutoff 6 at K in {0.25, 0.5, 1, 2};
    N=2 cutoff 4 at K in {0.75, 1.5, 3} (K < N and non-integer included)."""
    t0 = time.monotonic()
    worst = 0.0
    for n, cutoff, ks in ((1, 6, (0.25, 0.5, 1.0, 2.0)), (2, 4, (0.75, 1.5, 3.0))):
        for k in ks:
            res = measure.resolution_check(measure.MeasureModel(n, k), cutoff)
            worst = max(worst, res.max_dev)
    dt = time.monotonic() - t0
    _report(5, worst <= 1e-8 and dt < 120.0,
            f"resolution-of-unity worst Gram deviation {worst:.3e} (<=1e-8), "
            f"{dt:.1f}s (<120s)")


def test_criterion_06_integral_formulas():
    """Both integral formulas to 1e-8 on the listed instances plus 20
    seeded in-domain draws."""
    t0 = time.monotonic()
    worst = 0.0
    listed_a = [(1, 1.0, (0.0,)), (2, 3.0, (0.0, 0.0)), (1, 0.5, (0.5,))]
    for n, k, s in listed_a:
        worst = max(worst, measure.verify_formula_a(n, k, s).rel_err)
    listed_b = [(2.0, 0.0, 2.0), (1.0, 0.5, 1.0)]
    for mu, nu, a in listed_b:
        worst = max(worst, measure.verify_formula_b(mu, nu, a).rel_err)

    rng = np.random.default_rng([ACCEPT_SEED, 6])
    for _ in range(10):
        n = int(rng.integers(1, 4))
        k = float(rng.uniform(0.3, 5.0))
        s = rng.uniform(-0.9, 3.0, size=n)
        worst = max(worst, measure.verify_formula_a(n, k, s).rel_err)
    for _ in range(10):
        nu = float(rng.uniform(-2.0, 2.0))
        mu = abs(nu) + float(rng.uniform(0.4, 3.0))
        a = float(rng.uniform(0.3, 3.0))
        worst = max(worst, measure.verify_formula_b(mu, nu, a).rel_err)
    dt = time.monotonic() - t0
    _report(6, worst <= 1e-8 and dt < 60.0,
            f"integral formulas worst rel err {worst:.3e} (<=1e-8) on 5 listed + 20 drawn, "
            f"{dt:.1f}s (<60s)")


def test_criterion_07_exact_sampler():
    """10^6-sample report: first and mixed radial moments, angular Fourier
    modes, and the R-CDF at 10 quantiles, all within 4 sigma."""
    t0 = time.monotonic()
    worst = 0.0
    for n, k in ((1, 0.5), (2, 1.5)):
        report = measure.sampler_report(measure.MeasureModel(n, k), 10**6,
                                        seed=ACCEPT_SEED, workers=4)
        cdf_rows = [r for r in report["rows"] if r["quantity"].startswith("cdf(")]
        assert len(cdf_rows) == 10
        worst = max(worst, report["max_z"])
    dt = time.monotonic() - t0
    _report(7, worst <= 4.0 and dt < 30.0,
            f"sampler worst |z| {worst:.2f} (<=4) incl. 10 CDF quantiles per model, "
            f"{dt:.1f}s (<30s)")


def test_criterion_08_trace_identity():
    """Kernel-integral trace equals the spectral trace: quadrature to 1e-6
    and Monte Carlo (10^6, variance-safe couplings) within 4 sigma, over
    N <= 2, K in {0.5, 1, 2.5}, beta in {0.5, 1, 2}."""
    t0 = time.monotonic()
    worst_rel = 0.0
    worst_z = 0.0
    for n in (1, 2):
        quad_hp = pathint.HamiltonianParams.from_mu(
            [1.0] if n == 1 else [1.0, 1.6], c_last=0.3)
        mc_hp = pathint.HamiltonianParams.from_mu([3.0] if n == 1 else [3.0, 4.0])
        for k in (0.5, 1.0, 2.5):
            for beta in (0.5, 1.0, 2.0):
                expected = pathint.exact_spectral_trace(quad_hp, k, beta)
                got = pathint.exact_kernel_trace(quad_hp, k, beta).value
                worst_rel = max(worst_rel, abs(got - expected) / expected)

                expected = pathint.exact_spectral_trace(mc_hp, k, beta)
                res = pathint.exact_kernel_trace(mc_hp, k, beta, mode="montecarlo",
                                                 budget=10**6, seed=ACCEPT_SEED,
                                                 workers=4)
                assert res.params["variance_warning"] is False
                worst_z = max(worst_z, abs(res.value - expected) / res.error)
    dt = time.monotonic() - t0
    _report(8, worst_rel <= 1e-6 and worst_z <= 4.0 and dt < 120.0,
            f"kernel-vs-spectral trace: quadrature worst rel err {worst_rel:.3e} (<=1e-6), "
            f"MC worst |z| {worst_z:.2f} (<=4) at 10^6, {dt:.1f}s (<120s)")


def test_criterion_09_sliced_trace_convergence():
    """Imaginary time, N=1, K=1, mu=1, beta=1: M=64 within 1% of the exact
    trace; empirical order in 1/M >= 0.9 across M in {4..64} for both
    weight forms; Bessel-ratio weight equals the series-ratio weight to
    1e-12."""
    t0 = time.monotonic()
    hp = pathint.HamiltonianParams.from_mu([1.0])
    exact = pathint.exact_spectral_trace(hp, 1.0, 1.0)

    res64 = pathint.sliced_trace(hp, 1.0, pathint.TraceConfig(
        horizon=1.0, slices=64, cutoff=40, weights="linear"))
    final_rel = abs(res64.value - exact) / exact

    orders = {}
    sweep = (4, 8, 16, 32, 64)
    for weights in ("linear", "exp"):
        target = pathint.exact_spectral_trace(hp, 1.0, 1.0, cutoff=3)
        errs = [abs(pathint.sliced_trace(hp, 1.0, pathint.TraceConfig(
            horizon=1.0, slices=m, cutoff=3, weights=weights)).value - target)
            for m in sweep]
        fit = np.polyfit(np.log(sweep), np.log(errs), 1)
        orders[weights] = -fit[0]

    worst_ratio = 0.0
    for x in (0.0, 0.2, 1.0, 3.7, 9.0):
        bessel = pathint.ratio_exponent_n1(1.0, 1.0, x)
        series = (x / 1.0) * coherent.f_series(2.0, [x]) / coherent.f_series(1.0, [x])
        worst_ratio = max(worst_ratio, abs(bessel - series) / max(abs(series), 1.0))

    dt = time.monotonic() - t0
    ok = (final_rel <= 0.01 and min(orders.values()) >= 0.9
          and worst_ratio <= 1e-12 and dt < 60.0)
    _report(9, ok,
            f"sliced trace: M=64 rel err {final_rel:.4%} (<=1%), orders "
            f"linear {orders['linear']:.3f} / exp {orders['exp']:.3f} (>=0.9), "
            f"weight forms agree to {worst_ratio:.1e} (<=1e-12), {dt:.1f}s (<60s)")


def test_criterion_10_determinism(tmp_path):
    """Every stochastic quantity reruns byte-identically at fixed
    (seed, workers): raw samples, sampler report, MC resolution, MC traces,
    and the CLI reports."""
    model = measure.MeasureModel(2, 1.5)
    r1, t1 = measure.sample(model, 50_000, seed=ACCEPT_SEED, workers=4)
    r2, t2 = measure.sample(model, 50_000, seed=ACCEPT_SEED, workers=4)
    same = np.array_equal(r1, r2) and np.array_equal(t1, t2)

    rep1 = measure.sampler_report(model, 50_000, seed=ACCEPT_SEED, workers=4)
    rep2 = measure.sampler_report(model, 50_000, seed=ACCEPT_SEED, workers=4)
    same &= json.dumps(rep1, sort_keys=True) == json.dumps(rep2, sort_keys=True)

    res1 = measure.resolution_check(model, 3, mode="montecarlo", budget=50_000,
                                    seed=ACCEPT_SEED, workers=4)
    res2 = measure.resolution_check(model, 3, mode="montecarlo", budget=50_000,
                                    seed=ACCEPT_SEED, workers=4)
    same &= json.dumps(res1.as_dict(), sort_keys=True) == json.dumps(res2.as_dict(),
                                                                     sort_keys=True)

    hp = pathint.HamiltonianParams.from_mu([3.0])
    k1 = pathint.exact_kernel_trace(hp, 1.0, 0.5, mode="montecarlo", budget=50_000,
                                    seed=ACCEPT_SEED, workers=4)
    k2 = pathint.exact_kernel_trace(hp, 1.0, 0.5, mode="montecarlo", budget=50_000,
                                    seed=ACCEPT_SEED, workers=4)
    same &= json.dumps(k1.as_dict(), sort_keys=True) == json.dumps(k2.as_dict(),
                                                                   sort_keys=True)

    cfg = pathint.TraceConfig(horizon=1.0, slices=1, backend="montecarlo",
                              weights="exp", budget=50_000, seed=ACCEPT_SEED, workers=4)
    s1 = pathint.sliced_trace(pathint.HamiltonianParams.from_mu([1.2]), 10.0, cfg)
    s2 = pathint.sliced_trace(pathint.HamiltonianParams.from_mu([1.2]), 10.0, cfg)
    same &= json.dumps(s1.as_dict(), sort_keys=True) == json.dumps(s2.as_dict(),
                                                                   sort_keys=True)

    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    argv = ["sample", "--n", "2", "--k", "1.5", "--budget", "50000",
            "--seed", str(ACCEPT_SEED), "--workers", "4"]
    for path in paths:
        assert cli.main(argv + ["--out", str(path)]) == 0
    same &= paths[0].read_bytes() == paths[1].read_bytes()

    _report(10, same, "all stochastic reports byte-identical under fixed (seed, workers)")
