"""Acceptance criteria, one test per criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.
Statistical criteria use frozen master seeds; thresholds are the frozen CI
defaults (relative error 0.05 / 0.08, envelope 4*sqrt(main)*log^1.6 + 50 at
95% coverage, slope band 0.75, dichotomy bound 20).
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from orbitcount._rationals import derive_point_seed
from orbitcount.counting import TargetSpec, geometric_checkpoints, hit_indicators
from orbitcount.exact_measure import (
    event_pullback,
    event_recurrence,
    event_target,
    measure,
    measure_intersection,
    measure_within,
    mixing_deficit,
    phi_values,
)
from orbitcount.harness import (
    ExperimentPlan,
    Thresholds,
    dichotomy_check,
    qbc_instance,
    run_experiment,
    variance_statistic,
)
from orbitcount.maps import doubling_map, tent_map, toral_diag_map
from orbitcount.points import sample_point
from orbitcount.rates import (
    RateFunction,
    TableRate,
    constant_rate,
    power_rate,
    psi_partial_sums,
    target_main_term_sums,
)

F = Fraction


def _verdict(name: str, ok: bool, detail: str = "") -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok


def test_criterion_1_oracle_exactness():
    t0 = time.time()
    m = doubling_map()
    rate = power_rate("1/2", 1)  # psi(n) = 1/(2n)
    values = phi_values(m, rate, 20)
    psis = psi_partial_sums(rate, list(range(1, 21)))
    phi = F(0)
    worst = F(0)
    ok = True
    for n in range(1, 21):
        phi += values[n - 1]
        gap = abs(phi - psis[n - 1])
        worst = max(worst, gap)
        ok &= gap <= 1
    ok &= measure(event_recurrence(m, constant_rate("1/4"), 1)) == F(1, 2)
    ok &= measure(event_recurrence(m, constant_rate("1/8"), 2)) == F(1, 4)
    elapsed = time.time() - t0
    ok &= elapsed < 10.0
    assert _verdict(
        "criterion-1 oracle exactness",
        ok,
        f"max |Phi-Psi| = {float(worst):.4f} <= 1, hand values exact, {elapsed:.1f}s < 10s",
    )


def test_criterion_2_pairwise_independence_on_average():
    t0 = time.time()
    m = doubling_map()
    rate = power_rate("1/2", 1)
    a, b = 1, 12
    events = {n: event_recurrence(m, rate, n) for n in range(a, b + 1)}
    single = sum((measure(events[n]) for n in range(a, b + 1)), F(0))
    double = F(0)
    for mm in range(a, b + 1):
        for nn in range(mm + 1, b + 1):
            double += measure_intersection(events[mm], events[nn])
    lhs = 2 * double
    rhs = single**2 + 8 * single + 8
    elapsed = time.time() - t0
    ok = lhs <= rhs and elapsed < 60.0
    assert _verdict(
        "criterion-2 pairwise independence on average",
        ok,
        f"2*sum = {float(lhs):.4f} <= {float(rhs):.4f}, {elapsed:.1f}s < 60s",
    )


def test_criterion_3_mixing_bound():
    t0 = time.time()
    rng = np.random.default_rng(20240817)
    violations = 0
    checks = 0
    for m in (doubling_map(), tent_map()):
        lam = m.expansion
        for n in range(1, 13):
            for _ in range(100):
                q = int(rng.choice([64, 97, 128, 225, 1024]))
                a_num = int(rng.integers(0, q - 1))
                b_num = int(rng.integers(a_num + 1, q + 1))
                e_rect = [(F(a_num, q), F(b_num, q))]
                j = int(rng.integers(2, 7))
                count = int(rng.integers(1, min(2**j, 16) + 1))
                starts = rng.choice(2**j, size=count, replace=False)
                f_rects = [[(F(int(s), 2**j), F(int(s) + 1, 2**j))] for s in sorted(starts)]
                mu_f = F(count, 2**j)
                deficit = mixing_deficit(m, e_rect, f_rects, n)
                bound = 4 * (1 / lam) ** n * mu_f
                checks += 1
                if abs(deficit) > bound:
                    violations += 1
    elapsed = time.time() - t0
    ok = violations == 0 and elapsed < 60.0
    assert _verdict(
        "criterion-3 mixing bound",
        ok,
        f"{checks} exact checks, {violations} violations, {elapsed:.1f}s < 60s",
    )


def _random_rational(rng, lo: F, hi: F, q: int) -> F:
    lo_num = int(np.ceil(float(lo * q)))
    hi_num = int(np.floor(float(hi * q)))
    return F(int(rng.integers(lo_num, max(lo_num + 1, hi_num + 1))), q)


def test_criterion_4_window_sandwich():
    rng = np.random.default_rng(77001)
    ok = True
    for m in (doubling_map(), toral_diag_map([2, 3])):
        d = m.dimension
        for _ in range(50):
            depth = int(rng.integers(1, 7))
            radii = []
            r = []
            center = []
            for _ in range(d):
                psi = _random_rational(rng, F(1, 64), F(1, 4), 256)
                ri = _random_rational(rng, F(1, 1024), psi - F(1, 1024), 1024)
                zi = _random_rational(rng, ri, 1 - ri, 512)
                radii.append(psi)
                r.append(ri)
                center.append(zi)
            rate = RateFunction(
                axes=tuple(TableRate(tuple([psi] * depth)) for psi in radii)
            )
            rect_i = [(center[i] - r[i], center[i] + r[i]) for i in range(d)]
            inner_ball = [
                (max(F(0), center[i] - (radii[i] - r[i])), min(F(1), center[i] + (radii[i] - r[i])))
                for i in range(d)
            ]
            outer_ball = [
                (max(F(0), center[i] - (radii[i] + r[i])), min(F(1), center[i] + (radii[i] + r[i])))
                for i in range(d)
            ]
            lo = measure_within(event_pullback(m, [inner_ball], depth), rect_i)
            mid = measure_within(event_recurrence(m, rate, depth), rect_i)
            hi = measure_within(event_pullback(m, [outer_ball], depth), rect_i)
            if not (lo <= mid <= hi):
                ok = False
    assert _verdict(
        "criterion-4 window sandwich", ok, "100 exact three-way inclusions, 0 violations"
    )


@pytest.fixture(scope="module")
def report_1d():
    plan = ExperimentPlan(
        map=doubling_map(),
        rate=power_rate("1/2", "1/2"),
        kind="recurrence",
        n_max=10**6,
        samples=200,
        master_seed=6180339887,
        checkpoints=tuple(geometric_checkpoints(10**6, minimum=100)),
    )
    t0 = time.time()
    report = run_experiment(plan)
    return report, time.time() - t0


def test_criterion_5_main_theorem_1d(report_1d):
    report, elapsed = report_1d
    rel = report.passed["final_relative_error"]
    env = report.passed["envelope_fraction"]
    band = report.fit.band_high
    ok = (
        report.passed["final_relative_error_ok"]
        and report.passed["envelope_ok"]
        and band <= 0.75
        and elapsed < 300.0
    )
    assert _verdict(
        "criterion-5 main theorem 1-dim",
        ok,
        f"median rel err {rel:.4f} <= 0.05, envelope {env:.3f} >= 0.95, "
        f"slope band {band:.3f} <= 0.75, {elapsed:.0f}s < 300s",
    )


def test_criterion_6_main_theorem_2d():
    plan = ExperimentPlan(
        map=toral_diag_map([2, 3]),
        rate=power_rate("1/2", "1/4", dimension=2),
        kind="recurrence",
        n_max=10**5,
        samples=100,
        master_seed=2718281828,
        checkpoints=tuple(geometric_checkpoints(10**5, minimum=100)),
        thresholds=Thresholds(rel_err=0.08),
    )
    t0 = time.time()
    report = run_experiment(plan)
    elapsed = time.time() - t0
    rel = report.passed["final_relative_error"]
    env = report.passed["envelope_fraction"]
    ok = (
        report.passed["final_relative_error_ok"]
        and report.passed["envelope_ok"]
        and elapsed < 300.0
    )
    assert _verdict(
        "criterion-6 main theorem 2-dim",
        ok,
        f"median rel err {rel:.4f} <= 0.08, envelope {env:.3f} >= 0.95, {elapsed:.0f}s < 300s",
    )


def test_criterion_7_shrinking_target(report_1d):
    target = TargetSpec(center=(F(1, 2),))
    rate = power_rate("1/2", "1/2")
    m = doubling_map()
    # the closed-form main term must agree with the exact pullback oracle
    ckpts = list(range(1, 9))
    mains = target_main_term_sums(rate, target.center, ckpts)
    running = F(0)
    oracle_ok = True
    for n in ckpts:
        running += measure(event_target(m, rate, target, n))
        oracle_ok &= running == mains[n - 1]
    plan = ExperimentPlan(
        map=m,
        rate=rate,
        kind="target",
        target=target,
        n_max=10**6,
        samples=200,
        master_seed=31415926535,
        checkpoints=tuple(geometric_checkpoints(10**6, minimum=100)),
    )
    t0 = time.time()
    report = run_experiment(plan)
    elapsed = time.time() - t0
    rel = report.passed["final_relative_error"]
    env = report.passed["envelope_fraction"]
    ok = (
        oracle_ok
        and report.passed["final_relative_error_ok"]
        and report.passed["envelope_ok"]
        and elapsed < 300.0
    )
    assert _verdict(
        "criterion-7 shrinking target",
        ok,
        f"oracle-vs-closed-form exact for n<=8, median rel err {rel:.4f} <= 0.05, "
        f"envelope {env:.3f} >= 0.95, {elapsed:.0f}s",
    )


def test_criterion_8_dichotomy_convergence():
    plan = ExperimentPlan(
        map=doubling_map(),
        rate=power_rate("1/2", 2),  # psi(n) = n^-2 / 2, summable
        kind="recurrence",
        n_max=10**6,
        samples=200,
        master_seed=1414213562,
        checkpoints=(10**6,),
    )
    t0 = time.time()
    report = dichotomy_check(plan)
    elapsed = time.time() - t0
    ok = report.passed and report.max_final <= 20
    assert _verdict(
        "criterion-8 dichotomy convergence case",
        ok,
        f"max final count {report.max_final} <= 20 over {report.sample_size} points, "
        f"sum = {float(report.main_sum):.4f}, {elapsed:.0f}s",
    )


def test_criterion_9_variance_condition():
    m = doubling_map()
    rate = power_rate("1/2", 1)
    plan = ExperimentPlan(
        map=m,
        rate=rate,
        kind="recurrence",
        n_max=500,
        samples=500,
        master_seed=1732050808,
        checkpoints=(500,),
        keep_hits=500,
    )
    report = run_experiment(plan)
    inst = qbc_instance(m, rate, 500, oracle_cap=1 << 20)
    out = variance_statistic(report.hits_matrix, inst.c, 1, 500)
    empirical_ok = out["statistic"] <= 10 * out["phi_sum"]

    # synthetic independent coins must reproduce the binomial variance
    rng = np.random.default_rng(4001)
    c = inst.floats()
    coins = rng.random((500, 500)) < c[None, :]
    out2 = variance_statistic(coins, inst.c, 1, 500)
    expected = float(np.sum(c * (1 - c)))
    se = float(np.std(out2["per_point_sums"] ** 2, ddof=1) / np.sqrt(500))
    synth_ok = abs(out2["statistic"] - expected) <= 4 * se
    ok = empirical_ok and synth_ok
    assert _verdict(
        "criterion-9 variance condition",
        ok,
        f"statistic {out['statistic']:.3f} <= 10*sum(phi) = {10 * out['phi_sum']:.3f}; "
        f"synthetic coins |{out2['statistic']:.3f} - {expected:.3f}| <= {4 * se:.3f}",
    )


def test_criterion_10_monte_carlo_vs_oracle():
    t0 = time.time()
    rate = power_rate("1/2", 1)
    sample_count = 10**5
    ok = True
    details = []
    for label, m in (("doubling", doubling_map()), ("tent", tent_map())):
        exact = [measure(event_recurrence(m, rate, n)) for n in range(1, 11)]
        counts = np.zeros(10, dtype=np.int64)
        for i in range(sample_count):
            p = sample_point(m, derive_point_seed(9090 if label == "doubling" else 9091, i))
            hits, _ = hit_indicators(m, rate, p, 10)
            counts += hits
        worst_sigma = 0.0
        for n in range(1, 11):
            mu = float(exact[n - 1])
            freq = counts[n - 1] / sample_count
            sigma = (mu * (1 - mu) / sample_count) ** 0.5
            if sigma == 0.0:  # psi(1) = 1/2 makes mu(A_1) = 1: every point must hit
                ok &= freq == mu
                continue
            worst_sigma = max(worst_sigma, abs(freq - mu) / sigma)
            if abs(freq - mu) > 4 * sigma:
                ok = False
        details.append(f"{label} worst {worst_sigma:.2f} sigma")
    elapsed = time.time() - t0
    assert _verdict(
        "criterion-10 Monte Carlo vs oracle",
        ok,
        f"{'; '.join(details)} (<= 4), {elapsed:.0f}s",
    )
