"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete.  Every tolerance is pinned here; the oracles are the exhaustive
checkers from the library plus local re-derivations where independence
matters.
"""

import math
import time
from fractions import Fraction

import numpy as np

from drlift.continuous import (
    g_table,
    hybrid_gap,
    lmo,
    lmo_enumeration,
    measured_continuous_greedy,
    multilinear_exact,
    round_fractional,
)
from drlift.decomposition import (
    decompose,
    decompose_refined,
    part_count_bound,
    verify_completeness,
)
from drlift.lattice import GroundCoordinates
from drlift.polymatroid import cardinality_rank, partition_rank, weighted_coverage_rank
from drlift.reduction import Cardinality, Polymatroid, build, lift_constraint
from drlift.solvers import (
    brute_force,
    brute_force_lattice,
    density_greedy,
    double_greedy_deterministic,
    double_greedy_randomized,
    lazy_greedy,
)
from drlift.submodular_check import check_lifted_submodular
from drlift.zoo import desk_instances, make_budget_allocation, make_concave_linear, make_nonmonotone_dr


def report(criterion: str, ok: bool, detail: str, t0: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"{status}  {criterion}: {detail}  [{time.perf_counter() - t0:.1f}s]")
    assert ok, f"{criterion}: {detail}"


def test_criterion_1_decomposition_bound_and_completeness():
    t0 = time.perf_counter()
    worst_slack = None
    for n in range(1, 4097):
        d = decompose(n)
        assert len(d) <= part_count_bound(n), n
        assert verify_completeness(d).ok, n
        slack = part_count_bound(n) - len(d)
        worst_slack = slack if worst_slack is None else min(worst_slack, slack)
    elapsed = time.perf_counter() - t0
    report(
        "criterion-1",
        elapsed < 10.0,
        f"all n <= 4096 complete with t <= 2*floor(log2 n)+1 (tightest slack {worst_slack})",
        t0,
    )


def test_criterion_2_refined_decomposition():
    t0 = time.perf_counter()
    checked = 0
    for n in range(1, 2049):
        for eps in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
            if eps * n < 1:
                continue
            r = decompose_refined(n, eps)
            assert all(a <= eps * n for a in r.parts), (n, eps)
            assert len(r) <= part_count_bound(n) + math.ceil(1 / eps), (n, eps)
            assert verify_completeness(r).ok, (n, eps)
            checked += 1
    elapsed = time.perf_counter() - t0
    report(
        "criterion-2",
        elapsed < 30.0,
        f"{checked} (n, eps) pairs: cap, count bound and completeness all hold",
        t0,
    )


def test_criterion_3_lifted_submodularity_exhaustive():
    t0 = time.perf_counter()
    suite = desk_instances()
    assert len(suite) >= 20
    for inst in suite:
        assert inst.gc.n <= 3 and all(b <= 8 for b in inst.gc.bounds)
        ri = build(inst.fn, inst.gc, "exact")
        result = check_lifted_submodular(ri)
        assert result.ok, f"{inst.name}: {result.detail}"
    elapsed = time.perf_counter() - t0
    report(
        "criterion-3",
        elapsed < 60.0,
        f"{len(suite)} certified instances: lifted g fully submodular (tau = 1e-9*scale)",
        t0,
    )


def test_criterion_4_optimum_preservation():
    t0 = time.perf_counter()
    suite = desk_instances()
    for inst in suite:
        ri = build(inst.fn, inst.gc, "exact")
        table = g_table(ri)
        set_opt = float(table.max())
        _, lattice_opt = brute_force_lattice(inst.fn, inst.gc)
        tol = 0.0 if inst.fn.exact else 1e-9 * max(1.0, abs(lattice_opt))
        assert abs(set_opt - lattice_opt) <= tol, inst.name
    elapsed = time.perf_counter() - t0
    report(
        "criterion-4",
        elapsed < 60.0,
        f"max g = max f on all {len(suite)} desk instances (exact families exactly)",
        t0,
    )


def test_criterion_5_double_greedy():
    t0 = time.perf_counter()
    suite = desk_instances()
    worst_det = math.inf
    worst_mean = math.inf
    for inst in suite:
        ri = build(inst.fn, inst.gc, "exact")
        opt = brute_force(ri).value
        if opt <= 0:
            continue
        det = double_greedy_deterministic(ri).value
        assert det >= (1 / 3 - 1e-9) * opt, inst.name
        worst_det = min(worst_det, det / opt)
        mean = sum(
            double_greedy_randomized(ri, seed=s).value for s in range(200)
        ) / 200
        assert mean >= 0.45 * opt, inst.name
        worst_mean = min(worst_mean, mean / opt)
    elapsed = time.perf_counter() - t0
    report(
        "criterion-5",
        elapsed < 60.0,
        f"det >= 1/3*OPT (worst {worst_det:.3f}), 200-seed mean >= 0.45*OPT "
        f"(worst {worst_mean:.3f}) on {len(suite)} instances",
        t0,
    )


def cardinality_cases():
    return [
        ("sqrt-64", make_concave_linear([1.0], [(1,)], "sqrt"), (64,), 20),
        (
            "sqrt-pair-16",
            make_concave_linear([1.0, 1.0], [(1, 1), (2, 0)], "sqrt"),
            (16, 16),
            14,
        ),
        (
            "coverage-888",
            make_budget_allocation(
                [1.0, 2.0, 1.5],
                [[0.2, 0.1, 0.0], [0.05, 0.3, 0.1], [0.0, 0.15, 0.25]],
            ),
            (8, 8, 8),
            12,
        ),
        (
            "log-pair-24",
            make_concave_linear([1.0, 0.5], [(1, 2), (3, 1)], "log1p"),
            (32, 16),
            24,
        ),
    ]


def test_criterion_6_density_and_lazy_greedy():
    t0 = time.perf_counter()
    eps = Fraction(1, 10)
    target = 1 - 1 / math.e - float(eps)
    worst = math.inf
    for name, fn, bounds, k in cardinality_cases():
        gc = GroundCoordinates(bounds)
        assert k > 1 / eps  # the small-weight regime under test
        ri = build(fn, gc, "refined", part_cap=eps * k)
        knap = lift_constraint(Cardinality(k), ri)
        _, opt = brute_force_lattice(fn, gc, Cardinality(k))
        dens = density_greedy(ri, knap, eps)
        lazy = lazy_greedy(ri, knap)
        for res, algo in ((dens, "density"), (lazy, "lazy")):
            assert res.value >= target * opt, (name, algo)
            assert sum(
                w for e, w in enumerate(knap.weights) if e in res.solution
            ) <= knap.budget + 1e-9
            worst = min(worst, res.value / opt)
    elapsed = time.perf_counter() - t0
    report(
        "criterion-6",
        elapsed < 120.0,
        f"density and lazy greedy >= (1-1/e-0.1)*OPT on {len(cardinality_cases())} "
        f"cardinality lifts (worst ratio {worst:.3f})",
        t0,
    )


def polymatroid_cases():
    cases = []
    fn = make_concave_linear([1.0, 1.0], [(1, 1), (2, 0)], "sqrt")
    gc = GroundCoordinates((3, 3))
    cases.append(("sqrt-card", fn, gc, cardinality_rank(4, gc.bounds), True))
    fn2 = make_concave_linear([1.0], [(2,)], "log1p")
    gc2 = GroundCoordinates((7,))
    cases.append(("log-card", fn2, gc2, cardinality_rank(3, gc2.bounds), True))
    fn3 = make_concave_linear([1.0, 0.7], [(1, 0), (1, 2)], "sqrt")
    gc3 = GroundCoordinates((3, 3))
    cases.append(
        ("sqrt-partition", fn3, gc3, partition_rank([[0], [1]], [2, 3], gc3.bounds), True)
    )
    fn4 = make_budget_allocation([1.0, 2.0], [[0.3, 0.1], [0.2, 0.4]])
    gc4 = GroundCoordinates((3, 3))
    cases.append(
        ("coverage-rank", fn4, gc4, weighted_coverage_rank([[0], [0, 1]], [3, 2]), True)
    )
    gc5 = GroundCoordinates((2, 2, 2))
    fn5 = make_nonmonotone_dr(2, gc5)
    cases.append(("nonmono-card", fn5, gc5, cardinality_rank(3, gc5.bounds), False))
    gc6 = GroundCoordinates((4, 2))
    fn6 = make_nonmonotone_dr(4, gc6)
    cases.append(("nonmono-part", fn6, gc6, partition_rank([[0], [1]], [3, 1], gc6.bounds), False))
    return cases


def random_feasible(ri, oracle, rng):
    y = rng.random(ri.size)
    x = ri.apply_m(y)
    lam = 1.0
    for s in oracle.subsets():
        if s:
            tot = x[list(s)].sum()
            if tot > 0:
                lam = min(lam, oracle(s) / tot)
    return y * min(lam, 1.0)


def grid_search_extension_max(ri, oracle, table, step=0.25):
    """Coarse independent search for the best feasible fractional value."""
    from itertools import product

    best = -math.inf
    levels = np.arange(0.0, 1.0 + 1e-9, step)
    for point in product(levels, repeat=ri.size):
        y = np.array(point)
        if not oracle.member(ri.apply_m(y), tol=1e-9):
            continue
        best = max(best, multilinear_exact(ri, y, table=table))
    return best


def test_criterion_7_continuous_pipeline():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    monotone_target = 1 - 1 / math.e - 0.05
    nonmono_target = 1 / math.e - 0.05
    details = []
    for name, fn, gc, oracle, monotone in polymatroid_cases():
        oracle.verify()
        ri = build(fn, gc, "exact")
        assert ri.size <= 8, name
        table = g_table(ri)

        # fractional ascent with exact marginals
        y = measured_continuous_greedy(ri, oracle, steps=100, samples=0, seed=0)
        gy = multilinear_exact(ri, y, table=table)

        # OPT_frac equals the constrained lattice optimum here: integral
        # points embed (subset_encoding) and rounding is value-preserving
        _, opt = brute_force_lattice(fn, gc, Polymatroid(oracle))
        if monotone:
            assert gy >= monotone_target * opt, (name, gy, opt)

        # rounding: feasible, integral, and never below the extension value
        x = round_fractional(ri, oracle, y)
        fx = ri.eval_image(x)
        assert fx >= gy - 1e-9, name
        assert oracle.member(x) and gc.contains(x), name
        end_target = monotone_target if monotone else nonmono_target
        assert fx >= end_target * opt - 1e-9, (name, fx, opt)

        # hybrid inequality on 100 random feasible points per instance
        for _ in range(100):
            yr = random_feasible(ri, oracle, rng)
            assert hybrid_gap(ri, yr, table=table) >= -1e-9, name

        # exact linear optimization equals the enumeration LP oracle
        for _ in range(4):
            w = rng.normal(size=ri.size)
            res = lmo(ri, oracle, w, check_certificate=True)
            _, enum_val = lmo_enumeration(ri, oracle, w)
            scale = max(1.0, float(np.abs(w).sum()))
            assert abs(res.value - enum_val) <= 1e-7 * scale, name
        details.append(f"{name} ok")

    # independent coarse grid cross-check of the OPT_frac stand-in on the
    # smallest monotone case: no grid point may beat the lattice optimum
    name, fn, gc, oracle, _ = polymatroid_cases()[1]
    ri = build(fn, gc, "exact")
    table = g_table(ri)
    _, opt = brute_force_lattice(fn, gc, Polymatroid(oracle))
    grid_best = grid_search_extension_max(ri, oracle, table, step=0.25)
    assert grid_best <= opt + 1e-9

    elapsed = time.perf_counter() - t0
    report(
        "criterion-7",
        elapsed < 600.0,
        f"{len(details)} polymatroid instances: ascent quality, value-preserving "
        "rounding, hybrid inequality (100 pts each), lmo == enumeration LP",
        t0,
    )


def test_criterion_8_scaling_study():
    t0 = time.perf_counter()
    from drlift.plotting import fit_linear, fit_proportional

    budgets = [2**k for k in range(4, 17)]
    log_calls, naive_calls = [], []
    for budget in budgets:
        gc = GroundCoordinates((budget,))
        for mode, sink in (("exact", log_calls), ("naive", naive_calls)):
            fn = make_concave_linear([1.0], [(1,)], "sqrt")
            ri = build(fn, gc, mode)
            start = ri.oracle_calls
            double_greedy_deterministic(ri)
            sink.append(ri.oracle_calls - start)
    arr_b = np.array(budgets, dtype=float)
    _, _, r2_log = fit_linear(np.log2(arr_b), np.array(log_calls, dtype=float))
    _, r2_naive = fit_proportional(arr_b, np.array(naive_calls, dtype=float))
    frac = log_calls[-1] / naive_calls[-1]
    ok = r2_log >= 0.95 and r2_naive >= 0.95 and frac < 0.01
    elapsed = time.perf_counter() - t0
    report(
        "criterion-8",
        ok and elapsed < 300.0,
        f"log fit R2={r2_log:.4f}, naive fit R2={r2_naive:.4f}, "
        f"calls at B=2^16: {log_calls[-1]} vs {naive_calls[-1]} "
        f"({100 * frac:.3f}% < 1%)",
        t0,
    )
