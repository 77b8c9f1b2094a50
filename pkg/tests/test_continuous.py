import math

import numpy as np
import pytest

from drlift.continuous import (
    g_table,
    hybrid_gap,
    lmo,
    lmo_enumeration,
    marginal_weights,
    maximize_polymatroid,
    measured_continuous_greedy,
    multilinear_exact,
    multilinear_sample,
    residual_extension,
    round_fractional,
    rounding_state,
)
from drlift.errors import PreconditionError, SizeGuardError
from drlift.lattice import GroundCoordinates
from drlift.polymatroid import (
    PolymatroidOracle,
    cardinality_rank,
    free_rank,
    partition_rank,
    weighted_coverage_rank,
)
from drlift.reduction import Polymatroid, build, eval_g
from drlift.solvers import brute_force_lattice
from drlift.zoo import make_concave_linear, make_nonmonotone_dr


def pair_instance():
    fn = make_concave_linear([1.0, 1.0], [(1, 1), (2, 0)], "sqrt")
    gc = GroundCoordinates((3, 3))
    return build(fn, gc, "exact"), gc


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


class TestPolymatroidOracles:
    def test_builtins_verify(self):
        bounds = (3, 3, 2)
        cardinality_rank(4, bounds).verify()
        partition_rank([[0, 1], [2]], [3, 2], bounds).verify()
        weighted_coverage_rank([[0, 1], [1], [2]], [2, 1, 3]).verify()
        free_rank(bounds).verify()

    def test_bad_rank_rejected(self):
        bad = PolymatroidOracle(2, lambda s: 1 if s else 1)  # rho(empty) != 0
        with pytest.raises(PreconditionError):
            bad.verify()

    def test_non_submodular_rejected(self):
        # strictly supermodular on pairs
        bad = PolymatroidOracle(2, lambda s: {0: 0, 1: 1, 2: 5}[len(s)])
        with pytest.raises(PreconditionError):
            bad.verify()

    def test_membership(self):
        oracle = cardinality_rank(3, (3, 3))
        assert oracle.member([1.5, 1.5])
        assert not oracle.member([2.5, 1.0])
        assert not oracle.member([-0.1, 0.0])


class TestMultilinearExact:
    def test_agrees_on_vertices(self):
        ri, _ = pair_instance()
        tbl = g_table(ri)
        for mask in range(1 << ri.size):
            y = np.array([(mask >> e) & 1 for e in range(ri.size)], dtype=float)
            assert multilinear_exact(ri, y, table=tbl) == pytest.approx(
                eval_g(ri, mask)
            )

    def test_zero_point(self):
        ri, _ = pair_instance()
        assert multilinear_exact(ri, np.zeros(ri.size)) == eval_g(ri, 0)

    def test_modular_linearity(self):
        fn = make_concave_linear([1.0, 2.0], [(1, 0), (0, 1)], "min-cap", cap=99)
        ri = build(fn, GroundCoordinates((2, 2)), "exact")
        rng = np.random.default_rng(3)
        base = eval_g(ri, 0)
        singles = [eval_g(ri, [e]) - base for e in range(ri.size)]
        for _ in range(20):
            y = rng.random(ri.size)
            expected = base + float(np.dot(y, singles))
            assert multilinear_exact(ri, y) == pytest.approx(expected)

    def test_size_guard(self):
        fn = make_concave_linear([1.0], [(1,)], "sqrt")
        ri = build(fn, GroundCoordinates((30,)), "naive")
        with pytest.raises(SizeGuardError):
            multilinear_exact(ri, np.zeros(ri.size))


class TestMultilinearSample:
    def test_integral_point_zero_variance(self):
        ri, _ = pair_instance()
        y = np.ones(ri.size)
        est = multilinear_sample(ri, y, samples=50, seed=1)
        assert est.stderr == 0.0
        assert est.mean == pytest.approx(eval_g(ri, ri.full_mask()))

    def test_agrees_with_exact_within_four_stderr(self):
        ri, _ = pair_instance()
        rng = np.random.default_rng(5)
        tbl = g_table(ri)
        for trial in range(5):
            y = rng.random(ri.size)
            exact = multilinear_exact(ri, y, table=tbl)
            est = multilinear_sample(ri, y, samples=4000, seed=trial)
            assert abs(est.mean - exact) <= 4 * max(est.stderr, 1e-12)

    def test_seed_determinism(self):
        ri, _ = pair_instance()
        y = np.full(ri.size, 0.4)
        a = multilinear_sample(ri, y, samples=100, seed=9)
        b = multilinear_sample(ri, y, samples=100, seed=9)
        assert a == b

    def test_stderr_shrinks_with_samples(self):
        ri, _ = pair_instance()
        y = np.full(ri.size, 0.5)
        small = [multilinear_sample(ri, y, 400, seed=s).stderr for s in range(8)]
        big = [multilinear_sample(ri, y, 1600, seed=s).stderr for s in range(8)]
        ratio = np.mean(small) / np.mean(big)
        assert 1.4 <= ratio <= 2.6  # ~2 expected, +-30%


class TestLmo:
    def test_nonpositive_weights_give_origin(self):
        ri, gc = pair_instance()
        oracle = cardinality_rank(3, gc.bounds)
        res = lmo(ri, oracle, -np.ones(ri.size))
        assert np.allclose(res.y, 0.0)
        assert res.value == pytest.approx(0.0)

    def test_box_only_picks_positive_weights(self):
        ri, gc = pair_instance()
        oracle = free_rank(gc.bounds)
        w = np.array([1.0, -1.0, 2.0, 0.5, -3.0, 1.0])[: ri.size]
        res = lmo(ri, oracle, w)
        assert np.allclose(res.y, (w > 0).astype(float))

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(11)
        ri, gc = pair_instance()
        oracles = [
            cardinality_rank(3, gc.bounds),
            partition_rank([[0], [1]], [2, 2], gc.bounds),
        ]
        for oracle in oracles:
            for _ in range(6):
                w = rng.normal(size=ri.size)
                res = lmo(ri, oracle, w)
                _, enum_val = lmo_enumeration(ri, oracle, w)
                scale = max(1.0, float(np.abs(w).sum()))
                assert res.value == pytest.approx(enum_val, abs=1e-7 * scale)

    def test_dual_certificate_validated(self):
        ri, gc = pair_instance()
        oracle = cardinality_rank(2, gc.bounds)
        rng = np.random.default_rng(13)
        for _ in range(5):
            lmo(ri, oracle, rng.normal(size=ri.size), check_certificate=True)

    def test_feasibility_of_output(self):
        ri, gc = pair_instance()
        oracle = cardinality_rank(3, gc.bounds)
        rng = np.random.default_rng(17)
        for _ in range(5):
            res = lmo(ri, oracle, rng.normal(size=ri.size))
            assert oracle.member(ri.apply_m(res.y), tol=1e-7)


class TestMarginalWeights:
    def test_exact_matches_definition(self):
        ri, _ = pair_instance()
        rng = np.random.default_rng(23)
        tbl = g_table(ri)
        y = rng.random(ri.size)
        w = marginal_weights(ri, y, table=tbl)
        # independent computation straight from the definition: R draws
        # every coordinate, and masks already containing e contribute 0
        for e in range(ri.size):
            total = 0.0
            for mask in range(1 << ri.size):
                prob = 1.0
                for k in range(ri.size):
                    prob *= y[k] if mask >> k & 1 else 1.0 - y[k]
                if not mask >> e & 1:
                    total += prob * (tbl[mask | (1 << e)] - tbl[mask])
            assert w[e] == pytest.approx(total)

    def test_sampled_close_to_exact(self):
        ri, _ = pair_instance()
        y = np.full(ri.size, 0.3)
        exact = marginal_weights(ri, y, table=g_table(ri))
        sampled = marginal_weights(
            ri, y, samples=3000, rng=np.random.default_rng(1)
        )
        assert np.allclose(exact, sampled, atol=0.12)


class TestMeasuredContinuousGreedy:
    def test_modular_box_only_approaches_one(self):
        fn = make_concave_linear([1.0, 2.0], [(1, 0), (0, 1)], "min-cap", cap=99)
        gc = GroundCoordinates((2, 2))
        ri = build(fn, gc, "exact")
        oracle = free_rank(gc.bounds)
        y = measured_continuous_greedy(ri, oracle, steps=400, seed=0)
        assert y.min() > 1 - math.exp(-1) - 0.05  # damped ascent saturates

    def test_monotone_guarantee_against_fractional_opt(self):
        ri, gc = pair_instance()
        oracle = cardinality_rank(4, gc.bounds)
        y = measured_continuous_greedy(ri, oracle, steps=100, seed=0)
        value = multilinear_exact(ri, y)
        _, opt = brute_force_lattice(ri.fn, gc, Polymatroid(oracle))
        assert value >= (1 - 1 / math.e - 0.05) * opt

    def test_feasible_at_every_step(self):
        # check_feasibility raises inside if violated; also verify the end
        ri, gc = pair_instance()
        oracle = partition_rank([[0], [1]], [2, 3], gc.bounds)
        y = measured_continuous_greedy(
            ri, oracle, steps=50, seed=2, check_feasibility=True
        )
        assert oracle.member(ri.apply_m(y), tol=1e-7)

    def test_sampled_mode_runs(self):
        ri, gc = pair_instance()
        oracle = cardinality_rank(3, gc.bounds)
        y = measured_continuous_greedy(ri, oracle, steps=20, samples=60, seed=3)
        assert oracle.member(ri.apply_m(y), tol=1e-7)


class TestRounding:
    def test_integral_input_unchanged(self):
        ri, gc = pair_instance()
        oracle = cardinality_rank(4, gc.bounds)
        y = np.zeros(ri.size)
        y[0] = 1.0
        x = round_fractional(ri, oracle, y)
        assert x == ri.image_of([0])

    def test_never_loses_extension_value(self):
        ri, gc = pair_instance()
        oracle = cardinality_rank(4, gc.bounds)
        rng = np.random.default_rng(31)
        tbl = g_table(ri)
        for _ in range(40):
            y = random_feasible(ri, oracle, rng)
            x = round_fractional(ri, oracle, y)
            fx = ri.eval_image(x)
            gy = multilinear_exact(ri, y, table=tbl)
            assert fx >= gy - 1e-9
            assert oracle.member(x)
            assert ri.gc.contains(x)

    def test_infeasible_input_rejected(self):
        ri, gc = pair_instance()
        oracle = cardinality_rank(2, gc.bounds)
        with pytest.raises(PreconditionError):
            round_fractional(ri, oracle, np.ones(ri.size))

    def test_rounding_state_split(self):
        ri, _ = pair_instance()
        y = np.full(ri.size, 0.6)
        st = rounding_state(ri, y)
        assert np.allclose(st.z + st.v, st.x)
        assert (st.v >= 0).all() and (st.v <= 1).all()


class TestHybridInequality:
    def test_on_random_feasible_points(self):
        rng = np.random.default_rng(37)
        cases = []
        ri, gc = pair_instance()
        cases.append((ri, cardinality_rank(4, gc.bounds)))
        fn2 = make_nonmonotone_dr(4, GroundCoordinates((4, 2)))
        gc2 = GroundCoordinates((4, 2))
        cases.append((build(fn2, gc2, "exact"), cardinality_rank(3, gc2.bounds)))
        for ri_c, oracle in cases:
            tbl = g_table(ri_c)
            for _ in range(100):
                y = random_feasible(ri_c, oracle, rng)
                assert hybrid_gap(ri_c, y, table=tbl) >= -1e-9

    def test_residual_extension_concave_along_coordinates(self):
        # extend H along one coordinate across integer boundaries: the
        # increments of s -> E[f(x with x_i = s)] must be nonincreasing
        ri, gc = pair_instance()
        rng = np.random.default_rng(41)
        for i in range(gc.n):
            base = rng.random(gc.n) * (np.array(gc.bounds) - 1)

            def along(s: float) -> float:
                x = base.copy()
                x[i] = s
                z = np.floor(x + 1e-12).astype(int)
                v = x - z
                return residual_extension(ri, tuple(z), v)

            grid = np.arange(0, gc.bounds[i] + 0.25, 0.25)
            vals = [along(s) for s in grid]
            diffs = np.diff(vals)
            assert (np.diff(diffs) <= 1e-9).all()


class TestEndToEnd:
    def test_monotone_pipeline(self):
        ri, gc = pair_instance()
        oracle = cardinality_rank(4, gc.bounds)
        x, value, y = maximize_polymatroid(ri, oracle, steps=100, seed=0)
        _, opt = brute_force_lattice(ri.fn, gc, Polymatroid(oracle))
        assert value >= (1 - 1 / math.e - 0.05) * opt - 1e-9
        assert oracle.member(x)

    def test_nonmonotone_pipeline(self):
        gc = GroundCoordinates((2, 2, 2))
        fn = make_nonmonotone_dr(2, gc)
        ri = build(fn, gc, "exact")
        oracle = cardinality_rank(3, gc.bounds)
        x, value, y = maximize_polymatroid(ri, oracle, steps=100, seed=0)
        _, opt = brute_force_lattice(fn, gc, Polymatroid(oracle))
        assert value >= (1 / math.e - 0.05) * opt - 1e-9
