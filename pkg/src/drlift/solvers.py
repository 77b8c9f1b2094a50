"""Set-submodular maximization on lifted instances, plus brute-force oracles.

All solvers work on a ReducedInstance, keep their own incremental image of
the current subset so each marginal costs one lattice evaluation, and
report the exact evaluation count they consumed.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .decomposition import RationalLike, as_fraction
from .errors import PreconditionError, SizeGuardError
from .lattice import GroundCoordinates, LatticeFunction, Point, lattice_brute_force
from .reduction import (
    Cardinality,
    Constraint,
    LiftedConstraint,
    LiftedKnapsack,
    ReducedInstance,
    build,
    constraint_feasible_lattice,
    lift_constraint,
)

#: Subset enumeration refuses lifted ground sets above this.
BRUTE_FORCE_LIMIT = 24


@dataclass(frozen=True)
class SolverResult:
    """Solution subset with its lattice image, value and cost accounting."""

    solution: frozenset[int]
    point: Point
    value: float
    oracle_calls: int
    rng_seed: int | None = None


def _image_add(x: list[int], ri: ReducedInstance, e: int) -> None:
    i, _ = ri.elements[e]
    x[i] += ri.part_values[e]


def _image_remove(x: list[int], ri: ReducedInstance, e: int) -> None:
    i, _ = ri.elements[e]
    x[i] -= ri.part_values[e]


def double_greedy_deterministic(ri: ReducedInstance) -> SolverResult:
    """Single-pass deterministic double greedy for unconstrained instances.

    Visits elements in lexicographic (coordinate, part) order; includes an
    element iff its include-gain is at least its exclude-gain (ties
    include).  Always returns at least 1/3 of the optimum.
    """
    start = ri.oracle_calls
    low = [0] * ri.gc.n
    high = list(ri.image_of(ri.full_mask()))
    low_val = ri.eval_image(tuple(low))
    high_val = ri.eval_image(tuple(high))
    chosen: set[int] = set()
    for e in range(ri.size):
        _image_add(low, ri, e)
        with_e = ri.eval_image(tuple(low))
        _image_remove(low, ri, e)
        _image_remove(high, ri, e)
        without_e = ri.eval_image(tuple(high))
        _image_add(high, ri, e)
        gain_in = with_e - low_val
        gain_out = without_e - high_val
        if gain_in >= gain_out:
            chosen.add(e)
            _image_add(low, ri, e)
            low_val = with_e
        else:
            _image_remove(high, ri, e)
            high_val = without_e
    return SolverResult(
        frozenset(chosen), tuple(low), low_val, ri.oracle_calls - start
    )


def double_greedy_randomized(ri: ReducedInstance, seed: int) -> SolverResult:
    """Randomized double greedy: include with probability a+/(a+ + b+).

    The 0/0 case resolves to include.  In expectation over the coin flips
    the value is at least half the unconstrained optimum; a fixed seed
    makes any single run reproducible bit for bit.
    """
    rng = random.Random(seed)
    start = ri.oracle_calls
    low = [0] * ri.gc.n
    high = list(ri.image_of(ri.full_mask()))
    low_val = ri.eval_image(tuple(low))
    high_val = ri.eval_image(tuple(high))
    chosen: set[int] = set()
    for e in range(ri.size):
        _image_add(low, ri, e)
        with_e = ri.eval_image(tuple(low))
        _image_remove(low, ri, e)
        _image_remove(high, ri, e)
        without_e = ri.eval_image(tuple(high))
        _image_add(high, ri, e)
        a = max(with_e - low_val, 0.0)
        b = max(without_e - high_val, 0.0)
        p = 1.0 if a + b == 0.0 else a / (a + b)
        if rng.random() < p:
            chosen.add(e)
            _image_add(low, ri, e)
            low_val = with_e
        else:
            _image_remove(high, ri, e)
            high_val = without_e
    return SolverResult(
        frozenset(chosen), tuple(low), low_val, ri.oracle_calls - start, seed
    )


def _require_small_weights(knap: LiftedKnapsack, epsilon: Fraction) -> None:
    cap = float(epsilon) * knap.budget
    for w in knap.weights:
        if w > cap * (1 + 1e-12):
            raise PreconditionError(
                f"weight {w} exceeds epsilon*budget = {cap}; "
                "rebuild the instance in refined mode with a matching cap"
            )


def _require_monotone(ri: ReducedInstance) -> None:
    if not ri.fn.monotone:
        raise PreconditionError("this solver requires a monotone objective")


def density_greedy(
    ri: ReducedInstance,
    knapsack: LiftedKnapsack,
    epsilon: RationalLike,
) -> SolverResult:
    """Descending-thresholds density greedy for a small-weight lifted knapsack.

    Thresholds sweep geometrically from the best singleton density down by
    (1 - eps') with eps' = eps/3, stopping at (eps'/n) of the start; at
    each level every fitting element whose marginal-per-weight clears the
    threshold is taken.  Requires a monotone objective and all weights at
    most epsilon*budget, the regime where the (1 - 1/e - eps) analysis
    applies.  Deterministic.
    """
    eps = as_fraction(epsilon)
    if not 0 < eps < 1:
        raise PreconditionError("epsilon must lie in (0, 1)")
    _require_monotone(ri)
    _require_small_weights(knapsack, eps)
    start = ri.oracle_calls
    x = [0] * ri.gc.n
    cur = ri.eval_image(tuple(x))
    chosen: set[int] = set()
    used = 0.0

    densities = []
    for e in range(ri.size):
        _image_add(x, ri, e)
        gain = ri.eval_image(tuple(x)) - cur
        _image_remove(x, ri, e)
        densities.append(gain / knapsack.weights[e])
    d_max = max(densities, default=0.0)
    if d_max <= 0:
        return SolverResult(frozenset(), tuple(x), cur, ri.oracle_calls - start)

    eps_prime = float(eps) / 3.0
    theta = d_max
    floor_theta = (eps_prime / ri.size) * d_max
    while theta >= floor_theta:
        for e in range(ri.size):
            if e in chosen:
                continue
            w = knapsack.weights[e]
            if used + w > knapsack.budget + 1e-12:
                continue
            _image_add(x, ri, e)
            gain = ri.eval_image(tuple(x)) - cur
            if gain / w >= theta:
                chosen.add(e)
                cur += gain
                used += w
            else:
                _image_remove(x, ri, e)
        theta *= 1.0 - eps_prime
    point = ri.image_of(chosen)
    return SolverResult(frozenset(chosen), point, cur, ri.oracle_calls - start)


def lazy_greedy(ri: ReducedInstance, knapsack: LiftedKnapsack) -> SolverResult:
    """Priority-queue greedy by marginal-per-weight with lazy re-evaluation.

    A popped element is re-evaluated once; if its fresh density still beats
    the next best stale bound it is taken, otherwise it is pushed back.
    Requires a monotone objective.  Deterministic (ties break on element id).
    """
    _require_monotone(ri)
    start = ri.oracle_calls
    x = [0] * ri.gc.n
    cur = ri.eval_image(tuple(x))
    chosen: set[int] = set()
    used = 0.0
    heap: list[tuple[float, int]] = []
    for e in range(ri.size):
        _image_add(x, ri, e)
        gain = ri.eval_image(tuple(x)) - cur
        _image_remove(x, ri, e)
        heapq.heappush(heap, (-gain / knapsack.weights[e], e))
    while heap:
        neg_density, e = heapq.heappop(heap)
        w = knapsack.weights[e]
        if used + w > knapsack.budget + 1e-12:
            continue
        _image_add(x, ri, e)
        gain = ri.eval_image(tuple(x)) - cur
        density = gain / w
        if gain <= 0:
            _image_remove(x, ri, e)
            continue
        if not heap or density >= -heap[0][0]:
            chosen.add(e)
            cur += gain
            used += w
        else:
            _image_remove(x, ri, e)
            heapq.heappush(heap, (-density, e))
    return SolverResult(frozenset(chosen), tuple(x), cur, ri.oracle_calls - start)


def brute_force(
    ri: ReducedInstance,
    constraint: LiftedConstraint | None = None,
    *,
    limit: int = BRUTE_FORCE_LIMIT,
) -> SolverResult:
    """Exact optimum over all feasible subsets (ground-truth oracle).

    Enumerates masks in Gray-code order so each step updates the image in
    O(1); strict improvement keeps the result deterministic.
    """
    if ri.size > limit:
        raise SizeGuardError(
            f"|E'| = {ri.size} exceeds the brute-force limit {limit}"
        )
    start = ri.oracle_calls
    x = [0] * ri.gc.n
    best_mask, best_val = 0, -math.inf
    weight = 0.0
    if _feasible_mask(constraint, ri, 0, weight):
        best_mask, best_val = 0, ri.eval_image(tuple(x))
    mask = 0
    for k in range(1, 1 << ri.size):
        e = (k & -k).bit_length() - 1  # Gray code: flip lowest set bit of k
        if mask >> e & 1:
            _image_remove(x, ri, e)
            mask &= ~(1 << e)
            if isinstance(constraint, LiftedKnapsack):
                weight -= constraint.weights[e]
        else:
            _image_add(x, ri, e)
            mask |= 1 << e
            if isinstance(constraint, LiftedKnapsack):
                weight += constraint.weights[e]
        if not _feasible_mask(constraint, ri, mask, weight):
            continue
        val = ri.eval_image(tuple(x))
        if val > best_val:
            best_mask, best_val = mask, val
    solution = frozenset(e for e in range(ri.size) if best_mask >> e & 1)
    return SolverResult(
        solution, ri.image_of(best_mask), best_val, ri.oracle_calls - start
    )


def _feasible_mask(
    constraint: LiftedConstraint | None,
    ri: ReducedInstance,
    mask: int,
    weight: float,
) -> bool:
    if constraint is None:
        return True
    if isinstance(constraint, LiftedKnapsack):
        return weight <= constraint.budget + 1e-9
    return constraint.feasible(mask)


def brute_force_lattice(
    fn: LatticeFunction,
    gc: GroundCoordinates,
    constraint: Constraint | None = None,
    *,
    bound: int = 10**6,
) -> tuple[Point, float]:
    """Exact lattice optimum by box enumeration (the x-side oracle)."""
    feasible = None
    if constraint is not None:
        feasible = lambda x: constraint_feasible_lattice(constraint, x)
    return lattice_brute_force(fn, gc, feasible, bound=bound)


def solve_cardinality(
    fn: LatticeFunction,
    gc: GroundCoordinates,
    k: int,
    epsilon: RationalLike,
    *,
    algorithm: str = "density",
) -> tuple[SolverResult, ReducedInstance]:
    """Cardinality-constrained maximization via the appropriate reduction.

    Budgets above 1/epsilon go through the part-capped refined lift so the
    lifted knapsack has small weights; smaller budgets use the trivial
    unit-copies lift, where every weight is 1 and the same greedy applies.
    """
    eps = as_fraction(epsilon)
    if k < 1:
        raise PreconditionError("cardinality budget must be >= 1")
    if k > 1 / eps:
        ri = build(fn, gc, "refined", epsilon=eps, part_cap=eps * k)
    else:
        ri = build(fn, gc, "naive")
    knap = lift_constraint(Cardinality(k), ri)
    assert isinstance(knap, LiftedKnapsack)
    if algorithm == "density":
        if k > 1 / eps:
            result = density_greedy(ri, knap, eps)
        else:
            result = lazy_greedy(ri, knap)  # unit weights: plain greedy
    elif algorithm == "lazy":
        result = lazy_greedy(ri, knap)
    else:
        raise PreconditionError(f"unknown algorithm {algorithm!r}")
    return result, ri
