"""Lift a lattice instance to a set-function instance and back.

Each coordinate's bound is decomposed into parts; the lifted ground set
has one element per part.  Selecting a subset S encodes the lattice point
x = M(chi_S) with x_i the sum of chosen parts on coordinate i, and the
lifted objective is g(S) = f(M(chi_S)).  Constraints translate alongside:
cardinality and knapsack become lifted knapsacks, polymatroids become
membership of M(y) in the original polytope.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .decomposition import (
    Decomposition,
    RationalLike,
    as_fraction,
    decompose,
    decompose_capped,
    decompose_refined,
    naive_copies,
    subset_for,
)
from .errors import PreconditionError
from .lattice import GroundCoordinates, LatticeFunction, Point
from .polymatroid import PolymatroidOracle

SubsetLike = Union[int, Iterable[int]]

REDUCTION_MODES = ("exact", "refined", "naive")


@dataclass(frozen=True)
class Cardinality:
    """sum_i x_i <= K"""

    k: int


@dataclass(frozen=True)
class Knapsack:
    """sum_i c_i * x_i <= K"""

    costs: tuple[float, ...]
    k: float


@dataclass(frozen=True)
class Polymatroid:
    """x in the polytope of a rank oracle (plus the box, always)."""

    oracle: PolymatroidOracle


Constraint = Union[Cardinality, Knapsack, Polymatroid]


@dataclass(frozen=True)
class LiftedKnapsack:
    """Knapsack over the lifted ground set: sum of weights(S) <= budget."""

    weights: tuple[float, ...]
    budget: float

    def weight(self, subset: SubsetLike) -> float:
        if isinstance(subset, int):
            total, mask, e = 0.0, subset, 0
            while mask:
                if mask & 1:
                    total += self.weights[e]
                mask >>= 1
                e += 1
            return total
        return sum(self.weights[e] for e in subset)

    def feasible(self, subset: SubsetLike, *, tol: float = 1e-9) -> bool:
        return self.weight(subset) <= self.budget + tol


@dataclass(frozen=True)
class LiftedPolytope:
    """Membership oracle for {y : M(y) in P}, used by the fractional pipeline."""

    instance: "ReducedInstance"
    oracle: PolymatroidOracle

    def feasible(self, subset: SubsetLike, *, tol: float = 1e-9) -> bool:
        x = self.instance.image_of(subset)
        return self.oracle.member(x, tol=tol)

    def feasible_fractional(self, y: Sequence[float], *, tol: float = 1e-9) -> bool:
        arr = np.asarray(y, dtype=float)
        if arr.min() < -tol or arr.max() > 1 + tol:
            return False
        return self.oracle.member(self.instance.apply_m(arr), tol=tol)


LiftedConstraint = Union[LiftedKnapsack, LiftedPolytope]


class ReducedInstance:
    """The lifted set-function instance: ground set, linear map, evaluator.

    Immutable after construction; evaluation delegates to exactly one call
    of the underlying lattice function per distinct query (an optional
    cache keyed by the integer image can short-circuit repeats, with hits
    counted separately so oracle accounting stays honest).
    """

    def __init__(
        self,
        fn: LatticeFunction,
        gc: GroundCoordinates,
        decomps: Sequence[Decomposition],
        mode: str,
        *,
        memoize: bool = False,
    ) -> None:
        self.fn = fn
        self.gc = gc
        self.decomps = tuple(decomps)
        self.mode = mode
        self.elements: tuple[tuple[int, int], ...] = tuple(
            (i, j) for i, d in enumerate(self.decomps) for j in range(len(d.parts))
        )
        self.part_values: tuple[int, ...] = tuple(
            self.decomps[i].parts[j] for (i, j) in self.elements
        )
        self._coord_of = tuple(i for i, _ in self.elements)
        self._memo: dict[Point, float] | None = {} if memoize else None
        self.cache_hits = 0

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def oracle_calls(self) -> int:
        return self.fn.calls

    # -- the linear map M and its adjoint -------------------------------

    def image_of(self, subset: SubsetLike) -> Point:
        """M(chi_S): lattice point encoded by an element subset."""
        x = [0] * self.gc.n
        if isinstance(subset, int):
            mask, e = subset, 0
            while mask:
                if mask & 1:
                    x[self._coord_of[e]] += self.part_values[e]
                mask >>= 1
                e += 1
        else:
            for e in subset:
                x[self._coord_of[e]] += self.part_values[e]
        return tuple(x)

    def apply_m(self, y: Sequence[float]) -> np.ndarray:
        """M(y) for fractional y: x_i = sum_j y_{i,j} * a_{i,j}."""
        arr = np.asarray(y, dtype=float)
        if arr.shape != (self.size,):
            raise PreconditionError(f"expected a vector of length {self.size}")
        x = np.zeros(self.gc.n)
        np.add.at(x, np.array(self._coord_of), arr * np.array(self.part_values, dtype=float))
        return x

    def apply_m_adjoint(self, v: Sequence[float]) -> np.ndarray:
        """M*(v): (M* v)_{i,j} = a_{i,j} * v_i."""
        arr = np.asarray(v, dtype=float)
        if arr.shape != (self.gc.n,):
            raise PreconditionError(f"expected a vector of length {self.gc.n}")
        return arr[np.array(self._coord_of)] * np.array(self.part_values, dtype=float)

    # -- evaluation ------------------------------------------------------

    def eval_image(self, x: Point) -> float:
        if self._memo is not None:
            cached = self._memo.get(x)
            if cached is not None:
                self.cache_hits += 1
                return cached
        value = self.fn(x)
        if self._memo is not None:
            self._memo[x] = value
        return value

    def eval_subset(self, subset: SubsetLike) -> float:
        return self.eval_image(self.image_of(subset))

    def map_back(self, subset_or_y: SubsetLike | Sequence[float]) -> Point | np.ndarray:
        """Pull a lifted solution back to the lattice.

        Integer masks and iterables of element ids map to integral lattice
        points; float vectors (numpy arrays, or sequences containing
        non-integers) are treated as fractional and go through M directly.
        """
        if isinstance(subset_or_y, (int, np.integer)):
            return self.image_of(int(subset_or_y))
        if isinstance(subset_or_y, np.ndarray):
            return self.apply_m(subset_or_y)
        items = list(subset_or_y)
        if all(isinstance(e, (int, np.integer)) for e in items):
            return self.image_of(items)
        return self.apply_m(np.asarray(items, dtype=float))

    def subset_encoding(self, x: Point) -> frozenset[int]:
        """Some element subset S with M(chi_S) = x, via per-coordinate certificates."""
        x = self.gc.check_point(x)
        chosen: set[int] = set()
        offset = 0
        for i, d in enumerate(self.decomps):
            for j in subset_for(d, x[i]):
                chosen.add(offset + j)
            offset += len(d.parts)
        return frozenset(chosen)

    def full_mask(self) -> int:
        return (1 << self.size) - 1


def build(
    fn: LatticeFunction,
    gc: GroundCoordinates,
    mode: str = "exact",
    *,
    epsilon: RationalLike | None = None,
    part_cap: RationalLike | None = None,
    memoize: bool = False,
) -> ReducedInstance:
    """Construct the lifted instance for (f, bounds).

    mode "exact" uses the logarithmic decomposition, "refined" additionally
    caps parts (at epsilon*B_i, or at the absolute part_cap when given),
    and "naive" uses one unit element per budget unit.  Zero-bound
    coordinates are dropped with a warning before lifting.
    """
    if mode not in REDUCTION_MODES:
        raise PreconditionError(f"mode must be one of {REDUCTION_MODES}")
    keep = [i for i, b in enumerate(gc.bounds) if b >= 1]
    if not keep:
        raise PreconditionError("all coordinates have zero bounds")
    if len(keep) < gc.n:
        dropped = [gc.labels[i] for i in range(gc.n) if gc.bounds[i] == 0]
        warnings.warn(f"dropping zero-bound coordinates {dropped}", stacklevel=2)
        inner_fn = fn
        full_n = gc.n

        def padded(x: Point, _keep=tuple(keep), _n=full_n) -> float:
            full = [0] * _n
            for pos, i in enumerate(_keep):
                full[i] = x[pos]
            return inner_fn._evaluator(tuple(full))

        fn = LatticeFunction(
            padded, monotone=fn.monotone, exact=fn.exact, name=fn.name
        )
        gc = GroundCoordinates(
            tuple(gc.bounds[i] for i in keep), tuple(gc.labels[i] for i in keep)
        )

    decomps: list[Decomposition] = []
    label = mode_label(mode, epsilon)
    for b in gc.bounds:
        if mode == "exact":
            decomps.append(decompose(b))
        elif mode == "naive":
            decomps.append(naive_copies(b))
        else:
            if part_cap is not None:
                decomps.append(decompose_capped(b, as_fraction(part_cap)))
            elif epsilon is not None:
                decomps.append(decompose_refined(b, epsilon))
            else:
                raise PreconditionError("refined mode needs epsilon or part_cap")
    return ReducedInstance(fn, gc, decomps, label, memoize=memoize)


def mode_label(mode: str, epsilon: RationalLike | None = None) -> str:
    if mode == "exact":
        return "exact-log"
    if mode == "naive":
        return "naive-copies"
    if epsilon is not None:
        return f"refined-log({as_fraction(epsilon)})"
    return "refined-log"


def eval_g(ri: ReducedInstance, subset: SubsetLike) -> float:
    """g(S) = f(M(chi_S)); exactly one lattice evaluation (modulo the cache)."""
    return ri.eval_subset(subset)


def lift_constraint(constraint: Constraint, ri: ReducedInstance) -> LiftedConstraint:
    """Translate a lattice constraint onto the lifted ground set."""
    if isinstance(constraint, Cardinality):
        if constraint.k < 1:
            raise PreconditionError("cardinality budget must be >= 1")
        weights = tuple(float(a) for a in ri.part_values)
        return LiftedKnapsack(weights, float(constraint.k))
    if isinstance(constraint, Knapsack):
        if len(constraint.costs) != ri.gc.n:
            raise PreconditionError("one cost per coordinate is required")
        if any(c < 0 for c in constraint.costs):
            raise PreconditionError("knapsack costs must be nonnegative")
        weights = tuple(
            float(constraint.costs[i]) * a
            for (i, _), a in zip(ri.elements, ri.part_values)
        )
        return LiftedKnapsack(weights, float(constraint.k))
    if isinstance(constraint, Polymatroid):
        if constraint.oracle.n != ri.gc.n:
            raise PreconditionError("rank oracle ground set must match coordinates")
        return LiftedPolytope(ri, constraint.oracle)
    raise PreconditionError(f"unknown constraint {constraint!r}")


def constraint_feasible_lattice(constraint: Constraint, x: Point) -> bool:
    """Feasibility of a lattice point under the original constraint."""
    if isinstance(constraint, Cardinality):
        return sum(x) <= constraint.k
    if isinstance(constraint, Knapsack):
        return sum(c * v for c, v in zip(constraint.costs, x)) <= constraint.k + 1e-9
    if isinstance(constraint, Polymatroid):
        return constraint.oracle.member(x)
    raise PreconditionError(f"unknown constraint {constraint!r}")
