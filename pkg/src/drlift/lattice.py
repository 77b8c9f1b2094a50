"""Lattice function interface and exhaustive property validators.

Functions live on the integer box [0,B1] x ... x [0,Bn].  The validators
build the full value table (guarded by a domain-size bound) and check the
diminishing-returns and lattice-submodularity inequalities over every
comparable pair, reporting a concrete counterexample on failure.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .errors import PreconditionError, SizeGuardError

#: Default exhaustiveness bound on the domain size prod(B_i + 1).
DEFAULT_DOMAIN_BOUND = 10**6
#: Pairwise checks cost |domain|^2; keep their default domain smaller.
DEFAULT_PAIRWISE_DOMAIN_BOUND = 2000

Point = tuple[int, ...]


@dataclass(frozen=True)
class GroundCoordinates:
    """Coordinate labels and per-coordinate upper bounds of the box."""

    bounds: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.bounds) < 1:
            raise PreconditionError("at least one coordinate is required")
        if any(b < 0 for b in self.bounds):
            raise PreconditionError("bounds must be nonnegative integers")
        if not self.labels:
            object.__setattr__(
                self, "labels", tuple(f"x{i}" for i in range(len(self.bounds)))
            )
        elif len(self.labels) != len(self.bounds):
            raise PreconditionError("labels and bounds disagree in length")

    @property
    def n(self) -> int:
        return len(self.bounds)

    @property
    def domain_size(self) -> int:
        size = 1
        for b in self.bounds:
            size *= b + 1
        return size

    def contains(self, x: Point) -> bool:
        return len(x) == self.n and all(
            0 <= v <= b for v, b in zip(x, self.bounds)
        )

    def check_point(self, x: Point) -> Point:
        if not self.contains(x):
            raise PreconditionError(f"{x} outside the box {self.bounds}")
        return tuple(int(v) for v in x)

    def iter_points(self) -> Iterator[Point]:
        return itertools.product(*(range(b + 1) for b in self.bounds))

    def zero(self) -> Point:
        return (0,) * self.n

    def increment(self, x: Point, i: int) -> Point:
        """x + unit vector on coordinate i (bounds unchecked)."""
        return x[:i] + (x[i] + 1,) + x[i + 1 :]


class LatticeFunction:
    """Deterministic nonnegative evaluator with an observable call counter.

    The counter is the complexity currency for every scaling claim, so it
    increments by exactly 1 per evaluation and nothing else touches it.
    Increments are lock-protected, making concurrent evaluation safe.
    """

    def __init__(
        self,
        evaluator: Callable[[Point], float],
        *,
        monotone: bool,
        exact: bool = False,
        name: str = "f",
    ) -> None:
        self._evaluator = evaluator
        self.monotone = monotone
        #: True when values are integers computed without rounding error,
        #: letting validators compare without tolerance.
        self.exact = exact
        self.name = name
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def __call__(self, x: Point) -> float:
        with self._lock:
            self._calls += 1
        return self._evaluator(tuple(x))

    def __repr__(self) -> str:
        kind = "monotone" if self.monotone else "nonmonotone"
        return f"LatticeFunction({self.name}, {kind}, calls={self._calls})"


@dataclass(frozen=True)
class ValidationReport:
    """Boolean verdict plus a concrete counterexample when it fails."""

    ok: bool
    counterexample: tuple | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _value_table(
    fn: LatticeFunction, gc: GroundCoordinates, bound: int
) -> np.ndarray:
    if gc.domain_size > bound:
        raise SizeGuardError(
            f"domain size {gc.domain_size} exceeds exhaustiveness bound {bound}"
        )
    shape = tuple(b + 1 for b in gc.bounds)
    table = np.empty(shape, dtype=float)
    for x in gc.iter_points():
        table[x] = fn(x)
    return table


def _tolerance(fn: LatticeFunction, table: np.ndarray) -> float:
    if fn.exact:
        return 0.0
    spread = float(table.max() - table.min())
    return 1e-9 * max(1.0, spread)


def check_dr(
    fn: LatticeFunction,
    gc: GroundCoordinates,
    *,
    bound: int = DEFAULT_DOMAIN_BOUND,
) -> ValidationReport:
    """Exhaustively test diminishing returns.

    For every coordinate i and every comparable pair x <= y with room to
    increment, require marg_i(x) >= marg_i(y) - tol, where marg_i is the
    gain of one unit on coordinate i.  Implemented as a suffix-max sweep
    over the grid per coordinate, so the cost is linear in the table size
    instead of quadratic in comparable pairs.
    """
    table = _value_table(fn, gc, bound)
    tol = _tolerance(fn, table)
    for i in range(gc.n):
        if gc.bounds[i] == 0:
            continue
        take = [slice(None)] * gc.n
        drop = [slice(None)] * gc.n
        take[i] = slice(1, None)
        drop[i] = slice(0, -1)
        marg = table[tuple(take)] - table[tuple(drop)]
        upmax = marg.copy()
        # suffix max over the componentwise order: sweep each axis downward
        for axis in range(gc.n):
            if upmax.shape[axis] == 1:
                continue
            for k in range(upmax.shape[axis] - 2, -1, -1):
                front = [slice(None)] * gc.n
                back = [slice(None)] * gc.n
                front[axis] = slice(k, k + 1)
                back[axis] = slice(k + 1, k + 2)
                np.maximum(
                    upmax[tuple(front)], upmax[tuple(back)], out=upmax[tuple(front)]
                )
        bad = upmax > marg + tol
        if bad.any():
            x = tuple(int(v) for v in np.argwhere(bad)[0])
            y = _argmax_above(marg, x)
            return ValidationReport(
                False,
                (x, y, i),
                f"gain of +1 on coordinate {i} grows from {marg[x]:.12g} at "
                f"{x} to {marg[y]:.12g} at {y}",
            )
    return ValidationReport(True)


def _argmax_above(marg: np.ndarray, x: Point) -> Point:
    """Point y >= x maximizing marg over the upper box of x."""
    region = marg[tuple(slice(v, None) for v in x)]
    off = np.unravel_index(int(np.argmax(region)), region.shape)
    return tuple(int(v + o) for v, o in zip(x, off))


def check_lattice_submodular(
    fn: LatticeFunction,
    gc: GroundCoordinates,
    *,
    bound: int = DEFAULT_PAIRWISE_DOMAIN_BOUND,
) -> ValidationReport:
    """Exhaustively test f(x) + f(y) >= f(x v y) + f(x ^ y) over all pairs.

    Pairwise, so the domain guard is tighter than check_dr's.
    """
    table = _value_table(fn, gc, bound)
    tol = _tolerance(fn, table)
    flat = table.ravel()
    size = flat.size
    shape = table.shape
    coords = np.unravel_index(np.arange(size), shape)
    join = np.zeros((size, size), dtype=np.int64)
    meet = np.zeros((size, size), dtype=np.int64)
    for d in range(gc.n):
        c = coords[d].astype(np.int64)
        stride = int(np.prod(shape[d + 1 :], dtype=np.int64))
        join += np.maximum.outer(c, c) * stride
        meet += np.minimum.outer(c, c) * stride
    lhs = np.add.outer(flat, flat)
    rhs = flat[join] + flat[meet]
    bad = rhs > lhs + tol
    if bad.any():
        a, b = np.argwhere(bad)[0]
        x = tuple(int(v[a]) for v in coords)
        y = tuple(int(v[b]) for v in coords)
        return ValidationReport(
            False,
            (x, y),
            f"f({x}) + f({y}) < f(join) + f(meet) by "
            f"{float(rhs[a, b] - lhs[a, b]):.3g}",
        )
    return ValidationReport(True)


def check_monotone(
    fn: LatticeFunction,
    gc: GroundCoordinates,
    *,
    bound: int = DEFAULT_DOMAIN_BOUND,
) -> ValidationReport:
    """Exhaustively verify the declared monotone flag (all marginals >= -tol)."""
    table = _value_table(fn, gc, bound)
    tol = _tolerance(fn, table)
    for i in range(gc.n):
        if gc.bounds[i] == 0:
            continue
        take = [slice(None)] * gc.n
        drop = [slice(None)] * gc.n
        take[i] = slice(1, None)
        drop[i] = slice(0, -1)
        marg = table[tuple(take)] - table[tuple(drop)]
        bad = marg < -tol
        if bad.any():
            x = tuple(int(v) for v in np.argwhere(bad)[0])
            return ValidationReport(
                False, (x, i), f"f decreases by {-float(marg[x]):.3g} at {x}+e_{i}"
            )
    return ValidationReport(True)


def find_nonmonotone_witness(
    fn: LatticeFunction,
    gc: GroundCoordinates,
    *,
    bound: int = DEFAULT_DOMAIN_BOUND,
) -> tuple[Point, int] | None:
    """Point and coordinate where one increment strictly decreases f."""
    report = check_monotone(fn, gc, bound=bound)
    if report.ok:
        return None
    return report.counterexample


def lattice_brute_force(
    fn: LatticeFunction,
    gc: GroundCoordinates,
    feasible: Callable[[Point], bool] | None = None,
    *,
    bound: int = DEFAULT_DOMAIN_BOUND,
) -> tuple[Point, float]:
    """Exact maximum of f over the (optionally constrained) box by enumeration."""
    if gc.domain_size > bound:
        raise SizeGuardError(
            f"domain size {gc.domain_size} exceeds brute-force bound {bound}"
        )
    best_x: Point | None = None
    best_v = -np.inf
    for x in gc.iter_points():
        if feasible is not None and not feasible(x):
            continue
        v = fn(x)
        if v > best_v:
            best_v, best_x = v, x
    if best_x is None:
        raise PreconditionError("no feasible lattice point")
    return best_x, float(best_v)
