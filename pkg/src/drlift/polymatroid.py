"""Polymatroid rank oracles and their exhaustive verification.

A rank function rho maps coordinate subsets to nonnegative integers and
must be monotone, submodular and rho(empty) = 0.  The induced polytope
{x >= 0 : sum_{i in S} x_i <= rho(S) for all S} is downward closed, which
is what the fractional pipeline relies on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import PreconditionError, SizeGuardError

#: Constraint enumeration and verification refuse ground sets above this.
MAX_GROUND_SIZE = 12


@dataclass(frozen=True)
class PolymatroidOracle:
    """Rank function over subsets of range(n), given as a callable."""

    n: int
    rank: Callable[[frozenset[int]], int]
    name: str = "rank"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise PreconditionError("ground set must be nonempty")
        if self.n > MAX_GROUND_SIZE:
            raise SizeGuardError(
                f"|E| = {self.n} exceeds the enumeration guard {MAX_GROUND_SIZE}"
            )

    def __call__(self, subset: Iterable[int]) -> int:
        value = self.rank(frozenset(subset))
        if not isinstance(value, (int, np.integer)) or value < 0:
            raise PreconditionError(
                f"rank must return nonnegative integers, got {value!r}"
            )
        return int(value)

    def subsets(self) -> list[frozenset[int]]:
        ground = list(range(self.n))
        return [
            frozenset(c)
            for r in range(self.n + 1)
            for c in itertools.combinations(ground, r)
        ]

    def verify(self) -> None:
        """Exhaustively check rho(empty)=0, monotonicity and submodularity."""
        ranks = {s: self(s) for s in self.subsets()}
        if ranks[frozenset()] != 0:
            raise PreconditionError("rank of the empty set must be 0")
        for s, rs in ranks.items():
            for i in range(self.n):
                if i in s:
                    continue
                si = s | {i}
                if ranks[si] < rs:
                    raise PreconditionError(f"rank decreases from {set(s)} to {set(si)}")
                for j in range(self.n):
                    if j in si:
                        continue
                    gain_small = ranks[si] - rs
                    gain_large = ranks[si | {j}] - ranks[s | {j}]
                    if gain_large > gain_small:
                        raise PreconditionError(
                            f"rank is not submodular at {set(s)} with {i}, {j}"
                        )

    def member(self, x: Sequence[float], *, tol: float = 1e-9) -> bool:
        """Is x in the polymatroid polytope (nonnegativity + rank constraints)?"""
        arr = np.asarray(x, dtype=float)
        if arr.min() < -tol:
            return False
        for s in self.subsets():
            if s and arr[list(s)].sum() > self(s) + tol:
                return False
        return True


def cardinality_rank(k: int, bounds: Sequence[int], *, name: str | None = None) -> PolymatroidOracle:
    """rho(S) = min(K, sum of bounds over S): total mass capped at K."""
    if k < 0:
        raise PreconditionError("K must be nonnegative")
    b = tuple(int(v) for v in bounds)

    def rank(s: frozenset[int]) -> int:
        return min(k, sum(b[i] for i in s))

    return PolymatroidOracle(len(b), rank, name or f"cardinality-rank({k})")


def partition_rank(
    blocks: Sequence[Sequence[int]],
    capacities: Sequence[int],
    bounds: Sequence[int],
) -> PolymatroidOracle:
    """Per-block mass caps: rho(S) = sum_b min(K_b, bounded mass of S in block b)."""
    if len(blocks) != len(capacities):
        raise PreconditionError("one capacity per block is required")
    b = tuple(int(v) for v in bounds)
    blocks = [frozenset(int(i) for i in blk) for blk in blocks]
    seen: set[int] = set()
    for blk in blocks:
        if blk & seen:
            raise PreconditionError("blocks must be disjoint")
        seen |= blk
    if seen != set(range(len(b))):
        raise PreconditionError("blocks must cover every coordinate")

    def rank(s: frozenset[int]) -> int:
        return sum(
            min(int(cap), sum(b[i] for i in s & blk))
            for blk, cap in zip(blocks, capacities)
        )

    return PolymatroidOracle(len(b), rank, "partition-rank")


def weighted_coverage_rank(
    covers: Sequence[Sequence[int]],
    weights: Sequence[int],
) -> PolymatroidOracle:
    """rho(S) = total weight of targets covered by any coordinate in S."""
    cov = [frozenset(int(t) for t in row) for row in covers]
    w = [int(v) for v in weights]
    if any(v < 0 for v in w):
        raise PreconditionError("coverage weights must be nonnegative")
    targets = set().union(*cov) if cov else set()
    if targets and max(targets) >= len(w):
        raise PreconditionError("cover refers to a target without a weight")

    def rank(s: frozenset[int]) -> int:
        hit: set[int] = set()
        for i in s:
            hit |= cov[i]
        return sum(w[t] for t in hit)

    return PolymatroidOracle(len(cov), rank, "weighted-coverage")


def free_rank(bounds: Sequence[int]) -> PolymatroidOracle:
    """Vacuous polymatroid (rank = total bounded mass): box-only feasibility."""
    b = tuple(int(v) for v in bounds)

    def rank(s: frozenset[int]) -> int:
        return sum(b[i] for i in s)

    return PolymatroidOracle(len(b), rank, "free")
