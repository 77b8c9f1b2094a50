"""Certified test-function families.

Every constructor returns a LatticeFunction that is diminishing-returns
submodular by construction (concave scalar shapes composed with
nonnegative linear forms, plus separable concave terms), and the desk
suite re-certifies each instance with the exhaustive validator before
handing it to tests.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

from .errors import PreconditionError
from .lattice import (
    GroundCoordinates,
    LatticeFunction,
    Point,
    check_dr,
    find_nonmonotone_witness,
    lattice_brute_force,
)

SHAPES = ("sqrt", "log1p", "min-cap")


def _shape_fn(shape: str, cap: float | None):
    if shape == "sqrt":
        return math.sqrt
    if shape == "log1p":
        return math.log1p
    if shape == "min-cap":
        if cap is None:
            raise PreconditionError("min-cap needs a cap value")
        return lambda s: min(s, cap)
    raise PreconditionError(f"unknown shape {shape!r}; pick one of {SHAPES}")


def parse_shape(text: str) -> tuple[str, float | None]:
    """Parse "sqrt", "log1p" or "min-cap(2)" into (name, parameter)."""
    text = text.strip()
    if text.endswith(")") and "(" in text:
        name, arg = text[:-1].split("(", 1)
        return name.strip(), float(arg)
    return text, None


def make_concave_linear(
    weights: Sequence[float],
    directions: Sequence[Sequence[int]],
    shape: str,
    *,
    cap: float | None = None,
    name: str | None = None,
) -> LatticeFunction:
    """f(x) = sum_j w_j * phi(<c_j, x>) with concave nondecreasing phi.

    Nonnegative weights and directions make f monotone and DR-submodular
    regardless of the (concave) shape choice.
    """
    if shape.endswith(")"):
        shape, cap = parse_shape(shape)
    w = [float(v) for v in weights]
    dirs = [tuple(int(v) for v in c) for c in directions]
    if len(w) != len(dirs):
        raise PreconditionError("weights and directions disagree in length")
    if any(v < 0 for v in w) or any(v < 0 for c in dirs for v in c):
        raise PreconditionError("weights and directions must be nonnegative")
    phi = _shape_fn(shape, cap)
    exact = shape == "min-cap" and (cap is None or float(cap).is_integer())

    def evaluator(x: Point) -> float:
        return sum(
            wj * phi(sum(cj * xi for cj, xi in zip(c, x)))
            for wj, c in zip(w, dirs)
        )

    label = name or f"concave-linear[{shape}]"
    return LatticeFunction(evaluator, monotone=True, exact=exact, name=label)


def make_budget_allocation(
    target_weights: Sequence[float],
    reach_probs: Sequence[Sequence[float]],
    *,
    name: str = "budget-allocation",
) -> LatticeFunction:
    """Expected weighted coverage of targets under independent trials.

    Coordinate u holds the number of trials on channel u; target v is hit
    with probability 1 - prod_u (1 - p[v][u])^{x_u}.  Monotone and
    DR-submodular for probabilities in [0, 1).
    """
    w = [float(v) for v in target_weights]
    p = [[float(q) for q in row] for row in reach_probs]
    if len(w) != len(p):
        raise PreconditionError("one probability row per target is required")
    if any(not 0 <= q < 1 for row in p for q in row):
        raise PreconditionError("probabilities must lie in [0, 1)")

    def evaluator(x: Point) -> float:
        total = 0.0
        for wv, row in zip(w, p):
            miss = 1.0
            for q, xu in zip(row, x):
                miss *= (1.0 - q) ** xu
            total += wv * (1.0 - miss)
        return total

    return LatticeFunction(evaluator, monotone=True, exact=False, name=name)


def make_separable_quadratic(
    coeffs: Sequence[tuple[float, float]],
    shift: float = 0.0,
    *,
    monotone: bool = False,
    name: str = "separable-quadratic",
) -> LatticeFunction:
    """f(x) = shift + sum_i (a_i*x_i - b_i*x_i^2), one term per coordinate.

    Diminishing returns holds iff every b_i >= 0; negative b_i gives a
    convex coordinate, which is the easiest way to hand-write an objective
    that the validators should reject.  Callers declare monotonicity and
    must pick shift so f stays nonnegative on their domain.
    """
    ab = [(float(a), float(b)) for a, b in coeffs]

    def evaluator(x: Point) -> float:
        return shift + sum(a * v - b * v * v for (a, b), v in zip(ab, x))

    return LatticeFunction(evaluator, monotone=monotone, name=name)


def make_nonmonotone_dr(seed: int, gc: GroundCoordinates) -> LatticeFunction:
    """Random certified-DR instance with a strict nonmonotone witness.

    Draws concave-linear terms plus per-coordinate concave quadratics,
    shifts the result to be nonnegative on the domain, then certifies DR
    and the existence of a decreasing step exhaustively; redraws from a
    derived sub-seed until both hold.
    """
    for attempt in range(64):
        rng = random.Random(f"{seed}:{attempt}")
        fn = _draw_nonmonotone(rng, gc)
        if not check_dr(fn, gc).ok:  # pragma: no cover - construction is DR
            continue
        if find_nonmonotone_witness(fn, gc) is None:
            continue
        certified = LatticeFunction(
            fn._evaluator, monotone=False, name=f"nonmonotone[seed={seed}]"
        )
        return certified
    raise RuntimeError(f"could not certify a nonmonotone instance for seed {seed}")


def _draw_nonmonotone(rng: random.Random, gc: GroundCoordinates) -> LatticeFunction:
    n = gc.n
    terms = []
    for _ in range(rng.randint(1, 2)):
        w = rng.uniform(0.5, 2.0)
        c = tuple(rng.randint(0, 2) for _ in range(n))
        cap = rng.randint(1, max(2, sum(gc.bounds) // 2))
        terms.append((w, c, cap))
    quad = []
    for i in range(n):
        b = rng.uniform(0.3, 1.2)
        a = rng.uniform(0.0, b * gc.bounds[i])  # peak strictly inside -> decrease
        quad.append((a, b))

    def raw(x: Point) -> float:
        total = 0.0
        for w, c, cap in terms:
            total += w * min(sum(ci * xi for ci, xi in zip(c, x)), cap)
        total += sum(a * v - b * v * v for (a, b), v in zip(quad, x))
        return total

    low = min(raw(x) for x in gc.iter_points())
    shift = -low if low < 0 else 0.0
    return LatticeFunction(lambda x: raw(x) + shift, monotone=False)


@dataclass(frozen=True)
class DeskInstance:
    """A named, certified instance small enough for exhaustive oracles."""

    name: str
    fn: LatticeFunction
    gc: GroundCoordinates

    def fresh(self) -> "DeskInstance":
        """Copy with a zeroed evaluation counter (for call accounting)."""
        fn = LatticeFunction(
            self.fn._evaluator,
            monotone=self.fn.monotone,
            exact=self.fn.exact,
            name=self.fn.name,
        )
        return DeskInstance(self.name, fn, self.gc)


def desk_instances(*, monotone_only: bool = False) -> list[DeskInstance]:
    """The standard desk-scale suite: >= 20 certified instances, |E| <= 3, B_i <= 8."""
    out: list[DeskInstance] = []

    def add(name: str, fn: LatticeFunction, bounds: tuple[int, ...]) -> None:
        gc = GroundCoordinates(bounds)
        report = check_dr(fn, gc)
        assert report.ok, f"{name} failed certification: {report.detail}"
        out.append(DeskInstance(name, fn, gc))

    add("cap-single", make_concave_linear([1.0], [(1,)], "min-cap", cap=2), (5,))
    add("sqrt-single", make_concave_linear([1.0], [(1,)], "sqrt"), (8,))
    add("log-single", make_concave_linear([1.5], [(2,)], "log1p"), (7,))
    add(
        "sqrt-pair",
        make_concave_linear([1.0, 1.0], [(1, 1), (2, 0)], "sqrt"),
        (3, 3),
    )
    add(
        "cap-pair",
        make_concave_linear([2.0, 1.0], [(1, 0), (1, 2)], "min-cap", cap=3),
        (4, 4),
    )
    add(
        "log-pair",
        make_concave_linear([1.0, 0.5], [(1, 2), (3, 1)], "log1p"),
        (4, 2),
    )
    add(
        "mixed-pair",
        make_concave_linear([0.7, 1.3, 0.4], [(1, 0), (0, 1), (1, 1)], "sqrt"),
        (6, 2),
    )
    add(
        "sqrt-triple",
        make_concave_linear([1.0, 1.0], [(1, 1, 0), (0, 1, 2)], "sqrt"),
        (2, 2, 2),
    )
    add(
        "cap-triple",
        make_concave_linear([1.0, 2.0], [(1, 1, 1), (2, 0, 1)], "min-cap", cap=4),
        (3, 2, 2),
    )
    add(
        "log-triple",
        make_concave_linear([1.0, 1.0, 1.0], [(1, 0, 0), (0, 1, 0), (0, 0, 1)], "log1p"),
        (2, 2, 3),
    )
    add(
        "coverage-pair",
        make_budget_allocation([1.0, 2.0], [[0.3, 0.1], [0.2, 0.4]]),
        (4, 4),
    )
    add(
        "coverage-wide",
        make_budget_allocation([1.0, 1.0, 1.5], [[0.5, 0.0], [0.25, 0.25], [0.0, 0.35]]),
        (5, 3),
    )
    add(
        "coverage-triple",
        make_budget_allocation([2.0, 1.0], [[0.2, 0.3, 0.1], [0.4, 0.0, 0.2]]),
        (2, 2, 2),
    )
    add("modular", make_concave_linear([1.0, 2.0], [(1, 0), (0, 1)], "min-cap", cap=100), (3, 3))

    if not monotone_only:
        for seed, bounds in [
            (1, (3, 3)),
            (2, (2, 2, 2)),
            (3, (5,)),
            (4, (4, 2)),
            (5, (2, 3, 2)),
            (6, (6, 2)),
            (7, (8,)),
            (8, (3, 2, 2)),
        ]:
            gc = GroundCoordinates(bounds)
            fn = make_nonmonotone_dr(seed, gc)
            out.append(DeskInstance(f"nonmono-{seed}", fn, gc))
    return out


def lattice_optimum(inst: DeskInstance) -> tuple[Point, float]:
    """Unconstrained lattice optimum of a desk instance (independent oracle)."""
    return lattice_brute_force(inst.fn, inst.gc)
