"""Instance documents: the JSON schema shared by the library and the CLI.

Top-level keys: `bounds` (integer array), `objective` ({family, weights,
directions, shape, seed}), `monotone` (boolean), and optionally `name`
and `constraint` ({kind, K, costs?, rank_oracle?}).  Arrays are
coordinate-ordered.  Rank oracles are referenced by built-in name:
"cardinality-rank(K)" as a string, or an object such as
{"name": "partition-rank", "blocks": [[0],[1,2]], "capacities": [2,3]} or
{"name": "weighted-coverage", "covers": [[0,1],[1]], "weights": [2,1]}.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import InstanceFormatError
from .lattice import GroundCoordinates, LatticeFunction
from .polymatroid import (
    PolymatroidOracle,
    cardinality_rank,
    partition_rank,
    weighted_coverage_rank,
)
from .reduction import Cardinality, Constraint, Knapsack, Polymatroid
from .zoo import (
    make_budget_allocation,
    make_concave_linear,
    make_nonmonotone_dr,
    make_separable_quadratic,
)

FAMILIES = (
    "concave-linear",
    "budget-allocation",
    "nonmonotone",
    "separable-quadratic",
)


@dataclass(frozen=True)
class Instance:
    name: str
    fn: LatticeFunction
    gc: GroundCoordinates
    monotone: bool
    constraint: Constraint | None


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceFormatError(f"cannot read instance {path}: {exc}") from exc
    return parse_instance(doc, default_name=path.stem)


def parse_instance(doc: dict, *, default_name: str = "instance") -> Instance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("instance document must be a JSON object")
    try:
        bounds = tuple(int(b) for b in doc["bounds"])
        objective = doc["objective"]
        monotone = bool(doc["monotone"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"bad instance document: {exc}") from exc
    gc = GroundCoordinates(bounds)
    fn = _build_objective(objective, gc, monotone)
    if fn.monotone != monotone:
        raise InstanceFormatError(
            f"declared monotone={monotone} contradicts the "
            f"{objective.get('family')} family"
        )
    constraint = None
    if doc.get("constraint") is not None:
        constraint = parse_constraint(doc["constraint"], gc)
    return Instance(doc.get("name", default_name), fn, gc, monotone, constraint)


def _build_objective(
    obj: dict, gc: GroundCoordinates, declared_monotone: bool
) -> LatticeFunction:
    if not isinstance(obj, dict) or "family" not in obj:
        raise InstanceFormatError("objective must be an object with a family")
    family = obj["family"]
    try:
        if family == "concave-linear":
            return make_concave_linear(
                obj["weights"], obj["directions"], obj["shape"]
            )
        if family == "budget-allocation":
            return make_budget_allocation(obj["weights"], obj["directions"])
        if family == "nonmonotone":
            return make_nonmonotone_dr(int(obj["seed"]), gc)
        if family == "separable-quadratic":
            # the declared flag is taken on faith here; `verify` checks it
            return make_separable_quadratic(
                obj["coeffs"],
                float(obj.get("shift", 0.0)),
                monotone=declared_monotone,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"bad {family} objective: {exc}") from exc
    raise InstanceFormatError(f"unknown family {family!r}; pick one of {FAMILIES}")


def parse_constraint(con: dict, gc: GroundCoordinates) -> Constraint:
    if not isinstance(con, dict) or "kind" not in con:
        raise InstanceFormatError("constraint must be an object with a kind")
    kind = con["kind"]
    try:
        if kind == "cardinality":
            return Cardinality(int(con["K"]))
        if kind == "knapsack":
            costs = tuple(float(c) for c in con["costs"])
            return Knapsack(costs, float(con["K"]))
        if kind == "polymatroid":
            return Polymatroid(parse_rank_oracle(con["rank_oracle"], gc))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"bad {kind} constraint: {exc}") from exc
    raise InstanceFormatError(f"unknown constraint kind {kind!r}")


def parse_rank_oracle(ref, gc: GroundCoordinates) -> PolymatroidOracle:
    if isinstance(ref, str):
        match = re.fullmatch(r"cardinality-rank\((\d+)\)", ref.strip())
        if not match:
            raise InstanceFormatError(
                f"unknown rank oracle {ref!r}; string form is 'cardinality-rank(K)'"
            )
        return cardinality_rank(int(match.group(1)), gc.bounds)
    if isinstance(ref, dict):
        name = ref.get("name")
        if name == "cardinality-rank":
            return cardinality_rank(int(ref["K"]), gc.bounds)
        if name == "partition-rank":
            return partition_rank(ref["blocks"], ref["capacities"], gc.bounds)
        if name == "weighted-coverage":
            oracle = weighted_coverage_rank(ref["covers"], ref["weights"])
            if oracle.n != gc.n:
                raise InstanceFormatError(
                    "weighted-coverage needs one cover row per coordinate"
                )
            return oracle
        raise InstanceFormatError(f"unknown rank oracle name {name!r}")
    raise InstanceFormatError("rank_oracle must be a string or an object")
