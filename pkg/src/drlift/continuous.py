"""Fractional pipeline for polymatroid-constrained maximization.

Multilinear extension of the lifted objective, exact linear optimization
over {y in [0,1]^E' : M(y) in P} (explicit LP over the enumerated rank
constraints, with an independent vertex-enumeration oracle), the measured
continuous greedy ascent, and floor/residual rounding back to an integral
lattice point that never loses extension value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import PreconditionError, SizeGuardError
from .lattice import Point
from .polymatroid import PolymatroidOracle
from .reduction import ReducedInstance

#: Exact extension evaluation refuses lifted ground sets above this.
MULTILINEAR_LIMIT = 20


@dataclass(frozen=True)
class SampledValue:
    """Monte Carlo estimate with its standard error."""

    mean: float
    stderr: float
    samples: int


def _check_fractional(ri: ReducedInstance, y: np.ndarray) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.shape != (ri.size,):
        raise PreconditionError(f"expected a vector of length {ri.size}")
    if arr.min() < -1e-12 or arr.max() > 1 + 1e-12:
        raise PreconditionError("fractional points must lie in [0, 1] per coordinate")
    return np.clip(arr, 0.0, 1.0)


def g_table(ri: ReducedInstance) -> np.ndarray:
    """Dense table of g over all subsets, built with one evaluation each."""
    if ri.size > MULTILINEAR_LIMIT:
        raise SizeGuardError(
            f"|E'| = {ri.size} exceeds the exact-extension limit {MULTILINEAR_LIMIT}"
        )
    x = [0] * ri.gc.n
    table = np.empty(1 << ri.size)
    table[0] = ri.eval_image(tuple(x))
    mask = 0
    for k in range(1, 1 << ri.size):
        e = (k & -k).bit_length() - 1
        i, _ = ri.elements[e]
        if mask >> e & 1:
            x[i] -= ri.part_values[e]
            mask &= ~(1 << e)
        else:
            x[i] += ri.part_values[e]
            mask |= 1 << e
        table[mask] = ri.eval_image(tuple(x))
    return table


def _subset_probs(y: np.ndarray) -> np.ndarray:
    """P[R(y) = S] for every mask S, by tensor-product doubling."""
    probs = np.ones(1)
    for ye in y:
        probs = np.concatenate([probs * (1.0 - ye), probs * ye])
    return probs


def multilinear_exact(
    ri: ReducedInstance, y, *, table: np.ndarray | None = None
) -> float:
    """G(y) = E[g(R(y))] by full enumeration of subsets."""
    arr = _check_fractional(ri, y)
    if table is None:
        table = g_table(ri)
    return float(_subset_probs(arr) @ table)


def multilinear_sample(
    ri: ReducedInstance, y, samples: int, seed: int
) -> SampledValue:
    """Monte Carlo estimate of G(y); deterministic per seed."""
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    arr = _check_fractional(ri, y)
    rng = np.random.default_rng(seed)
    draws = rng.random((samples, ri.size)) < arr
    values = np.empty(samples)
    for r in range(samples):
        subset = np.flatnonzero(draws[r])
        values[r] = ri.eval_subset(subset.tolist())
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return SampledValue(mean, stderr, samples)


def marginal_weights(
    ri: ReducedInstance,
    y: np.ndarray,
    *,
    table: np.ndarray | None = None,
    samples: int = 0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """w_e = E[g(R(y) + e) - g(R(y))], exact (samples=0) or sampled.

    R includes every coordinate's randomness, so the term vanishes when e
    is already in R: w_e = (1 - y_e) * dG/dy_e.  This is the weight whose
    inner product with the direction equals the damped ascent's gain rate.
    """
    arr = _check_fractional(ri, y)
    if samples == 0:
        if table is None:
            table = g_table(ri)
        w = np.empty(ri.size)
        for e in range(ri.size):
            others = np.delete(arr, e)
            probs = _subset_probs(others)
            masks = _masks_without(ri.size, e)
            partial = float(probs @ (table[masks | (1 << e)] - table[masks]))
            w[e] = (1.0 - arr[e]) * partial
        return w
    if rng is None:
        rng = np.random.default_rng(0)
    w = np.zeros(ri.size)
    for _ in range(samples):
        subset = set(np.flatnonzero(rng.random(ri.size) < arr).tolist())
        base = ri.eval_subset(subset)
        for e in range(ri.size):
            if e in subset:
                continue
            w[e] += ri.eval_subset(subset | {e}) - base
    return w / samples


def _masks_without(n: int, e: int) -> np.ndarray:
    """All masks over n bits with bit e clear, ordered by the other bits."""
    small = np.arange(1 << (n - 1))
    low = small & ((1 << e) - 1)
    high = (small >> e) << (e + 1)
    return high | low


# -- exact linear optimization over the lifted polytope -------------------


@dataclass(frozen=True)
class LinearOptResult:
    """Maximizer of <w, y> with the LP value and dual certificate data."""

    y: np.ndarray
    value: float
    rank_duals: dict[frozenset[int], float]
    box_duals: np.ndarray


def _rank_rows(ri: ReducedInstance, oracle: PolymatroidOracle):
    """One row per nonempty coordinate subset: <M*(chi_S), y> <= rho(S)."""
    subsets = [s for s in oracle.subsets() if s]
    rows = np.zeros((len(subsets), ri.size))
    rhs = np.zeros(len(subsets))
    for r, s in enumerate(subsets):
        v = np.zeros(ri.gc.n)
        v[list(s)] = 1.0
        rows[r] = ri.apply_m_adjoint(v)
        rhs[r] = oracle(s)
    return subsets, rows, rhs


def lmo(
    ri: ReducedInstance,
    oracle: PolymatroidOracle,
    w,
    *,
    check_certificate: bool = True,
    tol: float = 1e-7,
) -> LinearOptResult:
    """Maximize <w, y> over y in [0,1]^E' with M(y) in the polytope.

    Solves the explicit LP whose rows are the adjoint-lifted rank
    constraints.  When check_certificate is set, the returned duals are
    validated: the lifted separating vector M*(v) built from the rank
    duals must dominate w wherever complementary slackness allows, and
    strong duality must hold — the same construction that makes a
    separation oracle for P into one for the lifted region.
    """
    if oracle.n != ri.gc.n:
        raise PreconditionError("rank oracle ground set must match coordinates")
    weights = np.asarray(w, dtype=float)
    if weights.shape != (ri.size,):
        raise PreconditionError(f"expected a weight vector of length {ri.size}")
    subsets, rows, rhs = _rank_rows(ri, oracle)
    res = linprog(
        -weights,
        A_ub=rows,
        b_ub=rhs,
        bounds=[(0.0, 1.0)] * ri.size,
        method="highs",
    )
    if not res.success:  # pragma: no cover - y=0 is always feasible
        raise RuntimeError(f"LP solver failed: {res.message}")
    y = np.clip(res.x, 0.0, 1.0)
    value = float(weights @ y)
    lam = -np.asarray(res.ineqlin.marginals)
    mu = -np.asarray(res.upper.marginals)
    rank_duals = {s: float(l) for s, l in zip(subsets, lam)}
    result = LinearOptResult(y, value, rank_duals, mu)
    if check_certificate:
        _check_dual_certificate(ri, result, rows, rhs, weights, tol=tol)
    return result


def _check_dual_certificate(
    ri: ReducedInstance,
    res: LinearOptResult,
    rows: np.ndarray,
    rhs: np.ndarray,
    w: np.ndarray,
    *,
    tol: float,
) -> None:
    scale = max(1.0, float(np.abs(w).sum()))
    lam = np.array([res.rank_duals[s] for s in res.rank_duals])
    if lam.min() < -tol * scale or res.box_duals.min() < -tol * scale:
        raise AssertionError("dual multipliers must be nonnegative")
    # aggregate separating normal on the lattice side, lifted via the adjoint
    v = np.zeros(ri.gc.n)
    for s, l in res.rank_duals.items():
        v[list(s)] += l
    lifted = ri.apply_m_adjoint(v)
    # adjoint identity <M*(v), y> = <v, M(y)> must hold on the optimum
    lhs = float(lifted @ res.y)
    rhs_ip = float(v @ ri.apply_m(res.y))
    if abs(lhs - rhs_ip) > tol * scale:
        raise AssertionError("adjoint identity violated on the LP optimum")
    # dual feasibility: w <= M*(v) + mu (coordinatewise)
    if np.any(w - lifted - res.box_duals > tol * scale):
        raise AssertionError("dual certificate does not dominate the objective")
    # strong duality: primal value equals the certificate value
    dual_value = float(lam @ rhs) + float(res.box_duals.sum())
    if abs(dual_value - res.value) > tol * scale:
        raise AssertionError("strong duality gap in the LP certificate")


def lmo_enumeration(
    ri: ReducedInstance,
    oracle: PolymatroidOracle,
    w,
    *,
    chunk: int = 40000,
) -> tuple[np.ndarray, float]:
    """Independent LP oracle: enumerate candidate vertices by tight rows.

    Every vertex of the feasible polytope is the unique solution of some
    n linearly independent tight constraints; all n-subsets of rows are
    solved in batches and the feasible candidate with the best objective
    wins.  Pure linear algebra, no LP solver involved.
    """
    weights = np.asarray(w, dtype=float)
    _, rank_rows, rank_rhs = _rank_rows(ri, oracle)
    n = ri.size
    eye = np.eye(n)
    rows = np.vstack([rank_rows, eye, -eye])
    rhs = np.concatenate([rank_rhs, np.ones(n), np.zeros(n)])
    m = rows.shape[0]
    best_y = np.zeros(n)
    best_val = float(weights @ best_y)  # y = 0 is always feasible
    combos = itertools.combinations(range(m), n)
    while True:
        batch = list(itertools.islice(combos, chunk))
        if not batch:
            break
        idx = np.array(batch)
        a = rows[idx]
        b = rhs[idx]
        dets = np.abs(np.linalg.det(a))
        solvable = dets > 1e-9
        if not solvable.any():
            continue
        try:
            ys = np.linalg.solve(a[solvable], b[solvable][..., None])[..., 0]
        except np.linalg.LinAlgError:  # pragma: no cover - det filter misses
            ys = np.stack(
                [
                    np.linalg.lstsq(m, r, rcond=None)[0]
                    for m, r in zip(a[solvable], b[solvable])
                ]
            )
        feas = np.all(rows @ ys.T <= rhs[:, None] + 1e-9, axis=0)
        feas &= np.all(ys >= -1e-9, axis=1) & np.all(ys <= 1 + 1e-9, axis=1)
        if not feas.any():
            continue
        vals = ys[feas] @ weights
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_y = np.clip(ys[feas][k], 0.0, 1.0)
    return best_y, best_val


# -- measured continuous greedy -------------------------------------------


def measured_continuous_greedy(
    ri: ReducedInstance,
    oracle: PolymatroidOracle,
    *,
    steps: int = 100,
    samples: int = 0,
    seed: int = 0,
    monotone: bool | None = None,
    check_feasibility: bool = True,
) -> np.ndarray:
    """Fractional ascent with damped updates y += (1/T)(1-y)*b.

    At each of T steps the marginal-weight vector is estimated (exactly
    when samples=0) and the step direction b maximizes <w, b> over the
    lifted polytope.  The damping keeps y inside the polytope throughout
    and yields (1-1/e)-quality fractional points for monotone objectives
    and 1/e for nonmonotone ones.
    """
    if steps < 1:
        raise PreconditionError("steps must be >= 1")
    if monotone is None:
        monotone = ri.fn.monotone
    table = g_table(ri) if samples == 0 else None
    rng = np.random.default_rng(seed)
    y = np.zeros(ri.size)
    for _ in range(steps):
        w = marginal_weights(ri, y, table=table, samples=samples, rng=rng)
        direction = lmo(ri, oracle, w, check_certificate=False).y
        y = y + (1.0 / steps) * (1.0 - y) * direction
        if check_feasibility and not oracle.member(ri.apply_m(y), tol=1e-7):
            raise AssertionError("ascent left the polytope")  # pragma: no cover
    return y


# -- floor/residual rounding ----------------------------------------------


@dataclass(frozen=True)
class RoundingState:
    """Floor part z, residual v and the fractional image they came from."""

    x: np.ndarray
    z: tuple[int, ...]
    v: np.ndarray


def rounding_state(ri: ReducedInstance, y) -> RoundingState:
    x = ri.apply_m(_check_fractional(ri, y))
    z = np.floor(x + 1e-12).astype(int)
    z = np.minimum(z, np.array(ri.gc.bounds))
    v = x - z
    return RoundingState(x, tuple(int(t) for t in z), np.clip(v, 0.0, 1.0))


def residual_extension(ri: ReducedInstance, z: Point, v) -> float:
    """H(v) = E[f(z + R(v))] with independent per-coordinate rounding."""
    arr = np.asarray(v, dtype=float)
    support = [i for i in range(ri.gc.n) if arr[i] > 1e-15]
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(support)):
        prob = 1.0
        x = list(z)
        for i, b in zip(support, bits):
            prob *= arr[i] if b else 1.0 - arr[i]
            x[i] += b
        if prob > 0.0:
            total += prob * ri.eval_image(tuple(x))
    return total


def hybrid_gap(ri: ReducedInstance, y, *, table: np.ndarray | None = None) -> float:
    """H(v) - G(y) for the floor/residual split of y (should be >= 0)."""
    state = rounding_state(ri, y)
    h = residual_extension(ri, state.z, state.v)
    g = multilinear_exact(ri, y, table=table)
    return h - g


def round_fractional(
    ri: ReducedInstance,
    oracle: PolymatroidOracle,
    y,
    *,
    max_steps: int | None = None,
) -> Point:
    """Round y to an integral lattice point without losing extension value.

    Splits M(y) into floor z and residual v, then moves v by pairwise
    transfers inside tight rank constraints (the residual region is a
    polytope with integral vertices, so this terminates on an integral
    point).  The residual objective H is linear per coordinate and convex
    along transfer directions, so stepping to the better endpoint never
    decreases it; the final point satisfies f(x) >= H(v) >= G(y).
    """
    arr = _check_fractional(ri, y)
    x_frac = ri.apply_m(arr)
    if not oracle.member(x_frac, tol=1e-7):
        raise PreconditionError("fractional point is outside the polytope")
    state = rounding_state(ri, arr)
    z = np.array(state.z)
    v = state.v.copy()
    caps = np.minimum(1.0, np.array(ri.gc.bounds) - z)
    subsets = [s for s in oracle.subsets() if s]
    ranks = np.array([oracle(s) for s in subsets], dtype=float)
    members = [np.array(sorted(s)) for s in subsets]
    if max_steps is None:
        max_steps = 16 * ri.gc.n * ri.gc.n + 64

    def slacks(vv: np.ndarray) -> np.ndarray:
        xs = z + vv
        return ranks - np.array([xs[m].sum() for m in members])

    def h(vv: np.ndarray) -> float:
        return residual_extension(ri, tuple(z), vv)

    h_cur = h(v)
    for _ in range(max_steps):
        _snap(v, caps)
        frac = [i for i in range(ri.gc.n) if 1e-9 < v[i] < caps[i] - 1e-9]
        if not frac:
            break
        sl = slacks(v)
        tight = [k for k in range(len(subsets)) if sl[k] <= 1e-9]
        tight_with_frac = [
            k for k in tight if any(i in subsets[k] for i in frac)
        ]
        if tight_with_frac:
            k = min(tight_with_frac, key=lambda t: (len(subsets[t]), sorted(subsets[t])))
            in_set = [i for i in frac if i in subsets[k]]
            if len(in_set) < 2:  # pragma: no cover - parity forbids this
                raise AssertionError("tight set with a single fractional coordinate")
            i, j = in_set[0], in_set[1]
            delta_up = min(caps[i] - v[i], v[j])
            delta_dn = min(v[i], caps[j] - v[j])
            for k2, s in enumerate(subsets):
                has_i, has_j = i in s, j in s
                if has_i and not has_j:
                    delta_up = min(delta_up, sl[k2])
                elif has_j and not has_i:
                    delta_dn = min(delta_dn, sl[k2])
            cand = []
            if delta_up > 1e-12:
                up = v.copy()
                up[i] += delta_up
                up[j] -= delta_up
                cand.append(up)
            if delta_dn > 1e-12:
                dn = v.copy()
                dn[i] -= delta_dn
                dn[j] += delta_dn
                cand.append(dn)
            if not cand:  # pragma: no cover - uncrossing guarantees room
                raise AssertionError("transfer direction fully blocked")
        else:
            i = frac[0]
            room = caps[i] - v[i]
            for k2, s in enumerate(subsets):
                if i in s:
                    room = min(room, sl[k2])
            up = v.copy()
            up[i] += room
            dn = v.copy()
            dn[i] = 0.0
            cand = [up, dn]
        best = max(cand, key=h)
        h_new = h(best)
        if h_new < h_cur - 1e-9 * max(1.0, abs(h_cur)):  # pragma: no cover
            raise AssertionError("rounding step decreased the residual objective")
        v = best
        h_cur = h_new
    else:  # pragma: no cover - termination is guaranteed at desk scale
        raise RuntimeError("rounding did not reach an integral point")
    result = tuple(int(t) for t in np.rint(z + v))
    if not oracle.member(result):
        raise AssertionError("rounded point left the polytope")  # pragma: no cover
    if not ri.gc.contains(result):
        raise AssertionError("rounded point left the box")  # pragma: no cover
    return result


def _snap(v: np.ndarray, caps: np.ndarray) -> None:
    near_zero = np.abs(v) <= 1e-9
    v[near_zero] = 0.0
    near_cap = np.abs(v - caps) <= 1e-9
    v[near_cap] = caps[near_cap]


def maximize_polymatroid(
    ri: ReducedInstance,
    oracle: PolymatroidOracle,
    *,
    steps: int = 100,
    samples: int = 0,
    seed: int = 0,
) -> tuple[Point, float, np.ndarray]:
    """Full fractional pipeline: ascend, then round; returns (x, f(x), y)."""
    y = measured_continuous_greedy(
        ri, oracle, steps=steps, samples=samples, seed=seed
    )
    x = round_fractional(ri, oracle, y)
    return x, ri.eval_image(x), y
