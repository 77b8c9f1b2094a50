"""Subset-sum-complete budget decompositions.

A budget n is split into a small multiset of positive integer parts such
that every q in [0, n] is the sum of some sub-multiset.  The exact
construction uses ~2*log2(n) parts; the refined variant additionally caps
every part at eps*n at the price of ceil(1/eps) extra parts.  These
multisets are what turn one lattice coordinate with bound n into a handful
of set elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Sequence, Union

from .errors import DecompositionError, PreconditionError, SizeGuardError

RationalLike = Union[Fraction, int, float, str]

#: Exhaustive completeness verification refuses targets above this.
DEFAULT_COMPLETENESS_BOUND = 2**20


def as_fraction(value: RationalLike) -> Fraction:
    """Exact rational from int/Fraction/str ("1/8", "0.125") or float.

    Floats convert to their exact binary value, so 0.1 becomes the usual
    slightly-off rational; pass a string or Fraction when that matters.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class Decomposition:
    """Ordered multiset of positive integer parts summing to ``target``."""

    target: int
    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.target < 1:
            raise DecompositionError("target must be a positive integer")
        if not self.parts or any(a < 1 for a in self.parts):
            raise DecompositionError("every part must be a positive integer")
        if sum(self.parts) != self.target:
            raise DecompositionError(
                f"parts sum to {sum(self.parts)}, expected {self.target}"
            )

    def __len__(self) -> int:
        return len(self.parts)


@dataclass(frozen=True)
class RefinedDecomposition(Decomposition):
    """Decomposition whose parts are additionally capped at epsilon*target.

    The part-count bound 2*floor(log2 n)+1+ceil(1/eps) is validated here.
    With integer parts the effective cap is floor(eps*n), so for some
    (n, eps) no integer multiset can satisfy both cap and count; in that
    case construction raises instead of shipping a bound violation.
    """

    epsilon: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        super().__post_init__()
        eps = self.epsilon
        if not 0 < eps <= 1:
            raise DecompositionError("epsilon must lie in (0, 1]")
        cap = eps * self.target
        oversized = [a for a in self.parts if a > cap]
        if oversized:
            raise DecompositionError(
                f"part {oversized[0]} exceeds cap {cap} = epsilon*target"
            )
        allowed = part_count_bound(self.target) + ceil(1 / eps)
        if len(self.parts) > allowed:
            raise DecompositionError(
                f"{len(self.parts)} parts exceed the bound {allowed}; "
                f"no integer decomposition of {self.target} with cap "
                f"{cap} can meet it"
            )


def part_count_bound(n: int) -> int:
    """Maximum part count of the exact construction: 2*floor(log2 n)+1."""
    return 2 * (n.bit_length() - 1) + 1


def decompose(n: int) -> Decomposition:
    """Exact subset-sum-complete decomposition of n.

    Layout: one leading 1, then the powers 2^0 .. 2^(m-1) where m is the
    index of n's highest set bit, then one extra power 2^c for every set
    bit c below m.  The first m+1 parts sum to 2^m and the rest make up
    the remainder, so the whole multiset sums to n.
    """
    if not isinstance(n, int) or isinstance(n, bool):
        raise PreconditionError("n must be an integer")
    if n < 1:
        raise DecompositionError(
            "n = 0 has no decomposition; drop zero-bound coordinates upstream"
        )
    m = n.bit_length() - 1
    parts = [1] + [1 << c for c in range(m)]
    parts += [1 << c for c in range(m) if (n >> c) & 1]
    return Decomposition(n, tuple(parts))


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def _refine_parts(n: int, cap: Fraction) -> tuple[int, ...]:
    """Split every oversized exact part in place until all parts <= cap.

    Each oversized part a is replaced by (a - w, w) with w = floor(cap),
    repeating on the left piece, which yields [a - k*w, w, ..., w].
    """
    w = _floor_frac(cap)
    if w < 1:
        raise DecompositionError(
            f"cap {cap} is below 1; no positive integer part can satisfy it"
        )
    out: list[int] = []
    for a in decompose(n).parts:
        k = 0
        if a > cap:
            k = int(ceil((a - cap) / w))
        out.append(a - k * w)
        out.extend([w] * k)
    return tuple(out)


def decompose_refined(n: int, epsilon: RationalLike) -> RefinedDecomposition:
    """Decomposition of n with every part at most epsilon*n (exact rationals).

    Requires epsilon*n >= 1.  Raises DecompositionError when the part-count
    bound cannot be met (possible for epsilons whose floor(eps*n) is far
    below eps*n; never on eps in {1/2, 1/4, 1/8} at any n).
    """
    eps = as_fraction(epsilon)
    if not 0 < eps <= 1:
        raise PreconditionError("epsilon must lie in (0, 1]")
    if n < 1:
        raise DecompositionError("n must be a positive integer")
    if eps * n < 1:
        raise DecompositionError(
            f"epsilon*n = {eps * n} < 1: the cap admits no integer part"
        )
    parts = _refine_parts(n, eps * n)
    return RefinedDecomposition(target=n, parts=parts, epsilon=eps)


def decompose_capped(n: int, cap: RationalLike) -> RefinedDecomposition:
    """Decomposition of n with every part at most the absolute cap.

    Convenience for constraint lifting, where the cap eps*K is shared by
    all coordinates regardless of their own bounds.  Equivalent to
    decompose_refined(n, cap/n); a cap >= n degenerates to the exact parts.
    """
    c = as_fraction(cap)
    if c >= n:
        base = decompose(n)
        return RefinedDecomposition(target=n, parts=base.parts, epsilon=Fraction(1))
    return decompose_refined(n, c / n)


def naive_copies(n: int) -> Decomposition:
    """The trivial all-ones decomposition (n unit parts)."""
    if n < 1:
        raise DecompositionError("n must be a positive integer")
    return Decomposition(n, (1,) * n)


@dataclass(frozen=True)
class CompletenessReport:
    """Outcome of the exhaustive subset-sum reachability check."""

    ok: bool
    failing_q: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_completeness(
    d: Decomposition, *, bound: int = DEFAULT_COMPLETENESS_BOUND
) -> CompletenessReport:
    """Exhaustively check that every q in [0, target] is a sub-multiset sum.

    Uses a bitset reachability table, so it is the independent oracle for
    the constructions above rather than a re-derivation of them.
    """
    if d.target > bound:
        raise SizeGuardError(
            f"target {d.target} exceeds completeness bound {bound}"
        )
    reach = 1
    mask = (1 << (d.target + 1)) - 1
    for a in d.parts:
        reach |= (reach << a) & mask
    for q in range(d.target + 1):
        if not (reach >> q) & 1:
            return CompletenessReport(False, q)
    return CompletenessReport(True, None)


def subset_for(d: Decomposition, q: int) -> tuple[int, ...]:
    """Indices of a sub-multiset of d.parts summing exactly to q.

    For the exact construction this walks the bit certificate; refined or
    otherwise-shaped part lists fall back to a subset-sum DP.  q = 0 and
    q = target are handled directly.
    """
    if q < 0 or q > d.target:
        raise PreconditionError(f"q = {q} outside [0, {d.target}]")
    if q == 0:
        return ()
    if q == d.target:
        return tuple(range(len(d.parts)))
    if q == 1:
        # the construction always leads with a unit part
        if d.parts[0] == 1:
            return (0,)
        return _subset_by_dp(d.parts, q)
    if _is_exact_layout(d):
        return _subset_by_bits(d, q)
    return _subset_by_dp(d.parts, q)


def _is_exact_layout(d: Decomposition) -> bool:
    return d.parts == decompose(d.target).parts


def _subset_by_bits(d: Decomposition, q: int) -> tuple[int, ...]:
    n = d.target
    m = n.bit_length() - 1
    # extra part for bit c sits after the run of m+1 leading parts
    extra_index = {}
    pos = m + 1
    for c in range(m):
        if (n >> c) & 1:
            extra_index[c] = pos
            pos += 1
    j = (n & ~q).bit_length() - 1  # highest bit set in n but not in q
    r = (n >> j) << j
    chosen = set(range(m + 1))
    for c in range(j, m):
        if (r >> c) & 1:
            chosen.add(extra_index[c])
    rem = r - q
    c = 0
    while rem:
        if rem & 1:
            chosen.remove(1 + c)  # the run holds 2^c at index c+1
        rem >>= 1
        c += 1
    out = tuple(sorted(chosen))
    assert sum(d.parts[i] for i in out) == q
    return out


def _subset_by_dp(parts: Sequence[int], q: int) -> tuple[int, ...]:
    """Subset-sum with reconstruction via per-prefix reachability bitsets."""
    prefix = [1]
    for a in parts:
        prefix.append(prefix[-1] | (prefix[-1] << a))
    if not (prefix[-1] >> q) & 1:
        raise DecompositionError(f"q = {q} is not a sub-multiset sum")
    chosen = []
    rest = q
    for i in range(len(parts) - 1, -1, -1):
        if (prefix[i] >> rest) & 1:
            continue
        chosen.append(i)
        rest -= parts[i]
    assert rest == 0
    return tuple(sorted(chosen))
