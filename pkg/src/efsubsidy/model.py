"""Instances, value oracles, allocations and subsidy vectors.

Sets of goods are plain ``int`` bitmasks throughout: bit ``g`` is set iff good
``g`` is in the set. ``to_mask`` and ``goods_of`` convert from and to sorted
index lists at the edges. Every value is an exact non-negative integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ContractError, InvalidQueryError, NonDichotomousError

GoodSet = int
Permutation = tuple  # tuple[int, ...]; agent i receives bundle sigma[i]
SubsidyVector = tuple  # tuple[int, ...]


def to_mask(goods: Iterable[int] | int) -> GoodSet:
    """Bitmask for an iterable of good indices (an int passes through)."""
    if isinstance(goods, int):
        if goods < 0:
            raise InvalidQueryError(f"negative good-set mask {goods}")
        return goods
    mask = 0
    for g in goods:
        if not isinstance(g, int) or g < 0:
            raise InvalidQueryError(f"invalid good index {g!r}")
        mask |= 1 << g
    return mask


def goods_of(mask: GoodSet) -> list[int]:
    """Sorted good indices contained in ``mask``."""
    out = []
    g = 0
    while mask:
        if mask & 1:
            out.append(g)
        mask >>= 1
        g += 1
    return out


def _check_disjoint(masks: Sequence[GoodSet]) -> bool:
    seen = 0
    for s in masks:
        if seen & s:
            return False
        seen |= s
    return True


class Valuation:
    """Value oracle over goods ``0..m-1``.

    Subclasses implement ``_eval(mask)``. The public ``value`` validates the
    query and bumps ``calls``. The counter is a plain integer, so under
    concurrent use from several threads it is approximate.
    """

    kind: str = ""

    def __init__(self, m: int):
        if m < 0:
            raise ContractError(f"good count must be non-negative, got {m}")
        self.m = m
        self.certified = False
        self._calls = 0

    @property
    def calls(self) -> int:
        return self._calls

    @property
    def dichotomous_by_construction(self) -> bool:
        return True

    @property
    def trusted(self) -> bool:
        """Dichotomous by construction or certified by an explicit check."""
        return self.dichotomous_by_construction or self.certified

    def _eval(self, mask: GoodSet) -> int:
        raise NotImplementedError

    def _check(self, mask: GoodSet) -> None:
        if mask >> self.m:
            bad = [g for g in goods_of(mask) if g >= self.m]
            raise InvalidQueryError(f"goods {bad} outside 0..{self.m - 1}")

    def value(self, S: Iterable[int] | GoodSet) -> int:
        if type(S) is int and S >= 0 and not S >> self.m:
            self._calls += 1
            return self._eval(S)
        mask = to_mask(S)
        self._check(mask)
        self._calls += 1
        return self._eval(mask)

    def values(self, masks: Sequence[GoodSet]) -> list[int]:
        """Batch form of ``value``; counts one call per mask."""
        for mask in masks:
            self._check(mask)
        self._calls += len(masks)
        return [self._eval(mask) for mask in masks]

    def marginal(self, S: Iterable[int] | GoodSet, g: int) -> int:
        mask = to_mask(S)
        if not 0 <= g < self.m:
            raise InvalidQueryError(f"good {g} outside 0..{self.m - 1}")
        if mask >> g & 1:
            raise InvalidQueryError(f"good {g} already in the queried set")
        return self.value(mask | 1 << g) - self.value(mask)

    def params(self) -> dict:
        """Kind-specific parameters with good sets as sorted index lists."""
        raise NotImplementedError

    def restrict(self, m: int) -> "Valuation":
        """The same valuation on goods ``0..m-1`` (for prefix corpora)."""
        raise NotImplementedError(f"{self.kind} valuations cannot be restricted")

    def __eq__(self, other):
        if not isinstance(other, Valuation):
            return NotImplemented
        return (self.kind, self.m, self.params()) == (other.kind, other.m, other.params())

    def __hash__(self):
        return hash((self.kind, self.m, repr(self.params())))

    def __repr__(self):
        return f"{type(self).__name__}(m={self.m}, {self.params()})"


class Additive(Valuation):
    """``v(S) = |S & T|`` for a set ``T`` of valued goods."""

    kind = "Additive"

    def __init__(self, m: int, valued: Iterable[int] | GoodSet):
        super().__init__(m)
        self.valued = to_mask(valued)
        self._check(self.valued)

    def _eval(self, mask):
        return (mask & self.valued).bit_count()

    def values(self, masks):
        for mask in masks:
            self._check(mask)
        self._calls += len(masks)
        t = self.valued
        return [(mask & t).bit_count() for mask in masks]

    def params(self):
        return {"goods": goods_of(self.valued)}

    def restrict(self, m):
        return Additive(m, self.valued & ((1 << m) - 1))


class CappedGroups(Valuation):
    """``v(S) = sum_k min(|S & G_k|, c_k)``.

    Dichotomous by construction when the groups are pairwise disjoint;
    overlapping groups are accepted but left unchecked.
    """

    kind = "CappedGroups"

    def __init__(self, m: int, groups: Iterable[tuple[Iterable[int] | GoodSet, int]]):
        super().__init__(m)
        self.groups = []
        for goods, cap in groups:
            mask = to_mask(goods)
            self._check(mask)
            if not isinstance(cap, int) or cap < 0:
                raise ContractError(f"group cap must be a non-negative integer, got {cap!r}")
            self.groups.append((mask, cap))
        self.groups = tuple(self.groups)
        self._disjoint = _check_disjoint([g for g, _ in self.groups])

    @property
    def dichotomous_by_construction(self):
        return self._disjoint

    def _eval(self, mask):
        return sum(min((mask & grp).bit_count(), cap) for grp, cap in self.groups)

    def params(self):
        return {"groups": [{"goods": goods_of(g), "cap": c} for g, c in self.groups]}

    def restrict(self, m):
        lim = (1 << m) - 1
        return CappedGroups(m, [(g & lim, c) for g, c in self.groups])


class Threshold(Valuation):
    """``v(S)`` = number of required sets fully contained in ``S``.

    Dichotomous iff the required sets are pairwise disjoint, since two
    required sets sharing a good can be completed by that good at once.
    """

    kind = "Threshold"

    def __init__(self, m: int, required: Iterable[Iterable[int] | GoodSet]):
        super().__init__(m)
        self.required = tuple(to_mask(r) for r in required)
        for r in self.required:
            self._check(r)
            if r == 0:
                raise ContractError("empty required set would give v(empty) = 1")
        self._disjoint = _check_disjoint(self.required)

    @property
    def dichotomous_by_construction(self):
        return self._disjoint

    def _eval(self, mask):
        return sum(1 for r in self.required if r & ~mask == 0)

    def params(self):
        return {"required": [goods_of(r) for r in self.required]}


class BundlePacking(Valuation):
    """``v(S)`` = most pairwise-disjoint demand sets that fit inside ``S``.

    Adding one good can enable at most one extra set in a packing, so the
    marginals are 0 or 1 even when demand sets overlap. Evaluation is
    exponential in the number of demand sets contained in ``S``.
    """

    kind = "BundlePacking"

    def __init__(self, m: int, demands: Iterable[Iterable[int] | GoodSet]):
        super().__init__(m)
        self.demands = tuple(to_mask(d) for d in demands)
        for d in self.demands:
            self._check(d)
            if d == 0:
                raise ContractError("empty demand set makes the packing unbounded")

    def _eval(self, mask):
        inside = [d for d in self.demands if d & ~mask == 0]
        return _max_packing(inside)

    def params(self):
        return {"demands": [goods_of(d) for d in self.demands]}


def _max_packing(sets: list[int]) -> int:
    best = 0

    def rec(i, used, count):
        nonlocal best
        if count + (len(sets) - i) <= best:
            return
        if i == len(sets):
            best = count
            return
        if sets[i] & used == 0:
            rec(i + 1, used | sets[i], count + 1)
        rec(i + 1, used, count)

    rec(0, 0, 0)
    return best


class Table(Valuation):
    """Explicit table of ``2**m`` values indexed by subset bitmask.

    Not dichotomous by construction; see ``oracle.check_dichotomous``.
    """

    kind = "Table"

    def __init__(self, m: int, values: Sequence[int]):
        super().__init__(m)
        values = tuple(values)
        if len(values) != 1 << m:
            raise ContractError(f"table needs 2**{m} = {1 << m} entries, got {len(values)}")
        for x in values:
            if not isinstance(x, int) or isinstance(x, bool) or x < 0:
                raise ContractError(f"table entries must be non-negative integers, got {x!r}")
        if values[0] != 0:
            raise ContractError(f"table value of the empty set must be 0, got {values[0]}")
        self.table = values

    @property
    def dichotomous_by_construction(self):
        return False

    def _eval(self, mask):
        return self.table[mask]

    def params(self):
        return {"values": list(self.table)}

    @classmethod
    def tabulate(cls, valuation: Valuation) -> "Table":
        """Table form of another valuation (does not touch its counter)."""
        return cls(valuation.m, [valuation._eval(s) for s in range(1 << valuation.m)])


class Instance:
    """``n`` agents, ``m`` goods, one valuation per agent."""

    def __init__(self, valuations: Sequence[Valuation], m: int | None = None, name: str | None = None):
        valuations = tuple(valuations)
        if not valuations:
            raise ContractError("an instance needs at least one agent")
        if m is None:
            m = valuations[0].m
        for i, v in enumerate(valuations):
            if v.m != m:
                raise ContractError(f"agent {i} valuation is over {v.m} goods, instance has {m}")
        self.valuations = valuations
        self.n = len(valuations)
        self.m = m
        self.name = name

    @property
    def oracle_calls(self) -> int:
        return sum(v.calls for v in self.valuations)

    def restrict(self, m: int) -> "Instance":
        return Instance([v.restrict(m) for v in self.valuations], m, self.name)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.m == other.m and self.valuations == other.valuations

    def __repr__(self):
        return f"Instance(n={self.n}, m={self.m}, name={self.name!r})"


@dataclass(frozen=True)
class Allocation:
    """Ordered, pairwise-disjoint bundles; may leave goods unallocated."""

    bundles: tuple
    m: int

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(self.bundles))
        seen = 0
        for i, b in enumerate(self.bundles):
            if not isinstance(b, int) or b < 0:
                raise ContractError(f"bundle {i} is not a good-set mask: {b!r}")
            if b >> self.m:
                raise ContractError(f"bundle {i} holds goods outside 0..{self.m - 1}")
            if seen & b:
                raise ContractError(f"bundle {i} overlaps an earlier bundle on {goods_of(seen & b)}")
            seen |= b

    @classmethod
    def empty(cls, n: int, m: int) -> "Allocation":
        return cls((0,) * n, m)

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], m: int) -> "Allocation":
        return cls(tuple(to_mask(s) for s in sets), m)

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def allocated(self) -> GoodSet:
        out = 0
        for b in self.bundles:
            out |= b
        return out

    @property
    def unallocated(self) -> GoodSet:
        return ((1 << self.m) - 1) & ~self.allocated

    def is_complete(self) -> bool:
        return self.unallocated == 0

    def sets(self) -> list[list[int]]:
        return [goods_of(b) for b in self.bundles]

    def with_good(self, agent: int, g: int) -> "Allocation":
        if self.allocated >> g & 1:
            raise ContractError(f"good {g} is already allocated")
        bundles = list(self.bundles)
        bundles[agent] |= 1 << g
        return Allocation(tuple(bundles), self.m)


def check_permutation(sigma: Sequence[int], n: int) -> Permutation:
    sigma = tuple(sigma)
    if len(sigma) != n or sorted(sigma) != list(range(n)):
        raise ContractError(f"{sigma} is not a permutation of 0..{n - 1}")
    return sigma


def invert_permutation(sigma: Sequence[int]) -> Permutation:
    inv = [0] * len(sigma)
    for i, s in enumerate(sigma):
        inv[s] = i
    return tuple(inv)


def apply_permutation(A: Allocation, sigma: Sequence[int]) -> Allocation:
    """Agent ``i`` receives bundle ``sigma[i]`` of ``A``."""
    sigma = check_permutation(sigma, A.n)
    return Allocation(tuple(A.bundles[s] for s in sigma), A.m)


def permute_subsidies(p: Sequence[int], sigma: Sequence[int]) -> SubsidyVector:
    sigma = check_permutation(sigma, len(p))
    return tuple(p[s] for s in sigma)


def most_subsidized(p: Sequence[int]) -> tuple:
    """Agents receiving the maximum subsidy, ascending."""
    if not p:
        raise ContractError("empty subsidy vector")
    top = max(p)
    return tuple(i for i, x in enumerate(p) if x == top)


def check_subsidies(p: Sequence[int], n: int) -> SubsidyVector:
    p = tuple(p)
    if len(p) != n:
        raise ContractError(f"subsidy vector has {len(p)} entries for {n} agents")
    for x in p:
        if not isinstance(x, int) or isinstance(x, bool) or x < 0:
            raise ContractError(f"subsidies must be non-negative integers, got {x!r}")
    return p


def value(valuation: Valuation, S: Iterable[int] | GoodSet) -> int:
    return valuation.value(S)


def marginal(valuation: Valuation, S: Iterable[int] | GoodSet, g: int) -> int:
    return valuation.marginal(S, g)


def checked_marginal(inst: Instance, agent: int, S: GoodSet, g: int) -> int:
    """``marginal`` that raises ``NonDichotomousError`` outside {0, 1}."""
    d = inst.valuations[agent].marginal(S, g)
    if d not in (0, 1):
        raise NonDichotomousError(
            f"agent {agent}: marginal of good {g} on {goods_of(S)} is {d}",
            agent=agent, bundle=S, good=g, marginal=d,
        )
    return d
