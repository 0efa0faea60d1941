"""Exponential-time referees for desk-scale verification.

Everything here enumerates: permutations, simple paths, subsets, complete
allocations. Size guards raise ``SizeGuardError`` instead of sampling.
"""

from __future__ import annotations

import copy
import itertools
import random
from dataclasses import dataclass

import numpy as np

from .envy import Solution, build_envy_graph, longest_paths
from .errors import ContractError, NonDichotomousError, SizeGuardError
from .model import Allocation, Instance, Valuation, goods_of

MAX_BF_EF_AGENTS = 8
MAX_BF_SUBSIDY_AGENTS = 6
MAX_DICHOTOMY_GOODS = 20
MAX_ALLOCATIONS = 10**6
MAX_GRID_POINTS = 2 * 10**6


@dataclass(frozen=True)
class DichotomyReport:
    ok: bool
    counterexample: tuple | None = None  # (S mask, good, marginal)

    def describe(self) -> str:
        if self.ok:
            return "dichotomous"
        S, g, d = self.counterexample
        return f"marginal of good {g} on {goods_of(S)} is {d}"


def _values_direct(inst: Instance, A: Allocation) -> list[list[int]]:
    return [[v.value(b) for b in A.bundles] for v in inst.valuations]


def bf_is_envy_freeable(inst: Instance, A: Allocation) -> bool:
    """True iff no reassignment of the bundles raises total value."""
    if inst.n > MAX_BF_EF_AGENTS:
        raise SizeGuardError(f"permutation enumeration refused for n={inst.n} > {MAX_BF_EF_AGENTS}")
    V = _values_direct(inst, A)
    base = sum(V[i][i] for i in range(inst.n))
    return all(
        sum(V[i][s] for i, s in enumerate(sigma)) <= base
        for sigma in itertools.permutations(range(inst.n))
    )


def bf_min_subsidies(inst: Instance, A: Allocation) -> tuple:
    """Heaviest simple path from each agent, by explicit path enumeration."""
    if inst.n > MAX_BF_SUBSIDY_AGENTS:
        raise SizeGuardError(f"path enumeration refused for n={inst.n} > {MAX_BF_SUBSIDY_AGENTS}")
    if not bf_is_envy_freeable(inst, A):
        raise ContractError("allocation is not envy-freeable")
    V = _values_direct(inst, A)
    n = inst.n
    w = [[V[i][j] - V[i][i] for j in range(n)] for i in range(n)]

    def heaviest(i, visited, acc):
        best = acc
        for j in range(n):
            if not visited >> j & 1:
                best = max(best, heaviest(j, visited | 1 << j, acc + w[i][j]))
        return best

    return tuple(heaviest(i, 1 << i, 0) for i in range(n))


def envy_free_vectors(inst: Instance, A: Allocation, bound: int):
    """Yield every subsidy vector in ``{0..bound}**n`` that makes ``A`` envy-free."""
    n = inst.n
    if (bound + 1) ** n > MAX_GRID_POINTS:
        raise SizeGuardError(f"grid of {(bound + 1) ** n} subsidy vectors refused")
    V = _values_direct(inst, A)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for p in itertools.product(range(bound + 1), repeat=n):
        if all(V[i][i] + p[i] >= V[i][j] + p[j] for i, j in pairs):
            yield p


def bf_min_subsidies_grid(inst: Instance, A: Allocation, bound: int | None = None) -> tuple:
    """Pointwise minimum over all envy-free integer subsidy vectors up to
    ``bound`` (default: ``(n - 1)`` times the largest envy)."""
    if bound is None:
        V = _values_direct(inst, A)
        top = max([V[i][j] - V[i][i] for i in range(inst.n) for j in range(inst.n)] + [0])
        bound = (inst.n - 1) * top
    best = None
    for p in envy_free_vectors(inst, A, bound):
        best = p if best is None else tuple(min(a, b) for a, b in zip(best, p))
    if best is None:
        raise ContractError(f"no envy-free subsidy vector within bound {bound}")
    return best


def _table(v: Valuation, m: int) -> np.ndarray:
    # uncounted evaluation: checking is not part of any algorithm's query budget
    if getattr(v, "table", None) is not None:
        return np.asarray(v.table, dtype=np.int64)
    return np.fromiter((v._eval(s) for s in range(1 << m)), dtype=np.int64, count=1 << m)


def check_dichotomous(v: Valuation, m: int | None = None) -> DichotomyReport:
    """Exhaustively check every ``(S, g)`` with ``g`` not in ``S``.

    The reported counterexample is the first in order of ``S`` as a bitmask,
    then ``g``.
    """
    m = v.m if m is None else m
    if m > MAX_DICHOTOMY_GOODS:
        raise SizeGuardError(f"exhaustive dichotomy check refused for m={m} > {MAX_DICHOTOMY_GOODS}; use check_dichotomous_sampled")
    vals = _table(v, m)
    if vals[0] != 0:
        return DichotomyReport(False, (0, None, int(vals[0])))
    masks = np.arange(1 << m, dtype=np.int64)
    first = None
    for g in range(m):
        bit = 1 << g
        S = masks[(masks & bit) == 0]
        d = vals[S | bit] - vals[S]
        bad = np.flatnonzero((d != 0) & (d != 1))
        if bad.size:
            hit = (int(S[bad[0]]), g, int(d[bad[0]]))
            if first is None or hit[0] < first[0]:
                first = hit
    return DichotomyReport(first is None, first)


def check_dichotomous_sampled(v: Valuation, trials: int = 1000, seed: int = 0) -> DichotomyReport:
    """Random ``(S, g)`` probes for valuations too large to enumerate."""
    rng = random.Random(seed)
    m = v.m
    if m == 0:
        return DichotomyReport(True)
    for _ in range(trials):
        g = rng.randrange(m)
        S = rng.getrandbits(m) & ~(1 << g)
        d = v._eval(S | 1 << g) - v._eval(S)
        if d not in (0, 1):
            return DichotomyReport(False, (S, g, d))
    return DichotomyReport(True)


def certify(v: Valuation) -> Valuation:
    """Copy of ``v`` flagged as checked-dichotomous, or ``NonDichotomousError``."""
    report = check_dichotomous(v)
    if not report.ok:
        S, g, d = report.counterexample
        raise NonDichotomousError(report.describe(), bundle=S, good=g, marginal=d)
    out = copy.copy(v)
    out.certified = True
    out._calls = 0
    return out


def ef1_violation(inst: Instance, A: Allocation) -> tuple[int, int] | None:
    """First pair ``(i, j)`` where ``i`` still envies ``j`` after removing any
    single good from ``A_j``; ``None`` if the allocation is EF1."""
    if not A.is_complete():
        raise ContractError("EF1 check expects a complete allocation")
    for i, v in enumerate(inst.valuations):
        own = v.value(A.bundles[i])
        for j, b in enumerate(A.bundles):
            if j == i or own >= v.value(b):
                continue
            if not any(own >= v.value(b & ~(1 << g)) for g in goods_of(b)):
                return i, j
    return None


def check_ef1(inst: Instance, A: Allocation) -> bool:
    return ef1_violation(inst, A) is None


def bf_min_total_subsidy(inst: Instance) -> tuple[Solution, int]:
    """Envy-freeable complete allocation with the least total minimal subsidy.

    Enumerates all ``n**m`` assignments of goods to agents; ties go to the
    first in lexicographic order of the assignment vector.
    """
    n, m = inst.n, inst.m
    if n**m > MAX_ALLOCATIONS:
        raise SizeGuardError(f"{n}**{m} allocations exceed the {MAX_ALLOCATIONS} guard")
    best = None
    for owners in itertools.product(range(n), repeat=m):
        bundles = [0] * n
        for g, i in enumerate(owners):
            bundles[i] |= 1 << g
        A = Allocation(tuple(bundles), m)
        D = longest_paths(build_envy_graph(inst, A))
        if D is None:
            continue
        p = tuple(int(x) for x in D.max(axis=1))
        if best is None or sum(p) < best.total:
            best = Solution(A, p)
            if best.total == 0:
                break
    return best, best.total
