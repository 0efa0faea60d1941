"""Envy-free allocation with 0/1 subsidies for dichotomous valuations.

Goods are assigned one at a time while an envy-free solution with subsidies
in {0, 1} is maintained. For each good, ``extend`` looks for a reassignment of
the current bundles after which a most-subsidized agent gains from the good;
if none exists, ``find_sink`` tentatively hands the good to most-subsidized
agents until the required subsidies all stay below 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .envy import (
    Solution,
    build_envy_graph,
    longest_paths,
    min_subsidies,
    value_matrix,
    verify_envy_free,
)
from .errors import ContractError, NonDichotomousError
from .matching import max_weight_perfect_matching
from .model import (
    Allocation,
    Instance,
    apply_permutation,
    check_permutation,
    check_subsidies,
    checked_marginal,
    goods_of,
    most_subsidized,
    permute_subsidies,
)

logger = logging.getLogger(__name__)

EXTENDED = "Extended"
SINK = "Sink"


@dataclass(frozen=True)
class ExtendWitness:
    sigma: tuple
    kappa: int


@dataclass(frozen=True)
class SinkSearch:
    """Outcome of ``find_sink``: the agent, every candidate tried in order,
    and the allocation/subsidies obtained by giving the good to the agent."""

    agent: int
    candidates: tuple
    allocation: Allocation
    subsidies: tuple


@dataclass(frozen=True)
class TraceRecord:
    t: int
    good: int
    branch: str
    receiver: int
    allocation_after: Allocation
    subsidies_after: tuple
    oracle_calls_cum: int
    sigma: tuple | None = None
    sink_candidates: tuple = field(default=())


def _is_binary(p: Sequence[int]) -> bool:
    return all(x in (0, 1) for x in p)


def _require_unallocated(A: Allocation, g: int) -> None:
    if not 0 <= g < A.m:
        raise ContractError(f"good {g} outside 0..{A.m - 1}")
    if A.allocated >> g & 1:
        raise ContractError(f"good {g} is already allocated")


def _complete_matching(V: np.ndarray, k: int, l: int) -> tuple:
    """Best assignment of bundles ``[n] - {l}`` to agents ``[n] - {k}``,
    completed with ``k -> l``."""
    n = V.shape[0]
    rows = [i for i in range(n) if i != k]
    cols = [j for j in range(n) if j != l]
    rho = [0] * n
    rho[k] = l
    if rows:
        assignment, _ = max_weight_perfect_matching(V[np.ix_(rows, cols)])
        for a, b in enumerate(assignment):
            rho[rows[a]] = cols[b]
    return tuple(rho)


def extend(
    inst: Instance,
    A: Allocation,
    p: Sequence[int],
    g: int,
    method: str = "paths",
) -> ExtendWitness | None:
    """Find ``(sigma, kappa)`` such that reassigning bundles by ``sigma`` keeps
    the solution envy-free and ``kappa``, a most-subsidized agent afterwards,
    has marginal 1 for ``g``; ``None`` if no such pair exists.

    Candidates are scanned with agent ``k`` ascending and most-subsidized
    bundle ``l`` ascending. A pair is accepted when the best reassignment
    sending bundle ``l`` to ``k`` keeps total welfare.

    ``method="matching"`` solves one assignment problem per candidate pair.
    ``method="paths"`` (default) first rejects pairs with
    ``w(k, l) + longest(l -> k) < 0``: in an envy-freeable allocation the
    welfare loss of the best such reassignment is exactly the deficit of the
    cycle closing ``k -> l``. Only the accepted pair is matched, so both
    methods return the same witness.
    """
    p = check_subsidies(p, inst.n)
    _require_unallocated(A, g)
    if method not in ("paths", "matching"):
        raise ValueError(f"unknown method {method!r}")
    V = value_matrix(inst, A)
    base = int(np.trace(V))
    D = None
    if method == "paths":
        D = longest_paths(V - np.diag(V)[:, None])
        if D is None:
            raise ContractError("allocation is not envy-freeable")
    bit = 1 << g
    top = most_subsidized(p)
    for k in range(inst.n):
        vk = inst.valuations[k]
        for l in top:
            if D is not None and k != l and V[k, l] - V[k, k] + D[l, k] < 0:
                continue
            gain = vk.value(A.bundles[l] | bit) - int(V[k, l])
            if gain not in (0, 1):
                raise NonDichotomousError(
                    f"agent {k}: marginal of good {g} on {goods_of(A.bundles[l])} is {gain}",
                    agent=k, bundle=A.bundles[l], good=g, marginal=gain,
                )
            if gain != 1:
                continue
            rho = _complete_matching(V, k, l)
            if sum(int(V[i, rho[i]]) for i in range(inst.n)) >= base:
                return ExtendWitness(rho, k)
            if D is not None:
                raise ContractError(f"path filter accepted ({k}, {l}) but matching lost welfare")
    return None


def validate_witness(inst: Instance, A: Allocation, p: Sequence[int], g: int, witness: ExtendWitness) -> None:
    """Re-check a witness from scratch; raise ``ContractError`` if invalid."""
    sigma = check_permutation(witness.sigma, inst.n)
    B = apply_permutation(A, sigma)
    q = permute_subsidies(p, sigma)
    # envy-free under q already implies B is envy-freeable
    if not verify_envy_free(inst, Solution(B, q)):
        raise ContractError(f"reassigned solution under {sigma} is not envy-free")
    if witness.kappa not in most_subsidized(q):
        raise ContractError(f"agent {witness.kappa} is not most subsidized after reassignment")
    if checked_marginal(inst, witness.kappa, B.bundles[witness.kappa], g) != 1:
        raise ContractError(f"agent {witness.kappa} has marginal 0 for good {g}")


def apply_extend(
    inst: Instance,
    A: Allocation,
    p: Sequence[int],
    g: int,
    witness: ExtendWitness,
    checked: bool = True,
) -> Solution:
    """Reassign by the witness, give ``g`` to ``kappa``, recompute subsidies."""
    if checked:
        validate_witness(inst, A, p, g, witness)
    B = apply_permutation(A, witness.sigma).with_good(witness.kappa, g)
    q = min_subsidies(build_envy_graph(inst, B))
    if not _is_binary(q):
        raise ContractError(f"subsidies {q} left {{0, 1}} after extending; valuations may not be dichotomous")
    return Solution(B, q)


def find_sink_search(
    inst: Instance,
    A: Allocation,
    p: Sequence[int],
    g: int,
    checked: bool = True,
) -> SinkSearch:
    """Hand ``g`` to the lowest most-subsidized agent; while some agent then
    needs a subsidy of 2 or more, move ``g`` to the lowest such agent.

    Only meaningful for a non-extendable input, where no agent is tried twice.
    With ``checked`` the preconditions are verified first.
    """
    p = check_subsidies(p, inst.n)
    _require_unallocated(A, g)
    if checked:
        if not _is_binary(p):
            raise ContractError(f"subsidies {p} are not in {{0, 1}}")
        if not verify_envy_free(inst, Solution(A, p)):
            raise ContractError("input solution is not envy-free")
        if extend(inst, A, p, g) is not None:
            raise ContractError(f"solution is extendable with good {g}; FindSink does not apply")
    top = set(most_subsidized(p))
    s = min(top)
    tried = [s]
    while True:
        X = A.with_good(s, g)
        G = build_envy_graph(inst, X)
        if longest_paths(G) is None:
            raise ContractError(f"giving good {g} to agent {s} is not envy-freeable")
        phi = min_subsidies(G)
        high = [j for j, x in enumerate(phi) if x >= 2]
        if not high:
            return SinkSearch(s, tuple(tried), X, phi)
        s = high[0]
        if s in tried:
            raise ContractError(f"agent {s} selected twice; input must be extendable or non-dichotomous")
        if s not in top:
            raise ContractError(f"candidate {s} is not most subsidized")
        tried.append(s)


def find_sink(inst: Instance, A: Allocation, p: Sequence[int], g: int, checked: bool = True) -> int:
    return find_sink_search(inst, A, p, g, checked).agent


def require_dichotomous(inst: Instance) -> None:
    """Refuse valuations that are neither dichotomous by construction nor
    certified; uncertified ones on at most 20 goods are checked inline."""
    from .oracle import check_dichotomous

    for i, v in enumerate(inst.valuations):
        if v.trusted:
            continue
        if inst.m > 20:
            raise ContractError(f"agent {i}: unchecked {v.kind} valuation on {inst.m} goods; certify it first")
        report = check_dichotomous(v, inst.m)
        if not report.ok:
            S, g, d = report.counterexample
            raise NonDichotomousError(
                f"agent {i}: marginal of good {g} on {goods_of(S)} is {d}",
                agent=i, bundle=S, good=g, marginal=d,
            )


def solve(
    inst: Instance,
    order: Iterable[int] | None = None,
    checked: bool = True,
) -> tuple[Solution, list[TraceRecord]]:
    """Allocate every good; return the final solution and one trace record
    per assigned good.

    ``order`` is the sequence in which goods are picked (ascending by
    default). With ``checked`` every Extend witness is re-validated and every
    intermediate solution is verified envy-free by direct value queries.
    """
    require_dichotomous(inst)
    order = tuple(range(inst.m)) if order is None else tuple(order)
    if sorted(order) != list(range(inst.m)):
        raise ContractError(f"order must list each of the {inst.m} goods exactly once")
    start = inst.oracle_calls
    A = Allocation.empty(inst.n, inst.m)
    p = (0,) * inst.n
    trace = []
    for t, g in enumerate(order, start=1):
        witness = extend(inst, A, p, g)
        if witness is not None:
            sol = apply_extend(inst, A, p, g, witness, checked=checked)
            record = dict(branch=EXTENDED, receiver=witness.kappa, sigma=witness.sigma)
        else:
            search = find_sink_search(inst, A, p, g, checked=False)
            sol = Solution(search.allocation, search.subsidies)
            if checked:
                checked_marginal(inst, search.agent, A.bundles[search.agent], g)
            record = dict(branch=SINK, receiver=search.agent, sink_candidates=search.candidates)
        if not _is_binary(sol.subsidies):
            raise ContractError(f"step {t}: subsidies {sol.subsidies} left {{0, 1}}")
        if checked and not verify_envy_free(inst, sol):
            raise ContractError(f"step {t}: intermediate solution is not envy-free")
        A, p = sol.allocation, sol.subsidies
        trace.append(TraceRecord(
            t=t, good=g, allocation_after=A, subsidies_after=p,
            oracle_calls_cum=inst.oracle_calls - start, **record,
        ))
        logger.debug("step %d: good %d -> agent %d (%s), p=%s", t, g, record["receiver"], record["branch"], p)
    return Solution(A, p), trace
