"""Envy graphs, envy-freeability and pointwise-minimal subsidies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractError
from .matching import max_weight_perfect_matching
from .model import (
    Allocation,
    Instance,
    apply_permutation,
    check_permutation,
    check_subsidies,
    permute_subsidies,
)


@dataclass(frozen=True)
class Solution:
    allocation: Allocation
    subsidies: tuple

    def __post_init__(self):
        object.__setattr__(self, "subsidies", check_subsidies(self.subsidies, self.allocation.n))

    @property
    def total(self) -> int:
        return sum(self.subsidies)


@dataclass(frozen=True, eq=False)
class EnvyGraph:
    """Complete weighted digraph on agents.

    ``values[i, j] = v_i(A_j)``; the edge weight is
    ``w[i, j] = values[i, j] - values[i, i]``.
    """

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def w(self) -> np.ndarray:
        return self.values - np.diag(self.values)[:, None]


def value_matrix(inst: Instance, A: Allocation) -> np.ndarray:
    """``M[i, j] = v_i(A_j)``, one oracle query per entry."""
    if A.n != inst.n or A.m != inst.m:
        raise ContractError(f"allocation shape ({A.n}, {A.m}) does not match instance ({inst.n}, {inst.m})")
    rows = [v.values(A.bundles) for v in inst.valuations]
    return np.array(rows, dtype=np.int64).reshape(inst.n, inst.n)


def build_envy_graph(inst: Instance, A: Allocation) -> EnvyGraph:
    return EnvyGraph(value_matrix(inst, A))


def _as_weights(G) -> np.ndarray:
    if isinstance(G, EnvyGraph):
        return G.w
    w = np.asarray(G, dtype=np.int64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ContractError(f"weight matrix must be square, got shape {w.shape}")
    return w


def _bellman_ford_has_negative_cycle(cost: np.ndarray) -> bool:
    # virtual source with zero-cost edges to every agent
    n = cost.shape[0]
    dist = np.zeros(n, dtype=np.int64)
    for _ in range(n + 1):
        relaxed = np.minimum(dist, (dist[:, None] + cost).min(axis=0))
        if np.array_equal(relaxed, dist):
            return False
        dist = relaxed
    return True


def longest_paths(G) -> np.ndarray | None:
    """All-pairs maximum path weights, or ``None`` on a positive cycle.

    Floyd-Warshall on the weights directly (equivalently, shortest paths on
    negated weights). The diagonal is 0 and entry ``[i, j]`` is the heaviest
    path from ``i`` to ``j``; with no positive cycle, walks never beat paths.
    """
    D = _as_weights(G).copy()
    n = D.shape[0]
    np.fill_diagonal(D, np.maximum(np.diag(D), 0))
    for k in range(n):
        np.maximum(D, D[:, k : k + 1] + D[k : k + 1, :], out=D)
        if (np.diag(D) > 0).any():
            return None
    return D


def is_envy_freeable(G, method: str = "bellman_ford") -> bool:
    """True iff the envy graph has no cycle of strictly positive weight."""
    w = _as_weights(G)
    if w.shape[0] == 0:
        return True
    if method == "bellman_ford":
        return not _bellman_ford_has_negative_cycle(-w)
    if method == "floyd_warshall":
        return longest_paths(w) is not None
    raise ValueError(f"unknown method {method!r}")


def min_subsidies(G) -> tuple:
    """Pointwise-minimal envy-free subsidies: heaviest path from each agent,
    the empty path included so every entry is at least 0."""
    D = longest_paths(G)
    if D is None:
        raise ContractError("envy graph has a positive-weight cycle; allocation is not envy-freeable")
    return tuple(int(x) for x in D.max(axis=1))


def welfare(inst: Instance, A: Allocation) -> int:
    return sum(v.value(b) for v, b in zip(inst.valuations, A.bundles))


def welfare_maximal_reassignment(inst: Instance, A: Allocation) -> tuple:
    """Permutation of bundles maximizing total value; the reassigned
    allocation is envy-freeable."""
    sigma, _ = max_weight_perfect_matching(value_matrix(inst, A))
    return sigma


def envy_violation(inst: Instance, sol: Solution) -> tuple[int, int, int] | None:
    """First ``(i, j, envy)`` with ``v_i(A_i) + p_i < v_i(A_j) + p_j``.

    Deliberately a plain double loop over value queries, sharing nothing with
    the graph code, so it can referee it.
    """
    A, p = sol.allocation, sol.subsidies
    if A.n != inst.n:
        raise ContractError(f"solution has {A.n} bundles for {inst.n} agents")
    for i, v in enumerate(inst.valuations):
        own = v.value(A.bundles[i]) + p[i]
        for j in range(inst.n):
            if j == i:
                continue
            other = v.value(A.bundles[j]) + p[j]
            if own < other:
                return i, j, other - own
    return None


def verify_envy_free(inst: Instance, sol: Solution) -> bool:
    return envy_violation(inst, sol) is None


def reshuffle_solution(sol: Solution, sigma: Sequence[int], inst: Instance, checked: bool = True) -> Solution:
    """Reassign bundles and subsidies together by ``sigma``.

    If ``sol`` is envy-free and the reassigned allocation is envy-freeable,
    the result is envy-free as well (this holds for arbitrary monotone
    valuations, not only dichotomous ones).
    """
    sigma = check_permutation(sigma, sol.allocation.n)
    B = apply_permutation(sol.allocation, sigma)
    if checked:
        if not verify_envy_free(inst, sol):
            raise ContractError("input solution is not envy-free")
        if not is_envy_freeable(build_envy_graph(inst, B)):
            raise ContractError("reassigned allocation is not envy-freeable")
    out = Solution(B, permute_subsidies(sol.subsidies, sigma))
    if checked and not verify_envy_free(inst, out):
        raise ContractError("reshuffled solution is not envy-free")
    return out
