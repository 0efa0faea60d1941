"""Random builders and independent brute-force helpers for the test suite."""

import itertools
import random

from efsubsidy.envy import Solution
from efsubsidy.io import KINDS, GeneratorConfig, generate_one
from efsubsidy.model import Allocation, Instance, Table, apply_permutation, most_subsidized, permute_subsidies
from efsubsidy.solver import solve

# Worked five-good run on fixtures.non_ef1_instance(): each step's allocation,
# the value matrix v_i(A_j), and the minimal subsidies.
WORKED_STEPS = [
    ([[0], [], []], [[1, 0, 0], [1, 0, 0], [1, 0, 0]], (0, 1, 1)),
    ([[0], [1], []], [[1, 0, 0], [1, 1, 0], [1, 0, 0]], (0, 0, 1)),
    ([[0], [1], [2]], [[1, 0, 0], [1, 1, 1], [1, 0, 1]], (0, 0, 0)),
    ([[0, 3], [1], [2]], [[1, 0, 0], [2, 1, 1], [2, 0, 1]], (0, 1, 1)),
    ([[1], [2], [0, 3]], [[0, 0, 1], [1, 1, 2], [0, 1, 2]], (1, 1, 0)),
    ([[1], [2, 4], [0, 3]], [[0, 0, 1], [1, 2, 2], [0, 1, 2]], (1, 0, 0)),
]


def random_instance(rng: random.Random, n, m, families=None) -> Instance:
    cfg = GeneratorConfig(
        seed=rng.randrange(2**31),
        n=n,
        m=m,
        families=families or {k: 1.0 for k in KINDS},
    )
    return generate_one(cfg)


def random_allocation(rng: random.Random, n: int, m: int, p_unallocated: float = 0.25) -> Allocation:
    bundles = [0] * n
    for g in range(m):
        if rng.random() >= p_unallocated:
            bundles[rng.randrange(n)] |= 1 << g
    return Allocation(tuple(bundles), m)


def random_monotone_table(rng: random.Random, m: int, top: int = 3) -> Table:
    """Additive with weights in 0..top: monotone, usually not dichotomous."""
    weights = [rng.randint(0, top) for _ in range(m)]
    values = [sum(w for g, w in enumerate(weights) if s >> g & 1) for s in range(1 << m)]
    return Table(m, values)


def direct_envy_free(inst, A, p) -> bool:
    V = [[v._eval(b) for b in A.bundles] for v in inst.valuations]
    n = inst.n
    return all(V[i][i] + p[i] >= V[i][j] + p[j] for i in range(n) for j in range(n))


def bf_extend_witnesses(inst, A, p, g):
    """Every (sigma, kappa) meeting the extendability definition, by
    enumerating all permutations and agents."""
    out = []
    bit = 1 << g
    for sigma in itertools.permutations(range(inst.n)):
        B = apply_permutation(A, sigma)
        q = permute_subsidies(p, sigma)
        if not direct_envy_free(inst, B, q):
            continue
        for k in most_subsidized(q):
            v = inst.valuations[k]
            if v._eval(B.bundles[k] | bit) - v._eval(B.bundles[k]) == 1:
                out.append((sigma, k))
    return out


def solver_states(rng: random.Random, count: int, n_range=(2, 4), m_range=(1, 5)):
    """Yield ``(inst, A, p, g)``: a state reached by the solver on a random
    instance, with the good it picks next."""
    produced = 0
    while produced < count:
        inst = random_instance(rng, rng.randint(*n_range), rng.randint(*m_range))
        if inst.m == 0:
            continue
        order = list(range(inst.m))
        rng.shuffle(order)
        _, trace = solve(inst, order=order, checked=False)
        t = rng.randrange(inst.m)
        if t == 0:
            A, p = Allocation.empty(inst.n, inst.m), (0,) * inst.n
        else:
            A, p = trace[t - 1].allocation_after, trace[t - 1].subsidies_after
        produced += 1
        yield inst, A, p, order[t]


def random_envy_free_solution(rng, inst, A):
    """``A`` reassigned to maximize welfare, with its minimal subsidies."""
    from efsubsidy.envy import build_envy_graph, min_subsidies, welfare_maximal_reassignment

    B = apply_permutation(A, welfare_maximal_reassignment(inst, A))
    return Solution(B, min_subsidies(build_envy_graph(inst, B)))
