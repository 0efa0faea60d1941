"""Envy-free allocations of indivisible goods with 0/1 subsidies for
agents with dichotomous valuations."""

from .envy import (
    EnvyGraph,
    Solution,
    build_envy_graph,
    is_envy_freeable,
    min_subsidies,
    reshuffle_solution,
    verify_envy_free,
    welfare_maximal_reassignment,
)
from .errors import ContractError, InvalidQueryError, NonDichotomousError, ParseError, SizeGuardError
from .model import (
    Additive,
    Allocation,
    BundlePacking,
    CappedGroups,
    Instance,
    Table,
    Threshold,
    Valuation,
    apply_permutation,
    goods_of,
    marginal,
    most_subsidized,
    to_mask,
    value,
)
from .solver import extend, find_sink, solve

__version__ = "0.1.0"
