"""Small hand-built instances used by tests, docs and the CLI demos."""

from .model import Additive, CappedGroups, Instance


def non_ef1_instance() -> Instance:
    """Three agents, five goods (0-indexed here):

    * agent 0: ``min(|S & {0, 3}|, 1)``
    * agent 1: ``|S & {0, 2}| + min(|S & {1, 3, 4}|, 1)``
    * agent 2: ``|S & {0}| + min(|S & {2, 3, 4}|, 1)``

    Picking goods in index order, the solver can end at
    ``({1}, {2, 4}, {0, 3})`` with subsidies ``(1, 0, 0)``, which is envy-free
    but not EF1.
    """
    m = 5
    return Instance(
        [
            CappedGroups(m, [([0, 3], 1)]),
            CappedGroups(m, [([0], 1), ([2], 1), ([1, 3, 4], 1)]),
            CappedGroups(m, [([0], 1), ([2, 3, 4], 1)]),
        ],
        m,
        name="non-ef1",
    )


def single_good_instance(n: int) -> Instance:
    """``n`` agents who all value one good: any solution needs total ``n - 1``."""
    return Instance([Additive(1, [0]) for _ in range(n)], 1, name=f"single-good-{n}")
