"""Maximum-weight perfect matching on square non-negative integer matrices."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ContractError


def max_weight_perfect_matching(W) -> tuple[tuple[int, ...], int]:
    """Return ``(assignment, total)`` where row ``i`` is matched to column
    ``assignment[i]`` and ``total`` is the exact integer sum of the chosen
    entries.

    Backed by scipy's Jonker-Volgenant solver, which is deterministic for a
    fixed input. Entries are small integers, so the float internals are exact.
    """
    arr = np.asarray(W)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ContractError("empty matrix")
    if arr.dtype.kind not in "iub":
        raise ContractError(f"weights must be integers, got dtype {arr.dtype}")
    if (arr < 0).any():
        raise ContractError("weights must be non-negative")
    rows, cols = linear_sum_assignment(arr, maximize=True)
    assignment = tuple(int(c) for c in cols[np.argsort(rows)])
    total = int(sum(int(arr[i, j]) for i, j in enumerate(assignment)))
    return assignment, total
