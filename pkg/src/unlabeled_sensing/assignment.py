"""Square linear assignment: maximize ``sum_i C[i, p(i)]`` over permutations.

:func:`lap_maximize` is a forward auction with epsilon scaling (Gauss-Seidel
bidding, one unassigned row at a time).  :func:`brute_force_lap` enumerates
all ``n!`` permutations and exists as a test oracle.
"""
from __future__ import annotations

import functools
import itertools
import math

import numpy as np
from numba import njit

from .errors import TooLarge
from .linalg import as_matrix
from .permutation import Permutation

BRUTE_FORCE_MAX_N = 9
# smallest final epsilon, relative to max|C|
EPS_FLOOR = 1e-12


@njit(cache=True)
def _auction_phase(C, prices, eps, owner, assigned):
    n = C.shape[0]
    owner[:] = -1
    assigned[:] = -1
    stack = np.arange(n - 1, -1, -1)
    top = n
    while top > 0:
        top -= 1
        i = stack[top]
        best_j = -1
        best = -np.inf
        second = -np.inf
        for j in range(n):
            v = C[i, j] - prices[j]
            if v > best:
                second = best
                best = v
                best_j = j
            elif v > second:
                second = v
        if n == 1:
            incr = eps
        else:
            incr = best - second + eps
        old = prices[best_j]
        new = old + incr
        if new <= old:
            # increment lost to rounding; force progress
            new = np.nextafter(old, np.inf)
        prices[best_j] = new
        prev = owner[best_j]
        owner[best_j] = i
        assigned[i] = best_j
        if prev >= 0:
            assigned[prev] = -1
            stack[top] = prev
            top += 1


@njit(cache=True)
def _auction(C, eps_start, eps_final):
    n = C.shape[0]
    prices = np.zeros(n)
    owner = np.empty(n, dtype=np.int64)
    assigned = np.empty(n, dtype=np.int64)
    eps = eps_start
    while True:
        _auction_phase(C, prices, eps, owner, assigned)
        if eps < eps_final:
            break
        eps /= 4.0
    return assigned


def _lattice_gap(C: np.ndarray) -> float:
    """Spacing ``delta`` if every entry is an integer multiple of it, else 0."""
    v = np.unique(C)
    if v.size < 2:
        return 0.0
    delta = float(np.min(np.diff(v)))
    steps = C / delta
    if np.all(np.abs(steps - np.rint(steps)) <= 1e-9 * max(1.0, float(np.abs(steps).max()))):
        return delta
    return 0.0


def epsilon_schedule(C: np.ndarray) -> tuple[float, float]:
    """(starting, terminating) epsilon for the scaled auction on ``C``.

    Start at ``max|C| / 2``; phases divide by 4 and stop after the first
    phase run below the terminating value.  When the entries sit on a
    lattice of spacing ``delta`` (integer profits, say), assignment totals
    differ by multiples of ``delta`` and ``delta / (n + 1)`` makes the
    result exactly optimal.  Otherwise totals can be arbitrarily close and
    the floor ``1e-12 max|C|`` applies, giving optimality within
    ``n * 1e-12 max|C|``.
    """
    n = C.shape[0]
    scale = float(np.max(np.abs(C)))
    eps_final = max(_lattice_gap(C) / (n + 1), EPS_FLOOR * scale)
    return scale / 2.0, eps_final


def assignment_value(C, mapping) -> float:
    C = np.asarray(C, dtype=np.float64)
    return math.fsum(C[np.arange(C.shape[0]), np.asarray(mapping)].tolist())


def lap_maximize(C) -> tuple[Permutation, float]:
    """Permutation ``p`` maximizing ``sum_i C[i, p(i)]`` and that maximum."""
    C = as_matrix(C, "cost matrix")
    n, k = C.shape
    if n != k:
        raise ValueError(f"cost matrix must be square, got {C.shape}")
    eps_start, eps_final = epsilon_schedule(C)
    if eps_start == 0.0:
        mapping = np.arange(n)
    else:
        mapping = _auction(np.ascontiguousarray(C), eps_start, eps_final)
    return Permutation(mapping), assignment_value(C, mapping)


@functools.lru_cache(maxsize=None)
def _all_permutations(n: int) -> np.ndarray:
    # itertools yields permutations in lexicographic order
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    perms.setflags(write=False)
    return perms


def brute_force_lap(C) -> tuple[Permutation, float]:
    """Exhaustive maximum; ties go to the lexicographically smallest mapping."""
    C = as_matrix(C, "cost matrix")
    n = C.shape[0]
    if C.shape[1] != n:
        raise ValueError(f"cost matrix must be square, got {C.shape}")
    if n > BRUTE_FORCE_MAX_N:
        raise TooLarge(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    perms = _all_permutations(n)
    totals = C[np.arange(n), perms].sum(axis=1)
    best = int(np.argmax(totals))  # first occurrence of the max
    return Permutation(perms[best]), assignment_value(C, perms[best])
