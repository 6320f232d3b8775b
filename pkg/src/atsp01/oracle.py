"""Exact and brute-force references used by tests and the acceptance suite.

Every oracle here is independent of the solver pipeline: the tour oracle is
a subset dynamic program, the relaxed-cover oracle enumerates the split-arc
configurations directly from the cover definition and finishes with an
assignment solve, and the coloring oracle is a backtracking search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .instances import Instance

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

_NEG = -(10**9)
_FORBIDDEN = 10**6


@dataclass(frozen=True)
class OracleResult:
    value: int
    witness: object
    explored: int


def _hk_py(W: np.ndarray, n: int):
    size = 1 << n
    dp = np.full((size, n), _NEG, dtype=np.int64)
    parent = np.full((size, n), -1, dtype=np.int16)
    dp[1, 0] = 0
    for mask in range(1, size, 2):
        row = dp[mask]
        for last in range(n):
            cur = row[last]
            if cur == _NEG:
                continue
            for nxt in range(1, n):
                if (mask >> nxt) & 1:
                    continue
                nm = mask | (1 << nxt)
                val = cur + W[last, nxt]
                if val > dp[nm, nxt]:
                    dp[nm, nxt] = val
                    parent[nm, nxt] = last
    return dp, parent


if njit is not None:
    _hk_fast = njit(cache=True)(_hk_py)
else:  # pragma: no cover
    _hk_fast = _hk_py


def _held_karp(W: np.ndarray, n: int) -> tuple[int, list[int], int]:
    """Maximum-weight Hamiltonian cycle through vertex 0 by subset DP."""
    dp, parent = _hk_fast(np.ascontiguousarray(W, dtype=np.int64), n)
    full = (1 << n) - 1
    best = _NEG
    best_last = -1
    for last in range(1, n):
        if dp[full, last] == _NEG:
            continue
        val = int(dp[full, last]) + int(W[last, 0])
        if val > best:
            best = val
            best_last = last
    order = []
    mask, last = full, best_last
    while last != -1:
        order.append(last)
        mask, last = mask ^ (1 << last), int(parent[mask, last])
    order.reverse()
    explored = int(np.count_nonzero(dp != _NEG))
    return best, order, explored


def held_karp_max(inst: Instance) -> OracleResult:
    """Exact maximum tour weight; n is capped at 16 by the DP memory."""
    n = inst.n
    if n > 16:
        raise ValueError(f"held_karp_max supports n <= 16, got {n}")
    W = np.zeros((n, n), dtype=np.int64)
    for (u, v) in inst.ones:
        W[u, v] = 1
    best, order, explored = _held_karp(W, n)
    return OracleResult(best, order, explored)


def held_karp_min12(inst: Instance) -> OracleResult:
    """Exact minimum tour cost when `ones` are the cost-1 arcs, rest cost 2."""
    n = inst.n
    if n > 16:
        raise ValueError(f"held_karp_min12 supports n <= 16, got {n}")
    cost = np.full((n, n), 2, dtype=np.int64)
    for (u, v) in inst.ones:
        cost[u, v] = 1
    best, order, explored = _held_karp(-cost, n)
    return OracleResult(-best, order, explored)


# Split-pair states for the relaxed cover enumeration.  Each M-hit 2-cycle
# {u,v} admits exactly these five configurations of its four half-edges.
_PAIR_STATES = ("absent", "full_uv", "full_vu", "tails", "heads")


def brute_evading_cover(inst: Instance, m_arcs) -> OracleResult:
    """Maximum weight (in half-units, i.e. doubled) of a cycle cover that
    evades the matching given by ``m_arcs``.

    Enumerates all legal configurations of every M-hit 2-cycle and closes
    each configuration with an exact assignment over the remaining ordered
    pairs.  Returns the doubled weight plus a (fulls, halves) witness.
    """
    n = inst.n
    if n > 8:
        raise ValueError(f"brute_evading_cover supports n <= 8, got {n}")
    marcs = set(m_arcs)
    pairs = sorted(
        {(min(u, v), max(u, v)) for (u, v) in inst.ones
         if (v, u) in inst.ones and ((u, v) in marcs or (v, u) in marcs)})
    split_arcs = {(u, v) for (u, v) in pairs} | {(v, u) for (u, v) in pairs}

    best = None
    best_witness = None
    explored = 0
    for combo in itertools.product(range(5), repeat=len(pairs)):
        explored += 1
        fulls: set[tuple[int, int]] = set()
        halves: set[tuple[int, int, str]] = set()
        out_used = [False] * n
        in_used = [False] * n
        base = 0
        for (u, v), state in zip(pairs, combo):
            name = _PAIR_STATES[state]
            if name == "absent":
                continue
            if name == "full_uv":
                fulls.add((u, v))
                out_used[u] = in_used[v] = True
                base += 2
            elif name == "full_vu":
                fulls.add((v, u))
                out_used[v] = in_used[u] = True
                base += 2
            elif name == "tails":
                halves.add((u, v, "T"))
                halves.add((v, u, "T"))
                out_used[u] = out_used[v] = True
                base += 2
            else:  # heads
                halves.add((u, v, "H"))
                halves.add((v, u, "H"))
                in_used[u] = in_used[v] = True
                base += 2
        free_out = [u for u in range(n) if not out_used[u]]
        free_in = [v for v in range(n) if not in_used[v]]
        if len(free_out) != len(free_in):
            continue
        if free_out:
            k = len(free_out)
            cost = np.full((k, k), _FORBIDDEN, dtype=np.int64)
            for a, u in enumerate(free_out):
                for b, v in enumerate(free_in):
                    if u == v or (u, v) in split_arcs:
                        continue
                    cost[a, b] = -2 * inst.weight(u, v)
            rows, cols = linear_sum_assignment(cost)
            if any(cost[r, c] >= _FORBIDDEN for r, c in zip(rows, cols)):
                continue
            value = base - int(cost[rows, cols].sum())
            assign = [(free_out[r], free_in[c]) for r, c in zip(rows, cols)]
        else:
            value = base
            assign = []
        if best is None or value > best:
            best = value
            best_witness = (frozenset(fulls | set(assign)), frozenset(halves))
    if best is None:
        raise ValueError("no evading cover exists for this instance")
    return OracleResult(best, best_witness, explored)


def brute_path2color(arcs: list[tuple[int, int]], limit: int = 20):
    """Exhaustive path-2-coloring of an arc multiset, or None if impossible.

    A valid coloring gives every color class per-vertex indegree and
    outdegree at most one and no monochromatic directed cycle.
    """
    if len(arcs) > limit:
        raise ValueError(f"at most {limit} arc occurrences supported")
    m = len(arcs)
    colors = [0] * m
    outdeg: list[dict[int, int]] = [{}, {}]
    indeg: list[dict[int, int]] = [{}, {}]
    succ: list[dict[int, int]] = [{}, {}]

    def creates_cycle(c: int, u: int, v: int) -> bool:
        # Classes are unions of paths; adding (u,v) closes a cycle iff the
        # path leaving v already ends at u.
        cur = v
        s = succ[c]
        while cur in s:
            cur = s[cur]
            if cur == v:
                return True  # pre-existing corruption guard
        return cur == u

    def rec(i: int) -> bool:
        if i == m:
            return True
        u, v = arcs[i]
        for c in (0, 1):
            if outdeg[c].get(u, 0) or indeg[c].get(v, 0) or creates_cycle(c, u, v):
                continue
            colors[i] = c + 1
            outdeg[c][u] = 1
            indeg[c][v] = 1
            succ[c][u] = v
            if rec(i + 1):
                return True
            outdeg[c][u] = 0
            indeg[c][v] = 0
            del succ[c][u]
        return False

    if rec(0):
        return list(colors)
    return None
