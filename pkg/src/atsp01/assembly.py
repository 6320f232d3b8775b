"""Assembly of the degree-3 multigraph from the matching and the cover.

Half-arc pairs are first replaced by whole arcs oriented against the
matching arc of their 2-cycle, then one copy of the matching and one copy
of the cover are merged.  Every vertex of the result has total degree
three, indegree at most two and outdegree at most two; weight-1 arcs never
exceed two occurrences per vertex pair.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InternalInvariantError
from .evading import TAIL, DirectedMatching, EvadingCover


@dataclass(frozen=True)
class GmArc:
    u: int
    v: int
    w: int
    src: str  # "M" matching copy, "C" cover copy


@dataclass(frozen=True)
class AssembledMultigraph:
    n: int
    arcs: tuple[GmArc, ...]
    # 2-cycles created by half-arc replacement: the cover arc of each, with
    # the opposing matching arc implied.  The coloring stage shrinks these.
    two_cycles: tuple[tuple[int, int], ...]

    def one_arc_count(self) -> int:
        return sum(1 for a in self.arcs if a.w == 1)


def replace_half_arc_pairs(c: EvadingCover, m: DirectedMatching) -> EvadingCover:
    """Replace each half-arc pair on {u,v} with the whole arc opposing the
    matching arc of that 2-cycle; total weight is unchanged."""
    by_pair: dict[tuple[int, int], list[tuple[int, int, str]]] = {}
    for h in c.half_arcs:
        u, v, _part = h
        by_pair.setdefault((min(u, v), max(u, v)), []).append(h)

    marcs = set(m.arcs)
    new_ones = set(c.ones_full)
    replaced: list[tuple[int, int]] = []
    for pair, hs in sorted(by_pair.items()):
        u, v = pair
        if len(hs) != 2:
            raise InternalInvariantError(
                f"dangling half-arc on pair {{{u},{v}}}")
        parts = {h[2] for h in hs}
        arcs = {(h[0], h[1]) for h in hs}
        if len(parts) != 1 or arcs != {(u, v), (v, u)}:
            raise InternalInvariantError(
                f"half-arc pair on {{{u},{v}}} is not a tail-tail or "
                "head-head configuration")
        if (v, u) in marcs:
            new = (u, v)
        elif (u, v) in marcs:
            new = (v, u)
        else:
            raise InternalInvariantError(
                f"half-arc pair on non-M-hit pair {{{u},{v}}}")
        if new in new_ones:
            raise InternalInvariantError(f"replacement arc {new} already present")
        new_ones.add(new)
        replaced.append(new)
    return EvadingCover(c.n, frozenset(new_ones), c.zeros_full, frozenset(),
                        tuple(sorted(replaced)))


def build_gm(m: DirectedMatching, c: EvadingCover) -> AssembledMultigraph:
    """One copy of the matching plus one copy of the (whole-arc) cover."""
    if c.half_arcs:
        raise ValueError("build_gm needs a cover with whole arcs only")
    n = c.n
    arcs = [GmArc(u, v, 1 if (u, v) in m.one_arcs else 0, "M")
            for (u, v) in m.arcs]
    arcs.extend(GmArc(u, v, 1, "C") for (u, v) in sorted(c.ones_full))
    arcs.extend(GmArc(u, v, 0, "C") for (u, v) in sorted(c.zeros_full))

    indeg = [0] * n
    outdeg = [0] * n
    one_pair_count: dict[tuple[int, int], int] = {}
    for a in arcs:
        outdeg[a.u] += 1
        indeg[a.v] += 1
        if a.w == 1:
            key = (min(a.u, a.v), max(a.u, a.v))
            one_pair_count[key] = one_pair_count.get(key, 0) + 1
    for v in range(n):
        if indeg[v] + outdeg[v] != 3:
            raise InternalInvariantError(
                f"vertex {v} has degree {indeg[v] + outdeg[v]}, expected 3")
        if indeg[v] > 2 or outdeg[v] > 2:
            raise InternalInvariantError(
                f"vertex {v} exceeds in/outdegree 2 ({indeg[v]}/{outdeg[v]})")
    for pair, cnt in one_pair_count.items():
        if cnt > 2:
            raise InternalInvariantError(
                f"pair {pair} carries {cnt} weight-1 arcs")

    gm = AssembledMultigraph(n, tuple(arcs), c.replaced_pairs)
    expected = m.weight + len(c.ones_full)
    if gm.one_arc_count() != expected:
        raise InternalInvariantError(
            f"weight-1 arc count {gm.one_arc_count()} != w(M)+w(C) = {expected}")
    return gm
