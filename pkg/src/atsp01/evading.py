"""Maximum matching M_max and the relaxed cycle cover that evades it.

The cover is computed through an undirected gadget graph G' whose perfect
matchings correspond exactly to relaxed cycle covers: every ordered pair
(u,v) that does not lie on an M-hit 2-cycle becomes a single edge between
u's out-node and v's in-node, while arcs of M-hit 2-cycles are split into
two-node widgets wired to a pair of gadget nodes that enforce the legal
half-edge configurations.  Because every out-node and in-node must be
matched, any perfect matching decodes to a structure in which each vertex
has exactly one outgoing and one incoming element.

After decoding, matched 0-arcs are discarded and re-derived by a
deterministic chain completion, which normalizes certificates and keeps
weight-1 pair multiplicities in the downstream multigraph within bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InternalInvariantError
from .instances import Instance
from .matching import UGraph, UMatching, max_cardinality_matching

TAIL = "T"
HEAD = "H"


@dataclass(frozen=True)
class DirectedMatching:
    """Vertex-disjoint arc set; perfect when every vertex is covered."""

    n: int
    arcs: tuple[tuple[int, int], ...]
    one_arcs: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(sorted(self.arcs)))
        seen = set()
        for (u, v) in self.arcs:
            if u == v:
                raise ValueError("matching arc may not be a loop")
            if u in seen or v in seen:
                raise ValueError("matching arcs must be vertex-disjoint")
            seen.update((u, v))
        if not self.one_arcs <= set(self.arcs):
            raise ValueError("one_arcs must be a subset of arcs")

    @property
    def weight(self) -> int:
        return len(self.one_arcs)

    def is_perfect(self) -> bool:
        return 2 * len(self.arcs) == self.n

    def covers(self) -> set[int]:
        return {x for arc in self.arcs for x in arc}


@dataclass(frozen=True)
class EvadingCover:
    """Relaxed cycle cover: whole arcs plus half-arcs of split arcs.

    ``half_arcs`` entries are (u, v, part) where part is "T" for the tail
    half (incident with u) and "H" for the head half (incident with v).
    Weights are kept in doubled half-units so they stay integral.
    """

    n: int
    ones_full: frozenset[tuple[int, int]]
    zeros_full: frozenset[tuple[int, int]]
    half_arcs: frozenset[tuple[int, int, str]]
    replaced_pairs: tuple[tuple[int, int], ...] = field(default=())

    @property
    def weight_x2(self) -> int:
        return 2 * len(self.ones_full) + len(self.half_arcs)


def m_hit_pairs(inst: Instance, arcs) -> set[tuple[int, int]]:
    """Unordered M-hit 2-cycles of G_1: both directions weigh one and the
    matching uses at least one of them."""
    arcset = set(arcs)
    return {(min(u, v), max(u, v)) for (u, v) in inst.ones
            if (v, u) in inst.ones and ((u, v) in arcset or (v, u) in arcset)}


def compute_m_max(inst: Instance) -> DirectedMatching:
    """Maximum-weight perfect matching of the instance, built by a maximum
    cardinality matching on the undirected support of the 1-arcs, completed
    with 0-arcs pairing the leftover vertices low-to-high."""
    if inst.n % 2 != 0:
        raise ValueError("compute_m_max requires an even vertex count")
    support = sorted({(min(u, v), max(u, v)) for (u, v) in inst.ones})
    arcs: list[tuple[int, int]] = []
    one_arcs: set[tuple[int, int]] = set()
    if support:
        g = UGraph(inst.n, tuple((a, b, 1) for (a, b) in support))
        matching = max_cardinality_matching(g)
        for (a, b) in matching.pairs():
            if (a, b) in inst.ones:
                arc = (a, b)  # lexicographically smaller when both exist
            else:
                arc = (b, a)
            arcs.append(arc)
            one_arcs.add(arc)
    covered = {x for arc in arcs for x in arc}
    rest = [v for v in range(inst.n) if v not in covered]
    for i in range(0, len(rest), 2):
        arcs.append((rest[i], rest[i + 1]))
    return DirectedMatching(inst.n, tuple(arcs), frozenset(one_arcs))


@dataclass
class GadgetGraph:
    """G' plus the back-maps needed to decode a perfect matching."""

    inst: Instance
    m: DirectedMatching
    graph: UGraph
    out_node: list[int]
    in_node: list[int]
    split_pairs: list[tuple[int, int]]
    split_nodes: dict[tuple[int, int], tuple[int, int]]  # arc -> (e1, e2)
    gadget_nodes: dict[tuple[int, int], tuple[int, int]]  # pair -> (a, b)

    def node_count(self) -> int:
        return self.graph.n


def build_gprime(inst: Instance, m: DirectedMatching) -> GadgetGraph:
    """Construct the undirected gadget graph for the evading-cover matching.

    Non-split ordered pairs collapse to a single (u_out, v_in) edge of
    weight 2*w(u,v); arcs on M-hit 2-cycles get the split widget
    u_out - e1 - e2 - v_in with outer weights 1 (the doubled half-weights),
    and each M-hit pair receives the two gadget nodes a, b wired with
    weight-0 edges that admit exactly the legal half-edge configurations.
    """
    if not m.is_perfect():
        raise ValueError("build_gprime needs a perfect matching")
    n = inst.n
    out_node = list(range(n))
    in_node = [n + v for v in range(n)]
    next_id = 2 * n

    split_pairs = sorted(m_hit_pairs(inst, m.arcs))
    split_arcs = sorted({(u, v) for (u, v) in split_pairs} |
                        {(v, u) for (u, v) in split_pairs})
    split_nodes: dict[tuple[int, int], tuple[int, int]] = {}
    for arc in split_arcs:
        split_nodes[arc] = (next_id, next_id + 1)
        next_id += 2
    gadget_nodes: dict[tuple[int, int], tuple[int, int]] = {}
    for pair in split_pairs:
        gadget_nodes[pair] = (next_id, next_id + 1)
        next_id += 2

    split_set = set(split_arcs)
    edges: list[tuple[int, int, int]] = []
    for u in range(n):
        for v in range(n):
            if u == v or (u, v) in split_set:
                continue
            edges.append((out_node[u], in_node[v], 2 * inst.weight(u, v)))
    for (u, v) in split_arcs:
        e1, e2 = split_nodes[(u, v)]
        edges.append((out_node[u], e1, 1))
        edges.append((in_node[v], e2, 1))
        edges.append((e1, e2, 0))
    for (u, v) in split_pairs:
        a, b = gadget_nodes[(u, v)]
        edges.append((a, split_nodes[(u, v)][0], 0))
        edges.append((a, split_nodes[(v, u)][1], 0))
        edges.append((b, split_nodes[(v, u)][0], 0))
        edges.append((b, split_nodes[(u, v)][1], 0))

    graph = UGraph(next_id, tuple(edges))
    return GadgetGraph(inst, m, graph, out_node, in_node,
                       split_pairs, split_nodes, gadget_nodes)


def extract_cover(gg: GadgetGraph, pm: UMatching) -> EvadingCover:
    """Decode a perfect matching of G' into an evading cover.

    The matched 0-arcs are normalized: they are stripped and re-derived by
    chaining the open pieces of the decoded 1-arc structure into a single
    cycle (closing a lone piece on itself only when it is alone), ties
    broken by lowest vertex id.
    """
    inst = gg.inst
    n = inst.n
    mate = pm.mate
    if any(mate[x] == -1 for x in gg.out_node + gg.in_node):
        raise InternalInvariantError("matching does not cover all vertex nodes")

    split_set = set(gg.split_nodes)
    fulls: set[tuple[int, int]] = set()
    halves: set[tuple[int, int, str]] = set()
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if (u, v) in split_set:
                e1, e2 = gg.split_nodes[(u, v)]
                tail = mate[gg.out_node[u]] == e1
                head = mate[gg.in_node[v]] == e2
                if tail and head:
                    fulls.add((u, v))
                elif tail:
                    halves.add((u, v, TAIL))
                elif head:
                    halves.add((u, v, HEAD))
            elif mate[gg.out_node[u]] == gg.in_node[v]:
                fulls.add((u, v))

    ones_full = {a for a in fulls if a in inst.ones}
    completion = _complete_with_zero_arcs(inst, ones_full, halves)
    ones_full |= {a for a in completion if a in inst.ones}
    zeros_full = {a for a in completion if a not in inst.ones}
    return EvadingCover(n, frozenset(ones_full), frozenset(zeros_full),
                        frozenset(halves))


def _complete_with_zero_arcs(inst: Instance, ones_full, halves):
    """Deterministic 0-arc completion of a partial cover structure."""
    n = inst.n
    out_used = [False] * n
    in_used = [False] * n
    for (u, v) in ones_full:
        out_used[u] = True
        in_used[v] = True
    for (u, v, part) in halves:
        if part == TAIL:
            out_used[u] = True
        else:
            in_used[v] = True

    need_out = [v for v in range(n) if not out_used[v]]
    need_in = [v for v in range(n) if not in_used[v]]
    if len(need_out) != len(need_in):
        raise InternalInvariantError("unbalanced open cover structure")
    if not need_out:
        return []

    # Group deficiencies by connected component of the decoded 1-arc
    # structure; the weight-1 arcs form vertex-disjoint paths, so every
    # component exposes at most one open tail and at most one open head.
    comp = list(range(n))

    def find(x: int) -> int:
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    for (u, v) in ones_full:
        ru, rv = find(u), find(v)
        if ru != rv:
            comp[ru] = rv
    groups: dict[int, dict] = {}
    for v in need_out + need_in:
        groups.setdefault(find(v), {"out": None, "in": None})
    for v in need_out:
        groups[find(v)]["out"] = v
    for v in need_in:
        groups[find(v)]["in"] = v

    def key(g):
        return min(x for x in (g["out"], g["in"]) if x is not None)

    both = sorted((g for g in groups.values()
                   if g["out"] is not None and g["in"] is not None), key=key)
    starts = sorted((g for g in groups.values()
                     if g["out"] is not None and g["in"] is None), key=key)
    ends = sorted((g for g in groups.values()
                   if g["out"] is None and g["in"] is not None), key=key)
    if len(starts) != len(ends):
        raise InternalInvariantError("half-terminated pieces do not balance")

    added: list[tuple[int, int]] = []
    if not starts:
        # Close all open paths into a single cycle across the components.
        if len(both) == 1 and both[0]["out"] == both[0]["in"]:
            raise InternalInvariantError("single open piece cannot close on itself")
        for t, g in enumerate(both):
            added.append((g["out"], both[(t + 1) % len(both)]["in"]))
    else:
        # Thread every two-ended open path into the first chain; the other
        # chains connect a half-started piece directly to a half-ended one.
        chain = [starts[0]] + both + [ends[0]]
        for a, b in zip(chain, chain[1:]):
            added.append((a["out"], b["in"]))
        for a, b in zip(starts[1:], ends[1:]):
            added.append((a["out"], b["in"]))
    for (u, v) in added:
        if u == v:
            raise InternalInvariantError("completion would add a self-loop")
    return added


def verify_evading(cover: EvadingCover, inst: Instance,
                   m: DirectedMatching) -> str | None:
    """Literal check of the evading-cover conditions; None means pass.

    (i)  every vertex has exactly one outgoing and one incoming element;
    (ii) every M-hit 2-cycle carries zero or two of its four half-edges,
         lone halves pair up across the two directions, one incident with
         each endpoint.
    """
    n = inst.n
    for (u, v) in cover.ones_full:
        if (u, v) not in inst.ones:
            return f"arc ({u},{v}) listed as weight-1 but weighs 0"
    for (u, v) in cover.zeros_full:
        if (u, v) in inst.ones:
            return f"arc ({u},{v}) listed as weight-0 but weighs 1"
        if (u, v) in cover.ones_full:
            return f"arc ({u},{v}) listed twice"

    pairs = m_hit_pairs(inst, m.arcs)
    split_arcs = {(u, v) for (u, v) in pairs} | {(v, u) for (u, v) in pairs}
    out_count = [0] * n
    in_count = [0] * n
    for (u, v) in list(cover.ones_full) + list(cover.zeros_full):
        out_count[u] += 1
        in_count[v] += 1
    for (u, v, part) in cover.half_arcs:
        if (u, v) not in split_arcs:
            return f"half-arc of ({u},{v}) which is not on an M-hit 2-cycle"
        if part == TAIL:
            out_count[u] += 1
        elif part == HEAD:
            in_count[v] += 1
        else:
            return f"unknown half-arc part {part!r}"
    for v in range(n):
        if out_count[v] != 1:
            return f"vertex {v} has {out_count[v]} outgoing elements"
        if in_count[v] != 1:
            return f"vertex {v} has {in_count[v]} incoming elements"

    fulls = cover.ones_full | cover.zeros_full
    for (u, v) in sorted(pairs):
        incident = []  # (vertex the half-edge is incident with, arc)
        for (a, b) in ((u, v), (v, u)):
            if (a, b, TAIL) in cover.half_arcs:
                incident.append((a, (a, b)))
            if (a, b, HEAD) in cover.half_arcs:
                incident.append((b, (a, b)))
        count = (2 * ((u, v) in fulls) + 2 * ((v, u) in fulls) + len(incident))
        if count not in (0, 2):
            return f"M-hit 2-cycle {{{u},{v}}} carries {count} half-edges"
        if len(incident) == 2:
            verts = {x for (x, _arc) in incident}
            arcs = {arc for (_x, arc) in incident}
            if verts != {u, v} or len(arcs) != 2:
                return (f"lone half-edges of M-hit 2-cycle {{{u},{v}}} "
                        "do not pair across directions")
        elif len(incident) == 1:
            return f"M-hit 2-cycle {{{u},{v}}} carries a single lone half-edge"
    return None
