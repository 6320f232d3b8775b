"""Path-2-coloring of the assembled degree-3 multigraph.

The pipeline mirrors the structure of the weight split used by the solver:

1. matching arcs opposite a cover arc are replaced by parallel copies,
2. 0-arcs are discarded and the surviving cover arcs are regrouped into
   cycles and maximal paths,
3. the remaining 2-cycles (cover 2-cycles and the ones created by half-arc
   replacement) are shrunk to single vertices,
4. rays and chords of every cycle and path are flipped into parallel
   copies ("ichords") until each cycle keeps rays of one direction only
   and each path keeps at most one ray or a ray pair at a rayter arc,
5. the surviving rays are wired into an auxiliary graph H (rayter pairs
   contracted, selected cycle rays and allied good rays glued) which is
   colored alternately,
6. the ray colors are extended over all remaining arcs, and
7. the shrunk 2-cycles are expanded again without recoloring anything.

Everything operates on ``Occ`` arc occurrences that remember their
coordinates in the original multigraph, so the final coloring is reported
in that vertex space.

In lenient mode any configuration the flipping rules cannot place falls
back to an exhaustive coloring of the offending component; strict mode
raises so such configurations surface in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .assembly import AssembledMultigraph
from .errors import InternalInvariantError
from . import oracle as _oracle


class Occ:
    """One arc occurrence of the working multigraph."""

    __slots__ = ("oid", "u", "v", "src", "w", "gu", "gv", "alive")

    def __init__(self, oid, u, v, src, w, gu=None, gv=None):
        self.oid = oid
        self.u = u
        self.v = v
        self.src = src  # "C" cover, "M" matching, "I" flipped copy
        self.w = w
        self.gu = u if gu is None else gu
        self.gv = v if gv is None else gv
        self.alive = True

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Occ({self.oid},{self.u}->{self.v},{self.src},w{self.w})"


class WorkGraph:
    def __init__(self, n: int):
        self.n0 = n
        self.next_vertex = n
        self.occs: list[Occ] = []

    @classmethod
    def from_gm(cls, gm: AssembledMultigraph) -> "WorkGraph":
        work = cls(gm.n)
        for a in gm.arcs:
            work.add(a.u, a.v, a.src, a.w)
        return work

    def add(self, u, v, src, w, gu=None, gv=None) -> Occ:
        occ = Occ(len(self.occs), u, v, src, w, gu, gv)
        self.occs.append(occ)
        return occ

    def alive(self) -> list[Occ]:
        return [o for o in self.occs if o.alive]

    def one_count(self) -> int:
        return sum(1 for o in self.occs if o.alive and o.w == 1)

    def new_vertex(self) -> int:
        v = self.next_vertex
        self.next_vertex += 1
        return v


def _cover_degree_maps(work: WorkGraph):
    outm: dict[int, list[Occ]] = {}
    inm: dict[int, list[Occ]] = {}
    for o in work.occs:
        if o.alive and o.src == "C":
            outm.setdefault(o.u, []).append(o)
            inm.setdefault(o.v, []).append(o)
    return outm, inm


def _decompose_cover(work: WorkGraph):
    """Split the alive cover arcs into directed cycles and maximal paths."""
    outm, inm = _cover_degree_maps(work)

    def through(v: int) -> bool:
        return len(outm.get(v, ())) == 1 and len(inm.get(v, ())) == 1

    used: set[int] = set()
    paths: list[list[Occ]] = []
    starts = [o for o in work.occs
              if o.alive and o.src == "C" and not through(o.u)]
    for start in sorted(starts, key=lambda o: (o.u, o.v, o.oid)):
        if start.oid in used:
            continue
        path = [start]
        used.add(start.oid)
        cur = start.v
        while through(cur):
            nxt = outm[cur][0]
            if nxt.oid in used:
                break
            path.append(nxt)
            used.add(nxt.oid)
            cur = nxt.v
        paths.append(path)

    cycles: list[list[Occ]] = []
    for o in sorted((o for o in work.occs if o.alive and o.src == "C"),
                    key=lambda o: (o.u, o.v, o.oid)):
        if o.oid in used:
            continue
        cyc = [o]
        used.add(o.oid)
        cur = o.v
        while cur != o.u:
            nxt = outm[cur][0]
            cyc.append(nxt)
            used.add(nxt.oid)
            cur = nxt.v
        # Normalize rotation to start at the smallest tail vertex.
        k = min(range(len(cyc)), key=lambda i: cyc[i].u)
        cycles.append(cyc[k:] + cyc[:k])
    return cycles, paths


def duplicate_opposite_matching_arcs(work: WorkGraph) -> int:
    """Replace matching 1-arcs opposite a cover 1-arc by a parallel copy of
    the cover arc.  Path ending arcs are exempt.  Returns the replacement
    count; the weight-1 occurrence count is unchanged."""
    cycles, paths = _decompose_cover(work)
    m_index = {(o.u, o.v): o for o in work.occs
               if o.alive and o.src == "M" and o.w == 1}
    replaced = 0

    def handle(e: Occ):
        nonlocal replaced
        if e.w != 1:
            return
        opp = m_index.get((e.v, e.u))
        if opp is not None and opp.alive:
            opp.alive = False
            work.add(e.u, e.v, "I", 1, e.gu, e.gv)
            replaced += 1

    for cyc in cycles:
        for e in cyc:
            handle(e)
    for path in paths:
        for e in path[1:-1]:
            handle(e)
    return replaced


@dataclass
class Skeleton:
    """Working multigraph plus its cover decomposition into 1-arc comps."""

    work: WorkGraph
    cycles: list[list[Occ]] = field(default_factory=list)
    paths: list[list[Occ]] = field(default_factory=list)
    cycle_of: dict[int, int] = field(default_factory=dict)
    path_of: dict[int, int] = field(default_factory=dict)

    def refresh(self):
        self.cycles, self.paths = _decompose_cover(self.work)
        self.cycle_of = {}
        self.path_of = {}
        for i, cyc in enumerate(self.cycles):
            for o in cyc:
                self.cycle_of[o.u] = i
                self.cycle_of[o.v] = i
        for i, path in enumerate(self.paths):
            for o in path:
                self.path_of[o.u] = i
                self.path_of[o.v] = i

    def on_component(self, v: int) -> bool:
        return v in self.cycle_of or v in self.path_of


def strip_zero_arcs(work: WorkGraph) -> Skeleton:
    """Discard all 0-arcs and regroup the cover into cycles and paths."""
    for o in work.occs:
        if o.alive and o.w == 0:
            o.alive = False
    skel = Skeleton(work)
    skel.refresh()
    return skel


@dataclass
class ShrinkRecord:
    s: int
    a: int
    b: int
    internals: list[Occ]
    kind: str  # "cover2" / "straight" / "halfm"


def _alive_m_occs(work: WorkGraph) -> list[Occ]:
    return [o for o in work.occs if o.alive and o.src == "M" and o.w == 1]


def shrink_two_cycles(skel: Skeleton) -> list[ShrinkRecord]:
    """Shrink every remaining 2-cycle into a single vertex.

    A cover 2-cycle with an inray at one vertex and an outray at the other
    first has the against-the-flow arc replaced by a second copy of the
    other arc, so that the expansion step can always recolor the pair.
    """
    work = skel.work
    log: list[ShrinkRecord] = []
    targets: list[tuple[int, int, str, list[Occ]]] = []

    for cyc in skel.cycles:
        if len(cyc) == 2:
            a, b = cyc[0].u, cyc[0].v
            targets.append((min(a, b), max(a, b), "cover2", list(cyc)))
    cover_pairs = {(t[0], t[1]) for t in targets}
    c_index = {(o.u, o.v): o for o in work.occs
               if o.alive and o.src == "C" and o.w == 1}
    for m_occ in _alive_m_occs(work):
        c_opp = c_index.get((m_occ.v, m_occ.u))
        if c_opp is None:
            continue
        key = (min(m_occ.u, m_occ.v), max(m_occ.u, m_occ.v))
        if key in cover_pairs:
            raise InternalInvariantError(
                f"matching arc inside an M-hit cover 2-cycle {key}")
        targets.append((key[0], key[1], "halfm", [c_opp, m_occ]))

    m_at: dict[int, list[Occ]] = {}
    for o in _alive_m_occs(work):
        m_at.setdefault(o.u, []).append(o)
        m_at.setdefault(o.v, []).append(o)

    for (a, b, kind, internals) in sorted(targets, key=lambda t: (t[0], t[1])):
        if kind == "cover2":
            arc_ab = next(o for o in internals if o.u == a)
            arc_ba = next(o for o in internals if o.u == b)
            inray_a = any(o.alive and o.v == a for o in m_at.get(a, ()))
            outray_a = any(o.alive and o.u == a for o in m_at.get(a, ()))
            inray_b = any(o.alive and o.v == b for o in m_at.get(b, ()))
            outray_b = any(o.alive and o.u == b for o in m_at.get(b, ()))
            if inray_a and outray_b:
                # Flow passes a -> b; duplicate (a,b) in place of (b,a).
                arc_ba.alive = False
                copy = work.add(arc_ab.u, arc_ab.v, "I", 1, arc_ab.gu, arc_ab.gv)
                internals = [arc_ab, copy]
                kind = "straight"
            elif inray_b and outray_a:
                arc_ab.alive = False
                copy = work.add(arc_ba.u, arc_ba.v, "I", 1, arc_ba.gu, arc_ba.gv)
                internals = [arc_ba, copy]
                kind = "straight"
        s = work.new_vertex()
        for o in internals:
            o.alive = False
        for o in work.occs:
            if not o.alive:
                continue
            if o.u in (a, b):
                o.u = s
            if o.v in (a, b):
                o.v = s
            if o.u == o.v:
                raise InternalInvariantError(
                    f"shrinking {{{a},{b}}} created a self-loop")
        log.append(ShrinkRecord(s, a, b, internals, kind))

    skel.refresh()
    for cyc in skel.cycles:
        if len(cyc) == 2:
            raise InternalInvariantError("cover 2-cycle survived shrinking")
    c_index = {(o.u, o.v) for o in work.occs
               if o.alive and o.src == "C" and o.w == 1}
    for m_occ in _alive_m_occs(work):
        if (m_occ.v, m_occ.u) in c_index:
            raise InternalInvariantError("matching/cover 2-cycle survived shrinking")
    return log


def _multiplicity(work: WorkGraph) -> dict[tuple[int, int], int]:
    mult: dict[tuple[int, int], int] = {}
    for o in work.occs:
        if o.alive:
            mult[(o.u, o.v)] = mult.get((o.u, o.v), 0) + 1
    return mult


@dataclass
class PathClass:
    """Taxonomy of one cover path for the flipping rules."""

    idx: int
    arcs: list[Occ]
    start: int
    end: int
    shared_start: bool
    shared_end: bool
    verts: set[int]

    @property
    def bound(self) -> int:
        return int(self.shared_start) + int(self.shared_end)

    @property
    def cap(self) -> int:
        # Maximum number of matching arcs that can touch the path.
        return len(self.arcs) - 1 + (2 - self.bound)

    def border_arcs(self) -> list[Occ]:
        out = []
        if self.shared_start:
            out.append(self.arcs[0])
        if self.shared_end and self.arcs[-1] not in out:
            out.append(self.arcs[-1])
        return out


@dataclass
class FlipInfo:
    kept_rays: list[Occ] = field(default_factory=list)
    kind: str = "none"  # none / good / rayter / single / inrays / outrays
    rayter_arc: Occ | None = None
    good_vertex: int | None = None  # path-side vertex of the kept good ray


class _FlipStuck(InternalInvariantError):
    pass


def classify_paths(skel: Skeleton) -> list[PathClass]:
    endpoint_count: dict[int, int] = {}
    for path in skel.paths:
        for v in (path[0].u, path[-1].v):
            endpoint_count[v] = endpoint_count.get(v, 0) + 1
    out = []
    for i, path in enumerate(skel.paths):
        start, end = path[0].u, path[-1].v
        verts = {o.u for o in path} | {o.v for o in path}
        out.append(PathClass(
            i, path, start, end,
            shared_start=endpoint_count.get(start, 0) >= 2,
            shared_end=endpoint_count.get(end, 0) >= 2,
            verts=verts))
    return out


def _is_good_ray(r: Occ, pc: PathClass) -> bool:
    arcs = pc.arcs
    if not pc.shared_start and r.v == pc.start:
        return True  # inray extending the path backwards
    if not pc.shared_end and r.u == pc.end:
        return True  # outray extending the path forwards
    if len(arcs) >= 2:
        if pc.shared_end and r.u == arcs[-1].u:
            # Outray at the inner border vertex; pairs with the previous
            # path arc, which must itself not be a border edge.
            if not (len(arcs) == 2 and pc.shared_start):
                return True
        if pc.shared_start and r.v == arcs[0].v:
            if not (len(arcs) == 2 and pc.shared_end):
                return True
    return False


def _place_flips(work: WorkGraph, flips: list[Occ], slots: list[Occ],
                 mult: dict[tuple[int, int], int]) -> list[Occ]:
    copies = []
    queue = list(slots)
    for f in sorted(flips, key=lambda o: o.oid):
        slot = None
        while queue:
            cand = queue.pop(0)
            if mult.get((cand.u, cand.v), 0) == 1:
                slot = cand
                break
        if slot is None:
            raise _FlipStuck("no free slot for a flipped arc")
        f.alive = False
        copies.append(work.add(slot.u, slot.v, "I", 1, slot.gu, slot.gv))
        mult[(slot.u, slot.v)] = 2
    return copies


def flip_cycle(skel: Skeleton, idx: int,
               mult: dict[tuple[int, int], int]) -> FlipInfo:
    """Flip the minority rays and all chords of a cycle into ichords."""
    work = skel.work
    arcs = skel.cycles[idx]
    onset = {o.u for o in arcs}
    arc_pairs = {(o.u, o.v) for o in arcs}

    inrays, outrays, chords = [], [], []
    for o in _alive_m_occs(work):
        tu, hv = o.u in onset, o.v in onset
        if tu and hv:
            if (o.u, o.v) not in arc_pairs:
                chords.append(o)
        elif hv:
            inrays.append(o)
        elif tu:
            outrays.append(o)

    if len(inrays) >= len(outrays):
        kept, flipped = inrays, outrays
        blocked = {r.v for r in inrays}
        slots = [a for a in arcs if a.v not in blocked]
        kind = "inrays"
    else:
        kept, flipped = outrays, inrays
        blocked = {r.u for r in outrays}
        slots = [a for a in arcs if a.u not in blocked]
        kind = "outrays"
    _place_flips(work, flipped + chords, slots, mult)
    info = FlipInfo(kept_rays=sorted(kept, key=lambda o: o.oid), kind=kind)
    _check_cycle_shape(skel, idx, mult)
    return info


def _check_cycle_shape(skel: Skeleton, idx: int, mult) -> None:
    arcs = skel.cycles[idx]
    ichords = sum(1 for a in arcs if mult.get((a.u, a.v), 0) >= 2)
    if ichords > len(arcs) - 2:
        raise _FlipStuck(
            f"cycle of length {len(arcs)} ended up with {ichords} ichords")


def flip_path(skel: Skeleton, pc: PathClass,
              mult: dict[tuple[int, int], int]) -> FlipInfo:
    """Flip rays and chords of one path per its bound class."""
    work = skel.work
    arc_pairs = {(o.u, o.v) for o in pc.arcs}
    rays, chords, parallels = [], [], []
    for o in _alive_m_occs(work):
        tu, hv = o.u in pc.verts, o.v in pc.verts
        if tu and hv:
            if (o.u, o.v) in arc_pairs:
                parallels.append(o)
            else:
                chords.append(o)
        elif tu or hv:
            rays.append(o)
    m_p = len(rays) + len(chords) + len(parallels)

    info = FlipInfo()
    if m_p < pc.cap:
        kept: list[Occ] = []
    else:
        good = sorted((r for r in rays if _is_good_ray(r, pc)),
                      key=lambda o: o.oid)
        if good:
            kept = [good[0]]
            info.kind = "good"
            r = good[0]
            info.good_vertex = r.u if r.u in pc.verts else r.v
        else:
            rayter = None
            ray_out_at = {r.u: r for r in rays if r.u in pc.verts}
            ray_in_at = {r.v: r for r in rays if r.v in pc.verts}
            for arc in pc.arcs:
                if arc.u in ray_out_at and arc.v in ray_in_at:
                    rayter = arc
                    break
            if rayter is not None:
                kept = [ray_out_at[rayter.u], ray_in_at[rayter.v]]
                info.kind = "rayter"
                info.rayter_arc = rayter
            elif len(rays) <= 1:
                # The flipping rules as written stop here; keeping the lone
                # ray still satisfies the at-most-one-ray target shape.
                kept = list(rays)
                info.kind = "single" if rays else "none"
            else:
                raise _FlipStuck(
                    f"path with {len(rays)} rays, no good ray and no rayter")
    info.kept_rays = kept

    border = set(id(a) for a in pc.border_arcs())
    kept_in = {r.v for r in kept if r.v in pc.verts}
    kept_out = {r.u for r in kept if r.u in pc.verts}
    slots = [a for a in pc.arcs
             if id(a) not in border and a.v not in kept_in
             and a.u not in kept_out]
    flips = [r for r in rays if r not in kept] + chords
    _place_flips(work, flips, slots, mult)
    return info


@dataclass
class RayGroup:
    """One H-edge: a chain of rays contracted at rayter arcs."""

    rays: list[Occ]
    open_sides: list[tuple[int, str]]  # (vertex, "out"|"in")


@dataclass
class RayGraph:
    """The auxiliary graph H built from the surviving rays."""

    groups: list[RayGroup]
    loops: list[list[Occ]]  # rayter chains that closed on themselves
    find: object  # vertex -> glued class representative
    adjacency: dict[int, list[tuple[int, int, str]]]  # class -> (grp, vtx, dir)
    glued_cycle_pairs: list[tuple[Occ, Occ]]
    allied_pairs: list[tuple[Occ, Occ]]
    rayter_pairs: list[tuple[Occ, Occ]]


def build_h(skel: Skeleton, cycle_infos: list[FlipInfo],
            path_infos: list[FlipInfo],
            path_classes: list[PathClass]) -> RayGraph:
    """Assemble H: surviving rays with rayter pairs contracted, two rays per
    multi-ray cycle glued on their cycle-side endpoints, and allied good
    rays glued on their path-side endpoints.  Stray matching arcs living
    entirely off the cover components join H so they get colored by the
    same alternation."""
    work = skel.work
    survivors = _alive_m_occs(work)
    c_pairs = {(o.u, o.v) for o in work.occs
               if o.alive and o.src == "C" and o.w == 1}
    edges = [o for o in survivors if (o.u, o.v) not in c_pairs]

    parent: dict[int, int] = {}

    def find(x: int) -> int:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    glued_cycle_pairs: list[tuple[Occ, Occ]] = []
    for idx in range(len(skel.cycles)):
        onset = {o.u for o in skel.cycles[idx]}
        incident = [o for o in edges if (o.u in onset) != (o.v in onset)]
        incident.sort(key=lambda o: o.oid)
        if len(incident) >= 2:
            r1, r2 = incident[0], incident[1]
            e1 = r1.u if r1.u in onset else r1.v
            e2 = r2.u if r2.u in onset else r2.v
            union(e1, e2)
            glued_cycle_pairs.append((r1, r2))

    # Rayter contraction, done exhaustively through a union-find over rays.
    ray_parent: dict[int, int] = {}
    consumed: set[tuple[int, str]] = set()  # (oid, "tail"|"head")
    by_oid = {o.oid: o for o in edges}

    def rfind(x: int) -> int:
        ray_parent.setdefault(x, x)
        while ray_parent[x] != x:
            ray_parent[x] = ray_parent[ray_parent[x]]
            x = ray_parent[x]
        return x

    rayter_pairs: list[tuple[Occ, Occ]] = []
    for info in path_infos:
        if info.kind != "rayter":
            continue
        r_out, r_in = info.kept_rays
        if not (r_out.alive and r_in.alive):
            continue
        rayter_pairs.append((r_out, r_in))
        ra, rb = rfind(r_out.oid), rfind(r_in.oid)
        if ra != rb:
            ray_parent[ra] = rb
        consumed.add((r_out.oid, "tail"))
        consumed.add((r_in.oid, "head"))

    allied_pairs: list[tuple[Occ, Occ]] = []
    endpoint_paths: dict[int, list[int]] = {}
    for pc in path_classes:
        if pc.shared_start:
            endpoint_paths.setdefault(pc.start, []).append(pc.idx)
        if pc.shared_end:
            endpoint_paths.setdefault(pc.end, []).append(pc.idx)
    for junction, pidxs in sorted(endpoint_paths.items()):
        if len(pidxs) != 2:
            raise InternalInvariantError(
                f"junction {junction} shared by {len(pidxs)} paths")
        kept = []
        for pi in pidxs:
            info = path_infos[pi]
            pc = path_classes[pi]
            if info.kind != "good" or not info.kept_rays:
                break
            ray = info.kept_rays[0]
            if not ray.alive:
                break
            b = (pc.arcs[0] if (pc.shared_start and pc.start == junction)
                 else pc.arcs[-1])
            if info.good_vertex not in (b.u, b.v):
                break
            kept.append((ray, info.good_vertex))
        if len(kept) == 2:
            (r1, v1), (r2, v2) = kept
            union(v1, v2)
            allied_pairs.append((r1, r2))

    # Materialize the ray groups and their open endpoints.
    groups: list[RayGroup] = []
    loops: list[list[Occ]] = []
    members: dict[int, list[Occ]] = {}
    for o in edges:
        members.setdefault(rfind(o.oid), []).append(o)
    for root in sorted(members):
        rays = sorted(members[root], key=lambda o: o.oid)
        open_sides = []
        for r in rays:
            if (r.oid, "tail") not in consumed:
                open_sides.append((r.u, "out"))
            if (r.oid, "head") not in consumed:
                open_sides.append((r.v, "in"))
        if not open_sides:
            loops.append(rays)
            continue
        if len(open_sides) != 2:
            raise InternalInvariantError(
                f"ray chain with {len(open_sides)} open endpoints")
        groups.append(RayGroup(rays, open_sides))

    # Adjacency over glued vertex classes; entries carry the group and the
    # index of the open side meeting the class, so parallel edges and
    # chains whose two ends coincide stay unambiguous.
    adjacency: dict[int, list[tuple[int, int]]] = {}
    for gi, grp in enumerate(groups):
        for si, (v, _d) in enumerate(grp.open_sides):
            adjacency.setdefault(find(v), []).append((gi, si))
    for cls, inc in adjacency.items():
        if len(inc) > 2:
            raise InternalInvariantError(
                f"H vertex {cls} has degree {len(inc)}")
    return RayGraph(groups, loops, find, adjacency,
                    glued_cycle_pairs, allied_pairs, rayter_pairs)


def color_h(h: RayGraph) -> dict[int, int]:
    """Alternating coloring of H; returns a color per surviving ray oid.

    Odd cycles are rotated so the alternation wraps at a vertex whose two
    incident edges form a directed path; such a vertex exists whenever the
    flipping succeeded.
    """
    group_color: dict[int, int] = {}
    colors: dict[int, int] = {}
    seen: set[int] = set()

    def side_dir(gi: int, si: int) -> str:
        return h.groups[gi].open_sides[si][1]

    def walk(first: tuple[int, int]):
        """Follow the chain starting by traversing group `first` from the
        given side; returns [(group, entry side index), ...]."""
        seq = []
        gi, si = first
        while True:
            seq.append((gi, si))
            seen.add(gi)
            exit_side = 1 - si
            cls = h.find(h.groups[gi].open_sides[exit_side][0])
            nxt = [(g, s) for (g, s) in h.adjacency.get(cls, ())
                   if g not in seen]
            if not nxt:
                return seq
            gi, si = nxt[0]

    degree_one = sorted(
        cls for cls, inc in h.adjacency.items() if len(inc) == 1)
    for cls in degree_one:
        inc = [t for t in h.adjacency[cls] if t[0] not in seen]
        if not inc:
            continue
        seq = walk(inc[0])
        for i, (gi, _si) in enumerate(seq):
            group_color[gi] = 1 if i % 2 == 0 else 2

    for start_gi in range(len(h.groups)):
        if start_gi in seen:
            continue
        seq = walk((start_gi, 0))
        k = len(seq)
        if k % 2 == 1:
            # Edge t-1 leaves its exit side into the vertex where edge t
            # enters; the pair is co-directed iff those sides disagree.
            rotate = None
            for t in range(k):
                g_prev, s_prev = seq[t - 1]
                g_cur, s_cur = seq[t]
                if side_dir(g_prev, 1 - s_prev) != side_dir(g_cur, s_cur):
                    rotate = t
                    break
            if rotate is None:
                raise InternalInvariantError(
                    "odd ray cycle without two co-directed edges")
            seq = seq[rotate:] + seq[:rotate]
        for i, (gi, _si) in enumerate(seq):
            group_color[gi] = 1 if i % 2 == 0 else 2

    for gi, grp in enumerate(h.groups):
        c = group_color.get(gi, 1)
        for r in grp.rays:
            colors[r.oid] = c
    for rays in h.loops:
        for r in rays:
            colors[r.oid] = 1
    return colors


def extend_coloring(skel: Skeleton, ray_colors: dict[int, int],
                    path_classes: list[PathClass]) -> dict[int, int]:
    """Extend the ray coloring over cycle arcs, path arcs and all copies."""
    work = skel.work
    colors = dict(ray_colors)

    forbidden_out: dict[int, set[int]] = {}
    forbidden_in: dict[int, set[int]] = {}
    for oid, c in ray_colors.items():
        r = work.occs[oid]
        forbidden_out.setdefault(r.u, set()).add(c)
        forbidden_in.setdefault(r.v, set()).add(c)

    def arc_forbidden(o: Occ) -> set[int]:
        # A path/cycle arc must differ from a kept outray at its tail and
        # from a kept inray at its head.
        return (forbidden_out.get(o.u, set()) | forbidden_in.get(o.v, set()))

    mult = _multiplicity(work)
    copies: dict[int, Occ] = {}
    originals: set[int] = set()
    by_pair: dict[tuple[int, int], list[Occ]] = {}
    for o in work.alive():
        by_pair.setdefault((o.u, o.v), []).append(o)
    for pair, occs in by_pair.items():
        if len(occs) == 1:
            continue
        if len(occs) > 2:
            raise InternalInvariantError(f"pair {pair} has multiplicity {len(occs)}")
        orig = next((o for o in occs if o.src == "C"), None)
        if orig is None:
            # Two matching arcs made parallel by shrinking; both are rays or
            # strays and were already colored through H.
            if any(o.oid not in colors for o in occs):
                raise InternalInvariantError(
                    f"uncolored parallel pair {pair} without cover arc")
            continue
        other = next(o for o in occs if o is not orig)
        copies[orig.oid] = other
        originals.add(orig.oid)

    # Cycles: force the arcs constrained by kept rays, default the rest,
    # then make sure the cycle is not monochromatic.
    for arcs in skel.cycles:
        forced: dict[int, int] = {}
        for o in arcs:
            fs = arc_forbidden(o)
            if len(fs) >= 2:
                raise InternalInvariantError(
                    "cycle arc constrained by both colors")
            if fs:
                forced[o.oid] = 3 - next(iter(fs))
        for o in arcs:
            colors[o.oid] = forced.get(o.oid, 1)
        if len({colors[o.oid] for o in arcs}) == 1:
            mono = colors[arcs[0].oid]
            flip = next((o for o in arcs
                         if o.oid not in forced
                         and mult.get((o.u, o.v), 0) == 1), None)
            if flip is None:
                raise InternalInvariantError(
                    "monochromatic cycle cannot be broken")
            colors[flip.oid] = 3 - mono

    # Paths: the border arcs at shared junctions must differ pairwise; they
    # form a bipartite constraint graph seeded by the kept-ray constraints.
    junctions: dict[int, list[Occ]] = {}
    for pc in path_classes:
        if pc.shared_start:
            junctions.setdefault(pc.start, []).append(pc.arcs[0])
        if pc.shared_end:
            junctions.setdefault(pc.end, []).append(pc.arcs[-1])
    border_neighbors: dict[int, list[int]] = {}
    border_occs: dict[int, Occ] = {}
    for junction, occs in sorted(junctions.items()):
        if len(occs) != 2:
            raise InternalInvariantError(
                f"junction {junction} with {len(occs)} border arcs")
        a, b = occs
        border_neighbors.setdefault(a.oid, []).append(b.oid)
        border_neighbors.setdefault(b.oid, []).append(a.oid)
        border_occs[a.oid] = a
        border_occs[b.oid] = b

    assigned: dict[int, int] = {}
    for start in sorted(border_occs):
        if start in assigned:
            continue
        comp = [start]
        seenb = {start}
        i = 0
        while i < len(comp):
            for nb in border_neighbors[comp[i]]:
                if nb not in seenb:
                    seenb.add(nb)
                    comp.append(nb)
            i += 1
        value: dict[int, int] = {}
        seeds = {}
        for oid in comp:
            fs = arc_forbidden(border_occs[oid])
            if len(fs) >= 2:
                raise InternalInvariantError(
                    "border arc constrained by both colors")
            if fs:
                seeds[oid] = 3 - next(iter(fs))
        root = min(seeds) if seeds else min(comp)
        value[root] = seeds.get(root, 1)
        stack = [root]
        while stack:
            cur = stack.pop()
            for nb in border_neighbors[cur]:
                want = 3 - value[cur]
                if nb in value:
                    if value[nb] != want:
                        raise InternalInvariantError(
                            "junction constraints are not 2-colorable")
                else:
                    value[nb] = want
                    stack.append(nb)
        for oid, c in value.items():
            if oid in seeds and seeds[oid] != c:
                raise InternalInvariantError(
                    "border arc color conflicts with its kept ray")
            colors[oid] = c
        assigned.update(value)

    # Interior path arcs: at most one forbidden color each (a tail outray
    # and a head inray coincide only on a rayter arc, whose rays share a
    # color), so the greedy assignment below cannot get stuck.
    for pc in path_classes:
        for o in pc.arcs:
            if o.oid in colors:
                continue
            fs = arc_forbidden(o)
            if len(fs) >= 2:
                raise InternalInvariantError(
                    "interior arc constrained by both colors")
            colors[o.oid] = 3 - next(iter(fs)) if fs else 1

    for oid in sorted(originals):
        colors[copies[oid].oid] = 3 - colors[oid]

    for o in work.alive():
        if o.oid not in colors:
            raise InternalInvariantError(f"occurrence {o!r} left uncolored")
    return colors


def unshrink(colors: dict[int, int], log: list[ShrinkRecord],
             work: WorkGraph) -> tuple[list[Occ], dict[int, int]]:
    """Expand the shrink log in reverse, giving the two interior arcs of
    each 2-cycle the two distinct colors compatible with the arcs around
    them.  Existing colors never change."""
    final: list[Occ] = work.alive()
    out: dict[int, int] = dict(colors)
    for rec in reversed(log):
        spot = {rec.a, rec.b}
        incident = [o for o in final if o.gu in spot or o.gv in spot]
        placed = False
        for (c1, c2) in ((1, 2), (2, 1)):
            trial = {rec.internals[0].oid: c1, rec.internals[1].oid: c2}
            if _unshrink_ok(rec, incident, out, trial):
                out.update(trial)
                final.extend(rec.internals)
                placed = True
                break
        if not placed:
            raise InternalInvariantError(
                f"no consistent colors for expanded 2-cycle {{{rec.a},{rec.b}}}")
    return final, out


def _unshrink_ok(rec: ShrinkRecord, incident: list[Occ],
                 colors: dict[int, int], trial: dict[int, int]) -> bool:
    for x in (rec.a, rec.b):
        for c in (1, 2):
            outd = ind = 0
            for o in incident:
                if colors[o.oid] != c:
                    continue
                if o.gu == x:
                    outd += 1
                if o.gv == x:
                    ind += 1
            for o in rec.internals:
                if trial[o.oid] != c:
                    continue
                if o.gu == x:
                    outd += 1
                if o.gv == x:
                    ind += 1
            if outd > 1 or ind > 1:
                return False
    return True


def verify_coloring(arcs: list[tuple[int, int]], colors: list[int]) -> str | None:
    """Check that each color class is a union of vertex-disjoint directed
    paths; returns a description of the first violation, or None."""
    if len(arcs) != len(colors):
        return "color list does not match the arc list"
    for c in (1, 2):
        succ: dict[int, int] = {}
        pred: dict[int, int] = {}
        for (u, v), col in zip(arcs, colors):
            if col != c:
                continue
            if col not in (1, 2):
                return f"arc ({u},{v}) has invalid color {col}"
            if u in succ:
                return f"two color-{c} arcs leave vertex {u}"
            if v in pred:
                return f"two color-{c} arcs enter vertex {v}"
            succ[u] = v
            pred[v] = u
        # Any vertex not reachable from a path start lies on a cycle.
        on_path: set[int] = set()
        for start in succ:
            if start not in pred:
                cur = start
                on_path.add(cur)
                while cur in succ:
                    cur = succ[cur]
                    on_path.add(cur)
        for u in succ:
            if u not in on_path:
                return f"color-{c} class contains a directed cycle through {u}"
    return None


@dataclass
class ColoringDiagnostics:
    stage_one_counts: dict[str, int]
    rayter_pairs: list[tuple[int, int]]
    allied_pairs: list[tuple[int, int]]
    glued_cycle_pairs: list[tuple[int, int]]
    fallback_components: int = 0


@dataclass
class ColoringResult:
    """Final coloring on the original multigraph's vertex space."""

    arcs: list[tuple[int, int, str]]  # (u, v, src)
    colors: list[int]
    diagnostics: ColoringDiagnostics

    def occurrences(self) -> list[tuple[int, int, int, int]]:
        """(u, v, copy index, color) rows, lexicographically sorted."""
        seen: dict[tuple[int, int], int] = {}
        rows = []
        for (u, v, _src), c in sorted(
                zip(self.arcs, self.colors), key=lambda t: (t[0][0], t[0][1])):
            copy = seen.get((u, v), 0)
            seen[(u, v)] = copy + 1
            rows.append((u, v, copy, c))
        return rows

    def class_weight(self, c: int) -> int:
        return sum(1 for col in self.colors if col == c)


def path_two_color(gm: AssembledMultigraph, mode: str = "strict") -> ColoringResult:
    """Run the whole coloring pipeline on an assembled multigraph."""
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown mode {mode!r}")
    work = WorkGraph.from_gm(gm)
    counts = {"gm": work.one_count()}
    duplicate_opposite_matching_arcs(work)
    counts["duplicate"] = work.one_count()
    skel = strip_zero_arcs(work)
    counts["strip"] = work.one_count()
    log = shrink_two_cycles(skel)
    internal_ones = sum(o.w for rec in log for o in rec.internals)
    counts["shrink"] = work.one_count() + internal_ones

    fallback_components = 0
    rayter_pairs: list[tuple[int, int]] = []
    allied_pairs: list[tuple[int, int]] = []
    glued_pairs: list[tuple[int, int]] = []
    try:
        mult = _multiplicity(work)
        cycle_infos = [flip_cycle(skel, i, mult)
                       for i in range(len(skel.cycles))]
        path_classes = classify_paths(skel)
        path_infos = [flip_path(skel, pc, mult) for pc in path_classes]
        counts["flip"] = work.one_count() + internal_ones
        h = build_h(skel, cycle_infos, path_infos, path_classes)
        ray_colors = color_h(h)
        colors = extend_coloring(skel, ray_colors, path_classes)
        err = verify_coloring([(o.u, o.v) for o in work.alive()],
                              [colors[o.oid] for o in work.alive()])
        if err is not None:
            raise InternalInvariantError(f"shrunk-graph coloring invalid: {err}")
        rayter_pairs = [(colors[a.oid], colors[b.oid])
                        for (a, b) in h.rayter_pairs]
        allied_pairs = [(colors[a.oid], colors[b.oid])
                        for (a, b) in h.allied_pairs]
        glued_pairs = [(colors[a.oid], colors[b.oid])
                       for (a, b) in h.glued_cycle_pairs]
    except InternalInvariantError:
        if mode != "lenient":
            raise
        colors, fallback_components = _fallback_color(work)
    counts["color"] = work.one_count() + internal_ones

    final, full_colors = unshrink(colors, log, work)
    arcs = [(o.gu, o.gv, o.src) for o in final]
    cols = [full_colors[o.oid] for o in final]
    err = verify_coloring([(u, v) for (u, v, _s) in arcs], cols)
    if err is not None:
        raise InternalInvariantError(f"final coloring invalid: {err}")
    counts["final"] = len(final)
    diag = ColoringDiagnostics(counts, rayter_pairs, allied_pairs,
                               glued_pairs, fallback_components)
    return ColoringResult(arcs, cols, diag)


def _fallback_color(work: WorkGraph, limit: int = 22) -> tuple[dict[int, int], int]:
    """Exhaustively 2-color each connected component of the working graph."""
    alive = work.alive()
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for o in alive:
        ru, rv = find(o.u), find(o.v)
        if ru != rv:
            parent[ru] = rv
    comps: dict[int, list[Occ]] = {}
    for o in alive:
        comps.setdefault(find(o.u), []).append(o)

    colors: dict[int, int] = {}
    for root in sorted(comps):
        occs = comps[root]
        if len(occs) > limit:
            raise InternalInvariantError(
                f"fallback component with {len(occs)} occurrences is too large")
        result = _oracle.brute_path2color([(o.u, o.v) for o in occs])
        if result is None:
            raise InternalInvariantError(
                "fallback found an uncolorable component")
        for o, c in zip(occs, result):
            colors[o.oid] = c
    return colors, len(comps)
