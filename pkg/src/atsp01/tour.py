"""End-to-end solver: class selection, tour patching, odd-n strategies,
certificates, and the Min (1,2)-ATSP wrapper.

The pipeline for even instances: maximum matching, maximum-weight evading
cycle cover, degree-3 multigraph, path-2-coloring, then the heavier color
class is patched into a Hamiltonian tour with implicit 0-arcs.  Odd
instances either gain a 0-connected dummy vertex or try all single-arc
contractions and keep the best expanded tour.

Every solve produces a certificate that re-verifies from the text alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .assembly import AssembledMultigraph, GmArc, build_gm, replace_half_arc_pairs
from .coloring import ColoringResult, path_two_color, verify_coloring
from .errors import InternalInvariantError, MalformedInputError
from .evading import (DirectedMatching, EvadingCover, build_gprime,
                      compute_m_max, extract_cover, verify_evading)
from .instances import Instance, Tour, make_tour, parse_instance, tour_weight, write_instance
from .matching import max_weight_perfect_matching

CERT_HEADER = "ATSP01-CERT v1"


@dataclass(frozen=True)
class SolveOptions:
    odd_strategy: str = "dummy"  # "dummy" | "contract"
    mode: str = "strict"         # "strict" | "lenient"
    emit_certificate: bool = True

    def __post_init__(self):
        if self.odd_strategy not in ("dummy", "contract"):
            raise ValueError(f"unknown odd strategy {self.odd_strategy!r}")
        if self.mode not in ("strict", "lenient"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class Certificate:
    """Full pipeline transcript, re-verifiable without solver state."""

    original: Instance
    pipeline: Instance
    strategy: str  # "none" | "dummy" | "contract u v" | "trivial"
    mmax: DirectedMatching | None
    cover: EvadingCover | None
    gm: AssembledMultigraph | None
    coloring: list[tuple[int, int, int, int]]  # (u, v, copy, color)
    chosen_class: int
    tour: Tour
    diagnostics: object = None


def select_class(col: ColoringResult) -> tuple[int, list[list[int]]]:
    """Pick the color class with more weight-1 arcs (ties favor class 1)
    and return it as vertex-disjoint directed paths."""
    w1 = col.class_weight(1)
    w2 = col.class_weight(2)
    chosen = 1 if w1 >= w2 else 2
    arcs = [(u, v) for (u, v, _s), c in zip(col.arcs, col.colors) if c == chosen]
    succ: dict[int, int] = {}
    pred: dict[int, int] = {}
    for (u, v) in arcs:
        if u in succ or v in pred:
            raise InternalInvariantError("selected class is not a path set")
        succ[u] = v
        pred[v] = u
    paths = []
    for start in sorted(succ):
        if start in pred:
            continue
        path = [start]
        cur = start
        while cur in succ:
            cur = succ[cur]
            path.append(cur)
        paths.append(path)
    if sum(len(p) - 1 for p in paths) != len(arcs):
        raise InternalInvariantError("selected class contains a cycle")
    return chosen, paths


def patch_paths(paths: list[list[int]], n: int) -> list[int]:
    """Chain vertex-disjoint paths and the leftover isolated vertices into
    one Hamiltonian cyclic order (lowest first vertex first)."""
    seen: set[int] = set()
    for p in paths:
        for v in p:
            if v in seen:
                raise ValueError("paths are not vertex-disjoint")
            if not (0 <= v < n):
                raise ValueError(f"vertex {v} out of range")
            seen.add(v)
    items = sorted(paths, key=lambda p: p[0])
    isolated = [v for v in range(n) if v not in seen]
    items.extend([v] for v in isolated)
    items.sort(key=lambda p: p[0])
    order = [v for p in items for v in p]
    # Canonical rotation: start the cyclic order at vertex 0.
    z = order.index(0)
    return order[z:] + order[:z]


def _solve_even(inst: Instance, opts: SolveOptions):
    m = compute_m_max(inst)
    gg = build_gprime(inst, m)
    pm = max_weight_perfect_matching(gg.graph)
    if pm is None:
        raise InternalInvariantError("gadget graph has no perfect matching")
    cover = extract_cover(gg, pm)
    err = verify_evading(cover, inst, m)
    if err is not None:
        raise InternalInvariantError(f"extracted cover invalid: {err}")
    whole = replace_half_arc_pairs(cover, m)
    gm = build_gm(m, whole)
    col = path_two_color(gm, mode=opts.mode)
    chosen, paths = select_class(col)
    order = patch_paths(paths, inst.n)
    tour = make_tour(inst, order)
    cls_weight = col.class_weight(chosen)
    if tour.weight < cls_weight:
        raise InternalInvariantError("patched tour lost class weight")
    return tour, m, cover, gm, col, chosen


def solve(inst: Instance, opts: SolveOptions = SolveOptions()) -> tuple[Tour, Certificate]:
    """3/4-approximate maximum tour with a full certificate."""
    n = inst.n
    if n < 2:
        raise ValueError("instances need at least 2 vertices")
    if n == 2:
        tour = make_tour(inst, [0, 1])
        cert = Certificate(inst, inst, "trivial", None, None, None, [],
                           1, tour)
        return tour, cert

    if n % 2 == 0:
        tour, m, cover, gm, col, chosen = _solve_even(inst, opts)
        cert = Certificate(inst, inst, "none", m, cover, gm,
                           col.occurrences(), chosen, tour, col.diagnostics)
        return tour, cert

    if opts.odd_strategy == "dummy":
        big = Instance(n + 1, inst.ones)
        btour, m, cover, gm, col, chosen = _solve_even(big, opts)
        order = [v for v in btour.order if v != n]
        tour = make_tour(inst, order)
        cert = Certificate(inst, big, "dummy", m, cover, gm,
                           col.occurrences(), chosen, tour, col.diagnostics)
        return tour, cert

    best: tuple[Tour, Certificate] | None = None
    for (u, v) in _contract_candidates(inst):
        sub = contract_arc(inst, u, v)
        if sub.n == 2:
            sub_tour = make_tour(sub, [0, 1])
            sub_cert = Certificate(inst, sub, f"contract {u} {v}", None,
                                   None, None, [], 1, sub_tour)
        else:
            sub_tour, m, cover, gm, col, chosen = _solve_even(sub, opts)
            sub_cert = Certificate(inst, sub, f"contract {u} {v}", m, cover,
                                   gm, col.occurrences(), chosen, sub_tour,
                                   col.diagnostics)
        order = expand_contracted_order(sub_tour.order, inst.n, u, v)
        tour = make_tour(inst, order)
        sub_cert.tour = tour
        if best is None or tour.weight > best[0].weight:
            best = (tour, sub_cert)
    assert best is not None
    return best


def _contract_candidates(inst: Instance):
    for u in range(inst.n):
        for v in range(inst.n):
            if u != v:
                yield (u, v)


def contract_arc(inst: Instance, u: int, v: int) -> Instance:
    """Contract the arc (u,v): the merged vertex keeps u's incoming and v's
    outgoing arcs, forcing any tour of the result to traverse u -> v."""
    n = inst.n

    def f(x: int) -> int:
        return x - (x > v)

    ones = set()
    for (x, y) in inst.ones:
        if x == u or x == v or y == u or y == v:
            continue
        ones.add((f(x), f(y)))
    for (x, y) in inst.ones:
        if y == u and x not in (u, v):
            ones.add((f(x), f(u)))  # arcs into u enter the merged vertex
        if x == v and y not in (u, v):
            ones.add((f(u), f(y)))  # arcs out of v leave the merged vertex
    return Instance(n - 1, frozenset(ones))


def expand_contracted_order(order, n: int, u: int, v: int) -> list[int]:
    """Undo contract_arc on a tour of the contracted instance: ids at or
    above v shift back up and the merged vertex expands to u, v."""
    z = u - (u > v)
    result: list[int] = []
    for x in order:
        if x == z:
            result.extend([u, v])
        else:
            result.append(x if x < v else x + 1)
    return result


def solve_min12(inst: Instance, opts: SolveOptions = SolveOptions()
                ) -> tuple[Tour, int, Certificate]:
    """Min (1,2)-ATSP via the weight flip w = 2 - c.

    ``inst.ones`` is read as the set of cost-1 arcs; everything else costs
    2.  Returns the tour, its cost 2n - w, and the underlying certificate.
    """
    tour, cert = solve(inst, opts)
    cost = 2 * inst.n - tour.weight
    return tour, cost, cert


# --- certificate serialization -------------------------------------------

def certificate_to_text(cert: Certificate) -> str:
    lines = [CERT_HEADER]
    lines.append("ORIGINAL")
    lines.append(write_instance(cert.original).rstrip("\n"))
    lines.append("PIPELINE")
    lines.append(write_instance(cert.pipeline).rstrip("\n"))
    lines.append(f"STRATEGY {cert.strategy}")
    if cert.mmax is not None:
        lines.append(f"MMAX {len(cert.mmax.arcs)}")
        for (u, v) in cert.mmax.arcs:
            lines.append(f"{u} {v}")
    if cert.cover is not None:
        fulls = sorted(cert.cover.ones_full | cert.cover.zeros_full)
        halves = sorted(cert.cover.half_arcs)
        lines.append(f"COVER {len(fulls)} {len(halves)}")
        for (u, v) in fulls:
            lines.append(f"{u} {v}")
        for (u, v, part) in halves:
            lines.append(f"{u} {v} {part}")
    if cert.gm is not None:
        merged: dict[tuple[int, int], list[str]] = {}
        for a in cert.gm.arcs:
            merged.setdefault((a.u, a.v), []).append(a.src)
        lines.append(f"GM {len(merged)}")
        for (u, v), srcs in sorted(merged.items()):
            tag = "2" if len(srcs) == 2 else srcs[0]
            lines.append(f"{u} {v} {tag}")
    if cert.coloring:
        lines.append(f"COLORING {len(cert.coloring)}")
        for (u, v, copy, color) in cert.coloring:
            lines.append(f"{u} {v} {copy} {color}")
        c1 = sum(1 for (_u, _v, _k, c) in cert.coloring if c == 1)
        c2 = len(cert.coloring) - c1
        lines.append(f"CLASS {cert.chosen_class}")
        lines.append(f"WEIGHTS mmax {cert.mmax.weight} "
                     f"cover2 {cert.cover.weight_x2} class1 {c1} class2 {c2}")
    lines.append("TOUR")
    lines.append(f"w {cert.tour.weight}")
    lines.append(" ".join(str(x) for x in cert.tour.order))
    return "\n".join(lines) + "\n"


def verify_certificate(inst: Instance, text: str) -> list[str]:
    """Re-check a certificate against an instance without the solver.

    Returns the list of problems found; an empty list means the
    certificate is accepted.
    """
    issues: list[str] = []
    try:
        sections = _parse_certificate(text)
    except MalformedInputError as exc:
        return [str(exc)]

    if sections["original"] != inst:
        return ["certificate was produced for a different instance"]
    pipeline: Instance = sections["pipeline"]
    strategy: str = sections["strategy"]

    if strategy == "none":
        if pipeline != inst:
            issues.append("pipeline instance differs without an odd strategy")
    elif strategy == "dummy":
        if pipeline != Instance(inst.n + 1, inst.ones):
            issues.append("dummy pipeline instance is inconsistent")
    elif strategy.startswith("contract"):
        try:
            _, us, vs = strategy.split()
            expect = contract_arc(inst, int(us), int(vs))
        except (ValueError, IndexError):
            return ["malformed contract strategy"]
        if pipeline.n >= 2 and pipeline != expect:
            issues.append("contracted pipeline instance is inconsistent")
    elif strategy != "trivial":
        issues.append(f"unknown strategy {strategy!r}")

    tour: Tour = sections["tour"]
    try:
        actual = tour_weight(inst, tour.order)
    except ValueError as exc:
        return [f"tour invalid: {exc}"]
    if actual != tour.weight:
        issues.append(f"tour weight {tour.weight} != recomputed {actual}")

    if strategy == "trivial" or pipeline.n == 2:
        return issues

    m: DirectedMatching | None = sections.get("mmax")
    cover: EvadingCover | None = sections.get("cover")
    if m is None or cover is None:
        return issues + ["certificate is missing MMAX or COVER"]
    if not m.is_perfect() or m.n != pipeline.n:
        issues.append("MMAX is not a perfect matching of the pipeline instance")
    err = verify_evading(cover, pipeline, m)
    if err is not None:
        issues.append(f"cover: {err}")

    try:
        whole = replace_half_arc_pairs(cover, m)
        gm = build_gm(m, whole)
    except InternalInvariantError as exc:
        return issues + [f"multigraph rebuild failed: {exc}"]
    merged: dict[tuple[int, int], list[str]] = {}
    for a in gm.arcs:
        merged.setdefault((a.u, a.v), []).append(a.src)
    rebuilt = {(u, v): ("2" if len(s) == 2 else s[0])
               for (u, v), s in merged.items()}
    if rebuilt != sections.get("gm"):
        issues.append("GM section does not match the matching and cover")

    coloring = sections.get("coloring", [])
    expected = m.weight + cover.weight_x2 // 2
    if len(coloring) != expected:
        issues.append(f"coloring has {len(coloring)} arcs, "
                      f"w(M)+w(C) = {expected}")
    err = verify_coloring([(u, v) for (u, v, _k, _c) in coloring],
                          [c for (_u, _v, _k, c) in coloring])
    if err is not None:
        issues.append(f"coloring: {err}")
    c1 = sum(1 for (_u, _v, _k, c) in coloring if c == 1)
    c2 = len(coloring) - c1
    if (c1, c2) != sections.get("class_weights"):
        issues.append("recorded class weights do not match the coloring")
    chosen = sections["chosen"]
    if (chosen == 1) != (c1 >= c2):
        issues.append("chosen class is not the heavier one")
    if strategy == "none":
        # The tour must contain every chosen-class arc as a consecutive pair.
        pos = {v: i for i, v in enumerate(tour.order)}
        npipe = pipeline.n
        for (u, v, _k, c) in coloring:
            if c != chosen:
                continue
            if tour.order[(pos[u] + 1) % npipe] != v:
                issues.append(f"class arc ({u},{v}) is not on the tour")
                break
    chosen_weight = c1 if chosen == 1 else c2
    if tour.weight < chosen_weight:
        issues.append("tour is lighter than the chosen class")
    return issues


def _parse_certificate(text: str) -> dict:
    lines = text.splitlines()
    if not lines or lines[0] != CERT_HEADER:
        raise MalformedInputError("missing certificate header")
    out: dict = {}
    i = 1

    def expect(tag: str) -> list[str]:
        nonlocal i
        if i >= len(lines) or lines[i] != tag:
            raise MalformedInputError(f"expected section {tag}", line=i + 1)
        i += 1
        return lines

    def read_instance() -> Instance:
        nonlocal i
        header = lines[i].split()
        n, mcount = int(header[0]), int(header[1])
        block = "\n".join(lines[i:i + 1 + mcount]) + "\n"
        i += 1 + mcount
        return parse_instance(block)

    try:
        expect("ORIGINAL")
        out["original"] = read_instance()
        expect("PIPELINE")
        out["pipeline"] = read_instance()
        if not lines[i].startswith("STRATEGY "):
            raise MalformedInputError("missing STRATEGY", line=i + 1)
        out["strategy"] = lines[i][len("STRATEGY "):]
        i += 1
        pipeline = out["pipeline"]
        while i < len(lines):
            head = lines[i].split()
            if head[0] == "MMAX":
                k = int(head[1])
                arcs = []
                for j in range(k):
                    u, v = map(int, lines[i + 1 + j].split())
                    arcs.append((u, v))
                i += 1 + k
                ones = frozenset(a for a in arcs if a in pipeline.ones)
                out["mmax"] = DirectedMatching(pipeline.n, tuple(arcs), ones)
            elif head[0] == "COVER":
                nf, nh = int(head[1]), int(head[2])
                fulls, halves = [], []
                for j in range(nf):
                    u, v = map(int, lines[i + 1 + j].split())
                    fulls.append((u, v))
                for j in range(nh):
                    u, v, part = lines[i + 1 + nf + j].split()
                    halves.append((int(u), int(v), part))
                i += 1 + nf + nh
                ones = frozenset(a for a in fulls if a in pipeline.ones)
                zeros = frozenset(a for a in fulls if a not in pipeline.ones)
                out["cover"] = EvadingCover(pipeline.n, ones, zeros,
                                            frozenset(halves))
            elif head[0] == "GM":
                k = int(head[1])
                gm = {}
                for j in range(k):
                    u, v, tag = lines[i + 1 + j].split()
                    gm[(int(u), int(v))] = tag
                i += 1 + k
                out["gm"] = gm
            elif head[0] == "COLORING":
                k = int(head[1])
                rows = []
                for j in range(k):
                    u, v, copy, c = map(int, lines[i + 1 + j].split())
                    rows.append((u, v, copy, c))
                i += 1 + k
                out["coloring"] = rows
            elif head[0] == "CLASS":
                out["chosen"] = int(head[1])
                i += 1
            elif head[0] == "WEIGHTS":
                out["class_weights"] = (int(head[6]), int(head[8]))
                i += 1
            elif head[0] == "TOUR":
                w = int(lines[i + 1].split()[1])
                order = tuple(int(x) for x in lines[i + 2].split())
                out["tour"] = Tour(order, w)
                i += 3
            else:
                raise MalformedInputError(f"unknown section {lines[i]!r}",
                                          line=i + 1)
    except (IndexError, ValueError) as exc:
        raise MalformedInputError(f"truncated certificate ({exc})") from None
    if "tour" not in out:
        raise MalformedInputError("certificate has no TOUR section")
    out.setdefault("chosen", 1)
    return out
