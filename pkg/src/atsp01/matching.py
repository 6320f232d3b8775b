"""General-graph matching engine (cardinality and weighted-perfect variants).

The core is an O(n^3) primal-dual blossom algorithm for maximum-weight
matching on general graphs, after Edmonds as presented by Galil (1986).
The control flow follows the classic mwmatching structure; the dual
adjustment step is vectorized over edge arrays with numpy so that graphs
with tens of thousands of edges stay fast.

Weights must be non-negative integers; all computations are exact.  Every
call ends with a complementary-slackness check of the dual certificate, so
a returned matching is certified optimal.

Each call owns its workspace; independent calls may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalInvariantError

_NO_NODE = -1


@dataclass(frozen=True)
class UGraph:
    """Undirected weighted graph without parallel edges or self-loops."""

    n: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        seen = set()
        for (u, v, w) in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range")
            if not isinstance(w, int) or w < 0:
                raise ValueError(f"edge ({u},{v}) needs a non-negative integer weight")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"parallel edge on {{{u},{v}}}")
            seen.add(key)


@dataclass(frozen=True)
class UMatching:
    """Vertex -> partner map (-1 for unmatched); symmetric by construction."""

    mate: tuple[int, ...]
    matched_weight: int

    def __post_init__(self):
        for v, m in enumerate(self.mate):
            if m != -1 and self.mate[m] != v:
                raise ValueError("matching is not symmetric")

    @property
    def size(self) -> int:
        return sum(1 for m in self.mate if m != -1) // 2

    def is_perfect(self) -> bool:
        return all(m != -1 for m in self.mate)

    def pairs(self) -> list[tuple[int, int]]:
        return [(v, m) for v, m in enumerate(self.mate) if m > v]


def max_cardinality_matching(g: UGraph) -> UMatching:
    """Maximum-cardinality matching (weights are ignored)."""
    unit = [(u, v, 1) for (u, v, _w) in g.edges]
    mate = maximum_weight_matching(g.n, unit)
    return UMatching(tuple(mate), _matched_weight(g, mate))


def max_weight_perfect_matching(g: UGraph) -> UMatching | None:
    """Maximum total weight among perfect matchings, or None if none exists.

    Implemented by shifting all weights so that cardinality dominates any
    possible weight trade-off; a maximum-weight matching of the shifted
    graph is then a maximum-cardinality matching of maximum original weight.
    """
    if g.n % 2 == 1:
        return None
    if g.n == 0:
        return UMatching((), 0)
    if not g.edges:
        return None
    wmin = min(w for (_u, _v, w) in g.edges)
    wmax = max(w for (_u, _v, w) in g.edges)
    shift = g.n * (wmax - wmin) + 1 - wmin
    shifted = [(u, v, w + shift) for (u, v, w) in g.edges]
    mate = maximum_weight_matching(g.n, shifted)
    if any(m == -1 for m in mate):
        return None
    return UMatching(tuple(mate), _matched_weight(g, mate))


def _matched_weight(g: UGraph, mate) -> int:
    return sum(w for (u, v, w) in g.edges if mate[u] == v)


class _Blossom:
    """Non-trivial blossom: ordered sub-blossoms plus their connecting edges."""

    __slots__ = ("childs", "edges")

    def __init__(self):
        self.childs = []
        self.edges = []

    def leaves(self):
        stack = list(self.childs)
        while stack:
            t = stack.pop()
            if isinstance(t, _Blossom):
                stack.extend(t.childs)
            else:
                yield t


def maximum_weight_matching(n: int, edges: list[tuple[int, int, int]],
                            verify: bool = True) -> list[int]:
    """Maximum-weight matching; returns the mate vector (-1 = unmatched).

    ``edges`` must contain integer weights and at most one edge per vertex
    pair.  With ``verify`` the LP dual certificate is checked before
    returning, making optimality of the result unconditional.
    """
    if not edges:
        return [-1] * n

    m = len(edges)
    earr_i = np.fromiter((e[0] for e in edges), dtype=np.int64, count=m)
    earr_j = np.fromiter((e[1] for e in edges), dtype=np.int64, count=m)
    earr_w = np.fromiter((e[2] for e in edges), dtype=np.int64, count=m)

    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, (i, j, _w) in enumerate(edges):
        adj[i].append((j, k))
        adj[j].append((i, k))

    maxweight = max(e[2] for e in edges)

    mate = [-1] * n
    # Vertex duals are pre-multiplied by two so that all values stay integral.
    dualvar = [maxweight] * n
    blossomdual: dict[_Blossom, int] = {}
    label: dict = {}
    labeledge: dict = {}
    inblossom: dict = {v: v for v in range(n)}
    blossomparent: dict = {v: None for v in range(n)}
    blossombase: dict = {v: v for v in range(n)}
    allowed = bytearray(m)
    queue: list[int] = []

    edge_weight = {}
    for k, (i, j, w) in enumerate(edges):
        edge_weight[(i, j)] = w
        edge_weight[(j, i)] = w
    edge_index = {}
    for k, (i, j, _w) in enumerate(edges):
        edge_index[(i, j)] = k
        edge_index[(j, i)] = k

    def slack(v: int, w: int) -> int:
        return dualvar[v] + dualvar[w] - 2 * edge_weight[(v, w)]

    def assign_label(w: int, t: int, v: int) -> None:
        b = inblossom[w]
        assert label.get(w) is None and label.get(b) is None
        label[w] = label[b] = t
        if v != _NO_NODE:
            labeledge[w] = labeledge[b] = (v, w)
        else:
            labeledge[w] = labeledge[b] = None
        if t == 1:
            if isinstance(b, _Blossom):
                queue.extend(b.leaves())
            else:
                queue.append(b)
        elif t == 2:
            base = blossombase[b]
            assign_label(mate[base], 1, base)

    def scan_blossom(v: int, w: int):
        """Trace back from v and w; return a common base vertex or _NO_NODE."""
        path = []
        base = _NO_NODE
        while v != _NO_NODE:
            b = inblossom[v]
            if label[b] & 4:
                base = blossombase[b]
                break
            assert label[b] == 1
            path.append(b)
            label[b] = 5
            if labeledge[b] is None:
                assert mate[blossombase[b]] == -1
                v = _NO_NODE
            else:
                assert labeledge[b][0] == mate[blossombase[b]]
                v = labeledge[b][0]
                b = inblossom[v]
                assert label[b] == 2
                v = labeledge[b][0]
            if w != _NO_NODE:
                v, w = w, v
        for b in path:
            label[b] = 1
        return base

    def add_blossom(base: int, v: int, w: int) -> None:
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        b = _Blossom()
        blossombase[b] = base
        blossomparent[b] = None
        blossomparent[bb] = b
        path = b.childs
        edgs = b.edges
        edgs.append((v, w))
        while bv != bb:
            blossomparent[bv] = b
            path.append(bv)
            edgs.append(labeledge[bv])
            assert label[bv] == 2 or (
                label[bv] == 1 and labeledge[bv][0] == mate[blossombase[bv]])
            v = labeledge[bv][0]
            bv = inblossom[v]
        path.append(bb)
        path.reverse()
        edgs.reverse()
        while bw != bb:
            blossomparent[bw] = b
            path.append(bw)
            edgs.append((labeledge[bw][1], labeledge[bw][0]))
            assert label[bw] == 2 or (
                label[bw] == 1 and labeledge[bw][0] == mate[blossombase[bw]])
            w = labeledge[bw][0]
            bw = inblossom[w]
        assert label[bb] == 1
        label[b] = 1
        labeledge[b] = labeledge[bb]
        blossomdual[b] = 0
        for leaf in b.leaves():
            if label[inblossom[leaf]] == 2:
                queue.append(leaf)
            inblossom[leaf] = b

    def expand_blossom(b: _Blossom, endstage: bool) -> None:
        def _recurse(b: _Blossom, endstage: bool):
            for s in b.childs:
                blossomparent[s] = None
                if isinstance(s, _Blossom):
                    if endstage and blossomdual[s] == 0:
                        yield s
                    else:
                        for v in s.leaves():
                            inblossom[v] = s
                else:
                    inblossom[s] = s
            if (not endstage) and label.get(b) == 2:
                entrychild = inblossom[labeledge[b][1]]
                j = b.childs.index(entrychild)
                if j & 1:
                    j -= len(b.childs)
                    jstep = 1
                else:
                    jstep = -1
                v, w = labeledge[b]
                while j != 0:
                    if jstep == 1:
                        p, q = b.edges[j]
                    else:
                        q, p = b.edges[j - 1]
                    label[w] = None
                    label[q] = None
                    assign_label(w, 2, v)
                    allowed[edge_index[(p, q)]] = 1
                    j += jstep
                    if jstep == 1:
                        v, w = b.edges[j]
                    else:
                        w, v = b.edges[j - 1]
                    allowed[edge_index[(v, w)]] = 1
                    j += jstep
                bw = b.childs[j]
                label[w] = label[bw] = 2
                labeledge[w] = labeledge[bw] = (v, w)
                j += jstep
                while b.childs[j] != entrychild:
                    bv = b.childs[j]
                    if label.get(bv) == 1:
                        j += jstep
                        continue
                    if isinstance(bv, _Blossom):
                        for v in bv.leaves():
                            if label.get(v):
                                break
                    else:
                        v = bv
                    if label.get(v):
                        assert label[v] == 2
                        assert inblossom[v] == bv
                        label[v] = None
                        label[mate[blossombase[bv]]] = None
                        assign_label(v, 2, labeledge[v][0])
                    j += jstep
            label.pop(b, None)
            labeledge.pop(b, None)
            del blossomparent[b]
            del blossombase[b]
            del blossomdual[b]

        stack = [_recurse(b, endstage)]
        while stack:
            top = stack[-1]
            for s in top:
                stack.append(_recurse(s, endstage))
                break
            else:
                stack.pop()

    def augment_blossom(b: _Blossom, v: int) -> None:
        def _recurse(b: _Blossom, v: int):
            t = v
            while blossomparent[t] != b:
                t = blossomparent[t]
            if isinstance(t, _Blossom):
                yield (t, v)
            i = j = b.childs.index(t)
            if i & 1:
                j -= len(b.childs)
                jstep = 1
            else:
                jstep = -1
            while j != 0:
                j += jstep
                t = b.childs[j]
                if jstep == 1:
                    w, x = b.edges[j]
                else:
                    x, w = b.edges[j - 1]
                if isinstance(t, _Blossom):
                    yield (t, w)
                j += jstep
                t = b.childs[j]
                if isinstance(t, _Blossom):
                    yield (t, x)
                mate[w] = x
                mate[x] = w
            b.childs = b.childs[i:] + b.childs[:i]
            b.edges = b.edges[i:] + b.edges[:i]
            blossombase[b] = blossombase[b.childs[0]]
            assert blossombase[b] == v

        stack = [_recurse(b, v)]
        while stack:
            top = stack[-1]
            for args in top:
                stack.append(_recurse(*args))
                break
            else:
                stack.pop()

    def augment_matching(v: int, w: int) -> None:
        for (s, j) in ((v, w), (w, v)):
            while True:
                bs = inblossom[s]
                assert label[bs] == 1
                assert (labeledge[bs] is None and mate[blossombase[bs]] == -1) or (
                    labeledge[bs][0] == mate[blossombase[bs]])
                if isinstance(bs, _Blossom):
                    augment_blossom(bs, s)
                mate[s] = j
                if labeledge[bs] is None:
                    break
                t = labeledge[bs][0]
                bt = inblossom[t]
                assert label[bt] == 2
                s, j = labeledge[bt]
                assert blossombase[bt] == t
                if isinstance(bt, _Blossom):
                    augment_blossom(bt, j)
                mate[j] = s

    # Synthetic integer ids for top-level blossoms, for the vectorized scans.
    blossom_ids: dict = {}

    def _top_arrays():
        blossom_ids.clear()
        next_id = n
        top = np.empty(n, dtype=np.int64)
        lab = np.zeros(n, dtype=np.int64)
        for v in range(n):
            b = inblossom[v]
            if isinstance(b, _Blossom):
                tid = blossom_ids.get(id(b))
                if tid is None:
                    tid = next_id
                    next_id += 1
                    blossom_ids[id(b)] = tid
                top[v] = tid
            else:
                top[v] = b
            lb = label.get(b)
            lab[v] = lb if lb in (1, 2) else 0
        return top, lab

    while True:
        label.clear()
        labeledge.clear()
        allowed[:] = bytes(m)
        queue.clear()
        for v in range(n):
            if mate[v] == -1 and label.get(inblossom[v]) is None:
                assign_label(v, 1, _NO_NODE)

        augmented = False
        while True:
            while queue and not augmented:
                v = queue.pop()
                assert label[inblossom[v]] == 1
                for (w, k) in adj[v]:
                    bv = inblossom[v]
                    bw = inblossom[w]
                    if bv == bw:
                        continue
                    if not allowed[k]:
                        if slack(v, w) <= 0:
                            allowed[k] = 1
                    if allowed[k]:
                        lw = label.get(bw)
                        if lw is None:
                            assign_label(w, 2, v)
                        elif lw == 1:
                            base = scan_blossom(v, w)
                            if base != _NO_NODE:
                                add_blossom(base, v, w)
                            else:
                                augment_matching(v, w)
                                augmented = True
                                break
                        elif label.get(w) is None:
                            assert label[bw] == 2
                            label[w] = 2
                            labeledge[w] = (v, w)

            if augmented:
                break

            # No augmenting path at the current duals; find the tightest
            # constraint.  Deltas are computed over the full edge arrays.
            top, lab = _top_arrays()
            dv = np.fromiter(dualvar, dtype=np.int64, count=n)

            deltatype = 1
            delta = min(dualvar)
            deltaedge = None
            deltablossom = None

            slack_arr = dv[earr_i] + dv[earr_j] - 2 * earr_w
            external = top[earr_i] != top[earr_j]
            li = lab[earr_i]
            lj = lab[earr_j]

            m2 = external & (((li == 1) & (lj == 0)) | ((li == 0) & (lj == 1)))
            if m2.any():
                ks = np.where(m2)[0]
                best = ks[np.argmin(slack_arr[ks])]
                d = int(slack_arr[best])
                if d < delta:
                    delta = d
                    deltatype = 2
                    deltaedge = int(best)

            m3 = external & (li == 1) & (lj == 1)
            if m3.any():
                ks = np.where(m3)[0]
                best = ks[np.argmin(slack_arr[ks])]
                kslack = int(slack_arr[best])
                if kslack % 2 != 0:
                    raise InternalInvariantError("odd S-S slack with integer weights")
                d = kslack // 2
                if d < delta:
                    delta = d
                    deltatype = 3
                    deltaedge = int(best)

            for b, bd in blossomdual.items():
                if blossomparent[b] is None and label.get(b) == 2 and bd < delta:
                    delta = bd
                    deltatype = 4
                    deltablossom = b

            for v in range(n):
                lb = label.get(inblossom[v])
                if lb == 1:
                    dualvar[v] -= delta
                elif lb == 2:
                    dualvar[v] += delta
            for b in blossomdual:
                if blossomparent[b] is None:
                    lb = label.get(b)
                    if lb == 1:
                        blossomdual[b] += delta
                    elif lb == 2:
                        blossomdual[b] -= delta

            if deltatype == 1:
                break
            elif deltatype in (2, 3):
                i, j = int(earr_i[deltaedge]), int(earr_j[deltaedge])
                if label.get(inblossom[i]) != 1:
                    i, j = j, i
                assert label.get(inblossom[i]) == 1
                allowed[deltaedge] = 1
                queue.append(i)
            elif deltatype == 4:
                expand_blossom(deltablossom, False)

        for v in range(n):
            if mate[v] != -1:
                assert mate[mate[v]] == v

        if not augmented:
            break

        for b in list(blossomdual.keys()):
            if b not in blossomdual:
                continue
            if blossomparent[b] is None and label.get(b) == 1 and blossomdual[b] == 0:
                expand_blossom(b, True)

    if verify:
        _verify_optimum(n, edges, mate, dualvar, blossomparent, blossomdual)
    return mate


def _verify_optimum(n, edges, mate, dualvar, blossomparent, blossomdual) -> None:
    """Complementary-slackness check of the dual certificate (exact, integer)."""
    if min(dualvar) < 0:
        raise InternalInvariantError("negative vertex dual")
    if blossomdual and min(blossomdual.values()) < 0:
        raise InternalInvariantError("negative blossom dual")
    for (i, j, w) in edges:
        s = dualvar[i] + dualvar[j] - 2 * w
        iblossoms = [i]
        jblossoms = [j]
        while blossomparent[iblossoms[-1]] is not None:
            iblossoms.append(blossomparent[iblossoms[-1]])
        while blossomparent[jblossoms[-1]] is not None:
            jblossoms.append(blossomparent[jblossoms[-1]])
        iblossoms.reverse()
        jblossoms.reverse()
        for (bi, bj) in zip(iblossoms, jblossoms):
            if bi != bj:
                break
            if isinstance(bi, _Blossom):
                s += 2 * blossomdual[bi]
        if s < 0:
            raise InternalInvariantError("edge with negative slack")
        if (mate[i] == j or mate[j] == i) and s != 0:
            raise InternalInvariantError("matched edge with non-zero slack")
    for v in range(n):
        if mate[v] == -1 and dualvar[v] != 0:
            raise InternalInvariantError("unmatched vertex with non-zero dual")
    for b, bd in blossomdual.items():
        if bd > 0:
            if len(b.edges) % 2 != 1:
                raise InternalInvariantError("even blossom cycle")
            for (i, j) in b.edges[1::2]:
                if mate[i] != j or mate[j] != i:
                    raise InternalInvariantError("positive-dual blossom not full")
