"""Instance and tour primitives for Max (0,1)-ATSP.

An instance is a complete loopless digraph on ``n`` vertices with arc
weights in {0, 1}.  Only the weight-1 arcs are stored; every other ordered
pair is an implicit 0-arc.  Instances are immutable and safe to share.

Generators are driven by a splitmix64 stream so that the same parameters
produce bit-identical instances on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MalformedInputError

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64 pseudo-random stream over pure 64-bit integer arithmetic."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform-ish value in [0, bound) by modulo reduction."""
        return self.next_u64() % bound


@dataclass(frozen=True)
class Instance:
    """Complete loopless digraph given by its set of weight-1 arcs."""

    n: int
    ones: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"instance needs at least 2 vertices, got {self.n}")
        object.__setattr__(self, "ones", frozenset(self.ones))
        for (u, v) in self.ones:
            if u == v:
                raise ValueError(f"self-loop ({u},{v}) is not allowed")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"arc ({u},{v}) out of range for n={self.n}")

    def weight(self, u: int, v: int) -> int:
        return 1 if (u, v) in self.ones else 0

    def sorted_ones(self) -> list[tuple[int, int]]:
        return sorted(self.ones)


@dataclass(frozen=True)
class Tour:
    """Cyclic vertex order together with its weight under some instance."""

    order: tuple[int, ...]
    weight: int

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))


def check_permutation(order, n: int) -> None:
    if len(order) != n or set(order) != set(range(n)):
        raise ValueError("order is not a permutation of the vertex set")


def tour_weight(inst: Instance, order) -> int:
    """Number of weight-1 arcs among the consecutive pairs of a cyclic order."""
    check_permutation(order, inst.n)
    ones = inst.ones
    n = inst.n
    return sum((order[i], order[(i + 1) % n]) in ones for i in range(n))


def make_tour(inst: Instance, order) -> Tour:
    return Tour(tuple(order), tour_weight(inst, order))


def parse_instance(text: str) -> Instance:
    """Parse the plain-text instance format (header ``n m`` then m arc lines)."""
    lines = text.splitlines()
    if not lines:
        raise MalformedInputError("empty input")
    head = lines[0].split()
    if len(head) != 2:
        raise MalformedInputError(f"expected header 'n m', got {lines[0]!r}", line=1)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise MalformedInputError(f"non-integer header {lines[0]!r}", line=1) from None
    if n < 2:
        raise MalformedInputError(f"vertex count must be at least 2, got {n}", line=1)
    if m < 0:
        raise MalformedInputError(f"negative arc count {m}", line=1)

    body = [(i + 2, ln) for i, ln in enumerate(lines[1:]) if ln.strip()]
    if len(body) != m:
        raise MalformedInputError(f"header promises {m} arcs, found {len(body)}")
    ones: set[tuple[int, int]] = set()
    for lineno, ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise MalformedInputError(f"expected 'u v', got {ln!r}", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedInputError(f"non-integer arc {ln!r}", line=lineno) from None
        if u == v:
            raise MalformedInputError(f"self-loop ({u},{v})", line=lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise MalformedInputError(f"index out of range in ({u},{v})", line=lineno)
        if (u, v) in ones:
            raise MalformedInputError(f"duplicate arc ({u},{v})", line=lineno)
        ones.add((u, v))
    return Instance(n, frozenset(ones))


def write_instance(inst: Instance) -> str:
    """Canonical text form: header then arcs in lexicographic order."""
    out = [f"{inst.n} {len(inst.ones)}"]
    out.extend(f"{u} {v}" for (u, v) in inst.sorted_ones())
    return "\n".join(out) + "\n"


def gen_random(n: int, p: float, seed: int) -> Instance:
    """Seeded Erdos-Renyi style instance over the ordered pairs.

    Pairs are visited in row-major order (u outer, v inner, skipping u == v)
    and kept iff the next splitmix64 draw, read as a fraction of 2^64, is
    below ``p``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be within [0,1], got {p}")
    rng = SplitMix64(seed)
    threshold = int(p * 2.0**64)
    ones = set()
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if rng.next_u64() < threshold:
                ones.add((u, v))
    return Instance(n, frozenset(ones))


def gen_planted(n: int, extra: int, seed: int) -> tuple[Instance, list[int]]:
    """Instance with a planted Hamiltonian cycle of 1-arcs plus noise arcs.

    The planted cycle makes the optimum tour weight exactly ``n``, which
    allows ratio checks on instances far beyond the exact oracle's reach.
    Returns the instance and the planted cyclic order.
    """
    if n < 3:
        raise ValueError("planted instances need n >= 3")
    if extra < 0:
        raise ValueError("extra must be non-negative")
    available = n * (n - 1) - n
    if extra > available:
        raise ValueError(f"extra={extra} exceeds {available} available non-cycle pairs")

    rng = SplitMix64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):  # Fisher-Yates on the same stream
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    ones = {(perm[i], perm[(i + 1) % n]) for i in range(n)}

    added = 0
    while added < extra:
        u = rng.below(n)
        v = rng.below(n)
        if u == v or (u, v) in ones:
            continue
        ones.add((u, v))
        added += 1
    return Instance(n, frozenset(ones)), perm


def tour_to_text(tour: Tour) -> str:
    return f"w {tour.weight}\n" + " ".join(str(v) for v in tour.order) + "\n"


def parse_tour(text: str) -> Tour:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise MalformedInputError("tour file needs a weight line and an order line")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "w":
        raise MalformedInputError(f"expected 'w <weight>', got {lines[0]!r}", line=1)
    try:
        weight = int(head[1])
        order = tuple(int(x) for x in lines[1].split())
    except ValueError:
        raise MalformedInputError("non-integer value in tour file") from None
    return Tour(order, weight)
