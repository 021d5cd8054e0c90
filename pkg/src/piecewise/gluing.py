"""Graph-level constructions: gluings, pocket and star extensions, Houghton and bubble graphs."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .labelled_graph import (
    BUBBLE_TAG,
    GLUED_TAG,
    INT_TAG,
    RAY_TAG,
    ROOT,
    ROOT_TAG,
    STAR,
    BubblePoint,
    Glued,
    IntegerLattice,
    LabelledGraph,
    Letter,
    RayPoint,
    Window,
    WindowOverflow,
    build_cayley,
    graph_distances,
    letter_action,
    relabel,
    vertex_str,
)


class GluingError(ValueError):
    """Bad identification or clashing alphabets."""


# ---------------------------------------------------------------------------
# general gluing


@dataclass(frozen=True)
class Identification:
    """Bijection ``j`` from a subset of X1 onto a subset of X2.

    Given as callables so that infinite identified sets (half-lines, say) can
    be used; :meth:`from_dict` covers the finite case and checks bijectivity.
    """

    in_first: Callable[[tuple], bool]
    in_second: Callable[[tuple], bool]
    forward: Callable[[tuple], tuple]
    backward: Callable[[tuple], tuple]
    finite_pairs: tuple | None = None

    @classmethod
    def from_dict(cls, mapping: Mapping[tuple, tuple]) -> "Identification":
        pairs = tuple(sorted(mapping.items()))
        images = [b for _, b in pairs]
        if len(set(images)) != len(images):
            raise GluingError("non-bijective identification: two vertices share an image")
        fwd = dict(pairs)
        bwd = {b: a for a, b in pairs}
        return cls(fwd.__contains__, bwd.__contains__, fwd.__getitem__, bwd.__getitem__, pairs)

    @classmethod
    def empty(cls) -> "Identification":
        return cls.from_dict({})


def _check_alphabets(graphs: Sequence[LabelledGraph]):
    seen = set()
    for g in graphs:
        for n in g.names:
            if n in seen:
                raise GluingError(f"alphabet collision on letter {n!r}; rename with with_names first")
            seen.add(n)


def glue(first: LabelledGraph, second: LabelledGraph, ident: Identification, info: dict | None = None) -> LabelledGraph:
    """Glue two labelled graphs along ``ident``.

    Vertices of the first graph become ``Glued(0, v)``; vertices of the second
    graph that are not identified become ``Glued(1, v)``. Each letter acts
    natively on its own side and by a self-loop on the other side.
    """
    _check_alphabets([first, second])
    if ident.finite_pairs is not None:
        for a, b in ident.finite_pairs:
            if not first.contains(a):
                raise GluingError(f"identified vertex {vertex_str(a)} is not in the first graph")
            if not second.contains(b):
                raise GluingError(f"identified vertex {vertex_str(b)} is not in the second graph")

    def to_glued_second(v):
        if ident.in_second(v):
            return Glued(0, ident.backward(v))
        return Glued(1, v)

    def first_letter(f):
        def act(x):
            if x[0] != GLUED_TAG:
                raise KeyError(x)
            if x[1] == 0:
                return Glued(0, f(x[2]))
            return x

        return act

    def second_letter(f):
        def act(x):
            if x[0] != GLUED_TAG:
                raise KeyError(x)
            if x[1] == 1:
                return to_glued_second(f(x[2]))
            if ident.in_first(x[2]):
                return to_glued_second(f(ident.forward(x[2])))
            return x

        return act

    fwd = [first_letter(f) for f in first.forward] + [second_letter(f) for f in second.forward]
    bwd = [first_letter(f) for f in first.backward] + [second_letter(f) for f in second.backward]
    meta = {"construction": "glue", "parts": [first.info, second.info]}
    meta.update(info or {})
    root = Glued(0, first.root)
    names = list(first.names) + list(second.names)
    if first.finite and second.finite:
        verts = [Glued(0, v) for v in first.vertices] + [Glued(1, v) for v in second.vertices if not ident.in_second(v)]
        return LabelledGraph(names, fwd, bwd, root, vertices=verts, info=meta)

    def contains(x):
        if x[0] != GLUED_TAG:
            return False
        if x[1] == 0:
            return first.contains(x[2])
        return x[1] == 1 and second.contains(x[2]) and not ident.in_second(x[2])

    def listing():
        out = [Glued(0, v) for v in first.window_vertices()]
        out += [Glued(1, v) for v in second.window_vertices() if not ident.in_second(v)]
        return out

    return LabelledGraph(names, fwd, bwd, root, window=Window(contains, listing, "glued"), info=meta)


# ---------------------------------------------------------------------------
# rooted gluing, pocket and star extensions


def rooted_gluing(components: Sequence[LabelledGraph], info: dict | None = None) -> LabelledGraph:
    """Identify the roots of several graphs into one vertex ``o``.

    A vertex ``v`` of component ``i`` (other than its root) becomes
    ``Glued(i, v)``.
    """
    if len(components) < 2:
        raise GluingError("rooted gluing needs at least two components")
    _check_alphabets(components)

    def embed(i, root_i):
        def to_new(v):
            return ROOT if v == root_i else Glued(i, v)

        return to_new

    embeds = [embed(i, g.root) for i, g in enumerate(components)]

    def make(i, f, root_i):
        to_new = embeds[i]

        def act(x):
            if x == ROOT:
                return to_new(f(root_i))
            if x[0] == GLUED_TAG and x[1] == i:
                return to_new(f(x[2]))
            return x

        return act

    fwd, bwd, names = [], [], []
    offsets = []
    for i, g in enumerate(components):
        offsets.append(len(names))
        fwd += [make(i, f, g.root) for f in g.forward]
        bwd += [make(i, f, g.root) for f in g.backward]
        names += list(g.names)
    meta = {"construction": "rooted", "components": [g.info for g in components], "letter_offsets": offsets,
            "sizes": [g.k for g in components]}
    meta.update(info or {})
    if all(g.finite for g in components):
        verts = [ROOT] + [Glued(i, v) for i, g in enumerate(components) for v in g.vertices if v != g.root]
        return LabelledGraph(names, fwd, bwd, ROOT, vertices=verts, info=meta)

    def contains(x):
        if x == ROOT:
            return True
        if x[0] != GLUED_TAG or not (0 <= x[1] < len(components)):
            return False
        g = components[x[1]]
        return x[2] != g.root and g.contains(x[2])

    def listing():
        out = [ROOT]
        for i, g in enumerate(components):
            out += [Glued(i, v) for v in g.window_vertices() if v != g.root]
        return out

    return LabelledGraph(names, fwd, bwd, ROOT, window=Window(contains, listing, "rooted"), info=meta)


def _swap(a, b):
    def act(x):
        if x == a:
            return b
        if x == b:
            return a
        return x

    return act


def pocket_extension(graph: LabelledGraph, name: str = "tau") -> LabelledGraph:
    """Add a vertex ``*`` and a letter transposing ``*`` with the root.

    Original vertex ids are kept; the old letters fix ``*``.
    """
    if name in graph.names:
        raise GluingError(f"letter name {name!r} already used")

    def lift(f):
        return lambda x: x if x == STAR else f(x)

    fwd = [lift(f) for f in graph.forward] + [_swap(STAR, graph.root)]
    bwd = [lift(f) for f in graph.backward] + [_swap(STAR, graph.root)]
    meta = {"construction": "pocket", "base": graph.info}
    names = list(graph.names) + [name]
    if graph.finite:
        return LabelledGraph(names, fwd, bwd, graph.root, vertices=list(graph.vertices) + [STAR], info=meta)
    w = graph.window
    win = Window(lambda x: x == STAR or w.contains(x), lambda: [STAR] + list(w.vertices()), w.label)
    return LabelledGraph(names, fwd, bwd, graph.root, window=win, info=meta)


def star_extension(cayley: LabelledGraph, names: Sequence[str] | None = None) -> LabelledGraph:
    """Add letters ``t_i`` acting as the transposition of the identity and ``s_i``."""
    if cayley.info.get("construction") != "cayley":
        raise GluingError("star extension needs a Cayley graph from build_cayley")
    base = cayley.info["base"]
    gens = cayley.info["generators"]
    if names is None:
        names = ["t"] if len(gens) == 1 else [f"t{i + 1}" for i in range(len(gens))]
    ident = base.vertex(base.identity)
    new = [_swap(ident, base.vertex(s)) for s in gens]
    meta = {"construction": "star", "base": cayley.info}
    return LabelledGraph(
        list(cayley.names) + list(names),
        list(cayley.forward) + new,
        list(cayley.backward) + new,
        cayley.root,
        vertices=cayley.vertices,
        window=cayley.window,
        info=meta,
    )


# ---------------------------------------------------------------------------
# Houghton graphs


def ray_position(v: tuple, neg_ray: int, pos_ray: int):
    """Coordinate of ``v`` on the line formed by two rays, or None off the line."""
    if v == ROOT:
        return 0
    if v[0] == RAY_TAG:
        if v[1] == neg_ray:
            return -v[2]
        if v[1] == pos_ray:
            return v[2]
    return None


def line_point(p: int, neg_ray: int, pos_ray: int) -> tuple:
    if p == 0:
        return ROOT
    return RayPoint(pos_ray, p) if p > 0 else RayPoint(neg_ray, -p)


def ray_shift(neg_ray: int, pos_ray: int, n: int):
    """Translation by ``n`` along the line through two rays; identity elsewhere."""

    def act(v):
        p = ray_position(v, neg_ray, pos_ray)
        if p is None:
            return v
        return line_point(p + n, neg_ray, pos_ray)

    return act


def houghton_window(k: int, depth: int) -> Window:
    def contains(v):
        if v == ROOT:
            return True
        return v[0] == RAY_TAG and 1 <= v[1] <= k and 1 <= v[2] <= depth

    def listing():
        return [ROOT] + [RayPoint(i, m) for i in range(1, k + 1) for m in range(1, depth + 1)]

    return Window(contains, listing, f"depth <= {depth}")


def build_houghton(k: int = 3, pairs: Sequence[tuple] | None = None, window: int = 64) -> LabelledGraph:
    """Schreier graph of the Houghton group on ``k`` rays.

    Letter ``h{i}{j}`` translates the line ``R_i ∪ {o} ∪ R_j`` one step
    toward ``R_j``. The default generators are ``h_{1,j}`` for ``j = 2..k``.
    """
    if k < 3:
        raise ValueError("Houghton graphs need k >= 3 rays")
    if pairs is None:
        pairs = [(1, j) for j in range(2, k + 1)]
    pairs = [tuple(p) for p in pairs]
    for i, j in pairs:
        if not (1 <= i < j <= k):
            raise ValueError(f"bad ray pair {(i, j)}")
    covered = {r for p in pairs for r in p}
    if covered != set(range(1, k + 1)):
        raise ValueError("every ray must appear in some generator pair")
    names = [f"h{i}{j}" if k < 10 else f"h{i}_{j}" for i, j in pairs]
    fwd = [ray_shift(i, j, 1) for i, j in pairs]
    bwd = [ray_shift(i, j, -1) for i, j in pairs]
    info = {"construction": "houghton", "k": k, "pairs": pairs, "window_radius": window}
    return LabelledGraph(names, fwd, bwd, ROOT, window=houghton_window(k, window), info=info)


def houghton_from_gluing(window: int = 64) -> LabelledGraph:
    """Two copies of Z glued along their nonpositive halves, relabelled to Y_3.

    Ray 1 is where the first letter acts trivially, ray 2 where the second
    one does, and ray 3 is the shared negative half.
    """
    z1 = build_cayley("Z", window=window, names=["t1"])
    z2 = build_cayley("Z", window=window, names=["t2"])
    ident = Identification(
        in_first=lambda v: v[0] == INT_TAG and v[1] <= 0,
        in_second=lambda v: v[0] == INT_TAG and v[1] <= 0,
        forward=lambda v: v,
        backward=lambda v: v,
    )
    glued = glue(z1, z2, ident)

    def to_y(v):
        side, n = v[1], v[2][1]
        if n == 0:
            return ROOT
        if n < 0:
            return RayPoint(3, -n)
        return RayPoint(2, n) if side == 0 else RayPoint(1, n)

    def from_y(y):
        if y == ROOT:
            return Glued(0, (INT_TAG, 0))
        if y[0] != RAY_TAG:
            raise KeyError(y)
        ray, m = y[1], y[2]
        if ray == 3:
            return Glued(0, (INT_TAG, -m))
        if ray == 2:
            return Glued(0, (INT_TAG, m))
        if ray == 1:
            return Glued(1, (INT_TAG, m))
        raise KeyError(y)

    info = {"construction": "houghton", "k": 3, "pairs": None, "from_gluing": True, "window_radius": window}
    return relabel(glued, to_y, from_y, root=ROOT, window=houghton_window(3, window), info=info)


def tripod_gluing(window: int = 32) -> LabelledGraph:
    """Three copies of Z glued along a length-one tripod (six linear ends).

    Copies 1 and 2 share ``{-1, 0}``; copy 3 has ``0`` on the centre, ``-1``
    on ``1`` of copy 1 and ``1`` on ``1`` of copy 2.
    """
    z = [build_cayley("Z", window=window, names=[f"t{i}"]) for i in (1, 2, 3)]
    first = glue(z[0], z[1], Identification.from_dict({(INT_TAG, -1): (INT_TAG, -1), (INT_TAG, 0): (INT_TAG, 0)}))
    ident = Identification.from_dict({
        Glued(0, (INT_TAG, 0)): (INT_TAG, 0),
        Glued(0, (INT_TAG, 1)): (INT_TAG, -1),
        Glued(1, (INT_TAG, 1)): (INT_TAG, 1),
    })
    g = glue(first, z[2], ident)
    g.info["construction"] = "tripod"
    return g


# ---------------------------------------------------------------------------
# bubble graphs


def check_bubble_sequence(a: Sequence[int]):
    a = [int(x) for x in a]
    if not a:
        raise ValueError("empty bubble sequence")
    for x in a:
        if x <= 0 or x % 4:
            raise ValueError(f"bubble lengths must be positive multiples of 4, got {x}")
    if any(b <= c for c, b in zip(a, a[1:])):
        raise ValueError("bubble sequence must be strictly increasing")
    return a


def build_bubble(a: Sequence[int], cutoff: int | None = None, closed: bool = False) -> LabelledGraph:
    """Bubble graph with branch sequence (3, 3, ...).

    Vertices ``(w, u)`` with ``|w| <= cutoff``. ``alpha`` rotates each bubble
    by increasing offset; ``beta`` rotates branching cycles
    ``(w, a) -> (w1, 0) -> (w2, 0) -> (w, a)``. At the deepest level the
    branching step leaves the materialized universe and raises
    :class:`WindowOverflow`; with ``closed=True`` it is a self-loop instead,
    which yields a finite graph.
    """
    a = check_bubble_sequence(a)
    if cutoff is None:
        cutoff = len(a) - 1
    if cutoff < 0 or cutoff >= len(a):
        raise ValueError(f"cutoff {cutoff} needs a sequence of length > cutoff")

    def length(depth):
        return 2 * a[depth]

    def alpha(step):
        def act(v):
            w, u = v[1], v[2]
            return (BUBBLE_TAG, w, (u + step) % length(len(w)))

        return act

    def beta(step):
        def act(v):
            w, u = v[1], v[2]
            d = len(w)
            if u == a[d] and (not closed or d < cutoff):
                return (BUBBLE_TAG, w + ((1,) if step == 1 else (2,)), 0)
            if u == 0 and d >= 1:
                parent, z = w[:-1], w[-1]
                if step == 1:
                    return (BUBBLE_TAG, parent + (2,), 0) if z == 1 else (BUBBLE_TAG, parent, a[d - 1])
                return (BUBBLE_TAG, parent, a[d - 1]) if z == 1 else (BUBBLE_TAG, parent + (1,), 0)
            return v

        return act

    def contains(v):
        if v[0] != BUBBLE_TAG:
            return False
        w, u = v[1], v[2]
        return len(w) <= cutoff and all(d in (1, 2) for d in w) and 0 <= u < length(len(w))

    def listing():
        out = []
        for d in range(cutoff + 1):
            for w in _words(d):
                out += [BubblePoint(w, u) for u in range(length(d))]
        return out

    info = {"construction": "bubble", "a": a, "cutoff": cutoff, "closed": closed}
    root = BubblePoint((), 0)
    fwd = [alpha(1), beta(1)]
    bwd = [alpha(-1), beta(-1)]
    if closed:
        return LabelledGraph(["alpha", "beta"], fwd, bwd, root, vertices=listing(), info=info)
    return LabelledGraph(["alpha", "beta"], fwd, bwd, root, window=Window(contains, listing, f"|w| <= {cutoff}"), info=info)


def _words(d: int):
    if d == 0:
        return [()]
    return [w + (z,) for w in _words(d - 1) for z in (1, 2)]


class BubbleGeometry:
    """Named vertex sets of a bubble graph."""

    def __init__(self, graph: LabelledGraph):
        if graph.info.get("construction") != "bubble":
            raise ValueError("not a bubble graph")
        self.graph = graph
        self.a = graph.info["a"]

    def midpoint(self, k: int) -> tuple:
        """Middle point of the first level-k bubble."""
        return BubblePoint((1,) * (k - 1), self.a[k - 1] // 2)

    def ball(self, center, radius: int) -> set:
        return set(graph_distances(self.graph, [center], radius))

    def mid_ball(self, k: int, radius: int) -> set:
        if not (0 <= radius <= self.a[k - 1] // 2 - 1):
            raise ValueError("radius must lie in [0, a_k/2 - 1]")
        return self.ball(self.midpoint(k), radius)

    def branching_cycle(self, w: Sequence[int]) -> list:
        w = tuple(w)
        return [BubblePoint(w, self.a[len(w)]), BubblePoint(w + (1,), 0), BubblePoint(w + (2,), 0)]

    def neighborhood(self, w: Sequence[int], r: int) -> set:
        return set(graph_distances(self.graph, self.branching_cycle(w), r))

    def iota(self, w: Sequence[int]):
        """Map from the neighbourhood of a branching cycle to the one on the ``1...1`` branch."""
        w = tuple(w)
        ones = (1,) * len(w)

        def f(v):
            word = v[1]
            if word[: len(w)] != w:
                raise ValueError(f"{vertex_str(v)} is not below {w}")
            return BubblePoint(ones + word[len(w):], v[2])

        return f

    def distance(self, x, y, bound: int) -> int | None:
        d = graph_distances(self.graph, [x], bound)
        return d.get(y)


def bubble_volume_formula(a: Sequence[int], t: int) -> int:
    """Closed-form root ball volume ``sum_{j<k} 2 a_j 2^(j-1) + 2 (t - s_{k-1}) 2^(k-1)``.

    ``k`` is the smallest level with ``t <= s_k`` (partial sums of ``a``). The
    expression does not count the root, so it sits one below the BFS count on
    the first level.
    """
    k = _level_for(a, t)
    s_prev = sum(a[: k - 1])
    return sum(2 * a[j - 1] * 2 ** (j - 1) for j in range(1, k)) + 2 * (t - s_prev) * 2 ** (k - 1)


def bubble_volume_upper(a: Sequence[int], t: int) -> int:
    """``W_a(t) = sum_{j<k} 2 a_j 2^(j-1) + (a_k/2) 2^(k-1)`` with ``2t`` in ``(a_{k-1}, a_k]``."""
    k = 1
    while k <= len(a) and 2 * t > a[k - 1]:
        k += 1
    if k > len(a):
        raise ValueError("sequence too short for this t")
    return sum(2 * a[j - 1] * 2 ** (j - 1) for j in range(1, k)) + (a[k - 1] // 2) * 2 ** (k - 1)


def bubble_volume_lower(a: Sequence[int], t: int) -> float:
    """``A_a(t) = a_k / 2`` with ``2t`` in ``(a_{k-1}, a_k]``."""
    k = 1
    while k <= len(a) and 2 * t > a[k - 1]:
        k += 1
    if k > len(a):
        raise ValueError("sequence too short for this t")
    return a[k - 1] / 2


def _level_for(a, t):
    s = 0
    for k, x in enumerate(a, start=1):
        s += x
        if t <= s:
            return k
    raise ValueError("sequence too short for this t")
