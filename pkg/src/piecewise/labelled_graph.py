"""Labelled graphs whose letters act as bijections of a vertex set.

A graph carries ``k`` letters. Letter ``i`` (1-based) moves a vertex along the
edge labelled ``i``; its formal inverse walks the edge backwards. Vertices with
no edge for a letter carry an implicit self-loop, so every action is total.

Infinite vertex sets are handled through a closed finite window. Any step that
would leave the window raises :class:`WindowOverflow`; nothing is truncated
silently.

Vertex ids are plain tuples whose first entry is a tag. Tuples compare
lexicographically, which gives the canonical ordering (tag first, then
payload) used for every deterministic sort in the package.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

# ---------------------------------------------------------------------------
# vertex ids

ROOT_TAG, STAR_TAG, INT_TAG, RESIDUE_TAG, FINITE_TAG, RAY_TAG, BUBBLE_TAG, GLUED_TAG, LATTICE_TAG = range(9)

ROOT = (ROOT_TAG,)
STAR = (STAR_TAG,)

VertexId = tuple


def Int(n: int) -> tuple:
    return (INT_TAG, int(n))


def Residue(r: int) -> tuple:
    return (RESIDUE_TAG, int(r))


def FiniteElem(index: int) -> tuple:
    return (FINITE_TAG, int(index))


def RayPoint(ray: int, depth: int) -> tuple:
    if ray < 1 or depth < 1:
        raise ValueError(f"ray point needs ray >= 1 and depth >= 1, got ({ray}, {depth})")
    return (RAY_TAG, int(ray), int(depth))


def BubblePoint(word: Sequence[int], offset: int) -> tuple:
    return (BUBBLE_TAG, tuple(int(d) for d in word), int(offset))


def Glued(component: int, inner: tuple) -> tuple:
    return (GLUED_TAG, int(component), inner)


def Lattice(coords: Sequence[int]) -> tuple:
    return (LATTICE_TAG, tuple(int(c) for c in coords))


def vertex_str(v: tuple) -> str:
    """Short stable text form of a vertex id."""
    tag = v[0]
    if tag == ROOT_TAG:
        return "o"
    if tag == STAR_TAG:
        return "*"
    if tag == INT_TAG:
        return str(v[1])
    if tag == RESIDUE_TAG:
        return f"r{v[1]}"
    if tag == FINITE_TAG:
        return f"e{v[1]}"
    if tag == RAY_TAG:
        return f"R{v[1]}.{v[2]}"
    if tag == BUBBLE_TAG:
        return "b" + "".join(str(d) for d in v[1]) + f":{v[2]}"
    if tag == GLUED_TAG:
        return f"g{v[1]}/{vertex_str(v[2])}"
    if tag == LATTICE_TAG:
        return "(" + ",".join(str(c) for c in v[1]) + ")"
    raise ValueError(f"unknown vertex tag in {v!r}")


def vertex_to_json(v: tuple) -> list:
    if v[0] == GLUED_TAG:
        return [v[0], v[1], vertex_to_json(v[2])]
    if v[0] in (BUBBLE_TAG,):
        return [v[0], list(v[1]), v[2]]
    if v[0] == LATTICE_TAG:
        return [v[0], list(v[1])]
    return list(v)


def vertex_from_json(data: list) -> tuple:
    tag = data[0]
    if tag == GLUED_TAG:
        return (tag, data[1], vertex_from_json(data[2]))
    if tag == BUBBLE_TAG:
        return (tag, tuple(data[1]), data[2])
    if tag == LATTICE_TAG:
        return (tag, tuple(data[1]))
    return tuple(data)


# ---------------------------------------------------------------------------
# errors


class WindowOverflow(RuntimeError):
    """A step left the closed window of a lazy graph."""


class MalformedGroup(ValueError):
    """A multiplication table or generator list does not describe a group."""


# ---------------------------------------------------------------------------
# letters


@dataclass(frozen=True, order=True)
class Letter:
    generator_index: int
    sign: int = 1

    def __post_init__(self):
        if self.generator_index < 1:
            raise ValueError("generator_index starts at 1")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def inverse(self) -> "Letter":
        return Letter(self.generator_index, -self.sign)


def word_inverse(word: Sequence[Letter]) -> tuple:
    return tuple(l.inverse() for l in reversed(word))


def parse_word(text: str, names: Sequence[str]) -> tuple:
    """Parse ``"tau s s^-1"`` into letters; tokens are letter names with optional ``^-1``."""
    index = {name: i + 1 for i, name in enumerate(names)}
    out = []
    for tok in text.split():
        sign = 1
        if tok.endswith("^-1"):
            tok, sign = tok[:-3], -1
        if tok not in index:
            raise ValueError(f"unknown letter {tok!r}")
        out.append(Letter(index[tok], sign))
    return tuple(out)


def format_word(word: Sequence[Letter], names: Sequence[str]) -> str:
    parts = []
    for l in word:
        n = names[l.generator_index - 1]
        parts.append(n if l.sign == 1 else n + "^-1")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# base groups used for Cayley graphs


class BaseGroup:
    """Minimal interface for a group whose Cayley graph we build."""

    finite = False
    identity: Any = None

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def vertex(self, a) -> tuple:
        raise NotImplementedError

    def element(self, v: tuple):
        raise NotImplementedError

    def norm(self, a) -> int:
        """Word length for the standard generators (used for window bounds)."""
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class IntegerLattice(BaseGroup):
    """The free abelian group Z^d; Z itself when ``d == 1``."""

    def __init__(self, d: int = 1):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.d = d
        self.identity = 0 if d == 1 else (0,) * d

    def mul(self, a, b):
        if self.d == 1:
            return a + b
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        if self.d == 1:
            return -a
        return tuple(-x for x in a)

    def vertex(self, a):
        return Int(a) if self.d == 1 else Lattice(a)

    def element(self, v):
        if self.d == 1:
            if v[0] != INT_TAG:
                raise KeyError(v)
            return v[1]
        if v[0] != LATTICE_TAG:
            raise KeyError(v)
        return v[1]

    def norm(self, a) -> int:
        return abs(a) if self.d == 1 else sum(abs(x) for x in a)

    def ball(self, r: int) -> list:
        """All elements of norm <= r, sorted."""
        if self.d == 1:
            return list(range(-r, r + 1))
        pts = [p for p in itertools.product(range(-r, r + 1), repeat=self.d) if sum(map(abs, p)) <= r]
        return sorted(pts)

    def far_point(self, distance: int):
        return distance if self.d == 1 else (distance,) + (0,) * (self.d - 1)

    def standard_generators(self) -> list:
        if self.d == 1:
            return [1]
        return [tuple(1 if i == j else 0 for i in range(self.d)) for j in range(self.d)]

    def describe(self):
        return {"group": "Z" if self.d == 1 else f"Z{self.d}"}

    def __eq__(self, other):
        return isinstance(other, IntegerLattice) and other.d == self.d

    def __hash__(self):
        return hash(("Zd", self.d))


class CyclicGroup(BaseGroup):
    finite = True

    def __init__(self, b: int):
        if b < 1:
            raise ValueError("order must be >= 1")
        self.b = b
        self.identity = 0

    def mul(self, a, b):
        return (a + b) % self.b

    def inv(self, a):
        return (-a) % self.b

    def vertex(self, a):
        return Residue(a % self.b)

    def element(self, v):
        if v[0] != RESIDUE_TAG:
            raise KeyError(v)
        return v[1]

    def norm(self, a) -> int:
        a %= self.b
        return min(a, self.b - a)

    def elements(self) -> list:
        return list(range(self.b))

    def standard_generators(self) -> list:
        return [1 % self.b]

    def describe(self):
        return {"group": f"Z/{self.b}"}

    def __eq__(self, other):
        return isinstance(other, CyclicGroup) and other.b == self.b

    def __hash__(self):
        return hash(("Zmod", self.b))


class TableGroup(BaseGroup):
    """A finite group given by its multiplication table ``table[a][b] = a*b``."""

    finite = True

    def __init__(self, table: Sequence[Sequence[int]]):
        n = len(table)
        self.table = [list(map(int, row)) for row in table]
        if any(len(row) != n for row in self.table):
            raise MalformedGroup("table is not square")
        ident = [e for e in range(n) if all(self.table[e][x] == x and self.table[x][e] == x for x in range(n))]
        if not ident:
            raise MalformedGroup("no identity element")
        self.identity = ident[0]
        full = set(range(n))
        for a in range(n):
            if set(self.table[a]) != full:
                raise MalformedGroup(f"left multiplication by {a} is not invertible")
        for a in range(n):
            for b in range(n):
                ab = self.table[a][b]
                for c in range(n):
                    if self.table[ab][c] != self.table[a][self.table[b][c]]:
                        raise MalformedGroup("table is not associative")
        self._inv = [self.table[a].index(self.identity) for a in range(n)]

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    def vertex(self, a):
        return FiniteElem(a)

    def element(self, v):
        if v[0] != FINITE_TAG:
            raise KeyError(v)
        return v[1]

    def norm(self, a) -> int:
        return 0 if a == self.identity else 1

    def elements(self) -> list:
        return list(range(len(self.table)))

    def describe(self):
        return {"group": "table", "table": self.table}


def base_group_from_descriptor(desc) -> BaseGroup:
    """``"Z"``, ``"Z2"``/``"Z^2"``, ``"Z/3"`` or a multiplication table."""
    if isinstance(desc, BaseGroup):
        return desc
    if isinstance(desc, dict):
        if desc.get("group") == "table":
            return TableGroup(desc["table"])
        desc = desc["group"]
    if isinstance(desc, (list, tuple)):
        return TableGroup(desc)
    s = str(desc).replace("^", "")
    if s == "Z":
        return IntegerLattice(1)
    if s.startswith("Z/"):
        return CyclicGroup(int(s[2:]))
    if s.startswith("Z") and s[1:].isdigit():
        return IntegerLattice(int(s[1:]))
    raise ValueError(f"unrecognised group descriptor {desc!r}")


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Window:
    """Closed finite window of a lazy vertex universe."""

    contains: Callable[[tuple], bool]
    vertex_list: Callable[[], list]
    label: str = ""

    def vertices(self) -> list:
        return self.vertex_list()


class LabelledGraph:
    """A labelled graph given by per-letter action functions.

    ``forward[i]`` and ``backward[i]`` are total maps on the vertex universe
    (self-loops return their argument). ``vertices`` is set for finite graphs;
    lazy graphs carry a :class:`Window` instead.
    """

    def __init__(
        self,
        names: Sequence[str],
        forward: Sequence[Callable[[tuple], tuple]],
        backward: Sequence[Callable[[tuple], tuple]],
        root: tuple,
        vertices: Iterable[tuple] | None = None,
        window: Window | None = None,
        info: dict | None = None,
        edge_lists: dict | None = None,
    ):
        if len(names) != len(forward) or len(forward) != len(backward):
            raise ValueError("names / forward / backward length mismatch")
        if len(set(names)) != len(names):
            raise ValueError("duplicate letter names")
        if vertices is None and window is None:
            raise ValueError("a graph needs either a finite vertex list or a window")
        self.names = tuple(names)
        self.forward = tuple(forward)
        self.backward = tuple(backward)
        self.root = root
        self.vertices = tuple(sorted(vertices)) if vertices is not None else None
        self._vertex_set = frozenset(self.vertices) if self.vertices is not None else None
        self.window = window
        self.info = dict(info or {})
        self.edge_lists = edge_lists

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def finite(self) -> bool:
        return self.vertices is not None

    def contains(self, v: tuple) -> bool:
        if self._vertex_set is not None:
            return v in self._vertex_set
        return self.window.contains(v)

    def window_vertices(self) -> list:
        if self.vertices is not None:
            return list(self.vertices)
        return sorted(self.window.vertices())

    def letters(self) -> list:
        """All 2k letters, positive first."""
        return [Letter(i, s) for s in (1, -1) for i in range(1, self.k + 1)]

    def letter_name(self, letter: Letter) -> str:
        n = self.names[letter.generator_index - 1]
        return n if letter.sign == 1 else n + "^-1"

    def letter(self, name: str) -> Letter:
        sign = 1
        if name.endswith("^-1"):
            name, sign = name[:-3], -1
        return Letter(self.names.index(name) + 1, sign)

    def raw_action(self, v: tuple, letter: Letter) -> tuple:
        fn = self.forward if letter.sign == 1 else self.backward
        return fn[letter.generator_index - 1](v)

    def __repr__(self):
        kind = self.info.get("construction", "graph")
        size = len(self.vertices) if self.vertices is not None else "lazy"
        return f"LabelledGraph({kind}, letters={list(self.names)}, vertices={size})"


def letter_action(graph: LabelledGraph, v: tuple, letter: Letter) -> tuple:
    """Image of ``v`` under ``letter``; self-loops return ``v``."""
    if letter.generator_index > graph.k:
        raise ValueError(f"letter {letter} outside alphabet of size {graph.k}")
    if not graph.contains(v):
        if graph.finite:
            raise KeyError(f"{vertex_str(v)} is not a vertex")
        raise WindowOverflow(f"{vertex_str(v)} lies outside the window {graph.window.label}")
    img = graph.raw_action(v, letter)
    if not graph.contains(img):
        raise WindowOverflow(
            f"{graph.letter_name(letter)} moves {vertex_str(v)} to {vertex_str(img)}, outside the window"
        )
    return img


def act_word(graph: LabelledGraph, v: tuple, word: Sequence[Letter]) -> tuple:
    """Apply a word; the rightmost letter acts first."""
    for l in reversed(word):
        v = letter_action(graph, v, l)
    return v


# ---------------------------------------------------------------------------
# Cayley graphs


def _symmetrize(base: BaseGroup, generators: Iterable) -> list:
    out = []
    for g in generators:
        if g == base.identity:
            continue
        if g in out or base.inv(g) in out:
            continue
        out.append(g)
    return out


def build_cayley(
    group,
    generators: Sequence | None = None,
    window: int | None = None,
    names: Sequence[str] | None = None,
) -> LabelledGraph:
    """Cayley graph where letter ``i`` acts by left multiplication ``x -> s_i x``.

    ``group`` is a :class:`BaseGroup` or a descriptor accepted by
    :func:`base_group_from_descriptor`. Infinite groups need a ``window``
    radius (word-length ball).
    """
    base = base_group_from_descriptor(group)
    if generators is None:
        generators = base.standard_generators()
    if isinstance(base, TableGroup):
        n = len(base.table)
        for g in generators:
            if not (0 <= g < n):
                raise MalformedGroup(f"generator {g} is not a table element")
    gens = _symmetrize(base, generators)
    if names is None:
        names = ["s"] if len(gens) == 1 else [f"s{i + 1}" for i in range(len(gens))]
    forward, backward = [], []
    for g in gens:
        gi = base.inv(g)
        forward.append(_left_mult(base, g))
        backward.append(_left_mult(base, gi))
    info = {"construction": "cayley", "base": base, "generators": list(gens)}
    info.update(base.describe())
    if base.finite:
        verts = [base.vertex(a) for a in base.elements()]
        return LabelledGraph(names, forward, backward, base.vertex(base.identity), vertices=verts, info=info)
    if window is None:
        window = 64
    info["window_radius"] = window
    w = Window(
        contains=lambda v, b=base, r=window: _lattice_in_window(b, v, r),
        vertex_list=lambda b=base, r=window: [b.vertex(a) for a in b.ball(r)],
        label=f"|x| <= {window}",
    )
    return LabelledGraph(names, forward, backward, base.vertex(base.identity), window=w, info=info)


def _left_mult(base: BaseGroup, g):
    def act(v, base=base, g=g):
        return base.vertex(base.mul(g, base.element(v)))

    return act


def _lattice_in_window(base: IntegerLattice, v, r):
    try:
        return base.norm(base.element(v)) <= r
    except KeyError:
        return False


def from_edges(
    names: Sequence[str],
    vertices: Iterable[tuple],
    edges: Iterable[tuple],
    root: tuple,
    info: dict | None = None,
) -> LabelledGraph:
    """Finite graph from explicit edges ``(x, y, generator_index)``.

    Inverse edges and self-loops are implicit. Malformed input (two edges of
    one letter leaving a vertex, say) is accepted here and reported by
    :func:`validate`.
    """
    verts = sorted(set(vertices))
    k = len(names)
    out_edges = {i: {} for i in range(1, k + 1)}
    in_edges = {i: {} for i in range(1, k + 1)}
    for x, y, i in edges:
        out_edges[i].setdefault(x, []).append(y)
        in_edges[i].setdefault(y, []).append(x)

    def fwd(i):
        return lambda v: out_edges[i].get(v, [v])[0]

    def bwd(i):
        return lambda v: in_edges[i].get(v, [v])[0]

    return LabelledGraph(
        names,
        [fwd(i) for i in range(1, k + 1)],
        [bwd(i) for i in range(1, k + 1)],
        root,
        vertices=verts,
        info=dict(info or {"construction": "edges"}),
        edge_lists={"out": out_edges, "in": in_edges},
    )


def relabel(graph: LabelledGraph, to_new: Callable, to_old: Callable, root=None, window: Window | None = None,
            info: dict | None = None) -> LabelledGraph:
    """Same graph with vertices renamed through a bijection."""
    fwd = [lambda v, f=f: to_new(f(to_old(v))) for f in graph.forward]
    bwd = [lambda v, f=f: to_new(f(to_old(v))) for f in graph.backward]
    verts = [to_new(v) for v in graph.vertices] if graph.vertices is not None else None
    if verts is None and window is None:
        old = graph.window
        window = Window(contains=lambda v: _safe_contains(old, to_old, v),
                        vertex_list=lambda: sorted(to_new(v) for v in old.vertices()), label=old.label)
    return LabelledGraph(graph.names, fwd, bwd, to_new(graph.root) if root is None else root,
                         vertices=verts, window=window, info=info if info is not None else dict(graph.info))


def _safe_contains(window, to_old, v):
    try:
        return window.contains(to_old(v))
    except (KeyError, ValueError):
        return False


def with_names(graph: LabelledGraph, names: Sequence[str]) -> LabelledGraph:
    """Copy of ``graph`` with new letter names."""
    g = LabelledGraph(names, graph.forward, graph.backward, graph.root,
                      vertices=graph.vertices, window=graph.window, info=graph.info,
                      edge_lists=graph.edge_lists)
    return g


# ---------------------------------------------------------------------------
# balls and validation


@dataclass
class BallEnumeration:
    center: tuple
    radius: int
    vertices: list  # sorted by (distance, canonical id)
    distance: dict = field(repr=False)
    volumes: list = field(default_factory=list)  # volumes[t] = |B(center, t)|

    def volume(self, t: int) -> int:
        if t < 0:
            return 0
        if t > self.radius:
            raise ValueError(f"ball only known up to radius {self.radius}")
        return self.volumes[t]


def enumerate_ball(graph: LabelledGraph, center: tuple, r: int) -> BallEnumeration:
    """Exact BFS ball of radius ``r``; raises WindowOverflow if the window is too small."""
    if r < 0:
        raise ValueError("radius must be >= 0")
    if not graph.contains(center):
        raise WindowOverflow(f"center {vertex_str(center)} outside the window")
    letters = graph.letters()
    dist = {center: 0}
    frontier = [center]
    for t in range(1, r + 1):
        nxt = set()
        for v in frontier:
            for l in letters:
                w = letter_action(graph, v, l)
                if w not in dist:
                    nxt.add(w)
        for w in nxt:
            dist[w] = t
        frontier = sorted(nxt)
    verts = sorted(dist, key=lambda v: (dist[v], v))
    counts = [0] * (r + 1)
    for v in verts:
        counts[dist[v]] += 1
    volumes = list(itertools.accumulate(counts))
    return BallEnumeration(center, r, verts, dist, volumes)


def graph_distances(graph: LabelledGraph, sources: Iterable[tuple], r: int) -> dict:
    """Multi-source BFS distances up to ``r``."""
    dist = {}
    dq = deque()
    for s in sources:
        if s not in dist:
            dist[s] = 0
            dq.append(s)
    letters = graph.letters()
    while dq:
        v = dq.popleft()
        if dist[v] == r:
            continue
        for l in letters:
            w = letter_action(graph, v, l)
            if w not in dist:
                dist[w] = dist[v] + 1
                dq.append(w)
    return dist


def validate(graph: LabelledGraph, window: BallEnumeration | Iterable[tuple] | None = None) -> list:
    """List of violations on the window interior; empty means valid.

    Checks that every letter acts injectively, that each inverse letter undoes
    its letter, and that each vertex has all 2k letter slots (with implicit
    self-loops).
    """
    if window is None:
        verts = graph.window_vertices()
    elif isinstance(window, BallEnumeration):
        verts = list(window.vertices)
    else:
        verts = sorted(window)
    problems = []
    if graph.edge_lists is not None:
        for i in range(1, graph.k + 1):
            for x, ys in sorted(graph.edge_lists["out"][i].items()):
                if len(ys) > 1:
                    problems.append(f"non-injective action: letter {graph.names[i - 1]} has {len(ys)} edges out of {vertex_str(x)}")
            for y, xs in sorted(graph.edge_lists["in"][i].items()):
                if len(xs) > 1:
                    problems.append(f"non-injective action: letter {graph.names[i - 1]} has {len(xs)} edges into {vertex_str(y)}")
    letters = graph.letters()
    for l in letters:
        images = {}
        for v in verts:
            try:
                w = letter_action(graph, v, l)
            except WindowOverflow:
                continue  # boundary shell, not interior
            if w in images and images[w] != v:
                problems.append(
                    f"non-injective action: {graph.letter_name(l)} sends {vertex_str(images[w])} and {vertex_str(v)} to {vertex_str(w)}"
                )
            images[w] = v
            try:
                back = letter_action(graph, w, l.inverse())
            except WindowOverflow:
                problems.append(f"inverse undefined: {graph.letter_name(l.inverse())} at {vertex_str(w)}")
                continue
            if back != v:
                problems.append(
                    f"inverse mismatch: {graph.letter_name(l)} then its inverse sends {vertex_str(v)} to {vertex_str(back)}"
                )
    # degree: 2k letter slots everywhere (implicit loops fill the gaps)
    for v in verts:
        slots = 0
        for l in letters:
            try:
                graph.raw_action(v, l)
                slots += 1
            except Exception:  # noqa: BLE001 - reported as a degree defect
                pass
        if slots != 2 * graph.k:
            problems.append(f"degree defect at {vertex_str(v)}: {slots} of {2 * graph.k} letter slots")
    return problems


def degree(graph: LabelledGraph) -> int:
    return 2 * graph.k
