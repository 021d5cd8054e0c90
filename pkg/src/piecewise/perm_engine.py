"""Exact arithmetic in groups of piecewise translations.

An element is stored as ``(t, tau)``: a translation part ``t`` (one entry per
infinite factor, read off far away from the root) and a permutation ``tau``
of finite support. It acts by ``x -> T_t(tau(x))``. Products apply the right
factor first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .labelled_graph import (
    GLUED_TAG,
    RAY_TAG,
    ROOT,
    STAR,
    IntegerLattice,
    LabelledGraph,
    Letter,
    RayPoint,
    Glued,
    WindowOverflow,
    act_word,
    graph_distances,
    letter_action,
    vertex_str,
)


class UnstableFarField(RuntimeError):
    """Probe points disagree, so the translation part cannot be certified."""


class NormalFormUnavailable(ValueError):
    """No translation model is known for this graph."""


# ---------------------------------------------------------------------------
# finite-support permutations


class FinPerm:
    """Permutation moving finitely many vertices; fixed points are not stored."""

    __slots__ = ("_map", "_items", "_hash")

    def __init__(self, mapping: dict | Iterable = ()):
        m = {x: y for x, y in dict(mapping).items() if x != y}
        if set(m.values()) != set(m):
            raise ValueError("not a bijection on its support")
        self._map = m
        self._items = tuple(sorted(m.items()))
        self._hash = hash(self._items)

    @classmethod
    def identity(cls) -> "FinPerm":
        return _IDENTITY

    @classmethod
    def from_cycles(cls, *cycles: Sequence) -> "FinPerm":
        m = {}
        for c in cycles:
            c = list(c)
            if len(set(c)) != len(c):
                raise ValueError("repeated point in cycle")
            for i, x in enumerate(c):
                if x in m:
                    raise ValueError("cycles are not disjoint")
                m[x] = c[(i + 1) % len(c)]
        return cls(m)

    @classmethod
    def transposition(cls, x, y) -> "FinPerm":
        return cls.from_cycles((x, y))

    def __call__(self, x):
        return self._map.get(x, x)

    @property
    def support(self) -> tuple:
        return tuple(x for x, _ in self._items)

    def items(self) -> tuple:
        return self._items

    def __len__(self):
        return len(self._map)

    def is_identity(self) -> bool:
        return not self._map

    def __mul__(self, other: "FinPerm") -> "FinPerm":
        """Composition ``self o other`` (``other`` acts first)."""
        keys = set(self._map) | set(other._map)
        return FinPerm({x: self(other(x)) for x in keys})

    def inverse(self) -> "FinPerm":
        return FinPerm({y: x for x, y in self._map.items()})

    def __eq__(self, other):
        return isinstance(other, FinPerm) and self._items == other._items

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self._items < other._items

    def cycles(self) -> list:
        """Disjoint cycles, each starting at its smallest point, sorted."""
        seen, out = set(), []
        for x, _ in self._items:
            if x in seen:
                continue
            cyc = [x]
            seen.add(x)
            y = self._map[x]
            while y != x:
                cyc.append(y)
                seen.add(y)
                y = self._map[y]
            out.append(tuple(cyc))
        return out

    def parity(self) -> int:
        """0 for even, 1 for odd."""
        return sum(len(c) - 1 for c in self.cycles()) % 2

    def sign(self) -> int:
        return -1 if self.parity() else 1

    def encode(self) -> str:
        if not self._map:
            return "()"
        return "".join("(" + " ".join(vertex_str(v) for v in c) + ")" for c in self.cycles())

    def __repr__(self):
        return f"FinPerm{self.encode()}"


_IDENTITY = FinPerm()


def parity(p: FinPerm) -> str:
    return "odd" if p.parity() else "even"


# ---------------------------------------------------------------------------
# translation models


class TranslationModel:
    """How the translation part of an element acts and is read off."""

    factors = 0
    zero: tuple = ()

    def add(self, t, u):
        raise NotImplementedError

    def neg(self, t):
        raise NotImplementedError

    def apply(self, t, x):
        raise NotImplementedError

    def apply_inv(self, t, x):
        raise NotImplementedError

    def cocycle_support(self, t, u) -> set:
        """Finite set outside which ``T_{t+u}^{-1} T_t T_u`` is the identity."""
        raise NotImplementedError

    def probe(self, act: Callable, length: int):
        """Read ``t`` from the action of a word of the given length."""
        raise NotImplementedError

    def phi(self, t) -> tuple:
        raise NotImplementedError

    def norm(self, t) -> int:
        raise NotImplementedError


class NoTranslation(TranslationModel):
    """Finite universes: every element is a plain permutation."""

    def add(self, t, u):
        return ()

    def neg(self, t):
        return ()

    def apply(self, t, x):
        return x

    apply_inv = apply

    def cocycle_support(self, t, u):
        return set()

    def probe(self, act, length):
        return ()

    def phi(self, t):
        raise ValueError("no translation quotient on a finite universe")

    def norm(self, t):
        return 0


class LeftTranslationModel(TranslationModel):
    """Left multiplication on the base vertices of a Cayley graph (extra vertices fixed)."""

    factors = 1

    def __init__(self, base: IntegerLattice):
        self.base = base
        self.zero = (base.identity,)

    def _is_base(self, x):
        try:
            self.base.element(x)
            return True
        except KeyError:
            return False

    def add(self, t, u):
        return (self.base.mul(t[0], u[0]),)

    def neg(self, t):
        return (self.base.inv(t[0]),)

    def apply(self, t, x):
        if not self._is_base(x):
            return x
        return self.base.vertex(self.base.mul(t[0], self.base.element(x)))

    def apply_inv(self, t, x):
        return self.apply(self.neg(t), x)

    def cocycle_support(self, t, u):
        return set()

    def probe(self, act, length):
        b = self.base
        reading = None
        d = 2 * length + 2
        for sign in (1, -1):
            far = b.far_point(sign * d)
            img = act(b.vertex(far))
            try:
                g = b.mul(b.element(img), b.inv(far))
            except KeyError:
                raise UnstableFarField(f"probe {vertex_str(b.vertex(far))} left the base graph")
            if reading is not None and g != reading:
                raise UnstableFarField("probes disagree on the translation")
            reading = g
        return (reading,)

    def phi(self, t):
        return tuple(t)

    def norm(self, t):
        return self.base.norm(t[0])


class RootedModel(TranslationModel):
    """Rooted gluing: one translation per infinite Cayley component.

    ``T_t`` is the ordered product of the component translations, the first
    component's translation acting last.
    """

    def __init__(self, bases: dict):
        # bases: component index -> IntegerLattice, for the infinite components
        self.components = sorted(bases)
        self.bases = bases
        self.factors = len(self.components)
        self.zero = tuple(bases[c].identity for c in self.components)

    def add(self, t, u):
        return tuple(self.bases[c].mul(a, b) for c, a, b in zip(self.components, t, u))

    def neg(self, t):
        return tuple(self.bases[c].inv(a) for c, a in zip(self.components, t))

    def _shift(self, c, n, x):
        b = self.bases[c]
        if n == b.identity:
            return x
        if x == ROOT:
            pos = b.identity
        elif x[0] == GLUED_TAG and x[1] == c:
            pos = b.element(x[2])
        else:
            return x
        new = b.mul(n, pos)
        return ROOT if new == b.identity else Glued(c, b.vertex(new))

    def apply(self, t, x):
        for c, n in reversed(list(zip(self.components, t))):
            x = self._shift(c, n, x)
        return x

    def apply_inv(self, t, x):
        for c, n in zip(self.components, t):
            x = self._shift(c, self.bases[c].inv(n), x)
        return x

    def cocycle_support(self, t, u):
        if self.factors == 1:
            # shifts of a single copy compose exactly
            return set()
        r = self.norm(t) + self.norm(u) + 1
        out = {ROOT}
        for c in self.components:
            b = self.bases[c]
            out.update(Glued(c, b.vertex(g)) for g in b.ball(r) if g != b.identity)
        return out

    def probe(self, act, length):
        d = 2 * length + 2
        out = []
        for c in self.components:
            b = self.bases[c]
            reading = None
            for sign in (1, -1):
                far = b.far_point(sign * d)
                img = act(Glued(c, b.vertex(far)))
                if img[0] != GLUED_TAG or img[1] != c:
                    raise UnstableFarField(f"probe in component {c} left its copy")
                g = b.mul(b.element(img[2]), b.inv(far))
                if reading is not None and g != reading:
                    raise UnstableFarField("probes disagree on the translation")
                reading = g
            out.append(reading)
        return tuple(out)

    def phi(self, t):
        return tuple(t)

    def norm(self, t):
        return sum(self.bases[c].norm(a) for c, a in zip(self.components, t))


def houghton_power(i: int, j: int, n: int, x):
    """``h_{i,j}^n`` applied to a vertex of Y_k."""
    if x == ROOT:
        p = 0
    elif x[0] == RAY_TAG and x[1] == i:
        p = -x[2]
    elif x[0] == RAY_TAG and x[1] == j:
        p = x[2]
    else:
        return x
    p += n
    if p == 0:
        return ROOT
    return RayPoint(j, p) if p > 0 else RayPoint(i, -p)


class HoughtonModel(TranslationModel):
    """Translations ``T_z = h_{1,k}^{z_1} ... h_{k-1,k}^{z_{k-1}}`` on the k-ray star.

    The last ray is the excluded one; its eventual shift is ``sum(z)``.
    """

    def __init__(self, k: int):
        self.k = k
        self.factors = k - 1
        self.zero = (0,) * (k - 1)

    def add(self, t, u):
        return tuple(a + b for a, b in zip(t, u))

    def neg(self, t):
        return tuple(-a for a in t)

    def apply(self, t, x):
        for i in range(self.k - 1, 0, -1):
            if t[i - 1]:
                x = houghton_power(i, self.k, t[i - 1], x)
        return x

    def apply_inv(self, t, x):
        for i in range(1, self.k):
            if t[i - 1]:
                x = houghton_power(i, self.k, -t[i - 1], x)
        return x

    def star(self, radius: int) -> set:
        return {ROOT} | {RayPoint(i, m) for i in range(1, self.k + 1) for m in range(1, radius + 1)}

    def cocycle_support(self, t, u):
        return self.star(self.norm(t) + self.norm(u) + 1)

    def probe(self, act, length):
        d = 2 * length + 2
        shifts = []
        for i in range(1, self.k + 1):
            readings = set()
            for depth in (d, d + 1):
                img = act(RayPoint(i, depth))
                if img[0] != RAY_TAG or img[1] != i:
                    raise UnstableFarField(f"far point on ray {i} changed ray")
                readings.add(img[2] - depth)
            if len(readings) != 1:
                raise UnstableFarField(f"ray {i} is not translated uniformly")
            shifts.append(readings.pop())
        z = tuple(-m for m in shifts[:-1])
        if shifts[-1] != sum(z):
            raise UnstableFarField("ray shifts do not sum to zero")
        return z

    def phi(self, t):
        return tuple(-a for a in t) + (sum(t),)

    def norm(self, t):
        return sum(abs(a) for a in t)


def _component_lattice(info: dict):
    if info.get("construction") != "cayley":
        return None
    base = info["base"]
    if isinstance(base, IntegerLattice):
        return base
    return None


def model_for(graph: LabelledGraph) -> TranslationModel:
    """Pick the translation model matching how ``graph`` was constructed."""
    if graph.finite:
        return NoTranslation()
    info = graph.info
    kind = info.get("construction")
    if kind == "houghton":
        return HoughtonModel(info["k"])
    if kind == "cayley":
        return LeftTranslationModel(info["base"])
    if kind in ("pocket", "star"):
        base = info["base"]
        lat = _component_lattice(base)
        if lat is not None:
            return LeftTranslationModel(lat)
        if kind == "pocket" and base.get("construction") == "rooted":
            return _rooted_model(base)
        raise NormalFormUnavailable(f"no normal form for a {kind} extension of {base.get('construction')}")
    if kind == "rooted":
        return _rooted_model(info)
    raise NormalFormUnavailable(f"no normal form for construction {kind!r}")


def _rooted_model(info):
    bases = {}
    for c, comp in enumerate(info["components"]):
        lat = _component_lattice(comp)
        if lat is not None:
            bases[c] = lat
        elif comp.get("construction") != "cayley":
            raise NormalFormUnavailable("rooted gluing of non-Cayley components has no normal form")
    return RootedModel(bases)


def permutation_class(graph: LabelledGraph) -> str:
    """``"S0"`` when odd finite-support permutations occur, else ``"A0"``.

    Rooted gluings of Cayley graphs only reach even permutations unless some
    finite component has even order; pocket/star/Houghton constructions
    contain transpositions.
    """
    info = graph.info
    kind = info.get("construction")
    if kind == "rooted":
        for comp in info["components"]:
            if comp.get("construction") == "cayley":
                base = comp["base"]
                if base.finite and len(base.elements()) % 2 == 0:
                    return "S0"
        return "A0"
    return "S0"


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True, order=True)
class GroupElement:
    translations: tuple
    finperm: FinPerm

    def encode(self) -> str:
        t = ",".join(_enc_t(a) for a in self.translations)
        return f"[{t}]{self.finperm.encode()}"

    def sort_key(self):
        return (self.translations, self.finperm.items())


def _enc_t(a):
    if isinstance(a, tuple):
        return "(" + ",".join(map(str, a)) + ")"
    return str(a)


@dataclass(frozen=True)
class WordAction:
    """Result of evaluating a word directly on a window."""

    translations: tuple
    residue: FinPerm
    region: tuple


def _region(graph: LabelledGraph, length: int) -> list:
    if graph.finite:
        return list(graph.vertices)
    sources = [graph.root] + ([STAR] if graph.contains(STAR) else [])
    return sorted(graph_distances(graph, sources, 2 * length + 2))


def evaluate_word(graph: LabelledGraph, word: Sequence[Letter], model: TranslationModel | None = None) -> WordAction:
    """Act with ``word`` on a window around the root and split off the translation part.

    The translation is read from probe points at distance ``2L+2``; the residue
    is ``T_t^{-1}`` composed with the word action on the ball of radius
    ``2L+2``. The residue must be the identity on the outer shell of that ball,
    otherwise the far field is not certified.
    """
    model = model or model_for(graph)
    L = len(word)
    t = model.probe(lambda x: act_word(graph, x, word), L)
    region = _region(graph, L)
    if graph.finite:
        shell = []
    else:
        dist = graph_distances(graph, [graph.root] + ([STAR] if graph.contains(STAR) else []), 2 * L + 2)
        shell = [v for v in region if dist[v] == 2 * L + 2]
    m = {}
    for x in region:
        y = model.apply_inv(t, act_word(graph, x, word))
        if y != x:
            m[x] = y
    for x in shell:
        if x in m:
            raise UnstableFarField(f"residue moves shell point {vertex_str(x)}")
    try:
        residue = FinPerm(m)
    except ValueError:
        raise UnstableFarField("residue is not a permutation of the window")
    return WordAction(t, residue, tuple(region))


def normal_form(graph: LabelledGraph, word: Sequence[Letter], model: TranslationModel | None = None) -> GroupElement:
    wa = evaluate_word(graph, word, model)
    return GroupElement(wa.translations, wa.residue)


class PiecewiseGroup:
    """Group generated by the letters of a labelled graph, with exact normal forms."""

    def __init__(self, graph: LabelledGraph, model: TranslationModel | None = None):
        self.graph = graph
        self.model = model or model_for(graph)
        self.identity = GroupElement(self.model.zero, FinPerm.identity())
        self._letters = {}
        for l in graph.letters():
            self._letters[l] = normal_form(graph, (l,), self.model)
        self.parity_class = permutation_class(graph)

    # -- basic operations
    def letter(self, l: Letter) -> GroupElement:
        return self._letters[l]

    def generator(self, name: str) -> GroupElement:
        return self._letters[self.graph.letter(name)]

    def act(self, g: GroupElement, x):
        return self.model.apply(g.translations, g.finperm(x))

    def act_inv(self, g: GroupElement, x):
        return g.finperm.inverse()(self.model.apply_inv(g.translations, x))

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        """``a * b`` with ``b`` acting first."""
        m = self.model
        t = m.add(a.translations, b.translations)
        cand = set(b.finperm.support)
        cand.update(m.apply_inv(b.translations, y) for y in a.finperm.support)
        cand.update(m.cocycle_support(a.translations, b.translations))
        out = {}
        for x in cand:
            y = m.apply_inv(t, self.act(a, self.act(b, x)))
            if y != x:
                out[x] = y
        return GroupElement(t, FinPerm(out))

    def inv(self, g: GroupElement) -> GroupElement:
        m = self.model
        t = g.translations
        nt = m.neg(t)
        tinv = g.finperm.inverse()
        cand = {m.apply(t, x) for x in g.finperm.support}
        cand.update(m.cocycle_support(t, nt))
        out = {}
        for y in cand:
            z = m.apply_inv(nt, tinv(m.apply_inv(t, y)))
            if z != y:
                out[y] = z
        return GroupElement(nt, FinPerm(out))

    def product(self, *elements: GroupElement) -> GroupElement:
        out = self.identity
        for e in elements:
            out = self.mul(out, e)
        return out

    def word(self, word: Sequence[Letter]) -> GroupElement:
        out = self.identity
        for l in word:
            out = self.mul(out, self._letters[l])
        return out

    def commutator(self, a: GroupElement, b: GroupElement) -> GroupElement:
        """``[a, b] = a b a^-1 b^-1``."""
        return self.product(a, b, self.inv(a), self.inv(b))

    def conjugate(self, a: GroupElement, b: GroupElement) -> GroupElement:
        """``a b a^-1``."""
        return self.product(a, b, self.inv(a))

    def from_perm(self, p: FinPerm) -> GroupElement:
        return GroupElement(self.model.zero, p)

    def translation(self, t) -> GroupElement:
        return GroupElement(tuple(t), FinPerm.identity())

    def phi(self, g: GroupElement) -> tuple:
        return self.model.phi(g.translations)

    def encode(self, g: GroupElement) -> str:
        return g.encode()

    def window_action(self, g: GroupElement, region: Iterable) -> tuple:
        return tuple(self.act(g, x) for x in region)

    def key(self, g: GroupElement):
        return g.sort_key()


def houghton_element(hgroup: PiecewiseGroup, i: int, j: int, n: int) -> GroupElement:
    """Normal form of ``h_{i,j}^n``, whether or not ``h_{i,j}`` is a letter."""
    model = hgroup.model
    if not isinstance(model, HoughtonModel):
        raise ValueError("not a Houghton group")
    k = model.k
    shift = [0] * k
    shift[i - 1] -= n
    shift[j - 1] += n
    z = tuple(-m for m in shift[:-1])
    out = {}
    for x in model.star(2 * abs(n) + 2):
        y = model.apply_inv(z, houghton_power(i, j, n, x))
        if y != x:
            out[x] = y
    return GroupElement(z, FinPerm(out))
