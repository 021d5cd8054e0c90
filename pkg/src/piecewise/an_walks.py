"""Random three-cycle walks on small alternating groups and word-length comparison."""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Sequence

import numpy as np

from .labelled_graph import ROOT, STAR, Letter, letter_action, vertex_str, word_inverse
from .perm_engine import FinPerm
from .profile_engine import ProfileTable, dirichlet_form, enumerate_elements, lambda_profile
from .test_functions import star_transposition_word
from .walk_engine import Measure

MAX_N = 8


class AlternatingModel:
    """``A_N`` as dense permutation tuples with the uniform three-cycle measure."""

    def __init__(self, N: int):
        if not (3 <= N <= MAX_N):
            raise ValueError(f"N must lie in [3, {MAX_N}]")
        self.N = N
        self.identity = tuple(range(N))
        els = [p for p in permutations(range(N)) if _even(p)]
        self.elements = els  # lexicographic order
        self.index = {p: i for i, p in enumerate(els)}
        cycles = []
        for x, y, z in combinations(range(N), 3):
            for c in ((x, y, z), (x, z, y)):
                p = list(range(N))
                p[c[0]], p[c[1]], p[c[2]] = c[1], c[2], c[0]
                cycles.append(tuple(p))
        self.cycles = cycles
        w = 1.0 / len(cycles)
        self.measure = Measure(self, {c: w for c in cycles}, 0.0, True, f"mu_{N}")
        self._steps = None

    # group adaptor
    def mul(self, a, b):
        return tuple(a[i] for i in b)

    def inv(self, a):
        out = [0] * len(a)
        for i, x in enumerate(a):
            out[x] = i
        return tuple(out)

    def key(self, a):
        return a

    def encode(self, a):
        return "".join(map(str, a))

    def order(self) -> int:
        return len(self.elements)

    def step_table(self) -> np.ndarray:
        """``table[s, i]`` = index of ``c_s^-1 g_i``; pulling back along it applies one step."""
        if self._steps is None:
            rows = []
            for c in self.cycles:
                ci = self.inv(c)
                rows.append([self.index[self.mul(ci, g)] for g in self.elements])
            self._steps = np.array(rows, dtype=np.int64)
        return self._steps


def _even(p) -> bool:
    seen, parity = set(), 0
    for i in range(len(p)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity == 0


@dataclass
class MixingSeries:
    N: int
    values: list  # mu^(t)(id) for t = 0..t_max
    limit: float
    crossing: int | None  # first t with |(N!/2) mu^(t)(id) - 1| <= 1/2
    reference_time: float  # (2/3) N log N

    def relative_error(self, t: int) -> float:
        return abs(self.values[t] / self.limit - 1.0)

    def rows(self):
        return [(t, v, v / self.limit) for t, v in enumerate(self.values)]


def exact_mixing_series(model: AlternatingModel, t_max: int) -> MixingSeries:
    """Exact ``mu_N^(t)(id)`` by dense convolution (row order fixed, so results are reproducible)."""
    table = model.step_table()
    n = model.order()
    p = np.zeros(n)
    id_idx = model.index[model.identity]
    p[id_idx] = 1.0
    w = 1.0 / len(model.cycles)
    vals = [1.0]
    for _ in range(t_max):
        new = np.zeros(n)
        for row in table:
            new += p[row]
        p = new * w
        vals.append(float(p[id_idx]))
    limit = 1.0 / n
    crossing = next((t for t, v in enumerate(vals) if abs(v / limit - 1.0) <= 0.5), None)
    return MixingSeries(model.N, vals, limit, crossing, 2.0 / 3.0 * model.N * math.log(model.N))


def an_dirichlet_profile(model: AlternatingModel, v_max: int, p: int = 2) -> ProfileTable:
    """Exhaustive profile over connected sets up to ``v_max`` elements."""
    ball = enumerate_elements(model.measure, v_max)
    return lambda_profile(model.measure, ball, v_max, p=p)


def floor_check(table: ProfileTable, N: int, eps: float = 0.5) -> list:
    """Exact points with ``v < (N!)^eps`` whose value falls below ``1 - eps``."""
    cap = math.exp(eps * math.lgamma(N + 1))
    return [(pt.v, pt.value) for pt in table.points if pt.exact and pt.v < cap and pt.value < 1 - eps - 1e-12]


# ---------------------------------------------------------------------------
# three-cycle synthesis and comparison


class SynthesisUnavailable(ValueError):
    pass


def _path_words(graph, letters, radius: int) -> dict:
    """Shortest words ``w`` with ``w(o) = x`` for ``x`` within ``radius`` of the root."""
    words = {graph.root: []}
    queue = deque([graph.root])
    while queue:
        x = queue.popleft()
        if len(words[x]) >= radius:
            continue
        for l in letters:
            y = letter_action(graph, x, l)
            if y not in words:
                words[y] = [l] + words[x]
                queue.append(y)
    return words


class CycleSynthesizer:
    """Words for transpositions and three-cycles in pocket and star extensions."""

    def __init__(self, pgroup, radius: int):
        self.pgroup = pgroup
        graph = pgroup.graph
        self.graph = graph
        kind = graph.info.get("construction")
        if kind not in ("pocket", "star"):
            raise SynthesisUnavailable(f"no three-cycle synthesis for {kind!r} graphs")
        self.kind = kind
        if kind == "pocket":
            self.tau = graph.letter(graph.names[-1])
            base_letters = [l for l in graph.letters() if l.generator_index != self.tau.generator_index]
            self.hub = STAR
        else:
            kgen = len(graph.info["base"]["generators"])
            base_letters = [l for l in graph.letters() if l.generator_index <= kgen]
            self.hub = graph.root
        self.paths = _path_words(graph, base_letters, radius)
        self.radius = radius
        self.distance = self._distances()

    def _distances(self):
        out = {x: len(w) for x, w in self.paths.items()}
        if self.kind == "pocket":
            out[STAR] = 1
        return out

    def points(self) -> list:
        return sorted(self.distance)

    def hub_transposition(self, x) -> list:
        """Word for the transposition of the hub point with ``x``."""
        if x == self.hub:
            raise ValueError("degenerate transposition")
        if self.kind == "pocket":
            w = self.paths[x]
            return list(w) + [self.tau] + list(word_inverse(w))
        return star_transposition_word(self.graph, self.paths[x], "derived")

    def transposition(self, a, b) -> list:
        if a == b:
            raise ValueError("degenerate transposition")
        if self.hub in (a, b):
            return self.hub_transposition(b if a == self.hub else a)
        ta = self.hub_transposition(a)
        return ta + self.hub_transposition(b) + ta

    def three_cycle(self, x, y, z) -> list:
        """Word for ``x -> y -> z -> x``, as ``(x z)(x y)`` with the right factor first."""
        if len({x, y, z}) < 3:
            raise ValueError("degenerate three-cycle")
        return self.transposition(x, z) + self.transposition(x, y)

    def check(self, word, perm: FinPerm) -> bool:
        return self.pgroup.word(word) == self.pgroup.from_perm(perm)


@dataclass
class ComparisonReport:
    radius: int
    points: int
    cycles: int
    max_word: int
    D: float
    words_ok: bool
    samples: int
    worst_ratio: float  # max E_mu / E_u over sampled functions
    rigorous_constant: float  # max word length times |S|
    rigorous_ok: bool
    stated_constant: float  # D * r
    stated_ok: bool
    notes: list = field(default_factory=list)


def cycle_comparison(pgroup, r: int, samples: int = 20, seed: int = 0, support_radius: int = 2) -> ComparisonReport:
    """Synthesize every three-cycle of the radius-``r`` ball and compare Dirichlet forms.

    Path comparison gives ``E_mu(f) <= L |S| E_u(f)`` for the p=1 forms, where
    ``L`` is the longest synthesized word and ``u`` is uniform on the ``|S|``
    letters. The looser ``D r`` constant is reported alongside.
    """
    syn = CycleSynthesizer(pgroup, r)
    pts = [x for x in syn.points() if syn.distance[x] <= r]
    graph = pgroup.graph
    longest, D, ok = 0, 0.0, True
    cyc_elems = []
    for x, y, z in combinations(pts, 3):
        for c in ((x, y, z), (x, z, y)):
            w = syn.three_cycle(*c)
            perm = FinPerm.from_cycles(c)
            if not syn.check(w, perm):
                ok = False
            longest = max(longest, len(w))
            far = max(syn.distance[p] for p in c)
            D = max(D, len(w) / far)
            cyc_elems.append(pgroup.from_perm(perm))
    wmu = 1.0 / len(cyc_elems)
    mu = Measure(pgroup, {g: wmu for g in cyc_elems}, 0.0, True, "mu_ball")
    letters = list(dict.fromkeys(pgroup.letter(l) for l in graph.letters()))
    u = Measure(pgroup, {g: 1.0 / len(letters) for g in letters}, 0.0, True, "u")
    step = Measure(pgroup, {g: 1.0 / len(letters) for g in letters}, 0.0, True)
    domain = enumerate_elements(step, support_radius).elements
    rng = random.Random(seed)
    worst = 0.0
    rig_c = longest * len(letters)
    st_c = D * r
    rig_ok = st_ok = True
    for _ in range(samples):
        size = rng.randint(1, len(domain))
        chosen = rng.sample(domain, size)
        f = {g: rng.random() for g in chosen}
        e_mu = dirichlet_form(mu, f, 1)
        e_u = dirichlet_form(u, f, 1)
        if e_u > 0:
            worst = max(worst, e_mu / e_u)
        if e_mu > rig_c * e_u + 1e-12:
            rig_ok = False
        if e_mu > st_c * e_u + 1e-12:
            st_ok = False
    return ComparisonReport(r, len(pts), len(cyc_elems), longest, D, ok, samples, worst, rig_c, rig_ok, st_c, st_ok)
