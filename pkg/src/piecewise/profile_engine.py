"""Dirichlet forms, isoperimetric and spectral profiles, and satisfactory-graph diagnostics."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .perm_engine import FinPerm, GroupElement
from .walk_engine import Measure, _encode, _key

DENSE_LIMIT = 2000
DEFAULT_BUDGET = 10 ** 7
TIE_TOL = 1e-12


# ---------------------------------------------------------------------------
# forms


def dirichlet_form(m: Measure, f: dict, p: int = 2):
    """``1/2 sum_{x,y} |f(yx) - f(x)|^p m(y)`` for finitely supported ``f``.

    Exact when ``f`` and the atoms are :class:`fractions.Fraction`.
    """
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    group = m.group
    atoms = m.sorted_atoms()
    supp = [x for x, v in f.items() if v != 0]
    xs = set(supp)
    for y, _ in atoms:
        yi = group.inv(y)
        xs.update(group.mul(yi, z) for z in supp)
    terms = []
    for x in sorted(xs, key=lambda g: _key(group, g)):
        fx = f.get(x, 0)
        for y, w in atoms:
            d = f.get(group.mul(y, x), 0) - fx
            if d:
                terms.append((abs(d) if p == 1 else d * d) * w)
    if terms and all(isinstance(t, Fraction) for t in terms):
        return sum(terms, Fraction(0)) / 2
    return math.fsum(terms) / 2


def l2_norm_sq(f: dict):
    vals = [v * v for v in f.values()]
    if vals and all(isinstance(v, Fraction) for v in vals):
        return sum(vals, Fraction(0))
    return math.fsum(vals)


def boundary_measure(m: Measure, omega: Iterable) -> float:
    """``sum_{x in omega} sum_y m(y) 1{yx not in omega}`` (left convention)."""
    group = m.group
    om = set(omega)
    atoms = m.sorted_atoms()
    terms = []
    for x in sorted(om, key=lambda g: _key(group, g)):
        for y, w in atoms:
            if group.mul(y, x) not in om:
                terms.append(w)
    return math.fsum(terms)


def boundary_measure_right(m: Measure, omega: Iterable) -> float:
    """Same with right steps ``xy``."""
    group = m.group
    om = set(omega)
    terms = []
    for x in sorted(om, key=lambda g: _key(group, g)):
        for y, w in m.sorted_atoms():
            if group.mul(x, y) not in om:
                terms.append(w)
    return math.fsum(terms)


def restricted_operator(m: Measure, omega: Sequence, right: bool = False):
    """Matrix of ``mass I - P`` on ``omega`` with ``P(x, yx) = m(y)``."""
    group = m.group
    om = list(omega)
    pos = {x: i for i, x in enumerate(om)}
    atoms = m.sorted_atoms()
    mass = math.fsum(w for _, w in atoms)
    n = len(om)
    rows, cols, vals = [], [], []
    for i, x in enumerate(om):
        for y, w in atoms:
            z = group.mul(x, y) if right else group.mul(y, x)
            j = pos.get(z)
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(-w)
    A = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    A = A + scipy.sparse.identity(n) * mass
    return A


def dirichlet_eigenvalue(m: Measure, omega: Iterable, right: bool = False) -> float:
    """Lowest eigenvalue of the Dirichlet form restricted to functions supported in ``omega``."""
    om = sorted(set(omega), key=lambda g: _key(m.group, g))
    if not om:
        raise ValueError("empty set")
    A = restricted_operator(m, om, right)
    if len(om) <= DENSE_LIMIT:
        return float(np.linalg.eigvalsh(A.toarray())[0])
    vals, vecs = scipy.sparse.linalg.eigsh(A, k=1, sigma=0, which="LM", tol=1e-12)
    lam = float(vals[0])
    resid = np.linalg.norm(A @ vecs[:, 0] - lam * vecs[:, 0])
    if resid > 1e-10:
        raise RuntimeError(f"iterative eigensolve residual {resid:.2e} above 1e-10")
    return lam


# ---------------------------------------------------------------------------
# element balls and connected-set sweeps


@dataclass
class ElementBall:
    """Group elements within a step-graph radius of the identity."""

    elements: list
    distance: dict
    radius: int
    complete: bool  # True when the whole (finite) group was reached


def enumerate_elements(m: Measure, radius: int, limit: int = 2_000_000) -> ElementBall:
    group = m.group
    steps = [y for y in m.support() if y != group.identity]
    dist = {group.identity: 0}
    frontier = [group.identity]
    for r in range(1, radius + 1):
        nxt = []
        for x in frontier:
            for y in steps:
                z = group.mul(y, x)
                if z not in dist:
                    dist[z] = r
                    nxt.append(z)
        if len(dist) > limit:
            raise MemoryError("element ball exceeds the enumeration limit")
        frontier = sorted(nxt, key=lambda g: _key(group, g))
        if not frontier:
            break
    # the ball is the whole group when one more shell adds nothing
    closed = not any(group.mul(y, x) not in dist for x in frontier for y in steps)
    els = sorted(dist, key=lambda g: (dist[g], _key(group, g)))
    return ElementBall(els, dist, radius, closed)


def connected_sets(neighbors: Sequence[Sequence[int]], root: int, max_size: int, budget: int = DEFAULT_BUDGET):
    """Yield every connected vertex set containing ``root`` with at most ``max_size`` vertices.

    Each set is produced exactly once, as a sorted tuple of indices. Stops
    after ``budget`` sets and then raises :class:`BudgetExceeded` on the next
    request.
    """
    count = 0
    stack = [((root,), tuple(sorted(set(neighbors[root]) - {root})), frozenset([root]))]
    while stack:
        sub, ext, excl = stack.pop()
        count += 1
        if count > budget:
            raise BudgetExceeded(f"more than {budget} candidate sets")
        yield tuple(sorted(sub))
        if len(sub) >= max_size:
            continue
        subset = set(sub)
        for i, w in enumerate(ext):
            taken = set(ext[: i + 1])
            rest = set(ext[i + 1:])
            for u in neighbors[w]:
                if u not in subset and u not in excl and u not in taken and u != w:
                    rest.add(u)
            stack.append((sub + (w,), tuple(sorted(rest)), excl | taken))


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class ProfilePoint:
    v: int
    value: float
    witness: str
    exact: bool


@dataclass
class ProfileTable:
    kind: str  # "L1" or "L2"
    points: list
    s_phi: float = 1.0
    notes: list = field(default_factory=list)

    def value(self, v: int) -> float:
        for pt in self.points:
            if pt.v == v:
                return pt.value
        raise KeyError(v)

    def exact_points(self) -> list:
        return [pt for pt in self.points if pt.exact]

    def rows(self):
        return [(pt.v, pt.value, int(pt.exact), pt.witness) for pt in self.points]


def encode_set(group, elements: Iterable) -> str:
    els = sorted(elements, key=lambda g: _key(group, g))
    return "{" + ";".join(_encode(group, g) for g in els) + "}"


def _step_graph(m: Measure, elements: list):
    group = m.group
    index = {g: i for i, g in enumerate(elements)}
    steps = [y for y in m.support() if y != group.identity]
    nbrs = []
    for x in elements:
        out = set()
        for y in steps:
            j = index.get(group.mul(y, x))
            if j is not None:
                out.add(j)
        nbrs.append(sorted(out))
    return index, nbrs


def lambda_profile(m: Measure, ball: ElementBall, v_max: int, p: int = 2, budget: int = DEFAULT_BUDGET,
                   right: bool = False, connected: bool = True, batch: int = 20000) -> ProfileTable:
    """Exhaustive profile over connected sets containing the identity.

    Profiles are invariant under right translation of the set, so fixing the
    identity as a member loses nothing. Points are exact when every connected
    set of that size lies inside ``ball``. With ``connected=False`` all
    subsets of the ball containing the identity are swept instead (small
    cases only).
    """
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    group = m.group
    els = ball.elements
    index, nbrs = _step_graph(m, els)
    root = index[group.identity]
    keys = [_key(group, g) for g in els]
    # canonical order of elements: position in keys-sorted list
    order = sorted(range(len(els)), key=lambda i: keys[i])
    rank = [0] * len(els)
    for r, i in enumerate(order):
        rank[i] = r
    atoms = m.sorted_atoms()
    mass = math.fsum(w for _, w in atoms)
    trans = []  # for each element: list of (target index or -1, weight)
    for x in els:
        row = []
        for y, w in atoms:
            z = group.mul(x, y) if right else group.mul(y, x)
            row.append((index.get(z, -1), w))
        trans.append(row)
    best = {}  # size -> (value, rank-key, set)
    exhausted = True
    if connected:
        gen = connected_sets(nbrs, root, v_max, budget)
    else:
        gen = _all_sets(len(els), root, v_max, budget)
    pending = {}

    def flush(size):
        sets = pending.pop(size, [])
        if not sets:
            return
        if p == 1:
            vals = [_boundary_ratio(s, trans) for s in sets]
        else:
            vals = _batched_eigs(sets, trans, mass)
        for s, val in zip(sets, vals):
            _offer(best, size, float(val), s, rank)

    try:
        for s in gen:
            pending.setdefault(len(s), []).append(s)
            if len(pending[len(s)]) >= batch:
                flush(len(s))
    except BudgetExceeded:
        exhausted = False
    for size in list(pending):
        flush(size)
    points = []
    running = None
    for v in range(1, v_max + 1):
        if v in best:
            cand = best[v]
            if running is None or cand[0] < running[0] - TIE_TOL or (
                abs(cand[0] - running[0]) <= TIE_TOL and cand[1] < running[1]
            ):
                running = cand
        if running is None:
            break
        covered = ball.complete or v <= ball.radius + 1
        exact = exhausted and covered
        witness = encode_set(group, [els[i] for i in running[2]])
        points.append(ProfilePoint(v, running[0], witness, exact))
    table = ProfileTable("L1" if p == 1 else "L2", points, m.mass_off_identity())
    if not exhausted:
        table.notes.append("budget exceeded: points are upper bounds only")
    if ball.complete and len(els) <= v_max:
        table.notes.append("finite group: profile reaches 0 at the full group")
    return table


def _offer(best, size, val, s, rank):
    key = tuple(sorted(rank[i] for i in s))
    cur = best.get(size)
    if cur is None or val < cur[0] - TIE_TOL or (abs(val - cur[0]) <= TIE_TOL and key < cur[1]):
        best[size] = (val, key, s)


def _boundary_ratio(s, trans):
    inside = set(s)
    b = math.fsum(w for i in s for j, w in trans[i] if j not in inside)
    return b / len(s)


def _batched_eigs(sets, trans, mass):
    v = len(sets[0])
    mats = np.zeros((len(sets), v, v))
    for n, s in enumerate(sets):
        pos = {i: a for a, i in enumerate(s)}
        M = mats[n]
        for a, i in enumerate(s):
            M[a, a] += mass
            for j, w in trans[i]:
                b = pos.get(j)
                if b is not None:
                    M[a, b] -= w
    return np.linalg.eigvalsh(mats)[:, 0]


def _all_sets(n, root, v_max, budget):
    from itertools import combinations

    others = [i for i in range(n) if i != root]
    count = 0
    for size in range(0, v_max):
        for c in combinations(others, size):
            count += 1
            if count > budget:
                raise BudgetExceeded(f"more than {budget} candidate sets")
            yield tuple(sorted((root,) + c))


# ---------------------------------------------------------------------------
# inverse profiles


INF = math.inf


@dataclass
class InverseValue:
    value: float  # integer-valued or inf
    range_exceeded: bool = False


def profile_inverse(table: ProfileTable, s: float) -> InverseValue:
    """Smallest tabulated ``v`` with ``Lambda(v) <= s``; inf when the table never gets there."""
    if s >= table.s_phi:
        return InverseValue(1)
    for pt in table.points:
        if pt.value <= s:
            return InverseValue(pt.v)
    return InverseValue(INF, True)


def folner(table: ProfileTable, t: float) -> InverseValue:
    if table.kind != "L1":
        raise ValueError("the Folner function needs an L1 table")
    return profile_inverse(table, 1.0 / t)


@dataclass
class CheegerReport:
    passed: bool
    checked: list
    violations: list


def check_cheeger(t1: ProfileTable, t2: ProfileTable, tol: float = 1e-10) -> CheegerReport:
    """``Lambda_1^2 / 2 <= Lambda_2 <= Lambda_1`` on common exact points."""
    if t1.kind != "L1" or t2.kind != "L2":
        raise ValueError("expected an L1 table then an L2 table")
    l2 = {pt.v: pt for pt in t2.points if pt.exact}
    checked, bad = [], []
    for pt in t1.points:
        if not pt.exact or pt.v not in l2:
            continue
        a, b = pt.value, l2[pt.v].value
        checked.append(pt.v)
        if not (0.5 * a * a <= b + tol and b <= a + tol):
            bad.append((pt.v, a, b))
    return CheegerReport(not bad, checked, bad)


# ---------------------------------------------------------------------------
# satisfactory graphs for the rooted gluing with a small cycle


@dataclass
class SatisfactoryGraph:
    K: list  # sorted FinPerms
    edges: dict  # frozenset{tau, tau'} -> set of (g, eps) labels
    locations: dict  # tau -> set of g with (g, tau) in U
    good_locations: dict  # tau -> set of g with (g,tau) in U and a beta-step staying in U

    def count(self, tau) -> int:
        return len(self.good_locations.get(tau, ()))

    def satisfactory(self, tau, a) -> bool:
        return self.count(tau) >= a

    def non_satisfactory_edges(self, a) -> list:
        return [e for e in self.edges if any(not self.satisfactory(t, a) for t in e)]

    def ns_fraction(self, a) -> float:
        if not self.edges:
            return math.inf
        return len(self.non_satisfactory_edges(a)) / len(self.edges)


def erschler_graph(pgroup, U: Iterable[GroupElement], beta_name: str | None = None) -> SatisfactoryGraph:
    """Build ``K(U)``, ``EK(U)`` and the per-vertex location counts.

    ``pgroup`` must be a rooted gluing of one infinite Cayley graph with a
    cyclic group of order 2 or 3 (the letter ``beta_name``).
    """
    graph = pgroup.graph
    if graph.info.get("construction") != "rooted":
        raise ValueError("needs a rooted gluing with a cyclic component")
    if beta_name is None:
        cands = [n for n in graph.names if n.startswith("b")]
        if not cands:
            raise ValueError("group has no beta letter")
        beta_name = cands[0]
    if beta_name not in graph.names:
        raise ValueError("group has no beta letter")
    beta = pgroup.generator(beta_name)
    betas = [(1, beta), (-1, pgroup.inv(beta))]
    Uset = set(U)
    loc, good, edges = {}, {}, {}
    for gam in sorted(Uset, key=pgroup.key):
        g, tau = gam.translations, gam.finperm
        loc.setdefault(tau, set()).add(g)
        for eps, b in betas:
            nb = pgroup.mul(b, gam)
            if nb in Uset:
                assert nb.translations == g
                good.setdefault(tau, set()).add(g)
                if nb.finperm != tau:
                    e = frozenset([tau, nb.finperm])
                    edges.setdefault(e, set()).add((g, eps))
    K = sorted(loc)
    return SatisfactoryGraph(K, edges, loc, good)


@dataclass
class Subgraph:
    K: list
    edges: dict

    def degree_labels(self, tau) -> set:
        """Distinct locations ``g`` labelling edges at ``tau``."""
        out = set()
        for e, labels in self.edges.items():
            if tau in e:
                out.update(g for g, _ in labels)
        return out

    def neighbors(self, tau) -> set:
        out = set()
        for e in self.edges:
            if tau in e:
                out.update(e - {tau})
        return out


def edge_removal(sg: SatisfactoryGraph, a: float) -> Subgraph:
    """Repeatedly delete vertices that are not ``a/4``-satisfactory in the current subgraph.

    Satisfaction inside a subgraph counts the distinct locations labelling the
    surviving edges at a vertex. If at most a quarter of the edges touch a
    non-``a``-satisfactory vertex of the full graph, the survivor must be
    nonempty, and this is asserted.
    """
    K = set(sg.K)
    edges = dict(sg.edges)
    thresh = a / 4
    while True:
        locs = {t: set() for t in K}
        for e, labels in edges.items():
            for t in e:
                locs[t].update(g for g, _ in labels)
        drop = {t for t in K if len(locs[t]) < thresh}
        if not drop:
            break
        K -= drop
        edges = {e: l for e, l in edges.items() if not (e & drop)}
    out = Subgraph(sorted(K), edges)
    if sg.edges and sg.ns_fraction(a) <= 0.25:
        assert out.K, "edge removal emptied a graph whose NS fraction is at most 1/4"
    return out


@dataclass
class GrowthReport:
    b: int
    min_neighbors: int
    size: int
    hypothesis_met: bool
    passed: bool | None
    message: str


def log_factorial(n: int) -> float:
    if n < 20:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1)


def neighbor_growth_check(sub: Subgraph, b: int | None = None) -> GrowthReport:
    """If every vertex has at least ``2b`` distinct neighbours then ``|K| >= b!``."""
    if not sub.K:
        return GrowthReport(b or 0, 0, 0, False, None, "hypothesis not met: empty graph")
    mins = min(len(sub.neighbors(t)) for t in sub.K)
    if b is None:
        b = mins // 2
    if b < 1 or mins < 2 * b:
        return GrowthReport(b, mins, len(sub.K), False, None, "hypothesis not met")
    ok = math.log(len(sub.K)) >= log_factorial(b) - 1e-12
    return GrowthReport(b, mins, len(sub.K), True, ok, "pass" if ok else "fail: |K| < b!")
