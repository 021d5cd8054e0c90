"""Step distributions, exact convolution and return probabilities."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.special import zeta

from .perm_engine import FinPerm, GroupElement

PRUNE_THRESHOLD = 1e-15
CHUNK = 512  # fixed shard size; results never depend on the worker count


# ---------------------------------------------------------------------------
# small group adaptors


class IntegerGroup:
    """The integers under addition, for measures on Z."""

    identity = 0

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def key(self, a):
        return a

    def encode(self, a):
        return str(a)


class PermGroup:
    """Bare finite-support permutations."""

    identity = FinPerm.identity()

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return a.inverse()

    def key(self, a):
        return a.items()

    def encode(self, a):
        return a.encode()


def _key(group, g):
    k = getattr(group, "key", None)
    if k is not None:
        return k(g)
    return g.sort_key() if isinstance(g, GroupElement) else g


# ---------------------------------------------------------------------------
# measures and distributions


@dataclass
class Measure:
    group: Any
    atoms: dict
    defect: float = 0.0
    symmetric: bool = True
    label: str = ""

    def __post_init__(self):
        total = sum(self.atoms.values()) + self.defect
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"measure mass {total} != 1")
        if any(p < 0 for p in self.atoms.values()) or self.defect < 0:
            raise ValueError("negative mass")
        if self.symmetric:
            check_symmetric(self.group, self.atoms)

    def sorted_atoms(self) -> list:
        return sorted(self.atoms.items(), key=lambda kv: _key(self.group, kv[0]))

    def __call__(self, g) -> float:
        return self.atoms.get(g, 0.0)

    def support(self) -> list:
        return [g for g, p in self.sorted_atoms() if p > 0]

    def mass_off_identity(self) -> float:
        """``s_phi``: total mass on non-identity elements."""
        return sum(p for g, p in self.atoms.items() if g != self.group.identity)


def check_symmetric(group, atoms: dict, tol: float = 1e-15):
    for g, p in atoms.items():
        q = atoms.get(group.inv(g), 0.0)
        if abs(p - q) > tol:
            raise ValueError(f"measure is not symmetric at {_encode(group, g)}")


def _encode(group, g):
    enc = getattr(group, "encode", None)
    return enc(g) if enc else str(g)


@dataclass
class Distribution:
    group: Any
    probs: dict
    defect: float = 0.0

    @classmethod
    def delta(cls, group, g=None) -> "Distribution":
        return cls(group, {group.identity if g is None else g: 1.0}, 0.0)

    def mass(self) -> float:
        return math.fsum(self.probs.values())

    def __call__(self, g) -> float:
        return self.probs.get(g, 0.0)

    def sorted_items(self) -> list:
        return sorted(self.probs.items(), key=lambda kv: _key(self.group, kv[0]))

    def l2_squared(self) -> float:
        return math.fsum(p * p for _, p in self.sorted_items())


def uniform_measure(group, elements: Iterable, label: str = "") -> Measure:
    els = list(elements)
    if not els:
        raise ValueError("empty support")
    atoms = {}
    for g in els:
        atoms[g] = atoms.get(g, 0.0) + 1.0 / len(els)
    return Measure(group, atoms, 0.0, True, label)


def letter_measure(pgroup, names: Sequence[str] | None = None) -> Measure:
    """Uniform measure on the letters (and inverses) of a piecewise group."""
    graph = pgroup.graph
    letters = graph.letters() if names is None else [l for l in graph.letters() if graph.names[l.generator_index - 1] in names]
    return uniform_measure(pgroup, [pgroup.letter(l) for l in letters], label="letters")


def make_measure_q(measures: Sequence[Measure]) -> Measure:
    """Equal-weight mixture ``(1/l) sum mu_i`` of symmetric measures."""
    if not measures:
        raise ValueError("need at least one measure")
    group = measures[0].group
    atoms, defect = {}, 0.0
    w = 1.0 / len(measures)
    for m in measures:
        if m.group is not group:
            raise ValueError("measures live on different groups")
        check_symmetric(group, m.atoms)
        for g, p in m.sorted_atoms():
            atoms[g] = atoms.get(g, 0.0) + w * p
        defect += w * m.defect
    return Measure(group, atoms, defect, True, "mixture")


# ---------------------------------------------------------------------------
# measures on Z


def xi_alpha(alpha, eps: float = 1e-6) -> Measure:
    """Power-law measure ``c (1+|m|)^(-alpha-1)`` on Z, truncated by mass.

    ``alpha="s"`` gives the uniform measure on {-1, 0, 1} and ``alpha="t"``
    the point mass at 0. The truncated tail is kept as defect.
    """
    Z = IntegerGroup()
    if alpha == "s":
        return Measure(Z, {-1: 1 / 3, 0: 1 / 3, 1: 1 / 3}, 0.0, True, "xi_s")
    if alpha == "t":
        return Measure(Z, {0: 1.0}, 0.0, True, "xi_t")
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not (0 < eps <= 1e-3):
        raise ValueError("truncation eps must lie in (0, 1e-3]")
    c = xi_constant(alpha)
    # tail beyond |m| <= M has mass 2c * zeta(alpha+1, M+2)
    lo, hi = 0, 1
    while 2 * c * zeta(alpha + 1, hi + 2) > eps:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if 2 * c * zeta(alpha + 1, mid + 2) > eps:
            lo = mid + 1
        else:
            hi = mid
    M = lo
    ms = np.arange(-M, M + 1)
    vals = c * (1.0 + np.abs(ms)) ** (-alpha - 1)
    atoms = {int(m): float(v) for m, v in zip(ms, vals)}
    defect = 1.0 - math.fsum(vals)
    return Measure(Z, atoms, max(defect, 0.0), True, f"xi_{alpha:g}")


def xi_constant(alpha: float) -> float:
    """Normalising constant ``1 / (1 + 2 sum_{m>=1} (1+m)^(-alpha-1))``."""
    return 1.0 / (2.0 * zeta(alpha + 1) - 1.0)


def rho_alpha(alpha, s: float) -> float:
    """Rate function attached to ``xi_alpha``."""
    if not (0 < s <= 1):
        raise ValueError("s must lie in (0, 1]")
    if alpha == "t":
        return 0.0
    if alpha == "s":
        return s ** -0.5
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if alpha < 2:
        return s ** (-1.0 / alpha)
    if alpha == 2:
        return s ** -0.5 * math.sqrt(1.0 + math.log(1.0 / s))
    return s ** -0.5


def make_measure_houghton(hgroup, p: dict) -> Measure:
    """``q(g) = C(k,2)^-1 sum p_{ij}(n) 1{g = h_{ij}^n}`` on a Houghton group.

    ``p`` maps every pair ``(i, j)``, ``i < j``, to a symmetric measure on Z.
    Missing pairs are treated as the point mass at 0.
    """
    from .perm_engine import houghton_element

    k = hgroup.model.k
    pairs = [(i, j) for i in range(1, k + 1) for j in range(i + 1, k + 1)]
    w = 1.0 / len(pairs)
    atoms, defect = {}, 0.0
    for pair in pairs:
        m = p.get(pair)
        if m is None:
            atoms[hgroup.identity] = atoms.get(hgroup.identity, 0.0) + w
            continue
        check_symmetric(IntegerGroup(), m.atoms)
        for n, pn in m.sorted_atoms():
            g = houghton_element(hgroup, pair[0], pair[1], n)
            atoms[g] = atoms.get(g, 0.0) + w * pn
        defect += w * m.defect
    return Measure(hgroup, atoms, defect, True, "houghton")


def make_mu_N(points: Sequence, group=None) -> Measure:
    """Uniform measure on the ``2 C(N,3)`` three-cycles of ``points``."""
    pts = sorted(set(points))
    if len(pts) < 3:
        raise ValueError("need at least three points")
    if group is None:
        group = PermGroup()
    els = []
    for x, y, z in combinations(pts, 3):
        for c in ((x, y, z), (x, z, y)):
            p = FinPerm.from_cycles(c)
            els.append(group.from_perm(p) if hasattr(group, "from_perm") else p)
    return uniform_measure(group, els, label=f"mu_{len(pts)}")


# ---------------------------------------------------------------------------
# convolution


def _conv_chunk(group, chunk, m_atoms):
    out = {}
    for x, px in chunk:
        for y, py in m_atoms:
            z = group.mul(y, x)
            out[z] = out.get(z, 0.0) + px * py
    return out


def convolve(d: Distribution, m: Measure, workers: int = 1, prune: float = PRUNE_THRESHOLD) -> Distribution:
    """Left convolution: the new law of ``Y X`` with ``X ~ d``, ``Y ~ m``.

    Sources are split into fixed-size chunks in canonical order and partial
    sums are merged in chunk order, so the floating-point result does not
    depend on ``workers``.
    """
    if d.group is not m.group and type(d.group) is not type(m.group):
        raise ValueError("distribution and measure live on different groups")
    group = d.group
    items = d.sorted_items()
    m_atoms = m.sorted_atoms()
    chunks = [items[i:i + CHUNK] for i in range(0, len(items), CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda c: _conv_chunk(group, c, m_atoms), chunks))
    else:
        parts = [_conv_chunk(group, c, m_atoms) for c in chunks]
    new = {}
    for part in parts:
        for z, v in part.items():
            new[z] = new.get(z, 0.0) + v
    defect = d.defect + m.defect * d.mass()
    if prune > 0:
        small = sorted((z for z, v in new.items() if v < prune), key=lambda z: _key(group, z))
        for z in small:
            defect += new.pop(z)
    return Distribution(group, new, defect)


def convolution_power(m: Measure, n: int, workers: int = 1) -> Distribution:
    d = Distribution.delta(m.group)
    for _ in range(n):
        d = convolve(d, m, workers)
    return d


@dataclass
class ReturnSeries:
    n: list
    lower: list
    upper: list
    defect: list
    monotone: bool = True
    notes: list = field(default_factory=list)

    def rows(self):
        return list(zip(self.n, self.lower, self.upper, self.defect))


def return_probability(m: Measure, n_max: int, workers: int = 1) -> ReturnSeries:
    """``P(S_{2n} = id)`` for ``n = 0..n_max`` as intervals ``[value, value + defect]``."""
    if not m.symmetric:
        raise ValueError("return probabilities need a symmetric measure")
    d = Distribution.delta(m.group)
    ns, lo, hi, de = [0], [1.0], [1.0], [0.0]
    for n in range(1, n_max + 1):
        d = convolve(convolve(d, m, workers), m, workers)
        v = d(m.group.identity)
        ns.append(n)
        lo.append(v)
        hi.append(v + d.defect)
        de.append(d.defect)
    mono = all(lo[i + 1] <= hi[i] + 1e-15 for i in range(len(lo) - 1))
    return ReturnSeries(ns, lo, hi, de, mono)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass
class MCEstimate:
    estimate: float
    stderr: float
    trials: int
    returns: int


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial)]))


def _finite_table(m: Measure, limit: int = 200000):
    """Index the subgroup generated by the support, or None if it is too big."""
    group = m.group
    atoms = m.sorted_atoms()
    gens = [g for g, _ in atoms]
    index = {group.identity: 0}
    elems = [group.identity]
    i = 0
    while i < len(elems):
        x = elems[i]
        for y in gens:
            z = group.mul(y, x)
            if z not in index:
                if len(elems) >= limit:
                    return None
                index[z] = len(elems)
                elems.append(z)
        i += 1
    table = np.empty((len(gens), len(elems)), dtype=np.int64)
    for j, y in enumerate(gens):
        for x in elems:
            table[j, index[x]] = index[group.mul(y, x)]
    return table


def monte_carlo_return(m: Measure, n: int, trials: int, master_seed: int, workers: int = 1,
                       finite_limit: int = 5000) -> MCEstimate:
    """Estimate ``P(S_n = id)`` from independent trials with per-trial seeds.

    Steps are drawn from the atoms renormalised to total mass one.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    atoms = m.sorted_atoms()
    probs = np.array([p for _, p in atoms], dtype=float)
    probs /= probs.sum()
    table = _finite_table(m, finite_limit)
    group = m.group

    def run(t):
        rng = trial_rng(master_seed, t)
        steps = rng.choice(len(atoms), size=n, p=probs)
        if table is not None:
            x = 0
            for s in steps:
                x = table[s, x]
            return int(x == 0)
        x = group.identity
        for s in steps:
            x = group.mul(atoms[s][0], x)
        return int(x == group.identity)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            hits = list(ex.map(run, range(trials)))
    else:
        hits = [run(t) for t in range(trials)]
    r = sum(hits)
    est = r / trials
    se = math.sqrt(est * (1 - est) / trials) if trials > 1 else 0.0
    return MCEstimate(est, se, trials, r)
