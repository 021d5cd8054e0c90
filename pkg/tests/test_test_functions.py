import random
from fractions import Fraction

import pytest

from piecewise.gluing import build_bubble, build_houghton, pocket_extension, rooted_gluing, star_extension
from piecewise.labelled_graph import ROOT, CyclicGroup, IntegerLattice, build_cayley
from piecewise.perm_engine import FinPerm, PiecewiseGroup
from piecewise.test_functions import (
    bubble_closed_forms, bubble_count_bound, bubble_support_factorization, bubble_test_function, bubble_U_set,
    commutator_cycle, compare, houghton_test_function, product_test_function, sigma_commutator,
    star_test_function, star_transposition_word, swap_relation,
)
from piecewise.walk_engine import xi_alpha


def gluing(second):
    g = rooted_gluing([build_cayley(IntegerLattice(1)), build_cayley(second, names=["beta"])])
    return PiecewiseGroup(g)


def power(pg, name, n):
    g = pg.generator(name) if n > 0 else pg.inv(pg.generator(name))
    out = pg.identity
    for _ in range(abs(n)):
        out = pg.mul(out, g)
    return out


def test_compare_exact_and_float():
    assert compare("x", Fraction(1, 3), Fraction(1, 3)).passed
    assert not compare("x", Fraction(1, 3), Fraction(1, 3) + Fraction(1, 10 ** 30)).passed
    assert compare("x", 0.1 + 0.2, 0.3).passed
    assert compare("x", 1, 2, "<=").passed


@pytest.mark.parametrize("second", [CyclicGroup(2), CyclicGroup(3), IntegerLattice(1)])
def test_commutator_is_three_cycle(second):
    pg = gluing(second)
    order = getattr(second, "b", 0)
    for n in range(1, 4):
        for m in (1, -1, 2):
            if order and m % order == 0:
                continue
            a, b = power(pg, "s", n), power(pg, "beta", m)
            assert pg.commutator(a, b) == pg.from_perm(commutator_cycle(pg, a, b))


def test_sigma_commutator():
    pg = gluing(IntegerLattice(1))
    b = power(pg, "beta", 2)
    x = pg.act(power(pg, "s", 1), ROOT)
    sigma = FinPerm.transposition(ROOT, x)
    assert pg.commutator(pg.from_perm(sigma), b) == pg.from_perm(sigma_commutator(pg, sigma, b))


def test_swap_relation_s_equals_t():
    pg = gluing(IntegerLattice(1))
    rng = random.Random(0)
    stated = []
    for _ in range(40):
        gr = power(pg, "s", rng.choice([1, 2, -1, -3]))
        gs = power(pg, "beta", rng.choice([1, 2, -1]))
        gt = power(pg, "beta", rng.choice([2, -2, 3]))
        try:
            chk = swap_relation(pg, gr, gs, gt, 0, 1, 1)
        except ValueError:
            continue
        assert chk.corrected_ok
        stated.append(chk.stated_ok)
    assert stated and not any(stated)


def test_swap_relation_r_equals_t():
    pg = gluing(CyclicGroup(3))
    chk = swap_relation(pg, power(pg, "s", 2), power(pg, "beta", 1), power(pg, "s", -1), 0, 1, 0)
    assert chk.stated_ok and chk.corrected_ok


def test_product_z_z2():
    res = product_test_function(gluing(CyclicGroup(2)), [{-1: Fraction(1, 2), 0: Fraction(1), 1: Fraction(1, 2)}])
    assert res.passed
    assert res.data["V"] == 24


def test_product_needs_rooted():
    pg = PiecewiseGroup(pocket_extension(build_cayley(IntegerLattice(1))))
    with pytest.raises(ValueError):
        product_test_function(pg, [{0: 1}])


@pytest.mark.parametrize("r", [1, 2])
def test_houghton_ratio(r):
    hg = PiecewiseGroup(build_houghton(3, window=64))
    psi = {z: (r - abs(z)) / r for z in range(-r + 1, r)}
    pairs = [(1, 2), (1, 3), (2, 3)]
    res = houghton_test_function(hg, psi, {p: xi_alpha("s") for p in pairs})
    assert res.passed
    assert res.data["ratio"] <= 2 * res.data["s"]


def test_houghton_rejects_asymmetric_psi():
    hg = PiecewiseGroup(build_houghton(3, window=64))
    with pytest.raises(ValueError):
        houghton_test_function(hg, {0: 1.0, 1: 0.5}, {})


@pytest.fixture(scope="module")
def star_z():
    return PiecewiseGroup(star_extension(build_cayley(IntegerLattice(1))))


def test_star_delta_variants(star_z):
    literal = star_test_function(star_z, {0: Fraction(1)})
    widened = star_test_function(star_z, {0: Fraction(1)}, include_identity=True)
    assert widened.passed
    # with V built from U^-1 s only the transpositions can leave the support
    assert literal.data["transposition_term"] != 0
    assert not literal.passed


def test_star_small_tent(star_z):
    res = star_test_function(star_z, {-1: Fraction(1), 0: Fraction(2), 1: Fraction(1)})
    assert res.passed
    assert res.data["transposition_term"] == 0


@pytest.mark.parametrize("length", [1, 2, 3, 5])
def test_star_word_derived(star_z, length):
    g = star_z.graph
    s = g.letter("s")
    for sig in ([s] * length, [s.inverse()] * length):
        word = star_transposition_word(g, sig, "derived")
        x = star_z.act(star_z.word(sig), g.root)
        assert star_z.word(word) == star_z.from_perm(FinPerm.transposition(g.root, x))
        assert len(word) <= 8 * length


def test_star_word_literal_only_for_single_letters(star_z):
    g = star_z.graph
    s = g.letter("s")
    one = star_transposition_word(g, [s], "literal")
    assert star_z.word(one) == star_z.from_perm(FinPerm.transposition(g.root, star_z.act(star_z.word([s]), g.root)))
    two = star_z.word(star_transposition_word(g, [s, s], "literal"))
    assert two.finperm.parity() == 0  # an even number of transpositions is never a transposition


def test_bubble_closed_forms_values():
    f = bubble_closed_forms(1, 81)
    assert f["norm_direct"] == Fraction(81, 3)
    assert f["norm_stated"] != f["norm_direct"]
    assert f["energy_stated"] == f["energy_direct"] == Fraction(81, 6)
    assert f["ratio_bound"] == Fraction(3, 2)


@pytest.fixture(scope="module")
def bubble_816():
    return build_bubble((8, 16), 1, closed=True)


def test_bubble_level_one(bubble_816):
    u = bubble_U_set(bubble_816, 1, 1)
    assert len(u) == 81 and u.partition_equal and u.translation_ok
    res = bubble_test_function(u)
    by_name = {r.identity: r for r in res.reports}
    assert by_name["norm, direct closed form"].passed
    assert not by_name["norm, stated closed form"].passed
    assert by_name["energy, stated closed form"].passed
    assert by_name["ratio at most 3/(2 ell^2)"].passed


def test_bubble_level_two(bubble_816):
    u = bubble_U_set(bubble_816, 2, 3)
    assert len(u) == 15309
    res = bubble_test_function(u)
    assert {r.identity: r.passed for r in res.reports}["energy, measure-weighted closed form"]


def test_bubble_pocket_weight(bubble_816):
    u = bubble_U_set(pocket_extension(bubble_816), 1, 1)
    assert len(u) == 1944
    by_name = {r.identity: r for r in bubble_test_function(u).reports}
    assert by_name["energy, measure-weighted closed form"].passed
    assert not by_name["energy, stated closed form"].passed


def test_bubble_factorization_radius(bubble_816):
    u = bubble_U_set(bubble_816, 2, 3)
    g = u.classes[0][-1]
    tight = bubble_support_factorization(u, g, 0)
    wide = bubble_support_factorization(u, g, 1)
    assert wide.covered and wide.invariant and wide.determined
    assert not tight.covered
    assert bubble_count_bound(u, 1).passed


def test_bubble_U_checks_ell(bubble_816):
    with pytest.raises(ValueError):
        bubble_U_set(bubble_816, 1, 4)
    with pytest.raises(ValueError):
        bubble_U_set(build_bubble((8, 16), 1), 1, 1)
