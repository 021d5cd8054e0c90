import pytest
from hypothesis import given, strategies as st

from piecewise.gluing import build_bubble, build_houghton, pocket_extension
from piecewise.labelled_graph import (
    STAR, BubblePoint, CyclicGroup, Int, IntegerLattice, Lattice, Letter, MalformedGroup, Residue, TableGroup,
    WindowOverflow, build_cayley, enumerate_ball, format_word, from_edges, letter_action, parse_word, validate,
    vertex_from_json, vertex_to_json, word_inverse,
)

letters = st.builds(Letter, st.integers(1, 6), st.sampled_from([1, -1]))


@given(letters)
def test_letter_inverse_is_involution(l):
    assert l.inverse().inverse() == l
    assert l.inverse().generator_index == l.generator_index
    assert l.inverse().sign == -l.sign


@given(st.lists(letters, max_size=8))
def test_word_inverse_reverses(word):
    assert word_inverse(word_inverse(word)) == tuple(word)


def test_bad_letter():
    with pytest.raises(ValueError):
        Letter(0)


def test_parse_format_roundtrip():
    names = ["s", "tau"]
    w = parse_word("tau s s^-1", names)
    assert w == (Letter(2), Letter(1), Letter(1, -1))
    assert parse_word(format_word(w, names), names) == w


def test_cayley_z_action():
    g = build_cayley(IntegerLattice(1))
    s = g.letter("s")
    assert letter_action(g, Int(3), s) == Int(4)
    assert letter_action(g, Int(3), s.inverse()) == Int(2)


def test_cyclic_wraps():
    g = build_cayley(CyclicGroup(3))
    assert letter_action(g, Residue(2), g.letter("s")) == Residue(0)


def test_z2_grid_is_valid():
    g = build_cayley(IntegerLattice(2), window=4)
    ball = enumerate_ball(g, g.root, 3)
    assert letter_action(g, Lattice((0, 0)), g.letter("s1")) in (Lattice((1, 0)), Lattice((0, 1)))
    assert validate(g, [v for v in ball.vertices if ball.distance[v] < 3]) == []
    assert ball.volumes == [1, 5, 13, 25]


def test_ball_z():
    ball = enumerate_ball(build_cayley(IntegerLattice(1)), Int(0), 3)
    assert len(ball.vertices) == 7 and ball.volume(3) == 7
    assert ball.volume(0) == 1


def test_ball_cyclic_saturates():
    ball = enumerate_ball(build_cayley(CyclicGroup(5)), Residue(0), 4)
    assert ball.volumes == [1, 3, 5, 5, 5]


def test_ball_order_is_deterministic():
    g = build_cayley(IntegerLattice(2), window=6)
    a = enumerate_ball(g, g.root, 4).vertices
    b = enumerate_ball(g, g.root, 4).vertices
    assert a == b


@pytest.mark.parametrize("r", [1, 2, 5, 9])
def test_houghton_volumes(r):
    g = build_houghton(3, window=16)
    assert enumerate_ball(g, g.root, r).volume(r) == 1 + 3 * r


def test_window_overflow():
    g = build_cayley(IntegerLattice(1), window=3)
    with pytest.raises(WindowOverflow):
        enumerate_ball(g, g.root, 5)


def test_pocket_star_to_root():
    g = pocket_extension(build_cayley(IntegerLattice(1)))
    assert letter_action(g, STAR, g.letter("tau")) == Int(0)


def test_bubble_rotation():
    g = build_bubble((4, 8), 1, closed=True)
    assert letter_action(g, BubblePoint((), 0), g.letter("alpha")) == BubblePoint((), 1)


def test_validate_flags_double_edge():
    verts = [Int(0), Int(1), Int(2)]
    g = from_edges(["s"], verts, [(Int(0), Int(1), 1), (Int(0), Int(2), 1)], Int(0))
    problems = validate(g)
    assert any("non-injective" in p for p in problems)


def test_validate_pocket_z3():
    g = pocket_extension(build_cayley(CyclicGroup(3)))
    assert validate(g) == []
    assert 2 * g.k == 4


def test_table_group_rejects_bad_generator():
    with pytest.raises(MalformedGroup):
        build_cayley(TableGroup([[0, 1], [1, 0]]), [5])


@given(st.integers(-50, 50), st.integers(-50, 50))
def test_lattice_inverse_letters(x, y):
    g = build_cayley(IntegerLattice(2), window=120)
    v = Lattice((x, y))
    for l in g.letters():
        assert letter_action(g, letter_action(g, v, l), l.inverse()) == v


@given(st.one_of(
    st.builds(Int, st.integers(-100, 100)),
    st.builds(Residue, st.integers(0, 10)),
    st.builds(BubblePoint, st.lists(st.integers(1, 2), max_size=4), st.integers(0, 30)),
    st.builds(Lattice, st.lists(st.integers(-9, 9), min_size=1, max_size=3)),
))
def test_vertex_json_roundtrip(v):
    assert vertex_from_json(vertex_to_json(v)) == v
