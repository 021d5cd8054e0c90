import math

import pytest
from hypothesis import given, strategies as st

from piecewise import io as pio
from piecewise.curves import (
    DomainError, InsufficientPoints, bubble_return, compare_profile_to_curve, composite_argument, curve,
)
from piecewise.gluing import pocket_extension
from piecewise.labelled_graph import CyclicGroup, IntegerLattice, build_cayley, enumerate_ball
from piecewise.perm_engine import PiecewiseGroup
from piecewise.profile_engine import ProfilePoint, ProfileTable, enumerate_elements, lambda_profile
from piecewise.walk_engine import IntegerGroup, Measure, convolution_power, letter_measure


def test_composite_at_e_e():
    v = math.exp(math.e) - 1
    assert composite_argument(v) == pytest.approx(math.e / math.log1p(math.e))


def test_rho_value():
    assert curve("rho", alpha=2)(0.25) == pytest.approx(2 * math.sqrt(1 + math.log(4)))


def test_bubble_upper_curve():
    c = curve("bubble_upper", a=[4, 8, 16])
    assert c(3) == 16


def test_domain_errors():
    with pytest.raises(DomainError):
        curve("composite")(0)
    with pytest.raises(DomainError):
        curve("rho", alpha=2)(1.5)
    with pytest.raises(DomainError):
        curve("bubble_upper", a=[4, 8])(100)
    with pytest.raises(ValueError):
        curve("nope")


@pytest.mark.parametrize("name,params", [
    ("composite", {}), ("inverse", {}), ("inverse_square", {}), ("bubble_return", {"kappa": 1.0}),
    ("bubble_return", {"kappa": 3.0}),
])
@given(st.floats(2.0, 1e6), st.floats(1.001, 4.0))
def test_monotone(name, params, x, factor):
    c = curve(name, **params)
    a, b = c(x), c(x * factor)
    if c.direction == "increasing":
        assert b >= a
    else:
        assert b <= a


@given(st.floats(1e-6, 0.99), st.floats(1.0001, 3.0))
def test_rho_decreasing(s, f):
    c = curve("rho", alpha=2)
    t = min(1.0, s * f)
    assert c(t) <= c(s)


def test_bubble_return_value():
    assert bubble_return(math.e, 1.0) == pytest.approx(math.exp(-math.exp(0.5)))


def z_table(vmax=8):
    m = Measure(IntegerGroup(), {-1: 0.5, 1: 0.5})
    return lambda_profile(m, enumerate_elements(m, vmax), vmax, 1)


def test_fit_z_inverse():
    rep = compare_profile_to_curve(z_table(), curve("inverse"))
    assert rep.c1 == pytest.approx(1.0) and rep.c3 == pytest.approx(1.0)
    assert rep.points == 8 and rep.flags == []


def test_fit_flags_finite_group():
    pg = PiecewiseGroup(pocket_extension(build_cayley(CyclicGroup(3))))
    m = letter_measure(pg)
    t = lambda_profile(m, enumerate_elements(m, 30), 24, 2)
    rep = compare_profile_to_curve(t, curve("inverse"))
    assert "finite group, profile hits 0 wall" in rep.flags


def test_fit_needs_points():
    t = ProfileTable("L2", [ProfilePoint(1, 1.0, "{}", True), ProfilePoint(2, 0.5, "{}", True)])
    with pytest.raises(InsufficientPoints):
        compare_profile_to_curve(t, curve("inverse"))
    with pytest.raises(InsufficientPoints):
        compare_profile_to_curve(z_table(), curve("rho", alpha=2))


def test_csv_format():
    text = pio.csv_text(["a", "b"], [(1, 0.1), (2, "x,y")])
    assert text == 'a,b\n1,0.1\n2,"x,y"\n'


def test_json_has_schema():
    assert '"schema_version": 1' in pio.json_text({"z": 1, "a": 2})


def test_cache_roundtrip_profile(tmp_path):
    t = z_table(5)
    path = pio.write_cache("profile", "z", pio.profile_payload(t), tmp_path)
    kind, payload = pio.read_cache(path)
    assert kind == "profile"
    back = pio.profile_from_payload(payload)
    assert back.rows() == t.rows()
    assert pio.payload_hash(pio.profile_payload(back)) == pio.payload_hash(pio.profile_payload(t))


def test_cache_roundtrip_ball_and_distribution(tmp_path):
    g = build_cayley(IntegerLattice(2), window=6)
    ball = enumerate_ball(g, g.root, 3)
    p1 = pio.write_cache("ball", "z2", pio.ball_payload(ball), tmp_path)
    assert pio.read_cache(p1)[1] == pio.ball_payload(ball)
    d = convolution_power(Measure(IntegerGroup(), {-1: 0.5, 1: 0.5}), 4)
    p2 = pio.write_cache("dist", "z", pio.distribution_payload(d), tmp_path)
    assert pio.read_cache(p2)[1]["atoms"] == [["-4", 0.0625], ["-2", 0.25], ["0", 0.375], ["2", 0.25], ["4", 0.0625]]


def test_cache_detects_tampering(tmp_path):
    path = pio.write_cache("profile", "z", pio.profile_payload(z_table(3)), tmp_path)
    text = path.read_text().replace("0.5", "0.4")
    path.write_text(text)
    with pytest.raises(pio.CacheError):
        pio.read_cache(path)


def test_cache_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(pio.CACHE_ENV, str(tmp_path / "c"))
    assert pio.cache_dir() == tmp_path / "c"
    assert (tmp_path / "c").is_dir()
