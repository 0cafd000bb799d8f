from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentkit.algebra import (
    Derivation,
    GeneratorMismatch,
    NotAUnit,
    OrderMismatch,
    Poly,
    PolyRing,
    TPoly,
    exact_rank,
    invert_unit,
)

from oracles import rank_by_minors

RING = PolyRing(["x", "y"])
X, Y = RING.var("x"), RING.var("y")


# -- hypothesis strategies ----------------------------------------------------

small_rats = st.builds(
    Fraction,
    st.integers(min_value=-6, max_value=6),
    st.integers(min_value=1, max_value=4),
)

exponents = st.tuples(
    st.integers(min_value=0, max_value=3), st.integers(min_value=0, max_value=3)
)


@st.composite
def polys(draw):
    terms = draw(st.dictionaries(exponents, small_rats, max_size=4))
    return Poly(RING, terms)


@st.composite
def tpolys(draw, order=2):
    coeffs = [draw(polys()) for _ in range(order + 1)]
    return TPoly(RING, order, coeffs)


@st.composite
def derivations(draw, order=2):
    return Derivation(
        RING, order, {"x": draw(tpolys(order)), "y": draw(tpolys(order))}
    )


# -- frozen examples -----------------------------------------------------------


def test_product_difference_of_squares():
    assert (X + Y) * (X - Y) == X * X - Y * Y


def test_truncation_kills_top_order():
    t = TPoly.t(RING, 1)
    fx = TPoly.from_poly(X, 1)
    assert (1 + t * fx) * (1 - t * fx) == TPoly.constant(RING, 1, 1)


def test_exact_rational_coefficients():
    assert X * Fraction(1, 2) + X * Fraction(1, 3) == X * Fraction(5, 6)


def test_substitute_shear():
    f = TPoly.from_poly(X * Y, 1)
    t = TPoly.t(RING, 1)
    image = f.substitute(
        {"x": TPoly.generator(RING, "x", 1), "y": TPoly.generator(RING, "y", 1) - t * X}
    )
    assert str(image) == "x*y - t*x^2"


def test_substitute_binomial():
    f = TPoly.from_poly(X * X, 1)
    t = TPoly.t(RING, 1)
    image = f.substitute(
        {"x": TPoly.generator(RING, "x", 1) + t, "y": TPoly.generator(RING, "y", 1)}
    )
    assert str(image) == "x^2 + 2*t*x"


def test_substitute_fixes_constants():
    c = TPoly.constant(RING, Fraction(7, 3), 2)
    t = TPoly.t(RING, 2)
    image = c.substitute({"x": t * 5, "y": TPoly.generator(RING, "y", 2) ** 2})
    assert image == c


def test_invert_geometric_series():
    ring = PolyRing(["p"])
    u = 1 + TPoly.t(ring, 2) * TPoly.generator(ring, "p", 2)
    assert str(invert_unit(u)) == "1 - t*p + t^2*p^2"


def test_invert_constant():
    assert invert_unit(TPoly.constant(RING, 2, 3)) == TPoly.constant(
        RING, Fraction(1, 2), 3
    )


def test_invert_rejects_nonconstant_leading_term():
    with pytest.raises(NotAUnit):
        invert_unit(TPoly.from_poly(X, 2))
    with pytest.raises(NotAUnit):
        invert_unit(TPoly.t(RING, 2))


def test_partial_derivative():
    d = Derivation(RING, 0, {"x": TPoly.constant(RING, 1, 0)})
    f = TPoly.from_poly(X * X * Y, 0)
    assert str(d.apply(f)) == "2*x*y"


def test_euler_derivation_counts_degree():
    d = Derivation(
        RING, 0, {"x": TPoly.generator(RING, "x", 0), "y": TPoly.generator(RING, "y", 0)}
    )
    f = TPoly.from_poly(X * X * Y, 0)
    assert d.apply(f) == f * 3


def test_derivations_kill_constants():
    d = Derivation(RING, 1, {"x": TPoly.from_poly(Y, 1), "y": TPoly.from_poly(X, 1)})
    assert d.apply(TPoly.constant(RING, 5, 1)).is_zero()
    assert d.apply(TPoly.t(RING, 1)).is_zero()


def test_order_and_ring_mixing_is_an_error():
    other = PolyRing(["x", "z"])
    with pytest.raises(OrderMismatch):
        TPoly.constant(RING, 1, 1) + TPoly.constant(RING, 1, 2)
    with pytest.raises(GeneratorMismatch):
        TPoly.constant(RING, 1, 1) + TPoly.constant(other, 1, 1)
    with pytest.raises(GeneratorMismatch):
        X + other.var("z")


def test_reserved_generator_names():
    with pytest.raises(ValueError):
        PolyRing(["t", "x"])
    with pytest.raises(ValueError):
        PolyRing(["s"])


def test_rendering_canonical_order():
    p = Y * Y - X * X  # grlex descending puts x^2 first
    assert str(-p) == "x^2 - y^2"
    tp = TPoly.build(RING, 2, {0: Y, 1: -X})
    assert str(tp) == "y - t*x"
    assert str(RING.zero()) == "0"
    assert str(TPoly.constant(RING, 0, 3)) == "0"


def test_t_shift_truncates():
    tp = TPoly.build(RING, 1, {0: X, 1: Y})
    assert tp.t_shift(1) == TPoly.build(RING, 1, {1: X})


def test_evaluate():
    tp = TPoly.build(RING, 1, {0: X * Y, 1: RING.one()})
    value = tp.evaluate({"x": Fraction(2), "y": Fraction(3, 2)}, Fraction(1, 3))
    assert value == Fraction(3) + Fraction(1, 3)


# -- properties ----------------------------------------------------------------


@given(polys(), polys(), polys())
def test_poly_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(tpolys(), tpolys(), tpolys())
def test_tpoly_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(st.integers(min_value=-5, max_value=5).filter(lambda v: v != 0), polys())
@settings(max_examples=60)
def test_invert_unit_round_trip(c, q):
    u = TPoly.from_poly(q, 3).t_shift(1) + Fraction(c)
    assert u * invert_unit(u) == TPoly.constant(RING, 1, 3)


@given(derivations(), tpolys(), tpolys())
@settings(max_examples=60)
def test_derivation_leibniz(d, f, g):
    assert d.apply(f * g) == d.apply(f) * g + f * d.apply(g)


@given(tpolys(), tpolys(), tpolys(), tpolys())
@settings(max_examples=40, deadline=None)
def test_substitution_is_a_ring_homomorphism(f, g, vx, vy):
    assignment = {"x": vx, "y": vy}
    assert (f * g).substitute(assignment) == f.substitute(assignment) * g.substitute(
        assignment
    )
    assert (f + g).substitute(assignment) == f.substitute(assignment) + g.substitute(
        assignment
    )


@given(
    st.lists(
        st.lists(small_rats, min_size=4, max_size=4), min_size=4, max_size=4
    )
)
@settings(max_examples=60)
def test_exact_rank_matches_minor_enumeration(rows):
    assert exact_rank(rows) == rank_by_minors(rows)


def test_render_parse_round_trip_samples():
    from momentkit.modelfile import parse_polynomial

    samples = [
        TPoly.build(RING, 2, {0: Y, 1: -X}),
        TPoly.build(RING, 2, {0: X * X - Y, 2: RING.const(Fraction(5, 6))}),
        TPoly.constant(RING, 0, 2),
        TPoly.build(RING, 2, {1: -RING.one(), 2: X * Y * Y}),
    ]
    for tp in samples:
        assert parse_polynomial(str(tp), RING, 2) == tp
