import random

import pytest
from hypothesis import given, settings, strategies as st

from gengeo.clifford import form_exp
from gengeo.sampling import random_form, random_vector
from gengeo.scalar import Chart, I, ScalarExpr
from gengeo.tensor import (DegreeError, Frame, FrameInconsistent, FrameMismatch, MixedForm, PolyVector,
                           exterior_d, interior, lie_derivative, su2_frame, vector_bracket, wedge)

R = Chart("R3t", ["x", "y", "z"])
x, y, z = R.coords
F = Frame.coordinate(R)
dx, dy, dz = (MixedForm.coframe(F, k) for k in range(3))
px, py, pz = (PolyVector.basis(F, k) for k in range(3))

B9 = Chart("B9t", ["t"])
fa = B9.function("a", "t")
SU2 = su2_frame(B9)
dt, s1, s2, s3 = (MixedForm.coframe(SU2, k) for k in range(4))
X1, X2, X3 = (PolyVector.basis(SU2, k) for k in (1, 2, 3))

seeds = st.integers(0, 10**6)


def test_wedge_examples():
    assert wedge(dx, dy) == MixedForm(F, {(0, 1): 1})
    assert wedge(dx, dx).is_zero()
    one = MixedForm.scalar(F, 1)
    assert wedge(one + dx, one + dy) == one + dx + dy + wedge(dx, dy)
    assert wedge(dx.scale(x), dy.scale(y)) == wedge(dx, dy).scale(x * y)


def test_interior_examples():
    assert interior(px, wedge(dx, dy)) == dy
    omega = wedge(dx, dy)
    psi = form_exp(omega.scale(I))
    # e^{i dx^dy} = 1 + i dx^dy, contracted with d/dx
    assert interior(px, psi) == dy.scale(I)
    assert interior(px, interior(px, psi + wedge(omega, dz))).is_zero()


def test_interior_polyvector_contracts_last_factor_first():
    biv = wedge(px, py)
    assert interior(biv, wedge(dx, dy)) == MixedForm.scalar(F, -1)


def test_d_examples():
    assert exterior_d(dy.scale(x)) == wedge(dx, dy)
    assert exterior_d(s1) == -wedge(s2, s3)
    a = fa.expr
    lhs = exterior_d(s1.scale(a * a))
    expected = wedge(dt, s1).scale(2 * a * fa.derivative()) - wedge(s2, s3).scale(a * a)
    assert lhs == expected


def test_lie_examples():
    assert lie_derivative(X1, s2) == s3
    assert lie_derivative(X1, s1).is_zero()
    assert lie_derivative(px, dy.scale(x)) == dy


def test_su2_brackets():
    assert vector_bracket(X1, X2) == X3
    assert vector_bracket(X2, X3) == X1
    assert vector_bracket(X3, X1) == X2


def test_frame_mismatch():
    G = Frame.coordinate(Chart("other", ["u"]))
    with pytest.raises(FrameMismatch):
        wedge(dx, MixedForm.coframe(G, 0))


def test_inconsistent_frame_rejected():
    ch = Chart("bad", ["u", "v"])
    rows = [[1, 0], [0, 1]]
    with pytest.raises(FrameInconsistent):
        Frame(ch, ["e1", "e2"], rows, {(0, 1): {0: 1}})


def test_anholonomic_frame_from_rows():
    ch = Chart("polar", ["r", "th"])
    r = ch["r"]
    frame = Frame(ch, ["er", "eth"], [[1, 0], [0, 1 / r]], {(0, 1): {1: -1 / r}})
    e1, e2 = PolyVector.basis(frame, 0), PolyVector.basis(frame, 1)
    assert vector_bracket(e1, e2) == e2.scale(-1 / r)
    for k in range(2):
        assert exterior_d(exterior_d(MixedForm.coframe(frame, k).scale(r))).is_zero()


def test_degree_error_in_bracket_of_forms():
    with pytest.raises((DegreeError, TypeError)):
        lie_derivative(wedge(px, py), dx)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_d_squared_zero_coordinates(seed):
    rng = random.Random(seed)
    for p in range(3):
        a = random_form(rng, F, p, 3, 3)
        assert exterior_d(exterior_d(a)).is_zero()


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_d_squared_zero_su2(seed):
    rng = random.Random(seed)
    for p in range(4):
        a = random_form(rng, SU2, p, 3, 2)
        a = a + random_form(rng, SU2, p, 0, 1).scale(fa.expr)
        assert exterior_d(exterior_d(a)).is_zero()


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_d_is_antiderivation(seed):
    rng = random.Random(seed)
    p, q = rng.randint(0, 2), rng.randint(0, 1)
    a, b = random_form(rng, F, p), random_form(rng, F, q)
    sign = -1 if p % 2 else 1
    assert exterior_d(wedge(a, b)) == wedge(exterior_d(a), b) + wedge(a, exterior_d(b)).scale(sign)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_cartan_formula(seed):
    rng = random.Random(seed)
    frame = SU2 if rng.random() < 0.5 else F
    X = random_vector(rng, frame)
    a = random_form(rng, frame, rng.randint(0, 3))
    assert lie_derivative(X, a) == interior(X, exterior_d(a)) + exterior_d(interior(X, a))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_lie_of_bracket(seed):
    rng = random.Random(seed)
    X, Y = random_vector(rng, F, 2), random_vector(rng, F, 2)
    a = random_form(rng, F, rng.randint(0, 2))
    Z = random_vector(rng, F, 2)
    XY = vector_bracket(X, Y)
    assert lie_derivative(XY, a) == lie_derivative(X, lie_derivative(Y, a)) - lie_derivative(Y, lie_derivative(X, a))
    assert lie_derivative(XY, Z) == lie_derivative(X, lie_derivative(Y, Z)) - lie_derivative(Y, lie_derivative(X, Z))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_interior_antiderivation(seed):
    rng = random.Random(seed)
    X = random_vector(rng, F)
    p = rng.randint(0, 2)
    a, b = random_form(rng, F, p), random_form(rng, F, rng.randint(0, 2))
    sign = -1 if p % 2 else 1
    assert interior(X, wedge(a, b)) == wedge(interior(X, a), b) + wedge(a, interior(X, b)).scale(sign)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_wedge_graded_commutative_and_associative(seed):
    rng = random.Random(seed)
    p, q = rng.randint(0, 2), rng.randint(0, 2)
    a, b, c = random_form(rng, F, p), random_form(rng, F, q), random_form(rng, F, 1)
    assert wedge(a, b) == wedge(b, a).scale(ScalarExpr((-1) ** (p * q)))
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


def test_zero_form_equals_function():
    assert MixedForm.scalar(F, x * y) == x * y
    assert MixedForm.scalar(F, 0) == 0
    assert not (dx.scale(x) == x)
