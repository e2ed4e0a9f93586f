import random

import pytest
from hypothesis import given, settings, strategies as st

from gengeo.clifford import GSection
from gengeo.courant import (CocycleViolation, NotClosed, TwistData, bfield, courant, dorfman, exact_section,
                            jacobiator, pairing, twist_check, twisted_d)
from gengeo.genmetric import GenMetric
from gengeo.sampling import random_closed_form, random_form, random_mixed_form, random_poly, random_section
from gengeo.scalar import Chart
from gengeo.tensor import Frame, MixedForm, PolyVector, exterior_d, interior, su2_frame, wedge

R = Chart("R3k", ["x", "y", "z"])
x, y, z = R.coords
F = Frame.coordinate(R)
dx, dy, dz = (MixedForm.coframe(F, k) for k in range(3))
VOL = wedge(wedge(dx, dy), dz)

B9 = Chart("B9k", ["t"])
fa, fb, fc = (B9.function(n, "t") for n in "abc")
SU2 = su2_frame(B9)

seeds = st.integers(0, 10**6)


def sec(frame, vec=None, form=None):
    n = frame.n
    return GSection(frame, vec or [0] * n, form or [0] * n)


def test_pairing_examples():
    u = sec(F, [1, 0, 0], [1, 0, 0])
    assert pairing(u, u) == 1
    assert pairing(sec(F, [1, 0, 0]), sec(F, None, [1, 0, 0])) * 2 == 1
    assert pairing(sec(F, [1, 0, 0]), sec(F, [0, 1, 0])).is_zero()


def test_bfield_examples():
    B = wedge(dx, dy)
    assert bfield(sec(F, [1, 0, 0]), B) == sec(F, [1, 0, 0], [0, 1, 0])
    assert bfield(sec(F, None, [0, 0, 1]), B) == sec(F, None, [0, 0, 1])


def test_courant_examples():
    assert courant(sec(F, [1, 0, 0]), sec(F, [0, 1, 0])).is_zero()
    a, b, c = fa.expr, fb.expr, fc.expr
    g = [[(a * b * c) ** 2, 0, 0, 0], [0, a * a, 0, 0], [0, 0, b * b, 0], [0, 0, 0, c * c]]
    m = GenMetric(SU2, g)
    X1m = m.lift([0, 1, 0, 0], -1)
    assert X1m == sec(SU2, [0, 1, 0, 0], [0, -a * a, 0, 0])
    dtp = m.lift([1, 0, 0, 0], 1)
    ap = fa.derivative()
    assert courant(X1m, dtp) == sec(SU2, None, [0, 2 * a * ap, 0, 0])
    assert courant(X1m, m.lift([0, 1, 0, 0], 1)) == sec(SU2, None, [-2 * a * ap, 0, 0, 0])


def test_dorfman_example():
    assert dorfman(sec(F, [1, 0, 0]), sec(F, None, [0, 1, 0])).is_zero()


def test_jacobiator_trivial_cases():
    rng = random.Random(1)
    vs = [GSection.from_parts(vector=PolyVector.vector(F, [random_poly(rng, R.coords) for _ in range(3)]))
          for _ in range(3)]
    lhs, rhs = jacobiator(*vs)
    assert lhs.is_zero() and rhs.is_zero()
    fs = [exact_section(F, random_poly(rng, R.coords)) for _ in range(3)]
    lhs, rhs = jacobiator(*fs)
    assert lhs.is_zero() and rhs.is_zero()


def test_twisted_d_examples():
    one = MixedForm.scalar(F, 1)
    assert twisted_d(one, VOL) == VOL
    rng = random.Random(2)
    phi = random_mixed_form(rng, F, 2, 2)
    assert twisted_d(phi, MixedForm(F, {})) == exterior_d(phi)
    R4 = Chart("R4k", ["x1", "x2", "x3", "x4"])
    F4 = Frame.coordinate(R4)
    H = wedge(wedge(MixedForm.coframe(F4, 0), MixedForm.coframe(F4, 1)), MixedForm.coframe(F4, 2))
    with pytest.raises(NotClosed):
        twisted_d(MixedForm.scalar(F4, 1), H.scale(R4["x4"]))


def test_twist_check_examples():
    data = TwistData(transitions={}, potentials={"U": wedge(dy, dz).scale(x)})
    assert twist_check(data) == (True, VOL)
    A = {("U", "V"): dx.scale(y * z), ("V", "W"): dy.scale(x), ("U", "W"): dz.scale(x * y)}
    trans = {k: exterior_d(v) for k, v in A.items()}
    trans[("U", "W")] = trans[("U", "V")] + trans[("V", "W")]
    F_U = wedge(dy, dz).scale(x)
    pots = {"U": F_U, "V": F_U + trans[("U", "V")], "W": F_U + trans[("U", "W")]}
    assert twist_check(TwistData(trans, pots)) == (True, VOL)
    assert twist_check(TwistData(trans, {})) == (True, None)
    bad = dict(trans)
    bad[("V", "W")] = -bad[("V", "W")]
    with pytest.raises(CocycleViolation):
        twist_check(TwistData(bad, pots))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_pairing_preserved_by_bfield(seed):
    rng = random.Random(seed)
    u, v = random_section(rng, F), random_section(rng, F)
    B = random_form(rng, F, 2)
    assert pairing(bfield(u, B), bfield(v, B)) == pairing(u, v)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_closed_b_equivariance_and_defect(seed):
    rng = random.Random(seed)
    u, v = random_section(rng, F), random_section(rng, F)
    B = random_closed_form(rng, F, 2, 1)
    assert courant(bfield(u, B), bfield(v, B)) == bfield(courant(u, v), B)
    B2 = random_form(rng, F, 2, 2)
    defect = courant(bfield(u, B2), bfield(v, B2)) - bfield(courant(u, v), B2)
    expected = interior(v.vector, interior(u.vector, exterior_d(B2)))
    assert defect == GSection.from_parts(form=expected)


@settings(max_examples=25, deadline=None)
@given(seeds, st.booleans())
def test_cour1(seed, twisted):
    rng = random.Random(seed)
    frame = SU2 if seed % 4 == 0 else F
    u, v = random_section(rng, frame), random_section(rng, frame)
    H = random_closed_form(rng, frame, 3, 1) if twisted else None
    f = random_poly(rng, frame.chart.coords, 2)
    lhs = courant(u, v.scale(f), H)
    rhs = courant(u, v, H).scale(f) + v.scale(u.vector(f)) - exact_section(frame, f).scale(pairing(u, v))
    assert lhs == rhs


@settings(max_examples=25, deadline=None)
@given(seeds, st.booleans())
def test_cour2(seed, twisted):
    rng = random.Random(seed)
    frame = SU2 if seed % 4 == 0 else F
    u, v, w = (random_section(rng, frame) for _ in range(3))
    H = random_closed_form(rng, frame, 3, 1) if twisted else None
    lhs = u.vector(pairing(v, w))
    a = courant(u, v, H) + exact_section(frame, pairing(u, v))
    b = courant(u, w, H) + exact_section(frame, pairing(u, w))
    assert lhs == pairing(a, w) + pairing(v, b)


@settings(max_examples=25, deadline=None)
@given(seeds, st.booleans())
def test_dorfman_identities(seed, twisted):
    rng = random.Random(seed)
    frame = SU2 if seed % 4 == 0 else F
    u, v, w = (random_section(rng, frame) for _ in range(3))
    H = random_closed_form(rng, frame, 3, 1) if twisted else None
    uv, vu = dorfman(u, v, H), dorfman(v, u, H)
    assert uv - vu == courant(u, v, H).scale(2)
    assert uv + vu == exact_section(frame, pairing(u, v)).scale(2)
    assert dorfman(u, dorfman(v, w, H), H) == dorfman(uv, w, H) + dorfman(v, dorfman(u, w, H), H)


@settings(max_examples=25, deadline=None)
@given(seeds, st.booleans())
def test_jacobiator(seed, twisted):
    rng = random.Random(seed)
    frame = SU2 if seed % 4 == 0 else F
    u, v, w = (random_section(rng, frame) for _ in range(3))
    H = random_closed_form(rng, frame, 3, 1) if twisted else None
    lhs, rhs = jacobiator(u, v, w, H)
    assert lhs == rhs


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_splitting_equivalence(seed):
    rng = random.Random(seed)
    Fpot = random_form(rng, F, 2, 2)
    H = exterior_d(Fpot)
    u, v = random_section(rng, F), random_section(rng, F)
    assert courant(bfield(u, Fpot), bfield(v, Fpot)) == bfield(courant(u, v, H), Fpot)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_twisted_d_nilpotent(seed):
    rng = random.Random(seed)
    H = random_closed_form(rng, F, 3, 1)
    phi = random_mixed_form(rng, F, 2, 2)
    assert twisted_d(twisted_d(phi, H), H).is_zero()
