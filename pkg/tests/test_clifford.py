import random

import pytest
from hypothesis import given, settings, strategies as st

from gengeo.clifford import (GSection, ZeroSpinor, annihilator, clifford_act, form_exp, gen_lie, is_pure,
                             mukai, spinor_exp_b)
from gengeo.courant import courant, dorfman, pairing
from gengeo.sampling import random_form, random_mixed_form, random_section
from gengeo.scalar import Chart, I
from gengeo.tensor import Frame, MixedForm, PolyVector, exterior_d, lie_derivative, wedge

R2 = Chart("R2c", ["x", "y"])
F2 = Frame.coordinate(R2)
R3 = Chart("R3c", ["x", "y", "z"])
F3 = Frame.coordinate(R3)
R4 = Chart("R4c", ["x1", "y1", "x2", "y2"])
F4 = Frame.coordinate(R4)
C2 = Chart.complex("C2c", ["z1", "z2"])
FC = Frame.coordinate(C2)

seeds = st.integers(0, 10**6)
FRAMES = [F2, F3, F4]


def cf(frame, *idx):
    out = MixedForm.scalar(frame, 1)
    for k in idx:
        out = wedge(out, MixedForm.coframe(frame, k))
    return out


def test_clifford_examples():
    px = GSection.basis(F2, 0)
    dx = GSection.basis(F2, 2)
    assert clifford_act(px, cf(F2, 0, 1)) == cf(F2, 1)
    assert clifford_act(dx, MixedForm.scalar(F2, 1)) == cf(F2, 0)


def test_mukai_example():
    one = MixedForm.scalar(F2, 1)
    vol = cf(F2, 0, 1)
    assert mukai(one + vol, one - vol) == vol.scale(-2)
    assert mukai(one + vol, MixedForm(F2, {})).is_zero()


def test_spinor_b_examples():
    one = MixedForm.scalar(F2, 1)
    B = cf(F2, 0, 1)
    assert spinor_exp_b(B, one) == one - B
    assert spinor_exp_b(B.scale(0), cf(F2, 0)) == cf(F2, 0)


def test_gen_lie_examples():
    rng = random.Random(3)
    phi = random_mixed_form(rng, F3, 2, 2, 0.6)
    px = PolyVector.basis(F3, 0)
    assert gen_lie(px, phi) == lie_derivative(px, phi)
    assert gen_lie(cf(F3, 0), cf(F3, 1)).is_zero()


def test_annihilator_spans_expected_complex_directions():
    from gengeo import linalg
    psi = cf(FC, 0, 1)
    vecs = [u.coords() for u in annihilator(psi)]
    expected = [GSection.basis(FC, k).coords() for k in (2, 3, 4, 5)]
    assert len(vecs) == 4
    assert linalg.rank(vecs + expected) == 4
    assert is_pure(psi)


def test_annihilator_symplectic():
    from gengeo import linalg
    omega = cf(F2, 0, 1)
    psi = form_exp(omega.scale(I))
    vecs = [u.coords() for u in annihilator(psi)]
    assert len(vecs) == 2
    # X - i i_X omega for X = d/dx, d/dy
    expected = [GSection(F2, [1, 0], [0, -I]).coords(), GSection(F2, [0, 1], [I, 0]).coords()]
    assert linalg.rank(vecs + expected) == 2


def test_not_pure():
    phi = MixedForm.scalar(F4, 1) + cf(F4, 0, 1) + cf(F4, 2, 3)
    assert not is_pure(phi)


def test_zero_spinor():
    with pytest.raises(ZeroSpinor):
        annihilator(MixedForm(F3, {}))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_clifford_relation(seed):
    rng = random.Random(seed)
    frame = FRAMES[seed % 3]
    u = random_section(rng, frame, 2, 2)
    phi = random_mixed_form(rng, frame, 1, 1)
    assert clifford_act(u, clifford_act(u, phi)) == phi.scale(pairing(u, u))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_mukai_b_invariance(seed):
    rng = random.Random(seed)
    frame = FRAMES[seed % 3]
    B = random_form(rng, frame, 2, 1, 2)
    p1, p2 = random_mixed_form(rng, frame, 1, 1), random_mixed_form(rng, frame, 1, 1)
    assert mukai(spinor_exp_b(B, p1), spinor_exp_b(B, p2)) == mukai(p1, p2)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_spinor_group_law(seed):
    rng = random.Random(seed)
    frame = FRAMES[seed % 3]
    B1, B2 = random_form(rng, frame, 2, 1), random_form(rng, frame, 2, 1)
    phi = random_mixed_form(rng, frame, 1, 1)
    assert spinor_exp_b(B1, spinor_exp_b(B2, phi)) == spinor_exp_b(B1 + B2, phi)
    assert spinor_exp_b(-B1, spinor_exp_b(B1, phi)) == phi


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_generalized_cartan_formula(seed):
    rng = random.Random(seed)
    frame = FRAMES[seed % 3]
    u = random_section(rng, frame, 2, 2)
    phi = random_mixed_form(rng, frame, 1, 1)
    expected = lie_derivative(u.vector, phi) + wedge(exterior_d(u.form), phi)
    assert gen_lie(u, phi) == expected


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_lie_antisymmetrization_is_twice_courant(seed):
    rng = random.Random(seed)
    frame = FRAMES[seed % 3]
    u, v = random_section(rng, frame, 2, 2), random_section(rng, frame, 2, 2)
    assert gen_lie(u, v) - gen_lie(v, u) == courant(u, v).scale(2)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_module_leibniz(seed):
    rng = random.Random(seed)
    frame = FRAMES[seed % 2]
    u, v = random_section(rng, frame, 1, 2), random_section(rng, frame, 1, 2)
    psi = random_mixed_form(rng, frame, 1, 1)
    lhs = gen_lie(v, clifford_act(u, psi))
    rhs = clifford_act(dorfman(v, u), psi) + clifford_act(u, gen_lie(v, psi))
    assert lhs == rhs


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_annihilator_isotropic(seed):
    rng = random.Random(seed)
    omega = random_form(rng, F2, 2, 1, 2)
    B = random_form(rng, F4, 2, 0, 1)
    for psi in (form_exp(omega.scale(I)), spinor_exp_b(B, cf(F4, 0, 2))):
        basis = annihilator(psi)
        for a in basis:
            for b in basis:
                assert pairing(a, b).is_zero()
