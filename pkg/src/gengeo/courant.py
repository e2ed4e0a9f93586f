"""Pairing, B-field transforms, Courant bracket and Dorfman product on T + T*."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .clifford import GSection, as_section
from .scalar import ScalarExpr, ScalarError
from .tensor import (DegreeError, MixedForm, d_function, exterior_d, interior,
                     lie_derivative, vector_bracket)

_ZERO = ScalarExpr(0)
_HALF = ScalarExpr(1) / 2


class NotClosed(ScalarError):
    pass


class CocycleViolation(ScalarError):
    pass


def pairing(u, v) -> ScalarExpr:
    """(X + xi, Y + eta) = 1/2 (xi(Y) + eta(X))."""
    u, v = as_section(u), as_section(v)
    s = _ZERO
    for a in range(u.frame.n):
        if u.x[a] and v.xi[a]:
            s = s + u.x[a] * v.xi[a]
        if v.x[a] and u.xi[a]:
            s = s + v.x[a] * u.xi[a]
    return s * _HALF


def _check_degree(B: MixedForm, deg: int, what: str) -> None:
    if B.degrees() - {deg}:
        raise DegreeError(f"{what} must be a {deg}-form")


def bfield(u, B: MixedForm) -> GSection:
    """X + xi -> X + xi + i_X B."""
    u = as_section(u)
    _check_degree(B, 2, "B-field")
    return GSection(u.frame, u.x, (u.form + interior(u.vector, B)).components())


def _twist_term(u: GSection, v: GSection, H: MixedForm | None) -> MixedForm | None:
    if H is None or H.is_zero():
        return None
    _check_degree(H, 3, "twisting form")
    return interior(v.vector, interior(u.vector, H))


def courant(u, v, H: MixedForm | None = None) -> GSection:
    """Skew Courant bracket, twisted by a closed 3-form H when given.

    [X,Y] + L_X eta - L_Y xi - 1/2 d(i_X eta - i_Y xi) + i_Y i_X H
    """
    u, v = as_section(u), as_section(v)
    X, Y = u.vector, v.vector
    xi, eta = u.form, v.form
    vec = vector_bracket(X, Y)
    form = lie_derivative(X, eta) - lie_derivative(Y, xi)
    contr = interior(X, eta) - interior(Y, xi)
    form = form - exterior_d(contr).scale(_HALF)
    tw = _twist_term(u, v, H)
    if tw is not None:
        form = form + tw
    return GSection(u.frame, vec.components(), form.components())


def dorfman(u, v, H: MixedForm | None = None) -> GSection:
    """Dorfman product [X,Y] + L_X eta - i_Y d xi (+ i_Y i_X H)."""
    u, v = as_section(u), as_section(v)
    X, Y = u.vector, v.vector
    vec = vector_bracket(X, Y)
    form = lie_derivative(X, v.form) - interior(Y, exterior_d(u.form))
    tw = _twist_term(u, v, H)
    if tw is not None:
        form = form + tw
    return GSection(u.frame, vec.components(), form.components())


def exact_section(frame, f) -> GSection:
    """The section df."""
    return GSection(frame, None, d_function(frame, ScalarExpr.coerce(f)).components())


def jacobiator(u, v, w, H: MixedForm | None = None) -> tuple[GSection, GSection]:
    """(sum_cyc [[u,v],w], 1/3 d sum_cyc ([u,v], w)); equal for closed H."""
    u, v, w = as_section(u), as_section(v), as_section(w)
    triples = ((u, v, w), (v, w, u), (w, u, v))
    lhs = GSection(u.frame)
    s = _ZERO
    for a, b, c in triples:
        ab = courant(a, b, H)
        lhs = lhs + courant(ab, c, H)
        s = s + pairing(ab, c)
    rhs = exact_section(u.frame, s).scale(ScalarExpr(1) / 3)
    return lhs, rhs


def twisted_d(phi: MixedForm, H: MixedForm) -> MixedForm:
    """(d + H) phi = d phi + H ^ phi."""
    _check_degree(H, 3, "twisting form")
    if not exterior_d(H).is_zero():
        raise NotClosed("twisting form is not closed")
    return exterior_d(phi) + (H ^ phi)


@dataclass
class TwistData:
    """Local description of a gerbe-type twist on labelled patches.

    ``transitions[(a, b)]`` is the closed 2-form B_ab on the overlap of a and b
    and ``potentials[a]`` the local 2-form F_a with F_b - F_a = B_ab.
    """

    transitions: dict = field(default_factory=dict)
    potentials: dict = field(default_factory=dict)

    def transition(self, a, b) -> MixedForm | None:
        if (a, b) in self.transitions:
            return self.transitions[(a, b)]
        if (b, a) in self.transitions:
            return -self.transitions[(b, a)]
        return None


def twist_check(data: TwistData):
    """Verify the cocycle and potential relations exactly.

    Returns (True, H) with H the common dF, or (True, None) without potentials.
    """
    for (a, b), B in data.transitions.items():
        _check_degree(B, 2, "transition form")
        if not exterior_d(B).is_zero():
            raise NotClosed(f"transition form on ({a},{b}) is not closed")
        if (b, a) in data.transitions and not (B + data.transitions[(b, a)]).is_zero():
            raise CocycleViolation(f"B_{a}{b} + B_{b}{a} != 0")
    labels = sorted({x for k in data.transitions for x in k} | set(data.potentials), key=str)
    for a, b, c in combinations(labels, 3):
        bab, bbc, bca = data.transition(a, b), data.transition(b, c), data.transition(c, a)
        if bab is None or bbc is None or bca is None:
            continue
        if not (bab + bbc + bca).is_zero():
            raise CocycleViolation(f"cocycle fails on ({a},{b},{c})")
    H = None
    for (a, b), B in data.transitions.items():
        Fa, Fb = data.potentials.get(a), data.potentials.get(b)
        if Fa is None or Fb is None:
            continue
        if not (Fb - Fa - B).is_zero():
            raise CocycleViolation(f"F_{b} - F_{a} != B_{a}{b}")
    for a, F in data.potentials.items():
        dF = exterior_d(F)
        if H is None:
            H = dF
        elif not (H - dF).is_zero():
            raise CocycleViolation("local curvatures dF disagree")
    return True, H
