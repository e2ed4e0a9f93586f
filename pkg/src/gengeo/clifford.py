"""Sections of T + T*, their Clifford action on forms, and the Mukai pairing."""

from __future__ import annotations

from math import factorial

from . import linalg
from .scalar import ScalarError, ScalarExpr
from .tensor import (DegreeError, Frame, FrameMismatch, MixedForm, PolyVector,
                     exterior_d, interior, wedge)

_ZERO = ScalarExpr(0)


class GSection:
    """X + xi with X a vector field and xi a one-form, stored by frame components."""

    __slots__ = ("frame", "x", "xi")

    def __init__(self, frame: Frame, x=None, xi=None):
        n = frame.n
        self.frame = frame
        self.x = [ScalarExpr.coerce(v) for v in x] if x is not None else [_ZERO] * n
        self.xi = [ScalarExpr.coerce(v) for v in xi] if xi is not None else [_ZERO] * n
        if len(self.x) != n or len(self.xi) != n:
            raise ValueError("component count does not match frame dimension")

    @classmethod
    def from_parts(cls, vector: PolyVector | None = None, form: MixedForm | None = None) -> "GSection":
        frame = (vector or form).frame
        if vector is not None and vector.degrees() - {1}:
            raise DegreeError("vector part must be a vector field")
        if form is not None and form.degrees() - {1}:
            raise DegreeError("covector part must be a one-form")
        if vector is not None and form is not None and vector.frame is not form.frame:
            raise FrameMismatch("vector and form live in different frames")
        return cls(frame, vector.components() if vector is not None else None,
                   form.components() if form is not None else None)

    @classmethod
    def basis(cls, frame: Frame, k: int) -> "GSection":
        """k < n: the frame vector e_k; k >= n: the coframe element sigma^(k-n)."""
        s = cls(frame)
        if k < frame.n:
            s.x[k] = ScalarExpr(1)
        else:
            s.xi[k - frame.n] = ScalarExpr(1)
        return s

    @property
    def vector(self) -> PolyVector:
        return PolyVector.vector(self.frame, self.x)

    @property
    def form(self) -> MixedForm:
        return MixedForm.one_form(self.frame, self.xi)

    def coords(self) -> list[ScalarExpr]:
        return self.x + self.xi

    @classmethod
    def from_coords(cls, frame: Frame, v) -> "GSection":
        n = frame.n
        return cls(frame, v[:n], v[n:])

    def _check(self, other):
        if not isinstance(other, GSection):
            raise TypeError(f"cannot combine GSection with {type(other).__name__}")
        if other.frame is not self.frame:
            raise FrameMismatch("sections live in different frames")

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        if isinstance(other, PolyVector):
            other = GSection.from_parts(vector=other)
        elif isinstance(other, MixedForm):
            other = GSection.from_parts(form=other)
        self._check(other)
        return GSection(self.frame, [a + b for a, b in zip(self.x, other.x)],
                        [a + b for a, b in zip(self.xi, other.xi)])

    __radd__ = __add__

    def __neg__(self):
        return GSection(self.frame, [-a for a in self.x], [-a for a in self.xi])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "GSection":
        s = ScalarExpr.coerce(s)
        return GSection(self.frame, [s * a for a in self.x], [s * a for a in self.xi])

    def __mul__(self, s):
        if isinstance(s, (GSection, MixedForm, PolyVector)):
            return NotImplemented
        return self.scale(s)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.x) and all(a.is_zero() for a in self.xi)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, GSection):
            return NotImplemented
        if other.frame is not self.frame:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def conjugate(self) -> "GSection":
        return GSection.from_parts(self.vector.conjugate(), self.form.conjugate())

    def map(self, fn) -> "GSection":
        return GSection(self.frame, [fn(a) for a in self.x], [fn(a) for a in self.xi])

    def __str__(self):
        v, f = self.vector, self.form
        if v.is_zero() and f.is_zero():
            return "0"
        if v.is_zero():
            return str(f)
        if f.is_zero():
            return str(v)
        return f"{v} + {f}"

    def __repr__(self):
        return f"GSection({self})"


def as_section(u) -> GSection:
    if isinstance(u, GSection):
        return u
    if isinstance(u, PolyVector):
        return GSection.from_parts(vector=u)
    if isinstance(u, MixedForm):
        return GSection.from_parts(form=u)
    raise TypeError(f"expected a section of T+T*, got {type(u).__name__}")


def clifford_act(u, phi: MixedForm) -> MixedForm:
    """(X + xi) . phi = i_X phi + xi ^ phi."""
    u = as_section(u)
    return interior(u.vector, phi) + wedge(u.form, phi)


def mukai(phi1: MixedForm, phi2: MixedForm) -> MixedForm:
    """Mukai pairing, a top-degree form:

    sum_j (-1)^j (phi1_{2j} ^ phi2_{n-2j} + phi1_{2j+1} ^ phi2_{n-2j-1}).
    """
    n = phi1.frame.n
    total = MixedForm(phi1.frame, {})
    for j in range(n // 2 + 1):
        sign = -1 if j % 2 else 1
        for p in (2 * j, 2 * j + 1):
            q = n - p
            if p > n or q < 0:
                continue
            term = wedge(phi1.part(p), phi2.part(q))
            total = total + (term if sign > 0 else -term)
    return total


def form_exp(B: MixedForm) -> MixedForm:
    """exp(B) for an even form B, a finite sum."""
    n = B.frame.n
    result = MixedForm.scalar(B.frame, 1)
    power = MixedForm.scalar(B.frame, 1)
    for k in range(1, n // 2 + 1):
        power = wedge(power, B)
        if power.is_zero():
            break
        result = result + power.scale(ScalarExpr(1) / factorial(k))
    return result


def spinor_exp_b(B: MixedForm, phi: MixedForm) -> MixedForm:
    """Spinor B-field action phi -> exp(-B) ^ phi."""
    if B.degrees() - {2}:
        raise DegreeError("B-field must be a two-form")
    return wedge(form_exp(-B), phi)


def gen_lie(u, phi):
    """Generalized Lie derivative: d(u.phi) + u.d(phi) on forms, the Dorfman product on sections."""
    u = as_section(u)
    if isinstance(phi, (GSection, PolyVector)):
        from .courant import dorfman
        return dorfman(u, as_section(phi))
    return exterior_d(clifford_act(u, phi)) + clifford_act(u, exterior_d(phi))


class ZeroSpinor(ScalarError):
    pass


def annihilator(phi: MixedForm) -> list[GSection]:
    """Basis of {u : u.phi = 0}, from the exact nullspace of the Clifford action."""
    if phi.is_zero():
        raise ZeroSpinor("the zero form has no annihilator of finite rank")
    frame = phi.frame
    cols = [clifford_act(GSection.basis(frame, k), phi) for k in range(2 * frame.n)]
    keys = sorted({key for c in cols for key in c.terms})
    mat = [[c.terms.get(key, _ZERO) for c in cols] for key in keys]
    basis = linalg.nullspace(mat, 2 * frame.n)
    return [GSection.from_coords(frame, v) for v in basis]


def is_pure(phi: MixedForm) -> bool:
    return len(annihilator(phi)) == phi.frame.n
