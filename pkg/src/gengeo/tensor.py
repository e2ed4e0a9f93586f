"""Frames, mixed-degree forms and polyvectors with exact coefficients.

Forms and polyvectors are sparse maps from strictly increasing frame index
tuples to scalars.  A frame carries derivation rows (its vectors expressed
in chart partials) and structure functions with [e_a, e_b] = C^c_ab e_c, so
that d(sigma^c) = -1/2 C^c_ab sigma^a ^ sigma^b.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .scalar import Chart, ScalarExpr, ScalarError


class FrameInconsistent(ScalarError):
    pass


class FrameMismatch(ScalarError):
    pass


class DegreeError(ScalarError):
    pass


_ZERO = ScalarExpr(0)


class Frame:
    """A frame e_1..e_n over a chart, with dual coframe sigma^1..sigma^n."""

    def __init__(self, chart: Chart, names: Iterable[str], rows, structure: Mapping | None = None,
                 conj: Iterable[int] | None = None, name: str | None = None,
                 coframe_names: Iterable[str] | None = None, check: bool = True):
        self.chart = chart
        self.name = name or f"frame({chart.name})"
        self.names = tuple(names)
        self.n = len(self.names)
        self.rows = [[ScalarExpr.coerce(x) for x in row] for row in rows]
        if len(self.rows) != self.n or any(len(r) != chart.dim for r in self.rows):
            raise FrameInconsistent("derivation rows do not match frame and chart sizes")
        self.coframe_names = tuple(coframe_names) if coframe_names else tuple(f"co({nm})" for nm in self.names)
        self.structure: dict[tuple[int, int], dict[int, ScalarExpr]] = {}
        for (a, b), coeffs in (structure or {}).items():
            sign = 1
            if a > b:
                a, b, sign = b, a, -1
            if a == b:
                continue
            entry = self.structure.setdefault((a, b), {})
            for c, v in coeffs.items():
                v = ScalarExpr.coerce(v) * sign
                entry[c] = entry.get(c, _ZERO) + v
        self.conj = tuple(conj) if conj is not None else tuple(range(self.n))
        self._dco_cache: dict[int, MixedForm] = {}
        self._dmono_cache: dict[tuple, MixedForm] = {}
        if check:
            self.check_consistency()

    @classmethod
    def coordinate(cls, chart: Chart) -> "Frame":
        n = chart.dim
        rows = [[ScalarExpr(1) if i == j else ScalarExpr(0) for j in range(n)] for i in range(n)]
        conj = [chart.conjugate_position(i) for i in range(n)]
        return cls(chart, [f"p({v})" for v in chart.variables], rows, conj=conj,
                   name=chart.name, coframe_names=[f"d({v})" for v in chart.variables], check=False)

    @property
    def is_coordinate(self) -> bool:
        if self.structure and any(not v.is_zero() for e in self.structure.values() for v in e.values()):
            return False
        return self.n == self.chart.dim and all(
            self.rows[a][i] == (1 if a == i else 0) for a in range(self.n) for i in range(self.n))

    def apply(self, a: int, f: ScalarExpr) -> ScalarExpr:
        """e_a(f)."""
        f = ScalarExpr.coerce(f)
        out = _ZERO
        for i, r in enumerate(self.rows[a]):
            if not r.is_zero():
                out = out + r * f.diff(self.chart.coords[i])
        return out

    def bracket(self, a: int, b: int) -> dict[int, ScalarExpr]:
        if a == b:
            return {}
        if a < b:
            return self.structure.get((a, b), {})
        return {c: -v for c, v in self.structure.get((b, a), {}).items()}

    def check_consistency(self) -> None:
        coords = self.chart.coords
        for a in range(self.n):
            for b in range(a + 1, self.n):
                cab = self.bracket(a, b)
                for i, x in enumerate(coords):
                    lhs = self.apply(a, self.rows[b][i]) - self.apply(b, self.rows[a][i])
                    rhs = sum((v * self.rows[c][i] for c, v in cab.items()), _ZERO)
                    if not (lhs - rhs).is_zero():
                        raise FrameInconsistent(
                            f"[{self.names[a]},{self.names[b]}] disagrees with structure functions on {self.chart.variables[i]}")

    def dcoframe(self, c: int) -> "MixedForm":
        cached = self._dco_cache.get(c)
        if cached is None:
            terms = {}
            for (a, b), coeffs in self.structure.items():
                v = coeffs.get(c)
                if v is not None and not v.is_zero():
                    terms[(a, b)] = -v
            cached = MixedForm(self, terms)
            self._dco_cache[c] = cached
        return cached

    def d_monomial(self, idx: tuple) -> "MixedForm":
        """d(sigma^i1 ^ ... ^ sigma^ik) from the structure functions."""
        cached = self._dmono_cache.get(idx)
        if cached is None:
            total = MixedForm(self, {})
            for k, c in enumerate(idx):
                dc = self.dcoframe(c)
                if dc.is_zero():
                    continue
                left = MixedForm(self, {idx[:k]: ScalarExpr(1)})
                right = MixedForm(self, {idx[k + 1:]: ScalarExpr(1)})
                term = wedge(wedge(left, dc), right)
                total = total + (term if k % 2 == 0 else -term)
            cached = total
            self._dmono_cache[idx] = cached
        return cached

    def __repr__(self):
        return f"Frame({self.name!r}, {list(self.names)!r})"


def su2_frame(chart: Chart, time: str = "t") -> Frame:
    """Left-invariant frame d/dt, X1, X2, X3 of R x SU(2) acting on functions of ``time``.

    [X1, X2] = X3 cyclically, hence d(sigma1) = -sigma2 ^ sigma3.
    """
    t = chart.variables.index(time)
    dim = chart.dim
    rows = [[ScalarExpr(1) if j == t else ScalarExpr(0) for j in range(dim)]]
    rows += [[ScalarExpr(0)] * dim for _ in range(3)]
    structure = {(1, 2): {3: 1}, (2, 3): {1: 1}, (3, 1): {2: 1}}
    return Frame(chart, [f"p({time})", "X1", "X2", "X3"], rows, structure, name="su2",
                 coframe_names=[f"d({time})", "co(X1)", "co(X2)", "co(X3)"])


def _merge(a: tuple, b: tuple):
    """Sign and sorted union of two increasing index tuples; (0, None) on overlap."""
    if set(a) & set(b):
        return 0, None
    seq = list(a) + list(b)
    inv = 0
    for x in a:
        for y in b:
            if x > y:
                inv += 1
    return (-1 if inv % 2 else 1), tuple(sorted(seq))


class _Multi:
    __slots__ = ("frame", "terms")
    kind = "multi"

    def __init__(self, frame: Frame, terms: Mapping | None = None):
        self.frame = frame
        clean = {}
        for k, v in (terms or {}).items():
            k = tuple(k)
            if list(k) != sorted(set(k)):
                sign, nk = _sort_sign(k)
                if nk is None:
                    continue
                v = ScalarExpr.coerce(v) * sign
                k = nk
            v = ScalarExpr.coerce(v)
            if k in clean:
                v = clean[k] + v
            if v.is_zero():
                clean.pop(k, None)
            else:
                clean[k] = v
        self.terms = clean

    @classmethod
    def _new(cls, frame, terms):
        obj = cls.__new__(cls)
        obj.frame = frame
        obj.terms = terms
        return obj

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.frame is not self.frame:
            raise FrameMismatch("operands live in different frames")

    def __add__(self, other):
        if isinstance(other, (int, ScalarExpr)) and not isinstance(other, bool):
            other = type(self)(self.frame, {(): other})
        if not isinstance(other, _Multi):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k)
            s = v if s is None else s + v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return type(self)._new(self.frame, out)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._new(self.frame, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "_Multi":
        s = ScalarExpr.coerce(s)
        if s.is_zero():
            return type(self)._new(self.frame, {})
        out = {}
        for k, v in self.terms.items():
            p = v * s
            if not p.is_zero():
                out[k] = p
        return type(self)._new(self.frame, out)

    def __mul__(self, other):
        if isinstance(other, _Multi):
            return NotImplemented
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(ScalarExpr(1) / ScalarExpr.coerce(other))

    def __xor__(self, other):
        return wedge(self, other)

    def __rxor__(self, other):
        return wedge(other, self)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ScalarExpr)):
            # degree-0 elements are functions
            if set(self.terms) - {()}:
                return False
            return (self.terms.get((), ScalarExpr(0)) - ScalarExpr.coerce(other)).is_zero()
        if not isinstance(other, _Multi) or type(other) is not type(self):
            return NotImplemented
        if other.frame is not self.frame:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def __getitem__(self, idx) -> ScalarExpr:
        if isinstance(idx, int):
            idx = (idx,)
        sign, key = _sort_sign(tuple(idx))
        if key is None:
            return _ZERO
        v = self.terms.get(key)
        return _ZERO if v is None else v * sign

    def part(self, degree: int):
        return type(self)._new(self.frame, {k: v for k, v in self.terms.items() if len(k) == degree})

    def degrees(self) -> set[int]:
        return {len(k) for k in self.terms}

    def components(self) -> list[ScalarExpr]:
        """Coefficients of a degree-one element, indexed by frame position."""
        return [self.terms.get((a,), _ZERO) for a in range(self.frame.n)]

    def map(self, fn) -> "_Multi":
        return type(self)(self.frame, {k: fn(v) for k, v in self.terms.items()})

    def conjugate(self) -> "_Multi":
        conj = self.frame.conj
        out = {}
        for k, v in self.terms.items():
            nk = tuple(conj[i] for i in k)
            sign, sk = _sort_sign(nk)
            out[sk] = v.conjugate() * sign
        return type(self)(self.frame, out)

    def __repr__(self):
        return f"{type(self).__name__}({format_multi(self)})"

    def __str__(self):
        return format_multi(self)


class MixedForm(_Multi):
    """Sum of differential forms of possibly different degrees."""

    __slots__ = ()
    kind = "form"

    @classmethod
    def one_form(cls, frame: Frame, comps) -> "MixedForm":
        return cls(frame, {(a,): c for a, c in enumerate(comps)})

    @classmethod
    def scalar(cls, frame: Frame, f) -> "MixedForm":
        return cls(frame, {(): f})

    @classmethod
    def coframe(cls, frame: Frame, a: int) -> "MixedForm":
        return cls(frame, {(a,): 1})


class PolyVector(_Multi):
    """Sum of multivector fields of possibly different degrees."""

    __slots__ = ()
    kind = "polyvector"

    @classmethod
    def vector(cls, frame: Frame, comps) -> "PolyVector":
        return cls(frame, {(a,): c for a, c in enumerate(comps)})

    @classmethod
    def basis(cls, frame: Frame, a: int) -> "PolyVector":
        return cls(frame, {(a,): 1})

    def __call__(self, f) -> ScalarExpr:
        return apply_vector(self, f)


def _sort_sign(idx: tuple):
    if len(set(idx)) != len(idx):
        return 0, None
    lst = list(idx)
    sign = 1
    for i in range(len(lst)):
        for j in range(len(lst) - 1 - i):
            if lst[j] > lst[j + 1]:
                lst[j], lst[j + 1] = lst[j + 1], lst[j]
                sign = -sign
    return sign, tuple(lst)


def format_multi(a: _Multi) -> str:
    if a.is_zero():
        return "0"
    names = a.frame.coframe_names if isinstance(a, MixedForm) else a.frame.names
    parts = []
    for k in sorted(a.terms, key=lambda t: (len(t), t)):
        v = a.terms[k]
        basis = "^".join(names[i] for i in k)
        coeff = v.to_str()
        if not basis:
            parts.append(f"({coeff})")
        elif coeff == "1":
            parts.append(basis)
        else:
            parts.append(f"({coeff})*{basis}")
    return " + ".join(parts)


# -- operations ---------------------------------------------------------------

def wedge(a, b):
    if isinstance(a, (int, ScalarExpr)):
        return b.scale(a)
    if isinstance(b, (int, ScalarExpr)):
        return a.scale(b)
    a._check(b)
    out: dict[tuple, ScalarExpr] = {}
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            sign, k = _merge(ka, kb)
            if k is None:
                continue
            p = va * vb
            if sign < 0:
                p = -p
            s = out.get(k)
            out[k] = p if s is None else s + p
    return type(a)._new(a.frame, {k: v for k, v in out.items() if not v.is_zero()})


def _contract_one(j: int, form_terms: dict) -> dict:
    out: dict[tuple, ScalarExpr] = {}
    for k, v in form_terms.items():
        if j not in k:
            continue
        pos = k.index(j)
        nk = k[:pos] + k[pos + 1:]
        p = v if pos % 2 == 0 else -v
        s = out.get(nk)
        out[nk] = p if s is None else s + p
    return {k: v for k, v in out.items() if not v.is_zero()}


def interior(X: PolyVector, a: MixedForm) -> MixedForm:
    """i_X a; a frame polyvector e_j1^...^e_jp contracts its last factor first."""
    if X.frame is not a.frame:
        raise FrameMismatch("operands live in different frames")
    total: dict[tuple, ScalarExpr] = {}
    for kx, vx in X.terms.items():
        cur = a.terms
        for j in reversed(kx):
            cur = _contract_one(j, cur)
            if not cur:
                break
        for k, v in cur.items():
            p = v * vx
            s = total.get(k)
            total[k] = p if s is None else s + p
    return MixedForm._new(a.frame, {k: v for k, v in total.items() if not v.is_zero()})


def apply_vector(X: PolyVector, f) -> ScalarExpr:
    """X(f) for a vector field X."""
    f = ScalarExpr.coerce(f)
    out = _ZERO
    for k, v in X.terms.items():
        if len(k) != 1:
            raise DegreeError("only vector fields act on functions")
        out = out + v * X.frame.apply(k[0], f)
    return out


def d_function(frame: Frame, f) -> MixedForm:
    f = ScalarExpr.coerce(f)
    return MixedForm._new(frame, {(a,): v for a in range(frame.n) if not (v := frame.apply(a, f)).is_zero()})


def exterior_d(a: MixedForm) -> MixedForm:
    frame = a.frame
    total = MixedForm._new(frame, {})
    for k, v in a.terms.items():
        df = d_function(frame, v)
        if not df.is_zero():
            total = total + wedge(df, MixedForm._new(frame, {k: ScalarExpr(1)}))
        if k:
            dm = frame.d_monomial(k)
            if not dm.is_zero():
                total = total + dm.scale(v)
    return total


def vector_bracket(X: PolyVector, Y: PolyVector) -> PolyVector:
    """Lie bracket of vector fields in the frame."""
    frame = X.frame
    n = frame.n
    xs, ys = X.components(), Y.components()
    out = [_ZERO] * n
    for a in range(n):
        if xs[a].is_zero():
            continue
        for b in range(n):
            if not ys[b].is_zero():
                out[b] = out[b] + xs[a] * frame.apply(a, ys[b])
    for b in range(n):
        if ys[b].is_zero():
            continue
        for a in range(n):
            if not xs[a].is_zero():
                out[a] = out[a] - ys[b] * frame.apply(b, xs[a])
    for a in range(n):
        if xs[a].is_zero():
            continue
        for b in range(n):
            if ys[b].is_zero() or a == b:
                continue
            for c, v in frame.bracket(a, b).items():
                out[c] = out[c] + xs[a] * ys[b] * v
    return PolyVector.vector(frame, out)


def lie_derivative(X: PolyVector, a):
    """Lie derivative along a vector field of a form (Cartan) or a polyvector."""
    if X.degrees() - {1}:
        raise DegreeError("Lie derivative needs a vector field")
    if isinstance(a, MixedForm):
        return interior(X, exterior_d(a)) + exterior_d(interior(X, a))
    if isinstance(a, PolyVector):
        frame = a.frame
        total = PolyVector._new(frame, {})
        for k, v in a.terms.items():
            if not k:
                total = total + PolyVector._new(frame, {(): apply_vector(X, v)})
                continue
            xv = apply_vector(X, v)
            if not xv.is_zero():
                total = total + PolyVector._new(frame, {k: xv})
            for pos, j in enumerate(k):
                bj = vector_bracket(X, PolyVector.basis(frame, j))
                left = PolyVector._new(frame, {k[:pos]: ScalarExpr(1)})
                right = PolyVector._new(frame, {k[pos + 1:]: ScalarExpr(1)})
                total = total + wedge(wedge(left, bj), right).scale(v)
        return total
    raise TypeError("Lie derivative of unsupported object")
