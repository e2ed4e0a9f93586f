"""Exact scalars: rational functions with Gaussian-rational coefficients.

A scalar is stored as a pair (re, im) of reduced fractions over QQ in a
sympy sparse fraction field.  Since i is algebraic of degree two over any
rational function field, the pair representation is canonical and avoids
gcd computations over QQ<i>, which are far slower in sympy.

Chart variables and function-symbol atoms are generators of one global
field that only ever grows; elements built in a smaller field are lifted by
zero-padding their exponent vectors.  Complex-paired variables (z, zb) are
independent generators related only through conjugation.
"""

from __future__ import annotations

import itertools
import threading
from fractions import Fraction
from typing import Iterable, Mapping

import sympy
from sympy.polys.domains import QQ
from sympy.polys.fields import FracField
from sympy.polys.orderings import lex


class ScalarError(ValueError):
    pass


class UnknownVariable(ScalarError):
    pass


class MultiArgumentFunction(ScalarError):
    pass


class DivisionByZero(ZeroDivisionError):
    pass


class _Atom:
    __slots__ = ("name", "chart", "kind", "conj", "arg", "derivative")

    def __init__(self, name, chart, kind, arg=None):
        self.name = name
        self.chart = chart
        self.kind = kind  # "unit", "var" or "fn"
        self.conj = None
        self.arg = arg
        self.derivative = None


class _Registry:
    def __init__(self):
        self.lock = threading.RLock()
        self.atoms: list[_Atom] = []
        self.keys: dict[tuple, int] = {}
        self._fields: dict[int, FracField] = {}
        self._perms: dict[int, tuple] = {}
        unit = _Atom("_unit", None, "unit")
        unit.conj = 0
        self.atoms.append(unit)

    def add(self, atom: _Atom) -> int:
        with self.lock:
            key = (atom.chart, atom.name)
            if key in self.keys:
                return self.keys[key]
            self.atoms.append(atom)
            idx = len(self.atoms) - 1
            self.keys[key] = idx
            return idx

    def field(self, k: int | None = None) -> FracField:
        with self.lock:
            if k is None:
                k = len(self.atoms)
            K = self._fields.get(k)
            if K is None:
                K = FracField(sympy.symbols(f"g0:{k}"), QQ, lex)
                self._fields[k] = K
            return K

    def conj_perm(self, k: int) -> tuple:
        perm = self._perms.get(k)
        if perm is None:
            perm = tuple(self.atoms[i].conj for i in range(k))
            self._perms[k] = perm
        return perm


_REG = _Registry()


def _lift(e, K):
    F = e.field
    if F is K:
        return e
    pad = (0,) * (K.ngens - F.ngens)
    R = K.ring
    num = R({m + pad: c for m, c in e.numer.items()})
    den = R({m + pad: c for m, c in e.denom.items()})
    return K.raw_new(num, den)


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if v != int(v):
            raise ScalarError(f"inexact float {v!r} is not accepted; use Fraction")
        return Fraction(int(v))
    raise TypeError(f"cannot convert {type(v).__name__} to an exact number")


class ScalarExpr:
    """Exact rational function over Q(i) in chart variables and function atoms."""

    __slots__ = ("_re", "_im")

    def __init__(self, value=0, imag=0):
        if isinstance(value, ScalarExpr):
            self._re, self._im = value._re, value._im
            return
        if isinstance(value, complex):
            value, imag = value.real, value.imag
        K = _REG.field(1)
        self._re = K(QQ(*_frac_pair(_to_fraction(value))))
        self._im = K(QQ(*_frac_pair(_to_fraction(imag))))

    @classmethod
    def _raw(cls, re, im):
        obj = object.__new__(cls)
        obj._re = re
        obj._im = im
        return obj

    @classmethod
    def _atom(cls, idx: int) -> "ScalarExpr":
        K = _REG.field(idx + 1)
        return cls._raw(K.gens[idx], K.zero)

    @staticmethod
    def coerce(v) -> "ScalarExpr":
        if isinstance(v, ScalarExpr):
            return v
        return ScalarExpr(v)

    # -- arithmetic -------------------------------------------------------
    def _align(self, other):
        a, b = self._re.field, other._re.field
        if a is b:
            return self._re, self._im, other._re, other._im
        K = a if a.ngens >= b.ngens else b
        return (_lift(self._re, K), _lift(self._im, K),
                _lift(other._re, K), _lift(other._im, K))

    def __add__(self, other):
        if not isinstance(other, ScalarExpr):
            try:
                other = ScalarExpr(other)
            except TypeError:
                return NotImplemented
        ar, ai, br, bi = self._align(other)
        return ScalarExpr._raw(ar + br, ai + bi)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr._raw(-self._re, -self._im)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if not isinstance(other, ScalarExpr):
            try:
                other = ScalarExpr(other)
            except TypeError:
                return NotImplemented
        ar, ai, br, bi = self._align(other)
        return ScalarExpr._raw(ar - br, ai - bi)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if not isinstance(other, ScalarExpr):
            try:
                other = ScalarExpr(other)
            except TypeError:
                return NotImplemented
        ar, ai, br, bi = self._align(other)
        if not ai:
            if not bi:
                return ScalarExpr._raw(ar * br, bi)
            return ScalarExpr._raw(ar * br, ar * bi)
        if not bi:
            return ScalarExpr._raw(ar * br, ai * br)
        return ScalarExpr._raw(ar * br - ai * bi, ar * bi + ai * br)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, ScalarExpr):
            try:
                other = ScalarExpr(other)
            except TypeError:
                return NotImplemented
        if other.is_zero():
            raise DivisionByZero("division by an expression that is identically zero")
        ar, ai, br, bi = self._align(other)
        if not bi:
            return ScalarExpr._raw(ar / br, ai / br)
        den = br * br + bi * bi
        return ScalarExpr._raw((ar * br + ai * bi) / den, (ai * br - ar * bi) / den)

    def __rtruediv__(self, other):
        return ScalarExpr(other) / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ScalarExpr(1) / (self ** (-n))
        result = ScalarExpr(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- predicates and comparison -----------------------------------------
    def is_zero(self) -> bool:
        return not self._re and not self._im

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, ScalarExpr):
            try:
                other = ScalarExpr(other)
            except (TypeError, ScalarError):
                return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((_canonical_key(self._re), _canonical_key(self._im)))

    def is_real(self) -> bool:
        """True when the imaginary coefficient part vanishes (formal test)."""
        return not self._im

    def is_constant(self) -> bool:
        return not self.atoms()

    def is_polynomial(self) -> bool:
        return self._re.denom.is_ground and self._im.denom.is_ground

    # -- structure ----------------------------------------------------------
    def atoms(self) -> set[int]:
        out = set()
        for part in (self._re, self._im):
            for p in (part.numer, part.denom):
                for m in p.keys():
                    for i, e in enumerate(m):
                        if e:
                            out.add(i)
        return out

    def atom_names(self) -> set[str]:
        return {_REG.atoms[i].name for i in self.atoms()}

    def real_part(self) -> "ScalarExpr":
        """Gaussian real part of the coefficients (chart variables stay formal)."""
        return ScalarExpr._raw(self._re, self._re.field.zero)

    def imag_part(self) -> "ScalarExpr":
        return ScalarExpr._raw(self._im, self._im.field.zero)

    def conjugate(self) -> "ScalarExpr":
        K = _REG.field()
        re, im = _lift(self._re, K), _lift(self._im, K)
        perm = _REG.conj_perm(K.ngens)
        return ScalarExpr._raw(_permute(re, perm), -_permute(im, perm))

    def constant_value(self) -> tuple[Fraction, Fraction]:
        if not self.is_constant():
            raise ScalarError(f"{self} is not a constant")
        return _frac_const(self._re), _frac_const(self._im)

    def diff(self, var: "ScalarExpr") -> "ScalarExpr":
        """Partial derivative by a chart variable, applying the chain rule to function atoms."""
        idx = _var_index(var)
        fns = [j for j in self.atoms() if _REG.atoms[j].kind == "fn" and _REG.atoms[j].arg == idx]
        ders = {j: _derivative_of(j) for j in fns}
        K = _REG.field()
        re, im = _lift(self._re, K), _lift(self._im, K)
        out = ScalarExpr._raw(_partial(re, idx), _partial(im, idx))
        for j, dj in ders.items():
            pj = ScalarExpr._raw(_partial(re, j), _partial(im, j))
            out = out + pj * dj
        return out

    def subs(self, mapping: Mapping["ScalarExpr", "ScalarExpr"]) -> "ScalarExpr":
        """Substitute expressions for atoms (keys are atom expressions)."""
        table = {_var_index(k, allow_fn=True): ScalarExpr.coerce(v) for k, v in mapping.items()}
        re = _subs_frac(self._re, table)
        im = _subs_frac(self._im, table)
        return re + ScalarExpr(0, 1) * im

    def evaluate(self, values: Mapping) -> complex:
        """Numeric value; keys are atom names or atom expressions.

        A missing conjugate partner takes the complex conjugate of the given
        value.
        """
        num = {}
        for k, v in values.items():
            idx = _var_index(k, allow_fn=True) if isinstance(k, ScalarExpr) else _name_index(k, self)
            num[idx] = complex(v)
        for idx in list(num):
            c = _REG.atoms[idx].conj
            if c is not None and c not in num:
                num[c] = num[idx].conjugate()
        missing = [i for i in self.atoms() if i not in num]
        if missing:
            names = ", ".join(sorted(_REG.atoms[i].name for i in missing))
            raise UnknownVariable(f"no value supplied for {names}")
        re = _eval_frac(self._re, num)
        im = _eval_frac(self._im, num)
        return re + 1j * im

    def coefficients(self, var: "ScalarExpr") -> dict[int, "ScalarExpr"]:
        """Coefficients of a polynomial in ``var`` (denominators free of ``var``)."""
        idx = _var_index(var, allow_fn=True)
        out: dict[int, ScalarExpr] = {}
        for part, unit in ((self._re, ScalarExpr(1)), (self._im, ScalarExpr(0, 1))):
            if any(len(m) > idx and m[idx] for m in part.denom.keys()):
                raise ScalarError("expression is not polynomial in the given variable")
            den = ScalarExpr._raw(part.field(part.denom), part.field.zero)
            groups: dict[int, dict] = {}
            for m, c in part.numer.items():
                e = m[idx] if len(m) > idx else 0
                mm = m[:idx] + (0,) + m[idx + 1:] if len(m) > idx else m
                groups.setdefault(e, {})[mm] = c
            for e, terms in groups.items():
                coeff = ScalarExpr._raw(part.field(part.field.ring(terms)), part.field.zero) / den
                out[e] = out.get(e, ScalarExpr(0)) + coeff * unit
        return {e: c for e, c in out.items() if not c.is_zero()}

    def degree(self, var: "ScalarExpr") -> int:
        """Degree in ``var``; -1 for the zero polynomial."""
        cs = self.coefficients(var)
        return max(cs) if cs else -1

    # -- printing -----------------------------------------------------------
    def to_str(self, style: str = "script") -> str:
        re = _frac_str(self._re, style)
        im = _frac_str(self._im, style)
        if im == "0":
            return re
        imag = "I" if im == "1" else ("-I" if im == "-1" else f"I*({im})")
        if re == "0":
            return imag
        return f"{re} + {imag}"

    def __str__(self):
        return self.to_str("script")

    def __repr__(self):
        return f"ScalarExpr({self.to_str('python')})"



# -- helpers -----------------------------------------------------------------

def _frac_pair(f: Fraction):
    return f.numerator, f.denominator


def _q(c) -> Fraction:
    return Fraction(int(QQ.numer(c)), int(QQ.denom(c)))


def _frac_const(e) -> Fraction:
    n = e.numer.LC if e.numer else QQ(0)
    return _q(n) / _q(e.denom.LC)


def _canonical_key(e):
    num, den = e.numer, e.denom
    lc = den.LC
    if lc != 1:
        num = num.quo_ground(lc)
        den = den.quo_ground(lc)
    strip = lambda p: frozenset((tuple(_rstrip(m)), c) for m, c in p.items())
    return strip(num), strip(den)


def _rstrip(m):
    m = list(m)
    while m and m[-1] == 0:
        m.pop()
    return m


def _permute(e, perm):
    R = e.field.ring

    def pp(p):
        out = {}
        for m, c in p.items():
            nm = [0] * len(m)
            for i, x in enumerate(m):
                if x:
                    nm[perm[i]] = x
            out[tuple(nm)] = c
        return R(out)

    return e.field.raw_new(pp(e.numer), pp(e.denom))


def _partial(e, idx):
    if idx >= e.field.ngens:
        return e.field.zero
    n, d = e.numer, e.denom
    dn = n.diff(idx)
    if d.is_ground:
        return e.field.new(dn, d)
    dd = d.diff(idx)
    return e.field.new(dn * d - n * dd, d * d)


def _subs_poly(p, table):
    total = ScalarExpr(0)
    for m, c in p.items():
        term = ScalarExpr(_q(c))
        for i, x in enumerate(m):
            if x:
                base = table.get(i)
                if base is None:
                    base = ScalarExpr._atom(i)
                term = term * base ** x
        total = total + term
    return total


def _subs_frac(e, table):
    return _subs_poly(e.numer, table) / _subs_poly(e.denom, table)


def _eval_poly(p, num):
    total = 0j
    for m, c in p.items():
        term = complex(float(QQ.to_sympy(c)))
        for i, x in enumerate(m):
            if x:
                term *= num[i] ** x
        total += term
    return total


def _eval_frac(e, num):
    d = _eval_poly(e.denom, num)
    if d == 0:
        raise DivisionByZero("denominator vanishes at the sample point")
    return _eval_poly(e.numer, num) / d


def _poly_str(p, style):
    if not p:
        return "0"
    terms = []
    for m, c in sorted(p.items(), key=lambda t: t[0], reverse=True):
        factors = []
        for i, x in enumerate(m):
            if not x:
                continue
            name = _REG.atoms[i].name
            if x == 1:
                factors.append(name)
            elif style == "python":
                factors.append(f"{name}**{x}")
            else:
                factors.append(f"pow({name},{x})")
        q = _q(c)
        sign = "-" if q < 0 else "+"
        q = abs(q)
        if not factors:
            body = str(q)
        elif q == 1:
            body = "*".join(factors)
        else:
            body = f"{q}*" + "*".join(factors) if q.denominator == 1 else f"({q})*" + "*".join(factors)
        terms.append((sign, body))
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def _frac_str(e, style):
    num = _poly_str(e.numer, style)
    if e.denom.is_ground and e.denom.LC == 1:
        return num
    den = _poly_str(e.denom, style)
    sign = ""
    if len(e.numer) > 1:
        num = f"({num})"
    elif num.startswith("-"):
        sign, num = "-", num[1:]
    if len(e.denom) > 1 or "*" in den or "/" in den:
        den = f"({den})"
    return f"{sign}{num}/{den}"


def _var_index(var, allow_fn: bool = False) -> int:
    if not isinstance(var, ScalarExpr):
        raise TypeError("expected an atom expression")
    atoms = var.atoms()
    if len(atoms) != 1 or var._im or not var._re.denom.is_ground:
        raise UnknownVariable(f"{var} is not a single variable")
    (idx,) = atoms
    m = ScalarExpr._atom(idx)
    if not (var - m).is_zero():
        raise UnknownVariable(f"{var} is not a single variable")
    kind = _REG.atoms[idx].kind
    if kind != "var" and not (allow_fn and kind == "fn"):
        raise UnknownVariable(f"{var} is not a chart variable")
    return idx


def _name_index(name: str, expr: ScalarExpr) -> int:
    hits = [i for i in expr.atoms() if _REG.atoms[i].name == name]
    if hits:
        return hits[0]
    for i, a in enumerate(_REG.atoms):
        if a.name == name:
            return i
    raise UnknownVariable(f"unknown variable {name!r}")


def _derivative_of(idx: int) -> ScalarExpr:
    with _REG.lock:
        atom = _REG.atoms[idx]
        d = atom.derivative
        if isinstance(d, ScalarExpr):
            return d
        name = d if isinstance(d, str) else atom.name + "'"
        new = _Atom(name, atom.chart, "fn", atom.arg)
        j = _REG.add(new)
        _REG.atoms[j].conj = j
        atom.derivative = ScalarExpr._atom(j)
        return atom.derivative


# -- charts and function symbols -----------------------------------------------

class FunctionSymbol:
    """A function atom of a single real chart variable with a derivative table entry."""

    def __init__(self, chart: "Chart", name: str, arg: str, derivative=None):
        self.chart = chart
        self.name = name
        self.arg = arg
        arg_idx = chart._index[arg]
        if _REG.atoms[arg_idx].conj != arg_idx:
            raise ScalarError("function symbols take a real chart variable")
        atom = _Atom(name, chart.uid, "fn", arg_idx)
        self._idx = _REG.add(atom)
        _REG.atoms[self._idx].conj = self._idx
        if derivative is not None:
            self.set_derivative(derivative)

    def set_derivative(self, derivative) -> None:
        """Register the derivative as a fresh atom name or as an expression."""
        if isinstance(derivative, (str, ScalarExpr)):
            _REG.atoms[self._idx].derivative = derivative
        else:
            raise TypeError("derivative must be a name or a ScalarExpr")

    @property
    def expr(self) -> ScalarExpr:
        return ScalarExpr._atom(self._idx)

    def __call__(self) -> ScalarExpr:
        return self.expr

    def derivative(self) -> ScalarExpr:
        return _derivative_of(self._idx)


class Chart:
    """A coordinate chart; complex charts list holomorphic variables and their conjugates."""

    _uids = itertools.count()

    def __init__(self, name: str, variables: Iterable[str], conjugates: Mapping[str, str] | None = None):
        self.name = name
        self.uid = next(Chart._uids)
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ScalarError("duplicate chart variable")
        self._index: dict[str, int] = {}
        self.functions: dict[str, FunctionSymbol] = {}
        for v in self.variables:
            self._index[v] = _REG.add(_Atom(v, self.uid, "var"))
        conjugates = dict(conjugates or {})
        pairs = {}
        for a, b in conjugates.items():
            if a not in self._index or b not in self._index:
                raise UnknownVariable(f"conjugate pair ({a}, {b}) not in chart")
            pairs[a], pairs[b] = b, a
        for v in self.variables:
            _REG.atoms[self._index[v]].conj = self._index[pairs.get(v, v)]
        _REG._perms.clear()
        self.holomorphic = tuple(self.variables.index(a) for a in conjugates)
        self.antiholomorphic = tuple(self.variables.index(b) for b in conjugates.values())
        self._conj_pos = tuple(self.variables.index(pairs.get(v, v)) for v in self.variables)

    @classmethod
    def complex(cls, name: str, holomorphic: Iterable[str]) -> "Chart":
        hol = list(holomorphic)
        anti = [h + "b" for h in hol]
        return cls(name, hol + anti, dict(zip(hol, anti)))

    @property
    def is_complex(self) -> bool:
        return bool(self.holomorphic)

    @property
    def dim(self) -> int:
        return len(self.variables)

    def __getitem__(self, name: str) -> ScalarExpr:
        if name in self.functions:
            return self.functions[name].expr
        if name not in self._index:
            raise UnknownVariable(f"chart {self.name} has no variable {name!r}")
        return ScalarExpr._atom(self._index[name])

    def __contains__(self, name: str) -> bool:
        return name in self._index or name in self.functions

    @property
    def coords(self) -> list[ScalarExpr]:
        return [self[v] for v in self.variables]

    def conjugate_position(self, i: int) -> int:
        return self._conj_pos[i]

    def function(self, name: str, arg, derivative=None) -> FunctionSymbol:
        if not isinstance(arg, str):
            args = list(arg)
            if len(args) != 1:
                raise MultiArgumentFunction(f"function symbol {name} must take exactly one variable")
            arg = args[0]
        if arg not in self._index:
            raise UnknownVariable(f"chart {self.name} has no variable {arg!r}")
        if name in self._index:
            raise ScalarError(f"{name} is already a chart variable")
        fs = FunctionSymbol(self, name, arg, derivative)
        self.functions[name] = fs
        return fs

    def __repr__(self):
        return f"Chart({self.name!r}, {list(self.variables)!r})"


def gaussian(re, im=0) -> ScalarExpr:
    return ScalarExpr(_to_fraction(re) if not isinstance(re, Fraction) else re,
                      _to_fraction(im) if not isinstance(im, Fraction) else im)


I = ScalarExpr(0, 1)
