"""Script language and command-line front end.

A script is a sequence of statements::

    chart C(x, y, z);
    fnsym a(x) deriv a1;
    frame F(C) { X1: (1, 0, 0); X2: (0, 1, 0); X3: (0, 0, 1); C[X1, X2] = 0; };
    use C;
    let u = p(x) + y*d(z);
    let B = d(x) ^ d(y);
    print bfield(u, B);

Operators: ``+ - * /`` on scalars, ``^`` wedge, ``<u, v>`` pairing, ``[u, v]``
Courant bracket and ``[u, v; H]`` its twisted version. Powers are ``pow(e, n)``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import random
import re
import sys
from fractions import Fraction

import numpy as np

from . import clifford, cohiggs, courant, gcs, genmetric, linalg, nahm, poisson, sampling, tensor
from .clifford import GSection, as_section
from .scalar import Chart, I, ScalarError, ScalarExpr
from .tensor import Frame, MixedForm, PolyVector


class ScriptError(Exception):
    def __init__(self, message, line=None, col=None):
        self.line, self.col = line, col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class ParseError(ScriptError):
    pass


class UnknownIdentifier(ScriptError):
    pass


class InvariantFailure(Exception):
    """A computed result violated an identity the artifact guarantees."""


# -- lexer --------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>[-+*/^(){}\[\],;:=<>])
""", re.VERBOSE)

KEYWORDS = {"chart", "frame", "fnsym", "deriv", "let", "print", "use", "complex"}


@dataclasses.dataclass
class Token:
    kind: str
    value: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    out = []
    pos, line, start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - start + 1
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind == "name" and text in KEYWORDS:
            out.append(Token("kw", text, line, col))
        elif kind in ("num", "name", "op"):
            out.append(Token(kind, text, line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


# -- AST --------------------------------------------------------------------------------

@dataclasses.dataclass
class Node:
    kind: str
    pos: tuple
    args: tuple = ()
    value: object = None


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _error(self, msg, tok=None):
        tok = tok or self.tok
        found = tok.value or "end of input"
        raise ParseError(f"{msg} (found {found!r})", tok.line, tok.col)

    def accept(self, value, kind=None):
        t = self.tok
        if t.value == value and (kind is None or t.kind == kind) and t.kind != "eof":
            self.i += 1
            return t
        return None

    def expect(self, value):
        t = self.accept(value)
        if t is None:
            self._error(f"expected {value!r}")
        return t

    def name(self) -> Token:
        t = self.tok
        if t.kind != "name":
            self._error("expected a name")
        self.i += 1
        return t

    # statements
    def script(self) -> list[Node]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.statement())
        return out

    def statement(self) -> Node:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "kw" and t.value == "chart":
            self.i += 1
            name = self.name().value
            self.expect("(")
            names = [self.name().value]
            while self.accept(","):
                names.append(self.name().value)
            self.expect(")")
            cplx = self.accept("complex", "kw") is not None
            self.expect(";")
            return Node("chart", pos, tuple(names), (name, cplx))
        if t.kind == "kw" and t.value == "frame":
            return self.frame_decl(pos)
        if t.kind == "kw" and t.value == "fnsym":
            self.i += 1
            name = self.name().value
            self.expect("(")
            arg = self.name().value
            if self.accept(","):
                self._error("function symbols take exactly one variable", self.toks[self.i - 1])
            self.expect(")")
            deriv = self.name().value if self.accept("deriv", "kw") else None
            self.expect(";")
            return Node("fnsym", pos, (), (name, arg, deriv))
        if t.kind == "kw" and t.value == "let":
            self.i += 1
            name = self.name().value
            self.expect("=")
            e = self.expr()
            self.expect(";")
            return Node("let", pos, (e,), name)
        if t.kind == "kw" and t.value == "use":
            self.i += 1
            name = self.name().value
            self.expect(";")
            return Node("use", pos, (), name)
        if t.kind == "kw" and t.value == "print":
            self.i += 1
            e = self.expr()
            self.expect(";")
            return Node("print", pos, (e,))
        e = self.expr()
        self.expect(";")
        return Node("print", pos, (e,))

    def frame_decl(self, pos) -> Node:
        self.i += 1
        name = self.name().value
        chart = None
        if self.accept("("):
            chart = self.name().value
            self.expect(")")
        self.expect("{")
        rows, structure = [], []
        while not self.accept("}"):
            t = self.tok
            if t.kind == "name" and t.value == "C" and self.toks[self.i + 1].value == "[":
                self.i += 2
                a = self.name().value
                self.expect(",")
                b = self.name().value
                self.expect("]")
                self.expect("=")
                structure.append((a, b, self.expr(), (t.line, t.col)))
            else:
                vname = self.name().value
                self.expect(":")
                self.expect("(")
                entries = [self.expr()]
                while self.accept(","):
                    entries.append(self.expr())
                self.expect(")")
                rows.append((vname, entries))
            self.expect(";")
        self.accept(";")
        return Node("frame", pos, (), (name, chart, rows, structure))

    # expressions
    def expr(self) -> Node:
        left = self.term()
        while self.tok.value in ("+", "-") and self.tok.kind == "op":
            t = self.tok
            self.i += 1
            left = Node(t.value, (t.line, t.col), (left, self.term()))
        return left

    def term(self) -> Node:
        left = self.unary()
        while self.tok.value in ("*", "/") and self.tok.kind == "op":
            t = self.tok
            self.i += 1
            left = Node(t.value, (t.line, t.col), (left, self.unary()))
        return left

    def unary(self) -> Node:
        t = self.tok
        if t.kind == "op" and t.value in ("-", "+"):
            self.i += 1
            inner = self.unary()
            return Node("neg", (t.line, t.col), (inner,)) if t.value == "-" else inner
        return self.wedge()

    def wedge(self) -> Node:
        left = self.atom()
        while self.tok.value == "^" and self.tok.kind == "op":
            t = self.tok
            self.i += 1
            left = Node("^", (t.line, t.col), (left, self.atom()))
        return left

    def atom(self) -> Node:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "num":
            self.i += 1
            return Node("num", pos, (), Fraction(t.value))
        if t.kind == "name":
            self.i += 1
            if self.accept("("):
                args, kwargs = [], {}
                if not self.accept(")"):
                    while True:
                        if self.tok.kind == "name" and self.toks[self.i + 1].value == "=":
                            key = self.name().value
                            self.expect("=")
                            kwargs[key] = self.expr()
                        else:
                            args.append(self.expr())
                        if self.accept(")"):
                            break
                        self.expect(",")
                return Node("call", pos, tuple(args), (t.value, kwargs))
            return Node("name", pos, (), t.value)
        if t.kind == "op":
            if t.value == "(":
                self.i += 1
                e = self.expr()
                self.expect(")")
                return e
            if t.value == "<":
                self.i += 1
                a = self.expr()
                self.expect(",")
                b = self.expr()
                self.expect(">")
                return Node("pair", pos, (a, b))
            if t.value == "[":
                self.i += 1
                a = self.expr()
                self.expect(",")
                b = self.expr()
                h = self.expr() if self.accept(";") else None
                self.expect("]")
                return Node("bracket", pos, (a, b, h))
            if t.value == "{":
                self.i += 1
                rows = [[]]
                if not self.accept("}"):
                    while True:
                        rows[-1].append(self.expr())
                        if self.accept(","):
                            continue
                        if self.accept(";"):
                            rows.append([])
                            continue
                        self.expect("}")
                        break
                return Node("matrix", pos, (), rows)
        self._error("expected an expression")


def parse(src: str) -> list[Node]:
    return Parser(src).script()


def parse_expression(src: str) -> Node:
    p = Parser(src)
    e = p.expr()
    if p.tok.kind != "eof":
        p._error("unexpected trailing input")
    return e


# -- printing -------------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (ScalarExpr, MixedForm, PolyVector, GSection)):
        return str(v)
    if isinstance(v, list) and v and isinstance(v[0], list):
        return "{" + "; ".join(", ".join(format_value(x) for x in row) for row in v) + "}"
    if isinstance(v, list):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if isinstance(v, tuple):
        return "(" + ", ".join(format_value(x) for x in v) + ")"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {format_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, cohiggs.ModuliPoint):
        return str(v)
    if dataclasses.is_dataclass(v) and not isinstance(v, type):
        fields = ", ".join(f"{f.name}={format_value(getattr(v, f.name))}" for f in dataclasses.fields(v))
        return f"{type(v).__name__}({fields})"
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    if isinstance(v, np.ndarray):
        return format_value(v.tolist())
    return str(v)


def _re_im(x: ScalarExpr) -> dict:
    return {"re": x.real_part().to_str(), "im": x.imag_part().to_str()}


def to_json(v) -> dict:
    if isinstance(v, ScalarExpr):
        return {"kind": "scalar", "frame": None, "components": [{"index": [], **_re_im(v)}]}
    if isinstance(v, (MixedForm, PolyVector)):
        names = v.frame.coframe_names if isinstance(v, MixedForm) else v.frame.names
        comps = [{"index": [names[i] for i in k], **_re_im(v.terms[k])}
                 for k in sorted(v.terms, key=lambda t: (len(t), t))]
        return {"kind": v.kind, "frame": v.frame.name, "components": comps}
    if isinstance(v, GSection):
        fr = v.frame
        comps = [{"index": [fr.names[a]], **_re_im(x)} for a, x in enumerate(v.x) if not x.is_zero()]
        comps += [{"index": [fr.coframe_names[a]], **_re_im(x)} for a, x in enumerate(v.xi) if not x.is_zero()]
        return {"kind": "section", "frame": fr.name, "components": comps}
    if isinstance(v, list) and v and isinstance(v[0], list) and isinstance(v[0][0], ScalarExpr):
        comps = [{"index": [i, j], **_re_im(x)} for i, row in enumerate(v) for j, x in enumerate(row)]
        return {"kind": "matrix", "frame": None, "components": comps}
    if isinstance(v, bool):
        return {"kind": "bool", "frame": None, "components": [{"index": [], "value": v}]}
    if dataclasses.is_dataclass(v) and not isinstance(v, type):
        comps = [{"index": [f.name], "value": format_value(getattr(v, f.name))} for f in dataclasses.fields(v)]
        return {"kind": type(v).__name__, "frame": None, "components": comps}
    return {"kind": type(v).__name__, "frame": None, "components": [{"index": [], "value": format_value(v)}]}


# -- interpreter ------------------------------------------------------------------------

_USER_ERRORS = (ScalarError, ValueError, TypeError, ZeroDivisionError, ArithmeticError, KeyError, IndexError)


class Interpreter:
    def __init__(self, seed: int = 0, samples: int = 1, tol: float = 1e-9):
        self.env: dict[str, object] = {}
        self.charts: dict[str, Chart] = {}
        self.frames: dict[str, Frame] = {}
        self.frame: Frame | None = None
        self.rng = random.Random(seed)
        self.samples = samples
        self.tol = tol
        self.output: list = []
        self._fn_by_name = {}

    # statements
    def run(self, src: str) -> list:
        for stmt in parse(src):
            self.execute(stmt)
        return self.output

    def execute(self, stmt: Node) -> None:
        try:
            getattr(self, "_stmt_" + stmt.kind)(stmt)
        except ScriptError:
            raise
        except _USER_ERRORS as exc:
            raise ScriptError(f"{type(exc).__name__}: {exc}", *stmt.pos) from exc

    def _stmt_chart(self, s: Node):
        name, cplx = s.value
        if cplx:
            chart = Chart.complex(name, list(s.args))
        else:
            chart = Chart(name, list(s.args))
        self.charts[name] = chart
        self.frames[name] = Frame.coordinate(chart)
        self.frame = self.frames[name]

    def _stmt_fnsym(self, s: Node):
        name, arg, deriv = s.value
        chart = self._chart()
        fs = chart.function(name, arg, deriv)
        self._fn_by_name[name] = fs
        if deriv is not None:
            self.env[deriv] = fs.derivative()

    def _stmt_frame(self, s: Node):
        name, chart_name, rows, structure = s.value
        chart = self.charts.get(chart_name) if chart_name else self._chart()
        if chart is None:
            raise UnknownIdentifier(f"unknown chart {chart_name!r}", *s.pos)
        coord = self.frames[chart.name]
        prev = self.frame
        self.frame = coord
        try:
            names = [r[0] for r in rows]
            mat = [[self._scalar(self.eval(e), e) for e in r[1]] for r in rows]
        finally:
            self.frame = prev
        provisional = Frame(chart, names, mat, name=name, check=False)
        self.frame = provisional
        try:
            table = {}
            for a, b, e, pos in structure:
                if a not in names or b not in names:
                    raise UnknownIdentifier(f"unknown frame vector in C[{a},{b}]", *pos)
                val = self.eval(e)
                if isinstance(val, ScalarExpr) and val.is_zero():
                    continue
                if not isinstance(val, PolyVector):
                    raise ScriptError("structure constants must be a vector in the frame", *pos)
                table[(names.index(a), names.index(b))] = {k[0]: c for k, c in val.terms.items()}
        finally:
            self.frame = prev
        frame = Frame(chart, names, mat, table, name=name)
        self.frames[name] = frame
        self.frame = frame

    def _stmt_let(self, s: Node):
        self.env[s.value] = self.eval(s.args[0])

    def _stmt_use(self, s: Node):
        name = s.value
        if name in self.frames:
            self.frame = self.frames[name]
        elif name in self.env and isinstance(self.env[name], Frame):
            self.frame = self.env[name]
            self.frames[name] = self.frame
            self.charts.setdefault(self.frame.chart.name, self.frame.chart)
        elif name == "CP1":
            chart = cohiggs.cp1_chart()
            self.charts[name] = chart
            self.frames[name] = Frame.coordinate(chart)
            self.frame = self.frames[name]
        else:
            raise UnknownIdentifier(f"unknown frame {name!r}", *s.pos)

    def _stmt_print(self, s: Node):
        v = self.eval(s.args[0])
        if v is not None:
            self.output.append(v)

    # helpers
    def _chart(self) -> Chart:
        if self.frame is None:
            raise ScriptError("no active chart; declare one with 'chart'")
        return self.frame.chart

    def _need_frame(self, node: Node) -> Frame:
        if self.frame is None:
            raise ScriptError("no active frame", *node.pos)
        return self.frame

    def _scalar(self, v, node: Node) -> ScalarExpr:
        if isinstance(v, (int, Fraction)):
            return ScalarExpr(v)
        if isinstance(v, ScalarExpr):
            return v
        if isinstance(v, MixedForm) and v.degrees() <= {0}:
            return v[()]
        raise ScriptError(f"expected a scalar, got {type(v).__name__}", *node.pos)

    def _lookup(self, name: str, node: Node):
        if name in self.env:
            return self.env[name]
        if name == "I":
            return I
        if self.frame is not None:
            chart = self.frame.chart
            if name in chart:
                return chart[name]
            if name in self.frame.names:
                return PolyVector.basis(self.frame, self.frame.names.index(name))
        base = name.rstrip("'")
        if base != name and base in self._fn_by_name:
            out = self._fn_by_name[base].expr
            for _ in range(len(name) - len(base)):
                out = out.diff(self._chart()[self._fn_by_name[base].arg])
            return out
        raise UnknownIdentifier(f"unknown identifier {name!r}", *node.pos)

    def _section_parts(self, v):
        if isinstance(v, GSection):
            return v
        if isinstance(v, (PolyVector, MixedForm)) and v.degrees() <= {1}:
            return as_section(v)
        return None

    def _add(self, a, b, node):
        if isinstance(a, (ScalarExpr, Fraction, int)) and isinstance(b, (ScalarExpr, Fraction, int)):
            return ScalarExpr.coerce(a) + ScalarExpr.coerce(b)
        if isinstance(a, (ScalarExpr, Fraction, int)):
            a = MixedForm.scalar(b.frame if hasattr(b, "frame") else self._need_frame(node), ScalarExpr.coerce(a))
        if isinstance(b, (ScalarExpr, Fraction, int)):
            b = MixedForm.scalar(a.frame if hasattr(a, "frame") else self._need_frame(node), ScalarExpr.coerce(b))
        if type(a) is type(b) and isinstance(a, (MixedForm, PolyVector, GSection)):
            return a + b
        if isinstance(a, list) and isinstance(b, list):
            return linalg.madd(a, b)
        sa, sb = self._section_parts(a), self._section_parts(b)
        if sa is not None and sb is not None:
            return sa + sb
        raise ScriptError(f"cannot add {type(a).__name__} and {type(b).__name__}", *node.pos)

    def _mul(self, a, b, node):
        scal = (ScalarExpr, Fraction, int)
        if isinstance(a, scal) and isinstance(b, scal):
            return ScalarExpr.coerce(a) * ScalarExpr.coerce(b)
        if isinstance(a, list) and isinstance(b, list):
            return linalg.matmul(a, b)
        if isinstance(a, scal):
            a, b = b, a
        if isinstance(b, scal):
            b = ScalarExpr.coerce(b)
            if isinstance(a, list):
                return linalg.mscale(b, a)
            if isinstance(a, GSection):
                return a.scale(b)
            if isinstance(a, (MixedForm, PolyVector)):
                return a.scale(b)
        if isinstance(a, MixedForm) and a.degrees() <= {0}:
            return self._mul(a[()], b, node)
        if isinstance(b, MixedForm) and b.degrees() <= {0}:
            return self._mul(a, b[()], node)
        raise ScriptError(f"cannot multiply {type(a).__name__} and {type(b).__name__}; use ^ for wedge", *node.pos)

    def eval(self, node: Node):
        try:
            return getattr(self, "_ev_" + node.kind.replace("+", "add").replace("-", "sub")
                           .replace("*", "mul").replace("/", "div").replace("^", "wedge"))(node)
        except ScriptError:
            raise
        except _USER_ERRORS as exc:
            raise ScriptError(f"{type(exc).__name__}: {exc}", *node.pos) from exc

    def _ev_num(self, n):
        return ScalarExpr(n.value)

    def _ev_name(self, n):
        return self._lookup(n.value, n)

    def _ev_add(self, n):
        return self._add(self.eval(n.args[0]), self.eval(n.args[1]), n)

    def _ev_sub(self, n):
        b = self.eval(n.args[1])
        return self._add(self.eval(n.args[0]), self._neg(b, n), n)

    def _neg(self, v, n):
        if isinstance(v, list):
            return linalg.mscale(-1, v)
        if isinstance(v, (ScalarExpr, MixedForm, PolyVector, GSection)):
            return -v
        raise ScriptError(f"cannot negate {type(v).__name__}", *n.pos)

    def _ev_neg(self, n):
        return self._neg(self.eval(n.args[0]), n)

    def _ev_mul(self, n):
        return self._mul(self.eval(n.args[0]), self.eval(n.args[1]), n)

    def _ev_div(self, n):
        a, b = self.eval(n.args[0]), self._scalar(self.eval(n.args[1]), n.args[1])
        if isinstance(a, ScalarExpr):
            return a / b
        return self._mul(a, ScalarExpr(1) / b, n)

    def _ev_wedge(self, n):
        a, b = self.eval(n.args[0]), self.eval(n.args[1])
        if isinstance(a, ScalarExpr) or isinstance(b, ScalarExpr):
            return self._mul(a, b, n)
        return tensor.wedge(a, b)

    def _ev_pair(self, n):
        return courant.pairing(self.eval(n.args[0]), self.eval(n.args[1]))

    def _ev_bracket(self, n):
        a, b = self.eval(n.args[0]), self.eval(n.args[1])
        H = self.eval(n.args[2]) if n.args[2] is not None else None
        return courant.courant(a, b, H)

    def _ev_matrix(self, n):
        rows = [[self._scalar(self.eval(e), e) for e in row] for row in n.value]
        if any(len(r) != len(rows[0]) for r in rows):
            raise ScriptError("matrix rows have different lengths", *n.pos)
        return rows

    def _ev_call(self, n):
        fname, kwnodes = n.value
        if fname in ("p", "co"):
            if len(n.args) != 1 or n.args[0].kind != "name":
                raise ScriptError(f"{fname}() takes one name", *n.pos)
            frame = self._need_frame(n)
            key = f"p({n.args[0].value})" if fname == "p" else n.args[0].value
            if key not in frame.names:
                raise UnknownIdentifier(f"frame {frame.name} has no vector {key}", *n.args[0].pos)
            idx = frame.names.index(key)
            return PolyVector.basis(frame, idx) if fname == "p" else MixedForm.coframe(frame, idx)
        fn = BUILTINS.get(fname)
        if fn is None:
            raise UnknownIdentifier(f"unknown operation {fname!r}", *n.pos)
        args = [self.eval(a) for a in n.args]
        kwargs = {k: self.eval(v) for k, v in kwnodes.items()}
        return fn(self, n, *args, **kwargs)


# -- builtins -------------------------------------------------------------------------------

BUILTINS = {}


def builtin(name):
    def deco(f):
        BUILTINS[name] = f
        return f
    return deco


def _frame_of(it: Interpreter, n, *vals):
    for v in vals:
        if hasattr(v, "frame"):
            return v.frame
    return it._need_frame(n)


def _int(v) -> int:
    v = ScalarExpr.coerce(v)
    re, im = v.constant_value()
    if im or re.denominator != 1:
        raise ValueError("expected an integer")
    return int(re)


@builtin("d")
def _b_d(it, n, a):
    if isinstance(a, ScalarExpr):
        return tensor.d_function(it._need_frame(n), a)
    return tensor.exterior_d(a)


@builtin("pow")
def _b_pow(it, n, a, k):
    return ScalarExpr.coerce(a) ** _int(k)


@builtin("i")
def _b_i(it, n, X, a):
    return tensor.interior(X, a)


@builtin("wedge")
def _b_wedge(it, n, a, b):
    return tensor.wedge(a, b)


@builtin("lie")
def _b_lie(it, n, X, a):
    return tensor.lie_derivative(X, a)


@builtin("vbracket")
def _b_vbracket(it, n, X, Y):
    return tensor.vector_bracket(X, Y)


@builtin("diff")
def _b_diff(it, n, f, x):
    return ScalarExpr.coerce(f).diff(x)


@builtin("conj")
def _b_conj(it, n, a):
    return a.conjugate()


@builtin("part")
def _b_part(it, n, a, k):
    return a.part(_int(k))


@builtin("clifford")
def _b_clifford(it, n, u, phi):
    return clifford.clifford_act(u, phi)


@builtin("mukai")
def _b_mukai(it, n, a, b):
    return clifford.mukai(a, b)


@builtin("exp")
def _b_exp(it, n, B):
    return clifford.form_exp(B)


@builtin("spinor_b")
def _b_spinor_b(it, n, B, phi):
    return clifford.spinor_exp_b(B, phi)


@builtin("gen_lie")
def _b_gen_lie(it, n, u, phi):
    return clifford.gen_lie(u, phi)


@builtin("annihilator")
def _b_annihilator(it, n, phi):
    return clifford.annihilator(phi)


@builtin("is_pure")
def _b_is_pure(it, n, phi):
    return clifford.is_pure(phi)


@builtin("pairing")
def _b_pairing(it, n, u, v):
    return courant.pairing(u, v)


@builtin("bfield")
def _b_bfield(it, n, u, B):
    return courant.bfield(u, B)


@builtin("courant")
def _b_courant(it, n, u, v, H=None):
    return courant.courant(u, v, H)


@builtin("dorfman")
def _b_dorfman(it, n, u, v, H=None):
    return courant.dorfman(u, v, H)


@builtin("jacobiator")
def _b_jacobiator(it, n, u, v, w, H=None):
    lhs, rhs = courant.jacobiator(u, v, w, H)
    return lhs == rhs


@builtin("twisted_d")
def _b_twisted_d(it, n, phi, H):
    return courant.twisted_d(phi, H)


@builtin("metric")
def _b_metric(it, n, g, F=None):
    return genmetric.GenMetric(it._need_frame(n), g, F)


@builtin("lift")
def _b_lift(it, n, m, X, sign=1):
    return m.lift(X, _int(sign))


@builtin("nabla")
def _b_nabla(it, n, m, X, v, H=None, side=1):
    return genmetric.covariant_derivative(m, X, v, H, _int(side))


@builtin("christoffel")
def _b_christoffel(it, n, m):
    return genmetric.christoffel(m)


@builtin("christoffel_classical")
def _b_christoffel_classical(it, n, g):
    return genmetric.christoffel_classical(g, it._chart().coords)


@builtin("torsion")
def _b_torsion(it, n, m, H=None, side=1):
    return genmetric.torsion(m, H, _int(side))


@builtin("su2frame")
def _b_su2frame(it, n, t):
    chart = it._chart()
    name = next(v for v in chart.variables if chart[v] == t)
    return tensor.su2_frame(chart, name)


@builtin("bianchi9")
def _b_bianchi9(it, n):
    return bianchi_lines(genmetric.bianchi_ix())


@builtin("gcs_complex")
def _b_gcs_complex(it, n, H=None):
    return gcs.gcs_complex(it._need_frame(n), H)


@builtin("gcs_symplectic")
def _b_gcs_symplectic(it, n, omega):
    return gcs.gcs_symplectic(omega)


@builtin("gcs_poisson")
def _b_gcs_poisson(it, n, sigma):
    return gcs.gcs_poisson(sigma)


@builtin("gcs_bfield")
def _b_gcs_bfield(it, n, J, B):
    return gcs.gcs_bfield(J, B)


@builtin("integrable")
def _b_integrable(it, n, J):
    return gcs.integrability(J, "courant")


@builtin("integrable_spinor")
def _b_integrable_spinor(it, n, J):
    return gcs.integrability(J, "spinor")


@builtin("dbar")
def _b_dbar(it, n, J, f):
    return gcs.dbar(J, f)


@builtin("symmetry")
def _b_symmetry(it, n, J, f):
    return gcs.symmetry_section(J, f)


@builtin("gk_check")
def _b_gk_check(it, n, J1, J2):
    return gcs.gk_check(J1, J2)


@builtin("gk_extract")
def _b_gk_extract(it, n, J1, J2):
    return gcs.gk_extract(J1, J2)


@builtin("poisson_check")
def _b_poisson_check(it, n, sigma):
    return poisson.poisson_check(sigma)


@builtin("pbracket")
def _b_pbracket(it, n, sigma, f, g):
    return poisson.poisson_bracket(sigma, f, g)


@builtin("hamiltonian")
def _b_hamiltonian(it, n, sigma, f):
    return poisson.hamiltonian(sigma, f)


@builtin("ks_class")
def _b_ks_class(it, n, sigma, omega):
    return poisson.ks_class(sigma, omega)


@builtin("unobstructed")
def _b_unobstructed(it, n, sigma, f):
    return poisson.unobstructed_step(sigma, f).identity_ok


@builtin("module_two_fields")
def _b_module_two_fields(it, n, X1, X2):
    return poisson.module_from_two_fields(X1, X2).A


@builtin("canonical_module")
def _b_canonical_module(it, n, sigma):
    return poisson.canonical_module(sigma).A


@builtin("cohiggs")
def _b_cohiggs(it, n, split, phi):
    splitting = tuple(_int(x) for row in split for x in row)
    return cohiggs.CoHiggsBundle(splitting, phi)


@builtin("validate")
def _b_validate(it, n, b):
    cohiggs.validate(b)
    return True


@builtin("stable")
def _b_stable(it, n, b):
    return cohiggs.is_stable_rank2(b)


@builtin("spectral")
def _b_spectral(it, n, b):
    return cohiggs.spectral(b)


@builtin("moduli_forward")
def _b_moduli_forward(it, n, b):
    return cohiggs.moduli_forward(b)


@builtin("moduli_inverse")
def _b_moduli_inverse(it, n, y0, s, z0=None):
    return cohiggs.moduli_inverse(cohiggs.ModuliPoint(z0, y0, s)).phi


@builtin("det")
def _b_det(it, n, m):
    return linalg.det(m)


@builtin("charpoly")
def _b_charpoly(it, n, m):
    return linalg.charpoly(m)


@builtin("random_poly")
def _b_random_poly(it, n, degree=2):
    return sampling.random_poly(it.rng, it._chart().coords, _int(degree))


@builtin("random_section")
def _b_random_section(it, n, degree=2):
    return sampling.random_section(it.rng, it._need_frame(n), _int(degree))


@builtin("random_form")
def _b_random_form(it, n, p, degree=2):
    return sampling.random_form(it.rng, it._need_frame(n), _int(p), _int(degree))


@builtin("random_closed_form")
def _b_random_closed_form(it, n, p, degree=1):
    return sampling.random_closed_form(it.rng, it._need_frame(n), _int(p), _int(degree))


# -- subcommands ----------------------------------------------------------------------------

def bianchi_lines(table: genmetric.BianchiTable) -> list[str]:
    out = []
    for label, coeffs in table.named():
        terms = [f"({c})*e{k}" for k, c in enumerate(coeffs) if not c.is_zero()]
        out.append(f"{label} = {' + '.join(terms) if terms else '0'}")
    return out


def _cmd_run(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            src = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    it = Interpreter(seed=args.seed, samples=args.samples, tol=args.tol)
    try:
        it.run(src)
    except ScriptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps([to_json(v) for v in it.output], indent=1))
    else:
        for v in it.output:
            if isinstance(v, list) and v and isinstance(v[0], str):
                print("\n".join(v))
            else:
                print(format_value(v))
    return 0


def _cmd_bianchi9(args) -> int:
    table = genmetric.bianchi_ix()
    if args.json:
        comps = [{"index": [label, f"e{k}"], **_re_im(c)}
                 for label, coeffs in table.named() for k, c in enumerate(coeffs) if not c.is_zero()]
        print(json.dumps({"kind": "bianchi9", "frame": table.frame.name, "components": comps}, indent=1))
    else:
        print("\n".join(bianchi_lines(table)))
    return 0


def _cmd_nahm(args) -> int:
    s0 = nahm.random_state(args.k, args.seed)
    worst = [0.0]
    inv0 = nahm.nahm_invariants(s0)

    def watch(t, T):
        inv = nahm.nahm_invariants(nahm.NahmState(T, t))
        worst[0] = max(worst[0], max(float(np.max(np.abs(x - y))) for x, y in zip(inv, inv0)))

    s1 = nahm.nahm_flow(s0, args.t, args.h, observer=watch)
    record = {"k": args.k, "seed": args.seed, "t": args.t, "h": args.h, "drift": worst[0]}
    if args.report in ("invariants", "all"):
        record["invariants"] = [[[float(x.real), float(x.imag)] for x in a] for a in nahm.nahm_invariants(s1)]
    if args.report in ("state", "all"):
        record["state"] = s1.to_json()
    print(json.dumps(record, indent=1))
    if not worst[0] < args.tol:
        print(f"error: invariant drift {worst[0]:.3e} exceeds {args.tol:.1e}", file=sys.stderr)
        return 2
    return 0


def _cmd_abel(args) -> int:
    rep = nahm.abel_experiment(args.seed, args.t, samples=args.samples)
    record = {"seed": rep.seed, "t": rep.t_end, "rel_deviation": rep.rel_deviation,
              "mean_rate": [rep.mean_rate.real, rep.mean_rate.imag], "records": rep.records}
    print(json.dumps(record, indent=1))
    if not rep.rel_deviation < args.tol:
        print(f"error: Abel increments deviate by {rep.rel_deviation:.3e}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gengeo", description="Generalized geometry calculator")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="evaluate a script")
    r.add_argument("file")
    r.add_argument("--json", action="store_true")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--samples", type=int, default=1)
    r.add_argument("--tol", type=float, default=1e-9)
    r.set_defaults(func=_cmd_run)
    b = sub.add_parser("bianchi9", help="Levi-Civita table of a Bianchi IX metric")
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=_cmd_bianchi9)
    nm = sub.add_parser("nahm", help="integrate Nahm's equations and report invariant drift")
    nm.add_argument("--k", type=int, default=2)
    nm.add_argument("--seed", type=int, default=0)
    nm.add_argument("--t", type=float, default=1.0)
    nm.add_argument("--h", type=float, default=1e-3)
    nm.add_argument("--report", choices=["drift", "invariants", "state", "all"], default="drift")
    nm.add_argument("--tol", type=float, default=1e-9)
    nm.set_defaults(func=_cmd_nahm)
    ab = sub.add_parser("abel", help="Abel-sum linearity along the Nahm flow (k = 2)")
    ab.add_argument("--seed", type=int, default=0)
    ab.add_argument("--t", type=float, default=1.0)
    ab.add_argument("--samples", type=int, default=20)
    ab.add_argument("--tol", type=float, default=1e-3)
    ab.set_defaults(func=_cmd_abel)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except InvariantFailure as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return 2
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is a bug in the artifact
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
