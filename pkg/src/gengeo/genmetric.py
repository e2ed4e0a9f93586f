"""Generalized metrics V = graph(g + F) inside T + T* and their connections."""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg
from .clifford import GSection, as_section
from .courant import courant
from .scalar import Chart, FunctionSymbol, ScalarError, ScalarExpr
from .tensor import DegreeError, Frame, MixedForm, PolyVector, interior, su2_frame, vector_bracket

_ZERO = ScalarExpr(0)
_HALF = ScalarExpr(1) / 2


class NotInSubbundle(ScalarError):
    pass


class DegenerateMetric(ScalarError):
    pass


class GenMetric:
    """Positive subbundle V = {X + gX + i_X F} of T + T*.

    ``g`` is the matrix g(e_a, e_b) in the frame; ``F`` an optional 2-form.
    The complement is V_perp = {X - gX + i_X F}.
    """

    def __init__(self, frame: Frame, g, F: MixedForm | None = None):
        self.frame = frame
        self.g = linalg.as_matrix(g)
        n = frame.n
        if len(self.g) != n or any(len(r) != n for r in self.g):
            raise DegenerateMetric("metric matrix has the wrong size")
        for a in range(n):
            for b in range(a + 1, n):
                if not (self.g[a][b] - self.g[b][a]).is_zero():
                    raise DegenerateMetric("metric matrix is not symmetric")
        if F is not None and F.degrees() - {2}:
            raise DegreeError("F must be a two-form")
        self.F = F if F is not None and not F.is_zero() else None
        try:
            self.ginv = linalg.inverse(self.g)
        except ZeroDivisionError:
            raise DegenerateMetric("metric matrix is singular") from None

    def flat(self, X) -> list[ScalarExpr]:
        xs = X.components() if isinstance(X, PolyVector) else list(X)
        n = self.frame.n
        return [sum((xs[a] * self.g[a][b] for a in range(n) if xs[a] and self.g[a][b]), _ZERO)
                for b in range(n)]

    def sharp(self, xi) -> list[ScalarExpr]:
        cs = xi.components() if isinstance(xi, MixedForm) else list(xi)
        return linalg.matvec(self.ginv, cs)

    def _iF(self, xs) -> list[ScalarExpr]:
        if self.F is None:
            return [_ZERO] * self.frame.n
        return interior(PolyVector.vector(self.frame, xs), self.F).components()

    def lift(self, X, sign: int = 1) -> GSection:
        """X^+ = X + gX + i_X F (sign=+1) or X^- = X - gX + i_X F (sign=-1)."""
        xs = X.components() if isinstance(X, PolyVector) else [ScalarExpr.coerce(v) for v in X]
        gx = self.flat(xs)
        f = self._iF(xs)
        if sign > 0:
            form = [a + b for a, b in zip(gx, f)]
        else:
            form = [b - a for a, b in zip(gx, f)]
        return GSection(self.frame, xs, form)

    def lift_form(self, theta, sign: int = 1) -> GSection:
        """The element of V (or V_perp) whose vector part is sign * g^-1 theta."""
        ys = self.sharp(theta)
        if sign < 0:
            ys = [-y for y in ys]
        return self.lift(ys, sign)

    def _split(self, u: GSection):
        xs, xi = u.x, u.xi
        f = self._iF(xs)
        w = self.sharp([a - b for a, b in zip(xi, f)])
        plus = [(a + b) * _HALF for a, b in zip(xs, w)]
        minus = [(a - b) * _HALF for a, b in zip(xs, w)]
        return plus, minus

    def project_V(self, u) -> GSection:
        u = as_section(u)
        return self.lift(self._split(u)[0], 1)

    def project_Vperp(self, u) -> GSection:
        u = as_section(u)
        return self.lift(self._split(u)[1], -1)

    def in_V(self, u, side: int = 1) -> bool:
        u = as_section(u)
        proj = self.project_V(u) if side > 0 else self.project_Vperp(u)
        return proj == u


def covariant_derivative(m: GenMetric, X, v, H: MixedForm | None = None, side: int = 1) -> GSection:
    """pi_V [X^-, v] for v in V (side=+1) or pi_Vperp [X^+, v] for v in V_perp (side=-1)."""
    v = as_section(v)
    if not m.in_V(v, side):
        raise NotInSubbundle("section does not lie in the chosen subbundle")
    xs = X.components() if isinstance(X, PolyVector) else list(X)
    br = courant(m.lift(xs, -side), v, H)
    return m.project_V(br) if side > 0 else m.project_Vperp(br)


def vector_derivative(m: GenMetric, i: int, j: int, H: MixedForm | None = None, side: int = 1) -> list[ScalarExpr]:
    """nabla_{e_i} e_j transported to T through V (or V_perp)."""
    n = m.frame.n
    ei = [ScalarExpr(1) if k == i else _ZERO for k in range(n)]
    ej = [ScalarExpr(1) if k == j else _ZERO for k in range(n)]
    return covariant_derivative(m, ei, m.lift(ej, side), H, side).x


def christoffel(m: GenMetric) -> list:
    """Gamma[k][i][j] with nabla_{d_i} d_j = Gamma^k_ij d_k, from the bracket construction."""
    if not m.frame.is_coordinate:
        raise ScalarError("christoffel needs a coordinate frame")
    if m.F is not None:
        raise ScalarError("christoffel needs F = 0; use torsion for the twisted case")
    n = m.frame.n
    gam = [[[_ZERO] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            d = vector_derivative(m, i, j)
            for k in range(n):
                gam[k][i][j] = d[k]
                gam[k][j][i] = d[k]
    return gam


def christoffel_classical(g, coords) -> list:
    """1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij), computed directly."""
    g = linalg.as_matrix(g)
    n = len(g)
    ginv = linalg.inverse(g)
    dg = [[[g[a][b].diff(coords[c]) for c in range(n)] for b in range(n)] for a in range(n)]
    gam = [[[_ZERO] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                s = _ZERO
                for l in range(n):
                    if ginv[k][l]:
                        s = s + ginv[k][l] * (dg[j][l][i] + dg[i][l][j] - dg[i][j][l])
                gam[k][i][j] = s * _HALF
    return gam


def torsion(m: GenMetric, H: MixedForm | None = None, side: int = 1) -> list:
    """T[k][i][j], the e_k component of nabla_{e_i} e_j - nabla_{e_j} e_i - [e_i, e_j].

    With F a potential for H (H_ijl = coefficient of dx_i^dx_j^dx_l), the
    V-connection has T(d_i, d_j) = H_ijl g^lk d_k, i.e. -H_jil g^lk d_k;
    the V_perp connection has the opposite sign.
    """
    n = m.frame.n
    T = [[[_ZERO] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a = vector_derivative(m, i, j, H, side)
            b = vector_derivative(m, j, i, H, side)
            br = vector_bracket(PolyVector.basis(m.frame, i), PolyVector.basis(m.frame, j)).components()
            for k in range(n):
                t = a[k] - b[k] - br[k]
                T[k][i][j] = t
                T[k][j][i] = -t
    return T


@dataclass
class BianchiTable:
    """Covariant derivatives of the orthonormal coframe e0..e3 along d/dt and X1..X3.

    ``entries[(i, a)]`` lists the coefficients of nabla_{E_i} e_a on e0..e3,
    with E_0 = d/dt and E_k = X_k.
    """

    chart: Chart
    frame: Frame
    metric: GenMetric
    a: ScalarExpr
    b: ScalarExpr
    c: ScalarExpr
    entries: dict

    NAMED = (("X1", "e0", 1, 0), ("X1", "e1", 1, 1), ("X1", "e2", 1, 2),
             ("dt", "e0", 0, 0), ("dt", "e1", 0, 1))

    def named(self) -> list[tuple[str, list[ScalarExpr]]]:
        return [(f"nabla_{x} {e}", self.entries[(i, k)]) for x, e, i, k in self.NAMED]


def bianchi_ix(a: FunctionSymbol | None = None, b: FunctionSymbol | None = None,
               c: FunctionSymbol | None = None, chart: Chart | None = None) -> BianchiTable:
    """Levi-Civita table for (abc)^2 dt^2 + a^2 s1^2 + b^2 s2^2 + c^2 s3^2 via the bracket construction."""
    if chart is None:
        chart = Chart("bianchi", ["t"])
    fa = a or chart.function("a", "t")
    fb = b or chart.function("b", "t")
    fc = c or chart.function("c", "t")
    A, B, C = fa.expr, fb.expr, fc.expr
    frame = su2_frame(chart, fa.arg)
    scales = [A * B * C, A, B, C]
    g = linalg.zeros(4, 4)
    for k in range(4):
        g[k][k] = scales[k] * scales[k]
    m = GenMetric(frame, g)
    basis = []
    for k in range(4):
        theta = [_ZERO] * 4
        theta[k] = scales[k]
        basis.append(m.lift_form(theta, 1))
    entries = {}
    for i in range(4):
        X = [ScalarExpr(1) if q == i else _ZERO for q in range(4)]
        for k in range(4):
            res = covariant_derivative(m, X, basis[k])
            gy = m.flat(res.x)
            entries[(i, k)] = [gy[q] / scales[q] for q in range(4)]
    return BianchiTable(chart, frame, m, A, B, C, entries)
