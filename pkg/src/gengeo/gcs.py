"""Generalized complex structures: presets, integrability, dbar operators and
generalized Kahler pairs.

A structure is held as any of: a spanning set of its +i eigenbundle E, a
pure spinor whose annihilator is E, or the endomorphism J of T + T*
(a 2n x 2n matrix on coordinates (X^a, xi_a)).  Missing forms are computed
on demand by exact linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations

import numpy as np

from . import linalg
from .clifford import GSection, annihilator, as_section, clifford_act, form_exp, gen_lie, spinor_exp_b
from .courant import bfield as bfield_section
from .courant import courant, exact_section, pairing
from .genmetric import GenMetric
from .poisson import bivector_sharp, poisson_check
from .scalar import I, ScalarError, ScalarExpr
from .tensor import DegreeError, Frame, MixedForm, PolyVector, exterior_d, wedge

_ZERO = ScalarExpr(0)
_HALF = ScalarExpr(1) / 2


class NotPure(ScalarError):
    pass


class NotNondegenerate(ScalarError):
    pass


class NonClosedSymplecticForm(ScalarError):
    pass


class IntegrabilityFailure(ScalarError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotSymmetry(ScalarError):
    pass


class NotPoisson(ScalarError):
    pass


class DegenerateEigenbundle(ScalarError):
    pass


class GCStruct:
    """Generalized almost complex structure, optionally with a twisting 3-form H."""

    def __init__(self, frame: Frame, spanning=None, spinor: MixedForm | None = None,
                 endo=None, H: MixedForm | None = None, label: str = "custom"):
        if spanning is None and spinor is None and endo is None:
            raise ValueError("need a spanning set, a spinor or an endomorphism")
        self.frame = frame
        self._span = [as_section(u) for u in spanning] if spanning is not None else None
        self._spinor = spinor
        self._endo = linalg.as_matrix(endo) if endo is not None else None
        self.H = H if H is not None and not H.is_zero() else None
        self.label = label
        if self._span is not None and len(self._span) != frame.n:
            raise NotPure(f"expected {frame.n} spanning sections, got {len(self._span)}")

    # -- representations ----------------------------------------------------
    def span(self) -> list[GSection]:
        if self._span is None:
            if self._spinor is not None:
                basis = annihilator(self._spinor)
                if len(basis) != self.frame.n:
                    raise NotPure(f"annihilator has rank {len(basis)}, expected {self.frame.n}")
            else:
                n2 = 2 * self.frame.n
                shifted = [[self._endo[r][c] - (I if r == c else 0) for c in range(n2)] for r in range(n2)]
                basis = [GSection.from_coords(self.frame, v) for v in linalg.nullspace(shifted)]
                if len(basis) != self.frame.n:
                    raise NotNondegenerate("+i eigenspace has the wrong rank")
            self._span = basis
        return self._span

    def spinor(self) -> MixedForm:
        if self._spinor is None:
            self._spinor = spinor_from_span(self.frame, self.span())
        return self._spinor

    def endo(self):
        if self._endo is None:
            self._endo = endo_from_span(self.frame, self.span())
        return self._endo

    def apply(self, u) -> GSection:
        u = as_section(u)
        return GSection.from_coords(self.frame, linalg.matvec(self.endo(), u.coords()))

    def conj_span(self) -> list[GSection]:
        return [u.conjugate() for u in self.span()]

    def decompose(self, u):
        """Coefficients of u on the basis span() + conj_span()."""
        u = as_section(u)
        cols = [s.coords() for s in self.span() + self.conj_span()]
        sol = linalg.solve(linalg.transpose(cols), u.coords())
        if sol is None:
            raise NotNondegenerate("E and its conjugate do not span")
        return sol

    def __repr__(self):
        return f"GCStruct({self.label!r}, n={self.frame.n})"


def spinor_from_span(frame: Frame, span: list[GSection]) -> MixedForm:
    """The line of forms annihilated by every section of the span."""
    n = frame.n
    monos = [c for p in range(n + 1) for c in combinations(range(n), p)]
    rows: dict[tuple, list] = {}
    for j, mono in enumerate(monos):
        phi = MixedForm(frame, {mono: 1})
        for i, u in enumerate(span):
            for key, v in clifford_act(u, phi).terms.items():
                rows.setdefault((i, key), [_ZERO] * len(monos))[j] = v
    mat = list(rows.values())
    null = linalg.nullspace(mat, len(monos))
    if len(null) != 1:
        raise NotPure(f"span annihilates a space of forms of dimension {len(null)}")
    return MixedForm(frame, {mono: c for mono, c in zip(monos, null[0])})


def endo_from_span(frame: Frame, span: list[GSection]):
    n = frame.n
    conj = [u.conjugate() for u in span]
    P = linalg.transpose([u.coords() for u in span + conj])
    try:
        Pinv = linalg.inverse(P)
    except ZeroDivisionError:
        raise NotNondegenerate("E meets its conjugate") from None
    D = linalg.zeros(2 * n, 2 * n)
    for k in range(2 * n):
        D[k][k] = I if k < n else -I
    return linalg.matmul(linalg.matmul(P, D), Pinv)


# -- presets ---------------------------------------------------------------------

def gcs_complex(frame: Frame, H: MixedForm | None = None) -> GCStruct:
    """E = span{d/dzb_j, dz_j} on a complex coordinate frame; spinor dz_1^...^dz_m."""
    chart = frame.chart
    if not chart.is_complex or not frame.is_coordinate:
        raise ScalarError("complex preset needs the coordinate frame of a complex chart")
    span = []
    for j in chart.antiholomorphic:
        span.append(GSection.basis(frame, j))
    for j in chart.holomorphic:
        span.append(GSection.basis(frame, frame.n + j))
    spinor = MixedForm(frame, {tuple(sorted(chart.holomorphic)): 1})
    return GCStruct(frame, span, spinor, H=H, label="complex")


def _two_form_matrix(omega: MixedForm):
    n = omega.frame.n
    return [[omega[(a, b)] if a != b else _ZERO for b in range(n)] for a in range(n)]


def gcs_symplectic(omega: MixedForm, check_closed: bool = True) -> GCStruct:
    """E = span{e_j - i i_{e_j} omega}; spinor exp(i omega)."""
    if omega.degrees() - {2}:
        raise DegreeError("symplectic form must be a two-form")
    frame = omega.frame
    if check_closed and not exterior_d(omega).is_zero():
        raise NonClosedSymplecticForm("d omega != 0")
    W = _two_form_matrix(omega)
    if linalg.det(W).is_zero():
        raise NotNondegenerate("omega is degenerate")
    span = []
    for j in range(frame.n):
        span.append(GSection(frame, [ScalarExpr(1) if k == j else _ZERO for k in range(frame.n)],
                             [-I * W[j][k] for k in range(frame.n)]))
    return GCStruct(frame, span, form_exp(omega.scale(I)), label="symplectic")


def gcs_poisson(sigma: PolyVector, frame: Frame | None = None) -> GCStruct:
    """E = span{d/dzb_j, dz_j - sigma(dz_j)} for a holomorphic Poisson bivector."""
    frame = sigma.frame
    chart = frame.chart
    if not poisson_check(sigma):
        raise NotPoisson("bivector is not Poisson")
    span = [GSection.basis(frame, j) for j in chart.antiholomorphic]
    for j in chart.holomorphic:
        xi = [ScalarExpr(1) if k == j else _ZERO for k in range(frame.n)]
        X = bivector_sharp(sigma, xi)
        span.append(GSection(frame, [-x for x in X], xi))
    return GCStruct(frame, span, label="poisson")


def gcs_bfield(J: GCStruct, B: MixedForm) -> GCStruct:
    """B-transform: E -> exp(B) E, spinor -> exp(-B) ^ spinor, H -> H - dB."""
    span = [bfield_section(u, B) for u in J.span()]
    spinor = spinor_exp_b(B, J._spinor) if J._spinor is not None else None
    H = J.H
    dB = exterior_d(B)
    if not dB.is_zero():
        H = (H - dB) if H is not None else -dB
    return GCStruct(J.frame, span, spinor, H=H, label=f"{J.label}+B")


# -- integrability -----------------------------------------------------------------

@dataclass
class IntegrabilityReport:
    ok: bool
    mode: str
    residual: object = None
    w: GSection | None = None
    failures: list = field(default_factory=list)


def integrability(J: GCStruct, mode: str = "courant") -> IntegrabilityReport:
    """Courant closure of E, or (d + H) psi = w . psi for the pure spinor."""
    if mode == "courant":
        span = J.span()
        vecs = [u.coords() for u in span]
        failures = []
        for i, j in combinations(range(len(span)), 2):
            br = courant(span[i], span[j], J.H)
            if br.is_zero():
                continue
            if not linalg.in_span(vecs, br.coords()):
                failures.append(((i, j), br))
        residual = failures[0][1] if failures else None
        return IntegrabilityReport(not failures, mode, residual, failures=failures)
    if mode == "spinor":
        psi = J.spinor()
        frame = J.frame
        target = exterior_d(psi)
        if J.H is not None:
            target = target + wedge(J.H, psi)
        if target.is_zero():
            return IntegrabilityReport(True, mode, None, GSection(frame))
        cols = [clifford_act(GSection.basis(frame, k), psi) for k in range(2 * frame.n)]
        keys = sorted({k for c in cols for k in c.terms} | set(target.terms))
        mat = [[c.terms.get(k, _ZERO) for c in cols] for k in keys]
        rhs = [target.terms.get(k, _ZERO) for k in keys]
        sol = linalg.solve(mat, rhs)
        if sol is None:
            return IntegrabilityReport(False, mode, target)
        return IntegrabilityReport(True, mode, None, GSection.from_coords(frame, sol))
    raise ValueError(f"unknown integrability mode {mode!r}")


# -- dbar operators ------------------------------------------------------------------

def dbar(J: GCStruct, f) -> GSection:
    """The E-bar component of df."""
    frame = J.frame
    df = exact_section(frame, f)
    coeffs = J.decompose(df)
    n = frame.n
    out = GSection(frame)
    for c, u in zip(coeffs[n:], J.conj_span()):
        if not c.is_zero():
            out = out + u.scale(c)
    return out


def evaluate_on_span(J: GCStruct, alpha) -> list[ScalarExpr]:
    """alpha(u_i) = 2 (alpha, u_i), identifying E-bar with the dual of E."""
    alpha = as_section(alpha)
    return [pairing(alpha, u) * 2 for u in J.span()]


def dbar1(J: GCStruct, alpha) -> list:
    """Matrix of dbar alpha on the spanning set, from

    2 dbar alpha(u, v) = X alpha(v) - Y alpha(u) - alpha([u, v]).
    """
    alpha = as_section(alpha)
    span = J.span()
    vals = evaluate_on_span(J, alpha)
    n = len(span)
    out = linalg.zeros(n, n)
    for i, j in combinations(range(n), 2):
        u, v = span[i], span[j]
        t = u.vector(vals[j]) - v.vector(vals[i]) - pairing(alpha, courant(u, v, J.H)) * 2
        out[i][j] = t * _HALF
        out[j][i] = -t * _HALF
    return out


def symmetry_section(J: GCStruct, f):
    """u = J(df) and lambda with L_u psi = lambda psi."""
    frame = J.frame
    u = J.apply(exact_section(frame, f))
    psi = J.spinor()
    lie = gen_lie(u, psi)
    key = next(iter(sorted(psi.terms, key=lambda k: (len(k), k))))
    lam = lie[key] / psi[key]
    if not (lie - psi.scale(lam)).is_zero():
        raise NotSymmetry("L_u psi is not proportional to psi")
    return u, lam


# -- generalized Kahler ----------------------------------------------------------------

def _pairing_matrix(n: int):
    Q = linalg.zeros(2 * n, 2 * n)
    for a in range(n):
        Q[a][n + a] = _HALF
        Q[n + a][a] = _HALF
    return Q


def _conj_perm(frame: Frame) -> list[int]:
    n = frame.n
    return list(frame.conj) + [n + c for c in frame.conj]


def _numeric(m, point) -> np.ndarray:
    return np.array([[x.evaluate(point) if not x.is_zero() else 0j for x in row] for row in m], dtype=complex)


@dataclass
class GKReport:
    ok: bool
    commute: bool
    symmetric: bool
    positive: bool
    integrable: tuple
    min_eigenvalue: float | None = None


def metric_split(J1: GCStruct, J2: GCStruct):
    """Bases of V (+1 eigenspace of G = J1 J2) and V_perp (-1 eigenspace)."""
    G = linalg.matmul(J1.endo(), J2.endo())
    n2 = len(G)
    frame = J1.frame
    V = linalg.nullspace([[G[r][c] - (1 if r == c else 0) for c in range(n2)] for r in range(n2)])
    Vp = linalg.nullspace([[G[r][c] + (1 if r == c else 0) for c in range(n2)] for r in range(n2)])
    return [GSection.from_coords(frame, v) for v in V], [GSection.from_coords(frame, v) for v in Vp]


def gk_check(J1: GCStruct, J2: GCStruct, samples=None) -> GKReport:
    """Commutation, symmetry and sampled positivity of (J1 J2 u, u), plus integrability."""
    A, B = J1.endo(), J2.endo()
    commute = linalg.mat_equal(linalg.matmul(A, B), linalg.matmul(B, A))
    G = linalg.matmul(A, B)
    n = J1.frame.n
    Q = linalg.matmul(_pairing_matrix(n), G)
    symmetric = linalg.mat_equal(Q, linalg.transpose(Q))
    perm = _conj_perm(J1.frame)
    herm = [Q[perm[r]] for r in range(2 * n)]
    positive = True
    min_eig = None
    for point in samples or [{}]:
        Hm = _numeric(herm, point)
        if not np.allclose(Hm, Hm.conj().T, atol=1e-9):
            positive = False
            break
        ev = np.linalg.eigvalsh((Hm + Hm.conj().T) / 2)
        min_eig = float(ev.min()) if min_eig is None else min(min_eig, float(ev.min()))
        if ev.min() <= 1e-12:
            positive = False
    integ = (integrability(J1).ok, integrability(J2).ok)
    ok = commute and symmetric and positive and all(integ)
    return GKReport(ok, commute, symmetric, positive, integ, min_eig)


def act_on_form(Imat, alpha: MixedForm) -> MixedForm:
    """Pullback (I alpha)(X1, ..., Xp) = alpha(I X1, ..., I Xp)."""
    frame = alpha.frame
    n = frame.n
    out: dict[tuple, ScalarExpr] = {}
    for key, v in alpha.terms.items():
        p = len(key)
        for target in combinations(range(n), p):
            s = _ZERO
            for perm in permutations(range(p)):
                sign = _perm_sign(perm)
                prod = ScalarExpr(sign)
                for slot, src in enumerate(perm):
                    entry = Imat[key[src]][target[slot]]
                    if entry.is_zero():
                        prod = _ZERO
                        break
                    prod = prod * entry
                if not prod.is_zero():
                    s = s + prod
            if not s.is_zero():
                out[target] = out.get(target, _ZERO) + s * v
    return MixedForm(frame, out)


def _perm_sign(perm) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def dc(Imat, alpha: MixedForm) -> MixedForm:
    """d^c = I^-1 d I, which is -i(del - delbar) for the chart complex structure."""
    Iinv = linalg.inverse(Imat)
    return act_on_form(Iinv, exterior_d(act_on_form(Imat, alpha)))


@dataclass
class GKData:
    metric: GenMetric
    g: list
    b: MixedForm
    I_plus: list
    I_minus: list
    H: MixedForm
    dc_plus: MixedForm
    dc_minus: MixedForm
    eigen_ranks: dict

    @property
    def h_check(self) -> tuple[MixedForm, MixedForm]:
        """Residuals d^c_+ omega_+ - H and d^c_- omega_- + H."""
        return self.dc_plus - self.H, self.dc_minus + self.H


def _kahler_form(g, Imat, frame) -> MixedForm:
    n = frame.n
    terms = {}
    for a in range(n):
        for b in range(a + 1, n):
            terms[(a, b)] = sum((Imat[c][a] * g[c][b] for c in range(n) if Imat[c][a]), _ZERO)
    return MixedForm(frame, terms)


def gk_extract(J1: GCStruct, J2: GCStruct) -> GKData:
    frame = J1.frame
    n = frame.n
    V, Vp = metric_split(J1, J2)
    if len(V) != n or len(Vp) != n:
        raise DegenerateEigenbundle("V or V_perp has the wrong rank")
    X = [v.x for v in V]
    Xi = [v.xi for v in V]
    try:
        h = linalg.matmul(linalg.inverse(X), Xi)
    except ZeroDivisionError:
        raise DegenerateEigenbundle("V is not a graph over T") from None
    g = [[(h[a][c] + h[c][a]) * _HALF for c in range(n)] for a in range(n)]
    bterms = {(a, c): (h[a][c] - h[c][a]) * _HALF for a in range(n) for c in range(a + 1, n)}
    b = MixedForm(frame, bterms)
    m = GenMetric(frame, g, b)
    Ip = linalg.zeros(n, n)
    Im = linalg.zeros(n, n)
    for a in range(n):
        e = [ScalarExpr(1) if k == a else _ZERO for k in range(n)]
        yp = J1.apply(m.lift(e, 1)).x
        ym = J1.apply(m.lift(e, -1)).x
        for c in range(n):
            Ip[c][a] = yp[c]
            Im[c][a] = ym[c]
    ranks = {}
    E1, E2 = [u.coords() for u in J1.span()], [u.coords() for u in J2.span()]
    for s1, B1 in (("+", E1), ("-", [u.conjugate().coords() for u in J1.span()])):
        for s2, B2 in (("+", E2), ("-", [u.conjugate().coords() for u in J2.span()])):
            ranks[s1 + s2] = _intersection_rank(B1, B2)
    if any(r != n // 2 for r in ranks.values()):
        raise DegenerateEigenbundle(f"eigenbundle ranks {ranks}")
    H = exterior_d(b)
    if J1.H is not None:
        H = H + J1.H
    dcp = dc(Ip, _kahler_form(g, Ip, frame))
    dcm = dc(Im, _kahler_form(g, Im, frame))
    return GKData(m, g, b, Ip, Im, H, dcp, dcm, ranks)


def _intersection_rank(A, B) -> int:
    return len(A) + len(B) - linalg.rank(A + B)


def gk_from_bihermitian(g, I_plus, I_minus, H: MixedForm | None = None, b: MixedForm | None = None,
                        frame: Frame | None = None):
    """Rebuild (J1, J2) from bihermitian data (g, I+, I-, H), optionally B-shifted by b."""
    if frame is None:
        raise ValueError("frame is required")
    n = frame.n
    m = GenMetric(frame, g, b)
    Ip, Imn = linalg.as_matrix(I_plus), linalg.as_matrix(I_minus)

    def eig(M, lam):
        return linalg.nullspace([[M[r][c] - (lam if r == c else 0) for c in range(n)] for r in range(n)])

    hol_p, anti_p = eig(Ip, I), eig(Ip, -I)
    hol_m, anti_m = eig(Imn, I), eig(Imn, -I)
    if len(hol_p) != n // 2 or len(hol_m) != n // 2:
        raise DegenerateEigenbundle("I+ or I- is not a complex structure")
    v_pm = [m.lift(x, 1) for x in hol_p]
    v_mp = [m.lift(x, 1) for x in anti_p]
    v_pp = [m.lift(x, -1) for x in hol_m]
    J1 = GCStruct(frame, v_pp + v_pm, H=H, label="gk1")
    J2 = GCStruct(frame, v_pp + v_mp, H=H, label="gk2")
    for J in (J1, J2):
        rep = integrability(J)
        if not rep.ok:
            raise IntegrabilityFailure(f"{J.label} is not integrable", rep.residual)
    return J1, J2
