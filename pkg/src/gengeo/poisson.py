"""Holomorphic Poisson structures, Kodaira-Spencer brackets and Poisson modules.

Conventions: a bivector sigma = sum_{j<k} sigma^jk d_j ^ d_k acts on
one-forms by sigma(xi) = sigma^jk xi_j d_k, and {f, g} = sigma(df, dg)
= sigma^jk d_j f d_k g, so sigma(df) is the Hamiltonian field of f.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from . import linalg
from .scalar import ScalarError, ScalarExpr
from .tensor import Frame, MixedForm, PolyVector, interior, wedge

_ZERO = ScalarExpr(0)


class NotHolomorphic(ScalarError):
    pass


class DegeneratePair(ScalarError):
    pass


def bivector_components(sigma: PolyVector):
    """Full antisymmetric matrix sigma^jk in frame indices."""
    if sigma.degrees() - {2}:
        raise ScalarError("expected a bivector")
    n = sigma.frame.n
    S = linalg.zeros(n, n)
    for (j, k), v in sigma.terms.items():
        S[j][k] = v
        S[k][j] = -v
    return S


def bivector_sharp(sigma: PolyVector, xi) -> list[ScalarExpr]:
    """sigma(xi)^k = sigma^jk xi_j."""
    S = bivector_components(sigma)
    n = len(S)
    xs = xi.components() if isinstance(xi, MixedForm) else list(xi)
    return [sum((S[j][k] * xs[j] for j in range(n) if S[j][k] and xs[j]), _ZERO) for k in range(n)]


def poisson_bracket(sigma: PolyVector, f, g) -> ScalarExpr:
    frame = sigma.frame
    df = [frame.apply(a, f) for a in range(frame.n)]
    dg = [frame.apply(a, g) for a in range(frame.n)]
    return sum((v * (df[j] * dg[k] - df[k] * dg[j]) for (j, k), v in sigma.terms.items()), _ZERO)


def hamiltonian(sigma: PolyVector, f) -> PolyVector:
    frame = sigma.frame
    return PolyVector.vector(frame, bivector_sharp(sigma, [frame.apply(a, f) for a in range(frame.n)]))


def _check_holomorphic(sigma: PolyVector) -> None:
    chart = sigma.frame.chart
    if not chart.is_complex:
        return
    anti = set(chart.antiholomorphic)
    for key, v in sigma.terms.items():
        if anti & set(key):
            raise NotHolomorphic("bivector has antiholomorphic directions")
        for p in chart.antiholomorphic:
            if not v.diff(chart.coords[p]).is_zero():
                raise NotHolomorphic("bivector coefficient depends on a conjugate variable")


def poisson_check(sigma: PolyVector) -> bool:
    """Exact test of sum_l sigma^lj d_l sigma^ik + sigma^li d_l sigma^kj + sigma^lk d_l sigma^ji = 0."""
    _check_holomorphic(sigma)
    frame = sigma.frame
    n = frame.n
    S = bivector_components(sigma)
    dS = [[[frame.apply(l, S[i][k]) if S[i][k] else _ZERO for l in range(n)] for k in range(n)] for i in range(n)]
    for i, j, k in combinations(range(n), 3):
        total = _ZERO
        for l in range(n):
            if S[l][j]:
                total = total + S[l][j] * dS[i][k][l]
            if S[l][i]:
                total = total + S[l][i] * dS[k][j][l]
            if S[l][k]:
                total = total + S[l][k] * dS[j][i][l]
        if not total.is_zero():
            return False
    return True


# -- T-valued (0,q)-forms -----------------------------------------------------

class TForm:
    """sum_J phi_J dzb^J with phi_J a (1,0) vector field, J increasing in 0..m-1."""

    def __init__(self, frame: Frame, terms=None):
        self.frame = frame
        chart = frame.chart
        self.m = len(chart.holomorphic)
        clean = {}
        for k, vec in (terms or {}).items():
            vec = [ScalarExpr.coerce(x) for x in vec]
            if any(not x.is_zero() for x in vec):
                clean[tuple(k)] = vec
        self.terms = clean

    def __add__(self, other):
        out = {k: list(v) for k, v in self.terms.items()}
        for k, v in other.terms.items():
            if k in out:
                out[k] = [a + b for a, b in zip(out[k], v)]
            else:
                out[k] = list(v)
        return TForm(self.frame, out)

    def __neg__(self):
        return TForm(self.frame, {k: [-x for x in v] for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return TForm(self.frame, {k: [s * x for x in v] for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, TForm):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def component(self, key) -> list[ScalarExpr]:
        return self.terms.get(tuple(key), [_ZERO] * self.m)

    def __str__(self):
        if not self.terms:
            return "0"
        chart = self.frame.chart
        hol = [chart.variables[p] for p in chart.holomorphic]
        anti = [chart.variables[p] for p in chart.antiholomorphic]
        parts = []
        for key in sorted(self.terms):
            vec = " + ".join(f"({c})*p({hol[k]})" for k, c in enumerate(self.terms[key]) if not c.is_zero())
            basis = "^".join(f"d({anti[j]})" for j in key)
            parts.append(f"[{vec}]" + (f"*{basis}" if basis else ""))
        return " + ".join(parts)

    __repr__ = __str__


def _hol(frame: Frame):
    chart = frame.chart
    if not chart.is_complex or not frame.is_coordinate:
        raise ScalarError("needs the coordinate frame of a complex chart")
    return [chart.coords[p] for p in chart.holomorphic], [chart.coords[p] for p in chart.antiholomorphic]


def hol_bracket(frame: Frame, X: list, Y: list) -> list[ScalarExpr]:
    """Lie bracket of (1,0) vector fields given by holomorphic components."""
    hz, _ = _hol(frame)
    m = len(hz)
    out = []
    for k in range(m):
        s = _ZERO
        for a in range(m):
            if X[a] and Y[k]:
                s = s + X[a] * Y[k].diff(hz[a])
            if Y[a] and X[k]:
                s = s - Y[a] * X[k].diff(hz[a])
        out.append(s)
    return out


def ks_bracket(phi: TForm, psi: TForm) -> TForm:
    """[phi, psi] = sum_{J,K} [phi_J, psi_K] dzb^J ^ dzb^K."""
    out: dict[tuple, list] = {}
    for J, a in phi.terms.items():
        for K, b in psi.terms.items():
            if set(J) & set(K):
                continue
            seq = list(J) + list(K)
            sign = 1
            for x in J:
                for y in K:
                    if x > y:
                        sign = -sign
            key = tuple(sorted(seq))
            br = hol_bracket(phi.frame, a, b)
            if sign < 0:
                br = [-x for x in br]
            if key in out:
                out[key] = [p + q for p, q in zip(out[key], br)]
            else:
                out[key] = br
    return TForm(phi.frame, out)


def _omega_matrix(omega: MixedForm):
    """omega_{jbar l} = omega(d/dz_l, d/dzb_j)."""
    frame = omega.frame
    chart = frame.chart
    hol, anti = chart.holomorphic, chart.antiholomorphic
    return [[omega[(hol[l], anti[j])] for l in range(len(hol))] for j in range(len(anti))]


def _hol_sigma(sigma: PolyVector):
    chart = sigma.frame.chart
    S = bivector_components(sigma)
    hol = chart.holomorphic
    return [[S[hol[a]][hol[b]] for b in range(len(hol))] for a in range(len(hol))]


def ks_class(sigma: PolyVector, omega: MixedForm) -> TForm:
    """alpha_{jbar k} = -2i omega_{jbar l} sigma^lk, as the T-valued form alpha_{jbar k} d_k dzb_j."""
    from .scalar import I
    W = _omega_matrix(omega)
    S = _hol_sigma(sigma)
    m = len(S)
    terms = {}
    for j in range(m):
        terms[(j,)] = [sum((W[j][l] * S[l][k] for l in range(m) if W[j][l] and S[l][k]), _ZERO) * (-2 * I)
                       for k in range(m)]
    return TForm(sigma.frame, terms)


@dataclass
class UnobstructedStep:
    phi1: TForm
    bracket: TForm
    expected: TForm
    poisson_matrix: list
    contraction: MixedForm
    identity_ok: bool


def unobstructed_step(sigma: PolyVector, f) -> UnobstructedStep:
    """First-order deformation phi1 = sigma(d f_kbar) dzb_k and its self-bracket.

    Checks [phi1, phi1] = sum_{k,l} sigma(d{f_kbar, f_lbar}) dzb_k ^ dzb_l and
    {f_kbar, f_lbar} dzb_k ^ dzb_l summed = i_sigma(omega ^ omega) with
    omega = sum f_{l kbar} dz_l ^ dzb_k.
    """
    frame = sigma.frame
    if not poisson_check(sigma):
        raise ScalarError("bivector is not Poisson")
    hz, az = _hol(frame)
    m = len(hz)
    S = _hol_sigma(sigma)
    f = ScalarExpr.coerce(f)
    fk = [f.diff(z) for z in az]

    def ham(h):
        dh = [h.diff(z) for z in hz]
        return [sum((S[j][k] * dh[j] for j in range(m) if S[j][k] and dh[j]), _ZERO) for k in range(m)]

    def pb(a, b):
        da = [a.diff(z) for z in hz]
        db = [b.diff(z) for z in hz]
        return sum((S[i][j] * da[i] * db[j] for i in range(m) for j in range(m) if S[i][j]), _ZERO)

    phi1 = TForm(frame, {(k,): ham(fk[k]) for k in range(m)})
    lhs = ks_bracket(phi1, phi1)
    P = [[pb(fk[k], fk[l]) for l in range(m)] for k in range(m)]
    rhs_terms = {}
    for k in range(m):
        for l in range(m):
            if k == l:
                continue
            key = (min(k, l), max(k, l))
            vec = ham(P[k][l])
            if k > l:
                vec = [-x for x in vec]
            if key in rhs_terms:
                rhs_terms[key] = [a + b for a, b in zip(rhs_terms[key], vec)]
            else:
                rhs_terms[key] = vec
    rhs = TForm(frame, rhs_terms)
    chart = frame.chart
    omega = MixedForm(frame, {})
    for l in range(m):
        for k in range(m):
            c = fk[k].diff(hz[l])
            if not c.is_zero():
                omega = omega + wedge(MixedForm.coframe(frame, chart.holomorphic[l]),
                                      MixedForm.coframe(frame, chart.antiholomorphic[k])).scale(c)
    contraction = interior(sigma, wedge(omega, omega))
    expected_contraction = MixedForm(frame, {})
    for k in range(m):
        for l in range(m):
            if P[k][l]:
                expected_contraction = expected_contraction + wedge(
                    MixedForm.coframe(frame, chart.antiholomorphic[k]),
                    MixedForm.coframe(frame, chart.antiholomorphic[l])).scale(P[k][l])
    ok = lhs == rhs and contraction == expected_contraction
    return UnobstructedStep(phi1, lhs, rhs, P, contraction, ok)


# -- Poisson modules ------------------------------------------------------------

@dataclass
class PoissonModule:
    """Local Poisson module of rank k on a complex chart.

    ``A[l]`` is the k x k matrix of d/dz_l coefficients of the connection
    matrix A = sum_l A[l] d/dz_l; f acts on s = sum s_j e_j by
    f.s = X_f(s) - A(f) s with X_f = sigma(df).
    """

    sigma: PolyVector
    A: list
    rank: int

    def action(self, f, s: list) -> list[ScalarExpr]:
        frame = self.sigma.frame
        hz, _ = _hol(frame)
        m = len(hz)
        f = ScalarExpr.coerce(f)
        df = [f.diff(z) for z in hz]
        S = _hol_sigma(self.sigma)
        Xf = [sum((S[j][k] * df[j] for j in range(m) if S[j][k] and df[j]), _ZERO) for k in range(m)]
        out = []
        for i in range(self.rank):
            v = sum((Xf[k] * s[i].diff(hz[k]) for k in range(m) if Xf[k]), _ZERO)
            for j in range(self.rank):
                af = sum((self.A[l][i][j] * df[l] for l in range(m) if self.A[l][i][j] and df[l]), _ZERO)
                if af:
                    v = v - af * s[j]
            out.append(v)
        return out


def module_from_two_fields(X1: PolyVector, X2: PolyVector) -> PoissonModule:
    """Rank-2 module on C^2 with X1, X2 flat: sigma = det P d1^d2, A = -sigma(dP) P^-1."""
    frame = X1.frame
    hz, az = _hol(frame)
    chart = frame.chart
    if len(hz) != 2:
        raise ScalarError("module_from_two_fields works on C^2")
    hol = chart.holomorphic
    P = [[X1[(hol[r],)], X2[(hol[r],)]] for r in range(2)]
    for X in (X1, X2):
        for key, v in X.terms.items():
            if key[0] not in hol or any(not v.diff(z).is_zero() for z in az):
                raise NotHolomorphic("vector fields must be holomorphic")
    detP = linalg.det(P)
    if detP.is_zero():
        raise DegeneratePair("X1 and X2 are everywhere dependent")
    sigma = PolyVector(frame, {(hol[0], hol[1]): detP})
    Pinv = linalg.inverse(P)
    dP = [[[P[r][c].diff(z) for c in range(2)] for r in range(2)] for z in hz]
    # sigma(dh) = sigma^12 (d1 h d_2 - d2 h d_1)
    sdP = [linalg.mscale(-detP, dP[1]), linalg.mscale(detP, dP[0])]
    A = [linalg.mscale(-1, linalg.matmul(sdP[l], Pinv)) for l in range(2)]
    return PoissonModule(sigma, A, 2)


def canonical_module(sigma: PolyVector) -> PoissonModule:
    """Canonical bundle: f.(h dz_1^...^dz_m) = (X_f h + h (d_i sigma^ij)(d_j f)) dz."""
    frame = sigma.frame
    hz, _ = _hol(frame)
    m = len(hz)
    S = _hol_sigma(sigma)
    div = [sum((S[i][j].diff(hz[i]) for i in range(m) if S[i][j]), _ZERO) for j in range(m)]
    A = [[[-div[l]]] for l in range(m)]
    return PoissonModule(sigma, A, 1)


def cohiggs_module(frame: Frame, phis: list) -> PoissonModule:
    """sigma = 0 module with f.s = phi(df) s, i.e. A = -phi."""
    k = len(phis[0])
    A = [linalg.mscale(-1, linalg.as_matrix(p)) for p in phis]
    return PoissonModule(PolyVector(frame, {}), A, k)


def module_check(module: PoissonModule, f, g, s: list) -> bool:
    """g.(f.s) - f.(g.s) == {g, f}.s exactly."""
    s = [ScalarExpr.coerce(x) for x in s]
    lhs = [a - b for a, b in zip(module.action(g, module.action(f, s)), module.action(f, module.action(g, s)))]
    bracket = poisson_bracket(module.sigma, g, f) if module.sigma.terms else ScalarExpr(0)
    rhs = module.action(bracket, s)
    return all((a - b).is_zero() for a, b in zip(lhs, rhs))


def flat_sections_ok(module: PoissonModule, P) -> bool:
    """D-bar X_i = 0: sigma(dP) + A P = 0 column by column."""
    frame = module.sigma.frame
    hz, _ = _hol(frame)
    S = _hol_sigma(module.sigma)
    P = linalg.as_matrix(P)
    k = module.rank
    m = len(hz)
    for r in range(k):
        for c in range(k):
            dP = [P[r][c].diff(z) for z in hz]
            for l in range(m):
                sig = sum((S[j][l] * dP[j] for j in range(m) if S[j][l]), _ZERO)
                ap = sum((module.A[l][r][t] * P[t][c] for t in range(k)), _ZERO)
                if not (sig + ap).is_zero():
                    return False
    return True
