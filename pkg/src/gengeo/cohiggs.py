"""Co-Higgs bundles on the projective line: validation, stability, spectral
data and the rank-2 moduli description by points of the spectral curve.

A bundle is V = O(m_1) + ... + O(m_k) with phi a k x k matrix whose (i, j)
entry is a polynomial in the affine coordinate z of degree at most
2 + m_i - m_j (a section of O(2 + m_i - m_j)).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import linalg
from .sampling import random_coeff
from .scalar import Chart, ScalarError, ScalarExpr

_ZERO = ScalarExpr(0)


class DegreeBoundViolation(ScalarError):
    pass


class NotStable(ScalarError):
    pass


class ConstraintViolation(ScalarError):
    pass


class NonCommutingHiggs(ScalarError):
    pass


class NotDolbeaultExact(ScalarError):
    pass


_CP1 = None


def cp1_chart() -> Chart:
    """Shared complex chart (z, zb) on the affine line of CP^1."""
    global _CP1
    if _CP1 is None:
        _CP1 = Chart.complex("CP1", ["z"])
    return _CP1


def _z():
    return cp1_chart()["z"]


@dataclass
class CoHiggsBundle:
    splitting: tuple
    phi: list

    def __post_init__(self):
        self.splitting = tuple(self.splitting)
        self.phi = linalg.as_matrix(self.phi)

    @property
    def rank(self) -> int:
        return len(self.splitting)

    @property
    def degree(self) -> int:
        return sum(self.splitting)

    def __eq__(self, other):
        if not isinstance(other, CoHiggsBundle):
            return NotImplemented
        return self.splitting == other.splitting and linalg.mat_equal(self.phi, other.phi)

    def __str__(self):
        rows = "; ".join(", ".join(str(x) for x in r) for r in self.phi)
        return f"CoHiggs(O{list(self.splitting)}, {{{rows}}})"


def _poly_coeffs(p: ScalarExpr) -> dict[int, ScalarExpr]:
    z = _z()
    chart = cp1_chart()
    if not p.diff(chart["zb"]).is_zero():
        raise DegreeBoundViolation(f"entry {p} is not holomorphic")
    try:
        return p.coefficients(z)
    except ScalarError:
        raise DegreeBoundViolation(f"entry {p} is not a polynomial in z") from None


def validate(b: CoHiggsBundle) -> None:
    k = b.rank
    if len(b.phi) != k or any(len(r) != k for r in b.phi):
        raise DegreeBoundViolation("phi has the wrong size")
    for i in range(k):
        for j in range(k):
            bound = 2 + b.splitting[i] - b.splitting[j]
            coeffs = _poly_coeffs(b.phi[i][j])
            deg = max(coeffs) if coeffs else -1
            if deg > bound:
                raise DegreeBoundViolation(
                    f"entry ({i},{j}) has degree {deg} > {bound}" if bound >= 0
                    else f"entry ({i},{j}) must vanish")
            if any(not c.is_constant() for c in coeffs.values()):
                raise DegreeBoundViolation(f"entry ({i},{j}) has non-constant coefficients")


def validate_commuting(phis: list) -> None:
    """phi^j components of a co-Higgs field on a higher-dimensional space must commute."""
    mats = [linalg.as_matrix(p) for p in phis]
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            comm = linalg.msub(linalg.matmul(mats[a], mats[b]), linalg.matmul(mats[b], mats[a]))
            if not linalg.is_zero_matrix(comm):
                raise NonCommutingHiggs(f"phi^{a} and phi^{b} do not commute")


def trace(m) -> ScalarExpr:
    return sum((m[i][i] for i in range(len(m))), _ZERO)


# -- univariate helpers --------------------------------------------------------------

def _coeff_list(p: ScalarExpr) -> list[ScalarExpr]:
    cs = _poly_coeffs(p)
    if not cs:
        return []
    return [cs.get(e, _ZERO) for e in range(max(cs) + 1)]


def _from_coeffs(cs) -> ScalarExpr:
    z = _z()
    out = _ZERO
    for e, c in enumerate(cs):
        if not ScalarExpr.coerce(c).is_zero():
            out = out + ScalarExpr.coerce(c) * z ** e
    return out


def _trim(cs):
    cs = list(cs)
    while cs and cs[-1].is_zero():
        cs.pop()
    return cs


def _poly_rem(a, b):
    a, b = _trim(a), _trim(b)
    while len(a) >= len(b) and a:
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[i + shift] = a[i + shift] - f * c
        a = _trim(a)
    return a


def _poly_gcd_degree(a, b) -> int:
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _poly_rem(a, b)
    return len(a) - 1


def is_squarefree_section(cs, degree: int) -> bool:
    """A section of O(degree) with affine coefficients cs has no repeated zero on CP^1."""
    cs = _trim(cs)
    if len(cs) - 1 < degree - 1:
        return False
    deriv = [c * i for i, c in enumerate(cs)][1:]
    return _poly_gcd_degree(cs, deriv) == 0


# -- stability and spectral data ---------------------------------------------------------

def _normalize_order(b: CoHiggsBundle) -> CoHiggsBundle:
    """Reorder a rank-2 bundle so the splitting is (m, -1-m) with m >= -1-m."""
    if b.rank == 2 and b.splitting[0] < b.splitting[1]:
        p = b.phi
        return CoHiggsBundle((b.splitting[1], b.splitting[0]), [[p[1][1], p[1][0]], [p[0][1], p[0][0]]])
    return b


def is_stable_rank2(b: CoHiggsBundle) -> tuple[bool, str]:
    """Stability of a trace-free rank-2 co-Higgs bundle of degree -1."""
    validate(b)
    if b.rank != 2:
        return False, "rank is not 2"
    if not trace(b.phi).is_zero():
        return False, "phi is not trace-free"
    if b.degree != -1:
        return False, "degree is not -1"
    nb = _normalize_order(b)
    m = nb.splitting[0]
    if m != 0:
        return False, f"summand O({m}) is phi-invariant and destabilizing"
    if nb.phi[1][0].is_zero():
        return False, "the O summand is phi-invariant (c = 0)"
    return True, "stable"


@dataclass
class SpectralData:
    coefficients: list
    genus: int
    deg_L: int
    smooth: bool | None


def spectral(b: CoHiggsBundle) -> SpectralData:
    """det(eta - phi) = eta^k + a_1 eta^(k-1) + ... with deg a_i <= 2i."""
    validate(b)
    k = b.rank
    cp = linalg.charpoly(b.phi)
    coeffs = cp[1:]
    for i, a in enumerate(coeffs, start=1):
        cs = _poly_coeffs(a)
        if cs and max(cs) > 2 * i:
            raise DegreeBoundViolation(f"a_{i} has degree {max(cs)} > {2 * i}")
    smooth = None
    if k == 2:
        disc = coeffs[0] * coeffs[0] - coeffs[1] * 4
        smooth = is_squarefree_section(_coeff_list(disc), 4)
    return SpectralData(coeffs, (k - 1) ** 2, b.degree - k + k * k, smooth)


# -- moduli of rank-2 stable bundles ------------------------------------------------------

@dataclass
class ModuliPoint:
    """Point (z0, y0) on y^2 = s(z); z0 = None stands for the point at infinity,
    where y0 is read in the chart w = 1/z (so y0^2 is the z^4 coefficient of s)."""

    z0: ScalarExpr | None
    y0: ScalarExpr
    s: ScalarExpr

    def __post_init__(self):
        self.y0 = ScalarExpr.coerce(self.y0)
        self.s = ScalarExpr.coerce(self.s)
        if self.z0 is not None:
            self.z0 = ScalarExpr.coerce(self.z0)

    def check(self) -> None:
        cs = _coeff_list(self.s)
        if len(cs) > 5:
            raise ConstraintViolation("s must be a quartic")
        if self.z0 is None:
            top = cs[4] if len(cs) == 5 else _ZERO
            if not (top - self.y0 * self.y0).is_zero():
                raise ConstraintViolation("y0^2 differs from s at infinity")
        elif not (self.s.subs({_z(): self.z0}) - self.y0 * self.y0).is_zero():
            raise ConstraintViolation("y0^2 != s(z0)")

    def __eq__(self, other):
        if not isinstance(other, ModuliPoint):
            return NotImplemented
        if (self.z0 is None) != (other.z0 is None):
            return False
        if self.z0 is not None and not (self.z0 - other.z0).is_zero():
            return False
        return (self.y0 - other.y0).is_zero() and (self.s - other.s).is_zero()

    def __str__(self):
        z0 = "inf" if self.z0 is None else str(self.z0)
        return f"ModuliPoint(z0={z0}, y0={self.y0}, s={self.s})"


def moduli_forward(b: CoHiggsBundle) -> ModuliPoint:
    ok, why = is_stable_rank2(b)
    if not ok:
        raise NotStable(why)
    nb = _normalize_order(b)
    a, c = nb.phi[0][0], nb.phi[1][0]
    s = -linalg.det(nb.phi)
    cc = _coeff_list(c)
    c0 = cc[0] if cc else _ZERO
    c1 = cc[1] if len(cc) > 1 else _ZERO
    if c1.is_zero():
        ac = _coeff_list(a)
        y0 = ac[2] if len(ac) > 2 else _ZERO
        return ModuliPoint(None, y0, s)
    z0 = -c0 / c1
    return ModuliPoint(z0, a.subs({_z(): z0}), s)


def moduli_inverse(p: ModuliPoint) -> CoHiggsBundle:
    """Representative [[y0, b], [z - z0, -y0]] (or [[y0 z^2, b], [1, -y0 z^2]] at infinity)."""
    p.check()
    z = _z()
    if p.z0 is None:
        a = p.y0 * z ** 2
        bb = p.s - p.y0 * p.y0 * z ** 4
        return CoHiggsBundle((0, -1), [[a, bb], [1, -a]])
    lin = z - p.z0
    bb = (p.s - p.y0 * p.y0) / lin
    return CoHiggsBundle((0, -1), [[p.y0, bb], [lin, -p.y0]])


def gauge(b: CoHiggsBundle, A, B, C) -> CoHiggsBundle:
    """g phi g^-1 for the automorphism g = [[A, B], [0, C]] of O + O(-1); B linear in z."""
    nb = _normalize_order(b)
    g = linalg.as_matrix([[A, B], [0, C]])
    ginv = linalg.inverse(g)
    return CoHiggsBundle(nb.splitting, linalg.matmul(linalg.matmul(g, nb.phi), ginv))


def normal_form(b: CoHiggsBundle) -> CoHiggsBundle:
    """Gauge to c monic (or c = 1 when it vanishes at infinity) and a reduced to its value at the point."""
    nb = _normalize_order(b)
    z = _z()
    cc = _coeff_list(nb.phi[1][0])
    c0 = cc[0] if cc else _ZERO
    c1 = cc[1] if len(cc) > 1 else _ZERO
    lead = c1 if not c1.is_zero() else c0
    nb = gauge(nb, 1, 0, ScalarExpr(1) / lead)
    a, c = nb.phi[0][0], nb.phi[1][0]
    ac = _coeff_list(a)
    if not c1.is_zero():
        z0 = -c0 / c1
        shift = (a - a.subs({z: z0})) / c
    else:
        top = ac[2] if len(ac) > 2 else _ZERO
        shift = a - top * z ** 2
    return gauge(nb, 1, -shift, 1)


def random_stable(rng: random.Random, bound: int = 3) -> CoHiggsBundle:
    """Random stable trace-free phi on O + O(-1)."""
    z = _z()
    while True:
        a = _from_coeffs([random_coeff(rng, bound, True) for _ in range(3)])
        bb = _from_coeffs([random_coeff(rng, bound, True) for _ in range(4)])
        c = _from_coeffs([random_coeff(rng, bound, True) for _ in range(2)])
        if not c.is_zero():
            return CoHiggsBundle((0, -1), [[a, bb], [c, -a]])


def random_moduli_point(rng: random.Random, bound: int = 3, infinity_rate: float = 0.1) -> ModuliPoint:
    z = _z()
    y0 = random_coeff(rng, bound, True)
    cs = [random_coeff(rng, bound, True) for _ in range(5)]
    if rng.random() < infinity_rate:
        cs[4] = y0 * y0
        return ModuliPoint(None, y0, _from_coeffs(cs))
    z0 = random_coeff(rng, bound, True)
    s = _from_coeffs(cs)
    s = s - s.subs({z: z0}) + y0 * y0
    return ModuliPoint(z0, y0, s)


def random_automorphism(rng: random.Random, bound: int = 3):
    def nonzero():
        while True:
            c = random_coeff(rng, bound, True)
            if not c.is_zero():
                return c
    z = _z()
    return nonzero(), random_coeff(rng, bound, True) + random_coeff(rng, bound, True) * z, nonzero()


# -- B-field action -------------------------------------------------------------------------

@dataclass
class BFieldReport:
    psi: list
    dbar_psi: list
    matches_contraction: bool
    commutes: bool
    gauge_ok: bool
    phi_invariant: bool


def bfield_action(phis: list, B, theta, chart: Chart | None = None) -> BFieldReport:
    """Exact B = dbar theta acting on a co-Higgs field phi = sum_j phi^j d/dz_j.

    B[j][i] is B_{j ibar} = d theta_j / d zb_i.  Computes psi = sum_j theta_j phi^j,
    checks dbar psi = i_phi B, [psi, dbar psi] = 0 and that exp(psi) acts as a
    gauge transformation commuting with phi.
    """
    chart = chart or cp1_chart()
    hz = [chart.coords[p] for p in chart.holomorphic]
    az = [chart.coords[p] for p in chart.antiholomorphic]
    m = len(hz)
    phis = [linalg.as_matrix(p) for p in phis]
    theta = [ScalarExpr.coerce(t) for t in theta]
    B = [[ScalarExpr.coerce(x) for x in row] for row in B]
    for j in range(m):
        for i in range(m):
            if not (theta[j].diff(az[i]) - B[j][i]).is_zero():
                raise NotDolbeaultExact(f"B_({j},{i}) != d theta_{j} / d zb_{i}")
    validate_commuting(phis)
    k = len(phis[0])
    psi = linalg.zeros(k, k)
    for j in range(m):
        psi = linalg.madd(psi, linalg.mscale(theta[j], phis[j]))
    dpsi = [[[x.diff(az[i]) for x in row] for row in psi] for i in range(m)]
    contraction = [linalg.zeros(k, k) for _ in range(m)]
    for i in range(m):
        for j in range(m):
            contraction[i] = linalg.madd(contraction[i], linalg.mscale(B[j][i], phis[j]))
    matches = all(linalg.mat_equal(dpsi[i], contraction[i]) for i in range(m))
    commutes = all(linalg.is_zero_matrix(linalg.msub(linalg.matmul(psi, d), linalg.matmul(d, psi)))
                   for d in dpsi)
    psi2 = linalg.matmul(psi, psi)
    gauge_ok = all(linalg.mat_equal([[x.diff(az[i]) for x in row] for row in psi2],
                                    linalg.mscale(2, linalg.matmul(psi, dpsi[i]))) for i in range(m))
    phi_inv = all(linalg.is_zero_matrix(linalg.msub(linalg.matmul(psi, p), linalg.matmul(p, psi))) for p in phis)
    return BFieldReport(psi, dpsi, matches, commutes, gauge_ok, phi_inv)
