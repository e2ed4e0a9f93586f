"""Floating-point Nahm flow dT1/dt = [T2, T3] (cyclic), its spectral invariants,
and the Abel-sum linearity experiment for k = 2."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NonFiniteState(ArithmeticError):
    pass


@dataclass
class NahmState:
    T: np.ndarray  # shape (3, k, k), complex
    t: float = 0.0

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=complex)
        if self.T.ndim != 3 or self.T.shape[0] != 3 or self.T.shape[1] != self.T.shape[2]:
            raise ValueError("a Nahm state is three square matrices of equal size")
        if not np.all(np.isfinite(self.T)):
            raise NonFiniteState("state has non-finite entries")

    @property
    def k(self) -> int:
        return self.T.shape[1]

    def phi(self, z):
        """phi(z) = (T1 + i T2) + 2i T3 z + (T1 - i T2) z^2."""
        T1, T2, T3 = self.T
        return (T1 + 1j * T2) + 2j * T3 * z + (T1 - 1j * T2) * z * z

    def to_json(self) -> list:
        return [[[[float(x.real), float(x.imag)] for x in row] for row in m] for m in self.T]


_FWD = [1, 2, 0]
_BWD = [2, 0, 1]


def nahm_rhs(T: np.ndarray) -> np.ndarray:
    a, b = T[_FWD], T[_BWD]
    return a @ b - b @ a


def _rk4_step(T, h):
    # overflow shows up as inf/nan and is reported by the caller
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = nahm_rhs(T)
        k2 = nahm_rhs(T + 0.5 * h * k1)
        k3 = nahm_rhs(T + 0.5 * h * k2)
        k4 = nahm_rhs(T + h * k3)
        return T + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def nahm_flow(s: NahmState, t_end: float, h: float, observer=None) -> NahmState:
    """Classical RK4 with fixed step h; the last step is shortened to land on t_end.

    ``observer(t, T)`` is called after every step when given.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    T = s.T.copy()
    t = s.t
    remaining = t_end - t
    n = int(np.floor(remaining / h + 1e-9))
    for i in range(n):
        T = _rk4_step(T, h)
        t = s.t + (i + 1) * h
        if not np.all(np.isfinite(T)):
            raise NonFiniteState(f"overflow at t = {t}")
        if observer is not None:
            observer(t, T)
    last = t_end - t
    if last > 1e-12 * max(1.0, abs(t_end)):
        T = _rk4_step(T, last)
        if not np.all(np.isfinite(T)):
            raise NonFiniteState(f"overflow at t = {t_end}")
        if observer is not None:
            observer(t_end, T)
    return NahmState(T, t_end)


def _charpoly_coeffs(m: np.ndarray) -> np.ndarray:
    """[c_1..c_k] with det(x - m) = x^k + c_1 x^(k-1) + ... (Faddeev-LeVerrier)."""
    k = m.shape[-1]
    out = np.zeros(m.shape[:-2] + (k,), dtype=complex)
    eye = np.eye(k)
    M = np.zeros_like(m)
    c = np.ones(m.shape[:-2], dtype=complex)
    for j in range(1, k + 1):
        M = m @ M + c[..., None, None] * eye
        c = -np.trace(m @ M, axis1=-2, axis2=-1) / j
        out[..., j - 1] = c
    return out


def nahm_invariants(s: NahmState) -> list[np.ndarray]:
    """Coefficients a_1..a_k of det(eta - phi(z)); a_i is returned as its z-coefficient
    vector of length 2i + 1 (lowest degree first)."""
    k = s.k
    npts = 2 * k + 1
    roots = np.exp(2j * np.pi * np.arange(npts) / npts)
    mats = np.stack([s.phi(z) for z in roots])
    vals = _charpoly_coeffs(mats)  # (npts, k)
    coeffs = np.fft.fft(vals, axis=0) / npts  # sum_j v_j w^(-jm)
    return [coeffs[: 2 * i + 1, i - 1].copy() for i in range(1, k + 1)]


def invariant_drift(a: NahmState, b: NahmState) -> float:
    return max(float(np.max(np.abs(x - y))) for x, y in zip(nahm_invariants(a), nahm_invariants(b)))


def random_state(k: int, seed: int, norm: float = 1.0, traceless: bool = False) -> NahmState:
    """Complex T_i with spectral norm exactly ``norm``."""
    rng = np.random.default_rng(seed)
    T = rng.normal(size=(3, k, k)) + 1j * rng.normal(size=(3, k, k))
    if traceless:
        T = T - np.trace(T, axis1=1, axis2=2)[:, None, None] * np.eye(k) / k
    for i in range(3):
        n2 = np.linalg.norm(T[i], 2)
        if n2 > 0:
            T[i] *= norm / n2
    return NahmState(T)


@dataclass
class DriftReport:
    k: int
    h: float
    t_end: float
    drift: float
    initial: list
    final: list


def drift_experiment(k: int, seed: int, t_end: float = 1.0, h: float = 1e-3) -> DriftReport:
    s0 = random_state(k, seed)
    worst = [0.0]
    inv0 = nahm_invariants(s0)

    def watch(t, T):
        inv = nahm_invariants(NahmState(T, t))
        worst[0] = max(worst[0], max(float(np.max(np.abs(x - y))) for x, y in zip(inv, inv0)))

    s1 = nahm_flow(s0, t_end, h, observer=watch)
    return DriftReport(k, h, t_end, worst[0], inv0, nahm_invariants(s1))


def order_factor(s: NahmState, t_end: float = 1.0, h: float = 0.04, h_ref: float = 1e-5) -> float:
    """err(h) / err(h/2) against a fine reference run; nominally 16 for RK4."""
    ref = nahm_flow(s, t_end, h_ref).T
    e1 = np.max(np.abs(nahm_flow(s, t_end, h).T - ref))
    e2 = np.max(np.abs(nahm_flow(s, t_end, h / 2).T - ref))
    return float(e1 / e2)


# -- Abel-sum experiment --------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _quartic(s: NahmState) -> np.ndarray:
    """s(z) = -det phi(z) (trace-free k = 2) as coefficients, lowest first."""
    return -nahm_invariants(s)[1]


def _eigen_points(T) -> tuple[np.ndarray, np.ndarray]:
    """Zeros z0 of the lower-left entry c(z) of phi(z) and y0 = a(z0), the upper-left entry."""
    st = NahmState(T)
    T1, T2, T3 = st.T
    alpha, beta, gamma = T1 + 1j * T2, 2j * T3, T1 - 1j * T2
    c = [gamma[1, 0], beta[1, 0], alpha[1, 0]]
    zs = np.roots(c)
    if len(zs) != 2:
        raise ValueError("c(z) must have two finite zeros")
    ys = np.array([st.phi(z)[0, 0] for z in zs])
    return zs, ys


def _segment_integral(quartic, z_a, y_a, z_b, y_b, pieces: int):
    """Integral of dz / y along the straight segment, y continued from y_a by continuity."""
    poly = quartic[::-1]
    total = 0.0 + 0.0j
    y_prev = y_a
    edges = np.linspace(0.0, 1.0, pieces + 1)
    dz = z_b - z_a
    for lo, hi in zip(edges[:-1], edges[1:]):
        ts = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
        ws = 0.5 * (hi - lo) * _GL_WEIGHTS
        for tn, wn in zip(ts, ws):
            y = np.sqrt(np.polyval(poly, z_a + tn * dz))
            if abs(y - y_prev) > abs(y + y_prev):
                y = -y
            y_prev = y
            total += wn * dz / y
    y_end = np.sqrt(np.polyval(poly, z_b))
    if abs(y_end - y_prev) > abs(y_end + y_prev):
        y_end = -y_end
    consistent = abs(y_end - y_b) <= 1e-6 * max(1.0, abs(y_b))
    return total, consistent


@dataclass
class AbelReport:
    seed: int
    t_end: float
    times: list
    abel_sums: list
    rates: list
    mean_rate: complex
    rel_deviation: float
    discriminant_squarefree: bool
    records: list = field(default_factory=list)


def abel_state(seed: int) -> NahmState:
    """Random trace-free k = 2 state whose quartic has simple zeros and c(z) two simple zeros."""
    for attempt in range(100):
        s = random_state(2, seed * 1000 + attempt, traceless=True)
        q = _quartic(s)
        zs = np.roots(q[::-1])
        sep = min(abs(a - b) for i, a in enumerate(zs) for b in zs[i + 1:])
        if len(zs) == 4 and sep > 1e-2:
            return s
    raise ValueError("could not draw a state with a squarefree quartic")


def abel_experiment(seed: int, t_end: float = 1.0, samples: int = 20, h: float = 1e-3,
                    pieces: int = 8) -> AbelReport:
    """Track the divisor of zeros of c(z) on y^2 = s(z) along the flow and integrate dz/y.

    The increments of the Abel sum per unit time should be constant.
    """
    s = abel_state(seed)
    q = _quartic(s)
    zs, ys = _eigen_points(s.T)
    times = [0.0]
    sums = [0.0 + 0.0j]
    records = [{"t": 0.0, "state": s.to_json(),
                "invariants": [[[float(x.real), float(x.imag)] for x in a] for a in nahm_invariants(s)],
                "abelSum": [0.0, 0.0]}]
    dt = t_end / samples
    t = 0.0
    cur = s
    total = 0.0 + 0.0j
    while t < t_end - 1e-12:
        step = min(dt, t_end - t)
        while True:
            nxt = nahm_flow(NahmState(cur.T, t), t + step, min(h, step))
            nz, ny = _eigen_points(nxt.T)
            if abs(nz[0] - zs[0]) + abs(nz[1] - zs[1]) > abs(nz[0] - zs[1]) + abs(nz[1] - zs[0]):
                nz, ny = nz[::-1], ny[::-1]
            inc = 0.0 + 0.0j
            ok = True
            for r in range(2):
                val, consistent = _segment_integral(q, zs[r], ys[r], nz[r], ny[r], pieces)
                ok = ok and consistent
                inc += val
            if ok or step < dt / 256:
                break
            step /= 2
        if not ok:
            raise ValueError("branch tracking failed near a branch point")
        total += inc
        t = nxt.t
        cur, zs, ys = nxt, nz, ny
        times.append(t)
        sums.append(total)
        records.append({"t": t, "state": nxt.to_json(),
                        "invariants": [[[float(x.real), float(x.imag)] for x in a] for a in nahm_invariants(nxt)],
                        "abelSum": [float(total.real), float(total.imag)]})
    rates = [(sums[i + 1] - sums[i]) / (times[i + 1] - times[i]) for i in range(len(times) - 1)]
    mean = complex(np.mean(rates))
    dev = max(abs(r - mean) for r in rates) / abs(mean)
    return AbelReport(seed, t_end, times, sums, rates, mean, float(dev), True, records)
