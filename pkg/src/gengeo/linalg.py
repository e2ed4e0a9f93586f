"""Exact linear algebra over the scalar fraction field (dense lists of lists)."""

from __future__ import annotations

from .scalar import ScalarExpr

Matrix = list  # list[list[ScalarExpr]]


def zeros(r: int, c: int) -> Matrix:
    z = ScalarExpr(0)
    return [[z] * c for _ in range(r)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = ScalarExpr(1)
    return m


def as_matrix(rows) -> Matrix:
    return [[ScalarExpr.coerce(x) for x in row] for row in rows]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = zeros(n, m)
    for i in range(n):
        for j in range(m):
            s = ScalarExpr(0)
            for t in range(k):
                if a[i][t] and b[t][j]:
                    s = s + a[i][t] * b[t][j]
            out[i][j] = s
    return out


def matvec(a: Matrix, v) -> list:
    return [sum((a[i][t] * v[t] for t in range(len(v)) if a[i][t] and v[t]), ScalarExpr(0))
            for i in range(len(a))]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def madd(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def msub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mscale(s, a: Matrix) -> Matrix:
    return [[s * x for x in row] for row in a]


def is_zero_matrix(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def mat_equal(a: Matrix, b: Matrix) -> bool:
    return is_zero_matrix(msub(a, b))


def rref(a: Matrix):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    m = [list(row) for row in a]
    rows = len(m)
    cols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = next((i for i in range(r, rows) if not m[i][c].is_zero()), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = ScalarExpr(1) / m[r][c]
        m[r] = [x * inv if x else x for x in m[r]]
        for i in range(rows):
            if i != r and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [x - f * y if y else x for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1]) if a else 0


def nullspace(a: Matrix, ncols: int | None = None) -> list[list[ScalarExpr]]:
    """Basis of the right kernel, one vector per free column."""
    if not a:
        n = ncols or 0
        return [[ScalarExpr(1) if i == j else ScalarExpr(0) for i in range(n)] for j in range(n)]
    m, pivots = rref(a)
    n = len(a[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [ScalarExpr(0)] * n
        v[f] = ScalarExpr(1)
        for r, p in enumerate(pivots):
            v[p] = -m[r][f]
        basis.append(v)
    return basis


def solve(a: Matrix, b: list):
    """One solution of a x = b with free variables set to zero, or None."""
    n = len(a[0]) if a else 0
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    m, pivots = rref(aug)
    if n in pivots:
        return None
    x = [ScalarExpr(0)] * n
    for r, p in enumerate(pivots):
        x[p] = m[r][n]
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + idrow for row, idrow in zip(a, identity(n))]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in m]


def det(a: Matrix) -> ScalarExpr:
    m = [list(row) for row in a]
    n = len(m)
    d = ScalarExpr(1)
    for c in range(n):
        p = next((i for i in range(c, n) if not m[i][c].is_zero()), None)
        if p is None:
            return ScalarExpr(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d = d * m[c][c]
        inv = ScalarExpr(1) / m[c][c]
        for i in range(c + 1, n):
            if not m[i][c].is_zero():
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def in_span(vectors: list[list], v: list) -> bool:
    if not vectors:
        return all(x.is_zero() for x in v)
    cols = transpose(vectors)
    return solve(cols, v) is not None


def charpoly(a: Matrix) -> list[ScalarExpr]:
    """Coefficients [1, c1, ..., cn] of det(x - a), by Faddeev-LeVerrier."""
    n = len(a)
    coeffs = [ScalarExpr(1)]
    m = zeros(n, n)
    for k in range(1, n + 1):
        prev = coeffs[-1]
        m = madd(matmul(a, m), mscale(prev, identity(n)))
        am = matmul(a, m)
        tr = sum((am[i][i] for i in range(n)), ScalarExpr(0))
        coeffs.append(-tr / k)
    return coeffs
