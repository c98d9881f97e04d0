"""Exact matrix linear algebra over Q(zeta_L): rank, solve, kernel, positivity.

Matrices are numpy object arrays of Cyclo scalars.  Rank-style questions on
large, very sparse systems (the freeness battery) go through a dict-of-columns
sparse elimination; small dense solves use straight Gaussian elimination.
Positivity of Hermitian matrices is certified through the exact characteristic
polynomial plus interval-arithmetic sign evaluation.
"""

from fractions import Fraction

import numpy as np

from .scalars import Cyclo, real_sign


def zeros(rows, cols, order):
    z = Cyclo.rational(0, order)
    return np.full((rows, cols), z, dtype=object)


def eye(n, order):
    m = zeros(n, n, order)
    one = Cyclo.rational(1, order)
    for i in range(n):
        m[i, i] = one
    return m


def adjoint(m):
    r, c = m.shape
    out = np.empty((c, r), dtype=object)
    for i in range(r):
        for j in range(c):
            out[j, i] = m[i, j].conjugate()
    return out


def scale(m, s):
    return np.vectorize(lambda x: x * s, otypes=[object])(m)


def is_zero_matrix(m):
    return all(x.is_zero() for x in m.flat)


def gauss_eliminate(a):
    """Row echelon form; returns (matrix, pivot column list)."""
    a = a.copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if not a[i, c].is_zero()), None)
        if pivot is None:
            continue
        if pivot != r:
            a[[r, pivot]] = a[[pivot, r]]
        inv = a[r, c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and not a[i, c].is_zero():
                f = a[i, c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(a):
    if a.size == 0:
        return 0
    _, pivots = gauss_eliminate(a)
    return len(pivots)


def solve(a, b):
    """x with a @ x = b over the field, or None.  b may be a vector or matrix."""
    b = b.reshape(-1, 1) if b.ndim == 1 else b
    aug = np.concatenate([a, b], axis=1)
    ech, pivots = gauss_eliminate(aug)
    ncols = a.shape[1]
    if any(p >= ncols for p in pivots):
        return None
    order = a[0, 0].order if a.size else b[0, 0].order
    x = zeros(ncols, b.shape[1], order)
    for r, c in enumerate(pivots):
        for j in range(b.shape[1]):
            x[c, j] = ech[r, ncols + j]
    return x if b.shape[1] > 1 else x[:, 0]


def kernel(a):
    """Columns spanning the null space of a."""
    ech, pivots = gauss_eliminate(a)
    cols = a.shape[1]
    order = a[0, 0].order if a.size else 1
    free = [c for c in range(cols) if c not in pivots]
    basis = zeros(cols, len(free), order)
    one = Cyclo.rational(1, order)
    for k, fc in enumerate(free):
        basis[fc, k] = one
        for r, pc in enumerate(pivots):
            basis[pc, k] = -ech[r, fc]
    return basis


class SparseRank:
    """Incremental exact rank of sparse rows (dict col -> Cyclo)."""

    def __init__(self):
        self.pivots = {}

    def add_row(self, row):
        """Insert a row; returns True if it increased the rank."""
        row = {c: v for c, v in row.items() if not v.is_zero()}
        while row:
            c = min(row)
            if c not in self.pivots:
                self.pivots[c] = row
                return True
            pivot = self.pivots[c]
            f = row[c] * pivot[c].inverse()
            for pc, pv in pivot.items():
                val = row.get(pc)
                nv = (val - f * pv) if val is not None else -(f * pv)
                if nv.is_zero():
                    row.pop(pc, None)
                else:
                    row[pc] = nv
        return False

    @property
    def rank(self):
        return len(self.pivots)


def sparse_rank(rows, stop_at=None):
    sr = SparseRank()
    for row in rows:
        sr.add_row(row)
        if stop_at is not None and sr.rank >= stop_at:
            return sr.rank
    return sr.rank


# -- Hermitian positivity -----------------------------------------------------

def char_poly_symmetric_coeffs(h):
    """Elementary symmetric functions e_1..e_n of the eigenvalues of h.

    Faddeev-LeVerrier: exact in the field; for Hermitian h every e_k is real.
    char(t) = t^n - e_1 t^(n-1) + e_2 t^(n-2) - ...
    """
    n = h.shape[0]
    order = h[0, 0].order
    m = h.copy()
    coeffs = []
    ident = eye(n, order)
    for k in range(1, n + 1):
        tr = Cyclo.rational(0, order)
        for i in range(n):
            tr = tr + m[i, i]
        ck = tr * Cyclo.rational(Fraction(1, k), order)
        # the recursion produces p(t) = t^n - c_1 t^(n-1) - c_2 t^(n-2) - ...;
        # e_k = (-1)^(k+1) c_k converts to elementary symmetric functions
        coeffs.append(ck if k % 2 == 1 else -ck)
        if k < n:
            m = h @ (m - scale(ident, ck))
    return coeffs


def is_hermitian(h):
    return is_zero_matrix(h - adjoint(h))


def psd_certificate(h):
    """Interval-certified positive semidefiniteness of a Hermitian matrix.

    Returns (verdict, details): verdict True iff every elementary symmetric
    function of the eigenvalues is >= 0, each sign decided by an interval
    that excludes zero (exact zeros allowed).
    """
    if h.size == 0:
        return True, []
    if not is_hermitian(h):
        raise ValueError("psd_certificate expects a Hermitian matrix")
    signs = []
    for ck in char_poly_symmetric_coeffs(h):
        s = real_sign(ck)
        signs.append(s)
        if s < 0:
            return False, signs
    return True, signs


def operator_norm_bound(h, tol=Fraction(1, 1024)):
    """Rational r with lambda_max(h) <= r <= lambda_max(h) + tol (h Hermitian PSD).

    Uses bisection with the PSD certificate of r*I - h.
    """
    n = h.shape[0]
    order = h[0, 0].order
    # coarse upper bound: n * max |entry| <= n * (1 + sum |coeff|) per entry
    coarse = Fraction(0)
    for x in h.flat:
        bound = sum(abs(c) for c in x.coeffs)
        coarse = max(coarse, bound)
    hi = Fraction(n) * coarse + 1
    lo = Fraction(0)
    ident = eye(n, order)
    while hi - lo > tol:
        mid = (hi + lo) / 2
        shifted = scale(ident, Cyclo.rational(mid, order)) - h
        ok, _ = psd_certificate(shifted)
        if ok:
            hi = mid
        else:
            lo = mid
    return hi
