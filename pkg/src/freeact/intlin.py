"""Exact integer linear algebra: Smith normal form, kernels, lattice quotients.

Everything here works on numpy arrays with dtype=object holding Python ints,
so there is no overflow anywhere.  This is the engine behind every cohomology
computation in the package.
"""

import numpy as np


def _as_int_matrix(a):
    m = np.array(a, dtype=object)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return m


def identity(n):
    return np.eye(n, dtype=object)


class _SnfState:
    """Workspace maintaining u @ a @ v = d, tracking only requested transforms."""

    def __init__(self, a, need):
        self.d = _as_int_matrix(a).copy()
        rows, cols = self.d.shape
        self.u = identity(rows) if "u" in need else None
        self.uinv = identity(rows) if "uinv" in need else None
        self.v = identity(cols) if "v" in need else None
        self.vinv = identity(cols) if "vinv" in need else None

    # Elementary row operations (left side): d <- E d, u <- E u, uinv <- uinv E^-1.
    def row_add(self, i, j, q):
        self.d[i] += q * self.d[j]
        if self.u is not None:
            self.u[i] += q * self.u[j]
        if self.uinv is not None:
            self.uinv[:, j] -= q * self.uinv[:, i]

    def row_swap(self, i, j):
        self.d[[i, j]] = self.d[[j, i]]
        if self.u is not None:
            self.u[[i, j]] = self.u[[j, i]]
        if self.uinv is not None:
            self.uinv[:, [i, j]] = self.uinv[:, [j, i]]

    def row_negate(self, i):
        self.d[i] = -self.d[i]
        if self.u is not None:
            self.u[i] = -self.u[i]
        if self.uinv is not None:
            self.uinv[:, i] = -self.uinv[:, i]

    # Elementary column operations (right side): d <- d F, v <- v F, vinv <- F^-1 vinv.
    def col_add(self, i, j, q):
        self.d[:, i] += q * self.d[:, j]
        if self.v is not None:
            self.v[:, i] += q * self.v[:, j]
        if self.vinv is not None:
            self.vinv[j] -= q * self.vinv[i]

    def col_swap(self, i, j):
        self.d[:, [i, j]] = self.d[:, [j, i]]
        if self.v is not None:
            self.v[:, [i, j]] = self.v[:, [j, i]]
        if self.vinv is not None:
            self.vinv[[i, j]] = self.vinv[[j, i]]


def _snf_state(a, need=("u", "v", "uinv", "vinv")):
    st = _SnfState(a, frozenset(need))
    d = st.d
    rows, cols = d.shape
    k = min(rows, cols)

    def find_pivot(i):
        """Prefer a +-1 entry: it clears in one pass with no Euclid steps."""
        fallback = None
        for r in range(i, rows):
            for c in range(i, cols):
                val = d[r, c]
                if val == 1 or val == -1:
                    return r, c
                if val != 0 and fallback is None:
                    fallback = (r, c)
        return fallback

    def clear_position(i):
        while True:
            for r in range(i + 1, rows):
                while d[r, i] != 0:
                    if d[i, i] == 0:
                        st.row_swap(i, r)
                        continue
                    q = d[r, i] // d[i, i]
                    if q:
                        st.row_add(r, i, -q)
                    if d[r, i] != 0:
                        st.row_swap(i, r)
            if all(d[i, c] == 0 for c in range(i + 1, cols)):
                return
            for c in range(i + 1, cols):
                while d[i, c] != 0:
                    if d[i, i] == 0:
                        st.col_swap(i, c)
                        continue
                    q = d[i, c] // d[i, i]
                    if q:
                        st.col_add(c, i, -q)
                    if d[i, c] != 0:
                        st.col_swap(i, c)
            if all(d[r, i] == 0 for r in range(i + 1, rows)):
                return

    for i in range(k):
        pivot = find_pivot(i)
        if pivot is None:
            break
        r, c = pivot
        if r != i:
            st.row_swap(i, r)
        if c != i:
            st.col_swap(i, c)
        clear_position(i)

    for i in range(k):
        if d[i, i] < 0:
            st.row_negate(i)

    # Divisibility chain: fold d[j+1] into position j and re-reduce.
    done = False
    while not done:
        done = True
        for j in range(k - 1):
            a1, a2 = d[j, j], d[j + 1, j + 1]
            if a2 != 0 and (a1 == 0 or a2 % a1 != 0):
                st.col_add(j, j + 1, 1)
                clear_position(j)
                if d[j, j] < 0:
                    st.row_negate(j)
                if d[j + 1, j + 1] < 0:
                    st.row_negate(j + 1)
                done = False
    return st


def smith_normal_form(a):
    """Return (u, d, v, uinv, vinv) with u @ a @ v = d in Smith form.

    u and v are unimodular, d is diagonal with nonnegative entries and each
    diagonal entry divides the next.  uinv/vinv are exact integer inverses.
    """
    st = _snf_state(a)
    return st.u, st.d, st.v, st.uinv, st.vinv


def diagonal(d):
    k = min(d.shape)
    return [int(d[i, i]) for i in range(k)]


def kernel(a):
    """Columns spanning {x : a @ x = 0} (a basis of the kernel lattice)."""
    a = _as_int_matrix(a)
    st = _snf_state(a, need=("v",))
    d, v = st.d, st.v
    diag = diagonal(d) + [0] * max(0, a.shape[1] - min(a.shape))
    cols = [j for j in range(a.shape[1]) if diag[j] == 0]
    return v[:, cols]


def solve(a, b):
    """One integer solution x of a @ x = b, or None if none exists."""
    a = _as_int_matrix(a)
    b = np.array(b, dtype=object).reshape(-1)
    st = _snf_state(a, need=("u", "v"))
    u, d, v = st.u, st.d, st.v
    c = u @ b
    x = np.zeros(a.shape[1], dtype=object)
    k = min(a.shape)
    for i in range(a.shape[0]):
        di = int(d[i, i]) if i < k else 0
        if di == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % di != 0:
                return None
            if i < a.shape[1]:
                x[i] = c[i] // di
    return v @ x


class _LinearSolver:
    """Factors a once, then answers a @ x = b queries for many b."""

    def __init__(self, a):
        self.a = _as_int_matrix(a)
        st = _snf_state(self.a, need=("u", "v"))
        self.u, self.d, self.v = st.u, st.d, st.v

    def solve(self, b):
        b = np.array(b, dtype=object).reshape(-1)
        c = self.u @ b
        rows, cols = self.a.shape
        x = np.zeros(cols, dtype=object)
        k = min(rows, cols)
        for i in range(rows):
            di = int(self.d[i, i]) if i < k else 0
            if di == 0:
                if c[i] != 0:
                    return None
            else:
                if c[i] % di != 0:
                    return None
                if i < cols:
                    x[i] = c[i] // di
        return self.v @ x


def solve_mod(a, b, n):
    """One solution x of a @ x = b (mod n), or None."""
    a = _as_int_matrix(a)
    rows = a.shape[0]
    aug = np.concatenate([a, n * identity(rows)], axis=1)
    x = solve(aug, b)
    if x is None:
        return None
    return np.array([int(t) % n for t in x[:a.shape[1]]], dtype=object)


def kernel_mod(a, n):
    """Basis (columns) of the lattice {x in Z^cols : a @ x = 0 mod n}.

    The result always contains n*Z^cols, so it has full column rank.
    """
    a = _as_int_matrix(a)
    rows, cols = a.shape
    aug = np.concatenate([a, n * identity(rows)], axis=1)
    ker = kernel(aug)[:cols, :]
    return lattice_basis(np.concatenate([ker, n * identity(cols)], axis=1))


def lattice_basis(gens):
    """Reduce generating columns to a basis of the lattice they span."""
    gens = _as_int_matrix(gens)
    st = _snf_state(gens, need=("uinv",))
    diag = diagonal(st.d)
    r = sum(1 for t in diag if t != 0)
    # Column lattice = uinv @ (diagonal columns).
    basis = st.uinv[:, :r] * np.array(diag[:r], dtype=object).reshape(1, -1)
    return basis


def lattice_intersection(a, b):
    """Basis of the intersection of the column lattices of a and b."""
    a, b = _as_int_matrix(a), _as_int_matrix(b)
    stacked = np.concatenate([a, -b], axis=1)
    ker = kernel(stacked)
    return lattice_basis(a @ ker[:a.shape[1], :])


class QuotientStructure:
    """Finite quotient L_outer / L_inner with generators and coordinates."""

    def __init__(self, factors, gens, outer, u, all_factors):
        self.factors = factors      # invariant factors > 1
        self.gens = gens            # matching generator columns (ambient coords)
        self._outer = outer
        self._solver = None
        self._u = u
        self._kept = [i for i, e in enumerate(all_factors) if e > 1]

    def coords(self, x):
        """Coordinates of [x] w.r.t. gens, or None if x is not in L_outer."""
        if self._solver is None:
            self._solver = _LinearSolver(self._outer)
        y = self._solver.solve(np.array(x, dtype=object).reshape(-1))
        if y is None:
            return None
        c = self._u @ y
        return tuple(int(c[i]) % self.factors[j] for j, i in enumerate(self._kept))

    def order(self):
        out = 1
        for e in self.factors:
            out *= e
        return out


def lattice_quotient(outer, inner):
    """Structure of the finite quotient L_outer / L_inner.

    Both arguments are full-column-rank bases of lattices of the same rank
    with inner contained in outer.  Returns a QuotientStructure whose factors
    are the invariant factors > 1 with matching ambient generator columns.
    """
    outer = _as_int_matrix(outer)
    inner = _as_int_matrix(inner)
    c = np.empty((outer.shape[1], inner.shape[1]), dtype=object)
    solver = _LinearSolver(outer)
    for j in range(inner.shape[1]):
        x = solver.solve(inner[:, j])
        if x is None:
            raise ValueError("inner lattice not contained in outer lattice")
        c[:, j] = x
    st = _snf_state(c, need=("u", "uinv"))
    u, d, uinv = st.u, st.d, st.uinv
    adapted = outer @ uinv
    diag = diagonal(d)
    all_factors, factors, gens = [], [], []
    for i in range(outer.shape[1]):
        e = diag[i] if i < len(diag) else 0
        if e == 0:
            raise ValueError("quotient is infinite")
        all_factors.append(int(e))
        if e > 1:
            factors.append(int(e))
            gens.append(adapted[:, i])
    return QuotientStructure(factors, gens, outer, u, all_factors)


def member(lattice, x):
    """Integer coordinates of x in the column lattice, or None."""
    return solve(lattice, x)
