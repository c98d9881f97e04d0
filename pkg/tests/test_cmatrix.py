import random
from fractions import Fraction

import numpy as np
import pytest

from freeact import cmatrix
from freeact.scalars import Cyclo


def rand_matrix(rng, rows, cols, order=4):
    m = cmatrix.zeros(rows, cols, order)
    for i in range(rows):
        for j in range(cols):
            m[i, j] = Cyclo.rational(rng.randint(-3, 3), order)
    return m


def test_rank_matches_float_oracle():
    rng = random.Random(0)
    for _ in range(8):
        m = rand_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
        floats = np.array([[float(x.coeffs[0]) for x in row] for row in m])
        assert cmatrix.rank(m) == np.linalg.matrix_rank(floats)


def test_solve_and_kernel():
    rng = random.Random(1)
    for _ in range(6):
        a = rand_matrix(rng, 3, 4)
        x0 = rand_matrix(rng, 4, 1)[:, 0]
        b = a @ x0
        x = cmatrix.solve(a, b)
        assert x is not None
        assert all((a @ x - b)[i].is_zero() for i in range(3))
        ker = cmatrix.kernel(a)
        for j in range(ker.shape[1]):
            assert all(v.is_zero() for v in (a @ ker[:, j]))
        assert cmatrix.rank(a) + ker.shape[1] == 4


def test_sparse_rank_agrees_with_dense():
    rng = random.Random(2)
    for _ in range(6):
        m = rand_matrix(rng, 6, 5)
        rows = ({j: m[i, j] for j in range(5) if not m[i, j].is_zero()}
                for i in range(6))
        assert cmatrix.sparse_rank(rows) == cmatrix.rank(m)


def test_char_poly_on_known_matrix():
    # eigenvalues 1 and 3: e1 = 4, e2 = 3
    m = cmatrix.zeros(2, 2, 1)
    m[0, 0] = Cyclo.rational(2, 1)
    m[0, 1] = Cyclo.rational(1, 1)
    m[1, 0] = Cyclo.rational(1, 1)
    m[1, 1] = Cyclo.rational(2, 1)
    e1, e2 = cmatrix.char_poly_symmetric_coeffs(m)
    assert e1 == Cyclo.rational(4, 1)
    assert e2 == Cyclo.rational(3, 1)


def test_psd_certificates():
    order = 4
    # x^* x is always PSD
    rng = random.Random(3)
    x = rand_matrix(rng, 3, 3, order)
    h = cmatrix.adjoint(x) @ x
    ok, _ = cmatrix.psd_certificate(h)
    assert ok
    # a matrix with a negative eigenvalue fails
    neg = cmatrix.scale(cmatrix.eye(2, order), Cyclo.rational(-1, order))
    ok2, _ = cmatrix.psd_certificate(neg)
    assert not ok2


def test_psd_rejects_non_hermitian():
    m = cmatrix.zeros(2, 2, 4)
    m[0, 1] = Cyclo.rational(1, 4)
    with pytest.raises(ValueError):
        cmatrix.psd_certificate(m)


def test_operator_norm_bound():
    # diag(1, 3): norm 3
    m = cmatrix.zeros(2, 2, 1)
    m[0, 0] = Cyclo.rational(1, 1)
    m[1, 1] = Cyclo.rational(3, 1)
    r = cmatrix.operator_norm_bound(m)
    assert Fraction(3) <= r <= Fraction(3) + Fraction(1, 1024)
