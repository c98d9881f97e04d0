"""Finite-dimensional C*-algebras B = M_{n_1} + ... + M_{n_s}, their central
unitaries, block-permutation Morita self-equivalences, and automorphisms.

The Picard group of such a B is the permutation group of the s blocks; the
bimodule of a permutation sigma has block-i component shaped n_i x n_{sigma(i)},
with B acting by block i on the left and block sigma(i) on the right.  The
composition convention is left-to-right: (sigma; tau)(i) = tau(sigma(i)), so
that blockwise matrix multiplication realizes the internal tensor product
without transposes.
"""

import math

from . import cmatrix
from .errors import MismatchedAlgebra, NotAnAutomorphism
from .scalars import Cyclo


class MatrixAlgebra:
    """B = directsum M_{n_i} over Q(zeta_L)."""

    def __init__(self, block_sizes, scalar_order=1):
        self.block_sizes = tuple(int(n) for n in block_sizes)
        if any(n < 1 for n in self.block_sizes) or not self.block_sizes:
            raise ValueError("block sizes must be positive")
        self.scalar_order = int(scalar_order)
        self.s = len(self.block_sizes)
        self.dim = sum(n * n for n in self.block_sizes)
        self.basis_labels = [(i, a, b) for i, n in enumerate(self.block_sizes)
                             for a in range(n) for b in range(n)]
        self.label_index = {lab: k for k, lab in enumerate(self.basis_labels)}

    def center_dim(self):
        return self.s

    def rebase(self, order):
        if order % self.scalar_order != 0:
            raise ValueError("scalar order can only grow by multiples")
        return MatrixAlgebra(self.block_sizes, order)

    def zero(self):
        return AlgebraElement(self, tuple(
            cmatrix.zeros(n, n, self.scalar_order) for n in self.block_sizes))

    def one(self):
        return AlgebraElement(self, tuple(
            cmatrix.eye(n, self.scalar_order) for n in self.block_sizes))

    def basis_element(self, label):
        x = self.zero()
        i, a, b = label
        blocks = list(x.blocks)
        m = blocks[i].copy()
        m[a, b] = Cyclo.rational(1, self.scalar_order)
        blocks[i] = m
        return AlgebraElement(self, tuple(blocks))

    def element_from_flat(self, vec):
        blocks = []
        idx = 0
        for n in self.block_sizes:
            m = cmatrix.zeros(n, n, self.scalar_order)
            for a in range(n):
                for b in range(n):
                    m[a, b] = vec[idx]
                    idx += 1
            blocks.append(m)
        return AlgebraElement(self, tuple(blocks))

    def central_projection(self, i):
        """The unit of block i."""
        x = self.zero()
        blocks = list(x.blocks)
        blocks[i] = cmatrix.eye(self.block_sizes[i], self.scalar_order)
        return AlgebraElement(self, tuple(blocks))

    def __eq__(self, other):
        return isinstance(other, MatrixAlgebra) and \
            (self.block_sizes, self.scalar_order) == \
            (other.block_sizes, other.scalar_order)

    def __repr__(self):
        body = "+".join(f"M{n}" for n in self.block_sizes)
        return f"MatrixAlgebra({body}; L={self.scalar_order})"


class AlgebraElement:
    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra, blocks):
        self.algebra = algebra
        self.blocks = tuple(blocks)

    def _check(self, other):
        if self.algebra != other.algebra:
            raise MismatchedAlgebra("elements of different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra,
                              tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra,
                              tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-b for b in self.blocks))

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._check(other)
            return AlgebraElement(self.algebra, tuple(
                a @ b for a, b in zip(self.blocks, other.blocks)))
        return self.scaled(other)

    def __rmul__(self, other):
        return self.scaled(other)

    def scaled(self, s):
        return AlgebraElement(self.algebra,
                              tuple(cmatrix.scale(b, s) for b in self.blocks))

    def adjoint(self):
        return AlgebraElement(self.algebra,
                              tuple(cmatrix.adjoint(b) for b in self.blocks))

    def flatten(self):
        out = []
        for b in self.blocks:
            out.extend(b.flat)
        return out

    def is_zero(self):
        return all(cmatrix.is_zero_matrix(b) for b in self.blocks)

    def __eq__(self, other):
        return isinstance(other, AlgebraElement) and self.algebra == other.algebra \
            and (self - other).is_zero()

    def __repr__(self):
        return f"AlgebraElement({self.algebra})"


class CentralUnitary:
    """zeta_n^{e_i} . 1 on block i; the group UZ(B) truncated to mu_n^s."""

    __slots__ = ("algebra", "n", "exponents")

    def __init__(self, algebra, n, exponents):
        self.algebra = algebra
        self.n = int(n)
        self.exponents = tuple(int(e) % self.n for e in exponents)
        if len(self.exponents) != algebra.s:
            raise ValueError("one exponent per block required")

    def to_element(self):
        order = self.algebra.scalar_order
        if order % self.n != 0:
            raise ValueError(f"scalar order {order} cannot host mu_{self.n}")
        blocks = []
        for i, sz in enumerate(self.algebra.block_sizes):
            z = Cyclo.zeta(order, self.exponents[i] * (order // self.n))
            blocks.append(cmatrix.scale(cmatrix.eye(sz, order), z))
        return AlgebraElement(self.algebra, blocks)

    def __mul__(self, other):
        assert self.algebra == other.algebra
        n = math.lcm(self.n, other.n)
        return CentralUnitary(self.algebra, n, tuple(
            a * (n // self.n) + b * (n // other.n)
            for a, b in zip(self.exponents, other.exponents)))

    def inverse(self):
        return CentralUnitary(self.algebra, self.n,
                              tuple(-e for e in self.exponents))

    def __eq__(self, other):
        if not isinstance(other, CentralUnitary):
            return NotImplemented
        n = math.lcm(self.n, other.n)
        return self.algebra == other.algebra and \
            tuple(a * (n // self.n) % n for a in self.exponents) == \
            tuple(b * (n // other.n) % n for b in other.exponents)

    def __repr__(self):
        return f"CentralUnitary(mu_{self.n}, {self.exponents})"


class PicardElement:
    """A block permutation, composed left-to-right: (s*t)(i) = t(s(i))."""

    __slots__ = ("perm",)

    def __init__(self, perm):
        self.perm = tuple(int(p) for p in perm)
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {perm}")

    @staticmethod
    def identity(s):
        return PicardElement(range(s))

    def __mul__(self, other):
        return PicardElement(tuple(other.perm[self.perm[i]]
                                   for i in range(len(self.perm))))

    def inverse(self):
        inv = [0] * len(self.perm)
        for i, p in enumerate(self.perm):
            inv[p] = i
        return PicardElement(inv)

    def __call__(self, i):
        return self.perm[i]

    def order(self):
        k, cur = 1, self
        while cur.perm != tuple(range(len(self.perm))):
            cur = cur * self
            k += 1
        return k

    def is_identity(self):
        return self.perm == tuple(range(len(self.perm)))

    def __eq__(self, other):
        return isinstance(other, PicardElement) and self.perm == other.perm

    def __hash__(self):
        return hash(self.perm)

    def __repr__(self):
        return f"PicardElement{self.perm}"


class EquivalenceBimodule:
    """Block model of the Morita self-equivalence attached to a permutation."""

    def __init__(self, algebra, sigma):
        if isinstance(sigma, (tuple, list)):
            sigma = PicardElement(sigma)
        if len(sigma.perm) != algebra.s:
            raise ValueError("permutation size must match the block count")
        self.algebra = algebra
        self.sigma = sigma
        self.shapes = [(algebra.block_sizes[i], algebra.block_sizes[sigma(i)])
                       for i in range(algebra.s)]
        self.basis_labels = [(i, a, b) for i, (r, c) in enumerate(self.shapes)
                             for a in range(r) for b in range(c)]
        self.label_index = {lab: k for k, lab in enumerate(self.basis_labels)}
        self.dim = len(self.basis_labels)

    def zero_element(self):
        return BimoduleElement(self, tuple(
            cmatrix.zeros(r, c, self.algebra.scalar_order) for r, c in self.shapes))

    def basis_element(self, label):
        i, a, b = label
        x = self.zero_element()
        blocks = list(x.blocks)
        m = blocks[i].copy()
        m[a, b] = Cyclo.rational(1, self.algebra.scalar_order)
        blocks[i] = m
        return BimoduleElement(self, tuple(blocks))

    def basis(self):
        return [self.basis_element(lab) for lab in self.basis_labels]

    def __eq__(self, other):
        return isinstance(other, EquivalenceBimodule) and \
            self.algebra == other.algebra and self.sigma == other.sigma

    def __repr__(self):
        return f"EquivalenceBimodule(sigma={self.sigma.perm}, {self.algebra})"


class BimoduleElement:
    __slots__ = ("bimodule", "blocks")

    def __init__(self, bimodule, blocks):
        self.bimodule = bimodule
        self.blocks = tuple(blocks)

    def __add__(self, other):
        assert self.bimodule == other.bimodule
        return BimoduleElement(self.bimodule, tuple(
            a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        assert self.bimodule == other.bimodule
        return BimoduleElement(self.bimodule, tuple(
            a - b for a, b in zip(self.blocks, other.blocks)))

    def scaled(self, s):
        return BimoduleElement(self.bimodule,
                               tuple(cmatrix.scale(b, s) for b in self.blocks))

    def flatten(self):
        out = []
        for b in self.blocks:
            out.extend(b.flat)
        return out

    def is_zero(self):
        return all(cmatrix.is_zero_matrix(b) for b in self.blocks)

    def __eq__(self, other):
        return isinstance(other, BimoduleElement) and \
            self.bimodule == other.bimodule and (self - other).is_zero()


def left_mul(b, x):
    """b . x, block i of B acting on component i."""
    if b.algebra != x.bimodule.algebra:
        raise MismatchedAlgebra("left action across algebras")
    return BimoduleElement(x.bimodule, tuple(
        bb @ xb for bb, xb in zip(b.blocks, x.blocks)))


def right_mul(x, b):
    """x . b, block sigma(i) of B acting on component i from the right."""
    if b.algebra != x.bimodule.algebra:
        raise MismatchedAlgebra("right action across algebras")
    sigma = x.bimodule.sigma
    return BimoduleElement(x.bimodule, tuple(
        x.blocks[i] @ b.blocks[sigma(i)] for i in range(len(x.blocks))))


def central_left_mul(u, x):
    """u . x for a central unitary: block i scaled by zeta^{e_i}."""
    order = x.bimodule.algebra.scalar_order
    return BimoduleElement(x.bimodule, tuple(
        cmatrix.scale(x.blocks[i], Cyclo.zeta(order, u.exponents[i] * (order // u.n)))
        for i in range(len(x.blocks))))


def inner_right(x, y):
    """<x, y>_B: block j is x_{sigma^-1(j)}^* y_{sigma^-1(j)}."""
    assert x.bimodule == y.bimodule
    alg = x.bimodule.algebra
    inv = x.bimodule.sigma.inverse()
    blocks = []
    for j in range(alg.s):
        i = inv(j)
        blocks.append(cmatrix.adjoint(x.blocks[i]) @ y.blocks[i])
    return AlgebraElement(alg, blocks)


def inner_left(x, y):
    """_B<x, y>: block i is x_i y_i^*."""
    assert x.bimodule == y.bimodule
    alg = x.bimodule.algebra
    return AlgebraElement(alg, tuple(
        x.blocks[i] @ cmatrix.adjoint(y.blocks[i]) for i in range(alg.s)))


def tensor(m, n):
    """The bimodule of the composed permutation (internal tensor product)."""
    if m.algebra != n.algebra:
        raise MismatchedAlgebra("tensor product across algebras")
    return EquivalenceBimodule(m.algebra, m.sigma * n.sigma)


def tensor_element(m, n, x, y):
    """Image of x tensor y under the canonical blockwise-product isomorphism."""
    target = tensor(m, n)
    sig = m.sigma
    return BimoduleElement(target, tuple(
        x.blocks[i] @ y.blocks[sig(i)] for i in range(m.algebra.s)))


def fullness(m):
    """(right_full, left_full): both inner products span all of B, by exact rank."""
    alg = m.algebra
    basis = m.basis()
    right = cmatrix.sparse_rank(
        (_as_sparse(inner_right(x, y).flatten()) for x in basis for y in basis),
        stop_at=alg.dim)
    left = cmatrix.sparse_rank(
        (_as_sparse(inner_left(x, y).flatten()) for x in basis for y in basis),
        stop_at=alg.dim)
    return right == alg.dim, left == alg.dim


def _as_sparse(vec):
    return {i: v for i, v in enumerate(vec) if not v.is_zero()}


def bimodule_automorphism_phase(m, t, n):
    """The unique central unitary u with t = (multiplication by u), in mu_n.

    t is a callable BimoduleElement -> BimoduleElement.  Verifies linearity
    on the basis implicitly, bimodule-map property and inner products on the
    basis, and the reconstruction t(e) = u.e exactly.
    """
    alg = m.algebra
    basis = m.basis()
    images = [t(e) for e in basis]
    # extract the scalar per block from any basis unit in that block
    exps = [None] * alg.s
    for lab, img in zip(m.basis_labels, images):
        i, a, b = lab
        val = img.blocks[i][a, b]
        k = val.root_exponent(n)
        if k is None:
            raise NotAnAutomorphism(f"phase on block {i} is not in mu_{n}")
        if exps[i] is None:
            exps[i] = k
        elif exps[i] != k:
            raise NotAnAutomorphism(f"block {i} is not scaled uniformly")
    for i in range(alg.s):
        if exps[i] is None:
            exps[i] = 0
    u = CentralUnitary(alg, n, exps)
    # reconstruction and module-map checks on the basis
    for e, img in zip(basis, images):
        if not (img - central_left_mul(u, e)).is_zero():
            raise NotAnAutomorphism("t is not multiplication by a central unitary")
    b0 = alg.one()
    for e in basis[: min(len(basis), 6)]:
        if t(left_mul(b0, e)) != left_mul(b0, t(e)):
            raise NotAnAutomorphism("t does not commute with the left action")
    for x in basis[:3]:
        for y in basis[:3]:
            if inner_right(t(x), t(y)) != inner_right(x, y):
                raise NotAnAutomorphism("t does not preserve <.,.>_B")
    return u


def phi_m(m, u):
    """Phi_M(u): the central unitary with Phi_M(u).x = x.u for all x."""
    sigma = m.sigma
    return CentralUnitary(m.algebra, u.n,
                          tuple(u.exponents[sigma(i)] for i in range(m.algebra.s)))


class FdAutomorphism:
    """*-automorphism: block permutation tau plus per-block unitary conjugators.

    alpha(b)_i = u_i b_{tau(i)} u_i^*; only equal-size blocks may be permuted.
    """

    def __init__(self, algebra, tau, conjugators=None):
        if isinstance(tau, (tuple, list)):
            tau = PicardElement(tau)
        self.algebra = algebra
        self.tau = tau
        for i in range(algebra.s):
            if algebra.block_sizes[i] != algebra.block_sizes[tau(i)]:
                raise ValueError("automorphisms only permute equal-size blocks")
        if conjugators is None:
            conjugators = tuple(cmatrix.eye(n, algebra.scalar_order)
                                for n in algebra.block_sizes)
        self.conjugators = tuple(conjugators)
        for i, u in enumerate(self.conjugators):
            n = algebra.block_sizes[i]
            if not cmatrix.is_zero_matrix(
                    u @ cmatrix.adjoint(u) - cmatrix.eye(n, algebra.scalar_order)):
                raise ValueError(f"conjugator {i} is not unitary")

    def apply(self, b):
        return AlgebraElement(self.algebra, tuple(
            self.conjugators[i] @ b.blocks[self.tau(i)] @
            cmatrix.adjoint(self.conjugators[i])
            for i in range(self.algebra.s)))

    def compose(self, other):
        """self after other pointwise: (self.compose(other))(b) = self(other(b))."""
        assert self.algebra == other.algebra
        tau = self.tau * other.tau
        conj = tuple(self.conjugators[i] @ other.conjugators[self.tau(i)]
                     for i in range(self.algebra.s))
        return FdAutomorphism(self.algebra, tau, conj)

    def is_inner(self):
        return self.tau.is_identity()


class PicardRealization:
    """automorphism_to_picard output: the class and the explicit bimodule map."""

    def __init__(self, sigma, bimodule, iso):
        self.sigma = sigma
        self.bimodule = bimodule
        self.iso = iso


def automorphism_to_picard(alpha):
    """Class of M_alpha in Pic(B) with the isomorphism onto the block model.

    M_alpha is B with right action m.b = m alpha(b) and <m1, m2>_B =
    alpha^{-1}(m1^* m2); the map J(m)_i = m_i u_i identifies it with the
    block-permutation bimodule of tau.
    """
    sigma = alpha.tau
    target = EquivalenceBimodule(alpha.algebra, sigma)

    def iso(m):
        return BimoduleElement(target, tuple(
            m.blocks[i] @ alpha.conjugators[i] for i in range(alpha.algebra.s)))

    return PicardRealization(PicardElement(sigma.perm), target, iso)
