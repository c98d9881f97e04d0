"""Finitely generated abelian groups, duality pairing, subgroups and quotients.

A group is a product of cyclic factors Z_{d_1} x ... x Z_{d_k}; a factor 0
encodes an infinite cyclic factor Z.  Elements are integer coordinate vectors
reduced modulo the finite factors.  For finite groups the fixed nondegenerate
duality pairing is <pi, g> = zeta_E ** (sum_i (E/d_i) pi_i g_i) with E the
exponent, which identifies the group with its dual.
"""

import itertools
import math

import numpy as np

from . import intlin
from .errors import InfiniteGroup, MismatchedParents
from .scalars import RootOfUnity


class FgAbelianGroup:
    """Product of cyclic groups given by its list of factor orders."""

    def __init__(self, invariant_factors):
        factors = tuple(int(d) for d in invariant_factors)
        if any(d < 0 or d == 1 for d in factors):
            raise ValueError("factors must be 0 (for Z) or integers >= 2")
        self.invariant_factors = factors

    @property
    def rank(self):
        return len(self.invariant_factors)

    def is_finite(self):
        return all(d > 0 for d in self.invariant_factors)

    def order(self):
        if not self.is_finite():
            return math.inf
        return math.prod(self.invariant_factors) if self.invariant_factors else 1

    def exponent(self):
        finite = [d for d in self.invariant_factors if d > 0]
        return math.lcm(*finite) if finite else 1

    def element(self, coords):
        return GroupElement(self, coords)

    def identity(self):
        return GroupElement(self, (0,) * self.rank)

    def generators(self):
        gens = []
        for i in range(self.rank):
            coords = [0] * self.rank
            coords[i] = 1
            gens.append(GroupElement(self, coords))
        return gens

    def __iter__(self):
        if not self.is_finite():
            raise InfiniteGroup(f"cannot enumerate {self}")
        for coords in itertools.product(*(range(d) for d in self.invariant_factors)):
            yield GroupElement(self, coords)

    def __eq__(self, other):
        return isinstance(other, FgAbelianGroup) and \
            self.invariant_factors == other.invariant_factors

    def __hash__(self):
        return hash(self.invariant_factors)

    def __repr__(self):
        if not self.invariant_factors:
            return "FgAbelianGroup(trivial)"
        parts = ["Z" if d == 0 else f"Z{d}" for d in self.invariant_factors]
        return "x".join(parts)

    def normalized(self):
        """Invariant-factor normal form d_1 | d_2 | ... via Smith reduction."""
        finite = [d for d in self.invariant_factors if d > 0]
        free = sum(1 for d in self.invariant_factors if d == 0)
        if not finite:
            return FgAbelianGroup((0,) * free)
        diag = np.diag(np.array(finite, dtype=object))
        u, d, v, uinv, vinv = intlin.smith_normal_form(diag)
        factors = [t for t in intlin.diagonal(d) if t > 1]
        return FgAbelianGroup(tuple(factors) + (0,) * free)


class GroupElement:
    __slots__ = ("parent", "coords")

    def __init__(self, parent, coords):
        coords = tuple(int(c) for c in coords)
        if len(coords) != parent.rank:
            raise ValueError(f"expected {parent.rank} coordinates, got {len(coords)}")
        self.parent = parent
        self.coords = tuple(c % d if d > 0 else c
                            for c, d in zip(coords, parent.invariant_factors))

    def _check(self, other):
        if self.parent != other.parent:
            raise MismatchedParents(f"{self.parent} vs {other.parent}")

    def __add__(self, other):
        self._check(other)
        return GroupElement(self.parent,
                            tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return GroupElement(self.parent, tuple(-c for c in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, n):
        return GroupElement(self.parent, tuple(n * c for c in self.coords))

    __rmul__ = __mul__

    def is_identity(self):
        return all(c == 0 for c in self.coords)

    def order(self):
        if any(d == 0 and c != 0 for c, d in
               zip(self.coords, self.parent.invariant_factors)):
            return math.inf
        return math.lcm(*(d // math.gcd(c, d) for c, d in
                          zip(self.coords, self.parent.invariant_factors)
                          if d > 0), 1)

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.parent == other.parent \
            and self.coords == other.coords

    def __hash__(self):
        return hash((self.parent, self.coords))

    def __repr__(self):
        return f"g{self.coords}"


def enumerate_group(group):
    """All elements of a finite group in lexicographic coordinate order."""
    return list(group)


def pair(pi, g):
    """Duality pairing <pi, g> as a root of unity of order exponent()."""
    pi._check(g)
    group = pi.parent
    if not group.is_finite():
        raise InfiniteGroup("pairing needs a finite group")
    e = group.exponent()
    total = sum((e // d) * a * b
                for a, b, d in zip(pi.coords, g.coords, group.invariant_factors))
    return RootOfUnity(e, total)


class CharacterPairing:
    """The fixed pairing of a finite group with itself as its dual."""

    def __init__(self, group):
        if not group.is_finite():
            raise InfiniteGroup("pairing needs a finite group")
        self.group = group

    def pair(self, pi, g):
        return pair(pi, g)

    def is_nondegenerate(self):
        for pi in self.group:
            if pi.is_identity():
                continue
            if all(pair(pi, g).exponent == 0 for g in self.group):
                return False
        return True


class SubgroupQuotient:
    """Result of subgroup_and_quotient: H with embedding, G/H with projection."""

    def __init__(self, group, subgroup, embed_cols, quotient, proj_matrix, sect_matrix):
        self.group = group
        self.subgroup = subgroup
        self.quotient = quotient
        self._embed_cols = embed_cols      # one column of G-coords per H generator
        self._proj = proj_matrix           # maps G-coords to quotient coords
        self._sect = sect_matrix           # maps quotient coords back to G-coords

    def embed(self, h):
        if h.parent != self.subgroup:
            raise MismatchedParents("element not in the subgroup")
        coords = np.zeros(self.group.rank, dtype=object)
        for c, col in zip(h.coords, self._embed_cols):
            coords += c * col
        return self.group.element(coords)

    def project(self, g):
        if g.parent != self.group:
            raise MismatchedParents("element not in the ambient group")
        vec = self._proj @ np.array(g.coords, dtype=object)
        return self.quotient.element(vec)

    def section(self, q):
        if q.parent != self.quotient:
            raise MismatchedParents("element not in the quotient")
        vec = self._sect @ np.array(q.coords, dtype=object)
        return self.group.element(vec)

    def contains(self, g):
        """Whether g lies in the subgroup."""
        return self.project(g).is_identity()


def subgroup_and_quotient(group, generators):
    """Subgroup generated by the given elements, with the quotient group.

    Returns a SubgroupQuotient carrying the two groups plus the embedding,
    projection and section maps, all exact homomorphisms.
    """
    if not group.is_finite():
        raise InfiniteGroup("subgroup/quotient machinery needs a finite group")
    k = group.rank
    d_mat = np.diag(np.array(group.invariant_factors, dtype=object))
    if generators:
        for g in generators:
            if g.parent != group:
                raise MismatchedParents("generator from a different group")
        gen_mat = np.array([list(g.coords) for g in generators], dtype=object).T
        span = np.concatenate([gen_mat, d_mat], axis=1)
    else:
        span = d_mat.copy()

    # Quotient: Z^k / L where L is the lattice spanned by generators and d_i e_i.
    u, d, v, uinv, vinv = intlin.smith_normal_form(span)
    diag = intlin.diagonal(d)[:k]
    kept = [i for i in range(k) if diag[i] > 1]
    quotient = FgAbelianGroup(tuple(diag[i] for i in kept))
    proj = u[kept, :] if kept else np.zeros((0, k), dtype=object)
    sect = uinv[:, kept] if kept else np.zeros((k, 0), dtype=object)

    # Subgroup: L / (d_i e_i) via the lattice quotient.
    basis_l = intlin.lattice_basis(span)
    q = intlin.lattice_quotient(basis_l, d_mat)
    subgroup = FgAbelianGroup(tuple(q.factors))
    embed_cols = [np.array(g, dtype=object) for g in q.gens]
    return SubgroupQuotient(group, subgroup, embed_cols, quotient, proj, sect)
