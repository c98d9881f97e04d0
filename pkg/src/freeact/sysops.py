"""New systems from old: subgroup restriction, quotient by a dual-normal
subgroup, tensor products, and the commuting-actions mix, each re-verified
for freeness rather than trusted."""

import math
from dataclasses import dataclass

import numpy as np

from . import cmatrix
from .assemble import (DynamicalSystem, densify, freeness, sparse_of,
                       vec_is_zero, vec_sub, vec_zero)
from .errors import ActionsDoNotCommute, ComputeError
from .groups import FgAbelianGroup, subgroup_and_quotient
from .scalars import Cyclo


@dataclass
class SystemMorphismReport:
    operation: str
    source_dim: int
    result_dim: int
    freeness: object

    @property
    def free(self):
        return self.freeness.free


def restrict(system, subgroup_data, verify=True):
    """Same algebra, action restricted along the subgroup embedding."""
    h = subgroup_data.subgroup
    action = {}
    for hel in h:
        g = subgroup_data.embed(hel)
        action[hel.coords] = system.action[g.coords]
    restricted = DynamicalSystem(h, system.scalar_order, system.labels,
                                 system.unit, system.mul, system.star, action)
    report = freeness(restricted).require_coherent() if verify else None
    return restricted, SystemMorphismReport("restrict", system.dim,
                                            restricted.dim, report)


def _fixed_subalgebra_basis(system, subgroup_data):
    """Exact basis of the fixed points of the embedded subgroup action."""
    dim, order = system.dim, system.scalar_order
    blocks = []
    for hel in subgroup_data.subgroup:
        if hel.is_identity():
            continue
        g = subgroup_data.embed(hel)
        m = cmatrix.zeros(dim, dim, order)
        for j in range(dim):
            col = system.act(g, system.basis_vec(j))
            col[j] = col[j] - Cyclo.rational(1, order)
            for r, val in enumerate(col):
                m[r, j] = val
        blocks.append(m)
    if not blocks:
        return [system.basis_vec(k) for k in range(dim)]
    stacked = np.concatenate(blocks, axis=0)
    ker = cmatrix.kernel(stacked)
    return [list(ker[:, t]) for t in range(ker.shape[1])]


def quotient(system, subgroup_data, verify=True):
    """The induced system on the fixed subalgebra A^N with group G/N."""
    basis = _fixed_subalgebra_basis(system, subgroup_data)
    k = len(basis)
    order = system.scalar_order
    basis_mat = np.array(basis, dtype=object).T

    def express(v):
        sol = cmatrix.solve(basis_mat, np.array(v, dtype=object))
        if sol is None:
            raise ComputeError("fixed subalgebra is not closed; internal error")
        return {t: sol[t] for t in range(k) if not sol[t].is_zero()}

    mul = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            mul[i][j] = express(system.multiply(basis[i], basis[j]))
    star = [express(system.star_vec(basis[i])) for i in range(k)]
    unit = densify(express(system.unit), k, order)

    q = subgroup_data.quotient
    action = {}
    for qel in q:
        g = subgroup_data.section(qel)
        cols = []
        for i in range(k):
            cols.append(express(system.act(g, basis[i])))
        action[qel.coords] = cols
    labels = [f"q{i}" for i in range(k)]
    result = DynamicalSystem(q, order, labels, unit, mul, star, action)
    report = freeness(result).require_coherent() if verify else None
    return result, SystemMorphismReport("quotient", system.dim, k, report)


def tensor(d1, d2, verify=True):
    """(A (x) C, G x H, alpha (x) gamma) with blockwise Kronecker structure."""
    group = FgAbelianGroup(d1.group.invariant_factors + d2.group.invariant_factors)
    order = math.lcm(d1.scalar_order, d2.scalar_order)
    n1, n2 = d1.dim, d2.dim
    dim = n1 * n2

    def pos(i, j):
        return i * n2 + j

    def emb1(c):
        return c.embed(order)

    labels = [(d1.labels[i], d2.labels[j]) for i in range(n1) for j in range(n2)]
    unit = vec_zero(dim, order)
    for i, v1 in enumerate(d1.unit):
        if v1.is_zero():
            continue
        for j, v2 in enumerate(d2.unit):
            if not v2.is_zero():
                unit[pos(i, j)] = emb1(v1) * emb1(v2)

    def kron_sparse(sp1, sp2):
        out = {}
        for a, va in sp1.items():
            for b, vb in sp2.items():
                out[pos(a, b)] = emb1(va) * emb1(vb)
        return out

    mul = [[None] * dim for _ in range(dim)]
    for i1 in range(n1):
        for j1 in range(n2):
            r = pos(i1, j1)
            for i2 in range(n1):
                for j2 in range(n2):
                    mul[r][pos(i2, j2)] = kron_sparse(d1.mul[i1][i2],
                                                      d2.mul[j1][j2])
    star = [kron_sparse(d1.star[i], d2.star[j])
            for i in range(n1) for j in range(n2)]

    action = {}
    for g1c, cols1 in d1.action.items():
        for g2c, cols2 in d2.action.items():
            cols = [kron_sparse(cols1[i], cols2[j])
                    for i in range(n1) for j in range(n2)]
            action[tuple(g1c) + tuple(g2c)] = cols
    result = DynamicalSystem(group, order, labels, unit, mul, star, action)
    report = freeness(result).require_coherent() if verify else None
    return result, SystemMorphismReport("tensor", n1 * n2, dim, report)


class CommutingAction:
    """An H-action table on an existing system, kept next to it."""

    def __init__(self, system, group, action):
        self.system = system
        self.group = group
        self.action = {tuple(k): v for k, v in action.items()}

    def act(self, h, x):
        cols = self.action[tuple(h.coords) if hasattr(h, "coords") else tuple(h)]
        out = {}
        for i, xi in enumerate(x):
            if xi.is_zero():
                continue
            for k, coeff in cols[i].items():
                cur = out.get(k)
                out[k] = coeff * xi if cur is None else cur + coeff * xi
        return densify(out, self.system.dim, self.system.scalar_order)

    def verify(self):
        """Homomorphism property and commutation with the system's action."""
        sysd = self.system
        for h1 in self.group:
            for h2 in self.group:
                for k in range(sysd.dim):
                    e = sysd.basis_vec(k)
                    lhs = self.act(h1, self.act(h2, e))
                    rhs = self.act(h1 + h2, e)
                    if not vec_is_zero(vec_sub(lhs, rhs)):
                        raise ActionsDoNotCommute("beta is not a homomorphism")
        for h in self.group:
            for g in sysd.group:
                for k in range(sysd.dim):
                    e = sysd.basis_vec(k)
                    lhs = self.act(h, sysd.act(g, e))
                    rhs = sysd.act(g, self.act(h, e))
                    if not vec_is_zero(vec_sub(lhs, rhs)):
                        raise ActionsDoNotCommute(
                            f"alpha and beta do not commute at g={g.coords}, "
                            f"h={h.coords}")
        return True


def commuting_mix(d1, beta, d2, verify=True):
    """The two constructions from a commuting auxiliary action.

    (a) (A (x) C, G x H) with (g,h) acting by (alpha_g o beta_h) (x) gamma_h;
    (b) the H-fixed subalgebra of A (x) C under beta (x) gamma, carrying the
        residual G-action -- produced from (a) by the quotient along {0} x H.
    """
    beta.verify()
    if beta.group != d2.group:
        raise ActionsDoNotCommute("beta must be an action of the second group")
    mixed, _ = tensor(d1, d2, verify=False)
    # replace the G x H action: (g, h) acts by (alpha_g beta_h) (x) gamma_h
    n1, n2 = d1.dim, d2.dim
    order = mixed.scalar_order

    def pos(i, j):
        return i * n2 + j

    action = {}
    for g in d1.group:
        for h in d2.group:
            cols = []
            for i in range(n1):
                lhs = d1.act(g, beta.act(h, d1.basis_vec(i)))
                sp1 = sparse_of(lhs)
                for j in range(n2):
                    sp2 = sparse_of(d2.act(h, d2.basis_vec(j)))
                    out = {}
                    for a, va in sp1.items():
                        for b, vb in sp2.items():
                            out[pos(a, b)] = va.embed(order) * vb.embed(order)
                    cols.append(out)
            action[g.coords + h.coords] = cols
    part_a = DynamicalSystem(mixed.group, order, mixed.labels, mixed.unit,
                             mixed.mul, mixed.star, action)
    report_a = SystemMorphismReport(
        "mix.product", d1.dim * d2.dim, part_a.dim,
        freeness(part_a).require_coherent() if verify else None)

    # (b): quotient along the normal subgroup {0} x H
    gens = []
    for t in range(d2.group.rank):
        coords = [0] * mixed.group.rank
        coords[d1.group.rank + t] = 1
        gens.append(mixed.group.element(coords))
    sq = subgroup_and_quotient(mixed.group, gens)
    part_b, report_b = quotient(part_a, sq, verify=verify)
    return (part_a, report_a), (part_b, report_b)
