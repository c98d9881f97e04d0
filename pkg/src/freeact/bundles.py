"""Commutative base B = functions on a finite set: flip cocycle, the secondary
class, principal-bundle realization, and classification of bundles.

For a finite point set every Picard element of C(X) that comes from a genuine
topological bundle is trivial (the left and right actions of C(X) on an
isotypic component of a commutative algebra coincide), so the splitting and
the secondary class are only defined for point-fixing Picard maps; the
workbench refuses anything else rather than guessing.
"""

import math
from dataclasses import dataclass

from . import assemble
from .assemble import (build, is_equivariant_isomorphism, vec_is_zero, vec_sub,
                       vec_zero, sparse_of)
from .cohomology import Cochain, SplitH2, cohomology, differential, get_solver
from .errors import (NotCommutative, NotCommutativeBase, Obstructed,
                     UnsupportedAction)
from .factorsys import FactorSystem, PicHomomorphism, characteristic_class
from .fdcstar import MatrixAlgebra
from .groups import pair as character_pair
from .scalars import Cyclo


class FiniteSpace:
    """A finite point set X; its function algebra has all blocks of size 1."""

    def __init__(self, points):
        self.points = int(points)
        if self.points < 1:
            raise ValueError("a space needs at least one point")

    def algebra(self, scalar_order=2):
        return MatrixAlgebra([1] * self.points, scalar_order)

    def __repr__(self):
        return f"FiniteSpace({self.points} points)"


def _require_commutative_base(fs):
    if any(n != 1 for n in fs.algebra.block_sizes):
        raise NotCommutativeBase("all blocks must have size 1")
    if not fs.phi.is_trivial():
        raise UnsupportedAction(
            "point-permuting Picard maps admit no flip; the assembled algebra "
            "cannot be commutative")


@dataclass
class FlipCocycle:
    """The antisymmetric 2-cocycle measuring noncommutativity."""

    cochain: Cochain

    def is_zero(self):
        return self.cochain.is_zero()

    def value(self, pi, rho):
        return self.cochain.value(pi, rho)


def flip_cocycle(fs):
    """C(pi, rho) = omega(pi, rho) - omega(rho, pi), verified antisymmetric
    and closed."""
    _require_commutative_base(fs)
    module = fs.omega.module
    group = fs.group
    table = {}
    for pi in group:
        for rho in group:
            v = tuple((a - b) % module.n for a, b in
                      zip(fs.omega_value(pi, rho), fs.omega_value(rho, pi)))
            if any(v):
                table[(pi.coords, rho.coords)] = v
    c = Cochain(module, 2, table)
    for pi in group:
        for rho in group:
            forward = c.value(pi, rho)
            backward = c.value(rho, pi)
            assert all((a + b) % module.n == 0 for a, b in zip(forward, backward))
    assert differential(c).is_zero()
    return FlipCocycle(c)


@dataclass
class Chi2Report:
    trivial: bool
    symmetric_part: Cochain
    certificate: object
    truncation: int


def secondary_class(phi, truncation=None, fs=None):
    """chi_2(phi) = pr_ab of the flip class, with a triviality certificate.

    Computed from the canonical factor system unless one is supplied, and
    cross-checked for independence by recomputing from a twist.
    """
    if any(n != 1 for n in phi.algebra.block_sizes):
        raise NotCommutativeBase("all blocks must have size 1")
    if not phi.is_trivial():
        raise UnsupportedAction("the splitting needs a trivial module action")
    truncation = truncation or max(2, phi.group.exponent())
    if fs is None:
        fs = FactorSystem.canonical(phi, truncation)
    module = fs.omega.module
    split = SplitH2(phi.group, module)
    flip = flip_cocycle(fs)
    sym = split.pr_ab(flip.cochain)
    solver = get_solver(module, 2)
    cert = solver.is_coboundary_stable(sym)
    report = Chi2Report(cert is not None, sym, cert, module.n)

    # independence of the factor-system choice: recompute from a twist
    res = cohomology(phi.group, module, 2, check_stabilization=False)
    if res.representatives:
        twisted = fs.twist(res.representatives[0])
        sym2 = split.pr_ab(flip_cocycle(twisted).cochain)
        diff = sym2 - sym.rebase(sym2.module.n) if sym2.module.n != module.n \
            else sym2 - sym
        if get_solver(diff.module, 2).is_coboundary_stable(diff) is None:
            raise AssertionError("secondary class depended on the twist choice")
    return report


@dataclass
class BundleReport:
    chi_trivial: bool
    chi2_trivial: bool
    points: list                    # the total space P
    action: dict                    # g.coords -> permutation of P indices
    base_points: list               # orbit index per point: the map P -> X
    space_size: int
    system: object = None           # the C(P) dynamical system

    @property
    def realizable(self):
        return self.chi_trivial and self.chi2_trivial


def _particular_twisted_character(fs, x):
    """s with ds = omega_x for the point-x slice (symmetric, hence solvable)."""
    module = fs.omega.module
    group = fs.group
    # slice the coefficient module down to one coordinate
    from .cohomology import CoefficientModule
    slice_mod = CoefficientModule(group, module.n, 1)
    table = {}
    for pi in group:
        for rho in group:
            v = fs.omega_value(pi, rho)[x]
            if v:
                table[(pi.coords, rho.coords)] = (v,)
    omega_x = Cochain(slice_mod, 2, table)
    solver = get_solver(slice_mod, 2)
    s = solver.is_coboundary_stable(omega_x)
    if s is None:
        raise NotCommutative("pointwise twist is not symmetric-trivial")
    return s


def realize_bundle(fs):
    """Gelfand realization of a flip-free factor system as a free G-space.

    Characters of A = (+)_pi C(X) u_pi are the pairs (x, t) with t a twisted
    character at x; the G-translation on the t-slot is exactly the dual
    pairing, so the action on the spectrum is free with orbit space X.
    """
    flip = flip_cocycle(fs)
    if not flip.is_zero():
        raise NotCommutative("flip cocycle is nonzero; the algebra cannot be "
                             "commutative")
    chi = characteristic_class(fs.phi, truncation=fs.truncation)
    chi2 = secondary_class(fs.phi, truncation=fs.truncation, fs=fs)

    system = build(fs)
    # ground truth: the assembled algebra is commutative
    for i in range(system.dim):
        for j in range(i + 1, system.dim):
            lhs = system.multiply(system.basis_vec(i), system.basis_vec(j))
            rhs = system.multiply(system.basis_vec(j), system.basis_vec(i))
            if not vec_is_zero(vec_sub(lhs, rhs)):
                raise NotCommutative("assembled algebra is not commutative")

    group = fs.group
    points_x = list(range(fs.algebra.s))
    glist = list(group)
    witnesses = {x: _particular_twisted_character(fs, x) for x in points_x}
    big_n = {x: witnesses[x].module.n for x in points_x}
    order = math.lcm(system.scalar_order, *(big_n[x] for x in points_x),
                     group.exponent())

    def char_value(x, g, pi):
        """chi_{x,g}(u_pi) = zeta^{s_x(pi)} <pi, g>."""
        s_val = witnesses[x].value(pi)[0]
        z = Cyclo.zeta(order, s_val * (order // big_n[x]))
        return z * character_pair(pi, g).to_scalar(order)

    points = [(x, g.coords) for x in points_x for g in glist]
    # evaluation matrix on the A basis: chi_p(delta_y u_pi)
    def evaluate(p, label):
        x, gc = p
        pc, y, _, _ = label
        if y != x:
            return Cyclo.rational(0, order)
        return char_value(x, group.element(gc), group.element(pc))

    # verify multiplicativity of every character on the basis
    sys_big = assemble.rebase_system(system, order)
    for p in points:
        vals = [evaluate(p, lab) for lab in sys_big.labels]
        for i in range(sys_big.dim):
            for j in range(sys_big.dim):
                prod = sys_big.multiply(sys_big.basis_vec(i), sys_big.basis_vec(j))
                got = Cyclo.rational(0, order)
                for k, c in sparse_of(prod).items():
                    got = got + c * vals[k]
                want = vals[i] * vals[j]
                if not (got - want).is_zero():
                    raise NotCommutative(f"character {p} is not multiplicative")

    # characters are pairwise distinct and number dim A
    assert len(points) == system.dim
    columns = [tuple(evaluate(p, lab) for lab in sys_big.labels) for p in points]
    for a in range(len(points)):
        for b in range(a + 1, len(points)):
            if all((x - y).is_zero() for x, y in zip(columns[a], columns[b])):
                raise NotCommutative("characters are not separated")

    # the action on the spectrum: chi_{x,g} o alpha_h = chi_{x,g+h}
    pindex = {p: t for t, p in enumerate(points)}
    action = {}
    for h in glist:
        perm = []
        for (x, gc) in points:
            target = (x, (group.element(gc) + h).coords)
            perm.append(pindex[target])
        action[h.coords] = perm
    # freeness of the point action and the orbit count
    for h in glist:
        if h.is_identity():
            continue
        if any(action[h.coords][t] == t for t in range(len(points))):
            raise NotCommutative("point action has a fixed point")
    orbits = {}
    for t, (x, gc) in enumerate(points):
        orbits.setdefault(x, []).append(t)
    assert len(orbits) == fs.algebra.s

    report = BundleReport(
        chi_trivial=chi.trivial, chi2_trivial=chi2.trivial,
        points=points, action=action,
        base_points=[p[0] for p in points], space_size=len(points),
        system=_function_system(group, order, points, action))

    # round trip: evaluation is an equivariant *-isomorphism onto C(P)
    cp = report.system

    def t_map(k):
        out = vec_zero(cp.dim, order)
        for t, p in enumerate(points):
            out[t] = evaluate(p, sys_big.labels[k])
        return out

    ok, reasons = is_equivariant_isomorphism(sys_big, cp, t_map,
                                             require_base_identity=False)
    if not ok:
        raise NotCommutative(f"Gelfand round trip failed: {reasons}")
    return report


def _function_system(group, order, points, action):
    """C(P) with the translation action given by the permutation table."""
    n = len(points)
    one = Cyclo.rational(1, order)
    labels = [f"p{t}" for t in range(n)]
    unit = [one] * n
    mul = [[({i: one} if i == j else {}) for j in range(n)] for i in range(n)]
    star = [{i: one} for i in range(n)]
    act = {}
    for gc, perm in action.items():
        # the point action is p -> p.g = perm[p]; on functions
        # alpha_g(f)(p) = f(p.g), so delta_q pulls back to delta_{perm^-1(q)}
        inv = [0] * n
        for src, dst in enumerate(perm):
            inv[dst] = src
        cols = [dict() for _ in range(n)]
        for q in range(n):
            cols[q][inv[q]] = one
        act[gc] = cols
    return assemble.DynamicalSystem(group, order, labels, unit, mul, star, act)


@dataclass
class BundleClassification:
    class_count: int
    total_h2_order: int
    bundles: list                    # one BundleReport per abelian class


def classify_bundles(space, group, phi=None, truncation=None):
    """All topological principal bundles for the data, via the abelian part
    of H^2: one realized bundle per class."""
    algebra = space.algebra()
    if phi is None:
        phi = PicHomomorphism.trivial(group, algebra)
    if any(n != 1 for n in phi.algebra.block_sizes):
        raise NotCommutativeBase("bundle classification needs C(X)")
    if not phi.is_trivial():
        raise UnsupportedAction("bundle classification needs a point-fixing phi")
    truncation = truncation or max(2, group.exponent())
    chi = characteristic_class(phi, truncation=truncation)
    chi2 = secondary_class(phi, truncation=truncation)
    if not (chi.trivial and chi2.trivial):
        raise Obstructed("chi or chi_2 nontrivial")

    module = phi.coefficient_module(truncation)
    res = cohomology(group, module, 2)
    split = SplitH2(group, module)
    bundles = []
    count = 0
    base = FactorSystem.canonical(phi, truncation)
    for coords, rep in res.all_classes():
        if not split.lam(rep).is_zero():
            continue
        count += 1
        bundles.append(realize_bundle(base.twist(rep)))
    return BundleClassification(count, res.order(), bundles)
