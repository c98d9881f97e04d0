"""Factor systems over a Picard homomorphism: verification, twisting,
equivalence, the associativity obstruction, and the characteristic class.

A factor system is stored as its deviation from the canonical blockwise
multiplication: the pair (phi, omega) where phi maps the dual group into
block permutations and omega is a normalized 2-cochain of central-unitary
exponents.  The multiplication isomorphisms are Psi = omega . Psi_can, and
associativity of the assembled algebra is exactly the twisted 2-cocycle
identity for omega.
"""

import itertools
import math
from dataclasses import dataclass

from .cohomology import Cochain, CoefficientModule, differential, get_solver
from .errors import (MismatchedAlgebra, NotACocycle, RelationViolated,
                     UnsupportedGroup)
from .fdcstar import EquivalenceBimodule, PicardElement


class PicHomomorphism:
    """phi: Ghat -> Pic(B), given by block permutations on the generators."""

    def __init__(self, group, algebra, gen_images):
        self.group = group
        self.algebra = algebra
        images = []
        for img in gen_images:
            images.append(img if isinstance(img, PicardElement)
                          else PicardElement(img))
        if len(images) != group.rank:
            raise ValueError("one image per group generator required")
        self.gen_images = tuple(images)
        for img, d in zip(self.gen_images, group.invariant_factors):
            if d > 0 and d % img.order() != 0:
                raise ValueError(
                    f"generator of order {d} mapped to a permutation of order "
                    f"{img.order()}")
        for a in self.gen_images:
            for b in self.gen_images:
                if a * b != b * a:
                    raise ValueError("generator images must commute")

    @staticmethod
    def trivial(group, algebra):
        ident = PicardElement.identity(algebra.s)
        return PicHomomorphism(group, algebra, [ident] * group.rank)

    def perm_of(self, element):
        out = PicardElement.identity(self.algebra.s)
        for c, img in zip(element.coords, self.gen_images):
            step = img if c >= 0 else img.inverse()
            for _ in range(abs(c)):
                out = out * step
        return out

    def bimodule(self, element):
        return EquivalenceBimodule(self.algebra, self.perm_of(element))

    def is_trivial(self):
        return all(img.is_identity() for img in self.gen_images)

    def coefficient_module(self, truncation):
        """UZ(B) = mu_N^s with the permutation action Phi o phi."""
        if not self.group.is_finite():
            return _InfiniteCoefficients(self.algebra.s, self.is_trivial())
        return CoefficientModule(self.group, truncation, self.algebra.s,
                                 action=lambda g: self.perm_of(g).perm)

    def __eq__(self, other):
        return isinstance(other, PicHomomorphism) and \
            (self.group, self.algebra) == (other.group, other.algebra) and \
            self.gen_images == other.gen_images

    def __repr__(self):
        return f"PicHomomorphism({self.group} -> Pic({self.algebra}))"


class _InfiniteCoefficients:
    """Duck-typed stand-in handed to the closed-form cohomology paths."""

    def __init__(self, s, trivial):
        self.s = s
        self._trivial = trivial

    def is_trivial_action(self):
        return self._trivial


@dataclass
class Violation:
    kind: str
    args: tuple
    detail: str = ""


@dataclass
class VerifyReport:
    passed: bool
    violations: list

    def __bool__(self):
        return self.passed


class FactorSystem:
    """(phi, omega): the canonical bimodule family twisted by omega."""

    def __init__(self, phi, omega):
        self.phi = phi
        self.omega = omega
        if omega.degree != 2:
            raise ValueError("factor-system deviation must be a 2-cochain")

    @staticmethod
    def canonical(phi, truncation):
        module = phi.coefficient_module(truncation)
        return FactorSystem(phi, Cochain(module, 2))

    @property
    def truncation(self):
        return self.omega.module.n

    @property
    def algebra(self):
        return self.phi.algebra

    @property
    def group(self):
        return self.phi.group

    def omega_value(self, pi, rho):
        return self.omega.value(pi, rho)

    def verify(self):
        """Normalization plus the twisted 2-cocycle identity over all triples."""
        module = self.omega.module
        violations = []
        for key in self.omega.table:
            if any(all(c == 0 for c in part) for part in key):
                violations.append(Violation("normalization", key))
        n = module.n
        group = self.group
        for pi, rho, tau in itertools.product(group, repeat=3):
            lhs = tuple(
                (a + b) % n for a, b in zip(
                    module.act(pi, self.omega.value(rho, tau)),
                    self.omega.value(pi, rho + tau)))
            rhs = tuple(
                (a + b) % n for a, b in zip(
                    self.omega.value(pi + rho, tau),
                    self.omega.value(pi, rho)))
            if lhs != rhs:
                violations.append(Violation(
                    "cocycle", (pi.coords, rho.coords, tau.coords),
                    f"lhs={lhs} rhs={rhs}"))
        return VerifyReport(not violations, violations)

    def twist(self, omega2):
        """The factor system with deviation omega + omega2; omega2 in Z^2_phi."""
        if omega2.module.n != self.truncation:
            omega2 = omega2.rebase(math.lcm(omega2.module.n, self.truncation))
            base = self.omega.rebase(omega2.module.n)
        else:
            base = self.omega
        if not differential(omega2).is_zero():
            raise NotACocycle("twisting requires a 2-cocycle")
        return FactorSystem(self.phi, base + omega2)

    def __eq__(self, other):
        return isinstance(other, FactorSystem) and self.phi == other.phi and \
            self.omega == other.omega

    def __repr__(self):
        return f"FactorSystem({self.phi}, truncation={self.truncation})"


@dataclass
class EquivalenceVerdict:
    equivalent: bool
    witness: object = None     # 1-cochain h with dh = omega2 - omega1, if any
    reason: str = ""
    truncation: int = 0

    def __bool__(self):
        return self.equivalent


def equivalent(fs1, fs2):
    """Equivalence of factor systems; reduces to a coboundary solve.

    Different phi means immediately inequivalent.  Otherwise the systems are
    equivalent iff omega2 - omega1 is a coboundary with circle values, tested
    at the stabilized truncation; the witness h gives the isomorphism family
    T_pi = (multiplication by h(pi)).
    """
    if fs1.phi.algebra != fs2.phi.algebra or fs1.phi.group != fs2.phi.group:
        raise MismatchedAlgebra("factor systems over different data")
    if fs1.phi != fs2.phi:
        return EquivalenceVerdict(False, reason="different Picard homomorphisms")
    n = math.lcm(fs1.truncation, fs2.truncation)
    delta = fs2.omega.rebase(n) - fs1.omega.rebase(n)
    solver = get_solver(delta.module, 2)
    witness = solver.is_coboundary_stable(delta)
    if witness is None:
        return EquivalenceVerdict(False, reason="deviation class is nontrivial",
                                  truncation=n * delta.module.stable_multiplier())
    return EquivalenceVerdict(True, witness=witness,
                              truncation=witness.module.n)


class RawFamily:
    """A normalized family with an arbitrary deviation; not necessarily
    associative.  Exists to exercise the obstruction machinery."""

    def __init__(self, phi, deviation):
        self.phi = phi
        self.deviation = deviation
        if deviation.degree != 2:
            raise ValueError("deviation must be a 2-cochain")

    def is_factor_system(self):
        return differential(self.deviation).is_zero()

    def to_factor_system(self):
        if not self.is_factor_system():
            raise NotACocycle("raw family is not associative")
        return FactorSystem(self.phi, self.deviation)


@dataclass
class ObstructionReport:
    cochain: object            # the 3-cochain d_M Psi in exponent form
    is_cocycle: bool           # d(d_M Psi) = 0, verified
    vanishes: bool             # raw family is already a factor system

    def __bool__(self):
        return self.vanishes


def obstruction(raw):
    """The associativity obstruction d_M Psi of a raw family.

    In the block model the canonical family is strictly associative, so the
    central unitary carrying Psi_{pi+rho,sigma} o (Psi_{pi,rho} (x) id) onto
    Psi_{pi,rho+sigma} o (id (x) Psi_{rho,sigma}) is exactly the bar
    differential of the deviation.
    """
    d3 = differential(raw.deviation)
    is_cocycle = differential(d3).is_zero()
    return ObstructionReport(d3, is_cocycle, d3.is_zero())


@dataclass
class CharacteristicClassReport:
    trivial: bool
    certificate: object        # 2-cochain h with dh = d_M Psi when trivial
    truncation: int
    stable_multiplier: int
    class_coordinates: tuple = ()
    h3_invariant_factors: tuple = ()

    def __bool__(self):
        return self.trivial


def characteristic_class(phi, truncation=None, raw=None):
    """Triviality of the H^3 obstruction class chi(phi), with certificate.

    With no raw family supplied the canonical blockwise family (deviation 0)
    is used; it is strictly associative, so the class vanishes with the zero
    certificate.  A RawFamily goes through its honest obstruction cochain; in
    the block model that cochain is the exact differential of the deviation,
    so such inputs always certify trivially.  Obstruction data claimed from
    outside the block model may be passed directly as a 3-cocycle, which is
    what reaches the nontrivial branch.
    """
    if not phi.group.is_finite():
        raise UnsupportedGroup("characteristic class needs a finite dual group")
    truncation = truncation or max(2, phi.group.exponent())
    module = phi.coefficient_module(truncation)
    if raw is None:
        raw = RawFamily(phi, Cochain(module, 2))
    if isinstance(raw, Cochain):
        if raw.degree != 3:
            raise ValueError("direct obstruction data must be a 3-cochain")
        if not differential(raw).is_zero():
            raise NotACocycle("direct obstruction data must be a 3-cocycle")
        d3 = raw
    else:
        report = obstruction(raw)
        assert report.is_cocycle
        d3 = report.cochain
    solver = get_solver(d3.module, 3)
    if d3.is_zero():
        zero_fix = Cochain(d3.module, 2)
        return CharacteristicClassReport(True, zero_fix, d3.module.n,
                                         d3.module.stable_multiplier())
    h = solver.is_coboundary_stable(d3)
    if h is not None:
        return CharacteristicClassReport(True, h, d3.module.n,
                                         d3.module.stable_multiplier())
    q = solver.stable_quotient()
    return CharacteristicClassReport(
        False, None, d3.module.n, d3.module.stable_multiplier(),
        class_coordinates=solver.class_coordinates(d3),
        h3_invariant_factors=tuple(q.factors))


class SOmegaPair:
    """(S, omega) data: S a 1-cochain of *-automorphisms, omega unitary-valued.

    Relations (I)  S(pi)(omega(rho,sigma)) omega(pi,rho+sigma)
                     = omega(pi+rho,sigma) omega(pi,rho)
              (II) S(pi)(S(rho)(b)) = omega(pi,rho) S(pi+rho)(b) omega(pi,rho)^*
    are verified exhaustively by verify().
    """

    def __init__(self, group, algebra, s_map, omega_u):
        self.group = group
        self.algebra = algebra
        self.s_map = {tuple(k): v for k, v in s_map.items()}
        self.omega_u = {(tuple(k[0]), tuple(k[1])): v for k, v in omega_u.items()}
        ident = group.identity()
        s0 = self._s(ident)
        if not s0.tau.is_identity():
            raise ValueError("S(0) must be the identity automorphism")
        from . import cmatrix
        for i, u in enumerate(s0.conjugators):
            n = algebra.block_sizes[i]
            if not cmatrix.is_zero_matrix(
                    u - cmatrix.eye(n, algebra.scalar_order)):
                raise ValueError("S(0) must carry identity conjugators (u_0 = 1)")

    def _s(self, g):
        return self.s_map[g.coords]

    def _w(self, a, b):
        return self.omega_u[(a.coords, b.coords)]

    def verify(self):
        bad = []
        one = self.algebra.one()
        for g in self.group:
            if self._w(self.group.identity(), g) != one or \
                    self._w(g, self.group.identity()) != one:
                bad.append(Violation("normalization", (g.coords,)))
        for pi, rho, sigma in itertools.product(self.group, repeat=3):
            lhs = self._s(pi).apply(self._w(rho, sigma)) * self._w(pi, rho + sigma)
            rhs = self._w(pi + rho, sigma) * self._w(pi, rho)
            if lhs != rhs:
                bad.append(Violation("relation I",
                                     (pi.coords, rho.coords, sigma.coords)))
        basis = [self.algebra.basis_element(lab) for lab in self.algebra.basis_labels]
        for pi, rho in itertools.product(self.group, repeat=2):
            w = self._w(pi, rho)
            for b in basis:
                lhs = self._s(pi).apply(self._s(rho).apply(b))
                rhs = w * self._s(pi + rho).apply(b) * w.adjoint()
                if lhs != rhs:
                    bad.append(Violation("relation II", (pi.coords, rho.coords),
                                         "on a basis element"))
                    break
        return VerifyReport(not bad, bad)


def from_s_omega(pair, truncation=None, check_round_trip=True):
    """Block-model factor system of an (S, omega) pair.

    The data is verified first (RelationViolated on failure); then the
    bimodules M_{S(pi)} are identified with the block-permutation model and
    the deviation exponents are read off from the residual unitaries, which
    the relations force to be central roots of unity.
    """
    report = pair.verify()
    if not report:
        raise RelationViolated(
            f"{len(report.violations)} violated relation tuples: "
            f"{[(v.kind, v.args) for v in report.violations[:5]]}")
    group, algebra = pair.group, pair.algebra
    import numpy as np

    from . import cmatrix

    phi = PicHomomorphism(group, algebra,
                          [pair._s(g).tau for g in group.generators()])
    scalar_order = algebra.scalar_order
    probe = math.lcm(2, scalar_order)
    values = {}
    needed = truncation or 1
    for pi, rho in itertools.product(group, repeat=2):
        s_pi, s_rho, s_sum = pair._s(pi), pair._s(rho), pair._s(pi + rho)
        w = pair._w(pi, rho)
        exps = []
        for i in range(algebra.s):
            # residual on block i of the transported multiplication map
            r = cmatrix.adjoint(s_rho.conjugators[s_pi.tau(i)]) @ \
                cmatrix.adjoint(s_pi.conjugators[i]) @ \
                w.blocks[i] @ s_sum.conjugators[i]
            n_i = algebra.block_sizes[i]
            scalar = r[0, 0]
            if not cmatrix.is_zero_matrix(
                    r - cmatrix.scale(cmatrix.eye(n_i, scalar_order), scalar)):
                raise RelationViolated(
                    f"residual at ({pi.coords},{rho.coords}) block {i} "
                    "is not scalar")
            k = scalar.root_exponent(probe)
            if k is None:
                raise RelationViolated(
                    f"residual phase at ({pi.coords},{rho.coords}) block {i} "
                    f"is not a root of unity of order dividing {probe}")
            order = probe // math.gcd(k, probe) if k else 1
            needed = math.lcm(needed, order)
            exps.append((k, probe))
        values[(pi.coords, rho.coords)] = exps
    n = math.lcm(truncation or max(2, group.exponent()), needed)
    module = phi.coefficient_module(n)

    def as_mod_n(k, p):
        if k == 0:
            return 0
        g = math.gcd(k, p)
        o = p // g          # order of the phase; divides n by construction
        return ((k // g) * (n // o)) % n

    table = {}
    for key, exps in values.items():
        vec = tuple(as_mod_n(k, p) for k, p in exps)
        if any(vec):
            table[key] = vec
    fs = FactorSystem(phi, Cochain(module, 2, table))
    check = fs.verify()
    if not check:
        raise RelationViolated("extracted deviation failed the cocycle identity")
    if check_round_trip:
        from . import assemble
        assemble.s_omega_round_trip_check(pair, fs)
    return fs
