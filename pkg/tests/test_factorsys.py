import itertools
import random

import pytest

from freeact.cohomology import (Cochain, CoefficientModule, CohomologySolver,
                                cohomology, differential)
from freeact.errors import NotACocycle, RelationViolated
from freeact.factorsys import (FactorSystem, PicHomomorphism, RawFamily,
                               SOmegaPair, characteristic_class, equivalent,
                               from_s_omega, obstruction)
from freeact.fdcstar import FdAutomorphism, MatrixAlgebra, PicardElement
from freeact.groups import FgAbelianGroup
from freeact.scalars import Cyclo


def klein():
    return FgAbelianGroup([2, 2])


def trivial_phi(group=None, blocks=(1,), order=2):
    g = group or klein()
    return PicHomomorphism.trivial(g, MatrixAlgebra(list(blocks), order))


def bicharacter_cochain(module, coeff=1):
    g = module.group
    table = {}
    for pi in g:
        for rho in g:
            v = (coeff * pi.coords[0] * rho.coords[1]) % module.n
            if v:
                table[(pi.coords, rho.coords)] = (v,) + (0,) * (module.s - 1)
    return Cochain(module, 2, table)


# -- PicHomomorphism ---------------------------------------------------------------

def test_phi_rejects_order_violation():
    g = FgAbelianGroup([3])
    b = MatrixAlgebra([1, 1], 3)
    with pytest.raises(ValueError):
        PicHomomorphism(g, b, [PicardElement([1, 0])])  # order 2 image on Z_3


def test_phi_rejects_noncommuting_images():
    g = FgAbelianGroup([2, 2])
    b = MatrixAlgebra([1, 1, 1], 2)
    with pytest.raises(ValueError):
        PicHomomorphism(g, b, [PicardElement([1, 0, 2]), PicardElement([0, 2, 1])])


def test_phi_perm_of_is_homomorphism():
    g = FgAbelianGroup([2, 2])
    b = MatrixAlgebra([1, 1], 2)
    phi = PicHomomorphism(g, b, [PicardElement([1, 0]), PicardElement([1, 0])])
    for x in g:
        for y in g:
            assert phi.perm_of(x + y) == phi.perm_of(x) * phi.perm_of(y)


# -- verify ---------------------------------------------------------------------------

def test_verify_canonical_passes():
    fs = FactorSystem.canonical(trivial_phi(), 2)
    assert fs.verify().passed


def test_verify_bicharacter_passes():
    phi = trivial_phi()
    fs = FactorSystem(phi, bicharacter_cochain(phi.coefficient_module(2)))
    assert fs.verify().passed


def test_verify_reports_corrupted_entries():
    phi = trivial_phi()
    module = phi.coefficient_module(2)
    good = bicharacter_cochain(module)
    table = dict(good.table)
    key = ((1, 0), (0, 1))
    table[key] = (0,)  # corrupt one entry
    bad = FactorSystem(phi, Cochain(module, 2, table))
    report = bad.verify()
    assert not report.passed
    assert all(v.kind == "cocycle" for v in report.violations)
    assert len(report.violations) > 0


# -- twisting -----------------------------------------------------------------------

def test_twist_by_zero_is_identity():
    phi = trivial_phi()
    fs = FactorSystem(phi, bicharacter_cochain(phi.coefficient_module(2)))
    assert fs.twist(Cochain(fs.omega.module, 2)) == fs


def test_twist_is_group_action():
    phi = trivial_phi()
    module = phi.coefficient_module(2)
    fs = FactorSystem.canonical(phi, 2)
    w1 = bicharacter_cochain(module)
    h = Cochain(module, 1, {((1, 1),): (1,)})
    w2 = differential(h)
    lhs = fs.twist(w1).twist(w2)
    rhs = fs.twist(w1 + w2)
    assert lhs == rhs


def test_twist_rejects_non_cocycles():
    phi = trivial_phi()
    module = phi.coefficient_module(2)
    bad = Cochain(module, 2, {((1, 0), (1, 0)): (1,), ((0, 1), (1, 0)): (1,)})
    if differential(bad).is_zero():
        pytest.skip("cochain happened to be a cocycle")
    with pytest.raises(NotACocycle):
        FactorSystem.canonical(phi, 2).twist(bad)


# -- equivalence -----------------------------------------------------------------------

def test_self_equivalence():
    phi = trivial_phi()
    fs = FactorSystem(phi, bicharacter_cochain(phi.coefficient_module(2)))
    verdict = equivalent(fs, fs)
    assert verdict.equivalent
    assert differential(verdict.witness).is_zero()


def test_trivial_vs_alternating_inequivalent():
    phi = trivial_phi()
    fs0 = FactorSystem.canonical(phi, 2)
    fs1 = FactorSystem(phi, bicharacter_cochain(phi.coefficient_module(2)))
    assert not equivalent(fs0, fs1).equivalent


def test_twist_by_coboundary_gives_witness():
    phi = trivial_phi()
    module = phi.coefficient_module(2)
    fs = FactorSystem(phi, bicharacter_cochain(module))
    h = Cochain(module, 1, {((1, 0),): (1,)})
    fs2 = fs.twist(differential(h))
    verdict = equivalent(fs, fs2)
    assert verdict.equivalent
    # the witness actually satisfies dh = omega2 - omega1 at its truncation
    target = (fs2.omega - fs.omega).rebase(verdict.witness.module.n)
    assert differential(verdict.witness) == target


def test_different_phi_immediately_inequivalent():
    g = FgAbelianGroup([2])
    b = MatrixAlgebra([1, 1], 2)
    phi1 = PicHomomorphism.trivial(g, b)
    phi2 = PicHomomorphism(g, b, [PicardElement([1, 0])])
    fs1 = FactorSystem.canonical(phi1, 2)
    fs2 = FactorSystem.canonical(phi2, 2)
    verdict = equivalent(fs1, fs2)
    assert not verdict.equivalent
    assert "Picard" in verdict.reason


def test_equivalence_is_equivalence_relation():
    phi = trivial_phi()
    module = phi.coefficient_module(2)
    fs = FactorSystem(phi, bicharacter_cochain(module))
    twists = [fs]
    for key in [((1, 0),), ((0, 1),), ((1, 1),)]:
        h = Cochain(module, 1, {key: (1,)})
        twists.append(fs.twist(differential(h)))
    for a in twists:
        assert equivalent(a, a).equivalent
        for b in twists:
            assert equivalent(a, b).equivalent == equivalent(b, a).equivalent
            for c in twists:
                if equivalent(a, b).equivalent and equivalent(b, c).equivalent:
                    assert equivalent(a, c).equivalent


def test_simply_transitive_twist_classes():
    # pairwise-inequivalent twists = |H^2| classes, Z2xZ2 over B = C
    phi = trivial_phi()
    module = phi.coefficient_module(2)
    res = cohomology(phi.group, module, 2)
    assert res.invariant_factors == [2]
    base = FactorSystem.canonical(phi, 2)
    systems = [base.twist(rep) for _, rep in res.all_classes()]
    for i, a in enumerate(systems):
        for j, b in enumerate(systems):
            assert equivalent(a, b).equivalent == (i == j)


# -- obstruction -------------------------------------------------------------------------

def test_obstruction_of_cocycle_deviation_vanishes():
    phi = trivial_phi()
    raw = RawFamily(phi, bicharacter_cochain(phi.coefficient_module(2)))
    report = obstruction(raw)
    assert report.vanishes and report.is_cocycle
    assert raw.is_factor_system()


def test_obstruction_is_differential_of_deviation():
    phi = trivial_phi()
    module = phi.coefficient_module(2)
    delta = Cochain(module, 2, {((1, 0), (1, 0)): (1,), ((0, 1), (1, 1)): (1,)})
    raw = RawFamily(phi, delta)
    report = obstruction(raw)
    assert report.cochain == differential(delta)
    assert report.is_cocycle
    if not report.vanishes:
        assert not raw.is_factor_system()


def test_obstruction_matches_triple_products_elementwise():
    # scalar block model: m_d(x_pi, y_rho) = zeta^{delta(pi,rho)} u_{pi+rho};
    # the obstruction is the phase between the two bracketings.
    g = klein()
    phi = trivial_phi(g)
    module = phi.coefficient_module(2)
    rng = random.Random(11)
    elems = [e for e in g if not e.is_identity()]
    table = {}
    for pi in elems:
        for rho in elems:
            v = rng.randrange(2)
            if v:
                table[(pi.coords, rho.coords)] = (v,)
    delta = Cochain(module, 2, table)
    d3 = obstruction(RawFamily(phi, delta)).cochain

    def phase(*pairs):
        return sum(delta.value(*p)[0] for p in pairs) % 2

    for pi, rho, sig in itertools.product(g, repeat=3):
        left = phase((pi, rho)) + phase((pi + rho, sig))   # (xy)z
        right = phase((rho, sig)) + phase((pi, rho + sig))  # x(yz)
        assert (right - left) % 2 == d3.value(pi, rho, sig)[0]


def test_obstruction_double_differential_vanishes():
    rng = random.Random(4)
    for factors in [(2,), (2, 2), (4,)]:
        g = FgAbelianGroup(factors)
        phi = trivial_phi(g, order=g.exponent())
        module = phi.coefficient_module(g.exponent())
        elems = [e for e in g if not e.is_identity()]
        table = {}
        for pi in elems:
            for rho in elems:
                v = rng.randrange(module.n)
                if v:
                    table[(pi.coords, rho.coords)] = (v,)
        report = obstruction(RawFamily(phi, Cochain(module, 2, table)))
        assert report.is_cocycle


def test_obstruction_class_independent_of_phases():
    # replacing delta by delta + h changes d_M Psi by the exact coboundary dh
    phi = trivial_phi()
    module = phi.coefficient_module(2)
    rng = random.Random(5)
    elems = [e for e in phi.group if not e.is_identity()]
    table = {(pi.coords, rho.coords): (rng.randrange(2),)
             for pi in elems for rho in elems}
    delta = Cochain(module, 2, table)
    h = Cochain(module, 2, {((1, 0), (1, 0)): (1,)})
    d1 = obstruction(RawFamily(phi, delta)).cochain
    d2 = obstruction(RawFamily(phi, delta + h)).cochain
    solver = CohomologySolver(module, 3)
    witness = solver.is_coboundary(d2 - d1)
    assert witness is not None
    assert differential(witness) == d2 - d1


# -- characteristic class -----------------------------------------------------------------

def test_characteristic_class_canonical_trivial():
    report = characteristic_class(trivial_phi())
    assert report.trivial
    assert report.certificate.is_zero()


def test_characteristic_class_with_raw_family_certificate():
    phi = trivial_phi()
    module = phi.coefficient_module(2)
    delta = Cochain(module, 2, {((1, 0), (1, 0)): (1,), ((1, 1), (0, 1)): (1,)})
    raw = RawFamily(phi, delta)
    report = characteristic_class(phi, raw=raw)
    assert report.trivial
    if not obstruction(raw).vanishes:
        assert not report.certificate.is_zero()
        # repairing by the certificate yields a factor system
        cert = report.certificate
        repaired = RawFamily(phi, delta.rebase(cert.module.n) - cert)
        assert repaired.is_factor_system()


def test_characteristic_class_nontrivial_branch():
    # swap-permutation coefficients on Z2xZ2 have nontrivial stable H^3
    g = klein()
    b = MatrixAlgebra([1, 1], 2)
    phi = PicHomomorphism(g, b, [PicardElement([1, 0]), PicardElement([0, 1])])
    module = phi.coefficient_module(2)
    res = cohomology(g, module, 3)
    if not res.invariant_factors:
        pytest.skip("stable H^3 is trivial here; branch not reachable")
    rep = res.representatives[0]
    report = characteristic_class(phi, raw=rep)
    assert not report.trivial
    assert report.class_coordinates != ()
    assert report.h3_invariant_factors == tuple(res.invariant_factors)


# -- (S, omega) pairs ----------------------------------------------------------------------

def test_s_omega_trivial_s_central_omega():
    g = FgAbelianGroup([2])
    b = MatrixAlgebra([1], 2)
    ident = FdAutomorphism(b, [0])
    minus_one = b.one().scaled(Cyclo.rational(-1, 2))
    omega_u = {}
    for x in g:
        for y in g:
            val = minus_one if (x.coords[0] and y.coords[0]) else b.one()
            omega_u[(x.coords, y.coords)] = val
    pair = SOmegaPair(g, b, {(0,): ident, (1,): ident}, omega_u)
    fs = from_s_omega(pair)
    assert fs.phi.is_trivial()
    assert fs.omega.value(g.element([1]), g.element([1])) == \
        (fs.truncation // 2,)


def test_s_omega_torus_cocycle():
    # Ghat = Z_3^2, S trivial on B = C, omega(k,k') = zeta_3^{k1 k2'}
    q = 3
    g = FgAbelianGroup([q, q])
    b = MatrixAlgebra([1], q)
    ident = FdAutomorphism(b, [0])
    omega_u = {}
    for x in g:
        for y in g:
            e = (x.coords[0] * y.coords[1]) % q
            omega_u[(x.coords, y.coords)] = b.one().scaled(Cyclo.zeta(q, e))
    pair = SOmegaPair(g, b, {x.coords: ident for x in g}, omega_u)
    fs = from_s_omega(pair)
    for x in g:
        for y in g:
            e = (x.coords[0] * y.coords[1]) % q
            expected = (e * fs.truncation // q) % fs.truncation
            assert fs.omega.value(x, y) == (expected,)


def test_s_omega_relation_violation_reported():
    g = FgAbelianGroup([2])
    b = MatrixAlgebra([1], 2)
    ident = FdAutomorphism(b, [0])
    omega_u = {}
    for x in g:
        for y in g:
            omega_u[(x.coords, y.coords)] = b.one()
    # corrupt the normalization/cocycle structure: omega(1, 1) = -1 but
    # omega(1, 0) = -1 breaks relation I
    omega_u[((1,), (0,))] = b.one().scaled(Cyclo.rational(-1, 2))
    pair = SOmegaPair(g, b, {(0,): ident, (1,): ident}, omega_u)
    with pytest.raises(RelationViolated):
        from_s_omega(pair)
