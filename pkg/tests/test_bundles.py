import pytest

from freeact import bundles
from freeact.assemble import build, vec_is_zero, vec_sub
from freeact.bundles import (FiniteSpace, classify_bundles, flip_cocycle,
                             realize_bundle, secondary_class)
from freeact.cohomology import Cochain, cohomology
from freeact.errors import (NotCommutative, NotCommutativeBase,
                            UnsupportedAction)
from freeact.factorsys import FactorSystem, PicHomomorphism
from freeact.fdcstar import MatrixAlgebra, PicardElement
from freeact.groups import FgAbelianGroup


def klein():
    return FgAbelianGroup([2, 2])


def point_phi(group=None):
    g = group or klein()
    return PicHomomorphism.trivial(g, FiniteSpace(1).algebra())


def pauli_fs():
    phi = point_phi()
    module = phi.coefficient_module(2)
    g = phi.group
    table = {}
    for pi in g:
        for rho in g:
            v = (pi.coords[0] * rho.coords[1]) % 2
            if v:
                table[(pi.coords, rho.coords)] = (v,)
    return FactorSystem(phi, Cochain(module, 2, table))


def symmetric_fs():
    """Nonzero symmetric deviation: flip-free but not the canonical system."""
    phi = point_phi()
    module = phi.coefficient_module(2)
    g = phi.group
    table = {}
    for pi in g:
        for rho in g:
            v = (pi.coords[0] * rho.coords[0] + pi.coords[1] * rho.coords[1]) % 2
            if v:
                table[(pi.coords, rho.coords)] = (v,)
    return FactorSystem(phi, Cochain(module, 2, table))


# -- flip cocycle -----------------------------------------------------------------

def test_flip_zero_for_symmetric_deviation():
    assert flip_cocycle(symmetric_fs()).is_zero()
    assert flip_cocycle(FactorSystem.canonical(point_phi(), 2)).is_zero()


def test_flip_of_pauli_is_alternating_bicharacter():
    flip = flip_cocycle(pauli_fs())
    assert not flip.is_zero()
    g = klein()
    for pi in g:
        for rho in g:
            expected = (pi.coords[0] * rho.coords[1]
                        - pi.coords[1] * rho.coords[0]) % 2
            assert flip.value(pi, rho) == (expected,)


def test_flip_invariant_under_equivalence():
    from freeact.cohomology import differential
    fs = pauli_fs()
    module = fs.omega.module
    h = Cochain(module, 1, {((1, 0),): (1,), ((0, 1),): (1,)})
    twisted = fs.twist(differential(h))
    f1, f2 = flip_cocycle(fs), flip_cocycle(twisted)
    g = klein()
    n1, n2 = f1.cochain.module.n, f2.cochain.module.n
    for pi in g:
        for rho in g:
            v1 = f1.value(pi, rho)
            v2 = f2.value(pi, rho)
            assert tuple(x * (n2 // n1) % n2 for x in v1) == v2


def test_flip_rejects_matrix_blocks():
    g = klein()
    phi = PicHomomorphism.trivial(g, MatrixAlgebra([2], 2))
    with pytest.raises(NotCommutativeBase):
        flip_cocycle(FactorSystem.canonical(phi, 2))


def test_flip_rejects_point_permuting_phi():
    g = FgAbelianGroup([2])
    phi = PicHomomorphism(g, MatrixAlgebra([1, 1], 2), [PicardElement([1, 0])])
    with pytest.raises(UnsupportedAction):
        flip_cocycle(FactorSystem.canonical(phi, 2))


def test_commutativity_iff_flip_zero():
    for fs, expect_comm in [(pauli_fs(), False), (symmetric_fs(), True),
                            (FactorSystem.canonical(point_phi(), 2), True)]:
        d = build(fs)
        commutative = True
        for i in range(d.dim):
            for j in range(d.dim):
                lhs = d.multiply(d.basis_vec(i), d.basis_vec(j))
                rhs = d.multiply(d.basis_vec(j), d.basis_vec(i))
                if not vec_is_zero(vec_sub(lhs, rhs)):
                    commutative = False
        assert commutative == expect_comm
        assert flip_cocycle(fs).is_zero() == expect_comm


# -- secondary class -----------------------------------------------------------------

def test_chi2_trivial_over_point():
    report = secondary_class(point_phi())
    assert report.trivial


def test_chi2_trivial_and_twist_independent():
    report = secondary_class(point_phi(), fs=symmetric_fs())
    assert report.trivial
    assert report.certificate is not None


def test_chi2_rejects_permuting_phi():
    g = FgAbelianGroup([2])
    phi = PicHomomorphism(g, MatrixAlgebra([1, 1], 2), [PicardElement([1, 0])])
    with pytest.raises(UnsupportedAction):
        secondary_class(phi)


# -- realization -----------------------------------------------------------------------

def test_realize_group_bundle_over_point():
    report = realize_bundle(FactorSystem.canonical(point_phi(), 2))
    assert report.realizable
    assert report.space_size == 4
    assert len(set(report.base_points)) == 1
    # the action is simply transitive: one orbit, all stabilizers trivial
    for gc, perm in report.action.items():
        if any(gc):
            assert all(perm[t] != t for t in range(4))


def test_realize_symmetric_twist_still_a_bundle():
    report = realize_bundle(symmetric_fs())
    assert report.realizable
    assert report.space_size == 4


def test_realize_two_point_base():
    g = FgAbelianGroup([2])
    space = FiniteSpace(2)
    phi = PicHomomorphism.trivial(g, space.algebra())
    report = realize_bundle(FactorSystem.canonical(phi, 2))
    assert report.space_size == 4
    assert report.space_size // g.order() == 2  # |P| / |G| = |X|
    assert len(set(report.base_points)) == 2


def test_realize_rejects_pauli():
    with pytest.raises(NotCommutative):
        realize_bundle(pauli_fs())


# -- classification -----------------------------------------------------------------------

def test_classify_point_klein():
    cls = classify_bundles(FiniteSpace(1), klein())
    assert cls.class_count == 1
    assert cls.total_h2_order == 2  # the Pauli class is free but not a bundle
    assert cls.bundles[0].space_size == 4


@pytest.mark.parametrize("factors", [(2,), (3,), (2, 2), (4,)])
def test_classify_point_any_group_single_bundle(factors):
    g = FgAbelianGroup(factors)
    cls = classify_bundles(FiniteSpace(1), g)
    assert cls.class_count == 1
    assert cls.bundles[0].space_size == g.order()


def test_classify_two_points():
    cls = classify_bundles(FiniteSpace(2), FgAbelianGroup([2]))
    assert cls.class_count == 1
    assert cls.bundles[0].space_size == 4
