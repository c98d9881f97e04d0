import pytest

from freeact import assemble, sysops
from freeact.assemble import build, freeness, vec_is_zero, vec_sub
from freeact.cohomology import Cochain
from freeact.errors import ActionsDoNotCommute
from freeact.factorsys import FactorSystem, PicHomomorphism
from freeact.fdcstar import MatrixAlgebra
from freeact.groups import FgAbelianGroup, subgroup_and_quotient
from freeact.scalars import Cyclo


def pauli_system():
    g = FgAbelianGroup([2, 2])
    b = MatrixAlgebra([1], 2)
    phi = PicHomomorphism.trivial(g, b)
    module = phi.coefficient_module(2)
    table = {}
    for pi in g:
        for rho in g:
            v = (pi.coords[0] * rho.coords[1]) % 2
            if v:
                table[(pi.coords, rho.coords)] = (v,)
    return build(FactorSystem(phi, Cochain(module, 2, table)))


def z4_group_system():
    g = FgAbelianGroup([4])
    b = MatrixAlgebra([1], 4)
    phi = PicHomomorphism.trivial(g, b)
    return build(FactorSystem.canonical(phi, 4))


# -- restrict -------------------------------------------------------------------

def test_restrict_to_trivial_subgroup():
    d = pauli_system()
    sq = subgroup_and_quotient(d.group, [])
    restricted, report = sysops.restrict(d, sq)
    assert restricted.group.order() == 1
    assert report.free  # trivial group actions are always free
    # fixed algebra is everything
    assert len(restricted.fixed_basis()) == d.dim


def test_restrict_pauli_to_diagonal():
    d = pauli_system()
    sq = subgroup_and_quotient(d.group, [d.group.element([1, 1])])
    restricted, report = sysops.restrict(d, sq)
    assert restricted.group.order() == 2
    assert report.free
    assert len(restricted.fixed_basis()) == 2


def test_restrict_preserves_ellwood_rank():
    d = pauli_system()
    sq = subgroup_and_quotient(d.group, [d.group.element([1, 0])])
    restricted, report = sysops.restrict(d, sq)
    assert report.freeness.ellwood_rank == report.freeness.ellwood_target


# -- quotient --------------------------------------------------------------------

def test_quotient_by_whole_group():
    d = pauli_system()
    sq = subgroup_and_quotient(d.group, d.group.generators())
    result, report = sysops.quotient(d, sq)
    assert result.group.order() == 1
    assert result.dim == 1  # the fixed algebra of the Pauli system is C
    assert report.free


def test_quotient_by_trivial_subgroup_keeps_system():
    d = pauli_system()
    sq = subgroup_and_quotient(d.group, [])
    result, report = sysops.quotient(d, sq)
    assert result.dim == d.dim
    assert result.group.order() == 4
    assert report.free


def test_quotient_z4_by_even_part():
    d = z4_group_system()
    sq = subgroup_and_quotient(d.group, [d.group.element([2])])
    result, report = sysops.quotient(d, sq)
    # components with pi trivial on {0, 2}: the even characters, dimension 2
    assert result.dim == 2
    assert result.group.order() == 2
    assert report.free


# -- tensor ----------------------------------------------------------------------

def test_tensor_with_trivial_system():
    d = pauli_system()
    g0 = FgAbelianGroup([])
    b0 = MatrixAlgebra([1], 2)
    phi0 = PicHomomorphism.trivial(g0, b0)
    triv = build(FactorSystem.canonical(phi0, 2))
    result, report = sysops.tensor(d, triv)
    assert result.dim == d.dim
    assert report.free
    # multiplication agrees with the original factorwise
    for i in range(d.dim):
        for j in range(d.dim):
            lhs = result.multiply(result.basis_vec(i), result.basis_vec(j))
            rhs = d.multiply(d.basis_vec(i), d.basis_vec(j))
            assert [str(a.coeffs) for a in lhs] == [str(b.coeffs) for b in rhs]


def test_pauli_tensor_pauli():
    d = pauli_system()
    result, report = sysops.tensor(d, d)
    assert result.dim == 16
    assert result.group.order() == 16
    assert report.free
    assert report.freeness.coherent


def test_tensor_dimension_multiplies():
    d1 = pauli_system()
    d2 = z4_group_system()
    result, report = sysops.tensor(d1, d2, verify=False)
    assert result.dim == d1.dim * d2.dim
    fixed = result.fixed_basis()
    assert len(fixed) == len(d1.fixed_basis()) * len(d2.fixed_basis())


# -- commuting mix -----------------------------------------------------------------

def translation_action(system):
    """The system's own action reindexed as an auxiliary action of its group."""
    return sysops.CommutingAction(system, system.group,
                                  {k: v for k, v in system.action.items()})


def test_commuting_mix_trivial_beta_reduces_to_tensor():
    d1 = z4_group_system()
    d2 = pauli_system()
    one = Cyclo.rational(1, d1.scalar_order)
    ident_cols = [{i: one} for i in range(d1.dim)]
    beta = sysops.CommutingAction(d1, d2.group,
                                  {g.coords: ident_cols for g in d2.group})
    (part_a, rep_a), (part_b, rep_b) = sysops.commuting_mix(d1, beta, d2)
    assert rep_a.free and rep_b.free
    assert part_a.dim == d1.dim * d2.dim
    tens, rep_t = sysops.tensor(d1, d2, verify=False)
    # same multiplication tables
    for i in range(part_a.dim):
        for j in range(part_a.dim):
            lhs = part_a.multiply(part_a.basis_vec(i), part_a.basis_vec(j))
            rhs = tens.multiply(tens.basis_vec(i), tens.basis_vec(j))
            assert vec_is_zero(vec_sub(lhs, rhs))


def test_commuting_mix_translation_example():
    # A = C(G) with the regular action; beta = the same translations; C = Pauli
    d1 = z4_group_system()
    # beta: H = Z2x2 won't match; use H = Z_4 acting by translation on itself
    d2 = z4_group_system()
    beta = translation_action(d1)
    (part_a, rep_a), (part_b, rep_b) = sysops.commuting_mix(d1, beta, d2)
    assert rep_a.free
    assert rep_b.free
    assert part_b.group.order() == 4


def test_commuting_mix_connes_landi_analogue():
    # A = functions on a free finite G-set (G acting on itself) with the same
    # translations as a commuting H-action; C = a twisted group algebra of H.
    g = FgAbelianGroup([2, 2])
    phi = PicHomomorphism.trivial(g, MatrixAlgebra([1], 2))
    a_sys = build(FactorSystem.canonical(phi, 2))
    module = phi.coefficient_module(2)
    table = {}
    for pi in g:
        for rho in g:
            v = (pi.coords[0] * rho.coords[1]) % 2
            if v:
                table[(pi.coords, rho.coords)] = (v,)
    c_sys = build(FactorSystem(phi, Cochain(module, 2, table)))
    beta = sysops.CommutingAction(a_sys, c_sys.group, dict(a_sys.action))
    (part_a, rep_a), (part_b, rep_b) = sysops.commuting_mix(a_sys, beta, c_sys)
    assert rep_a.free and rep_a.freeness.coherent
    assert rep_b.free and rep_b.freeness.coherent
    assert part_a.dim == 16
    assert part_b.dim == 4
    assert part_b.group == g


def test_commuting_mix_rejects_noncommuting():
    d1 = pauli_system()
    d2 = z4_group_system()
    one = Cyclo.rational(1, d1.scalar_order)
    # a "beta" that is not even a homomorphism
    bad_cols = {g.coords: [{(i + g.coords[0]) % d1.dim: one}
                           for i in range(d1.dim)] for g in d2.group}
    beta = sysops.CommutingAction(d1, d2.group, bad_cols)
    with pytest.raises(ActionsDoNotCommute):
        sysops.commuting_mix(d1, beta, d2)
