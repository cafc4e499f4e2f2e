from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import dense_reference as ref
from asepdual import operators as ops
from asepdual.scalar import ExactField, NumericField
from asepdual.sparse import identity
from asepdual.statespace import Configuration, basis


def dense(op, q=None):
    return op.to_dense(q)


def test_bulk_hopping_entries_by_hand():
    F = NumericField(2.0)
    h = dense(ops.hopping_bulk(1, 2.0, 2, F))
    # binary index iota = mask + 1
    assert h[2, 1] == -2.0 and h[1, 1] == 2.0
    assert h[1, 2] == -0.5 and h[2, 2] == 0.5
    assert np.count_nonzero(h) == 4


def test_seam_hopping_entries_by_hand():
    F = NumericField(2.0)
    h = dense(ops.hopping_boundary(2.0, 3.0, 2, F))
    # the alpha*beta term moves a particle from site L=2 across the seam to site 1
    assert h[1, 2] == pytest.approx(-6.0)
    assert h[2, 1] == pytest.approx(-1.0 / 6.0)
    assert h[2, 2] == 2.0 and h[1, 1] == 0.5


def test_empty_block_is_annihilated():
    F = NumericField(1.5)
    h = dense(ops.hopping_bulk(1, 1.5, 2, F))
    assert np.all(h[:, 0] == 0) and np.all(h[0, :] == 0)


@pytest.mark.parametrize("L", [2, 3, 4, 5])
@pytest.mark.parametrize("q,a,b", [(1.7, 1.7, 1.0), (1.3, 0.6, 2.2), (2.0, 1.0, 0.5)])
def test_generators_match_kronecker_reference(L, q, a, b):
    F = NumericField(q)
    H = ops.build_generator(ops.GeneratorSpec(L, F, a, b))
    Ht = ops.build_generator(ops.GeneratorSpec(L, F, a, None, "reflecting"))
    assert np.allclose(dense(H), ref.H_ring(q, a, b, L), atol=1e-13)
    assert np.allclose(dense(Ht), ref.H_open(q, a, L), atol=1e-13)


@pytest.mark.parametrize("L", [1, 2, 3, 4])
def test_uq_generators_match_reference(L):
    q, a = 1.6, 0.8
    F = NumericField(q)
    for s in (1, -1):
        assert np.allclose(dense(ops.uq_generator(s, a, L, F)), ref.S(s, q, a, L), atol=1e-13)


def test_V_matches_reference_and_acts_on_positions():
    L, g = 5, 1.4
    F = NumericField(2.0)
    V = dense(ops.diagonal_V(g, L, F))
    assert np.allclose(V, ref.V(g, L))
    x = (2, 5)
    m = sum(1 << (k - 1) for k in x)
    assert V[m, m] == pytest.approx(g ** (-0.5 * sum(2 * k - L - 1 for k in x)))
    assert np.allclose(dense(ops.diagonal_V(1.0, L, F)), np.eye(2**L))


@pytest.mark.parametrize("L", [3, 4])
def test_embedded_number_operator_is_occupation(L):
    F = ExactField(L)
    for k in range(1, L + 1):
        nk = ops.embed_local(ops.N_HAT, k, L, F)
        for c in basis(L).configurations():
            assert nk.entry(c.mask, c.mask) == (F.one if c[k] else F.zero)
        assert ops.embed_local(ops.ID2, k, L, F).equals(identity(F, L))


@given(st.lists(st.integers(-3, 3), min_size=8, max_size=8))
def test_disjoint_supports_commute(entries):
    F = ExactField(3)
    u = np.array(entries[:4]).reshape(2, 2)
    v = np.array(entries[4:]).reshape(2, 2)
    a, b = ops.embed_local(u, 1, 3, F), ops.embed_local(v, 3, 3, F)
    assert (a @ b - b @ a).is_zero()


@pytest.mark.parametrize("L", [2, 3, 4, 5, 6])
def test_stochasticity_exact(L):
    F = ExactField(L)
    ones = [F.one] * (1 << L)
    from asepdual.sparse import StateVector

    s = StateVector(ones, F, L)
    assert ops.build_generator(ops.GeneratorSpec(L, F)).rapply(s).is_zero()
    assert ops.build_generator(ops.GeneratorSpec(L, F, boundary="reflecting")).rapply(s).is_zero()


def test_reflecting_two_sites_is_single_bond():
    F = ExactField(2)
    Ht = ops.build_generator(ops.GeneratorSpec(2, F, boundary="reflecting"))
    assert Ht.equals(ops.hopping_bulk(1, F.q_pow(1), 2, F))


def test_seam_with_unit_twist_closes_the_ring():
    F = ExactField(3)
    a = F.q_pow(Fraction(1, 3))
    seam = ops.hopping_boundary(a, F.one, 3, F)
    H = ops.build_generator(ops.GeneratorSpec(3, F, a, F.one))
    Ht = ops.build_generator(ops.GeneratorSpec(3, F, a, None, "reflecting"))
    assert (H - Ht).equals(seam)


def test_project_sector_frozen_and_null_vector():
    F = NumericField(1.5)
    H = ops.build_generator(ops.GeneratorSpec(4, F))
    assert np.all(dense(ops.project_sector(H, 0)) == 0)
    assert np.all(dense(ops.project_sector(H, 4)) == 0)
    HN = dense(ops.project_sector(H, 2))
    assert HN.shape == (6, 6)
    assert np.allclose(HN.T @ np.ones(6), 0, atol=1e-14)


def test_heisenberg_form():
    for L in (2, 3, 4):
        F = ExactField(L)
        assert ops.build_generator(ops.GeneratorSpec(L, F, F.one, F.one)).equals(ops.heisenberg_chain(L, F))


def test_W_on_sector_and_identity():
    F = ExactField(3)
    z = F.q_pow(1) * 3
    W = ops.number_W(z, 3, F, sector=2)
    assert W.equals(identity(F, 3, 2) * F.power(z, 2))
    assert ops.number_W(F.one, 3, F).equals(identity(F, 3))
    with pytest.raises(ValueError):
        ops.number_W(F.zero, 3, F)


def test_reversible_weight_examples():
    F = ExactField(4)
    assert ops.reversible_weight(Configuration.from_string("0000"), F) == F.one
    assert ops.reversible_weight(Configuration.from_string("0010"), F) == F.q_pow(6)
    pi = ops.diagonal_V(F.q_pow(-2), 4, F)
    assert pi.equals(ops.reversible_measure(4, F, mu=-5))


def test_reflection_of_single_site():
    F = ExactField(1)
    assert ops.reflection_operator(1, F).equals(identity(F, 1))


def test_invalid_sites_and_signs():
    F = ExactField(3)
    with pytest.raises(ValueError):
        ops.hopping_bulk(3, F.one, 3, F)
    with pytest.raises(ValueError):
        ops.embed_local(ops.N_HAT, 0, 3, F)
    with pytest.raises(ValueError):
        ops.uq_generator(0, F.one, 3, F)
    with pytest.raises(ValueError):
        ops.GeneratorSpec(3, NumericField(1.5), -1.0)
