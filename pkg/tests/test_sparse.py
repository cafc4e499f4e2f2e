import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asepdual.operators import GeneratorSpec, build_generator, uq_generator
from asepdual.scalar import ExactField, NumericField
from asepdual.sparse import StateVector, identity, zero_operator


def _ops(field, L=3):
    H = build_generator(GeneratorSpec(L, field, field.q_pow(1), field.q_pow(2)))
    S = uq_generator(1, field.one, L, field)
    return H, S


@pytest.mark.parametrize("field", [ExactField(3), NumericField(1.7)])
def test_algebra_of_operators(field):
    H, S = _ops(field)
    one = identity(field, 3)
    assert (H @ one).equals(H)
    assert ((H + S) - S).equals(H, 1e-13)
    assert ((H @ S).T).equals(S.T @ H.T, 1e-13)
    assert (H**2).equals(H @ H, 1e-13)
    assert zero_operator(field, 3).is_zero()


def test_exact_evaluation_matches_numeric_build():
    q = 1.7
    He, _ = _ops(ExactField(3))
    Hn, _ = _ops(NumericField(q))
    assert np.allclose(He.to_dense(q), Hn.to_dense(), atol=1e-13)


def test_sector_restriction_commutes_with_build():
    F = ExactField(4)
    H = build_generator(GeneratorSpec(4, F))
    for N in range(5):
        assert H.restrict(N).equals(build_generator(GeneratorSpec(4, F), sector=N))


def test_apply_and_rapply():
    F = NumericField(1.3)
    H = build_generator(GeneratorSpec(4, F), sector=2)
    rng = np.random.default_rng(1)
    v = StateVector(rng.normal(size=6), F, 4, 2)
    assert np.allclose(H.apply(v).to_array(), H.to_dense() @ v.to_array())
    assert np.allclose(H.rapply(v).to_array(), v.to_array() @ H.to_dense())


def test_sector_maps_change_particle_number():
    F = ExactField(4)
    S = uq_generator(-1, F.one, 4, F, sector=1)
    assert (S.col_N, S.row_N) == (1, 2)
    assert S.shape == (6, 4)


@given(st.lists(st.integers(-4, 4), min_size=8, max_size=8), st.lists(st.integers(-4, 4), min_size=8, max_size=8))
def test_vector_arithmetic_exact(a, b):
    F = ExactField(3)
    va = StateVector([F.const(x) for x in a], F, 3)
    vb = StateVector([F.const(x) for x in b], F, 3)
    assert ((va + vb) - vb).equals(va)
    assert va.dot(vb) == F.const(sum(x * y for x, y in zip(a, b)))
    assert va.total() == F.const(sum(a))


def test_restrict_embed_roundtrip():
    F = NumericField(2.0)
    v = StateVector(np.arange(16, dtype=float), F, 4)
    parts = [v.restrict(N).embed() for N in range(5)]
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    assert total.equals(v)


def test_with_field_rejects_mode_change():
    F = ExactField(3)
    H, _ = _ops(F)
    assert H.with_field(F.inverted()).field == F.inverted()
    with pytest.raises(ValueError):
        H.with_field(NumericField(1.5))
