import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asepdual.measures import (
    SAMSpec,
    bernoulli_vector,
    density_profile,
    duality_function,
    duality_function_tilde,
    profile_to_csv,
    q_hat_operator,
    q_hat_row,
    restrict_particles,
    s_tilde_row,
    sam_by_operators,
    sam_fugacities,
    sam_vector,
    sam_via_algebra,
    shock_tanh_profile,
)
from asepdual.scalar import ExactField, NumericField
from asepdual.sparse import StateVector
from asepdual.statespace import Configuration, basis

# densities from a dense 2**L reference (Kronecker-built SAM vectors, L=8, q=1.3, z=0.7)
RHO_SAM_II_X3 = [0.3803985155177734, 0.3650647842567339, 0.9999999999999997, 0.4601095226043728,
                 0.44386445611403996, 0.4277385365631398, 0.41176470588235287, 0.3959746411846502]
RHO_SAM_I_X26 = [0.2928870292887029, 0.9999999999999991, 0.411764705882353, 0.411764705882353,
                 0.411764705882353, 0.9999999999999991, 0.5419147961520842, 0.5419147961520842]


def test_bernoulli_examples():
    F = NumericField(1.5)
    assert np.array_equal(bernoulli_vector(2.0, 2, F).to_array(), [1, 2, 2, 4])
    assert np.array_equal(bernoulli_vector(1.0, 3, F).to_array(), np.ones(8))
    assert np.array_equal(bernoulli_vector(0.0, 2, F).to_array(), [1, 0, 0, 0])
    with pytest.raises(ValueError):
        bernoulli_vector(-1.0, 2, F)


def test_sam_without_shocks_is_bernoulli():
    F = ExactField(4)
    z = F.q_pow(Fraction(1, 2))
    for kind in ("I", "II"):
        assert sam_vector(SAMSpec(4, (), z, kind), F).equals(bernoulli_vector(z, 4, F))


def test_frozen_densities():
    F = NumericField(1.3)
    rho2 = density_profile(sam_vector(SAMSpec(8, (3,), 0.7, "II"), F))
    rho1 = density_profile(sam_vector(SAMSpec(8, (2, 6), 0.7, "I"), F))
    assert np.allclose(rho2, RHO_SAM_II_X3, atol=1e-14)
    assert np.allclose(rho1, RHO_SAM_I_X26, atol=1e-14)
    # the fugacity description agrees without building any vector
    assert np.allclose(sam_fugacities(SAMSpec(8, (3,), 0.7, "II"), 1.3).densities(), RHO_SAM_II_X3, atol=1e-14)


def test_kind_one_fugacity_ratio_is_q_squared():
    prof = sam_fugacities(SAMSpec(9, (3, 7), 0.4, "I"), 1.6)
    assert prof.fugacity(4) / prof.fugacity(2) == pytest.approx(1.6**2)
    assert prof.fugacity(8) / prof.fugacity(6) == pytest.approx(1.6**2)
    assert prof.fugacity(3) is None and prof.pinned[2]


@pytest.mark.parametrize("z", [0.3, 1.0, 2.5])
def test_tanh_profiles(z):
    q, L = 1.3, 12
    F = NumericField(q)
    for shocks in [(5,), (3, 9)]:
        rho = density_profile(sam_vector(SAMSpec(L, shocks, z, "II"), F))
        assert np.allclose(rho, shock_tanh_profile(L, shocks, z, q), atol=1e-12)


def test_restriction_examples():
    F = ExactField(4)
    z = F.q_pow(1)
    b = bernoulli_vector(z, 4, F)
    for N in range(5):
        assert restrict_particles(b, N).equals(StateVector([F.power(z, N)] * basis(4, N).size, F, 4, N))
    v = sam_vector(SAMSpec(4, (1, 3), z, "I"), F)
    assert restrict_particles(v, 1).is_zero()


@given(st.integers(3, 7), st.data())
def test_sam_vector_matches_operator_route(L, data):
    K = data.draw(st.integers(0, min(L, 3)))
    shocks = tuple(sorted(data.draw(st.lists(st.integers(1, L), min_size=K, max_size=K, unique=True))))
    kind = data.draw(st.sampled_from(["I", "II"]))
    F = ExactField(L)
    spec = SAMSpec(L, shocks, F.q_pow(Fraction(1, L)), kind)
    assert sam_vector(spec, F).equals(sam_by_operators(spec, F))


def test_duality_function_examples():
    F = ExactField(5)
    eta = Configuration.from_string("01101")
    assert duality_function((), eta, F) == F.one
    assert duality_function((3,), Configuration.from_string("00100"), F) == F.q_pow(-6)
    assert duality_function((1,), eta, F) == F.zero
    # Q_3 = q^(1 - 1), D = q^-6
    assert duality_function((3,), eta, F) == F.q_pow(-6)
    for x in [(2,), (2, 3), (2, 3, 5)]:
        ratio = duality_function_tilde(x, eta, F)
        assert ratio == duality_function(x, eta, F) * F.q_pow(len(x) * (eta.n_particles - 1))


def test_q_hat_is_diagonal_Q():
    F = ExactField(4)
    for x in range(1, 5):
        Q = q_hat_operator(x, 4, F)
        for eta in basis(4).configurations():
            assert Q.entry(eta.mask, eta.mask) == duality_function((x,), eta, F) * F.q_pow(2 * x)


def test_s_tilde_two_sites_by_hand():
    F = ExactField(2)
    qi = F.q_pow(-1)
    row = s_tilde_row((1,), 2, F)
    assert row.equals(q_hat_row((1,), 2, F))
    # Q_1(eta) = q^{-eta(2)} eta(1) on eta = 00, 10, 01, 11
    expected = [F.zero, F.one, F.zero, qi]
    assert row.equals(StateVector(expected, F, 2))
    assert s_tilde_row((), 2, F).equals(StateVector([F.one] * 4, F, 2))


@pytest.mark.parametrize("L", [3, 4, 5])
def test_tilde_s_rows_all_sets(L):
    F = ExactField(L)
    for K in range(L + 1):
        for xs in itertools.combinations(range(1, L + 1), K):
            assert s_tilde_row(xs, L, F).equals(q_hat_row(xs, L, F))


def test_algebraic_sam_examples():
    F = ExactField(4)
    assert sam_via_algebra((2,), 1, F.one, "I", 4, F).equals(sam_vector(SAMSpec(4, (2,), F.one, "I"), F).restrict(1))
    assert sam_via_algebra((2,), 2, F.one, "I", 4, F).equals(sam_vector(SAMSpec(4, (2,), F.one, "I"), F).restrict(2))
    G = NumericField(1.3)
    a = sam_via_algebra((2, 5), 4, 0.8, "II", 6, G)
    b = sam_vector(SAMSpec(6, (2, 5), 0.8, "II"), G).restrict(4)
    assert np.max(np.abs(a.to_array() - b.to_array())) <= 1e-12 * np.max(np.abs(b.to_array()))
    with pytest.raises(ValueError):
        sam_via_algebra((1, 2), 1, 1.0, "I", 4, G)


def test_kind_two_sam_algebra_numeric_l8():
    G = NumericField(1.3)
    worst = 0.0
    for K in range(0, 4):
        for xs in itertools.combinations(range(1, 9), K):
            for kind in ("I", "II"):
                full = sam_vector(SAMSpec(8, xs, 0.6, kind), G)
                for N in range(K, 9):
                    a = sam_via_algebra(xs, N, 0.6, kind, 8, G).to_array()
                    b = full.restrict(N).to_array()
                    worst = max(worst, np.max(np.abs(a - b)) / np.max(np.abs(b)))
    assert worst <= 1e-12


def test_profile_csv_marks_pinned_sites():
    text = profile_to_csv(sam_fugacities(SAMSpec(4, (2,), 1.0, "I"), 2.0), header="demo")
    lines = text.splitlines()
    assert lines[0] == "# demo" and lines[1] == "k,z_k,rho_k"
    assert lines[3].startswith("2,inf,1.0")
    assert not any("nan" in l for l in lines)


def test_sam_spec_validation():
    with pytest.raises(ValueError):
        SAMSpec(4, (2, 2), 1.0, "I")
    with pytest.raises(ValueError):
        SAMSpec(4, (5,), 1.0, "I")
    with pytest.raises(ValueError):
        SAMSpec(4, (1,), 1.0, "III")
