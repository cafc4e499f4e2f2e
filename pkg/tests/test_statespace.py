from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asepdual.statespace import (
    Configuration,
    PositionList,
    basis,
    binary_index,
    left_count,
    local_swap,
    mask_from_positions,
    positions_from_mask,
    reflect,
    reflect_mask,
)

configs = st.integers(1, 10).flatmap(lambda L: st.lists(st.integers(0, 1), min_size=L, max_size=L)).map(
    lambda occ: Configuration(tuple(occ)))


def test_binary_index_examples():
    assert binary_index(Configuration.from_string("000")) == 1
    assert binary_index(Configuration.from_string("100")) == 2
    assert binary_index(Configuration.from_string("111")) == 8


@given(configs)
def test_string_and_mask_roundtrip(eta):
    assert Configuration.from_string(eta.to_string()) == eta
    assert Configuration.from_mask(eta.mask, eta.L) == eta
    assert positions_from_mask(eta.mask, eta.L) == eta.positions().positions
    assert mask_from_positions(eta.positions().positions, eta.L) == eta.mask


@given(configs)
def test_reflection_is_an_involution(eta):
    assert reflect(reflect(eta)) == eta
    assert reflect_mask(eta.mask, eta.L) == reflect(eta).mask


@given(configs, st.data())
def test_local_swap_conserves_particles(eta, data):
    k = data.draw(st.integers(1, eta.L))
    sw = local_swap(eta, k)
    assert sw.n_particles == eta.n_particles
    assert local_swap(sw, k) == eta


def test_seam_swap_exchanges_last_and_first():
    assert local_swap(Configuration.from_string("0001"), 4).to_string() == "1000"


def test_left_count():
    eta = Configuration.from_string("1101")
    assert [left_count(eta, k) for k in range(1, 5)] == [0, 1, 2, 2]


@pytest.mark.parametrize("L", range(1, 9))
def test_sector_dimensions_and_order(L):
    full = basis(L)
    assert full.size == 2**L
    total = 0
    for N in range(L + 1):
        b = basis(L, N)
        assert b.size == comb(L, N)
        assert np.all(np.diff(b.states) > 0)
        assert all(bin(int(s)).count("1") == N for s in b.states)
        assert [b.index(int(s)) for s in b.states] == list(range(b.size))
        total += b.size
    assert total == 2**L


def test_sector_order_is_ascending_binary_index():
    strings = [c.to_string() for c in basis(4, 2).configurations()]
    assert strings == ["1100", "1010", "0110", "1001", "0101", "0011"]


def test_invalid_inputs():
    with pytest.raises(ValueError):
        Configuration.from_string("012")
    with pytest.raises(ValueError):
        PositionList((3, 2), 4)
    with pytest.raises(ValueError):
        PositionList((0,), 4)
    with pytest.raises(ValueError):
        basis(3, 4)
    with pytest.raises(KeyError):
        basis(4, 2).index(1)
