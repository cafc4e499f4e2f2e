"""Configurations of the exclusion process on ``L`` sites.

Sites are labelled ``1..L``.  Internally a configuration is an integer bit
mask with site ``k`` stored in bit ``k-1``, so that the binary index of a
configuration is ``mask + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

__all__ = [
    "Configuration",
    "PositionList",
    "SectorBasis",
    "binary_index",
    "left_count",
    "local_swap",
    "reflect",
    "enumerate_sector",
    "full_basis",
    "basis",
    "popcount",
    "mask_from_positions",
    "positions_from_mask",
]


def popcount(mask: int) -> int:
    return int(mask).bit_count()


def mask_from_positions(positions, L: int | None = None) -> int:
    mask = 0
    for x in positions:
        x = int(x)
        if x < 1 or (L is not None and x > L):
            raise ValueError(f"site {x} outside 1..{L}")
        mask |= 1 << (x - 1)
    return mask


def positions_from_mask(mask: int, L: int) -> tuple[int, ...]:
    return tuple(k for k in range(1, L + 1) if (mask >> (k - 1)) & 1)


@dataclass(frozen=True)
class Configuration:
    """Occupation numbers ``eta(1), ..., eta(L)``."""

    occupations: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(b) for b in self.occupations)
        if any(b not in (0, 1) for b in occ):
            raise ValueError(f"occupations must be 0/1, got {self.occupations}")
        object.__setattr__(self, "occupations", occ)

    @property
    def L(self) -> int:
        return len(self.occupations)

    def __getitem__(self, k: int) -> int:
        """Occupation of site ``k`` (1-indexed)."""
        if not 1 <= k <= self.L:
            raise IndexError(f"site {k} outside 1..{self.L}")
        return self.occupations[k - 1]

    def vacancy(self, k: int) -> int:
        return 1 - self[k]

    @property
    def n_particles(self) -> int:
        return sum(self.occupations)

    @property
    def n_vacancies(self) -> int:
        return self.L - self.n_particles

    @property
    def mask(self) -> int:
        m = 0
        for k, b in enumerate(self.occupations):
            m |= b << k
        return m

    @classmethod
    def from_mask(cls, mask: int, L: int) -> "Configuration":
        if mask < 0 or mask >= 1 << L:
            raise ValueError(f"mask {mask} does not fit {L} sites")
        return cls(tuple((mask >> k) & 1 for k in range(L)))

    @classmethod
    def from_string(cls, s: str) -> "Configuration":
        """Parse ``'0110'`` (site 1 leftmost)."""
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {s!r}")
        return cls(tuple(int(c) for c in s))

    def to_string(self) -> str:
        return "".join(str(b) for b in self.occupations)

    def positions(self) -> "PositionList":
        return PositionList(positions_from_mask(self.mask, self.L), self.L)

    def __str__(self):
        return self.to_string()


@dataclass(frozen=True)
class PositionList:
    """Particle positions ``x_1 < ... < x_N`` on ``L`` sites."""

    positions: tuple[int, ...]
    L: int

    def __post_init__(self):
        pos = tuple(int(x) for x in self.positions)
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError(f"positions must be strictly increasing: {pos}")
        if pos and (pos[0] < 1 or pos[-1] > self.L):
            raise ValueError(f"positions {pos} outside 1..{self.L}")
        object.__setattr__(self, "positions", pos)

    def __len__(self):
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    @property
    def mask(self) -> int:
        return mask_from_positions(self.positions, self.L)

    def configuration(self) -> Configuration:
        return Configuration.from_mask(self.mask, self.L)


def binary_index(eta: Configuration) -> int:
    """``1 + sum_k eta(k) 2**(k-1)``."""
    return eta.mask + 1


def left_count(eta: Configuration, k: int) -> int:
    """Number of particles strictly to the left of site ``k``."""
    if not 1 <= k <= eta.L:
        raise ValueError(f"site {k} outside 1..{eta.L}")
    return sum(eta.occupations[: k - 1])


def local_swap(eta: Configuration, k: int) -> Configuration:
    """Exchange the occupations of sites ``k`` and ``k+1`` (``L`` and ``1`` for ``k = L``)."""
    L = eta.L
    if not 1 <= k <= L:
        raise ValueError(f"site {k} outside 1..{L}")
    occ = list(eta.occupations)
    j = k % L
    occ[k - 1], occ[j] = occ[j], occ[k - 1]
    return Configuration(tuple(occ))


def reflect(eta: Configuration) -> Configuration:
    return Configuration(eta.occupations[::-1])


def reflect_mask(mask: int, L: int) -> int:
    out = 0
    for k in range(L):
        if (mask >> k) & 1:
            out |= 1 << (L - 1 - k)
    return out


class SectorBasis:
    """Ordered basis of the ``N``-particle sector (``N=None``: full space).

    States are bit masks in increasing binary-index order, so a sector basis
    is a subsequence of the full basis.
    """

    def __init__(self, L: int, N: int | None = None):
        if L < 1:
            raise ValueError("L must be positive")
        if N is not None and not 0 <= N <= L:
            raise ValueError(f"particle number {N} outside 0..{L}")
        self.L = L
        self.N = N
        if N is None:
            self.states = np.arange(1 << L, dtype=np.int64)
        else:
            self.states = _sector_states(L, N)
        self._index = None

    @property
    def size(self) -> int:
        return len(self.states)

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"SectorBasis(L={self.L}, N={self.N}, size={self.size})"

    def __eq__(self, other):
        return isinstance(other, SectorBasis) and (other.L, other.N) == (self.L, self.N)

    def __hash__(self):
        return hash((self.L, self.N))

    @property
    def is_full(self) -> bool:
        return self.N is None

    def index(self, mask: int) -> int:
        """Ordinal of a configuration mask within the basis."""
        if self.N is None:
            if not 0 <= mask < 1 << self.L:
                raise KeyError(mask)
            return int(mask)
        if self._index is None:
            self._index = {int(s): i for i, s in enumerate(self.states)}
        return self._index[int(mask)]

    def indices(self, masks: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`index` (masks must belong to the basis)."""
        if self.N is None:
            return np.asarray(masks, dtype=np.int64)
        return np.searchsorted(self.states, masks).astype(np.int64)

    def configurations(self):
        for s in self.states:
            yield Configuration.from_mask(int(s), self.L)

    def __contains__(self, mask) -> bool:
        mask = int(mask)
        if not 0 <= mask < 1 << self.L:
            return False
        return self.N is None or popcount(mask) == self.N


@lru_cache(maxsize=64)
def _sector_states(L: int, N: int) -> np.ndarray:
    out = np.empty(comb(L, N), dtype=np.int64)
    weights = [1 << k for k in range(L)]
    for i, c in enumerate(combinations(range(L), N)):
        out[i] = sum(weights[k] for k in c)
    out.sort()
    out.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def basis(L: int, N: int | None = None) -> SectorBasis:
    """Cached :class:`SectorBasis`."""
    return SectorBasis(L, N)


def enumerate_sector(L: int, N: int) -> SectorBasis:
    if not 0 <= N <= L:
        raise ValueError(f"particle number {N} outside 0..{L}")
    return basis(L, N)


def full_basis(L: int) -> SectorBasis:
    return basis(L, None)
