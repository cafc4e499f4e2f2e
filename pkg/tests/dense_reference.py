"""Kronecker-product reference implementations used as test oracles.

Site 1 is the fastest-varying tensor factor, so the row index equals the
occupation bit mask.  Local basis: index 0 empty, index 1 occupied.
"""

from functools import reduce

import numpy as np

SP = np.array([[0.0, 1.0], [0.0, 0.0]])
SM = SP.T.copy()
NH = np.diag([0.0, 1.0])
VH = np.diag([1.0, 0.0])
I2 = np.eye(2)


def site(u, k, L):
    factors = [I2] * L
    factors[k - 1] = np.asarray(u, dtype=float)
    return reduce(np.kron, factors[::-1])


def bond(k, l, q, a, L):
    return -(a * site(SP, k, L) @ site(SM, l, L) - q * site(NH, k, L) @ site(VH, l, L)
             + site(SM, k, L) @ site(SP, l, L) / a - site(VH, k, L) @ site(NH, l, L) / q)


def H_open(q, a, L):
    return sum((bond(k, k + 1, q, a, L) for k in range(1, L)), np.zeros((2**L, 2**L)))


def H_ring(q, a, b, L):
    return H_open(q, a, L) + bond(L, 1, q, a * b, L)


def sz(L):
    return sum(site(np.diag([0.5, -0.5]), k, L) for k in range(1, L + 1))


def S_site(sign, k, q, a, L):
    left = sum((site(np.diag([1.0, -1.0]), i, L) for i in range(1, k)), np.zeros((2**L, 2**L)))
    right = sum((site(np.diag([1.0, -1.0]), i, L) for i in range(k + 1, L + 1)), np.zeros((2**L, 2**L)))
    D = np.diag(q ** (0.5 * (np.diag(left) - np.diag(right))))
    return a ** (sign * 0.5 * (L + 1 - 2 * k)) * D @ site(SP if sign > 0 else SM, k, L)


def S(sign, q, a, L):
    return sum(S_site(sign, k, q, a, L) for k in range(1, L + 1))


def V(g, L):
    d = [g ** (-0.5 * sum((2 * k - L - 1) * ((m >> (k - 1)) & 1) for k in range(1, L + 1))) for m in range(2**L)]
    return np.diag(d)


def sector(L, N):
    return [m for m in range(2**L) if bin(m).count("1") == N]
