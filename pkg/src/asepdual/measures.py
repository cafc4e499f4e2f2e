"""Product measures, shock/antishock measures and duality functions.

All measure vectors are unnormalised: the coefficient of ``|eta>`` is a
product of single-site factors ``1`` (empty) or ``z_k`` (occupied), times
the prefactors of the definitions.  Normalisation is an explicit, separate
step (:meth:`StateVector.normalize`).

Two shock/antishock families are provided.  ``kind="I"`` places each shock
through the operator ``z^-1 q^(-n_left + n_right) n_x``; ``kind="II"``
additionally applies the gauge ``q^((2/L) sum_l (x - l) n_l)``, which makes
the fugacity profile piecewise geometric with slope ``q^(-2/L)`` per site.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal

import numpy as np
from scipy.special import expit

from .operators import diagonal_operator, diagonal_V, uq_generator
from .scalar import Field, q_factorial
from .sparse import ExactMatrix, StateVector, TensorOperator
from .statespace import Configuration, PositionList, basis, mask_from_positions, popcount

__all__ = [
    "SAMSpec",
    "FugacityProfile",
    "bernoulli_vector",
    "sam_vector",
    "sam_by_operators",
    "restrict_particles",
    "density_profile",
    "sam_fugacities",
    "shock_tanh_profile",
    "duality_function",
    "duality_function_tilde",
    "q_hat_operator",
    "s_tilde_operator",
    "s_tilde_row",
    "q_hat_row",
    "sam_via_algebra",
    "profile_to_csv",
]

Kind = Literal["I", "II"]


def _z_power(z, n: int, field: Field):
    """``z**n`` with ``0**0 = 1`` (``n`` may be negative only for ``z != 0``)."""
    if field.is_zero(z):
        if n < 0:
            raise ZeroDivisionError("negative power of z = 0")
        return field.one if n == 0 else field.zero
    return field.power(z, n)


def _check_z(z, field: Field):
    if field.exact:
        if not field.is_zero(z):
            field.check_positive(z, "z")
    elif not z >= 0:
        raise ValueError(f"fugacity z must be nonnegative, got {z}")


def _bit_matrix(states: np.ndarray, L: int) -> np.ndarray:
    """Occupations as an ``(n_states, L)`` int array, column ``k-1`` for site ``k``."""
    return ((states[:, None] >> np.arange(L, dtype=np.int64)) & 1).astype(np.int64)


def bernoulli_vector(z, L: int, field: Field, sector: int | None = None) -> StateVector:
    """``|z> = (1, z)^(x L)``: coefficient ``z**N(eta)``."""
    _check_z(z, field)
    states = basis(L, sector).states
    pw = [_z_power(z, n, field) for n in range(L + 1)]
    if field.exact:
        coeffs = [pw[popcount(int(s))] for s in states]
    else:
        counts = np.array([popcount(int(s)) for s in states], dtype=np.int64)
        coeffs = np.asarray(pw, dtype=float)[counts]
    return StateVector(coeffs, field, L, sector)


@dataclass(frozen=True)
class SAMSpec:
    """Shock sites ``x_1 < ... < x_K`` on ``L`` sites, global fugacity ``z``."""

    L: int
    shocks: tuple[int, ...]
    z: object = 1
    kind: Kind = "II"

    def __post_init__(self):
        shocks = tuple(int(x) for x in self.shocks)
        if len(set(shocks)) != len(shocks):
            raise ValueError(f"duplicate shock sites in {shocks}")
        shocks = tuple(sorted(shocks))
        if shocks and (shocks[0] < 1 or shocks[-1] > self.L):
            raise ValueError(f"shock sites {shocks} outside 1..{self.L}")
        if self.kind not in ("I", "II"):
            raise ValueError(f"kind must be 'I' or 'II', got {self.kind!r}")
        object.__setattr__(self, "shocks", shocks)

    @property
    def K(self) -> int:
        return len(self.shocks)

    @property
    def mask(self) -> int:
        return mask_from_positions(self.shocks, self.L)


def _sam_exponents(spec: SAMSpec, bits: np.ndarray) -> np.ndarray:
    """``L`` times the q-exponent of every state's SAM coefficient (an integer array)."""
    L = spec.L
    sites = np.arange(1, L + 1, dtype=np.int64)
    cum = np.cumsum(bits, axis=1)
    total = cum[:, -1]
    expo = np.zeros(bits.shape[0], dtype=np.int64)
    for x in spec.shocks:
        left = cum[:, x - 2] if x > 1 else 0
        right = total - cum[:, x - 1]
        expo += L * (right - left)
        if spec.kind == "II":
            expo += 2 * (bits @ (x - sites))
    return expo


def sam_vector(spec: SAMSpec, field: Field, sector: int | None = None) -> StateVector:
    """Unnormalised shock/antishock measure from its closed-form coefficients.

    The coefficient of ``|eta>`` is zero unless every shock site is occupied;
    otherwise it is ``z**(N - K) q**e(eta)`` with
    ``e = sum_j (#right of x_j - #left of x_j)`` for kind I and the extra
    ``(2/L) sum_j sum_l (x_j - l) eta(l)`` for kind II.
    """
    _check_z(spec.z, field)
    L = spec.L
    states = basis(L, sector).states
    bits = _bit_matrix(states, L)
    pinned = (states & spec.mask) == spec.mask
    expo = _sam_exponents(spec, bits)
    counts = bits.sum(axis=1)
    K = spec.K
    if field.exact:
        zp, qp = {}, {}
        coeffs = []
        for ok, e, n in zip(pinned, expo, counts):
            if not ok:
                coeffs.append(field.zero)
                continue
            n, e = int(n), int(e)
            if n not in zp:
                zp[n] = _z_power(spec.z, n - K, field)
            if e not in qp:
                qp[e] = field.q_pow(Fraction(e, L))
            coeffs.append(zp[n] * qp[e])
        return StateVector(coeffs, field, L, sector)
    q = field.q
    coeffs = np.zeros(len(states))
    if np.any(pinned):
        n = counts[pinned] - K
        zfac = float(spec.z) ** n.astype(float)  # numpy keeps 0.0**0 == 1.0
        coeffs[pinned] = zfac * np.exp(expo[pinned] / L * math.log(q))
    return StateVector(coeffs, field, L, sector)


def sam_by_operators(spec: SAMSpec, field: Field) -> StateVector:
    """The same measure built by applying the defining diagonal operators to ``|z>``.

    Independent of :func:`sam_vector`; used to cross-check it.  Full space only.
    """
    L = spec.L
    v = bernoulli_vector(spec.z, L, field)
    zinv = field.inv(spec.z) if spec.K else field.one
    for x in spec.shocks:
        def value(mask, x=x):
            if not (mask >> (x - 1)) & 1:
                return field.zero
            left = popcount(mask & ((1 << (x - 1)) - 1))
            right = popcount(mask >> x)
            e = Fraction(right - left)
            if spec.kind == "II":
                e += Fraction(2, L) * sum(x - l for l in range(1, L + 1) if (mask >> (l - 1)) & 1)
            return field.q_pow(e)

        v = (diagonal_operator(value, L, field) @ v) * zinv
    return v


def restrict_particles(v: StateVector, N: int) -> StateVector:
    """``1_N v`` in sector coordinates."""
    return v.restrict(N)


def density_profile(v: StateVector, q: float | None = None) -> np.ndarray:
    """``rho_k = <s| n_k |v> / <s|v>`` for ``k = 1..L``."""
    arr = v.to_array(q)
    tot = math.fsum(arr)
    if tot == 0:
        raise ZeroDivisionError("measure has zero total weight")
    bits = _bit_matrix(v.basis.states, v.L)
    return (arr @ bits) / tot


@dataclass(frozen=True)
class FugacityProfile:
    """Site fugacities ``z_k = z q**e_k``; pinned sites have ``z_k = inf``.

    Pinned (deterministically occupied) sites are flagged structurally and
    their exponent is ``None``; no floating infinity is ever produced.
    """

    L: int
    z: float
    q: float
    shocks: tuple[int, ...]
    q_exponents: tuple[Fraction | None, ...]

    @property
    def pinned(self) -> np.ndarray:
        return np.array([e is None for e in self.q_exponents])

    def log_fugacities(self) -> np.ndarray:
        """``ln z_k`` on free sites, ``nan`` placeholders on pinned ones (see :attr:`pinned`)."""
        lz = math.log(self.z) if self.z > 0 else -math.inf
        lq = math.log(self.q)
        return np.array([np.nan if e is None else lz + float(e) * lq for e in self.q_exponents])

    def fugacity(self, k: int) -> float | None:
        """``z_k``, or ``None`` for a pinned site."""
        e = self.q_exponents[k - 1]
        return None if e is None else self.z * self.q ** float(e)

    def densities(self) -> np.ndarray:
        lf = self.log_fugacities()
        pinned = self.pinned
        rho = np.ones(self.L)
        rho[~pinned] = expit(lf[~pinned])
        return rho


def sam_fugacities(spec: SAMSpec, q: float) -> FugacityProfile:
    """Site fugacities of the SAM, valid for any ``L`` (no vector is built).

    A free site ``k`` with ``l`` shocks to its left has exponent ``2l - K``
    (kind I), plus ``(2/L) sum_j (x_j - k)`` for kind II.
    """
    L, K = spec.L, spec.K
    shocks = set(spec.shocks)
    expo = []
    l = 0
    sx = sum(spec.shocks)
    for k in range(1, L + 1):
        if k in shocks:
            l += 1
            expo.append(None)
            continue
        e = Fraction(2 * l - K)
        if spec.kind == "II":
            e += Fraction(2 * (sx - K * k), L)
        expo.append(e)
    return FugacityProfile(L, float(spec.z), float(q), spec.shocks, tuple(expo))


def shock_tanh_profile(L: int, shocks: Iterable[int], z: float, q: float) -> np.ndarray:
    """Closed-form kind-II densities in the hyperbolic-tangent form.

    Between shocks, with ``l`` shocks to the left of ``k``,
    ``rho_k = (1/2)[1 - tanh((E/L)(sum_j (k - x_j) + L (kappa + K - 2l)/2))]``
    where ``E = ln q`` and ``kappa = -ln z / E``; shock sites have density 1.
    """
    shocks = sorted(int(x) for x in shocks)
    K = len(shocks)
    E = math.log(q)
    if E == 0:
        raise ZeroDivisionError("the tanh form needs q != 1")
    kappa = -math.log(z) / E
    sx = sum(shocks)
    out = np.ones(L)
    l = 0
    pinned = set(shocks)
    for k in range(1, L + 1):
        if k in pinned:
            l += 1
            continue
        arg = (E / L) * (K * k - sx + L * (kappa + K - 2 * l) / 2)
        out[k - 1] = 0.5 * (1.0 - math.tanh(arg))
    return out


def profile_to_csv(profile: FugacityProfile, header: str | None = None) -> str:
    """CSV text with columns ``k, z_k, rho_k`` (``z_k = inf`` on pinned sites)."""
    buf = io.StringIO()
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "z_k", "rho_k"])
    rho = profile.densities()
    for k in range(1, profile.L + 1):
        zk = profile.fugacity(k)
        w.writerow([k, "inf" if zk is None else repr(zk), repr(float(rho[k - 1]))])
    return buf.getvalue()


# -- duality functions ------------------------------------------------------

def _positions(x) -> tuple[int, ...]:
    if isinstance(x, PositionList):
        return x.positions
    return tuple(int(v) for v in x)


def _q_exponent_at(x: int, mask: int) -> int:
    """``sum_{i<x} eta(i) - sum_{i>x} eta(i)``."""
    return popcount(mask & ((1 << (x - 1)) - 1)) - popcount(mask >> x)


def duality_function(x, eta: Configuration, field: Field, mu=0):
    """``D(x, eta) = q**(-mu |x|) prod_j q**(-2 x_j) Q_{x_j}(eta)``.

    ``Q_x(eta) = q**(sum_{i<x} eta(i) - sum_{i>x} eta(i)) eta(x)``.  The
    default ``mu = 0`` is the plain duality function; other values give the
    normalisation by the reversible weight ``q**(mu |x| + 2 sum x)``.
    """
    xs = _positions(x)
    mask = eta.mask
    e = Fraction(-mu) * len(xs)
    for xj in xs:
        if not (mask >> (xj - 1)) & 1:
            return field.zero
        e += -2 * xj + _q_exponent_at(xj, mask)
    return field.q_pow(e)


def duality_function_tilde(x, eta: Configuration, field: Field):
    """``q**(|x| (N(eta) - 1)) D(x, eta)``."""
    xs = _positions(x)
    d = duality_function(xs, eta, field)
    return d * field.q_pow(len(xs) * (eta.n_particles - 1))


def q_hat_operator(x: int, L: int, field: Field, sector: int | None = None) -> TensorOperator:
    """Diagonal ``Q_x = q**(sum_{i<x} n_i - sum_{i>x} n_i) n_x``."""
    if not 1 <= x <= L:
        raise ValueError(f"site {x} outside 1..{L}")

    def value(mask):
        if not (mask >> (x - 1)) & 1:
            return field.zero
        return field.q_pow(_q_exponent_at(x, mask))

    return diagonal_operator(value, L, field, sector)


def q_hat_row(x, L: int, field: Field) -> StateVector:
    """Row vector ``<s| prod_j Q_{x_j}`` over the full space."""
    xs = _positions(x)
    states = basis(L).states
    coeffs = []
    for s in states:
        m = int(s)
        if any(not (m >> (xj - 1)) & 1 for xj in xs):
            coeffs.append(field.zero)
        else:
            coeffs.append(field.q_pow(sum(_q_exponent_at(xj, m) for xj in xs)))
    return StateVector(coeffs, field, L)


def _raising(L: int, field: Field, sector: int) -> TensorOperator:
    """``S^+(q, q)`` restricted to input sector ``sector``."""
    return uq_generator("+", field.q_pow(1), L, field, sector)


def s_tilde_row(x, L: int, field: Field) -> StateVector:
    """``<x| S~`` with ``S~ = sum_n (S^+(q, q))**n / [n]_q!``, over the full space."""
    xs = _positions(x)
    K = len(xs)
    start = StateVector(
        [field.one if int(s) == mask_from_positions(xs, L) else field.zero for s in basis(L, K).states],
        field, L, K,
    )
    out = [start.embed()]
    row = start
    for n in range(1, L - K + 1):
        # <row| S^+ lives on the input sector K + n
        row = _raising(L, field, K + n).rapply(row)
        fact = q_factorial(n, field)
        out.append((row.divexact(fact) if field.exact else row * (1.0 / fact)).embed())
    total = out[0]
    for term in out[1:]:
        total = total + term
    return total


def s_tilde_operator(L: int, field: Field) -> TensorOperator:
    """Full-space matrix ``S~ = sum_n (S^+(q, q))**n / [n]_q!`` (small ``L`` only)."""
    if L > 12:
        raise ValueError("the full-space S~ matrix is limited to L <= 12")
    sp = uq_generator("+", field.q_pow(1), L, field)
    power = sp ** 0
    total = power
    for n in range(1, L + 1):
        power = power @ sp
        fact = q_factorial(n, field)
        if field.exact:
            rows = {i: {j: v.divexact(fact) for j, v in r.items()} for i, r in power.matrix.rows.items()}
            term = TensorOperator(ExactMatrix(power.shape, rows), field, L)
        else:
            term = power * (1.0 / fact)
        total = total + term
    return total


def sam_via_algebra(x, N: int, z, kind: Kind, L: int, field: Field) -> StateVector:
    """The ``N``-particle SAM generated from ``|x>`` by repeated particle creation.

    kind I:  ``z**(N-K) (S^-(1/q, q))**(N-K) / [N-K]_q! |x>``
    kind II: ``z**(N-K) V(q**(2(K-N)/L)) (S^-(1/q, q**(1-2N/L)))**(N-K) / [N-K]_q! |x>``
    """
    xs = _positions(x)
    K = len(xs)
    if N < K:
        raise ValueError(f"need N >= K, got N={N}, K={K}")
    if N > L:
        raise ValueError(f"particle number {N} exceeds L={L}")
    _check_z(z, field)
    target = mask_from_positions(xs, L)
    v = StateVector(
        [field.one if int(s) == target else field.zero for s in basis(L, K).states], field, L, K
    )
    alpha = field.q_pow(1) if kind == "I" else field.q_pow(1 - Fraction(2 * N, L))
    inv = field.inverted()
    for n in range(K, N):
        v = uq_generator("-", alpha, L, inv, n).apply(v.with_field(inv)).with_field(field)
    fact = q_factorial(N - K, field)
    v = v.divexact(fact) if field.exact else v * (1.0 / fact)
    if kind == "II":
        v = diagonal_V(field.q_pow(Fraction(2 * (K - N), L)), L, field, N) @ v
    elif kind != "I":
        raise ValueError(f"kind must be 'I' or 'II', got {kind!r}")
    return v * _z_power(z, N - K, field)
