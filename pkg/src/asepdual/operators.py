"""Matrices of the quantum Hamiltonian formalism.

Every builder takes a scalar field (numeric or exact) and optionally a
particle sector.  Operators that conserve the particle number are built
directly in the sector basis when ``sector`` is given; operators that
create or annihilate particles map sector ``N`` to ``N -/+ 1``.

Parameter conventions follow the weighted ASEP: ``alpha = q e**s`` weights
jumps to the right across every bond, ``beta = e**sbar`` adds the extra
weight across the bond ``(L, 1)``, and ``rate`` sets the time scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .scalar import ExactField, Field, NumericField
from .sparse import TensorOperator, assemble, identity, zero_operator
from .statespace import Configuration, basis, popcount

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "N_HAT",
    "V_HAT",
    "ID2",
    "LOCAL_OPERATORS",
    "GeneratorSpec",
    "embed_local",
    "embed_pair",
    "hopping_bulk",
    "hopping_boundary",
    "build_generator",
    "heisenberg_chain",
    "diagonal_V",
    "number_W",
    "number_operator",
    "spin_z",
    "q_power_Sz",
    "reflection_operator",
    "project_sector",
    "uq_site_generator",
    "uq_generator",
    "reversible_weight",
    "reversible_measure",
    "diagonal_operator",
    "identity",
    "zero_operator",
    "TensorOperator",
]

# Single-site operators in the basis |0) = (1, 0)^T, |1) = (0, 1)^T.
SIGMA_X = np.array([[0, 1], [1, 0]])
SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SIGMA_Z = np.array([[1, 0], [0, -1]])
SIGMA_PLUS = np.array([[0, 1], [0, 0]])  # annihilates a particle
SIGMA_MINUS = np.array([[0, 0], [1, 0]])  # creates a particle
N_HAT = np.array([[0, 0], [0, 1]])
V_HAT = np.array([[1, 0], [0, 0]])
ID2 = np.eye(2, dtype=int)

LOCAL_OPERATORS = {
    "sx": SIGMA_X,
    "sy": SIGMA_Y,
    "sz": SIGMA_Z,
    "s+": SIGMA_PLUS,
    "s-": SIGMA_MINUS,
    "n": N_HAT,
    "v": V_HAT,
    "id": ID2,
}

Boundary = Literal["periodic", "reflecting"]


def _check_site(k: int, L: int, upper: int | None = None):
    upper = L if upper is None else upper
    if not 1 <= k <= upper:
        raise ValueError(f"site {k} outside 1..{upper}")


def _real_entry(x):
    x = complex(x)
    if x.imag != 0:
        raise ValueError("operator entries must be real to embed them")
    r = x.real
    return int(r) if float(r).is_integer() else r


def _field_value(field: Field, v):
    if field.exact:
        if isinstance(v, float):
            raise ValueError("exact operators need rational entries")
        return field.const(Fraction(v))
    return float(v)


def _from_masks(field: Field, L: int, col_N, in_masks, out_masks, values, row_N="auto") -> TensorOperator:
    """Assemble an operator from configuration-mask coordinates."""
    in_masks = np.asarray(in_masks, dtype=np.int64)
    out_masks = np.asarray(out_masks, dtype=np.int64)
    if row_N == "auto":
        if col_N is None:
            row_N = None
        else:
            counts = {popcount(int(m)) for m in out_masks}
            if len(counts) > 1:
                raise ValueError("operator does not map the sector to a single sector")
            row_N = counts.pop() if counts else col_N
    rb, cb = basis(L, row_N), basis(L, col_N)
    rows = rb.indices(out_masks)
    cols = cb.indices(in_masks)
    mat = assemble(field, (rb.size, cb.size), rows, cols, values)
    return TensorOperator(mat, field, L, row_N, col_N)


def _bits(states: np.ndarray, k: int) -> np.ndarray:
    return (states >> (k - 1)) & 1


def embed_local(u, k: int, L: int, field: Field | None = None, sector: int | None = None) -> TensorOperator:
    """``1 x ... x u x ... x 1`` with ``u`` acting on site ``k``."""
    _check_site(k, L)
    field = field or NumericField(2.0)
    u = np.asarray(u)
    states = basis(L, sector).states
    b = _bits(states, k)
    ins, outs, vals = [], [], []
    for a in (0, 1):
        for bb in (0, 1):
            val = _real_entry(u[a, bb])
            if val == 0:
                continue
            sel = states[b == bb]
            new = (sel & ~np.int64(1 << (k - 1))) | (np.int64(a) << (k - 1))
            ins.append(sel)
            outs.append(new)
            vals.extend([_field_value(field, val)] * len(sel))
    if not ins:
        return zero_operator(field, L, sector, sector)
    return _from_masks(field, L, sector, np.concatenate(ins), np.concatenate(outs), vals)


def embed_pair(u2, k: int, l: int, L: int, field: Field | None = None, sector: int | None = None) -> TensorOperator:
    """Embed a two-site operator ``u2`` (4x4, row index ``2*a_k + a_l``) on sites ``k != l``."""
    _check_site(k, L)
    _check_site(l, L)
    if k == l:
        raise ValueError("two-site operator needs distinct sites")
    field = field or NumericField(2.0)
    u2 = np.asarray(u2)
    states = basis(L, sector).states
    bk, bl = _bits(states, k), _bits(states, l)
    clear = ~np.int64((1 << (k - 1)) | (1 << (l - 1)))
    ins, outs, vals = [], [], []
    for ak in (0, 1):
        for al in (0, 1):
            for ck in (0, 1):
                for cl in (0, 1):
                    val = _real_entry(u2[2 * ak + al, 2 * ck + cl])
                    if val == 0:
                        continue
                    sel = states[(bk == ck) & (bl == cl)]
                    new = (sel & clear) | (np.int64(ak) << (k - 1)) | (np.int64(al) << (l - 1))
                    ins.append(sel)
                    outs.append(new)
                    vals.extend([_field_value(field, val)] * len(sel))
    if not ins:
        return zero_operator(field, L, sector, sector)
    return _from_masks(field, L, sector, np.concatenate(ins), np.concatenate(outs), vals)


def _bond_entries(field: Field, L: int, states: np.ndarray, k: int, l: int, weight, rate, qprime=None):
    """Matrix entries of the hopping matrix on bond ``(k, l)`` with right-jump weight ``weight``.

    A particle jumps from ``k`` to ``l`` with weighted rate ``rate*weight``
    and from ``l`` to ``k`` with ``rate/weight``; the diagonal carries the
    unweighted escape rates ``rate*q`` and ``rate/q`` (``qprime`` replaces
    ``q`` there when given).
    """
    r = field.const(rate) if field.exact else float(rate)
    if qprime is None:
        q, qi = field.q_pow(1), field.q_pow(-1)
    else:
        q, qi = qprime, field.inv(qprime)
    winv = field.inv(weight)
    bk, bl = _bits(states, k), _bits(states, l)
    flip = np.int64((1 << (k - 1)) | (1 << (l - 1)))
    right = states[(bk == 1) & (bl == 0)]
    left = states[(bk == 0) & (bl == 1)]
    ins = [right, right, left, left]
    outs = [right ^ flip, right, left ^ flip, left]
    vals = [-(r * weight), r * q, -(r * winv), r * qi]
    if not field.exact:
        return ins, outs, [np.full(len(arr), v) for arr, v in zip(ins, vals)]
    values = []
    for arr, v in zip(ins, vals):
        values.extend([v] * len(arr))
    return ins, outs, values


def _flat(field: Field, vals):
    return vals if field.exact else np.concatenate(vals)


def hopping_bulk(k: int, alpha, L: int, field: Field, rate=1, sector: int | None = None) -> TensorOperator:
    """``h_{k,k+1}(q, alpha)`` for ``1 <= k <= L-1``."""
    _check_site(k, L, L - 1)
    states = basis(L, sector).states
    ins, outs, vals = _bond_entries(field, L, states, k, k + 1, alpha, rate)
    return _from_masks(field, L, sector, np.concatenate(ins), np.concatenate(outs), _flat(field, vals), row_N=sector)


def hopping_boundary(alpha, beta, L: int, field: Field, rate=1, sector: int | None = None, qprime=None) -> TensorOperator:
    """``h_{L,1}(q, alpha, beta)``: the seam bond with weight ``alpha*beta``.

    Right jumps go from site ``L`` to site ``1``.  ``qprime`` overrides the
    asymmetry in the diagonal terms (the seam matrix with its own ``q'``).
    """
    if L < 2:
        raise ValueError("the boundary bond needs L >= 2")
    states = basis(L, sector).states
    ins, outs, vals = _bond_entries(field, L, states, L, 1, alpha * beta, rate, qprime)
    return _from_masks(field, L, sector, np.concatenate(ins), np.concatenate(outs), _flat(field, vals), row_N=sector)


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of a weighted ASEP generator.

    ``H(q, alpha, beta)`` for ``boundary='periodic'`` and ``H~(q, alpha)``
    for ``'reflecting'`` (``beta`` is ignored there).  The unweighted
    process is ``alpha = q, beta = 1``.
    """

    L: int
    field: Field
    alpha: object = None
    beta: object = None
    boundary: Boundary = "periodic"
    rate: object = 1

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("generators need L >= 2")
        if self.boundary not in ("periodic", "reflecting"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        f = self.field
        alpha = f.q_pow(1) if self.alpha is None else self.alpha
        beta = f.one if self.beta is None else self.beta
        if f.exact:
            alpha, beta = f.coerce(alpha), f.coerce(beta)
        f.check_positive(alpha, "alpha")
        f.check_positive(beta, "beta")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def q(self):
        return self.field.q_pow(1)


def build_generator(spec: GeneratorSpec, sector: int | None = None) -> TensorOperator:
    """Weighted generator as the sum of its bond hopping matrices."""
    L, f = spec.L, spec.field
    states = basis(L, sector).states
    ins, outs, vals = [], [], []
    for k in range(1, L):
        i, o, v = _bond_entries(f, L, states, k, k + 1, spec.alpha, spec.rate)
        ins += i
        outs += o
        vals += v
    if spec.boundary == "periodic":
        i, o, v = _bond_entries(f, L, states, L, 1, spec.alpha * spec.beta, spec.rate)
        ins += i
        outs += o
        vals += v
    return _from_masks(f, L, sector, np.concatenate(ins), np.concatenate(outs), _flat(f, vals), row_N=sector)


def heisenberg_chain(L: int, field: Field, boundary: Boundary = "periodic", rate=1, beta=None) -> TensorOperator:
    """``H(q, 1, beta)`` rebuilt from Pauli matrices (XXZ form).

    Each bond contributes ``-(rate/2)[sx sx + sy sy + Delta (sz sz - 1) + h (sz_k - sz_l)]``
    with ``Delta = (q + 1/q)/2``, ``h = (q - 1/q)/2``; a twist ``beta`` on the
    seam multiplies the two spin-flip terms by ``beta**(+-1)``.
    """
    q, qi = field.q_pow(1), field.q_pow(-1)
    half = field.const(Fraction(1, 2))
    delta = half * (q + qi)
    hfield = half * (q - qi)
    r = field.const(rate) if field.exact else float(rate)
    xx = np.kron(SIGMA_X, SIGMA_X)
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    zz = np.kron(SIGMA_Z, SIGMA_Z)
    bonds = [(k, k + 1) for k in range(1, L)]
    if boundary == "periodic":
        bonds.append((L, 1))
    total = zero_operator(field, L)
    one = identity(field, L)
    for k, l in bonds:
        if (k, l) == (L, 1) and beta is not None:
            b = field.coerce(beta) if field.exact else float(beta)
            # sx sx + sy sy = 2 (s+ s- + s- s+); the twist weights the two hops
            hop = (embed_pair(np.kron(SIGMA_PLUS, SIGMA_MINUS), k, l, L, field) * (2 * b)
                   + embed_pair(np.kron(SIGMA_MINUS, SIGMA_PLUS), k, l, L, field) * (2 * field.inv(b)))
        else:
            hop = embed_pair(xx, k, l, L, field) + embed_pair(yy, k, l, L, field)
        term = (
            hop
            + (embed_pair(zz, k, l, L, field) - one) * delta
            + (embed_local(SIGMA_Z, k, L, field) - embed_local(SIGMA_Z, l, L, field)) * hfield
        )
        total = total + term
    return total * (-(r * half))


def diagonal_operator(values_fn, L: int, field: Field, sector: int | None = None) -> TensorOperator:
    """Diagonal operator with entries ``values_fn(mask)`` (cached by mask)."""
    states = basis(L, sector).states
    vals = [values_fn(int(s)) for s in states]
    return _from_masks(field, L, sector, states, states, vals, row_N=sector)


def _site_sum(mask: int, L: int, coeff) -> int:
    return sum(coeff(k) for k in range(1, L + 1) if (mask >> (k - 1)) & 1)


def diagonal_V(gamma, L: int, field: Field, sector: int | None = None) -> TensorOperator:
    """``V(gamma) = gamma**(-(1/2) sum_k (2k - L - 1) n_k)``."""
    if field.is_zero(gamma):
        raise ValueError("gamma must be nonzero")
    cache = {}

    def value(mask):
        e = Fraction(-_site_sum(mask, L, lambda k: 2 * k - L - 1), 2)
        if e not in cache:
            cache[e] = field.power(gamma, e)
        return cache[e]

    return diagonal_operator(value, L, field, sector)


def number_W(z, L: int, field: Field, sector: int | None = None) -> TensorOperator:
    """``W(z) = z**N``."""
    if field.is_zero(z):
        raise ValueError("z must be nonzero")
    pw = [field.power(z, n) for n in range(L + 1)]
    return diagonal_operator(lambda m: pw[popcount(m)], L, field, sector)


def number_operator(L: int, field: Field, sector: int | None = None) -> TensorOperator:
    return diagonal_operator(lambda m: field.const(popcount(m)) if field.exact else float(popcount(m)), L, field, sector)


def spin_z(L: int, field: Field, sector: int | None = None) -> TensorOperator:
    """``S^z = (1/2) sum_k sigma^z_k = L/2 - N``."""
    def value(m):
        v = Fraction(L, 2) - popcount(m)
        return field.const(v) if field.exact else float(v)

    return diagonal_operator(value, L, field, sector)


def q_power_Sz(p, L: int, field: Field, sector: int | None = None) -> TensorOperator:
    """``q**(p S^z)``."""
    p = Fraction(p)
    pw = {n: field.q_pow(p * (Fraction(L, 2) - n)) for n in range(L + 1)}
    return diagonal_operator(lambda m: pw[popcount(m)], L, field, sector)


def reflection_operator(L: int, field: Field, sector: int | None = None) -> TensorOperator:
    """Permutation ``|eta> -> |R(eta)>`` with ``R(eta)(k) = eta(L+1-k)``."""
    states = basis(L, sector).states
    out = np.zeros_like(states)
    for k in range(1, L + 1):
        out |= ((states >> (k - 1)) & 1) << (L - k)
    return _from_masks(field, L, sector, states, out, [field.one] * len(states), row_N=sector)


def project_sector(op: TensorOperator, N: int) -> TensorOperator:
    """``1_N op 1_N`` in the sector basis."""
    if not 0 <= N <= op.L:
        raise ValueError(f"particle number {N} outside 0..{op.L}")
    return op.restrict(N, N)


def _uq_exponents(sign: int, k: int, L: int):
    """q-exponent of ``q**((1/2)(sum_{i<k} sz_i - sum_{i>k} sz_i))`` as a function of the mask."""
    def expo(mask):
        left = sum(1 - 2 * ((mask >> (i - 1)) & 1) for i in range(1, k))
        right = sum(1 - 2 * ((mask >> (i - 1)) & 1) for i in range(k + 1, L + 1))
        return Fraction(left - right, 2)

    return expo


def _check_sign(sign) -> int:
    if sign in ("+", 1, "plus"):
        return 1
    if sign in ("-", -1, "minus"):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def uq_site_generator(sign, k: int, alpha, L: int, field: Field, sector: int | None = None) -> TensorOperator:
    """``S_k^{+-}(q, alpha)``.

    ``S^+`` annihilates (maps sector ``N`` to ``N-1``), ``S^-`` creates.
    Use ``field.inverted()`` for ``S^{+-}(1/q, alpha)``.
    """
    sign = _check_sign(sign)
    _check_site(k, L)
    if sector is not None:
        target = sector - sign
        if not 0 <= target <= L:
            raise ValueError(f"S^{'+' if sign > 0 else '-'} maps sector {sector} outside 0..{L}")
    pre = field.power(alpha, Fraction(sign * (L + 1 - 2 * k), 2))
    expo = _uq_exponents(sign, k, L)
    states = basis(L, sector).states
    bit = np.int64(1 << (k - 1))
    occupied = (states & bit) != 0
    src = states[occupied] if sign > 0 else states[~occupied]
    dst = src ^ bit
    # the q-factor only involves sites != k, so it can be read off the source
    cache = {}
    vals = []
    for m in src:
        e = expo(int(m))
        if e not in cache:
            cache[e] = pre * field.q_pow(e)
        vals.append(cache[e])
    row_N = None if sector is None else sector - sign
    return _from_masks(field, L, sector, src, dst, vals, row_N=row_N)


def uq_generator(sign, alpha, L: int, field: Field, sector: int | None = None) -> TensorOperator:
    """``S^{+-}(q, alpha) = sum_k S_k^{+-}(q, alpha)``."""
    total = None
    for k in range(1, L + 1):
        t = uq_site_generator(sign, k, alpha, L, field, sector)
        total = t if total is None else total + t
    return total


def reversible_weight(eta: Configuration, field: Field, mu=0):
    """``q**(mu N(eta) + 2 sum_i x_i)``.

    ``mu`` is given as a power of ``q`` (``e**mu`` of the usual
    parametrisation equals ``q**mu`` here), so exact mode stays polynomial.
    """
    n = eta.n_particles
    sx = sum(k for k in range(1, eta.L + 1) if eta[k])
    return field.q_pow(Fraction(mu) * n + 2 * sx)


def reversible_measure(L: int, field: Field, mu=0, sector: int | None = None) -> TensorOperator:
    """Diagonal matrix of :func:`reversible_weight`."""
    mu = Fraction(mu)

    def value(mask):
        return field.q_pow(mu * popcount(mask) + 2 * _site_sum(mask, L, lambda k: k))

    return diagonal_operator(value, L, field, sector)
