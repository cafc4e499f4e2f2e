"""Semigroup actions ``exp(-H t) v`` and conditioned transition tables.

Three propagators are available:

``dense``
    ``scipy.linalg.expm`` on the densified sector matrix.  Used as the
    oracle; limited to moderate dimensions.
``krylov``
    Arnoldi projection with adaptive time stepping and a local error
    estimate (the classic ``expv`` scheme).
``uniformization``
    Poisson-weighted power series in ``P = 1 - H / Lambda``; requires
    ``-H`` to have nonnegative off-diagonal entries.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field as dc_field
from typing import Literal

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
from scipy.stats import poisson

from .measures import SAMSpec, sam_vector
from .operators import GeneratorSpec, build_generator
from .scalar import NumericField
from .sparse import StateVector, TensorOperator
from .statespace import basis, positions_from_mask

__all__ = [
    "PropagationError",
    "ParameterError",
    "DrivingSpec",
    "expm_action",
    "TransitionTable",
    "transition_table",
    "Decomposition",
    "sam_family",
    "decompose_onto_sams",
    "DENSE_LIMIT",
]

Method = Literal["auto", "dense", "krylov", "uniformization"]

DENSE_LIMIT = 5000


class PropagationError(RuntimeError):
    """A propagator failed to reach the requested accuracy."""


class ParameterError(ValueError):
    """Invalid physical or numerical parameters."""


# -- propagators --------------------------------------------------------------

def _as_csr(H) -> sps.csr_matrix:
    if isinstance(H, TensorOperator):
        if H.exact:
            raise ParameterError("propagators need a numeric operator")
        return sps.csr_matrix(H.matrix)
    if sps.issparse(H):
        return sps.csr_matrix(H)
    return sps.csr_matrix(np.asarray(H, dtype=float))


def _dense(A: sps.csr_matrix, v: np.ndarray, t: float) -> np.ndarray:
    if A.shape[0] > DENSE_LIMIT:
        raise ParameterError(f"dense oracle limited to dimension {DENSE_LIMIT}")
    return sla.expm(-t * A.toarray()) @ v


def _round_step(h: float) -> float:
    # two significant digits, rounded up, as in expv
    s = 10.0 ** (math.floor(math.log10(h)) - 1)
    return math.ceil(h / s) * s


def _krylov(A: sps.csr_matrix, v: np.ndarray, t: float, tol: float, m: int, max_steps: int) -> np.ndarray:
    """``exp(-t A) v`` by Arnoldi with adaptive steps."""
    n = A.shape[0]
    beta = float(np.linalg.norm(v))
    if beta == 0.0 or t == 0.0:
        return v.copy()
    m = max(1, min(m, n))
    anorm = float(abs(A).sum(axis=1).max()) or 1.0
    btol = 1e-7
    gamma, delta = 0.9, 1.2
    mxrej = 10
    xm = 1.0 / m
    fact = ((m + 1) / math.e) ** (m + 1) * math.sqrt(2 * math.pi * (m + 1))
    t_new = (1.0 / anorm) * ((fact * tol) / (4.0 * beta * anorm)) ** xm
    t_new = _round_step(t_new)
    t_now = 0.0
    w = v.astype(float).copy()
    # tolerance is relative to the input norm
    abstol = tol * beta
    steps = 0
    while t_now < t:
        steps += 1
        if steps > max_steps:
            raise PropagationError(f"Krylov propagator exceeded {max_steps} steps at t={t_now:g} of {t:g}")
        t_step = min(t - t_now, t_new)
        V = np.zeros((m + 1, n))
        Hm = np.zeros((m + 2, m + 2))
        V[0] = w / beta
        k1 = 2
        mb = m
        for j in range(m):
            p = -(A @ V[j])
            for i in range(j + 1):
                Hm[i, j] = V[i] @ p
                p -= Hm[i, j] * V[i]
            s = float(np.linalg.norm(p))
            if s < btol * anorm:
                # invariant subspace: the projection is exact
                k1 = 0
                mb = j + 1
                t_step = t - t_now
                break
            Hm[j + 1, j] = s
            V[j + 1] = p / s
        if k1 != 0:
            Hm[m + 1, m] = 1.0
            avnorm = float(np.linalg.norm(A @ V[m]))
        for _ in range(mxrej + 1):
            mx = mb + k1
            F = sla.expm(t_step * Hm[:mx, :mx])
            if k1 == 0:
                err_loc = 0.0
                break
            p1 = abs(F[m, 0]) * beta
            p2 = abs(F[m + 1, 0]) * beta * avnorm
            if p1 > 10.0 * p2:
                err_loc, xm = p2, 1.0 / m
            elif p1 > p2:
                err_loc, xm = p1 * p2 / (p1 - p2), 1.0 / m
            else:
                err_loc, xm = p1, 1.0 / max(m - 1, 1)
            if err_loc <= delta * t_step * abstol / t:
                break
            t_step = _round_step(gamma * t_step * (t_step * abstol / t / err_loc) ** xm)
        else:
            raise PropagationError("Krylov step size rejected too often; tolerance unattainable")
        mx = mb + max(0, k1 - 1)
        w = V[:mx].T @ (beta * F[:mx, 0])
        beta = float(np.linalg.norm(w))
        t_now += t_step
        if beta == 0.0:
            break
        if err_loc > 0.0:
            t_new = _round_step(gamma * t_step * (t_step * abstol / t / err_loc) ** xm)
        else:
            t_new = t - t_now
        t_new = max(t_new, 1e-300)
    return w


def _uniformization(A: sps.csr_matrix, v: np.ndarray, t: float, tol: float, max_terms: int) -> np.ndarray:
    """``exp(-t A) v = sum_n Pois(Lambda t; n) P**n v`` with ``P = 1 - A / Lambda``."""
    off = A - sps.diags(A.diagonal())
    if off.nnz and off.data.max() > 0:
        raise ParameterError("uniformization needs -H with nonnegative off-diagonal entries")
    lam = float(A.diagonal().max())
    if lam <= 0.0:
        if lam == 0.0 and off.nnz == 0 and not A.diagonal().any():
            return v.copy()
        raise ParameterError("uniformization needs a positive maximal diagonal entry")
    P = (sps.identity(A.shape[0], format="csr") - A / lam).tocsr()
    # P may have column sums above 1 for weighted generators
    rho = max(1.0, float(abs(P).sum(axis=0).max()))
    # split [0, t] so that each Poisson mean stays moderate
    chunks = max(1, math.ceil(lam * rho * t / 20.0))
    dt = t / chunks
    mean = lam * dt
    w = v.astype(float).copy()
    for _ in range(chunks):
        w = _poisson_series(P, w, mean, rho, tol / chunks, max_terms)
    return w


def _poisson_series(P, w, mean, rho, tol, max_terms):
    weight = math.exp(-mean)
    term = w
    acc = weight * term
    for n in range(1, max_terms + 1):
        term = P @ term
        weight *= mean / n
        acc = acc + weight * term
        # remaining mass sum_{k>n} e^{-mean} (mean rho)^k / k!, bounding ||P||^k
        tail = math.exp(mean * (rho - 1.0)) * poisson.sf(n, mean * rho)
        if tail <= tol and n >= mean:
            return acc
    raise PropagationError(f"uniformization series did not converge in {max_terms} terms")


def expm_action(
    H,
    v,
    t: float,
    tol: float = 1e-12,
    method: Method = "auto",
    krylov_dim: int = 30,
    max_steps: int = 10_000,
) -> StateVector | np.ndarray:
    """Return ``exp(-H t) v``.

    ``H`` is a numeric :class:`TensorOperator` (or any square matrix) and
    ``v`` a :class:`StateVector` (or array) on its column space.  ``auto``
    uses the dense oracle up to dimension 2000 and Krylov above.
    """
    t = float(t)
    if not t >= 0.0 or not math.isfinite(t):
        raise ParameterError(f"time must be finite and nonnegative, got {t}")
    if tol <= 0:
        raise ParameterError("tolerance must be positive")
    A = _as_csr(H)
    if A.shape[0] != A.shape[1]:
        raise ParameterError("generator must be square")
    wrap = isinstance(v, StateVector)
    if wrap:
        if v.field.exact:
            raise ParameterError("propagators need a numeric vector")
        if isinstance(H, TensorOperator) and (v.L, v.N) != (H.L, H.col_N):
            raise ParameterError("vector and generator live in different sectors")
        arr = np.asarray(v.coeffs, dtype=float)
    else:
        arr = np.asarray(v, dtype=float)
    if arr.shape != (A.shape[1],):
        raise ParameterError(f"dimension mismatch: operator {A.shape}, vector {arr.shape}")
    if method == "auto":
        method = "dense" if A.shape[0] <= 2000 else "krylov"
    if t == 0.0:
        out = arr.copy()
    elif method == "dense":
        out = _dense(A, arr, t)
    elif method == "krylov":
        out = _krylov(A, arr, t, tol, krylov_dim, max_steps)
    elif method == "uniformization":
        out = _uniformization(A, arr, t, tol, max_terms=max_steps)
    else:
        raise ParameterError(f"unknown method {method!r}")
    if wrap:
        return StateVector(out, v.field, v.L, v.N)
    return out


# -- driving and transition tables ----------------------------------------------

@dataclass(frozen=True)
class DrivingSpec:
    """Conditioning on the current.

    ``global``: ``alpha = q**(1 - 2M/L)``, ``beta = 1`` (driving ``s = -(2M/L) ln q``).
    ``boundary``: ``alpha = q``, ``beta = q**(-2M)`` (driving ``sbar = -2M ln q``).
    """

    kind: Literal["global", "boundary"]
    M: int

    def __post_init__(self):
        if self.kind not in ("global", "boundary"):
            raise ParameterError(f"driving kind must be 'global' or 'boundary', got {self.kind!r}")
        if int(self.M) != self.M:
            raise ParameterError("conditioning particle number must be an integer")

    def alpha(self, q: float, L: int) -> float:
        return q ** (1.0 - 2.0 * self.M / L) if self.kind == "global" else q

    def beta(self, q: float, L: int) -> float:
        return 1.0 if self.kind == "global" else q ** (-2.0 * self.M)

    def s(self, q: float, L: int) -> float:
        """Bulk driving ``ln(alpha / q)``."""
        return -2.0 * self.M / L * math.log(q) if self.kind == "global" else 0.0

    def sbar(self, q: float, L: int) -> float:
        """Boundary driving ``ln beta``."""
        return 0.0 if self.kind == "global" else -2.0 * self.M * math.log(q)

    def generator(self, L: int, q: float, sector: int | None = None, rate: float = 1.0) -> TensorOperator:
        spec = GeneratorSpec(L, NumericField(q), self.alpha(q, L), self.beta(q, L), "periodic", rate)
        return build_generator(spec, sector)


@dataclass
class TransitionTable:
    """``P(y, t | x, 0) = <y| exp(-H t) |x>`` on a ``K``-particle sector."""

    L: int
    K: int
    q: float
    t: float
    driving: DrivingSpec
    matrix: np.ndarray

    @property
    def states(self) -> np.ndarray:
        return basis(self.L, self.K).states

    def positions(self) -> list[tuple[int, ...]]:
        return [positions_from_mask(int(s), self.L) for s in self.states]

    def column(self, x) -> np.ndarray:
        """Transition probabilities out of the configuration with particles at ``x``."""
        from .statespace import mask_from_positions

        return self.matrix[:, basis(self.L, self.K).index(mask_from_positions(x, self.L))]

    def column_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def rows(self):
        """``(x, y, value)`` records in basis order, ``x`` outer."""
        pos = self.positions()
        for j, x in enumerate(pos):
            for i, y in enumerate(pos):
                yield x, y, float(self.matrix[i, j])

    def to_csv(self, header: str | None = None) -> str:
        """CSV with columns ``x, y, value``; configurations as 0/1 strings."""
        buf = io.StringIO()
        if header:
            for line in header.splitlines():
                buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for x, y, val in self.rows():
            w.writerow([_bits_string(x, self.L), _bits_string(y, self.L), repr(val)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "L": self.L, "K": self.K, "q": self.q, "t": self.t,
            "driving": {"kind": self.driving.kind, "M": self.driving.M},
            "states": [_bits_string(x, self.L) for x in self.positions()],
            "matrix": self.matrix.tolist(),
        }


def _bits_string(x, L: int) -> str:
    occ = ["0"] * L
    for k in x:
        occ[k - 1] = "1"
    return "".join(occ)


def transition_table(
    L: int,
    K: int,
    driving: DrivingSpec,
    q: float,
    t: float,
    tol: float = 1e-12,
    method: Method = "dense",
    rate: float = 1.0,
) -> TransitionTable:
    """Conditioned ``K``-particle transition table under ``driving``."""
    if not 0 <= K <= L:
        raise ParameterError(f"particle number {K} outside 0..{L}")
    if not q > 0:
        raise ParameterError("q must be positive")
    H = driving.generator(L, q, K, rate)
    dim = H.shape[0]
    if t == 0:
        P = np.eye(dim)
    elif method == "dense" and dim <= DENSE_LIMIT:
        P = sla.expm(-float(t) * H.to_dense())
    else:
        P = np.column_stack([
            expm_action(H, np.eye(dim)[:, j], t, tol, method) for j in range(dim)
        ])
    return TransitionTable(L, K, float(q), float(t), driving, P)


# -- decomposition over the SAM family ------------------------------------------

@dataclass
class Decomposition:
    """Least-squares weights of a vector over the restricted SAM family."""

    weights: np.ndarray
    shock_sets: list[tuple[int, ...]]
    residual: float
    condition: float
    rank: int
    singular_values: np.ndarray = dc_field(repr=False)

    @property
    def rank_deficient(self) -> bool:
        return self.rank < len(self.shock_sets)

    def weight(self, y) -> float:
        return float(self.weights[self.shock_sets.index(tuple(y))])

    def as_dict(self) -> dict[str, float]:
        return {",".join(map(str, y)): float(c) for y, c in zip(self.shock_sets, self.weights)}


def sam_family(L: int, N: int, K: int, z: float, kind: str, q: float) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Matrix whose columns are ``1_N |mu_y>`` for all ``y`` with ``K`` sites."""
    if not 0 <= K <= N <= L:
        raise ParameterError(f"need 0 <= K <= N <= L, got K={K}, N={N}, L={L}")
    F = NumericField(q)
    shock_sets = [positions_from_mask(int(s), L) for s in basis(L, K).states]
    cols = [sam_vector(SAMSpec(L, y, z, kind), F, sector=N).to_array() for y in shock_sets]
    M = np.column_stack(cols) if cols else np.zeros((basis(L, N).size, 0))
    return M, shock_sets


def decompose_onto_sams(v_t, L: int, N: int, K: int, z: float, kind: str, q: float, rcond: float | None = None) -> Decomposition:
    """Solve ``min ||M c - v_t||_2`` over the ``K``-shock SAM family in sector ``N``."""
    arr = v_t.to_array() if isinstance(v_t, StateVector) else np.asarray(v_t, dtype=float)
    M, shock_sets = sam_family(L, N, K, z, kind, q)
    if arr.shape != (M.shape[0],):
        raise ParameterError(f"vector of length {arr.shape} does not match sector dimension {M.shape[0]}")
    c, _, rank, sv = np.linalg.lstsq(M, arr, rcond=rcond)
    norm = float(np.linalg.norm(arr))
    res = float(np.linalg.norm(M @ c - arr))
    rel = res / norm if norm > 0 else res
    cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else math.inf
    return Decomposition(c, shock_sets, rel, cond, int(rank), sv)
