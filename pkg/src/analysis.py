"""
System-theoretic tests for tensor HPDSs and their preservation under
reduction:

* stability of odeco systems from the signs of lam_j * alpha_j^{k-2};
* the tensor controllability matrix R = [M_0 M_1 ...] (strong
  controllability for even k, accessibility for odd k);
* the state-dependent observability matrix O(x) = [P_0; P_1; ...]
  (local weak observability);
* the identities R_red = V^T R and O_red(V^T x) = O(x) V.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List

import numpy as np
from scipy.linalg import orth, svdvals

from .config import RANK_TOL, SIZE_CAP, SYMMETRY_TOL, TOL
from .decomposition import odeco_decompose
from .errors import InputError, NotSymmetricError, OddOrderError
from .reduction import EXACT_RESIDUAL, project_state, projection_residual
from .tensor_core import is_symmetric, kron_power, mode_mul_matrix, require_cubical, unfold

logger = logging.getLogger(__name__)

ALPHA_ZERO_TOL = 1e-12
PRESERVATION_TOL = 1e-8


def numerical_rank(M, rank_tol=RANK_TOL):
    """Singular values above rank_tol * sigma_max."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = svdvals(M)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


# --- stability -------------------------------------------------------------


class Stability(str, Enum):
    STABLE = "stable"
    ASYMPTOTICALLY_STABLE = "asymptotically_stable"
    UNSTABLE = "unstable"


@dataclass(frozen=True, eq=False)
class StabilityVerdict:
    lambdas: np.ndarray
    alphas: np.ndarray
    terms: np.ndarray
    zero_terms: np.ndarray
    classification: Stability
    origin_unique: bool

    def to_dict(self):
        return {
            "classification": self.classification.value,
            "origin_unique": self.origin_unique,
            "lambdas": self.lambdas.tolist(),
            "alphas": self.alphas.tolist(),
            "terms": self.terms.tolist(),
            "zero_terms": self.zero_terms.tolist(),
        }


def stability_classify(A, x0, tol=None, alpha_tol=ALPHA_ZERO_TOL):
    """Classify the origin of x' = A x^{k-1} from x0 for a symmetric odeco A.

    With x0 = sum_j alpha_j u_j the origin is asymptotically stable if every
    lam_j alpha_j^{k-2} < 0, stable if all are <= 0, and unstable otherwise.
    Terms with |alpha_j| <= alpha_tol count as zero.
    """
    A = np.asarray(A, dtype=float)
    n = require_cubical(A)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n,) or not np.all(np.isfinite(x0)):
        raise InputError(f"initial state must be a finite vector of length {n}")
    decomposition = odeco_decompose(A, tol)
    k = A.ndim

    lambdas = decomposition.lambdas
    alphas = decomposition.U.T @ x0
    zero_terms = (np.abs(alphas) <= alpha_tol) | (lambdas == 0)
    terms = np.where(zero_terms, 0.0, lambdas * alphas ** (k - 2))

    if np.any(terms > 0):
        classification = Stability.UNSTABLE
    elif np.all(terms < 0):
        classification = Stability.ASYMPTOTICALLY_STABLE
    else:
        classification = Stability.STABLE
    return StabilityVerdict(
        lambdas=lambdas,
        alphas=alphas,
        terms=terms,
        zero_terms=zero_terms,
        classification=classification,
        origin_unique=bool(np.all(lambdas != 0)),
    )


# --- controllability -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ControllabilityResult:
    R: np.ndarray
    n: int
    order: int
    levels_used: int
    rank: int
    rank_tol: float
    level_ranks: List[int]
    truncated_by_cap: bool = False
    bases: List[np.ndarray] = field(default_factory=list, repr=False)
    block_sizes: List[int] = field(default_factory=list)

    @property
    def guarantee(self):
        return "strong_controllability" if self.order % 2 == 0 else "accessibility"

    @property
    def full_rank(self):
        return self.rank == self.n

    @property
    def is_strongly_controllable(self):
        return self.full_rank and self.order % 2 == 0

    def to_dict(self):
        return {
            "rank": self.rank,
            "n": self.n,
            "full_rank": self.full_rank,
            "guarantee": self.guarantee,
            "is_strongly_controllable": self.is_strongly_controllable,
            "levels_used": self.levels_used,
            "level_ranks": self.level_ranks,
            "block_sizes": self.block_sizes,
            "columns": int(self.R.shape[1]),
            "rank_tol": self.rank_tol,
            "truncated_by_cap": self.truncated_by_cap,
        }


def _multiset_products(A, Q):
    """Columns A x_0 q_a x_1 q_b ... for every multiset {a, b, ...} of columns of Q.

    A is symmetric in its first k-1 modes, so multisets of basis columns span
    the same space as products of arbitrary vectors from col(Q).
    """
    k = A.ndim
    d = Q.shape[1]
    if d == 0:
        return np.zeros((A.shape[-1], 0))
    G = A
    for p in range(k - 1):
        G = mode_mul_matrix(G, p, Q.T)
    combos = itertools.combinations_with_replacement(range(d), k - 1)
    return np.column_stack([G[combo] for combo in combos])


def _check_input_matrix(A, B):
    n = require_cubical(A)
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != n:
        raise InputError(f"input matrix must have {n} rows, got shape {B.shape}")
    return n, B


def controllability_matrix(A, B, max_level=None, column_cap=None, rank_tol=RANK_TOL,
                           early_stop=True):
    """Tensor controllability matrix R = [M_0 M_1 ... ] with M_0 = B.

    M_{j+1} holds A q_a q_b ... over multisets of an orthonormal basis of
    col([M_0 ... M_j]). With early_stop the build ends once the rank is n or
    stops growing.
    """
    A = np.asarray(A, dtype=float)
    n, B = _check_input_matrix(A, B)
    max_level = n - 1 if max_level is None else max_level

    blocks = [B]
    R = B
    rank = numerical_rank(R, rank_tol)
    level_ranks = [rank]
    bases = []
    truncated = False
    for level in range(1, max_level + 1):
        if early_stop and rank == n:
            break
        Q = orth(R, rcond=rank_tol) if R.shape[1] else np.zeros((n, 0))
        M = _multiset_products(A, Q)
        if column_cap is not None and R.shape[1] + M.shape[1] > column_cap:
            M = M[:, : max(column_cap - R.shape[1], 0)]
            truncated = True
        bases.append(Q)
        blocks.append(M)
        R = np.hstack([R, M])
        new_rank = numerical_rank(R, rank_tol)
        level_ranks.append(new_rank)
        logger.debug("controllability level %d: %d columns, rank %d", level, M.shape[1], new_rank)
        stalled = new_rank == rank
        rank = new_rank
        if truncated:
            logger.warning("controllability matrix truncated at %d columns", column_cap)
            break
        if early_stop and stalled:
            break

    return ControllabilityResult(
        R=R,
        n=n,
        order=A.ndim,
        levels_used=len(blocks) - 1,
        rank=rank,
        rank_tol=rank_tol,
        level_ranks=level_ranks,
        truncated_by_cap=truncated,
        bases=bases,
        block_sizes=[b.shape[1] for b in blocks],
    )


def is_strongly_controllable(A, B, **opts):
    A = np.asarray(A, dtype=float)
    if A.ndim % 2:
        raise OddOrderError(A.ndim)
    return controllability_matrix(A, B, **opts).full_rank


# --- observability ---------------------------------------------------------


class Observability(str, Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class ObservabilityResult:
    O: np.ndarray
    x: np.ndarray
    n: int
    levels_used: int
    rank: int
    rank_tol: float
    level_ranks: List[int]
    inconclusive: bool = False
    f_shapes: List[tuple] = field(default_factory=list)
    block_shapes: List[tuple] = field(default_factory=list)

    @property
    def full_rank(self):
        return self.rank == self.n

    @property
    def verdict(self):
        if self.full_rank:
            return Observability.YES
        return Observability.INCONCLUSIVE if self.inconclusive else Observability.NO

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "rank": self.rank,
            "n": self.n,
            "levels_used": self.levels_used,
            "level_ranks": self.level_ranks,
            "rank_tol": self.rank_tol,
            "inconclusive": self.inconclusive,
            "f_shapes": [list(s) for s in self.f_shapes],
            "block_shapes": [list(s) for s in self.block_shapes],
        }


def _apply_f(W, A_k, degree, n):
    """W F where F = sum_i I^[i-1] (x) A_(k) (x) I^[degree-i].

    F is never formed; each term contracts one n-sized slot of W's columns
    with A_(k).
    """
    l = W.shape[0]
    out = None
    for i in range(1, degree + 1):
        a, b = i - 1, degree - i
        Wr = W.reshape(l, n ** a, n, n ** b)
        term = np.einsum("lamb,mc->lacb", Wr, A_k).reshape(l, -1)
        out = term if out is None else out + term
    return out


def _jacobian_block(W, x, degree, n):
    """W sum_q x^[q-1] (x) I_n (x) x^[degree-q], an l x n block."""
    l = W.shape[0]
    P = np.zeros((l, n))
    for q in range(1, degree + 1):
        a, b = q - 1, degree - q
        Wr = W.reshape(l, n ** a, n, n ** b)
        P += np.einsum("lamb,a,b->lm", Wr, kron_power(x, a), kron_power(x, b))
    return P


def observability_matrix(A, C, x, max_level=None, size_cap=SIZE_CAP, rank_tol=RANK_TOL,
                         early_stop=True):
    """State-dependent observability matrix O(x) = [P_0; P_1; ...].

    P_0 = C and P_j = W_j sum_q x^[q-1] (x) I (x) x^[N_j - q] with
    W_1 = C A_(k), W_j = W_{j-1} F_j and N_j = j(k-2)+1. Each P_j is the
    gradient of the j-th Lie derivative of y = Cx. The build stops at rank n,
    on rank stagnation, at max_level, or when W_j would exceed size_cap
    entries (inconclusive).
    """
    A = np.asarray(A, dtype=float)
    n = require_cubical(A)
    k = A.ndim
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[1] != n:
        raise InputError(f"output matrix must have {n} columns, got shape {C.shape}")
    x = np.asarray(x, dtype=float)
    if x.shape != (n,) or not np.all(np.isfinite(x)):
        raise InputError(f"state must be a finite vector of length {n}")
    max_level = n - 1 if max_level is None else max_level
    l = C.shape[0]

    A_k = unfold(A, k - 1)
    blocks = [C]
    rank = numerical_rank(C, rank_tol)
    level_ranks = [rank]
    f_shapes = []
    inconclusive = False
    W = None
    degree = 1
    for level in range(1, max_level + 1):
        if early_stop and rank == n:
            break
        next_degree = level * (k - 2) + 1
        if l * n ** next_degree > size_cap:
            inconclusive = rank < n
            logger.warning(
                "observability level %d needs %d entries, above size_cap=%d",
                level, l * n ** next_degree, size_cap,
            )
            break
        if W is None:
            W = C @ A_k
        else:
            f_shapes.append((n ** degree, n ** next_degree))
            W = _apply_f(W, A_k, degree, n)
        degree = next_degree
        P = _jacobian_block(W, x, degree, n)
        blocks.append(P)
        new_rank = numerical_rank(np.vstack(blocks), rank_tol)
        level_ranks.append(new_rank)
        logger.debug("observability level %d: rank %d", level, new_rank)
        stalled = new_rank == rank
        rank = new_rank
        if early_stop and stalled:
            break

    return ObservabilityResult(
        O=np.vstack(blocks),
        x=x,
        n=n,
        levels_used=len(blocks) - 1,
        rank=rank,
        rank_tol=rank_tol,
        level_ranks=level_ranks,
        inconclusive=inconclusive,
        f_shapes=f_shapes,
        block_shapes=[b.shape for b in blocks],
    )


def is_locally_weakly_observable(A, C, x, **opts):
    """Tri-state: Observability.YES, NO or INCONCLUSIVE."""
    return observability_matrix(A, C, x, **opts).verdict


# --- preservation under reduction ------------------------------------------


@dataclass(frozen=True)
class PreservationCheck:
    residual: float
    tolerance: float
    exact_reduction: bool
    original_rank: int
    reduced_rank: int
    n: int
    r: int
    residual_kind: str

    @property
    def passed(self):
        """Residual within tolerance; None when the reduction was truncated."""
        return self.residual <= self.tolerance if self.exact_reduction else None

    @property
    def rank_preserved(self):
        return self.original_rank < self.n or self.reduced_rank == self.r

    def to_dict(self):
        return {
            self.residual_kind: self.residual,
            "tolerance": self.tolerance,
            "exact_reduction": self.exact_reduction,
            "passed": self.passed,
            "original_rank": self.original_rank,
            "reduced_rank": self.reduced_rank,
            "n": self.n,
            "r": self.r,
            "rank_preserved": self.rank_preserved,
        }


def _is_exact(model, reduced):
    return projection_residual(model, reduced) <= EXACT_RESIDUAL


def check_controllability_preservation(model, reduced, max_level=None, rank_tol=RANK_TOL,
                                       early_stop=True, column_cap=None):
    """Residual ||R_red - V^T R||_F with the reduced levels built on V^T (full bases).

    ``reduced_rank`` is the rank of the reduced system's own controllability
    matrix.
    """
    if model.B is None or reduced.model.B is None:
        raise InputError("controllability needs an input matrix B")
    V = reduced.V
    if V.shape[0] != model.n:
        raise InputError("reduced model does not belong to this model")

    full = controllability_matrix(model.A, model.B, max_level=max_level, rank_tol=rank_tol,
                                  early_stop=early_stop, column_cap=column_cap)
    blocks = [reduced.model.B]
    for Q, width in zip(full.bases, full.block_sizes[1:]):
        blocks.append(_multiset_products(reduced.model.A, V.T @ Q)[:, :width])
    R_red = np.hstack(blocks)
    residual = float(np.linalg.norm(R_red - V.T @ full.R))

    own = controllability_matrix(reduced.model.A, reduced.model.B, rank_tol=rank_tol,
                                 early_stop=early_stop, column_cap=column_cap)
    return PreservationCheck(
        residual=residual,
        tolerance=PRESERVATION_TOL * (1 + float(np.linalg.norm(full.R))),
        exact_reduction=_is_exact(model, reduced),
        original_rank=full.rank,
        reduced_rank=own.rank,
        n=model.n,
        r=reduced.r,
        residual_kind="residual_controllability",
    )


def check_observability_preservation(model, reduced, x, max_level=None, size_cap=SIZE_CAP,
                                     rank_tol=RANK_TOL):
    """Residual ||O_red(V^T x) - O(x) V||_F for a symmetric dynamic tensor."""
    if not is_symmetric(model.A, SYMMETRY_TOL):
        raise NotSymmetricError("observability preservation needs a symmetric dynamic tensor")
    if model.C is None or reduced.model.C is None:
        raise InputError("observability needs an output matrix C")
    V = reduced.V
    z = project_state(V, x)

    full = observability_matrix(model.A, model.C, x, max_level=max_level,
                                size_cap=size_cap, rank_tol=rank_tol)
    red = observability_matrix(reduced.model.A, reduced.model.C, z,
                               max_level=full.levels_used, size_cap=size_cap,
                               rank_tol=rank_tol, early_stop=False)
    residual = float(np.linalg.norm(red.O - full.O @ V))
    return PreservationCheck(
        residual=residual,
        tolerance=PRESERVATION_TOL * (1 + float(np.linalg.norm(full.O))),
        exact_reduction=_is_exact(model, reduced),
        original_rank=full.rank,
        reduced_rank=red.rank,
        n=model.n,
        r=reduced.r,
        residual_kind="residual_observability",
    )


@dataclass(frozen=True, eq=False)
class StabilityPreservation:
    original: StabilityVerdict
    reduced: StabilityVerdict
    z0: np.ndarray

    @property
    def consistent(self):
        """Stable or asymptotically stable maps to asymptotically stable; unstable to unstable."""
        if self.original.classification is Stability.UNSTABLE:
            return self.reduced.classification is Stability.UNSTABLE
        return self.reduced.classification is Stability.ASYMPTOTICALLY_STABLE

    def to_dict(self):
        return {
            "original": self.original.to_dict(),
            "reduced": self.reduced.to_dict(),
            "z0": self.z0.tolist(),
            "consistent": self.consistent,
        }


def check_stability_preservation(model, reduced, x0, tol=None):
    z0 = project_state(reduced.V, x0)
    return StabilityPreservation(
        original=stability_classify(model.A, x0, tol),
        reduced=stability_classify(reduced.model.A, z0, tol),
        z0=z0,
    )


@dataclass(frozen=True)
class OdecoPreservation:
    original_lambdas: list
    reduced_lambdas: list
    max_lambda_error: float
    reduced_off_diagonal_mass: float
    unique_equilibrium: bool
    consistent: bool


def check_odeco_preservation(model, reduced, tol=None):
    """Reduced tensor is odeco, keeps the nonzero Z-eigenvalues, and has a unique equilibrium."""
    tol = TOL if tol is None else tol
    full = odeco_decompose(model.A, tol)
    red = odeco_decompose(reduced.model.A, tol)
    scale = float(np.max(np.abs(full.lambdas)))
    kept = np.sort(full.lambdas[np.abs(full.lambdas) > tol * scale])
    red_lambdas = np.sort(red.lambdas)
    if model.k % 2:
        # (lam, u) and (-lam, -u) are the same term for odd k
        kept, red_lambdas = np.sort(np.abs(kept)), np.sort(np.abs(red_lambdas))
    if kept.size == red_lambdas.size:
        error = float(np.max(np.abs(kept - red_lambdas))) if kept.size else 0.0
    else:
        error = float("inf")
    unique = bool(np.all(np.abs(red.lambdas) > tol * scale))
    return OdecoPreservation(
        original_lambdas=kept.tolist(),
        reduced_lambdas=red_lambdas.tolist(),
        max_lambda_error=error,
        reduced_off_diagonal_mass=red.off_diagonal_mass,
        unique_equilibrium=unique,
        consistent=error <= PRESERVATION_TOL * (1 + scale)
        and red.off_diagonal_mass <= tol
        and unique,
    )
