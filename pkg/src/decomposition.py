"""
HOSVD (full, compact, shared-factor), Z-eigenpairs and orthogonal
decomposition of symmetric tensors.
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np
from joblib import Parallel, delayed
from scipy.linalg import eigh, null_space, svd, svdvals

from .config import SYMMETRY_TOL, THREADS, TOL
from .errors import (
    InputError,
    NotAlmostSymmetricError,
    NotOdecoError,
    NotSymmetricError,
    NumericalError,
)
from .tensor_core import (
    contract_state,
    frobenius_norm,
    is_almost_symmetric,
    is_symmetric,
    mode_mul_matrix,
    require_cubical,
    tucker_product,
    unfold,
)

logger = logging.getLogger(__name__)

# relative gap under which two singular values count as equal
DEGENERACY_TOL = 1e-12
DUPLICATE_LAMBDA_TOL = 1e-6
DUPLICATE_VECTOR_TOL = 1e-5


@dataclass(frozen=True, eq=False)
class HosvdFactors:
    core: np.ndarray
    factors: List[np.ndarray]
    mode_singular_values: List[np.ndarray]
    residual: float = 0.0

    @property
    def ranks(self):
        return tuple(U.shape[1] for U in self.factors)

    def reconstruct(self):
        return tucker_product(self.core, self.factors)


@dataclass(frozen=True, eq=False)
class SharedCompactHosvd:
    """A = core_red x_0 V ... x_{k-2} V x_{k-1} V_k."""

    core_red: np.ndarray
    V: np.ndarray
    V_k: np.ndarray
    sigma: np.ndarray
    sigma_k: np.ndarray
    residual: float

    @property
    def r(self):
        return self.V.shape[1]

    @property
    def r_k(self):
        return self.V_k.shape[1]

    def reconstruct(self):
        k = self.core_red.ndim
        return tucker_product(self.core_red, [self.V] * (k - 1) + [self.V_k])


@dataclass(frozen=True, eq=False)
class ZEigenpair:
    lam: float
    u: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class OdecoDecomposition:
    """A = sum_j lambdas[j] * U[:, j] outer ... outer U[:, j]."""

    lambdas: np.ndarray
    U: np.ndarray
    off_diagonal_mass: float
    rank: int
    order: int

    def reconstruct(self):
        n = self.U.shape[0]
        k = self.order
        core = np.zeros((n,) * k)
        for j, lam in enumerate(self.lambdas):
            core[(j,) * k] = lam
        return tucker_product(core, [self.U] * k)


def _fix_signs(U):
    """Flip each column so its largest-magnitude entry is positive."""
    U = U.copy()
    for j in range(U.shape[1]):
        idx = int(np.argmax(np.abs(U[:, j])))
        if U[idx, j] < 0:
            U[:, j] = -U[:, j]
    return U


def _order_degenerate(U, s):
    """Sort columns lexicographically inside each group of equal singular values."""
    if U.shape[1] < 2:
        return U
    scale = max(float(s[0]) if s.size else 0.0, np.finfo(float).tiny)
    order = []
    start = 0
    for j in range(1, U.shape[1] + 1):
        if j == U.shape[1] or abs(s[j] - s[start]) > DEGENERACY_TOL * scale:
            group = list(range(start, j))
            group.sort(key=lambda c: tuple(-np.round(U[:, c], 12)))
            order.extend(group)
            start = j
    return U[:, order]


def left_singular_vectors(M):
    """Left singular vectors (all n_p of them) and padded singular values."""
    M = np.asarray(M, dtype=float)
    try:
        U, s, _ = svd(M, full_matrices=M.shape[0] > M.shape[1])
    except np.linalg.LinAlgError as err:
        raise NumericalError(f"SVD failed: {err}") from err
    s = np.concatenate([s, np.zeros(M.shape[0] - s.size)])
    U = _order_degenerate(_fix_signs(U), s)
    return U, s


def mode_singular_values(A, p):
    s = svdvals(unfold(A, p))
    return np.concatenate([s, np.zeros(A.shape[p] - s.size)])


def rank_from_tol(s, tol):
    """Number of singular values above tol * sigma_max (at least one)."""
    if s.size == 0 or s[0] == 0:
        return 1
    return max(1, int(np.sum(s > tol * s[0])))


def _require_nonzero(A):
    if frobenius_norm(A) == 0:
        raise InputError("HOSVD of the zero tensor is undefined")


def _relative_residual(A, approx):
    return frobenius_norm(A - approx) / frobenius_norm(A)


def hosvd(A):
    """Full HOSVD: A = S x_0 U_0 ... x_{k-1} U_{k-1} with orthogonal U_p."""
    A = np.asarray(A, dtype=float)
    _require_nonzero(A)
    factors, sigmas = [], []
    for p in range(A.ndim):
        U, s = left_singular_vectors(unfold(A, p))
        factors.append(U)
        sigmas.append(s)
    core = tucker_product(A, [U.T for U in factors])
    residual = _relative_residual(A, tucker_product(core, factors))
    return HosvdFactors(core=core, factors=factors, mode_singular_values=sigmas, residual=residual)


def compact_hosvd(A, tol=None, ranks=None):
    """Truncated HOSVD keeping sigma > tol * sigma_max per mode, or fixed ranks."""
    A = np.asarray(A, dtype=float)
    _require_nonzero(A)
    if tol is not None and ranks is not None:
        raise InputError("give either tol or ranks, not both")
    if ranks is None:
        tol = TOL if tol is None else tol
        if tol < 0:
            raise InputError("tol must be nonnegative")
    elif len(ranks) != A.ndim:
        raise InputError(f"expected {A.ndim} ranks, got {len(ranks)}")

    factors, sigmas = [], []
    for p in range(A.ndim):
        U, s = left_singular_vectors(unfold(A, p))
        if ranks is None:
            r = rank_from_tol(s, tol)
        else:
            r = int(ranks[p])
            if not 1 <= r <= A.shape[p]:
                raise InputError(f"rank {r} for mode {p} must lie in [1, {A.shape[p]}]")
        factors.append(U[:, :r])
        sigmas.append(s)
    core = tucker_product(A, [V.T for V in factors])
    residual = _relative_residual(A, tucker_product(core, factors))
    logger.debug("compact HOSVD ranks %s, residual %.3e", [V.shape[1] for V in factors], residual)
    return HosvdFactors(core=core, factors=factors, mode_singular_values=sigmas, residual=residual)


def shared_factor_compact_hosvd(A, tol=None, rank=None, symmetry_tol=SYMMETRY_TOL):
    """Compact HOSVD of an almost symmetric tensor with one factor V for modes 0..k-2.

    All of the first k-1 unfoldings coincide, so V comes from the mode-0
    unfolding alone. Mode k-1 gets its own V_k, which is V itself whenever
    the tensor is fully symmetric and the two subspaces agree.
    """
    A = np.asarray(A, dtype=float)
    n = require_cubical(A)
    _require_nonzero(A)
    if not is_almost_symmetric(A, symmetry_tol):
        raise NotAlmostSymmetricError(
            "compact HOSVD with a shared factor needs an almost symmetric tensor"
        )
    k = A.ndim
    rank_tol = TOL if tol is None else tol

    U, sigma = left_singular_vectors(unfold(A, 0))
    if rank is None:
        r = rank_from_tol(sigma, rank_tol)
    else:
        r = int(rank)
        if not 1 <= r <= n:
            raise InputError(f"rank {r} must lie in [1, {n}]")
    V = U[:, :r]

    U_k, sigma_k = left_singular_vectors(unfold(A, k - 1))
    r_k = rank_from_tol(sigma_k, rank_tol)
    symmetric = is_symmetric(A, symmetry_tol)
    if symmetric:
        r_k = min(r_k, r)
    V_k = U_k[:, :r_k]
    if symmetric and r_k == r:
        gap = np.linalg.norm(V_k @ V_k.T - V @ V.T)
        if gap <= max(rank_tol, symmetry_tol):
            V_k = V

    core_red = A
    for p in range(k - 1):
        core_red = mode_mul_matrix(core_red, p, V.T)
    core_red = mode_mul_matrix(core_red, k - 1, V_k.T)
    residual = _relative_residual(A, tucker_product(core_red, [V] * (k - 1) + [V_k]))
    logger.debug("shared compact HOSVD: r=%d, r_k=%d, residual %.3e", r, r_k, residual)
    return SharedCompactHosvd(
        core_red=core_red, V=V, V_k=V_k, sigma=sigma, sigma_k=sigma_k, residual=residual
    )


def _sshopm(A, x, alpha, max_iter, tol):
    """Shifted symmetric higher-order power method from one start.

    alpha > 0 climbs to local maxima of A x^k on the sphere, alpha < 0
    descends to local minima.
    """
    x = x / np.linalg.norm(x)
    lam, residual = 0.0, np.inf
    for _ in range(max_iter):
        g = contract_state(A, x)
        lam = float(g @ x)
        residual = float(np.linalg.norm(g - lam * x))
        if residual <= tol:
            return lam, x, residual, True
        y = g + alpha * x
        if alpha < 0:
            y = -y
        norm = np.linalg.norm(y)
        if norm == 0:
            break
        x = y / norm
    return lam, x, residual, False


def _canonical_sign(u, k):
    # flipping u flips lambda for odd k, so only even orders are normalised
    if k % 2 == 0:
        idx = int(np.argmax(np.abs(u)))
        if u[idx] < 0:
            return -u
    return u


def z_eigenpairs(A, starts=32, max_iter=5000, tol=1e-10, shift=None, seed=0, n_jobs=None):
    """Z-eigenpairs A u^{k-1} = lam u, ||u|| = 1, by multi-start SS-HOPM.

    Each seeded start is run once with a positive and once with a negative
    shift. Results are merged in start order; the search is best effort and
    not exhaustive.
    """
    A = np.asarray(A, dtype=float)
    n = require_cubical(A)
    k = A.ndim
    if k < 3:
        raise InputError("Z-eigenpair search needs a tensor of order k >= 3")
    if not is_symmetric(A, SYMMETRY_TOL):
        raise NotSymmetricError("Z-eigenpairs are defined here for symmetric tensors only")
    if frobenius_norm(A) == 0:
        return []

    alpha = abs(shift) if shift is not None else (k - 1) * frobenius_norm(A)
    rng = np.random.default_rng(seed)
    x0s = rng.standard_normal((starts, n))
    jobs = [(x0, s) for x0 in x0s for s in (alpha, -alpha)]

    results = Parallel(n_jobs=n_jobs if n_jobs is not None else THREADS, prefer="threads")(
        delayed(_sshopm)(A, x0, s, max_iter, tol) for x0, s in jobs
    )

    pairs = []
    for lam, u, residual, converged in results:
        if not converged:
            continue
        u = _canonical_sign(u, k)
        duplicate = any(
            abs(lam - p.lam) <= DUPLICATE_LAMBDA_TOL
            and min(np.linalg.norm(u - p.u), np.linalg.norm(u + p.u)) <= DUPLICATE_VECTOR_TOL
            for p in pairs
        )
        if not duplicate:
            pairs.append(ZEigenpair(lam=lam, u=u, residual=residual))

    failed = sum(1 for *_, converged in results if not converged)
    if failed:
        logger.warning("%d of %d SS-HOPM runs hit max_iter=%d", failed, len(results), max_iter)
    if not pairs:
        logger.warning("no Z-eigenpair converged to tol=%.1e", tol)
    return pairs


def _diagonal_core(A, V):
    k = A.ndim
    core = tucker_product(A, [V.T] * k)
    diag = np.array([core[(j,) * k] for j in range(V.shape[1])])
    return core, diag


def _reconstruction_mass(A, V, diag):
    k = A.ndim
    core = np.zeros((V.shape[1],) * k)
    for j, lam in enumerate(diag):
        core[(j,) * k] = lam
    return _relative_residual(A, tucker_product(core, [V] * k))


def _rotate_within_subspace(A, V):
    """Resolve equal-magnitude clusters via the eigenvectors of V^T (A w^{k-2}) V."""
    n = A.shape[0]
    w = np.random.default_rng(0).standard_normal(n)
    w /= np.linalg.norm(w)
    M = A
    for _ in range(A.ndim - 2):
        M = np.tensordot(M, w, axes=(M.ndim - 1, 0))
    _, Q = eigh(V.T @ M @ V)
    return _fix_signs(V @ Q)


def odeco_decompose(A, tol=None):
    """Orthogonal decomposition A = sum_j lam_j u_j^{ok} of a symmetric tensor.

    The lam_j are Z-eigenvalues of A with eigenvectors u_j. Columns beyond the
    retained rank complete U to an orthogonal basis and carry lam = 0.
    """
    A = np.asarray(A, dtype=float)
    n = require_cubical(A)
    k = A.ndim
    tol = TOL if tol is None else tol
    if not is_symmetric(A, SYMMETRY_TOL):
        raise NotSymmetricError("odeco decomposition needs a symmetric tensor")
    if frobenius_norm(A) == 0:
        return OdecoDecomposition(
            lambdas=np.zeros(n), U=np.eye(n), off_diagonal_mass=0.0, rank=0, order=k
        )

    V = shared_factor_compact_hosvd(A, tol=tol).V
    _, diag = _diagonal_core(A, V)
    mass = _reconstruction_mass(A, V, diag)
    if mass > tol and V.shape[1] > 1:
        logger.debug("HOSVD core not diagonal (mass %.3e), rotating inside the subspace", mass)
        V = _rotate_within_subspace(A, V)
        _, diag = _diagonal_core(A, V)
        order = np.argsort(-np.abs(diag), kind="stable")
        V, diag = V[:, order], diag[order]
        mass = _reconstruction_mass(A, V, diag)
    if mass > tol:
        raise NotOdecoError(mass, tol)

    r = V.shape[1]
    U = V
    if r < n:
        U = np.hstack([V, _fix_signs(null_space(V.T))])
    lambdas = np.concatenate([diag, np.zeros(n - r)])
    return OdecoDecomposition(lambdas=lambdas, U=U, off_diagonal_mass=mass, rank=r, order=k)


def is_odeco(A, tol=None):
    try:
        odeco_decompose(A, tol)
    except (NotOdecoError, NotSymmetricError):
        return False
    return True
