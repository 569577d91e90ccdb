"""
Dense multilinear algebra on numpy arrays.

A tensor is an ``np.ndarray`` with one axis per mode. Modes are 0-based
axis indices. Flat storage (model files, ``to_flat``/``from_flat``) is
first-index-fastest, so the mode-0 unfolding is a plain Fortran reshape and
unfolding columns are ordered colexicographically over the remaining modes.
"""

import functools
import itertools
import math

import numpy as np

from .config import SYMMETRY_TOL
from .errors import InputError


def as_tensor(data):
    """Validate and return ``data`` as a float64 tensor."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 1:
        raise InputError("tensor must have at least one mode")
    if any(n < 1 for n in arr.shape):
        raise InputError(f"tensor dimensions must be positive, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("tensor entries must be finite")
    return arr


def from_flat(dims, flat):
    """Build a tensor from first-index-fastest flat data."""
    try:
        dims = tuple(int(n) for n in dims)
        flat = np.asarray(flat, dtype=float)
    except (TypeError, ValueError) as err:
        raise InputError(f"tensor dims and data must be numeric lists: {err}") from err
    if flat.ndim != 1 or flat.size != math.prod(dims):
        raise InputError(
            f"flat data of length {flat.size} does not match dims {list(dims)}"
        )
    return as_tensor(np.reshape(flat, dims, order="F"))


def to_flat(A):
    return np.ravel(A, order="F")


def _check_mode(A, p):
    if not 0 <= p < A.ndim:
        raise InputError(f"mode {p} out of range for a tensor of order {A.ndim}")


def is_cubical(A):
    return A.ndim >= 1 and len(set(A.shape)) == 1


def require_cubical(A):
    if not is_cubical(A):
        raise InputError(f"expected a cubical tensor, got dims {list(A.shape)}")
    return A.shape[0]


def unfold(A, p):
    """Mode-p unfolding: n_p x prod(other dims), columns are p-mode fibers."""
    _check_mode(A, p)
    return np.reshape(np.moveaxis(A, p, 0), (A.shape[p], -1), order="F")


def fold(M, p, dims):
    """Inverse of ``unfold``."""
    dims = tuple(int(n) for n in dims)
    if not 0 <= p < len(dims):
        raise InputError(f"mode {p} out of range for dims {list(dims)}")
    rest = dims[:p] + dims[p + 1:]
    M = np.asarray(M, dtype=float)
    if M.shape != (dims[p], math.prod(rest)):
        raise InputError(
            f"matrix of shape {M.shape} cannot be folded into dims {list(dims)} along mode {p}"
        )
    arr = np.reshape(M, (dims[p],) + rest, order="F")
    return np.moveaxis(arr, 0, p)


def mode_mul_matrix(A, p, M):
    """p-mode product A x_p M; mode p changes size from n_p to rows(M)."""
    _check_mode(A, p)
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] != A.shape[p]:
        raise InputError(
            f"matrix with shape {M.shape} cannot multiply mode {p} of size {A.shape[p]}"
        )
    return np.moveaxis(np.tensordot(M, A, axes=(1, p)), 0, p)


def mode_mul_vector(A, p, v):
    """p-mode product with a vector; the result has one mode fewer."""
    _check_mode(A, p)
    v = np.asarray(v, dtype=float)
    if v.shape != (A.shape[p],):
        raise InputError(
            f"vector of length {v.size} cannot multiply mode {p} of size {A.shape[p]}"
        )
    return np.tensordot(A, v, axes=(p, 0))


def tucker_product(core, factors):
    """core x_0 U_0 x_1 U_1 ... over all modes."""
    result = core
    for p, U in enumerate(factors):
        result = mode_mul_matrix(result, p, U)
    return result


def contract_first_modes(A, vectors):
    """A x_0 v_0 x_1 v_1 ... over the first len(vectors) modes."""
    if len(vectors) >= A.ndim:
        raise InputError("contraction must leave at least one mode free")
    result = A
    for p, v in enumerate(vectors):
        v = np.asarray(v, dtype=float)
        if v.shape != (A.shape[p],):
            raise InputError(f"vector {p} has length {v.size}, mode has size {A.shape[p]}")
        result = np.tensordot(v, result, axes=(0, 0))
    return result


def contract_state(A, x):
    """The HPDS vector field term A x^{k-1} (contract all but the last mode)."""
    if A.ndim < 2:
        raise InputError("contract_state needs a tensor of order k >= 2")
    n = require_cubical(A)
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise InputError(f"state has length {x.size}, tensor dimension is {n}")
    return contract_first_modes(A, [x] * (A.ndim - 1))


def outer(vectors):
    if not vectors:
        raise InputError("outer product of an empty list")
    return functools.reduce(np.multiply.outer, [np.asarray(v, dtype=float) for v in vectors])


def kron(M, N):
    return np.kron(M, N)


def kron_power(v, q):
    """Kronecker power v^[q] = v (x) v^[q-1], with v^[0] = 1."""
    if q < 0:
        raise InputError("Kronecker power must be nonnegative")
    v = np.asarray(v, dtype=float)
    result = np.ones(1) if v.ndim == 1 else np.eye(1)
    for _ in range(q):
        result = np.kron(v, result)
    return result


def _max_permutation_deviation(A, axes):
    fixed = tuple(range(len(axes), A.ndim))
    deviation = 0.0
    for perm in itertools.permutations(axes):
        if perm == tuple(axes):
            continue
        deviation = max(deviation, float(np.max(np.abs(A - np.transpose(A, perm + fixed)))))
    return deviation


def is_symmetric(A, tol=SYMMETRY_TOL):
    """Invariant under every permutation of all indices."""
    require_cubical(A)
    return _max_permutation_deviation(A, tuple(range(A.ndim))) <= tol


def is_almost_symmetric(A, tol=SYMMETRY_TOL):
    """Invariant under every permutation of the first k-1 indices."""
    require_cubical(A)
    return _max_permutation_deviation(A, tuple(range(A.ndim - 1))) <= tol


def _average_over_permutations(A, axes):
    fixed = tuple(range(len(axes), A.ndim))
    perms = list(itertools.permutations(axes))
    total = np.zeros_like(A)
    for perm in perms:
        total += np.transpose(A, perm + fixed)
    return total / len(perms)


def symmetrize_first_modes(A):
    """Average over permutations of the first k-1 indices.

    The result is almost symmetric and defines the same vector field A x^{k-1}.
    """
    require_cubical(A)
    return _average_over_permutations(A, tuple(range(A.ndim - 1)))


def symmetrize(A):
    require_cubical(A)
    return _average_over_permutations(A, tuple(range(A.ndim)))


def frobenius_norm(A):
    return float(np.linalg.norm(np.ravel(A)))


def slice_norms(A, p):
    """||A_{j_p = alpha}|| for every alpha along mode p."""
    return np.linalg.norm(unfold(A, p), axis=1)
