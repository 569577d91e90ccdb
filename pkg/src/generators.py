"""
Seeded model generators. Every random draw goes through
``np.random.default_rng(seed)`` (PCG64) and the generator identity is
recorded in the model metadata.
"""

import numpy as np

from .errors import InputError
from .hpds import InputOutputHPDS
from .tensor_core import outer, symmetrize_first_modes

EXAMPLE1_LAMBDAS = np.array([-8.2880, -3.2248, -9.7615])

EXAMPLE1_V = np.array([
    [-0.1743, 0.0129, 0.7769],
    [-0.0115, -0.4458, 0.2735],
    [-0.0802, 0.0156, -0.5407],
    [-0.5370, -0.1316, -0.1081],
    [-0.4111, 0.8066, 0.0856],
    [0.7112, 0.3646, 0.1017],
])

EXAMPLE1_X0 = np.array([0.3341, 2.8115, -1.2861, -1.1378, -1.2017, -1.8510])

KINDS = ("odeco", "almost_symmetric", "example1", "example2")


def _metadata(name, seed, **extra):
    meta = {
        "name": name,
        "seed": seed,
        "generator": f"numpy.random.default_rng/PCG64 (numpy {np.__version__})",
    }
    meta.update(extra)
    return meta


def _require_seed(seed, kind):
    if seed is None:
        raise InputError(f"generator {kind!r} needs a seed")
    if int(seed) < 0:
        raise InputError("seed must be nonnegative")
    return int(seed)


def _check_sizes(n, k, m, l):
    if n < 1:
        raise InputError("dimension n must be at least 1")
    if k < 2:
        raise InputError("order k must be at least 2")
    if m < 0 or l < 0:
        raise InputError("input and output dimensions must be nonnegative")


def _io_matrices(rng, n, m, l):
    B = rng.standard_normal((n, m)) if m else None
    C = rng.standard_normal((l, n)) if l else None
    return B, C


def random_orthogonal(n, rng):
    """Orthonormalized Gaussian matrix with the sign of R's diagonal fixed."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def odeco_tensor(lambdas, U, k):
    """sum_j lambdas[j] * U[:, j]^{ok}."""
    A = np.zeros((U.shape[0],) * k)
    for lam, u in zip(lambdas, U.T):
        A += lam * outer([u] * k)
    return A


def odeco(n, k, r=None, seed=None, lam_range=(0.5, 3.0), negative=False, m=0, l=0):
    """Random odeco model with r nonzero lambdas, |lambda| drawn uniformly from lam_range.

    With ``negative`` every lambda is negative; otherwise signs are random.
    """
    seed = _require_seed(seed, "odeco")
    _check_sizes(n, k, m, l)
    r = n if r is None else r
    if not 1 <= r <= n:
        raise InputError(f"rank r={r} must lie in [1, {n}]")
    lo, hi = lam_range
    if not 0 < lo <= hi:
        raise InputError("lambda range must satisfy 0 < low <= high")

    rng = np.random.default_rng(seed)
    U = random_orthogonal(n, rng)
    magnitudes = rng.uniform(lo, hi, size=r)
    signs = -np.ones(r) if negative else rng.choice([-1.0, 1.0], size=r)
    lambdas = signs * magnitudes
    A = odeco_tensor(lambdas, U[:, :r], k)
    B, C = _io_matrices(rng, n, m, l)
    meta = _metadata("odeco", seed, rank=r, lambdas=lambdas.tolist())
    return InputOutputHPDS(A=A, B=B, C=C, metadata=meta)


def almost_symmetric(n, k, seed=None, m=0, l=0):
    """Gaussian entries averaged over permutations of the first k-1 indices."""
    seed = _require_seed(seed, "almost_symmetric")
    _check_sizes(n, k, m, l)
    rng = np.random.default_rng(seed)
    A = symmetrize_first_modes(rng.standard_normal((n,) * k))
    B, C = _io_matrices(rng, n, m, l)
    return InputOutputHPDS(A=A, B=B, C=C, metadata=_metadata("almost_symmetric", seed))


def example1_projection():
    """Nearest matrix with orthonormal columns to the printed 6 x 3 factor."""
    W, _, Zt = np.linalg.svd(EXAMPLE1_V, full_matrices=False)
    return W @ Zt


def example1():
    """6-dimensional fourth-order odeco system with three nonzero Z-eigenvalues."""
    A = odeco_tensor(EXAMPLE1_LAMBDAS, example1_projection(), 4)
    meta = {"name": "example1", "seed": None, "generator": "embedded constants"}
    return InputOutputHPDS(A=A, metadata=meta)


def example2(seed=None):
    """n=12, k=4 symmetrized Gaussian dynamics with a 12 x 5 Gaussian input matrix."""
    seed = _require_seed(seed, "example2")
    rng = np.random.default_rng(seed)
    A = symmetrize_first_modes(rng.standard_normal((12,) * 4))
    B = rng.standard_normal((12, 5))
    return InputOutputHPDS(A=A, B=B, metadata=_metadata("example2", seed))


def generate(kind, n=None, k=None, r=None, m=0, l=0, seed=None):
    if kind == "odeco":
        if n is None or k is None:
            raise InputError("odeco generator needs n and k")
        return odeco(n, k, r=r, seed=seed, m=m, l=l)
    elif kind == "almost_symmetric":
        if n is None or k is None:
            raise InputError("almost_symmetric generator needs n and k")
        return almost_symmetric(n, k, seed=seed, m=m, l=l)
    elif kind == "example1":
        return example1()
    elif kind == "example2":
        return example2(seed)
    else:
        raise InputError(f"unknown generator {kind!r}; use one of {', '.join(KINDS)}")
