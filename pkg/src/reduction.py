"""
HOSVD-based model reduction of input-output HPDSs.

The first k-1 modes of A share one factor V; the latent state is z = V^T x
and the reduced system is

    A_red = S_red x_k (V^T V_k),   B_red = V^T B,   C_red = C V.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import TOL
from .decomposition import SharedCompactHosvd, shared_factor_compact_hosvd
from .errors import InputError
from .hpds import InputOutputHPDS, param_count
from .tensor_core import frobenius_norm, mode_mul_matrix, symmetrize_first_modes

logger = logging.getLogger(__name__)

EXACT_RESIDUAL = 1e-10
NONZERO_REL = 1e-12


@dataclass(frozen=True)
class ReductionReport:
    r: int
    r_k: int
    criterion: dict
    sigma_retained: list
    sigma_discarded: list
    sigma_k_retained: list
    sigma_k_discarded: list
    residual: float
    exact: bool
    param_count_before: int
    param_count_after: int
    nonzero_params_after: int

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ReducedModel:
    model: InputOutputHPDS
    V: np.ndarray
    decomposition: SharedCompactHosvd = field(repr=False, default=None)

    @property
    def r(self):
        return self.V.shape[1]


def _count_nonzero(*arrays):
    arrays = [a for a in arrays if a is not None]
    scale = max(float(np.max(np.abs(a))) for a in arrays)
    if scale == 0:
        return 0
    return int(sum(np.sum(np.abs(a) > NONZERO_REL * scale) for a in arrays))


def reduce(model, tol=None, rank=None):
    """Reduce ``model`` by compact HOSVD; returns (ReducedModel, ReductionReport).

    With ``rank`` the first k-1 modes keep exactly that many columns and mode
    k-1 keeps what the tolerance rule allows. Without it, every mode uses the
    tolerance rule.
    """
    if tol is not None and rank is not None:
        raise InputError("give either a tolerance or a rank, not both")
    if rank is not None and not 1 <= rank <= model.n:
        raise InputError(f"rank {rank} must lie in [1, {model.n}]")
    if rank is None:
        tol = TOL if tol is None else tol
        if tol < 0:
            raise InputError("tolerance must be nonnegative")
        criterion = {"tol": tol}
    else:
        criterion = {"rank": int(rank)}

    k = model.k
    h = shared_factor_compact_hosvd(model.A, tol=tol, rank=rank)
    V = h.V

    A_red = symmetrize_first_modes(mode_mul_matrix(h.core_red, k - 1, V.T @ h.V_k))
    B_red = V.T @ model.B if model.B is not None else None
    C_red = model.C @ V if model.C is not None else None
    metadata = dict(model.metadata, reduced_from=model.n)
    reduced = InputOutputHPDS(A=A_red, B=B_red, C=C_red, metadata=metadata)

    r, r_k = h.r, h.r_k
    report = ReductionReport(
        r=r,
        r_k=r_k,
        criterion=criterion,
        sigma_retained=h.sigma[:r].tolist(),
        sigma_discarded=h.sigma[r:].tolist(),
        sigma_k_retained=h.sigma_k[:r_k].tolist(),
        sigma_k_discarded=h.sigma_k[r_k:].tolist(),
        residual=h.residual,
        exact=h.residual <= EXACT_RESIDUAL,
        param_count_before=param_count(model.n, k, model.m, model.l),
        param_count_after=param_count(r, k, model.m, model.l),
        nonzero_params_after=_count_nonzero(A_red, B_red, C_red),
    )
    logger.info(
        "reduced n=%d -> r=%d (r_k=%d), residual %.3e, parameters %d -> %d",
        model.n, r, r_k, h.residual, report.param_count_before, report.param_count_after,
    )
    return ReducedModel(model=reduced, V=V, decomposition=h), report


def project_state(V, x):
    """z = V^T x."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != V.shape[0]:
        raise InputError(f"state has length {x.shape[-1]}, projection expects {V.shape[0]}")
    return x @ V


def lift_state(V, z):
    """x = V z."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != V.shape[1]:
        raise InputError(f"latent state has length {z.shape[-1]}, projection expects {V.shape[1]}")
    return z @ V.T


def projection_residual(model, reduced):
    """Relative exactness of a reduction given only V and the reduced tensor.

    The larger of ||A x_{0..k-2} VV^T - A|| / ||A|| and
    ||A_red - A x_all V^T|| / ||A||. Both vanish for an exact reduction, and
    neither needs the decomposition, so models read from files can be
    checked.
    """
    A, V = model.A, reduced.V
    if V.shape[0] != model.n or reduced.model.k != model.k:
        raise InputError("reduced model does not belong to this model")
    k = model.k
    P = V @ V.T
    projected = A
    compressed = A
    for p in range(k - 1):
        projected = mode_mul_matrix(projected, p, P)
        compressed = mode_mul_matrix(compressed, p, V.T)
    compressed = mode_mul_matrix(compressed, k - 1, V.T)
    scale = frobenius_norm(A)
    return max(
        frobenius_norm(projected - A) / scale,
        frobenius_norm(reduced.model.A - compressed) / scale,
    )


def reduction_residual(model, reduced):
    """||A - S_red x V ... x V_k||_F / ||A||_F for the decomposition behind ``reduced``."""
    h = reduced.decomposition
    if h is None:
        raise InputError("reduced model carries no decomposition")
    if h.V.shape[0] != model.n or h.core_red.ndim != model.k:
        raise InputError("reduced model does not belong to this model")
    return frobenius_norm(model.A - h.reconstruct()) / frobenius_norm(model.A)
