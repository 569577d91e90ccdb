"""
Input-output homogeneous polynomial dynamical systems

    x' = A x^{k-1} + B u,   y = C x

with A an almost symmetric order-k tensor. B and C are optional so that
autonomous and output-only systems share one type.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .config import DIVERGENCE_BOUND, DT, SYMMETRY_TOL
from .errors import InputError, NotAlmostSymmetricError, NumericalError
from .tensor_core import (
    as_tensor,
    contract_first_modes,
    contract_state,
    is_almost_symmetric,
    require_cubical,
    symmetrize_first_modes,
)

logger = logging.getLogger(__name__)


def _as_matrix(M, name, rows=None, cols=None):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InputError(f"{name} must be a matrix, got shape {M.shape}")
    if (rows is not None and M.shape[0] != rows) or (cols is not None and M.shape[1] != cols):
        raise InputError(f"{name} has shape {M.shape}, expected ({rows}, {cols})")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} entries must be finite")
    return M


def _as_vector(v, name, length):
    v = np.asarray(v, dtype=float)
    if v.shape != (length,):
        raise InputError(f"{name} must have length {length}, got shape {v.shape}")
    return v


@dataclass(frozen=True, eq=False)
class InputOutputHPDS:
    A: np.ndarray
    B: Optional[np.ndarray] = None
    C: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        A = as_tensor(self.A)
        if A.ndim < 2:
            raise InputError("dynamic tensor must have order k >= 2")
        n = require_cubical(A)
        if not is_almost_symmetric(A, SYMMETRY_TOL):
            raise NotAlmostSymmetricError(
                "dynamic tensor must be almost symmetric (invariant under permutations "
                "of its first k-1 indices); use symmetrize_first_modes on raw coefficients"
            )
        object.__setattr__(self, "A", A)
        if self.B is not None:
            object.__setattr__(self, "B", _as_matrix(self.B, "B", rows=n))
        if self.C is not None:
            object.__setattr__(self, "C", _as_matrix(self.C, "C", cols=n))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def k(self):
        return self.A.ndim

    @property
    def m(self):
        return 0 if self.B is None else self.B.shape[1]

    @property
    def l(self):
        return 0 if self.C is None else self.C.shape[0]


@dataclass(frozen=True, eq=False)
class PolynomialSystem:
    """x' = sum over terms of T_d x^d, T_d an order d+1 tensor (last mode is the output)."""

    n: int
    terms: List[Tuple[int, np.ndarray]]

    def __post_init__(self):
        canonical = []
        for degree, coeffs in self.terms:
            coeffs = np.asarray(coeffs, dtype=float)
            if degree < 0 or coeffs.shape != (self.n,) * (degree + 1):
                raise InputError(
                    f"degree-{degree} term needs a coefficient tensor of shape "
                    f"{(self.n,) * (degree + 1)}, got {coeffs.shape}"
                )
            if degree >= 2:
                coeffs = symmetrize_first_modes(coeffs)
            canonical.append((int(degree), coeffs))
        object.__setattr__(self, "terms", canonical)

    @property
    def degree(self):
        return max((d for d, _ in self.terms), default=0)

    def evaluate(self, x):
        x = _as_vector(x, "state", self.n)
        total = np.zeros(self.n)
        for degree, coeffs in self.terms:
            total += contract_first_modes(coeffs, [x] * degree) if degree else coeffs
        return total


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    outputs: Optional[np.ndarray] = None
    diverged_at: Optional[float] = None

    @property
    def final_state(self):
        return self.states[-1]

    def norms(self):
        return np.linalg.norm(self.states, axis=1)


class ControlSignal:
    """u(t) of dimension m: zero, constant, piecewise constant, or any callable."""

    def __init__(self, m, fn: Callable[[float], np.ndarray]):
        self.m = m
        self._fn = fn

    @classmethod
    def zero(cls, m):
        value = np.zeros(m)
        return cls(m, lambda t: value)

    @classmethod
    def constant(cls, u0):
        value = np.asarray(u0, dtype=float).ravel()
        return cls(value.size, lambda t: value)

    @classmethod
    def piecewise(cls, times, values):
        """u(t) = values[i] on [times[i], times[i+1]); values[0] before times[0]."""
        times = np.asarray(times, dtype=float)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if times.ndim != 1 or values.shape[0] != times.size:
            raise InputError("piecewise control needs one value row per breakpoint")
        if np.any(np.diff(times) <= 0):
            raise InputError("piecewise control breakpoints must be strictly increasing")

        def fn(t):
            idx = max(int(np.searchsorted(times, t, side="right")) - 1, 0)
            return values[idx]

        return cls(values.shape[1], fn)

    @classmethod
    def from_function(cls, fn, m):
        return cls(m, lambda t: np.asarray(fn(t), dtype=float))

    def __call__(self, t):
        u = self._fn(t)
        if u.shape != (self.m,):
            raise InputError(f"control returned shape {u.shape}, expected ({self.m},)")
        return u


def vector_field(model, x, u=None):
    """A x^{k-1} + B u; the input term is dropped when B or u is absent."""
    x = _as_vector(x, "state", model.n)
    dx = contract_state(model.A, x)
    if model.B is not None and u is not None:
        dx = dx + model.B @ _as_vector(u, "input", model.m)
    return dx


def output(model, x):
    if model.C is None:
        raise InputError("model has no output matrix C")
    return model.C @ _as_vector(x, "state", model.n)


def _time_grid(t_span, dt):
    t0, t1 = float(t_span[0]), float(t_span[1])
    if dt <= 0:
        raise InputError("dt must be positive")
    if not t1 > t0:
        raise InputError(f"t_span must satisfy t1 > t0, got ({t0}, {t1})")
    n_steps = int(np.floor((t1 - t0) / dt + 1e-9))
    times = t0 + dt * np.arange(n_steps + 1)
    if t1 - times[-1] > 1e-12 * max(1.0, abs(t1)):
        times = np.append(times, t1)
    return times


def _rk4_step(f, t, x, h):
    k1 = f(t, x)
    k2 = f(t + h / 2, x + h / 2 * k1)
    k3 = f(t + h / 2, x + h / 2 * k2)
    k4 = f(t + h, x + h * k3)
    return x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6


def _euler_step(f, t, x, h):
    return x + h * f(t, x)


STEPPERS = {"rk4": _rk4_step, "euler": _euler_step}


def simulate(model, x0, u=None, t_span=(0.0, 10.0), dt=DT, method="rk4",
             divergence_bound=DIVERGENCE_BOUND):
    """Fixed-step integration of the model from x0.

    Integration stops at the first state whose norm exceeds divergence_bound
    and records that time in ``diverged_at``; finite-time blow-up is an
    expected outcome for unstable systems. A vector field that turns
    non-finite at a state still inside the bound raises NumericalError.
    """
    if method not in STEPPERS:
        raise InputError(f"unknown integration method {method!r}; use one of {sorted(STEPPERS)}")
    step = STEPPERS[method]
    x = _as_vector(x0, "initial state", model.n)
    if not np.all(np.isfinite(x)):
        raise InputError("initial state must be finite")
    if u is not None and u.m != model.m:
        raise InputError(f"control has dimension {u.m}, model expects {model.m}")
    times = _time_grid(t_span, dt)

    A, B = model.A, model.B

    def f(t, state):
        dx = contract_state(A, state)
        if B is not None and u is not None:
            ut = u(t)
            if not np.all(np.isfinite(ut)):
                raise NumericalError(f"control is not finite at t={t:.6g}")
            dx = dx + B @ ut
        if not np.all(np.isfinite(dx)) and np.linalg.norm(state) <= divergence_bound:
            raise NumericalError(
                f"vector field is not finite at t={t:.6g} although |x| is within the divergence bound"
            )
        return dx

    states = np.empty((times.size, model.n))
    states[0] = x
    diverged_at = None
    last = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(times.size - 1):
            x = step(f, times[i], x, times[i + 1] - times[i])
            states[i + 1] = x
            last = i + 1
            # a non-finite step here means some stage already left the bound
            if not np.all(np.isfinite(x)) or not np.linalg.norm(x) <= divergence_bound:
                diverged_at = float(times[i + 1])
                logger.warning("trajectory diverged at t=%.6g (|x| > %.3g)", diverged_at, divergence_bound)
                break

    times, states = times[: last + 1], states[: last + 1]
    outputs = states @ model.C.T if model.C is not None else None
    return Trajectory(times=times, states=states, outputs=outputs, diverged_at=diverged_at)


def homogenize(psys, target_degree, B=None, C=None):
    """Lift a polynomial system to an HPDS of degree target_degree.

    An auxiliary state x_{n+1} with x_{n+1}' = 0 is appended and every
    degree-d term is multiplied by x_{n+1}^{target_degree - d}. On the plane
    x_{n+1} = 1 the first n components reproduce the original vector field.
    """
    if target_degree < 1:
        raise InputError("target degree must be at least 1")
    if psys.degree > target_degree:
        raise InputError(
            f"target degree {target_degree} is below the system degree {psys.degree}"
        )
    n, N, k = psys.n, psys.n + 1, target_degree + 1
    aux = np.zeros(N)
    aux[n] = 1.0

    A = np.zeros((N,) * k)
    for degree, coeffs in psys.terms:
        lifted = np.pad(coeffs, [(0, 1)] * coeffs.ndim)
        for _ in range(target_degree - degree):
            lifted = np.multiply.outer(lifted, aux)
        A += np.moveaxis(lifted, degree, -1)
    A = symmetrize_first_modes(A)

    if B is not None:
        B = np.vstack([_as_matrix(B, "B", rows=n), np.zeros((1, np.shape(B)[1]))])
    if C is not None:
        C = np.hstack([_as_matrix(C, "C", cols=n), np.zeros((np.shape(C)[0], 1))])
    return InputOutputHPDS(A=A, B=B, C=C, metadata={"homogenized_from": n})


def param_count(n, k, m=0, l=0):
    """n^k + n m + n l."""
    if min(n, k, m, l) < 0:
        raise InputError("parameter counts need nonnegative sizes")
    return n ** k + n * m + n * l
