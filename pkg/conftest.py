import numpy as np
import pytest

from src.generators import example1, random_orthogonal
from src.hpds import InputOutputHPDS
from src.tensor_core import mode_mul_matrix, symmetrize, symmetrize_first_modes, tucker_product


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def example1_model():
    return example1()


def exact_low_rank_system(rng, n, r, k, m=0, l=0, symmetric=True):
    """HPDS whose first k-1 modes live exactly in an r-dimensional subspace.

    Symmetric systems use one factor for every mode; otherwise the last mode
    gets an independent r-dimensional factor.
    """
    V = random_orthogonal(n, rng)[:, :r]
    if symmetric:
        core = symmetrize(rng.standard_normal((r,) * k))
        A = tucker_product(core, [V] * k)
        A = symmetrize(A)
    else:
        core = symmetrize_first_modes(rng.standard_normal((r,) * k))
        W = random_orthogonal(n, rng)[:, :r]
        A = mode_mul_matrix(tucker_product(core, [V] * (k - 1) + [np.eye(r)]), k - 1, W)
        A = symmetrize_first_modes(A)
    B = rng.standard_normal((n, m)) if m else None
    C = rng.standard_normal((l, n)) if l else None
    return InputOutputHPDS(A=A, B=B, C=C), V


@pytest.fixture
def make_exact_system():
    return exact_low_rank_system


def odeco_closed_form(lambdas, U, x0, k, t):
    """x(t) for x' = A x^{k-1} with A = sum_j lambdas[j] U[:, j]^{ok}, while no component blows up."""
    alphas = U.T @ np.asarray(x0, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    with np.errstate(divide="ignore"):
        base = 1.0 - (k - 2) * lambdas * alphas ** (k - 2) * t
        coeffs = alphas * base ** (-1.0 / (k - 2))
    coeffs = np.where(alphas == 0, 0.0, coeffs)
    return coeffs @ U.T


@pytest.fixture
def closed_form():
    return odeco_closed_form
