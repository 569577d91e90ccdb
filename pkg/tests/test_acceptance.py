"""
End-to-end scenarios: the two worked examples, the preservation identities
on exact low-rank systems, and stability against simulation.
"""

import time

import numpy as np
import pytest

from src.analysis import (
    Stability,
    check_controllability_preservation,
    check_observability_preservation,
    controllability_matrix,
    stability_classify,
)
from src.decomposition import odeco_decompose
from src.generators import EXAMPLE1_LAMBDAS, EXAMPLE1_X0, example2, odeco_tensor, random_orthogonal
from src.hpds import InputOutputHPDS, simulate
from src.reduction import lift_state, project_state, reduce


def test_example1_reduction(example1_model):
    started = time.perf_counter()
    reduced, report = reduce(example1_model, tol=1e-8)
    assert time.perf_counter() - started < 1.0
    assert report.r == 3
    assert (report.param_count_before, report.param_count_after) == (1296, 81)
    A = reduced.model.A
    diag = np.array([A[(j,) * 4] for j in range(3)])
    np.testing.assert_allclose(np.sort(diag), np.sort(EXAMPLE1_LAMBDAS), atol=1e-3)
    off_diagonal = A.copy()
    for j in range(3):
        off_diagonal[(j,) * 4] = 0.0
    assert np.linalg.norm(off_diagonal) <= 1e-8


def test_example1_dynamics(example1_model, closed_form):
    reduced, _ = reduce(example1_model)
    V = reduced.V
    x0 = EXAMPLE1_X0
    z0 = project_state(V, x0)
    complement = x0 - lift_state(V, z0)

    full = simulate(example1_model, x0, t_span=(0.0, 10.0), dt=1e-3)
    red = simulate(reduced.model, z0, t_span=(0.0, 10.0), dt=1e-3)
    assert full.diverged_at is None and red.diverged_at is None

    d = odeco_decompose(example1_model.A)
    exact = closed_form(d.lambdas, d.U, x0, 4, full.times)
    assert np.max(np.linalg.norm(full.states - exact, axis=1)) <= 1e-5

    d_red = odeco_decompose(reduced.model.A)
    exact_red = closed_form(d_red.lambdas, d_red.U, z0, 4, red.times)
    assert np.max(np.linalg.norm(red.states - exact_red, axis=1)) <= 1e-5

    assert np.all(np.diff(red.norms()) <= 1e-12)
    assert np.all(np.diff(np.linalg.norm(full.states - complement, axis=1)) <= 1e-12)

    lifted = lift_state(V, red.states)
    assert np.max(np.linalg.norm(full.states - complement - lifted, axis=1)) <= 1e-6


def test_example1_dynamics_inside_subspace(example1_model):
    reduced, _ = reduce(example1_model)
    V = reduced.V
    x0 = lift_state(V, project_state(V, EXAMPLE1_X0))
    full = simulate(example1_model, x0, t_span=(0.0, 10.0), dt=1e-3)
    red = simulate(reduced.model, project_state(V, x0), t_span=(0.0, 10.0), dt=1e-3)
    assert np.max(np.linalg.norm(full.states - lift_state(V, red.states), axis=1)) <= 1e-6
    assert np.linalg.norm(full.final_state) < 0.25 * np.linalg.norm(x0)


@pytest.mark.slow
def test_example2_ensemble():
    for seed in range(20):
        model = example2(seed=seed)
        full = controllability_matrix(model.A, model.B)
        assert full.rank == 12

        reduced, report = reduce(model, rank=7)
        assert (report.param_count_before, report.param_count_after) == (20796, 2436)
        red = controllability_matrix(reduced.model.A, reduced.model.B)
        assert red.rank == 7


def _exact_systems(make_exact_system):
    for i in range(20):
        rng = np.random.default_rng(100 + i)
        n = int(rng.integers(4, 6))
        r = int(rng.integers(2, n))
        k = 3 + i % 2
        symmetric = i % 4 < 2
        m, l = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        model, _ = make_exact_system(rng, n=n, r=r, k=k, m=m, l=l, symmetric=symmetric)
        yield rng, model, symmetric


def test_preservation_identities(make_exact_system):
    symmetric_cases = 0
    for rng, model, symmetric in _exact_systems(make_exact_system):
        reduced, report = reduce(model)
        assert report.exact

        ctrl = check_controllability_preservation(model, reduced)
        assert ctrl.passed, ctrl
        assert ctrl.rank_preserved

        if not symmetric:
            continue
        symmetric_cases += 1
        for _ in range(5):
            obs = check_observability_preservation(model, reduced, rng.standard_normal(model.n))
            assert obs.passed, obs
            assert obs.rank_preserved
    assert symmetric_cases == 10


def _unit_state_with_large_coordinates(rng, n, floor=0.3):
    while True:
        alpha = rng.standard_normal(n)
        alpha /= np.linalg.norm(alpha)
        if np.all(np.abs(alpha) >= floor):
            return alpha


@pytest.mark.slow
def test_stability_verdicts_match_simulation():
    for i in range(50):
        rng = np.random.default_rng(500 + i)
        n = int(rng.integers(1, 5))
        U = random_orthogonal(n, rng)
        lambdas = -rng.uniform(1.0, 3.0, size=n)
        unstable = i % 2 == 1
        if unstable:
            lambdas[int(rng.integers(n))] *= -1
        model = InputOutputHPDS(A=odeco_tensor(lambdas, U, 4))
        x0 = U @ _unit_state_with_large_coordinates(rng, n)

        verdict = stability_classify(model.A, x0)
        traj = simulate(model, x0, t_span=(0.0, 100.0), dt=1e-2)
        if unstable:
            assert verdict.classification is Stability.UNSTABLE
            assert traj.diverged_at is not None
        else:
            assert verdict.classification is Stability.ASYMPTOTICALLY_STABLE
            assert traj.diverged_at is None
            norms = traj.norms()
            assert np.all(np.diff(norms) <= 1e-12)
            assert norms[-1] <= 0.15 * norms[0]
