import warnings
from fractions import Fraction

import numpy as np
import pytest

from conftest import contractive, iterate_to_fixed_point
from netdiffusion.centrality import friedkin_johnsen
from netdiffusion.dynamics import (
    FIXED_POINT_TOL,
    DiffusionModel,
    Trajectory,
    equilibrium,
    estimate_drift,
    is_hurwitz,
    ode_equilibrium,
    perturbative,
    regime_diagnostics,
    run_dynamic,
    run_fixed,
    step,
    unroll_dynamic,
    unroll_fixed,
)
from netdiffusion.errors import (
    DataError,
    DimensionError,
    NonConvergentModelError,
    RegimeWarning,
    SingularSystemError,
    StabilityWarning,
)
from netdiffusion.linalg import max_singular_value


def explicit_unroll(seq, z, y_past):
    """Brute-force oracle: build every matrix product of the closed form explicitly.

    seq is oldest first; M = A_t...A_{t-k+1}, F = I + sum_{i=1}^{k-1} A_t...A_{t-i+1}.
    """
    newest_first = [np.asarray(A, float) for A in reversed(seq)]
    n = newest_first[0].shape[0]
    M = np.eye(n)
    for A in newest_first:
        M = M @ A
    F = np.eye(n)
    P = np.eye(n)
    for A in newest_first[:-1]:
        P = P @ A
        F = F + P
    return M @ y_past + F @ z


@pytest.mark.parametrize(
    "A, y, z, expected",
    [
        (np.zeros((2, 2)), [5, 5], [1, 2], [1, 2]),
        (np.eye(2), [1, 2], [0, 0], [1, 2]),
        ([[0, 0.5], [0.5, 0]], [2, 0], [1, 1], [1, 2]),
    ],
)
def test_step_examples(A, y, z, expected):
    np.testing.assert_array_equal(step(A, y, z), expected)


def test_step_dimension_mismatch():
    with pytest.raises(DimensionError):
        step(np.eye(2), [1, 2, 3], [0, 0])


def test_run_fixed_single_step(rng):
    A, y0, z = rng.normal(size=(3, 3)), rng.normal(size=3), rng.normal(size=3)
    tr = run_fixed(DiffusionModel(A, z), y0, 1)
    assert tr.step_count == 1 and len(tr) == 2
    np.testing.assert_array_equal(tr.final, A @ y0 + z)


def test_run_fixed_scalar_example():
    tr = run_fixed(DiffusionModel([[0.5]], [1]), [0], 3)
    np.testing.assert_allclose(tr.states[:, 0], [0, 1, 1.5, 1.75])


def test_run_fixed_matches_closed_form(rng):
    for _ in range(50):
        n = int(rng.integers(1, 8))
        model = DiffusionModel(contractive(rng, n, rng.uniform(0.1, 1.0)), rng.normal(size=n))
        y0 = rng.normal(size=n)
        t = int(rng.integers(1, 30))
        a = run_fixed(model, y0, t).final
        np.testing.assert_allclose(a, unroll_fixed(model, y0, t), atol=1e-10, rtol=0)


def test_run_fixed_converges_to_resolvent(rng):
    A = contractive(rng, 6, 0.7)
    z = rng.normal(size=6)
    model = DiffusionModel(A, z)
    tr = run_fixed(model, np.zeros(6), 200)
    np.testing.assert_allclose(tr.final, equilibrium(model), atol=1e-12)


def test_run_fixed_rejects_zero_steps():
    with pytest.raises(DataError):
        run_fixed(DiffusionModel(np.eye(2), [0, 0]), [0, 0], 0)


def test_run_dynamic_constant_sequence_equals_run_fixed(rng):
    A = contractive(rng, 4, 0.8)
    z, y0 = rng.normal(size=4), rng.normal(size=4)
    a = run_dynamic([A] * 12, z, y0)
    b = run_fixed(DiffusionModel(A, z), y0, 12)
    np.testing.assert_array_equal(a.states, b.states)


def test_run_dynamic_single_matrix(rng):
    A, z, y0 = rng.normal(size=(3, 3)), rng.normal(size=3), rng.normal(size=3)
    tr = run_dynamic([A], z, y0)
    np.testing.assert_array_equal(tr.final, step(A, y0, z))
    assert tr.step_count == 1


def test_run_dynamic_recurrence_each_state(rng):
    seq = [rng.normal(size=(4, 4)) * 0.3 for _ in range(5)]
    z, y0 = rng.normal(size=4), rng.normal(size=4)
    tr = run_dynamic(seq, z, y0)
    assert len(tr) == 6
    for i, A in enumerate(seq, start=1):
        np.testing.assert_array_equal(tr[i], A @ tr[i - 1] + z)
    np.testing.assert_allclose(tr.final, unroll_dynamic(seq, z, y0), atol=1e-10, rtol=0)


def test_run_dynamic_errors():
    with pytest.raises(DataError):
        run_dynamic([], [1.0], [0.0])
    with pytest.raises(DimensionError):
        run_dynamic([np.eye(2), np.eye(3)], [1, 1], [0, 0])


def test_unroll_k1(rng):
    A, z, y = rng.normal(size=(3, 3)), rng.normal(size=3), rng.normal(size=3)
    np.testing.assert_allclose(unroll_dynamic([A], z, y), A @ y + z, atol=1e-15)


def test_unroll_k2_worked_expansion(rng):
    A_prev, A_t = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    z, y = rng.normal(size=3), rng.normal(size=3)
    expected = A_t @ A_prev @ y + (np.eye(3) + A_t) @ z
    np.testing.assert_allclose(unroll_dynamic([A_prev, A_t], z, y), expected, atol=1e-12)


def test_unroll_k3_worked_expansion(rng):
    A2, A1, A0 = (rng.normal(size=(3, 3)) for _ in range(3))  # A_{t-2}, A_{t-1}, A_t
    z, y = rng.normal(size=3), rng.normal(size=3)
    expected = A0 @ A1 @ A2 @ y + (np.eye(3) + A0 + A0 @ A1) @ z
    np.testing.assert_allclose(unroll_dynamic([A2, A1, A0], z, y), expected, atol=1e-12)


def test_unroll_matches_explicit_products_and_iteration(rng):
    for _ in range(100):
        k, n = int(rng.integers(1, 16)), int(rng.integers(1, 11))
        seq = [contractive(rng, n, rng.uniform(0.1, 1.2)) for _ in range(k)]
        z, y = rng.normal(size=n), rng.normal(size=n)
        closed = unroll_dynamic(seq, z, y)
        np.testing.assert_allclose(closed, explicit_unroll(seq, z, y), atol=1e-10, rtol=0)
        np.testing.assert_allclose(closed, run_dynamic(seq, z, y).final, atol=1e-10, rtol=0)


@pytest.mark.parametrize(
    "A, z, expected",
    [
        (np.zeros((3, 3)), [1, -2, 3], [1, -2, 3]),
        ([[0, 0.5], [0.5, 0]], [1, 1], [2, 2]),
    ],
)
def test_equilibrium_examples(A, z, expected):
    np.testing.assert_allclose(equilibrium(DiffusionModel(A, z)), expected, atol=1e-12)


def test_equilibrium_friedkin_johnsen_isolated():
    G = np.eye(3)  # S = 0 forces G_ii = 1
    y_exo = np.array([0.2, -1.0, 4.0])
    model = friedkin_johnsen(G, np.zeros(3), y_exo)
    np.testing.assert_array_equal(model.A, 0)
    np.testing.assert_allclose(equilibrium(model), y_exo)


def test_equilibrium_refuses_divergent():
    model = DiffusionModel([[0, 2.0], [2.0, 0]], [1, 1])
    with pytest.raises(NonConvergentModelError) as info:
        equilibrium(model)
    assert info.value.spectral_radius == pytest.approx(2.0)
    # algebraic solve: x - 2x = 1 by symmetry  ->  x = [-1, -1]
    np.testing.assert_allclose(equilibrium(model, allow_nonconvergent=True), [-1, -1])


def test_fixed_point_property(rng):
    for _ in range(200):
        n = int(rng.integers(1, 30))
        model = DiffusionModel(contractive(rng, n, rng.uniform(0, 0.9)), rng.normal(size=n))
        y = equilibrium(model)
        assert np.max(np.abs(model.A @ y + model.z - y)) <= FIXED_POINT_TOL


def test_geometric_memory_decay(rng):
    for _ in range(20):
        n = int(rng.integers(2, 15))
        sigma = rng.uniform(0.2, 0.95)
        model = DiffusionModel(contractive(rng, n, sigma), rng.normal(size=n))
        y_star = equilibrium(model)
        y0 = rng.normal(size=n) * 5
        tr = run_fixed(model, y0, 100)
        s = max_singular_value(model.A)
        gap0 = np.linalg.norm(y0 - y_star)
        for k in range(101):
            assert np.linalg.norm(tr[k] - y_star) <= s**k * gap0 + 1e-12


def test_memorylessness(rng):
    n, T = 6, 60
    seq = [contractive(rng, n, rng.uniform(0.3, 0.8)) for _ in range(T)]
    s = max(max_singular_value(A) for A in seq)
    z = rng.normal(size=n)
    y0, y0b = rng.normal(size=n) * 10, rng.normal(size=n) * 10
    a = run_dynamic(seq, z, y0).final
    b = run_dynamic(seq, z, y0b).final
    assert np.linalg.norm(a - b) <= s**T * np.linalg.norm(y0 - y0b) + 1e-12


def test_estimate_drift_examples():
    A = np.arange(9.0).reshape(3, 3) / 10
    np.testing.assert_array_equal(estimate_drift(A, A), np.zeros((3, 3)))
    prev, now = np.zeros((3, 3)), np.zeros((3, 3))
    prev[1, 2], now[1, 2] = 0.6, 0.5
    D = estimate_drift(prev, now)
    assert D[1, 2] == pytest.approx(0.1)
    assert np.count_nonzero(D) == 1


def test_estimate_drift_three_edge_changes(rng):
    alpha = 0.07
    g1 = (rng.random((8, 8)) < 0.3).astype(float)
    np.fill_diagonal(g1, 0)
    g2 = g1.copy()
    for i, j in [(0, 1), (3, 5), (7, 2)]:
        g2[i, j] = 1 - g2[i, j]
    D = estimate_drift(alpha * g1, alpha * g2)
    assert np.count_nonzero(D) == 3
    np.testing.assert_allclose(np.abs(D[D != 0]), alpha)


def test_estimate_drift_shape_mismatch():
    with pytest.raises(DimensionError):
        estimate_drift(np.eye(2), np.eye(3))


def test_perturbative_zero_drift_is_equilibrium_bitwise(rng):
    for _ in range(50):
        n = int(rng.integers(1, 20))
        A, z = contractive(rng, n, 0.8), rng.normal(size=n)
        a = perturbative(A, np.zeros((n, n)), z)
        b = equilibrium(DiffusionModel(A, z))
        assert np.array_equal(a, b)


def test_perturbative_worked_example():
    A_t = np.array([[0, 0.5], [0.25, 0]])
    D = np.array([[0, 0.1], [0, 0]])
    # exact: (I - A_t)^-1 [1,1] = [12/7, 10/7]; A_t D z = [0, 1/40]
    expected = [float(Fraction(12, 7)), float(Fraction(10, 7) + Fraction(1, 40))]
    np.testing.assert_allclose(perturbative(A_t, D, [1, 1]), expected, atol=1e-12)
    np.testing.assert_allclose(perturbative(A_t, D, [1, 1]), [1.714286, 1.453571], atol=5e-7)


def test_perturbative_closer_than_equilibrium_after_step_change():
    # network was A_prev long enough to equilibrate, then switched to A_t for one step
    A_t = np.array([[0, 0.5], [0.25, 0]])
    D = np.array([[0, 0.1], [0, 0]])
    z = np.ones(2)
    y_prev = equilibrium(DiffusionModel(A_t + D, z))
    exact = A_t @ y_prev + z
    pert_err = np.linalg.norm(perturbative(A_t, D, z) - exact)
    eq_err = np.linalg.norm(equilibrium(DiffusionModel(A_t, z)) - exact)
    assert pert_err < eq_err


def test_perturbative_linear_in_forcing(rng):
    A, D, z = contractive(rng, 5, 0.6), contractive(rng, 5, 0.05), rng.normal(size=5)
    np.testing.assert_allclose(perturbative(A, D, 3.5 * z), 3.5 * perturbative(A, D, z), rtol=1e-12)


def test_perturbative_regime_warning():
    A = 0.1 * np.eye(2)
    with pytest.warns(RegimeWarning):
        perturbative(A, 0.5 * np.eye(2), [1, 1])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        perturbative(A, 0.01 * np.eye(2), [1, 1])


def test_perturbative_singular():
    with pytest.raises(SingularSystemError):
        perturbative(np.eye(2), np.zeros((2, 2)), [1, 1])


def test_regime_diagnostics_reports_dropped_term():
    A_t = np.array([[0, 0.5], [0.25, 0]])
    D = np.array([[0, 0.1], [0, 0]])
    rep = regime_diagnostics(A_t, D, [1, 1])
    assert rep.first_order_norm == pytest.approx(0.025)
    # A_t^2 D z = A_t [0, 0.025] = [0.0125, 0]
    assert rep.second_order_norm == pytest.approx(0.0125)
    assert rep.slow
    assert rep.sigma_D == pytest.approx(0.1)


def test_slow_linear_drift_perturbative_wins_and_errors_are_first_order(rng):
    n, K = 6, 80
    A_t = contractive(rng, n, 0.5, signed=False)
    Dh = rng.normal(size=(n, n))
    Dh /= np.linalg.norm(Dh, 2)
    z = rng.uniform(size=n)
    y_eq = equilibrium(DiffusionModel(A_t, z))
    errs = []
    for h in range(5):
        eps = 1e-3 / 2**h
        seq = [A_t + k * eps * Dh for k in range(K - 1, -1, -1)]
        exact = run_dynamic(seq, z, np.zeros(n)).final
        e_pert = np.linalg.norm(perturbative(A_t, eps * Dh, z) - exact)
        e_eq = np.linalg.norm(y_eq - exact)
        assert e_pert < e_eq
        errs.append((e_eq, e_pert))
    for (a0, b0), (a1, b1) in zip(errs, errs[1:]):
        # halving the drift halves both errors
        assert a1 / a0 == pytest.approx(0.5, rel=0.02)
        assert b1 / b0 == pytest.approx(0.5, rel=0.02)


@pytest.mark.parametrize(
    "A, z, expected",
    [
        (-np.eye(2), [1, 2], [1, 2]),
        (np.diag([-1.0, -2.0]), [1, 2], [1, 1]),
    ],
)
def test_ode_equilibrium_examples(A, z, expected):
    np.testing.assert_allclose(ode_equilibrium(DiffusionModel(A, z)), expected, atol=1e-14)


def test_ode_equilibrium_residual(rng):
    for _ in range(100):
        n = int(rng.integers(1, 20))
        A = rng.normal(size=(n, n)) - 3 * np.eye(n)
        z = rng.normal(size=n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StabilityWarning)
            x = ode_equilibrium(DiffusionModel(A, z))
        assert np.max(np.abs(A @ x + z)) <= 1e-10


def test_ode_equilibrium_stability_reported():
    assert is_hurwitz(-np.eye(2))
    with pytest.warns(StabilityWarning):
        x = ode_equilibrium(DiffusionModel(np.eye(2), [1, 1]))
    np.testing.assert_allclose(x, [-1, -1])
    with pytest.raises(SingularSystemError), pytest.warns(StabilityWarning):
        ode_equilibrium(DiffusionModel(np.zeros((2, 2)), [1, 1]))


def test_model_is_immutable():
    m = DiffusionModel(np.eye(2), [1, 2])
    with pytest.raises(ValueError):
        m.A[0, 0] = 5
    with pytest.raises(DimensionError):
        DiffusionModel(np.eye(2), [1, 2, 3])
    with pytest.raises(DataError):
        DiffusionModel([[np.nan]], [1])


def test_trajectory_shape():
    tr = Trajectory(np.zeros((4, 3)))
    assert tr.step_count == 3
