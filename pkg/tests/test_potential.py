import math

import numpy as np
import pytest

from gatelab import (
    build_random,
    build_scaled_bottleneck_fixture,
    build_wht,
    complex_quasi_entropy,
    matrices_at,
    projected_quasi_entropy,
    quasi_entropy,
    trace_potential,
)
from gatelab.potential import (
    UNIT_PAIR_SHARP_DIM2,
    sweep_nonsingular_change_bound,
    sweep_orthogonal_change_bound,
    sweep_unit_pair_bound,
    two_row_change_bound,
)

from oracles import dft_embedding_matrix, potential_brute, wht_sign_matrix


def test_value_on_walsh_hadamard_pair():
    F = wht_sign_matrix(8)
    assert abs(quasi_entropy(F, F) - 24.0) < 1e-10


def test_value_on_identity_is_zero():
    assert quasi_entropy(np.eye(5), np.eye(5)) == 0.0


def test_uniform_unit_pair_attains_log_dimension():
    x = np.full((2, 1), 1 / math.sqrt(2))
    assert abs(quasi_entropy(x, x) - 1.0) < 1e-12


def test_agrees_with_brute_force():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5, 7))
    B = rng.standard_normal((5, 7))
    assert abs(quasi_entropy(A, B) - potential_brute(A, B)) < 1e-10


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        quasi_entropy(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        complex_quasi_entropy(np.eye(3), np.eye(3))


def test_complex_value_on_embedded_dft():
    E = dft_embedding_matrix(8)
    assert abs(complex_quasi_entropy(E, E) - 16.0) < 1e-10


def test_complex_value_on_identity():
    assert complex_quasi_entropy(np.eye(4), np.eye(4)) == 0.0


def test_complex_single_pair_row():
    row = np.array([[1 / math.sqrt(2), 1 / math.sqrt(2)]])
    assert abs(complex_quasi_entropy(row, row)) < 1e-12


def test_projected_value_examples():
    F = wht_sign_matrix(8)
    assert abs(projected_quasi_entropy(F, F) - 24.0) < 1e-10
    assert projected_quasi_entropy(np.eye(4), np.eye(4)) == 0.0
    P = np.diag([1.0, 1.0, 0.0, 0.0])
    assert projected_quasi_entropy(np.eye(4), np.eye(4), P, P) == 0.0


def test_scale_invariance_of_matrix_potential():
    F = wht_sign_matrix(8)
    for gamma in (3.0, -0.2, 17.5):
        scaled = quasi_entropy(gamma * F, F / gamma)
        assert abs(scaled - quasi_entropy(F, F)) < 1e-9


def test_trace_endpoints_on_wht8():
    trace = trace_potential(build_wht(8))
    assert trace.values[0] == 0.0
    assert abs(trace.values[-1] - 24.0) < 1e-10
    assert len(trace.values) == 25


def test_trace_endpoint_on_scaled_fixture():
    trace = trace_potential(build_scaled_bottleneck_fixture(4, 4.0, 2))
    assert abs(trace.values[-1] - 8.0) < 1e-10


def test_trace_deltas_respect_two_row_bound():
    for a in (build_wht(16), build_random(8, 120, seed=4)):
        trace = trace_potential(a)
        for delta, bound in zip(trace.per_step_delta, trace.per_step_bound):
            assert delta <= bound + 1e-7


def test_constant_gates_leave_potential_unchanged():
    from gatelab import Constant, LinearAlgorithm

    a = LinearAlgorithm(4, tuple(Constant(i % 4, 2.0 ** (i % 5 - 2)) for i in range(20)))
    trace = trace_potential(a)
    assert max(trace.per_step_delta) < 1e-12
    assert all(b == 0.0 for b in trace.per_step_bound)


def test_incremental_trace_matches_dense_recomputation():
    # long enough to cross several full-recomputation checkpoints
    algorithm = build_random(8, 2500, seed=12, angle_only=True)
    trace = trace_potential(algorithm)
    for t in list(range(0, 101)) + list(range(150, algorithm.m + 1, 50)):
        M, Minv_T = matrices_at(algorithm, t)
        assert abs(trace.values[t] - quasi_entropy(M, Minv_T)) <= 1e-7


def test_incremental_trace_survives_extreme_scales():
    # repeated scalings push row contributions to astronomic magnitudes; the
    # drift guard rates disagreement against that scale instead of raising,
    # and agreement with the dense value stays proportional to it
    algorithm = build_random(8, 2500, seed=12)
    trace = trace_potential(algorithm)
    scale = max(1.0, max(map(abs, trace.values)), max(trace.per_step_bound))
    for t in (0, 500, 1000, 2000, algorithm.m):
        M, Minv_T = matrices_at(algorithm, t)
        assert abs(trace.values[t] - quasi_entropy(M, Minv_T)) <= 1e-7 * scale


def test_trace_with_projections():
    rng = np.random.default_rng(3)
    P = rng.standard_normal((8, 8))
    Q = rng.standard_normal((8, 8))
    a = build_random(8, 80, seed=21)
    trace = trace_potential(a, P, Q)
    assert abs(trace.values[0] - quasi_entropy(P, Q)) < 1e-10
    M, Minv_T = matrices_at(a, a.m)
    assert abs(trace.values[-1] - quasi_entropy(M @ P, Minv_T @ Q)) < 1e-7
    for delta, bound in zip(trace.per_step_delta, trace.per_step_bound):
        assert delta <= bound + 1e-7


def test_two_row_change_bound_single_row_is_zero():
    a = np.array([[1.0, 2.0]])
    assert two_row_change_bound(a, a, 3 * a, a / 3) == 0.0


def test_unit_pair_sweep_flags_only_the_two_row_corner():
    # the nominal log2(a) constant is beatable at a = 2; the sharp constant
    # (2/e)*log2(e) is not
    report = sweep_unit_pair_bound(trials=1500, max_dim=64, seed=2)
    assert report.violations == 4
    assert report.worst_dim == 2
    assert report.worst_slack >= 1.0 - UNIT_PAIR_SHARP_DIM2 - 1e-9
    assert report.corrected_violations == 0
    assert report.corrected_worst_slack >= -1e-9


def test_unit_pair_sharp_value_is_attained():
    # unit pair with both entry products equal to 1/e
    u = 1.0 / math.e
    c2 = (1.0 + math.sqrt(1.0 - 4.0 * u * u)) / 2.0
    c, s = math.sqrt(c2), math.sqrt(1.0 - c2)
    x = np.array([[c], [s]])
    y = np.array([[s], [c]])
    assert abs(quasi_entropy(x, y) - UNIT_PAIR_SHARP_DIM2) < 1e-12
    assert UNIT_PAIR_SHARP_DIM2 > 1.0


def test_unit_pair_sharp_bound_on_dense_two_row_sampling():
    rng = np.random.default_rng(9)
    for _ in range(20_000):
        x = rng.standard_normal(2)
        y = rng.standard_normal(2)
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)
        assert abs(quasi_entropy(x[:, None], y[:, None])) <= UNIT_PAIR_SHARP_DIM2 + 1e-9


def test_orthogonal_change_sweep_flags_only_the_two_row_corner():
    report = sweep_orthogonal_change_bound(trials=1000, seed=102)
    assert report.violations == 1
    assert report.worst_dim == 2
    assert report.corrected_violations == 0
    assert report.corrected_worst_slack >= -1e-7


def test_orthogonal_change_nominal_constant_is_beatable():
    # quarter-offset axes moved by a three-quarter turn: the move exceeds
    # |A|_F |B|_F log2(2) but stays within twice the sharp two-row constant
    c, s = math.cos(math.pi / 8), math.sin(math.pi / 8)
    A = np.array([[s], [-c]])
    B = np.array([[-c], [s]])
    t = math.cos(3 * math.pi / 4)
    u = math.sin(3 * math.pi / 4)
    U = np.array([[t, u], [-u, t]])
    move = abs(quasi_entropy(A, B) - quasi_entropy(U @ A, U @ B))
    assert move > 1.27
    assert move <= 2.0 * UNIT_PAIR_SHARP_DIM2


def test_nonsingular_change_bound_sweep_is_clean():
    report = sweep_nonsingular_change_bound(trials=300, seed=1)
    assert report.violations == 0
    assert report.worst_slack >= -1e-7
