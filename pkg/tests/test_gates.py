import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gatelab import (
    Constant,
    LinearAlgorithm,
    ParseError,
    Rotation,
    TrajectoryState,
    advance,
    apply_to_vector,
    build_random,
    build_wht,
    is_reflection,
    matrices_at,
    parse_algorithm,
    render_algorithm,
    touched,
    validate,
)

from oracles import compose_dense, wht_sign_matrix


def test_apply_to_vector_wht2():
    a = build_wht(2)
    expected = wht_sign_matrix(2) @ np.array([1.0, 0.0])
    got = apply_to_vector(a, [1.0, 0.0])
    assert np.allclose(got, expected, atol=1e-12)
    assert np.allclose(got, [1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-12)


def test_apply_to_vector_step_zero_is_identity():
    a = build_random(6, 40, seed=11)
    x = np.arange(6, dtype=float)
    assert np.array_equal(apply_to_vector(a, x, upto_t=0), x)


def test_constant_gate_scales_single_coordinate():
    a = LinearAlgorithm(2, (Constant(0, 3.0),))
    assert np.allclose(apply_to_vector(a, [2.0, 5.0]), [6.0, 5.0])


def test_apply_to_vector_rejects_bad_inputs():
    a = build_wht(4)
    with pytest.raises(ValueError):
        apply_to_vector(a, [1.0, 2.0])
    with pytest.raises(ValueError):
        apply_to_vector(a, np.zeros(4), upto_t=a.m + 1)


def test_advance_quarter_turn_rotation():
    state = TrajectoryState.identity(2)
    advance(state, Rotation(0, 1, math.pi / 4))
    r = math.sqrt(2) / 2
    expected = np.array([[r, r], [-r, r]])
    assert np.allclose(state.M, expected, atol=1e-15)
    # rotations are orthogonal, so the inverse transpose tracks M exactly
    assert np.allclose(state.Minv_T, expected, atol=1e-15)
    assert state.touched == (0, 1)


def test_advance_constant_scales_inverse_row():
    state = TrajectoryState.identity(2)
    advance(state, Constant(0, 4.0))
    assert np.allclose(state.M[0], [4.0, 0.0])
    assert np.allclose(state.Minv_T[0], [0.25, 0.0])
    assert state.touched == (0,)


def test_full_wht4_matches_dense_gate_product():
    a = build_wht(4)
    M, _ = matrices_at(a, a.m)
    assert np.abs(M - compose_dense(a)).max() < 1e-12


def test_matrices_at_endpoints():
    a = build_wht(2)
    M0, N0 = matrices_at(a, 0)
    assert np.array_equal(M0, np.eye(2))
    assert np.array_equal(N0, np.eye(2))
    M, N = matrices_at(a, a.m)
    F = wht_sign_matrix(2)
    assert np.abs(M - F).max() < 1e-12
    assert np.abs(N - F).max() < 1e-12


def test_matrices_at_constant_fixture():
    a = LinearAlgorithm(4, (Constant(0, 4.0),))
    M, N = matrices_at(a, 1)
    assert np.allclose(M, np.diag([4.0, 1, 1, 1]))
    assert np.allclose(N, np.diag([0.25, 1, 1, 1]))
    with pytest.raises(ValueError):
        matrices_at(a, 2)


def test_validate_wht8_is_perfectly_conditioned():
    diag = validate(build_wht(8))
    assert diag.stable
    assert max(abs(k - 1.0) for k in diag.kappas) < 1e-9


def test_validate_tracks_planted_condition_number():
    # scale one row by 16 mid-run and immediately undo it: exactly one step
    # sees singular values (16, 1, 1, 1)
    gates = list(build_wht(4).gates)
    mid = (Constant(2, 16.0), Constant(2, 1 / 16.0))
    a = LinearAlgorithm(4, tuple(gates[:4]) + mid + tuple(gates[4:]))
    diag = validate(a)
    assert abs(diag.max_kappa - 16.0) < 1e-9


def test_validate_empty_gate_list():
    diag = validate(LinearAlgorithm(3, ()))
    assert diag.max_residual == 0.0
    assert diag.kappas == [1.0]


def test_inverse_consistency_and_vector_agreement_random():
    # 1e-9 tolerances are relative: long runs of row scalings can push the
    # trajectory scale to 1e6 and beyond, so residuals are measured against it
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(2, 33))
        m = int(rng.integers(1, 201))
        a = build_random(n, m, seed=int(rng.integers(1_000_000)))
        M, N = matrices_at(a, a.m)
        scale = max(1.0, np.abs(M).max() * np.abs(N).max())
        assert np.abs(M @ N.T - np.eye(n)).max() <= 1e-9 * scale
        x = rng.standard_normal(n)
        direct = apply_to_vector(a, x)
        dense = M @ x
        assert np.abs(direct - dense).max() <= 1e-9 * max(1.0, np.abs(dense).max())


def test_row_locality_untouched_rows_bit_identical():
    a = build_random(8, 60, seed=5)
    for t in range(1, a.m + 1):
        prev_M, prev_N = matrices_at(a, t - 1)
        cur_M, cur_N = matrices_at(a, t)
        rows = set(touched(a.gates[t - 1]))
        keep = [i for i in range(8) if i not in rows]
        assert np.array_equal(prev_M[keep], cur_M[keep])
        assert np.array_equal(prev_N[keep], cur_N[keep])


def test_gate_invariants():
    with pytest.raises(ValueError):
        Rotation(1, 1, 0.3)
    with pytest.raises(ValueError):
        Rotation(-1, 2, 0.3)
    with pytest.raises(ValueError):
        Constant(0, 0.0)
    with pytest.raises(ValueError):
        Constant(0, math.inf)
    with pytest.raises(ValueError):
        LinearAlgorithm(2, (Rotation(0, 5, 0.1),))
    with pytest.raises(ValueError):
        LinearAlgorithm(1, ())
    assert is_reflection(Constant(3, -1.0))
    assert not is_reflection(Constant(3, -2.0))
    assert not is_reflection(Rotation(0, 1, 0.1))


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.one_of(
            st.tuples(
                st.just("R"),
                st.integers(0, 5),
                st.integers(0, 5),
                st.floats(-50, 50, allow_nan=False),
            ),
            st.tuples(
                st.just("C"),
                st.integers(0, 5),
                st.floats(-100, 100, allow_nan=False).filter(lambda c: abs(c) > 1e-9),
            ),
        ),
        max_size=20,
    )
)
def test_text_format_round_trip(raw_gates):
    gates = []
    for spec in raw_gates:
        if spec[0] == "R":
            _, i, j, theta = spec
            if i == j:
                continue
            gates.append(Rotation(i, j, theta))
        else:
            _, i, c = spec
            gates.append(Constant(i, c))
    a = LinearAlgorithm(6, tuple(gates))
    assert parse_algorithm(render_algorithm(a)).gates == a.gates


def test_round_trip_preserves_seventeen_digit_scalars():
    a = LinearAlgorithm(4, (Rotation(0, 3, math.pi / 4), Constant(2, -1.0 / 3.0)))
    b = parse_algorithm(render_algorithm(a))
    assert b.n == 4 and b.gates == a.gates


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as err:
        parse_algorithm("n 4 m 1\nR 0 0 0.5\n")
    assert err.value.line == 2
    with pytest.raises(ParseError) as err:
        parse_algorithm("n 4 m 2\nC 0 2.0\n")
    assert err.value.line == 1
    with pytest.raises(ParseError) as err:
        parse_algorithm("bogus\n")
    assert err.value.line == 1
    with pytest.raises(ParseError) as err:
        parse_algorithm("n 4 m 1\nX 0 1\n")
    assert err.value.line == 2
