"""Bottleneck scan over windows of gates and related potential inequalities.

Any in-place algorithm that moves the potential from its identity value to
its final value must somewhere concentrate that movement: partitioning the
gate list into windows of R consecutive gates, the potential move across one
window is controlled by the Frobenius norms of the touched rows of M P and
M^{-T} Q at the window boundaries.  The scan therefore reports, per window
start t,

    lhs(t) = sqrt( |(M(t) P)[I_t]|_F^2 * |(M(t)^{-T} Q)[I_t]|_F^2 ),

with I_t the union of coordinates touched inside the window, and compares the
maximum against the averaged bound

    rhs = R * (potential(final) - potential(identity)) / (m * log2(2R)).

Windows start at multiples of R; the gate list is conceptually padded with
identity steps up to a multiple of R.  For R = 1 the scan restricts to
rotation steps by default, because a constant gate scales the paired rows by
c and 1/c and provably cannot move the potential.

``verify_bottleneck_chain`` re-derives the averaged bound link by link
(triangle inequality, per-window two-row change bound, max versus average)
and reports the slack of each link, which is nonnegative up to float noise
for every algorithm and every P, Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .builders import wht_matrix
from .gates import Constant, LinearAlgorithm, apply_gate_rows, touched
from .potential import quasi_entropy


def _padded_length(m: int, R: int) -> int:
    return ((m + R - 1) // R) * R


def _window_sets(algorithm: LinearAlgorithm, R: int) -> list[tuple[int, ...]]:
    m_padded = _padded_length(algorithm.m, R)
    sets = []
    for start in range(0, m_padded, R):
        idx: set[int] = set()
        for gate in algorithm.gates[start : min(start + R, algorithm.m)]:
            idx.update(touched(gate))
        sets.append(tuple(sorted(idx)))
    return sets


def _block_product(A: np.ndarray, B: np.ndarray, rows: tuple[int, ...]) -> float:
    if not rows:
        return 0.0
    idx = list(rows)
    return float(np.linalg.norm(A[idx]) * np.linalg.norm(B[idx]))


@dataclass
class BottleneckReport:
    R: int
    t_star: int | None
    affected: tuple[int, ...]
    lhs: float
    rhs: float
    slack: float
    window_starts: list[int]
    per_step_lhs: list[float]
    phi_final: float
    phi_identity: float
    m: int
    m_padded: int


def scan_bottlenecks(
    algorithm: LinearAlgorithm,
    P: np.ndarray | None = None,
    Q: np.ndarray | None = None,
    R: int = 1,
    include_constants: bool = False,
) -> BottleneckReport:
    """Scan window starts for the maximal touched-row Frobenius product.

    ``include_constants`` widens the R = 1 scan to constant-gate steps, whose
    single touched row plays the role of both indices.
    """
    n = algorithm.n
    if not 1 <= R <= n // 2:
        raise ValueError(f"window size {R} out of range [1, {n // 2}]")
    m = algorithm.m
    A = np.eye(n) if P is None else np.array(P, dtype=float)
    B = np.eye(n) if Q is None else np.array(Q, dtype=float)
    if A.shape != (n, n) or B.shape != (n, n):
        raise ValueError(f"P and Q must be {n}x{n}")
    phi_identity = quasi_entropy(A, B)

    window_sets = _window_sets(algorithm, R)
    windows: list[tuple[int, tuple[int, ...]]] = []
    for w, rows in enumerate(window_sets):
        start = w * R
        if R == 1 and not include_constants and isinstance(algorithm.gates[start], Constant):
            continue
        windows.append((start, rows))

    starts: list[int] = []
    per_step: list[float] = []
    affected: list[tuple[int, ...]] = []
    wi = 0
    for t in range(m + 1):
        while wi < len(windows) and windows[wi][0] == t:
            start, rows = windows[wi]
            starts.append(start)
            per_step.append(_block_product(A, B, rows))
            affected.append(rows)
            wi += 1
        if t < m:
            gate = algorithm.gates[t]
            apply_gate_rows(A, gate)
            apply_gate_rows(B, gate, inverse_transpose=True)

    phi_final = quasi_entropy(A, B)
    rhs = R * (phi_final - phi_identity) / (m * math.log2(2 * R)) if m else 0.0
    if per_step:
        best = int(np.argmax(per_step))
        lhs = per_step[best]
        t_star: int | None = starts[best]
        best_affected = affected[best]
    else:
        lhs, t_star, best_affected = 0.0, None, ()
    return BottleneckReport(
        R=R,
        t_star=t_star,
        affected=best_affected,
        lhs=lhs,
        rhs=rhs,
        slack=lhs - rhs,
        window_starts=starts,
        per_step_lhs=per_step,
        phi_final=phi_final,
        phi_identity=phi_identity,
        m=m,
        m_padded=_padded_length(m, R),
    )


@dataclass
class WindowLink:
    start: int
    affected: tuple[int, ...]
    delta_abs: float
    bound: float
    slack: float


@dataclass
class ChainReport:
    R: int
    m: int
    m_padded: int
    phi_identity: float
    phi_final: float
    triangle_lhs: float
    triangle_rhs: float
    triangle_slack: float
    windows: list[WindowLink]
    min_window_slack: float
    max_endpoint_product: float
    average_requirement: float
    max_vs_average_slack: float
    scan: BottleneckReport


def verify_bottleneck_chain(
    algorithm: LinearAlgorithm,
    P: np.ndarray | None = None,
    Q: np.ndarray | None = None,
    R: int = 1,
) -> ChainReport:
    """Check every link of the averaged bottleneck bound numerically.

    Links: (a) the triangle inequality over window boundaries, (b) each
    window's two-row change bound evaluated at both endpoints, (c) the final
    max-versus-average step.  All slacks are nonnegative up to float noise.
    """
    n = algorithm.n
    if not 1 <= R <= n // 2:
        raise ValueError(f"window size {R} out of range [1, {n // 2}]")
    m = algorithm.m
    A = np.eye(n) if P is None else np.array(P, dtype=float)
    B = np.eye(n) if Q is None else np.array(Q, dtype=float)
    if A.shape != (n, n) or B.shape != (n, n):
        raise ValueError(f"P and Q must be {n}x{n}")

    window_sets = _window_sets(algorithm, R)
    n_windows = len(window_sets)
    m_padded = _padded_length(m, R)
    phis: list[float] = []
    start_products = [0.0] * n_windows
    end_products = [0.0] * n_windows

    def at_boundary(b_index: int) -> None:
        phis.append(quasi_entropy(A, B))
        if b_index < n_windows:
            start_products[b_index] = _block_product(A, B, window_sets[b_index])
        if b_index > 0:
            end_products[b_index - 1] = _block_product(A, B, window_sets[b_index - 1])

    boundary = 0
    for t in range(m + 1):
        if t == boundary * R:
            at_boundary(boundary)
            boundary += 1
        if t < m:
            gate = algorithm.gates[t]
            apply_gate_rows(A, gate)
            apply_gate_rows(B, gate, inverse_transpose=True)
    # Padding repeats the final matrix, so any remaining boundary sees the
    # same state as step m.
    while boundary <= n_windows:
        at_boundary(boundary)
        boundary += 1

    windows: list[WindowLink] = []
    for w, rows in enumerate(window_sets):
        delta_abs = abs(phis[w + 1] - phis[w])
        rows_count = len(rows)
        bound = (
            (start_products[w] + end_products[w]) * math.log2(rows_count)
            if rows_count >= 2
            else 0.0
        )
        windows.append(
            WindowLink(
                start=w * R,
                affected=rows,
                delta_abs=delta_abs,
                bound=bound,
                slack=bound - delta_abs,
            )
        )

    triangle_lhs = sum(link.delta_abs for link in windows)
    triangle_rhs = abs(phis[-1] - phis[0])
    max_endpoint = max(
        (max(start_products[w], end_products[w]) for w in range(n_windows)), default=0.0
    )
    average_requirement = (
        (phis[-1] - phis[0]) / (2 * n_windows * math.log2(2 * R)) if n_windows else 0.0
    )
    scan = scan_bottlenecks(algorithm, P, Q, R)
    return ChainReport(
        R=R,
        m=m,
        m_padded=m_padded,
        phi_identity=phis[0],
        phi_final=phis[-1],
        triangle_lhs=triangle_lhs,
        triangle_rhs=triangle_rhs,
        triangle_slack=triangle_lhs - triangle_rhs,
        windows=windows,
        min_window_slack=min((link.slack for link in windows), default=0.0),
        max_endpoint_product=max_endpoint,
        average_requirement=average_requirement,
        max_vs_average_slack=max_endpoint - average_requirement,
        scan=scan,
    )


# Explicit constants for the potential of the transform after row operators.
# Lower direction: applying P, Q against the Walsh-Hadamard pair costs at most
# the deficiency traces times log2 n plus a squared-deficiency term with slope
# 30 and offset 147.  Upper direction (PSD contractions only): the identity
# pair's potential is at most the deficiency traces, plus the squared
# Frobenius deficiencies for the diagonal part, plus the squared deficiencies
# times log2 n for the off-diagonal part.
LOWER_SLOPE = 30.0
LOWER_OFFSET = 147.0


@dataclass
class FourierProjectionReport:
    n: int
    tr_p_hat: float
    tr_q_hat: float
    alpha2: float
    beta2: float
    lower_lhs: float
    lower_rhs: float
    lower_slack: float
    upper_lhs: float | None
    upper_rhs: float | None
    upper_slack: float | None


def _check_psd_contraction(name: str, X: np.ndarray, tol: float = 1e-8) -> None:
    if float(np.abs(X - X.T).max()) > tol:
        raise ValueError(f"{name} is not symmetric within {tol}")
    eigs = np.linalg.eigvalsh(X)
    if eigs[0] < -tol or eigs[-1] > 1.0 + tol:
        raise ValueError(
            f"{name} is not a PSD contraction: eigenvalues in [{eigs[0]:.3e}, {eigs[-1]:.3e}]"
        )


def verify_fourier_projection_bound(
    n: int,
    P: np.ndarray,
    Q: np.ndarray,
    check_upper: bool = True,
) -> FourierProjectionReport:
    """Evaluate both explicit-constant potential bounds for row operators P, Q.

    The lower bound (potential of the Walsh-Hadamard pair after applying P
    and Q) holds for arbitrary P, Q; the upper bound (potential of the pair
    (P, Q) itself) additionally requires both to be PSD contractions.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape != (n, n) or Q.shape != (n, n):
        raise ValueError(f"P and Q must be {n}x{n}")
    F = wht_matrix(n)
    log_n = math.log2(n)
    p_hat = np.eye(n) - P
    q_hat = np.eye(n) - Q
    tr_p_hat = float(np.trace(p_hat))
    tr_q_hat = float(np.trace(q_hat))
    alpha2 = float(np.linalg.norm(p_hat) ** 2)
    beta2 = float(np.linalg.norm(q_hat) ** 2)

    lower_lhs = quasi_entropy(F @ P, F @ Q)
    lower_rhs = (
        n * log_n
        - (tr_p_hat + tr_q_hat) * log_n
        - (alpha2 + beta2) * (LOWER_OFFSET + LOWER_SLOPE * log_n)
    )

    upper_lhs = upper_rhs = upper_slack = None
    if check_upper:
        _check_psd_contraction("P", P)
        _check_psd_contraction("Q", Q)
        upper_lhs = quasi_entropy(P, Q)
        upper_rhs = tr_p_hat + tr_q_hat + alpha2 + beta2 + (alpha2 + beta2) * log_n
        upper_slack = upper_rhs - upper_lhs

    return FourierProjectionReport(
        n=n,
        tr_p_hat=tr_p_hat,
        tr_q_hat=tr_q_hat,
        alpha2=alpha2,
        beta2=beta2,
        lower_lhs=lower_lhs,
        lower_rhs=lower_rhs,
        lower_slack=lower_lhs - lower_rhs,
        upper_lhs=upper_lhs,
        upper_rhs=upper_rhs,
        upper_slack=upper_slack,
    )


def random_projection(rng: np.random.Generator, n: int, rank: int) -> np.ndarray:
    """Random orthogonal projection of the given rank."""
    basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V = basis[:, :rank]
    return V @ V.T


@dataclass
class ProjectionSweepReport:
    n: int
    trials: int
    worst_lower_slack: float
    worst_upper_slack: float
    violations: int


def sweep_fourier_projection_bound(
    n: int, trials: int = 100, seed: int = 0, slack_tol: float = 1e-6
) -> ProjectionSweepReport:
    """Both bounds on random orthogonal-projection pairs of rank n - r, r <= n/2."""
    rng = np.random.default_rng(seed)
    worst_lower = math.inf
    worst_upper = math.inf
    violations = 0
    for _ in range(trials):
        r_p = int(rng.integers(1, n // 2 + 1))
        r_q = int(rng.integers(1, n // 2 + 1))
        P = random_projection(rng, n, n - r_p)
        Q = random_projection(rng, n, n - r_q)
        report = verify_fourier_projection_bound(n, P, Q)
        worst_lower = min(worst_lower, report.lower_slack)
        worst_upper = min(worst_upper, report.upper_slack)
        if report.lower_slack < -slack_tol or report.upper_slack < -slack_tol:
            violations += 1
    return ProjectionSweepReport(
        n=n,
        trials=trials,
        worst_lower_slack=worst_lower,
        worst_upper_slack=worst_upper,
        violations=violations,
    )
