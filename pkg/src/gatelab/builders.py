"""Reference gate programs: fast transforms and engineered fixtures.

The Walsh-Hadamard builder emits the standard in-place butterfly network.
Each butterfly on coordinates (i, j) is a quarter-turn rotation followed by a
reflection of j, realizing (x_i, x_j) -> ((x_i+x_j)/sqrt2, (x_i-x_j)/sqrt2);
the rotation-then-reflection order places the plus output at index i.

The DFT builder works on the interleaved real embedding of C^(n/2), laying a
complex value z_k out as (Re z_k, Im z_k) at coordinates (2k, 2k+1).  A
rotation by phi on such a pair multiplies z_k by exp(-i*phi), so twiddle
factors are single rotation gates.  Bit-reversal is paid for explicitly: one
swap is a half-turn rotation plus a reflection, two gates per real pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gates import Constant, Gate, LinearAlgorithm, Rotation

QUARTER_TURN = math.pi / 4.0


def _require_power_of_two(n: int, minimum: int) -> None:
    if n < minimum or n & (n - 1):
        raise ValueError(f"dimension must be a power of two >= {minimum}, got {n}")


def wht_matrix(n: int) -> np.ndarray:
    """Dense normalized Walsh-Hadamard matrix, sign (-1)^<bits(k), bits(l)>."""
    _require_power_of_two(n, 2)
    idx = np.arange(n)
    parity = np.zeros((n, n), dtype=int)
    bits = idx[:, None] & idx[None, :]
    while bits.any():
        parity ^= bits & 1
        bits >>= 1
    return np.where(parity == 1, -1.0, 1.0) / math.sqrt(n)


def dft_real_matrix(n: int) -> np.ndarray:
    """Dense real embedding of the normalized (n/2)-point DFT.

    Complex entry N^{-1/2} exp(-2i*pi*k*l/N) becomes the 2x2 block
    [[a, -b], [b, a]] for a = Re, b = Im, under the interleaved layout.
    """
    _require_power_of_two(n, 4)
    N = n // 2
    k = np.arange(N)
    W = np.exp(-2j * np.pi * np.outer(k, k) / N) / math.sqrt(N)
    M = np.empty((n, n))
    M[0::2, 0::2] = W.real
    M[0::2, 1::2] = -W.imag
    M[1::2, 0::2] = W.imag
    M[1::2, 1::2] = W.real
    return M


def _butterfly(i: int, j: int) -> list[Gate]:
    return [Rotation(i, j, QUARTER_TURN), Constant(j, -1.0)]


def _swap(i: int, j: int) -> list[Gate]:
    return [Rotation(i, j, math.pi / 2.0), Constant(j, -1.0)]


def build_wht(n: int) -> LinearAlgorithm:
    """Fast Walsh-Hadamard network: n*log2(n) gates, half rotations, half reflections."""
    _require_power_of_two(n, 2)
    gates: list[Gate] = []
    h = 1
    while h < n:
        for base in range(0, n, 2 * h):
            for k in range(base, base + h):
                gates.extend(_butterfly(k, k + h))
        h *= 2
    return LinearAlgorithm(n=n, gates=tuple(gates), label=f"wht{n}")


def _bit_reverse(x: int, bits: int) -> int:
    out = 0
    for _ in range(bits):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


def build_dft_real(n: int) -> LinearAlgorithm:
    """Radix-2 decimation-in-time network for the real-embedded (n/2)-point DFT.

    Stage order: explicit bit-reversal swaps first, then butterfly stages of
    doubling span.  The twiddle on the bottom input of a butterfly at offset k
    within a stage of span s multiplies by exp(-2i*pi*k/s), i.e. a rotation by
    +2*pi*k/s on its (Re, Im) pair; zero-angle twiddles are omitted.
    """
    _require_power_of_two(n, 4)
    N = n // 2
    bits = N.bit_length() - 1
    gates: list[Gate] = []
    for p in range(N):
        q = _bit_reverse(p, bits)
        if q > p:
            gates.extend(_swap(2 * p, 2 * q))
            gates.extend(_swap(2 * p + 1, 2 * q + 1))
    s = 2
    while s <= N:
        half = s // 2
        for base in range(0, N, s):
            for k in range(half):
                p, q = base + k, base + k + half
                if k:
                    gates.append(Rotation(2 * q, 2 * q + 1, 2.0 * math.pi * k / s))
                gates.extend(_butterfly(2 * p, 2 * q))
                gates.extend(_butterfly(2 * p + 1, 2 * q + 1))
        s *= 2
    return LinearAlgorithm(n=n, gates=tuple(gates), label=f"dft_real{n}")


def build_random(n: int, m: int, seed: int, angle_only: bool = False) -> LinearAlgorithm:
    """Deterministic random algorithm for property sweeps.

    Rotations get uniform pairs and angles in [0, 2*pi).  Unless angle_only,
    each gate is a constant with probability 1/4, with log2|c| uniform on
    [-3, 3] and a random sign; the bounded magnitude keeps inverse-consistency
    residuals benign.
    """
    if m < 1:
        raise ValueError(f"need at least one gate, got m={m}")
    rng = np.random.default_rng(seed)
    gates: list[Gate] = []
    for _ in range(m):
        if not angle_only and rng.random() < 0.25:
            i = int(rng.integers(n))
            c = 2.0 ** rng.uniform(-3.0, 3.0)
            if rng.random() < 0.5:
                c = -c
            gates.append(Constant(i, c))
        else:
            i = int(rng.integers(n))
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            gates.append(Rotation(i, j, float(rng.uniform(0.0, 2.0 * math.pi))))
    return LinearAlgorithm(n=n, gates=tuple(gates), label=f"random{n}x{m}s{seed}")


def build_scaled_bottleneck_fixture(n: int, c: float, k: int) -> LinearAlgorithm:
    """Scale k rows up by c, back down, then run the Walsh-Hadamard network.

    The final matrix is the plain transform, but intermediate steps carry rows
    of norm c, planting a condition-number bottleneck of magnitude exactly c.
    """
    _require_power_of_two(n, 2)
    if c <= 1.0:
        raise ValueError(f"scale must exceed 1, got {c}")
    if not 1 <= k <= n:
        raise ValueError(f"affected-row count {k} out of range [1, {n}]")
    gates = [Constant(i, c) for i in range(k)]
    gates += [Constant(i, 1.0 / c) for i in range(k)]
    gates += list(build_wht(n).gates)
    return LinearAlgorithm(n=n, gates=tuple(gates), label=f"scaled{n}c{c:g}k{k}")


def build_inverse_scaled_fixture(n: int, c: float, k: int) -> LinearAlgorithm:
    """Mirror fixture scaling rows down by c first: the bottleneck sits in M^{-T}."""
    _require_power_of_two(n, 2)
    if c <= 1.0:
        raise ValueError(f"scale must exceed 1, got {c}")
    if not 1 <= k <= n:
        raise ValueError(f"affected-row count {k} out of range [1, {n}]")
    gates = [Constant(i, 1.0 / c) for i in range(k)]
    gates += [Constant(i, c) for i in range(k)]
    gates += list(build_wht(n).gates)
    return LinearAlgorithm(n=n, gates=tuple(gates), label=f"invscaled{n}c{c:g}k{k}")


@dataclass(frozen=True)
class FixtureSpec:
    """CLI-facing description of a builder invocation."""

    kind: str
    n: int
    params: dict = field(default_factory=dict)

    KINDS = ("wht", "dft_real", "random", "scaled", "inverse_scaled")


def build_fixture(spec: FixtureSpec) -> LinearAlgorithm:
    if spec.kind == "wht":
        return build_wht(spec.n)
    if spec.kind == "dft_real":
        return build_dft_real(spec.n)
    if spec.kind == "random":
        return build_random(
            spec.n,
            int(spec.params["m"]),
            int(spec.params.get("seed", 0)),
            bool(spec.params.get("angle_only", False)),
        )
    if spec.kind == "scaled":
        return build_scaled_bottleneck_fixture(spec.n, float(spec.params["c"]), int(spec.params["k"]))
    if spec.kind == "inverse_scaled":
        return build_inverse_scaled_fixture(spec.n, float(spec.params["c"]), int(spec.params["k"]))
    raise ValueError(f"unknown fixture kind {spec.kind!r}, expected one of {FixtureSpec.KINDS}")
