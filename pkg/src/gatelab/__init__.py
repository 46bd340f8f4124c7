"""gatelab: analysis lab for in-place rotation/constant gate algorithms."""

from .gates import (
    Constant,
    Gate,
    LinearAlgorithm,
    ParseError,
    Rotation,
    TrajectoryState,
    advance,
    apply_to_vector,
    is_reflection,
    matrices_at,
    parse_algorithm,
    read_algorithm,
    render_algorithm,
    touched,
    validate,
    write_algorithm,
)
from .builders import (
    FixtureSpec,
    build_dft_real,
    build_fixture,
    build_inverse_scaled_fixture,
    build_random,
    build_scaled_bottleneck_fixture,
    build_wht,
    dft_real_matrix,
    wht_matrix,
)
from .potential import (
    PotentialTrace,
    complex_quasi_entropy,
    projected_quasi_entropy,
    quasi_entropy,
    trace_potential,
)
from .bottleneck import (
    BottleneckReport,
    ChainReport,
    FourierProjectionReport,
    scan_bottlenecks,
    verify_bottleneck_chain,
    verify_fourier_projection_bound,
)
from .directions import (
    DirectionSystem,
    ExtendedBasis,
    VolumeBound,
    extend_basis,
    extract_directions,
    speedup_factor,
    uncertainty_volume_log,
)
from .quantized import (
    QuantizedRunStats,
    UncertaintyCheck,
    UnderflowReport,
    empirical_uncertainty_check,
    quantize,
    simulate,
    underflow_widths,
)

__version__ = "0.1.0"

__all__ = [
    "Constant",
    "Gate",
    "LinearAlgorithm",
    "ParseError",
    "Rotation",
    "TrajectoryState",
    "advance",
    "apply_to_vector",
    "is_reflection",
    "matrices_at",
    "parse_algorithm",
    "read_algorithm",
    "render_algorithm",
    "touched",
    "validate",
    "write_algorithm",
    "FixtureSpec",
    "build_dft_real",
    "build_fixture",
    "build_inverse_scaled_fixture",
    "build_random",
    "build_scaled_bottleneck_fixture",
    "build_wht",
    "dft_real_matrix",
    "wht_matrix",
    "PotentialTrace",
    "complex_quasi_entropy",
    "projected_quasi_entropy",
    "quasi_entropy",
    "trace_potential",
    "BottleneckReport",
    "ChainReport",
    "FourierProjectionReport",
    "scan_bottlenecks",
    "verify_bottleneck_chain",
    "verify_fourier_projection_bound",
    "DirectionSystem",
    "ExtendedBasis",
    "VolumeBound",
    "extend_basis",
    "extract_directions",
    "speedup_factor",
    "uncertainty_volume_log",
    "QuantizedRunStats",
    "UncertaintyCheck",
    "UnderflowReport",
    "empirical_uncertainty_check",
    "quantize",
    "simulate",
    "underflow_widths",
]
