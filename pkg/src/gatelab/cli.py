"""Command-line entry point.

Subcommands: build, validate, trace, scan, chain, lemma, extract, volume,
simulate, underflow.  Machine-readable outputs (CSV or JSON) carry a
schema_version marker.  Numeric options accept a power literal ``B^E``
(decimal base, integer exponent), e.g. ``--eps 2^-10``.

Exit codes: 0 success, 1 usage or I/O error, 2 a verified inequality failed
beyond tolerance (regression signal).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import builders, bottleneck, directions, gates, potential, quantized

SCHEMA_VERSION = 1
SLACK_TOL = 1e-7


def parse_number(text: str) -> float:
    """Plain float or power literal ``B^E`` with integer exponent."""
    if "^" in text:
        base_text, _, exp_text = text.partition("^")
        return float(base_text) ** int(exp_text)
    return float(text)


def parse_operator(spec: str, n: int) -> np.ndarray | None:
    """Operator spec: ``id``, ``proj:i,j,...`` (coordinate projection), or ``file:PATH``."""
    if spec == "id":
        return None
    if spec.startswith("proj:"):
        coords = [int(tok) for tok in spec[5:].split(",") if tok]
        P = np.zeros((n, n))
        for i in coords:
            if not 0 <= i < n:
                raise ValueError(f"projection coordinate {i} out of range for n={n}")
            P[i, i] = 1.0
        return P
    if spec.startswith("file:"):
        P = np.loadtxt(spec[5:])
        if P.shape != (n, n):
            raise ValueError(f"operator file has shape {P.shape}, expected ({n}, {n})")
        return P
    raise ValueError(f"bad operator spec {spec!r}; use id, proj:i,j,..., or file:PATH")


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_json(payload: dict, path: str | None) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", path)


def _load(path: str) -> gates.LinearAlgorithm:
    return gates.read_algorithm(path)


def _vectors_payload(vecs) -> list[list[float]]:
    return [[float(x) for x in v] for v in vecs]


def cmd_build(args: argparse.Namespace) -> int:
    sources = [
        ("wht", args.wht),
        ("dft_real", args.dft),
        ("random", args.random),
        ("scaled", args.scaled),
        ("inverse_scaled", args.inverse_scaled),
    ]
    chosen = [(kind, value) for kind, value in sources if value is not None]
    if len(chosen) != 1:
        raise ValueError("exactly one of --wht/--dft/--random/--scaled/--inverse-scaled is required")
    kind, value = chosen[0]
    if kind in ("wht", "dft_real"):
        algorithm = builders.build_fixture(builders.FixtureSpec(kind, int(value)))
    elif kind == "random":
        parts = value.split(",")
        if len(parts) not in (3, 4):
            raise ValueError("--random expects n,m,seed[,angle_only]")
        params = {"m": int(parts[1]), "seed": int(parts[2]), "angle_only": len(parts) == 4}
        algorithm = builders.build_fixture(builders.FixtureSpec(kind, int(parts[0]), params))
    else:
        parts = value.split(",")
        if len(parts) != 3:
            raise ValueError(f"--{kind.replace('_', '-')} expects n,c,k")
        params = {"c": parse_number(parts[1]), "k": int(parts[2])}
        algorithm = builders.build_fixture(builders.FixtureSpec(kind, int(parts[0]), params))
    gates.write_algorithm(algorithm, args.output)
    sys.stdout.write(f"wrote {args.output} (n={algorithm.n}, m={algorithm.m})\n")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    algorithm = _load(args.algorithm)
    diag = gates.validate(algorithm)
    _emit_json(
        {
            "n": diag.n,
            "m": diag.m,
            "max_residual": diag.max_residual,
            "max_kappa": diag.max_kappa,
            "kappas": diag.kappas,
            "stable": bool(diag.stable),
        },
        args.output,
    )
    return 0 if diag.stable else 2


def cmd_trace(args: argparse.Namespace) -> int:
    algorithm = _load(args.algorithm)
    P = parse_operator(args.P, algorithm.n)
    Q = parse_operator(args.Q, algorithm.n)
    trace = potential.trace_potential(algorithm, P, Q)
    lines = [f"# schema_version={SCHEMA_VERSION}", "t,phi,delta,bound,touched_i,touched_j"]
    for t in range(len(trace.values)):
        rows = trace.touched_sets[t]
        ti = str(rows[0]) if rows else ""
        tj = str(rows[1]) if len(rows) > 1 else ""
        lines.append(
            f"{t},{trace.values[t]!r},{trace.per_step_delta[t]!r},"
            f"{trace.per_step_bound[t]!r},{ti},{tj}"
        )
    _emit("\n".join(lines) + "\n", args.output)
    worst = max(
        (d - b for d, b in zip(trace.per_step_delta, trace.per_step_bound)), default=0.0
    )
    return 0 if worst <= SLACK_TOL else 2


def cmd_scan(args: argparse.Namespace) -> int:
    algorithm = _load(args.algorithm)
    P = parse_operator(args.P, algorithm.n)
    Q = parse_operator(args.Q, algorithm.n)
    report = bottleneck.scan_bottlenecks(
        algorithm, P, Q, R=args.R, include_constants=args.include_constants
    )
    _emit_json(
        {
            "R": report.R,
            "t_star": report.t_star,
            "affected": list(report.affected),
            "lhs": report.lhs,
            "rhs": report.rhs,
            "slack": report.slack,
            "per_step": [
                {"t": t, "lhs": value}
                for t, value in zip(report.window_starts, report.per_step_lhs)
            ],
            "phi_final": report.phi_final,
            "phi_identity": report.phi_identity,
            "m": report.m,
            "m_padded": report.m_padded,
        },
        args.output,
    )
    return 0 if report.slack >= -SLACK_TOL else 2


def cmd_chain(args: argparse.Namespace) -> int:
    algorithm = _load(args.algorithm)
    P = parse_operator(args.P, algorithm.n)
    Q = parse_operator(args.Q, algorithm.n)
    report = bottleneck.verify_bottleneck_chain(algorithm, P, Q, R=args.R)
    slacks = [report.triangle_slack, report.min_window_slack, report.max_vs_average_slack,
              report.scan.slack]
    _emit_json(
        {
            "R": report.R,
            "m": report.m,
            "m_padded": report.m_padded,
            "phi_identity": report.phi_identity,
            "phi_final": report.phi_final,
            "triangle": {
                "lhs": report.triangle_lhs,
                "rhs": report.triangle_rhs,
                "slack": report.triangle_slack,
            },
            "windows": [
                {
                    "start": link.start,
                    "affected": list(link.affected),
                    "delta_abs": link.delta_abs,
                    "bound": link.bound,
                    "slack": link.slack,
                }
                for link in report.windows
            ],
            "min_window_slack": report.min_window_slack,
            "max_endpoint_product": report.max_endpoint_product,
            "average_requirement": report.average_requirement,
            "max_vs_average_slack": report.max_vs_average_slack,
            "scan": {"lhs": report.scan.lhs, "rhs": report.scan.rhs, "slack": report.scan.slack},
        },
        args.output,
    )
    return 0 if min(slacks) >= -SLACK_TOL else 2


def cmd_lemma(args: argparse.Namespace) -> int:
    unit = potential.sweep_unit_pair_bound(trials=args.pair_trials, seed=args.seed)
    orth = potential.sweep_orthogonal_change_bound(trials=args.trials, seed=args.seed)
    nonsing = potential.sweep_nonsingular_change_bound(trials=args.trials, seed=args.seed)
    proj = [
        bottleneck.sweep_fourier_projection_bound(n, trials=args.proj_trials, seed=args.seed)
        for n in args.n_list
    ]
    _emit_json(
        {
            "unit_pair_bound": asdict(unit),
            "orthogonal_change_bound": asdict(orth),
            "nonsingular_change_bound": asdict(nonsing),
            "fourier_projection_bound": [asdict(r) for r in proj],
        },
        args.output,
    )
    violated = (
        unit.violations or orth.violations or nonsing.violations
        or any(r.violations for r in proj)
    )
    return 2 if violated else 0


def cmd_extract(args: argparse.Namespace) -> int:
    algorithm = _load(args.algorithm)
    over, under = directions.extract_directions(
        algorithm,
        tau=args.tau,
        unrestricted=args.unrestricted,
        require_wht_target=not args.no_target_check,
    )

    def system_payload(system: directions.DirectionSystem) -> dict:
        return {
            "kind": system.kind,
            "size": system.size,
            "steps": system.steps,
            "coords": system.coords,
            "magnitudes": system.magnitudes,
            "vectors": _vectors_payload(system.vectors),
        }

    _emit_json(
        {
            "tau": over.threshold,
            "overflow": system_payload(over),
            "underflow": system_payload(under),
        },
        args.output,
    )
    return 0


def cmd_volume(args: argparse.Namespace) -> int:
    algorithm = _load(args.algorithm)
    _, under = directions.extract_directions(algorithm, tau=args.tau)
    basis = directions.extend_basis(under, algorithm.n)
    b = args.b if args.b is not None else directions.speedup_factor(algorithm)
    bound = directions.uncertainty_volume_log(basis, b=b)
    _emit_json(
        {
            "tau": under.threshold,
            "b": bound.b,
            "n_prime": bound.n_prime,
            "gammas": [float(g) for g in basis.gammas],
            "sum_log2_gamma": bound.sum_log2_gamma,
            "closed_form": bound.closed_form,
        },
        args.output,
    )
    return 0 if bound.sum_log2_gamma >= bound.closed_form - 1e-9 else 2


def cmd_simulate(args: argparse.Namespace) -> int:
    algorithm = _load(args.algorithm)
    stats = quantized.simulate(
        algorithm,
        epsilon=args.eps,
        sigma=args.sigma,
        samples=args.samples,
        seed=args.seed,
        word_budget=args.W,
    )
    lines = [f"# schema_version={SCHEMA_VERSION}", "t,i,mean_bits,max_abs,overflow_flag"]
    steps, n = stats.mean_bits.shape
    for t in range(steps):
        for i in range(n):
            lines.append(
                f"{t},{i},{stats.mean_bits[t, i]!r},{stats.max_abs[t, i]!r},"
                f"{int(stats.overflow_flags[t, i])}"
            )
    _emit("\n".join(lines) + "\n", args.output)
    if args.summary is not None:
        flagged = stats.flagged_cells()
        _emit_json(
            {
                "epsilon": stats.epsilon,
                "sigma": stats.sigma,
                "samples": stats.samples,
                "seed": args.seed,
                "word_budget": stats.word_budget,
                "n": algorithm.n,
                "m": algorithm.m,
                "overflow_count": len(flagged),
                "flagged": [[t, i] for t, i in flagged],
                "max_mean_bits": float(stats.mean_bits.max()),
                "input_row_max_mean_bits": float(stats.mean_bits[0].max()),
            },
            args.summary,
        )
    return 0


def cmd_underflow(args: argparse.Namespace) -> int:
    algorithm = _load(args.algorithm)
    report = quantized.underflow_widths(algorithm, epsilon=args.eps, tau=args.tau)
    _emit_json(
        {
            "epsilon": report.epsilon,
            "tau": report.tau,
            "n_prime": report.system.size,
            "widths": [float(w) for w in report.widths],
            "directions": _vectors_payload(report.directions),
            "volume_log": report.volume_log,
            "closed_form": report.volume.closed_form,
        },
        args.output,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gatelab",
        description="Analysis lab for in-place rotation/constant gate algorithms.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker-thread cap; the current implementation is single-threaded "
        "for bit-reproducibility, larger values are accepted and ignored",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="write a reference algorithm to a gate file")
    p.add_argument("--wht", type=int, default=None, metavar="N")
    p.add_argument("--dft", type=int, default=None, metavar="N")
    p.add_argument("--random", default=None, metavar="N,M,SEED[,angle_only]")
    p.add_argument("--scaled", default=None, metavar="N,C,K")
    p.add_argument("--inverse-scaled", dest="inverse_scaled", default=None, metavar="N,C,K")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("validate", help="replay and report inverse/condition diagnostics")
    p.add_argument("algorithm")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("trace", help="CSV trace of the potential along the trajectory")
    p.add_argument("algorithm")
    p.add_argument("--P", default="id")
    p.add_argument("--Q", default="id")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("scan", help="window scan for touched-row bottlenecks")
    p.add_argument("algorithm")
    p.add_argument("--R", type=int, default=1)
    p.add_argument("--P", default="id")
    p.add_argument("--Q", default="id")
    p.add_argument("--include-constants", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("chain", help="verify each link of the averaged bottleneck bound")
    p.add_argument("algorithm")
    p.add_argument("--R", type=int, default=1)
    p.add_argument("--P", default="id")
    p.add_argument("--Q", default="id")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("lemma", help="randomized sweep of the potential inequalities")
    p.add_argument("--pair-trials", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--proj-trials", type=int, default=100)
    p.add_argument("--n-list", dest="n_list", default="8,16,32",
                   type=lambda s: [int(tok) for tok in s.split(",") if tok])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_lemma)

    p = sub.add_parser("extract", help="extract overflow/underflow direction systems")
    p.add_argument("algorithm")
    p.add_argument("--tau", type=parse_number, default=None)
    p.add_argument("--unrestricted", action="store_true")
    p.add_argument("--no-target-check", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("volume", help="uncertainty-volume lower bounds from the underflow basis")
    p.add_argument("algorithm")
    p.add_argument("--tau", type=parse_number, default=None)
    p.add_argument("--b", type=parse_number, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("simulate", help="quantized replay with bit-usage statistics")
    p.add_argument("algorithm")
    p.add_argument("--eps", type=parse_number, required=True)
    p.add_argument("--sigma", type=parse_number, default=1.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--W", type=parse_number, default=32.0)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--summary", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("underflow", help="per-direction uncertainty widths")
    p.add_argument("algorithm")
    p.add_argument("--eps", type=parse_number, required=True)
    p.add_argument("--tau", type=parse_number, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_underflow)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except gates.ParseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
