"""Command-line front end.

    simulate run <preset|--config FILE> [--seed N] [--out DIR] [--traces]
                 [--replications N] [--periods N]
    simulate run-all [--seed N] [--out DIR]
    simulate benchmark [--eta X] [--sigma-factor Y]
    simulate presets

Exit codes: 0 success, 2 usage error, 3 calibration/feasibility failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from hidden_action import __version__
from hidden_action.benchmark import CalibrationError, InfeasibleProblem, calibrate_sigma
from hidden_action.engine import SimulationConfig, replication_seed, run_batch, with_overrides
from hidden_action.model import ContractViolation, ModelParams
from hidden_action.presets import MEMORY_PAIRS, PRESETS, TURBULENCE_PAIRS, scenario_seed
from hidden_action.stats import ScenarioResult, compare_scenarios, welch_t_test

log = logging.getLogger("hidden_action")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CALIBRATION = 3
EXIT_IO = 4

TOOL_NAME = "hidden-action-sim"
TRACE_HEADER = [
    "rep", "t", "incited_effort", "premium", "effort", "theta", "outcome",
    "compensation", "u_principal", "u_agent", "belief_p", "belief_a",
]


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    # repr of a Python float is the shortest string that round-trips
    if isinstance(x, float) or hasattr(x, "dtype"):
        return repr(float(x))
    return str(x)


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


def load_config_file(path: str | Path) -> SimulationConfig:
    """Read a flat config JSON, or the ``config`` block of a manifest.json."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError:
        raise
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(data, dict) and "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a JSON object")
    try:
        return SimulationConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def manifest(config: SimulationConfig, result: ScenarioResult, preset: str | None) -> dict:
    bench = result.benchmark
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "preset": preset,
        "config": config.to_dict(),
        "seed": config.master_seed,
        "replication_seed_scheme": "numpy SeedSequence(master_seed, spawn_key=(rep,)) -> uint64 -> PCG64",
        "first_replication_seed": replication_seed(config.master_seed, 0),
        "sigma": bench.sigma_used,
        "benchmark": bench.to_dict(),
    }


def report(result: ScenarioResult) -> dict:
    return {
        "label": result.label,
        "replications": result.replications,
        "periods": result.periods,
        "final_phi": result.final_phi,
        "pooled_sd": result.pooled_sd,
        "mean_period_sd": result.mean_period_sd,
        "stability_onset": result.stability_period,
        "stability_error": result.stability_error,
        "stalled_steps": int(result.stalls.sum()) if result.stalls is not None else None,
    }


def write_phi_csv(path: Path, result: ScenarioResult) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "phi", "sd", "n"])
        for t in range(result.periods):
            w.writerow([t + 1, _fmt(result.phi[t]), _fmt(result.per_period_sd[t]), result.replications])


def write_traces_csv(path: Path, result: ScenarioResult) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for rep, trace in enumerate(result.traces):
            for p in trace.periods:
                w.writerow([
                    rep, p.t, _fmt(p.incited_effort), _fmt(p.premium), _fmt(p.exerted_effort),
                    _fmt(p.theta_realized), _fmt(p.outcome), _fmt(p.compensation),
                    _fmt(p.principal_utility), _fmt(p.agent_utility),
                    _fmt(p.principal_belief), _fmt(p.agent_belief),
                ])


def write_plot_series(path: Path, result: ScenarioResult) -> None:
    lines = [f"{t + 1} {_fmt(result.phi[t])}" for t in range(result.periods)]
    path.write_text("\n".join(lines) + "\n")


def execute(config: SimulationConfig, out_dir: Path, preset: str | None, traces: bool) -> ScenarioResult:
    result = run_batch(config, keep_traces=traces)
    out_dir.mkdir(parents=True, exist_ok=True)
    _dump_json(out_dir / "manifest.json", manifest(config, result, preset))
    write_phi_csv(out_dir / "phi.csv", result)
    if traces:
        write_traces_csv(out_dir / "traces.csv", result)
    _dump_json(out_dir / "report.json", report(result))
    return result


def resolve_config(args) -> tuple[SimulationConfig, str | None]:
    overrides = {"replications": args.replications, "periods": args.periods}
    if args.config:
        if args.preset:
            raise UsageError("give either a preset name or --config, not both")
        config = load_config_file(args.config)
        preset = None
        if args.seed is not None:
            overrides["master_seed"] = args.seed
    elif args.preset:
        if args.preset not in PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}; choose from: {', '.join(PRESETS)}")
        preset = args.preset
        config = PRESETS[preset].config(master_seed=args.seed or 0)
    else:
        raise UsageError("run needs a preset name or --config FILE")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        return with_overrides(config, **overrides), preset
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_run(args) -> int:
    config, preset = resolve_config(args)
    out = Path(args.out)
    result = execute(config, out, preset, args.traces)
    print(
        f"{config.label or 'custom'}: final phi {result.final_phi:.4f}, pooled sd {result.pooled_sd:.4f}, "
        f"stable from t={result.stability_period} -> {out}"
    )
    return EXIT_OK


def run_all(master_seed: int, out_dir: Path, replications: int | None = None, periods: int | None = None) -> dict:
    results: dict[str, ScenarioResult] = {}
    out_dir.mkdir(parents=True, exist_ok=True)
    plot_dir = out_dir / "plotdata"
    plot_dir.mkdir(exist_ok=True)
    for name, preset in PRESETS.items():
        config = preset.config(scenario_seed(master_seed, name), replications=replications, periods=periods)
        log.info("running %s (seed %d)", name, config.master_seed)
        result = execute(config, out_dir / preset.file_stem, name, traces=False)
        write_plot_series(plot_dir / f"{preset.file_stem}.dat", result)
        results[name] = result

    alpha = 0.01
    comparisons = {
        "alpha": alpha,
        "master_seed": master_seed,
        "memory": [compare_scenarios(results[a], results[b], alpha) for a, b in MEMORY_PAIRS],
        "turbulence": [
            {
                "stable": a,
                "unstable": b,
                "final_phi_stable": results[a].final_phi,
                "final_phi_unstable": results[b].final_phi,
                "final_period_test": welch_t_test(
                    results[a].normalized_efforts[:, -1], results[b].normalized_efforts[:, -1], alpha
                ).to_dict(),
            }
            for a, b in TURBULENCE_PAIRS
        ],
        "stability_onsets": {name: r.stability_period for name, r in results.items()},
    }
    _dump_json(out_dir / "comparisons.json", comparisons)
    return comparisons


def cmd_run_all(args) -> int:
    comparisons = run_all(args.seed or 0, Path(args.out), args.replications, args.periods)
    for c in comparisons["memory"]:
        print(
            f"{c['a']} vs {c['b']}: phi {c['final_phi_a']:.4f} / {c['final_phi_b']:.4f}, "
            f"sd {c['sd_a']:.4f} / {c['sd_b']:.4f} (F p={c['dispersion_test']['p_value']:.3g}), "
            f"stable from {c['stability_a']} / {c['stability_b']}"
        )
    return EXIT_OK


def cmd_benchmark(args) -> int:
    try:
        params = ModelParams(eta=args.eta, sigma_factor=args.sigma_factor, sigma_mode=args.sigma_mode,
                             reservation_utility=args.reservation_utility)
    except ContractViolation as exc:
        raise UsageError(str(exc)) from exc
    sigma, sol = calibrate_sigma(params)
    print(json.dumps({"sigma": sigma, **sol.to_dict()}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_presets(args) -> int:
    for name, p in PRESETS.items():
        print(f"{name:28s} m_P={p.memory_principal or 'inf'} m_A={p.memory_agent or 'inf'} sigma_factor={p.sigma_factor}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate", description="Agent-based hidden-action simulations")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("preset", nargs="?", help="preset name, see `simulate presets`")
    run.add_argument("--config", help="flat JSON config (or a manifest.json to replay)")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", default="out")
    run.add_argument("--traces", action="store_true", help="also write traces.csv")
    run.add_argument("--replications", type=int)
    run.add_argument("--periods", type=int)
    run.set_defaults(func=cmd_run)

    ra = sub.add_parser("run-all", help="run all eight presets and compare them")
    ra.add_argument("--seed", type=int)
    ra.add_argument("--out", default="out")
    ra.add_argument("--replications", type=int)
    ra.add_argument("--periods", type=int)
    ra.set_defaults(func=cmd_run_all)

    bm = sub.add_parser("benchmark", help="print the second-best solution")
    bm.add_argument("--eta", type=float, default=0.5)
    bm.add_argument("--sigma-factor", type=float, default=0.0)
    bm.add_argument("--sigma-mode", choices=["fixed-point", "one-shot"], default="fixed-point")
    bm.add_argument("--reservation-utility", type=float, default=0.0)
    bm.set_defaults(func=cmd_benchmark)

    ps = sub.add_parser("presets", help="list the compiled-in scenarios")
    ps.set_defaults(func=cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"simulate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CalibrationError, InfeasibleProblem) as exc:
        print(f"simulate: calibration failed: {exc}", file=sys.stderr)
        if isinstance(exc, CalibrationError):
            print(f"simulate: sigma iterates: {exc.iterates[-2:]}", file=sys.stderr)
        return EXIT_CALIBRATION
    except OSError as exc:
        print(f"simulate: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
