"""Command-line front end: ``tbswap --config FILE --out DIR``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as dt
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

from . import __version__, preset_path
from .config_io import ConfigError, config_sections, parse_config
from .detection import DETECTOR_ORDER, DetectorParams, format_event
from .experiment import ExperimentConfig, ScanResult, beta_grid, run, simulate_events, summarize
from .experiment.oracle import oracle_truncated_enumeration
from .source import SourceParams

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
CSV_HEADER = (
    "beta_rad",
    "conditioned_counts",
    "unconditioned_counts",
    "pulses",
    "window_m2",
    "window_m1",
    "window_0",
    "window_p1",
    "window_p2",
)


@dataclass
class RunManifest:
    config_path: str | None
    mode: str
    seed: int
    outputs: dict[str, str]
    version: str = __version__
    timestamp: str = ""


def _num(x) -> str:
    # repr of a Python float is the shortest round-tripping form
    return repr(float(x))


def _json_float(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def summary_document(scan: ScanResult) -> dict:
    s = summarize(scan)
    fc = scan.fit_conditioned
    doc = {
        "V": _json_float(s.V),
        "sigma_V": _json_float(s.sigma_V),
        "V_reported": _json_float(s.V_reported),
        "F2": _json_float(s.F2),
        "classification": s.classification.value,
        "sigma_above_bell": _json_float(s.sigma_above_bell),
        "phase_offset": _json_float(fc.phase_offset),
        "amplitude": _json_float(fc.amplitude),
        "V_unconditioned": _json_float(s.V_unconditioned),
        "sigma_V_unconditioned": _json_float(s.sigma_V_unconditioned),
        "seed": scan.config.master_seed,
        "mode": scan.config.mode,
    }
    for key in ("raw_conditioned", "raw_unconditioned", "simulated_pulses"):
        if key in scan.metadata:
            doc[key] = int(scan.metadata[key])
    doc["config"] = config_sections(scan.config)
    return doc


def write_csv(scan: ScanResult, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i, beta in enumerate(scan.betas):
            row = [beta, scan.conditioned[i], scan.unconditioned[i], scan.pulses[i], *scan.windows[i]]
            w.writerow([_num(x) for x in row])


def write_event_log(config: ExperimentConfig, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# pulse\tclicks\tbsa_success\tdelta_tau\n")
        for bi, beta in enumerate(config.betas):
            fh.write(f"# beta_index={bi} beta_rad={_num(beta)}\n")
            for ev in simulate_events(config, bi, config.event_log):
                fh.write(format_event(ev) + "\n")


def emit_results(scan: ScanResult, manifest: RunManifest, out_dir: Path) -> RunManifest:
    """Write scan.csv, summary.json, optionally events.log, then manifest.json."""
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {"csv": out_dir / "scan.csv", "summary": out_dir / "summary.json"}
    write_csv(scan, outputs["csv"])
    text = json.dumps(summary_document(scan), indent=2, allow_nan=False)
    outputs["summary"].write_text(text + "\n", encoding="utf-8")
    if scan.config.event_log > 0 and scan.config.mode == "monte_carlo":
        outputs["events"] = out_dir / "events.log"
        write_event_log(scan.config, outputs["events"])
    manifest.outputs = {k: str(v) for k, v in outputs.items()}
    manifest.timestamp = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
    (out_dir / "manifest.json").write_text(json.dumps(dataclasses.asdict(manifest), indent=2) + "\n", encoding="utf-8")
    return manifest


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.mode is not None:
        changes["mode"] = "analytic" if args.mode == "analytic" else "monte_carlo"
    if args.pulses is not None:
        if args.pulses <= 0:
            raise ConfigError(f"--pulses must be > 0, got {args.pulses}")
        changes["n_pulses"] = args.pulses
    if args.scan_points is not None:
        if args.scan_points <= 0:
            raise ConfigError(f"--scan-points must be > 0, got {args.scan_points}")
        changes["betas"] = beta_grid(args.scan_points)
    try:
        return dataclasses.replace(config, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def selftest(pulses: int = 300_000, seed: int = 11, out=sys.stdout) -> bool:
    """Monte Carlo vs exact enumeration on two small noisy configurations."""
    dets = {d: DetectorParams("test", 0.6, 1.2e-4) for d in DETECTOR_ORDER}
    ok = True
    for mu, xi in ((0.062, 1.0), (0.2, 0.9)):
        cfg = ExperimentConfig(
            source=SourceParams(mu=mu, xi=xi, max_pairs=2),
            detectors=dets,
            n_pulses=pulses,
            master_seed=seed,
            mode="monte_carlo",
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ref = oracle_truncated_enumeration(cfg)
        fit = run(cfg).fit_conditioned
        z = (fit.V - ref.V) / fit.sigma_V
        passed = abs(z) <= 3.0
        ok &= passed
        print(
            f"{'PASS' if passed else 'FAIL'} mu={mu} xi={xi}: MC V={fit.V:.4f}+-{fit.sigma_V:.4f} "
            f"oracle V={ref.V:.4f} ({z:+.2f} sigma)",
            file=out,
        )
    return ok


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tbswap", description="Simulate a time-bin entanglement swapping phase scan.")
    p.add_argument("--config", type=str, help="experiment INI file; 'lab' selects the shipped preset")
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--mode", choices=("analytic", "mc"), help="override run.mode")
    p.add_argument("--out", type=Path, default=Path("tbswap-out"), help="output directory (default: %(default)s)")
    p.add_argument("--pulses", type=int, help="override run.n_pulses (pulses per phase point)")
    p.add_argument("--scan-points", type=int, help="evenly spaced analyzer phases over [0, 2pi)")
    p.add_argument("--selftest", action="store_true", help="compare Monte Carlo with exact enumeration and exit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.selftest:
        try:
            return EXIT_OK if selftest() else EXIT_RUNTIME
        except Exception as exc:  # noqa: BLE001
            print(f"tbswap: selftest error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME

    config_path = None
    try:
        if args.config:
            config_path = preset_path("lab") if args.config == "lab" else Path(args.config)
            config = parse_config(config_path)
        else:
            config = ExperimentConfig()
        config = apply_overrides(config, args)
    except ConfigError as exc:
        print(f"tbswap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        scan = run(config)
        manifest = RunManifest(
            config_path=None if config_path is None else str(config_path),
            mode=config.mode,
            seed=config.master_seed,
            outputs={},
        )
        emit_results(scan, manifest, args.out)
    except Exception as exc:  # noqa: BLE001
        print(f"tbswap: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    s = summarize(scan)
    print(f"V = {s.V:.4f} +- {s.sigma_V:.4f}  F2 = {s.F2:.4f}  {s.classification.value}")
    print(f"results in {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
