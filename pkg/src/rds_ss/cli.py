"""Command-line interface.

Subcommands: estimate, sensitivity, simulate, study, curves, replay. Every
command that writes to ``--out-dir`` also writes ``manifest.json``; the
manifest hash is stamped on each output file, and ``replay`` re-runs a
manifest to reproduce the outputs byte for byte.

Exit codes: 0 success, 2 validation error, 3 infeasible parameters, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np
import pydantic

from rds_ss import __version__
from rds_ss.classic import mu_mean, mu_vh
from rds_ss.config import CurvesConfig, SimulateConfig, StudyConfig, load_config_file
from rds_ss.domain import DegreeDistribution, SimConfig, repair_sample, validate_sample
from rds_ss.errors import (
    MissingPopulationSize,
    RdsError,
    SampleExceedsPopulation,
    ValidationError,
)
from rds_ss.formats import (
    dump_json,
    format_rows_csv,
    manifest_hash,
    read_json,
    read_sample_csv,
    write_graph,
    write_json,
    write_rows_csv,
    write_sample_csv,
)
from rds_ss.harness import inclusion_curves, preset, run_study
from rds_ss.netgen import sample_configuration_graph, sample_mixing_graph
from rds_ss.ppswor import resolve_seed
from rds_ss.rds_sim import run_rds
from rds_ss.ss import estimate as run_estimate
from rds_ss.ss import sensitivity_sweep

log = logging.getLogger("rds_ss")

STUDY_COLUMNS = ("scenario", "estimator", "replicates", "mean", "bias", "variance", "mse",
                 "se_bias", "exhausted")


def parse_grid(spec: str) -> list[int]:
    """``"min:max:points"`` -> sorted distinct integers, evenly spaced."""
    try:
        lo, hi, pts = spec.split(":")
        lo, hi, pts = int(lo), int(hi), int(pts)
    except ValueError:
        raise ValidationError(f"grid must be 'min:max:points', got {spec!r}") from None
    if pts < 1 or hi < lo:
        raise ValidationError("grid needs points >= 1 and max >= min")
    if pts == 1:
        return [lo]
    return sorted({int(round(x)) for x in np.linspace(lo, hi, pts)})


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    return int(os.environ.get("RDS_SS_THREADS", "1"))


def _file_sha(path) -> Optional[str]:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError:
        return None


def _manifest(command: str, params: dict) -> tuple[dict, str]:
    core = {"command": command, "params": params, "version": __version__}
    return core, manifest_hash(core)


def _finish(out_dir, core, hash_, started):
    if out_dir is None:
        return
    doc = dict(core, manifest_hash=hash_, started=started,
               finished=datetime.now(timezone.utc).isoformat())
    write_json(doc, Path(out_dir) / "manifest.json")


def _now():
    return datetime.now(timezone.utc).isoformat()


# handlers: each takes a fully resolved params dict ------------------------------------


def do_estimate(params: dict, out_dir=None) -> str:
    sample = read_sample_csv(params["input"])
    method = params["method"].upper()
    N = params.get("population_size")
    if method == "SS" and N is None:
        raise MissingPopulationSize("--method ss needs --population-size")
    problems = validate_sample(sample, N)
    if problems:
        if not params.get("repair"):
            raise ValidationError("; ".join(f"{p.code}: {p.message}" for p in problems[:5]))
        sample = repair_sample(sample, N)
        problems = validate_sample(sample, N)
        if problems:
            raise ValidationError("; ".join(f"{p.code}: {p.message}" for p in problems[:5]))
    cfg = SimConfig(params["trials"], params["iterations"], params["seed"],
                    isotonic=params.get("isotonic", True), workers=params.get("threads", 1))
    est = run_estimate(sample, method, N, cfg)
    core, hash_ = _manifest("estimate", _public(params))
    report = {
        "method": method.lower(),
        "estimate": est.value,
        "n": sample.n,
        "assumed_N": N,
        "config": {"trials": cfg.trials, "iterations": cfg.iterations, "seed": cfg.seed,
                   "isotonic": cfg.isotonic},
        "diagnostics": dict(est.diagnostics),
        "manifest_hash": hash_,
    }
    if est.fit is not None:
        report["inclusion"] = {str(k): p for k, p in est.fit.inclusion.probs.items()}
        report["nhat"] = {str(k): c for k, c in est.fit.nhat.counts.items()}
    text = dump_json(report)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "estimate.json").write_text(text, encoding="utf-8")
    return text


def do_sensitivity(params: dict, out_dir=None) -> str:
    sample = read_sample_csv(params["input"])
    problems = validate_sample(sample)
    if problems:
        raise ValidationError("; ".join(f"{p.code}: {p.message}" for p in problems[:5]))
    grid = parse_grid(params["grid"])
    if grid[0] < sample.n:
        raise SampleExceedsPopulation(f"grid minimum {grid[0]} is below the sample size {sample.n}")
    cfg = SimConfig(params["trials"], params["iterations"], params["seed"],
                    isotonic=params.get("isotonic", True), workers=params.get("threads", 1))
    rows = [{"method": "ss", "N": N, "estimate": e.value,
             "moment_residual": e.diagnostics["moment_residual"]}
            for N, e in sensitivity_sweep(sample, grid, cfg)]
    rows.append({"method": "mean", "N": None, "estimate": mu_mean(sample), "moment_residual": None})
    rows.append({"method": "vh", "N": None, "estimate": mu_vh(sample), "moment_residual": None})
    _, hash_ = _manifest("sensitivity", _public(params))
    text = format_rows_csv(rows, ("method", "N", "estimate", "moment_residual"), hash_)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "sensitivity.csv").write_text(text, encoding="utf-8")
    return text


def do_simulate(params: dict, out_dir) -> str:
    cfg = SimulateConfig.model_validate(params["config"])
    seed = params["seed"]
    _, hash_ = _manifest("simulate", _public(params))
    out = Path(out_dir)
    written = []
    for i in range(cfg.graphs):
        if cfg.net is not None:
            g = sample_mixing_graph(cfg.net.params(), [seed, i, 0], cfg.net.mixing())
        else:
            rng = np.random.default_rng([seed, i, 0])
            dist = cfg.configuration.dist()
            NI = int(np.floor(cfg.configuration.prevalence * dist.N + 0.5))
            z = np.zeros(dist.N, dtype=np.int8)
            z[rng.permutation(dist.N)[:NI]] = 1
            g = sample_configuration_graph(dist, rng, z)
        write_graph(g, out / f"graph_{i}.edges", out / f"graph_{i}.nodes.csv", hash_)
        written += [f"graph_{i}.edges", f"graph_{i}.nodes.csv"]
        if cfg.design is not None:
            sample = run_rds(g, cfg.design.design(), [seed, i, 1])
            if sample.exhausted:
                log.warning("graph %d: recruitment exhausted at n=%d", i, sample.n)
            write_sample_csv(sample, out / f"sample_{i}.csv", hash_)
            written.append(f"sample_{i}.csv")
    return "\n".join(written) + "\n"


def _scenarios(cfg: StudyConfig):
    if cfg.preset:
        return preset(cfg.preset, cfg.replicates, cfg.trials)
    return [s.scenario() for s in cfg.scenarios]


def do_study(params: dict, out_dir) -> str:
    cfg = StudyConfig.model_validate(params["config"])
    scenarios = _scenarios(cfg)
    result = run_study(scenarios, params["seed"], params.get("threads", 1))
    _, hash_ = _manifest("study", _public(params))
    rows = [vars(r) for r in result.rows]
    out = Path(out_dir)
    write_rows_csv(rows, STUDY_COLUMNS, out / "study.csv", hash_)
    write_json(dict(result.to_dict(), manifest_hash=hash_), out / "study.json")
    return format_rows_csv(rows, STUDY_COLUMNS)


def do_curves(params: dict, out_dir) -> str:
    cfg = CurvesConfig.model_validate(params["config"])
    seed = params["seed"]
    if cfg.degree_counts is not None:
        dist = DegreeDistribution(cfg.degree_counts, sum(cfg.degree_counts.values()))
    else:
        g = sample_mixing_graph(cfg.net.params(), [seed, 0], cfg.net.mixing())
        deg = g.degrees[g.degrees > 0]
        dist = DegreeDistribution.from_sizes(deg.tolist())
    if cfg.n_list is not None:
        n_list = cfg.n_list
    else:
        n_list = [max(1, int(np.floor(f * dist.N + 0.5))) for f in cfg.fractions]
    rows = inclusion_curves(dist, n_list, SimConfig(cfg.trials, 1, resolve_seed([seed, 1])))
    _, hash_ = _manifest("curves", _public(params))
    cols = ("k", "n", "n_over_N", "pi", "kind")
    write_rows_csv(rows, cols, Path(out_dir) / "curves.csv", hash_)
    return format_rows_csv(rows, cols)


HANDLERS = {
    "estimate": do_estimate,
    "sensitivity": do_sensitivity,
    "simulate": do_simulate,
    "study": do_study,
    "curves": do_curves,
}

# parameters that never change outputs and so stay out of the manifest hash
_RUNTIME_ONLY = ("threads",)


def _public(params: dict) -> dict:
    return {k: v for k, v in params.items() if k not in _RUNTIME_ONLY}


def run_command(command: str, params: dict, out_dir=None) -> str:
    started = _now()
    text = HANDLERS[command](params, out_dir)
    core, hash_ = _manifest(command, _public(params))
    _finish(out_dir, core, hash_, started)
    return text


# argument parsing ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rds-ss", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, sim=True):
        sp.add_argument("--seed", type=int, help="master seed (64-bit); random if omitted")
        sp.add_argument("--threads", type=int, help="worker count (env RDS_SS_THREADS)")
        sp.add_argument("--out-dir", type=Path)
        if sim:
            sp.add_argument("--trials", type=int, default=2000, help="simulated samples per iteration (M)")
            sp.add_argument("--iterations", type=int, default=3, help="fixed-point iterations (r)")
            sp.add_argument("--no-isotonic", action="store_true",
                            help="skip the monotone cleanup of the inclusion map")

    sp = sub.add_parser("estimate", help="estimate a population mean from a sample CSV")
    sp.add_argument("--input", required=True, type=Path)
    sp.add_argument("--method", choices=["ss", "vh", "mean"], default="ss")
    sp.add_argument("--population-size", type=int)
    sp.add_argument("--repair", action="store_true",
                    help="set degree 0 to 1 and cap degrees at N-1 instead of failing")
    common(sp)

    sp = sub.add_parser("sensitivity", help="SS estimate over a grid of population sizes")
    sp.add_argument("--input", required=True, type=Path)
    sp.add_argument("--grid", required=True, help="min:max:points")
    common(sp)

    for name, help_ in (("simulate", "generate graphs and RDS samples"),
                        ("study", "run a replicated simulation study"),
                        ("curves", "tabulate degree -> inclusion probability curves")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, required=(name != "study"))
        if name == "study":
            sp.add_argument("--preset", help="fig1|fig3|fig6|table2 followed by -desk or -paper")
            sp.add_argument("--replicates", type=int)
            sp.add_argument("--trials", type=int)
        common(sp, sim=False)

    sp = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    sp.add_argument("--manifest", required=True, type=Path)
    sp.add_argument("--out-dir", type=Path)
    sp.add_argument("--threads", type=int)
    return p


def params_from_args(args) -> dict:
    cmd = args.command
    seed = args.seed
    if seed is None:
        seed = resolve_seed(None)
        log.warning("no --seed given; using %d", seed)
    if cmd in ("estimate", "sensitivity"):
        params = {
            "input": str(args.input),
            "input_sha256": _file_sha(args.input),
            "trials": args.trials,
            "iterations": args.iterations,
            "isotonic": not args.no_isotonic,
            "seed": seed,
        }
        if cmd == "estimate":
            params.update(method=args.method, population_size=args.population_size,
                          repair=args.repair)
        else:
            params["grid"] = args.grid
        return params
    config = load_config_file(args.config) if args.config else {}
    if cmd == "study":
        if args.preset:
            config["preset"] = args.preset
        if args.replicates:
            config["replicates"] = args.replicates
        if args.trials:
            config["trials"] = args.trials
    if config.get("seed") is not None and args.seed is None:
        seed = int(config["seed"])
    config["seed"] = seed
    return {"config": config, "seed": seed}


def _format_pydantic(e: pydantic.ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "config error: " + "; ".join(parts)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "replay":
            doc = read_json(args.manifest)
            if doc.get("command") not in HANDLERS or not isinstance(doc.get("params"), dict):
                raise ValidationError(f"{args.manifest} is not a run manifest")
            command, params = doc["command"], dict(doc["params"])
            params["threads"] = _threads(args)
            out_dir = args.out_dir
        else:
            command = args.command
            params = params_from_args(args)
            params["threads"] = _threads(args)
            out_dir = args.out_dir
            if command in ("simulate", "study", "curves") and out_dir is None:
                raise ValidationError(f"{command} needs --out-dir")
        text = run_command(command, params, out_dir)
        if command in ("estimate", "sensitivity") or out_dir is None:
            sys.stdout.write(text)
        else:
            sys.stdout.write(f"wrote outputs to {out_dir}\n")
        return 0
    except pydantic.ValidationError as e:
        print(_format_pydantic(e), file=sys.stderr)
        return 2
    except RdsError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
