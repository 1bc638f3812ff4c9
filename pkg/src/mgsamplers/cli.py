"""Experiment runner CLI: ``mgs run|validate|report|oracle``.

Experiment specifications are diffable ``key = value`` text files; all
outputs are schema-headed CSV plus a plain-text run manifest that fully
reproduces the run (exit codes: 0 ok, 1 cell failures, 2 invalid spec).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .diagnostics import DiagnosticsReport, summarize
from .integrator import IntegratorConfig
from .kinetics import KineticParams
from .oracle import exponential_case_study, numeric_rho1, oracle_cache_rows
from .samplers import SamplerConfig, run_sampler
from .targets import (
    BIMODAL_2D_SIGN_NOTE,
    bimodal_1d_target,
    bimodal_2d_target,
    blr_target,
    exponential_target,
    gamma_target,
    load_dataset,
    synthetic_logistic_dataset,
    truncated_gaussian_target,
)

WORKER_ENV = "MGS_WORKERS"
SEED_STRIDE = 7919  # cell seed = master seed + stride * cell index

TARGET_NAMES = ("exponential", "truncated_gaussian", "gamma",
                "bimodal_1d", "bimodal_2d", "blr")
SAMPLER_NAMES = ("mg_hmc", "mg_ss_analytic", "mg_hmc_analytic", "std_slice")


class SpecError(ValueError):
    pass


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _parse_kv_file(path):
    path = Path(path)
    if not path.exists():
        raise SpecError(f"spec file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise SpecError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = text.partition("=")
        values[key.strip()] = val.strip()
    return values


def _floats(raw):
    return [float(v) for v in raw.replace(",", " ").split()]


@dataclass
class ExperimentSpec:
    experiment_id: str
    output_dir: str
    target: str
    samplers: list
    a_grid: list
    iterations: int
    burn_in: int
    seed: int
    replications: int = 1
    m: float = None
    theta: float = 1.0
    r: float = 2.0
    prior_variance: float = 100.0
    dataset_path: str = None
    label_column: int = -1
    synthetic_instances: int = 250
    synthetic_features: int = 7
    data_seed: int = 0
    initial_position: list = None
    base_step: float = None
    step_jitter: tuple = None
    decay_init: float = None
    decay_rate: float = 0.9
    leapfrog_center: int = 100
    leapfrog_halfwidth: int = 20
    reflection: str = "auto"
    slice_width: float = 1.0
    max_doublings: int = 32
    raw: dict = field(default_factory=dict)


def parse_spec(path) -> ExperimentSpec:
    raw = _parse_kv_file(path)

    def need(key):
        if key not in raw:
            raise SpecError(f"{path}: missing required key '{key}'")
        return raw[key]

    def get(key, default=None):
        return raw.get(key, default)

    try:
        samplers = need("samplers").replace(",", " ").split()
        for s in samplers:
            if s not in SAMPLER_NAMES:
                raise SpecError(f"{path}: unknown sampler '{s}'")
        target = need("target")
        if target not in TARGET_NAMES:
            raise SpecError(f"{path}: unknown target '{target}'")
        spec = ExperimentSpec(
            experiment_id=need("experiment"),
            output_dir=need("output_dir"),
            target=target,
            samplers=samplers,
            a_grid=_floats(need("a_grid")),
            iterations=int(need("iterations")),
            burn_in=int(need("burn_in")),
            seed=int(need("seed")),
            replications=int(get("replications", 1)),
            theta=float(get("theta", 1.0)),
            r=float(get("r", 2.0)),
            prior_variance=float(get("prior_variance", 100.0)),
            dataset_path=get("dataset_path"),
            label_column=int(get("label_column", -1)),
            synthetic_instances=int(get("synthetic_instances", 250)),
            synthetic_features=int(get("synthetic_features", 7)),
            data_seed=int(get("data_seed", 0)),
            decay_rate=float(get("decay_rate", 0.9)),
            leapfrog_center=int(get("leapfrog_center", 100)),
            leapfrog_halfwidth=int(get("leapfrog_halfwidth", 20)),
            reflection=get("reflection", "auto"),
            slice_width=float(get("slice_width", 1.0)),
            max_doublings=int(get("max_doublings", 32)),
            raw=raw,
        )
        if "initial_position" in raw:
            spec.initial_position = _floats(raw["initial_position"])
        if "base_step" in raw:
            spec.base_step = float(raw["base_step"])
        if "decay_init" in raw:
            spec.decay_init = float(raw["decay_init"])
        if "step_jitter" in raw:
            jit = _floats(raw["step_jitter"])
            if len(jit) != 2:
                raise SpecError(f"{path}: step_jitter needs two values")
            spec.step_jitter = tuple(jit)
        if "m" in raw:
            spec.m = float(raw["m"])
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from exc

    if not (0 <= spec.burn_in < spec.iterations):
        raise SpecError(f"{path}: burn_in must be smaller than iterations")
    if spec.replications < 1:
        raise SpecError(f"{path}: replications must be >= 1")
    if not spec.a_grid:
        raise SpecError(f"{path}: a_grid is empty")
    if spec.reflection not in ("auto", "on", "off"):
        raise SpecError(f"{path}: reflection must be auto, on or off")
    if "mg_hmc" in spec.samplers:
        # step size and mass are problem-specific: no silent defaults
        if spec.base_step is None:
            raise SpecError(f"{path}: mg_hmc requires an explicit base_step")
        if spec.m is None:
            raise SpecError(f"{path}: mg_hmc requires an explicit m")
    if spec.m is None:
        spec.m = 1.0
    if spec.target == "blr" and spec.dataset_path is not None:
        if not Path(spec.dataset_path).exists():
            raise SpecError(f"{path}: dataset_path does not exist: {spec.dataset_path}")
    if spec.target == "gamma" and spec.r <= 1:
        raise SpecError(f"{path}: gamma target requires r > 1")
    return spec


def build_target(spec: ExperimentSpec):
    if spec.target == "exponential":
        return exponential_target(spec.theta)
    if spec.target == "truncated_gaussian":
        return truncated_gaussian_target(spec.theta)
    if spec.target == "gamma":
        return gamma_target(spec.r, spec.theta)
    if spec.target == "bimodal_1d":
        return bimodal_1d_target()
    if spec.target == "bimodal_2d":
        return bimodal_2d_target()
    if spec.target == "blr":
        if spec.dataset_path:
            data = load_dataset(spec.dataset_path, label_column=spec.label_column)
        else:
            data = synthetic_logistic_dataset(
                spec.synthetic_instances, spec.synthetic_features, spec.data_seed)
        return blr_target(data, spec.prior_variance)
    raise SpecError(f"unknown target {spec.target}")


def _default_initial_position(target):
    x0 = np.zeros(target.dim)
    x0[np.isfinite(target.lower)] = 1.0  # interior point for half-line supports
    return x0


def _integrator_config(spec: ExperimentSpec):
    if spec.base_step is None:
        return None
    jitter = spec.step_jitter or (0.8 * spec.base_step, 1.2 * spec.base_step)
    reflection = {"auto": None, "on": True, "off": False}[spec.reflection]
    return IntegratorConfig(
        base_step=spec.base_step,
        step_jitter_range=jitter,
        decay_init=spec.decay_init,
        decay_rate=spec.decay_rate,
        leapfrog_center=spec.leapfrog_center,
        leapfrog_halfwidth=spec.leapfrog_halfwidth,
        reflection_enabled=reflection,
    )


def iter_cells(spec: ExperimentSpec):
    idx = 0
    for kind in spec.samplers:
        a_values = spec.a_grid if kind != "std_slice" else [1.0]
        for a in a_values:
            for rep in range(spec.replications):
                yield idx, kind, a, rep
                idx += 1


def _cell_dir(run_dir: Path, kind: str, a: float, rep: int) -> Path:
    return run_dir / "cells" / f"{kind}_a{a:g}_rep{rep}"


def _write_trace_csv(path: Path, trace, burn_in: int):
    dim = trace.samples.shape[1]
    header = ",".join(f"x{d}" for d in range(dim)) + ",hamiltonian,accepted"
    lines = [header]
    hams = trace.hamiltonians[burn_in:]
    acc = trace.accepted[burn_in:]
    for i in range(trace.samples.shape[0]):
        coords = ",".join(f"{v:.17g}" for v in trace.samples[i])
        lines.append(f"{coords},{hams[i]:.17g},{int(acc[i])}")
    _atomic_write(path, "\n".join(lines) + "\n")


def run_cell(spec: ExperimentSpec, kind: str, a: float, rep: int, cell_index: int):
    target = build_target(spec)
    x0 = spec.initial_position or _default_initial_position(target)
    config = SamplerConfig(
        sampler_kind=kind,
        kinetic=KineticParams(a=a, m=spec.m),
        iterations=spec.iterations,
        burn_in=spec.burn_in,
        seed=spec.seed + SEED_STRIDE * cell_index,
        initial_position=np.asarray(x0, dtype=float),
        integrator=_integrator_config(spec),
    )
    kwargs = {}
    if kind == "std_slice":
        kwargs = {"width": spec.slice_width, "max_doublings": spec.max_doublings}
    trace = run_sampler(target, config, **kwargs)
    report = summarize(trace, target)
    return config.seed, trace, report


def _cell_worker(args):
    spec, idx, kind, a, rep = args
    run_dir = Path(spec.output_dir)
    cell_dir = _cell_dir(run_dir, kind, a, rep)
    cell_dir.mkdir(parents=True, exist_ok=True)
    try:
        seed, trace, report = run_cell(spec, kind, a, rep, idx)
    except Exception as exc:  # noqa: BLE001 - per-cell isolation
        _atomic_write(cell_dir / "error.log", f"{type(exc).__name__}: {exc}\n")
        return idx, kind, a, rep, None, f"{type(exc).__name__}: {exc}"
    _write_trace_csv(cell_dir / "trace.csv", trace, spec.burn_in)
    _atomic_write(cell_dir / "diagnostics.csv", report.to_csv())
    _atomic_write(cell_dir / "diagnostics.txt", report.to_key_values())
    row = (f"{spec.experiment_id},{kind},{a:.17g},{rep},{seed},"
           f"{spec.iterations},{spec.burn_in},{report.to_csv_row()}")
    return idx, kind, a, rep, row, None


SUMMARY_HEADER = ("experiment,sampler,a,rep,seed,iterations,burn_in,"
                  + DiagnosticsReport.csv_header())


def run_experiment(spec_path) -> int:
    try:
        spec = parse_spec(spec_path)
    except SpecError as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return 2
    run_dir = Path(spec.output_dir)
    manifest_path = run_dir / "manifest.txt"
    if manifest_path.exists():
        for line in manifest_path.read_text().splitlines():
            if line.startswith("experiment = ") and line != f"experiment = {spec.experiment_id}":
                print(f"output_dir {run_dir} already holds a different experiment", file=sys.stderr)
                return 2
    run_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    cells = [(spec, idx, kind, a, rep) for idx, kind, a, rep in iter_cells(spec)]
    workers = int(os.environ.get(WORKER_ENV, "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_worker, cells))
    else:
        results = [_cell_worker(c) for c in cells]
    rows = []
    failures = []
    for idx, kind, a, rep, row, error in sorted(results):
        if error is None:
            rows.append(row)
        else:
            failures.append(f"{kind} a={a:g} rep={rep}: {error}")
    _atomic_write(run_dir / "summary.csv", "\n".join([SUMMARY_HEADER] + rows) + "\n")
    _write_summary_table(run_dir, rows)
    manifest = [
        f"experiment = {spec.experiment_id}",
        f"code_version = {__version__}",
        f"numba_enabled = {int(_kernels.NUMBA_ENABLED)}",
        f"master_seed = {spec.seed}",
        f"wall_time_s = {time.time() - started:.3f}",
        f"cells = {len(cells)}",
        f"cell_failures = {len(failures)}",
    ]
    if spec.target == "bimodal_2d":
        manifest.append(f"bimodal_2d_note = {BIMODAL_2D_SIGN_NOTE}")
    manifest.extend(f"{k} = {v}" for k, v in sorted(spec.raw.items()))
    _atomic_write(manifest_path, "\n".join(manifest) + "\n")
    if failures:
        _atomic_write(run_dir / "errors.log", "\n".join(failures) + "\n")
        print(f"{len(failures)} cell(s) failed; see {run_dir / 'errors.log'}", file=sys.stderr)
        return 1
    return 0


def _write_summary_table(run_dir: Path, rows):
    """Pivot: one row per a, (min_ess, rho1, acceptance) per sampler."""
    by_cell = {}
    samplers = []
    a_values = []
    for row in rows:
        parts = row.split(",")
        sampler, a = parts[1], float(parts[2])
        acc, min_ess, rho1 = float(parts[7]), float(parts[9]), float(parts[11])
        by_cell.setdefault((sampler, a), []).append((min_ess, rho1, acc))
        if sampler not in samplers:
            samplers.append(sampler)
        if a not in a_values:
            a_values.append(a)
    header = ["a"]
    for s in samplers:
        header += [f"{s}_min_ess", f"{s}_rho1", f"{s}_acceptance"]
    lines = [",".join(header)]
    for a in sorted(a_values):
        fields = [f"{a:g}"]
        for s in samplers:
            cell = by_cell.get((s, a))
            if cell:
                arr = np.array(cell)
                fields += [f"{v:.6g}" for v in arr.mean(axis=0)]
            else:
                fields += ["", "", ""]
        lines.append(",".join(fields))
    _atomic_write(run_dir / "summary_table.csv", "\n".join(lines) + "\n")


def compare_report(run_dirs):
    """Merge summary tables of completed runs of the same experiment."""
    if len(run_dirs) < 2:
        raise ValueError("report needs at least two run directories")
    merged = []
    experiment = None
    for d in run_dirs:
        d = Path(d)
        summary = d / "summary.csv"
        if not summary.exists():
            raise ValueError(f"no summary.csv in run directory {d}")
        lines = summary.read_text().splitlines()
        for line in lines[1:]:
            if not line:
                continue
            exp_id = line.split(",", 1)[0]
            if experiment is None:
                experiment = exp_id
            elif exp_id != experiment:
                raise ValueError(
                    f"experiment id mismatch: {exp_id!r} in {d} vs {experiment!r}")
            merged.append(f"{d},{line}")
    return "\n".join([f"run_dir,{SUMMARY_HEADER}"] + merged) + "\n"


ORACLE_TARGETS = {
    "exponential": lambda spec_args: exponential_target(spec_args.theta),
    "truncated_gaussian": lambda spec_args: truncated_gaussian_target(spec_args.theta),
    "gamma": lambda spec_args: gamma_target(spec_args.r, spec_args.theta),
}


def run_oracle(args) -> int:
    if args.target not in ORACLE_TARGETS:
        print(f"oracle supports {sorted(ORACLE_TARGETS)}, got {args.target}", file=sys.stderr)
        return 2
    target = ORACLE_TARGETS[args.target](args)
    lines = ["target,a,quantity,value,tolerance"]
    for a in _floats(args.a_grid):
        entries = [("numeric_rho1", numeric_rho1(target, a), 1e-4)]
        if args.target == "exponential":
            cs = exponential_case_study(a, args.theta, 30000)
            entries.append(("closed_form_rho1", cs.rho1, 0.0))
            entries.append(("closed_form_ess_fraction", cs.ess_fraction, 0.0))
        lines.extend(oracle_cache_rows(args.target, a, entries))
    text = "\n".join(lines) + "\n"
    if args.output:
        _atomic_write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mgs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment spec")
    p_run.add_argument("spec")

    p_val = sub.add_parser("validate", help="check an experiment spec")
    p_val.add_argument("spec")

    p_rep = sub.add_parser("report", help="merge summaries of completed runs")
    p_rep.add_argument("run_dirs", nargs="+")
    p_rep.add_argument("-o", "--output")

    p_or = sub.add_parser("oracle", help="quadrature ground truth for a target")
    p_or.add_argument("target")
    p_or.add_argument("a_grid")
    p_or.add_argument("--theta", type=float, default=1.0)
    p_or.add_argument("--r", type=float, default=2.0)
    p_or.add_argument("-o", "--output")

    args = parser.parse_args(argv)
    if args.command == "run":
        return run_experiment(args.spec)
    if args.command == "validate":
        try:
            parse_spec(args.spec)
        except SpecError as exc:
            print(f"invalid spec: {exc}", file=sys.stderr)
            return 2
        print("spec ok")
        return 0
    if args.command == "report":
        try:
            text = compare_report(args.run_dirs)
        except ValueError as exc:
            print(f"report error: {exc}", file=sys.stderr)
            return 1
        if args.output:
            _atomic_write(Path(args.output), text)
        else:
            sys.stdout.write(text)
        return 0
    if args.command == "oracle":
        return run_oracle(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
