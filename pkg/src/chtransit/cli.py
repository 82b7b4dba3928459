"""Command-line entry point: ``chtransit <subcommand> --config run.ini``."""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import __version__, report
from .classifier import (
    TransitionType,
    classify_coupled,
    classify_general,
    classify_loop,
    classify_rectangular,
    classify_whole_space,
    critical_value,
    predict_amplitudes,
    rectangular_geometry,
)
from .config import RunConfig, load_config
from .errors import ConfigError, NumericalFailure, ResonanceError, UnsupportedPrediction
from .params import CoupledParams
from .phase_diagram import (
    critical_length,
    critical_temperature,
    curves,
    default_T_grid,
    discrepancy_log,
    emit_diagram,
    t_star,
)
from .reduced import (
    ReducedSystem,
    build_reduced_system,
    classify_origin,
    find_equilibria,
    find_straight_line_orbits,
    fold_point,
    integrate,
)
from .solver import (
    fit_exponent,
    initial_state,
    observables,
    reference_coefficient,
    run_to_steady,
    sweep_branch,
    tracked_modes,
)
from .spectral import to_nodal_array

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class Run:
    """Accumulates results, discrepancies and output files for one invocation."""

    def __init__(self, cfg: RunConfig, out_dir: str, jobs: int):
        self.cfg = cfg
        self.out_dir = out_dir
        self.jobs = jobs
        self.prefix = cfg.text("output", "prefix", cfg.subcommand)
        self.results: dict = {}
        self.discrepancies: list[str] = []
        self.files: list[str] = []
        self.warnings: list[str] = []

    def path(self, suffix: str) -> str:
        return os.path.join(self.out_dir, f"{self.prefix}_{suffix}")

    def write(self, suffix: str, text: str):
        report.write_text(self.path(suffix), text)
        self.files.append(f"{self.prefix}_{suffix}")

    def document(self, status: str, error: str | None = None) -> dict:
        doc = {
            "tool": "chtransit",
            "version": __version__,
            "subcommand": self.cfg.subcommand,
            "seed": self.cfg.seed,
            "config": self.cfg.sections,
            "results": self.results,
            "discrepancies": self.discrepancies,
            "warnings": sorted(set(self.warnings)),
            "files": sorted(self.files),
            "status": status,
        }
        if error is not None:
            doc["error"] = error
        return doc


# --------------------------------------------------------------------------
# subcommands


def _classify_report(cfg: RunConfig):
    p, dom = cfg.params, cfg.domain
    base = p.base if isinstance(p, CoupledParams) else p
    mode = cfg.text("classify", "mode", "auto")
    if mode == "general":
        m = cfg.integer("classify", "m", 1)
        a = cfg.number("classify", "a", 0.0)
        L = cfg.number("classify", "L", 0.0) or None
        return classify_general(base, m, a, L)
    if mode != "auto":
        raise ConfigError(f"[classify] mode must be 'auto' or 'general', got {mode!r}")
    if dom.kind == "rectangular":
        L, m = rectangular_geometry(dom)
        if isinstance(p, CoupledParams):
            return classify_coupled(p, L, m)
        if m > 3:
            raise ConfigError("rectangular classification supports multiplicity up to 3")
        return classify_rectangular(base, L, m)
    if isinstance(p, CoupledParams):
        raise ConfigError("coupled classification is defined for rectangular domains")
    if dom.kind == "loop":
        return classify_loop(base, dom.r0)
    if dom.dim == 1:
        return classify_rectangular(base, math.pi, 1)
    return classify_whole_space(base, dom.dim)


def _with_default_lambda(cfg: RunConfig):
    if cfg.lambda_given or cfg.domain is None:
        return cfg.params
    return cfg.params.with_lambda(critical_value(cfg.domain))


def cmd_classify(run: Run):
    cfg = run.cfg
    rep = _classify_report(cfg)
    run.results["transition"] = rep.to_dict()
    run.discrepancies.extend(rep.notes)
    if cfg.lambda_given and cfg.text("classify", "mode", "auto") == "auto":
        p = cfg.params
        base = p.base if isinstance(p, CoupledParams) else p
        coupled = p if isinstance(p, CoupledParams) else None
        try:
            preds = predict_amplitudes(base, cfg.domain, base.lam, coupled)
            run.results["predicted_amplitudes"] = [
                {"equilibrium": d, "amplitude": a} for d, a in preds
            ]
        except (UnsupportedPrediction, ResonanceError) as exc:
            run.results["predicted_amplitudes"] = {"unavailable": str(exc)}


def _reduced_system(cfg: RunConfig) -> ReducedSystem:
    family = cfg.text("reduce", "family", "auto")
    if family == "scalar":
        # the scalar family's linear coefficient is lambda itself
        beta1 = cfg.params.lam if cfg.lambda_given else 0.0
        return ReducedSystem.scalar(beta1, cfg.number("reduce", "q"), cfg.number("reduce", "c"))
    if family != "auto":
        raise ConfigError(f"[reduce] family must be 'auto' or 'scalar', got {family!r}")
    if cfg.domain is None:
        raise ConfigError("reduce with family = auto needs a [domain] section")
    p = _with_default_lambda(cfg)
    base = p.base if isinstance(p, CoupledParams) else p
    coupled = p if isinstance(p, CoupledParams) else None
    return build_reduced_system(base, cfg.domain, base.lam, coupled)


def cmd_reduce(run: Run):
    cfg = run.cfg
    system = _reduced_system(cfg)
    run.results["system"] = {
        "family": system.family,
        "m": system.m,
        "n": system.n,
        "beta1": system.beta1,
        "a1": system.a1,
        "a2": system.a2,
        "q": system.q,
    }
    if system.family == "scalar_quadratic_cubic":
        try:
            lam_star, v_star = fold_point(system)
            run.results["fold_point"] = {"lambda_star": lam_star, "v_star": v_star}
        except NumericalFailure as exc:
            run.results["fold_point"] = {"unavailable": str(exc)}
    if system.family != "loop":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            eqs = find_equilibria(system)
        run.warnings.extend(str(w.message) for w in caught)
        run.results["equilibria"] = [e.to_dict() for e in eqs]
        run.write("equilibria.csv", report.equilibria_csv(eqs))
    else:
        if system.beta1 > 0 and system.a1 > 0:
            run.results["circle_radius"] = math.sqrt(system.beta1 / system.a1)
    if system.is_cubic_gradient and system.m in (2, 3):
        lines = find_straight_line_orbits(system)
        run.results["straight_line_orbits"] = {
            "count": len(lines),
            "lines": lines.n_lines,
            "degenerate": lines.degenerate,
            "notes": lines.notes,
        }
    try:
        run.results["origin_at_onset"] = classify_origin(system.with_beta1(0.0))
    except NumericalFailure as exc:
        run.results["origin_at_onset"] = f"indeterminate: {exc}"
    y0 = cfg.numbers("reduce", "y0")
    if y0 is not None:
        if len(y0) != system.m:
            raise ConfigError(f"[reduce] y0 needs {system.m} entries", cfg.lines.get(("reduce", "y0")))
        t, Y = integrate(system, y0, cfg.number("reduce", "t_end", 100.0), cfg.number("reduce", "dt", 1e-2))
        run.write("trajectory.csv", report.trajectory_csv(t, Y))
        run.results["trajectory_final"] = [float(v) for v in Y[-1]]


def cmd_simulate(run: Run):
    cfg = run.cfg
    if not cfg.lambda_given:
        raise ConfigError("simulate needs [params] lambda")
    p, dom, sc = cfg.params, cfg.domain, cfg.solver
    modes = tracked_modes(dom)
    labels = [m.label() for m in modes]
    interval = cfg.number("solver", "record_interval", sc.max_time / 100.0)
    if not interval > 0:
        raise ConfigError("[solver] record_interval must be positive")
    state = initial_state(dom, p, sc)
    records = []

    def record(st, status):
        o = observables(st, p, modes)
        records.append((st.t, o.amplitudes, o.free_energy, o.mass, status))
        return o

    record(state, "running")
    status = "max_time"
    chunk = replace(sc, max_time=interval)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            while state.t < sc.max_time - 1e-12 * sc.max_time:
                remaining = sc.max_time - state.t
                state, st = run_to_steady(state, p, replace(chunk, max_time=min(interval, remaining)))
                record(state, st if st == "converged" else "running")
                if st == "converged":
                    status = "converged"
                    break
        finally:
            run.warnings.extend(str(w.message) for w in caught)
            run.write("timeseries.csv", report.timeseries_csv(labels, records))
    obs = observables(state, p, modes)
    run.results["final"] = {
        "status": status,
        "t": state.t,
        "amplitudes": obs.amplitudes,
        "free_energy": obs.free_energy,
        "mass": obs.mass,
    }
    if cfg.flag("output", "snapshot", True):
        run.write("snapshot.txt", report.snapshot_text(dom, to_nodal_array(dom, state.u.spectral()), state.t))
    _compare_prediction(run, p, dom, obs)


def _compare_prediction(run: Run, p, dom, obs):
    base = p.base if isinstance(p, CoupledParams) else p
    coupled = p if isinstance(p, CoupledParams) else None
    lam0 = critical_value(dom)
    amp = math.sqrt(sum(a * a for a in obs.amplitudes.values()))
    try:
        preds = predict_amplitudes(base, dom, base.lam, coupled)
    except (UnsupportedPrediction, ResonanceError) as exc:
        run.results["prediction"] = {"unavailable": str(exc)}
        return
    norms = [a * math.sqrt(d["active_modes"]) for d, a in preds]
    if not norms:
        return
    best = min(norms, key=lambda v: abs(v - amp))
    rel = abs(amp - best) / best if best > 0 else abs(amp)
    run.results["prediction"] = {"predicted_norm": best, "measured_norm": amp, "relative_error": rel}
    if base.lam > lam0 and rel > 0.1:
        run.discrepancies.append(
            f"simulated first-eigenspace amplitude {amp!r} differs from leading-order prediction {best!r} by {rel:.3g}"
        )


def _sweep_lambdas(cfg: RunConfig, lam0: float) -> list[float]:
    lams = cfg.numbers("sweep", "lambdas")
    if lams is not None:
        return lams
    start = cfg.number("sweep", "lambda_start")
    stop = cfg.number("sweep", "lambda_stop")
    count = cfg.integer("sweep", "count", 11)
    spacing = cfg.text("sweep", "spacing", "linear")
    if count < 1:
        raise ConfigError("[sweep] count must be >= 1")
    if spacing == "linear":
        return [float(v) for v in np.linspace(start, stop, count)]
    if spacing == "log_offset":
        if not (start > 0 and stop > 0):
            raise ConfigError("[sweep] log_offset spacing needs positive offsets from the critical value")
        return [lam0 + float(v) for v in np.geomspace(start, stop, count)]
    raise ConfigError(f"[sweep] spacing must be 'linear' or 'log_offset', got {spacing!r}")


def cmd_sweep(run: Run):
    cfg = run.cfg
    dom = cfg.domain
    lam0 = critical_value(dom)
    lams = _sweep_lambdas(cfg, lam0)
    diffs = np.diff(lams)
    if len(lams) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ConfigError("[sweep] lambda values must be strictly monotone")
    continuation = cfg.flag("sweep", "continuation", True)
    p = cfg.params
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        branch = sweep_branch(p, lams, cfg.solver, dom, continuation=continuation, jobs=run.jobs)
    run.warnings.extend(str(w.message) for w in caught)
    run.write("branch.csv", report.branch_csv(branch))
    statuses = {}
    for r in branch:
        statuses[r.status] = statuses.get(r.status, 0) + 1
    run.results["branch"] = {
        "rows": len(branch),
        "lambda_critical": lam0,
        "status_counts": statuses,
        "jump_lambdas": [r.lam for r in branch.jumps()],
        "failed": [{"lambda": r.lam, "message": r.message} for r in branch if r.status == "failed"],
        "reference_coefficient": reference_coefficient(p, dom),
    }
    try:
        beta, err = fit_exponent(branch, lam0)
        run.results["critical_exponent"] = {"beta": beta, "stderr": err}
    except ValueError as exc:
        run.results["critical_exponent"] = {"unavailable": str(exc)}
    try:
        rep = _classify_report(replace(cfg, sections={**cfg.sections, "classify": {}}))
    except (ConfigError, ValueError) as exc:
        run.results["transition"] = {"unavailable": str(exc)}
        return
    run.results["transition"] = rep.to_dict()
    supercritical_jumps = [r.lam for r in branch.jumps() if r.lam > lam0]
    if rep.transition_type is TransitionType.TYPE_I and supercritical_jumps:
        run.discrepancies.append(f"classifier predicts a continuous transition but the sweep jumped at {supercritical_jumps}")
    if rep.transition_type is TransitionType.TYPE_II:
        above = [r for r in branch if r.lam > lam0 and r.converged]
        if above and not any(r.status == "jumped" for r in above):
            run.discrepancies.append("classifier predicts a jump transition but no supercritical row jumped")


def cmd_diagram(run: Run):
    cfg = run.cfg
    mat = cfg.material
    u0_grid = [
        float(u)
        for u in np.linspace(
            cfg.number("diagram", "u0_min", 0.05),
            cfg.number("diagram", "u0_max", 0.95),
            cfg.integer("diagram", "u0_count", 19),
        )
    ]
    T_count = cfg.integer("diagram", "T_count", 200)
    if "T_max" in cfg.section("diagram"):
        T_max = cfg.number("diagram", "T_max")
        T_grid = np.linspace(T_max / T_count, T_max, T_count)
    else:
        T_grid = default_T_grid(mat, u0_grid, T_count)
    try:
        rows = emit_diagram(mat, u0_grid, T_grid)
        curve_rows = curves(mat, u0_grid)
    except ValueError as exc:
        raise ConfigError(f"[diagram] {exc}") from None
    run.write("diagram.csv", report.diagram_csv(rows))
    run.write("curves.csv", report.curves_csv(curve_rows))
    L0 = critical_length(mat)
    res = {"critical_length": L0, "u0": mat.u0}
    if "L" in cfg.section("material"):
        L = cfg.number("material", "L", finite=False)
        res["L"] = L
        res["critical_temperature"] = critical_temperature(mat, L)
    ts = t_star(mat)
    res["T_star"] = {"derived": ts.T_star, "printed": ts.T_star_printed, "T0_bulk": ts.T0}
    regions = {}
    for r in rows:
        regions[r.region] = regions.get(r.region, 0) + 1
    res["region_counts"] = regions
    run.results["diagram"] = res
    run.discrepancies.extend(discrepancy_log(mat, sorted(set(u0_grid) | {mat.u0})))


COMMANDS = {
    "classify": cmd_classify,
    "reduce": cmd_reduce,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "diagram": cmd_diagram,
}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chtransit", description=__doc__)
    ap.add_argument("--version", action="version", version=f"chtransit {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__name__.replace("cmd_", "") + " run")
        sp.add_argument("--config", required=True, help="path to the run configuration")
        sp.add_argument("--out", default=".", help="output directory (created if missing)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for independent sweep rows")
        sp.add_argument("--seed", type=int, default=None, help="override [run] seed")
    return ap


def execute(subcommand: str, config_path: str, out_dir: str = ".", jobs: int = 1, seed: int | None = None) -> int:
    try:
        cfg = load_config(config_path, subcommand)
        if seed is not None:
            if seed < 0 or seed >= 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg.seed = seed
            cfg.solver = replace(cfg.solver, seed=seed)
        if jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        os.makedirs(out_dir, exist_ok=True)
    except ConfigError as exc:
        print(f"chtransit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"chtransit: cannot create {out_dir}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    run = Run(cfg, out_dir, jobs)
    code, status, error = EXIT_OK, "ok", None
    try:
        COMMANDS[subcommand](run)
    except ConfigError as exc:
        print(f"chtransit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, ResonanceError, FloatingPointError) as exc:
        code, status, error = EXIT_NUMERICAL, "numerical_failure", str(exc)
        print(f"chtransit: numerical failure: {exc}", file=sys.stderr)
    report.write_text(run.path("report.json"), report.dumps(run.document(status, error)))
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return execute(args.subcommand, args.config, args.out, args.jobs, args.seed)


if __name__ == "__main__":
    sys.exit(main())
