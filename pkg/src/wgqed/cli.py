"""Command-line scenario runner.

    wgqed --scenario single-scatter --out-dir out/single
    wgqed --scenario feedback --phi 3.14159 --format csv
    wgqed --config run.cfg --dt 0.025

Settings resolve as flags, then ``--config`` file (``key = value`` lines, ``#``
comments), then per-scenario defaults. Exit status: 0 success, 2 bad
configuration, 1 failure while running.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import l2_error, write_schmidt_csv
from .baseline import run_benchmark, write_benchmark_csv
from .plotting import heatmap, line_plot
from .scenarios import (
    DEFAULT_SUBSTEPS,
    decay_setup,
    feedback_setup,
    make_times,
    run_decay,
    run_feedback,
    run_single_scatter,
    run_two_scatter,
    run_two_waveguide,
    single_scatter_setup,
    times_from_bins,
    two_scatter_setup,
    two_waveguide_setup,
)
from .states import write_one_photon_csv, write_two_photon_csv, OnePhotonWavefunction

SCENARIOS = ("single-scatter", "two-scatter", "two-waveguide", "feedback", "benchmark",
             "convergence")

_COMMON = dict(dt=0.05, substeps=DEFAULT_SUBSTEPS, out_dir="wgqed-out", format="both")
DEFAULTS = {
    "single-scatter": dict(t_max=10.0, gamma=1.0, tau_g=1.0, t0=5.0),
    "two-scatter": dict(t_max=10.0, gamma=1.0, tau_g=1.0, t0=5.0),
    "two-waveguide": dict(t_max=15.0, gamma_left=0.5, gamma_right=0.5, tau_g=2.0, t0=7.5),
    "feedback": dict(t_max=10.0, gamma=1.0, delay=1.0, phi=None),
    "benchmark": dict(t_max=10.0, bench_scenario="two-scatter", n_list="50,100,200",
                      repeats=5),
    "convergence": dict(t_max=10.0, gamma=1.0, tau_g=1.0, t0=5.0, n_list="100,200,400,800"),
}

_FLOAT_KEYS = {"dt", "t_max", "gamma", "gamma_left", "gamma_right", "tau_g", "t0", "phi", "delay"}
_INT_KEYS = {"substeps", "repeats"}
_STR_KEYS = {"scenario", "out_dir", "format", "n_list", "bench_scenario"}
KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS


class ConfigError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wgqed", description="Time-bin waveguide QED scenarios.",
                                argument_default=argparse.SUPPRESS)
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--config", metavar="FILE", help="key = value settings file")
    p.add_argument("--dt", type=float, help="time-bin width")
    p.add_argument("--t-max", dest="t_max", type=float, help="end of the time grid")
    p.add_argument("--gamma", type=float, help="emitter decay rate")
    p.add_argument("--gamma-left", dest="gamma_left", type=float)
    p.add_argument("--gamma-right", dest="gamma_right", type=float)
    p.add_argument("--tau-g", dest="tau_g", type=float, help="Gaussian pulse width")
    p.add_argument("--t0", type=float, help="pulse centre")
    p.add_argument("--phi", type=float, help="feedback phase (default: run 0 and pi)")
    p.add_argument("--delay", type=float, help="feedback delay")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--format", choices=("csv", "svg", "both"))
    p.add_argument("--substeps", type=int, help="RK4 steps per time bin")
    p.add_argument("--n-list", dest="n_list", help="comma-separated bin counts")
    p.add_argument("--repeats", type=int, help="benchmark repetitions")
    p.add_argument("--bench-scenario", dest="bench_scenario",
                   choices=("single-scatter", "two-scatter"))
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def read_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"{path}:{n}: unknown setting {key!r}")
        out[key] = value
    return out


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in _FLOAT_KEYS:
            v = float(value)
            if not math.isfinite(v):
                raise ValueError
            return v
        if key in _INT_KEYS:
            return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}") from None
    return str(value)


def resolve_config(argv=None) -> dict:
    ns = vars(build_parser().parse_args(argv))
    from_file = read_config_file(ns.pop("config")) if "config" in ns else {}
    scenario = ns.get("scenario", from_file.get("scenario"))
    if scenario is None:
        raise ConfigError("no scenario given (use --scenario or a config file)")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    cfg = dict(_COMMON)
    cfg.update(DEFAULTS[scenario])
    cfg.update({k: _coerce(k, v) for k, v in from_file.items()})
    cfg.update({k: _coerce(k, v) for k, v in ns.items()})
    cfg["scenario"] = scenario
    validate(cfg)
    return cfg


def _n_list(cfg) -> list:
    try:
        ns = [int(s) for s in str(cfg["n_list"]).split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"n_list must be comma-separated integers, got {cfg['n_list']!r}") from None
    if not ns or any(n < 2 for n in ns) or ns != sorted(set(ns)):
        raise ConfigError("n_list must be strictly ascending integers >= 2")
    return ns


def validate(cfg: dict) -> None:
    """Reject inconsistent settings before anything is allocated."""
    for key in ("dt", "t_max", "gamma", "gamma_left", "gamma_right", "tau_g"):
        if key in cfg and cfg[key] is not None and not cfg[key] > 0:
            raise ConfigError(f"{key} must be positive, got {cfg[key]}")
    if cfg.get("t0") is not None and cfg["t0"] < 0:
        raise ConfigError("t0 must be non-negative")
    if cfg["substeps"] < 1:
        raise ConfigError("substeps must be at least 1")
    if cfg["format"] not in ("csv", "svg", "both"):
        raise ConfigError("format must be csv, svg or both")
    if cfg["dt"] >= cfg["t_max"]:
        raise ConfigError("dt must be smaller than t_max")
    sc = cfg["scenario"]
    if sc == "feedback":
        if not cfg["delay"] > 0:
            raise ConfigError("delay must be positive")
        ratio = cfg["delay"] / cfg["dt"]
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError(f"delay/dt must be an integer number of bins, got {ratio:.6g}")
        n_bins = make_times(cfg["dt"], cfg["t_max"]).size
        t_end = cfg["t_max"] - cfg["delay"]
        last = int(math.floor(t_end / cfg["dt"] + 1e-9))
        if t_end <= 0 or last + round(ratio) > n_bins:
            raise ConfigError(
                f"feedback needs last_bin + delay_bins <= n_bins: {last} + {round(ratio)}"
                f" > {n_bins}; choose t_max > delay"
            )
    if sc in ("benchmark", "convergence"):
        _n_list(cfg)
    if sc == "benchmark" and cfg["repeats"] < 1:
        raise ConfigError("repeats must be at least 1")


# -- scenario bodies ---------------------------------------------------------------


class _Run:
    def __init__(self, cfg: dict, out_dir: Path):
        self.cfg = cfg
        self.out = out_dir
        self.files: list = []
        self.checks: dict = {}
        self.csv = cfg["format"] in ("csv", "both")
        self.svg = cfg["format"] in ("svg", "both")
        self.prov = {"scenario": cfg["scenario"], "version": __version__,
                     **{k: cfg[k] for k in sorted(cfg) if k not in ("out_dir",)}}

    def add(self, path):
        self.files.append(Path(path).name)

    def check(self, name, value, passed):
        self.checks[name] = {"value": value, "pass": bool(passed)}

    def table(self, name, header, columns):
        if not self.csv:
            return
        path = self.out / name
        np.savetxt(path, np.column_stack(columns), delimiter=",", header=",".join(header),
                   comments="", fmt="%.17g", encoding="utf-8")
        self.add(path)

    def plot_line(self, name, series, **kw):
        if self.svg:
            self.add(line_plot(self.out / name, series, provenance=self.prov, **kw))

    def plot_heat(self, name, matrix, t, **kw):
        if self.svg:
            self.add(heatmap(self.out / name, matrix, t, t, provenance=self.prov, **kw))


def _drift(norm_sq):
    n = np.sqrt(norm_sq)
    return float(np.max(np.abs(n - n[0])))


def _single(run: _Run):
    c = run.cfg
    res = run_single_scatter(single_scatter_setup(c["dt"], c["t_max"], c["gamma"], c["tau_g"],
                                                  c["t0"]), c["substeps"])
    t, grid = res["t"], res["setup"].waveguide.grid
    if run.csv:
        for name, vals in (("xi_in.csv", res["xi_in"]), ("xi_out.csv", res["xi_out"]),
                           ("xi_out_analytic.csv", res["xi_ref"])):
            run.add(write_one_photon_csv(run.out / name, OnePhotonWavefunction(vals, grid)))
    run.table("populations.csv", ["t", "norm_sq", "emitter"],
              [res["series_t"], res["norm_sq"], res["emitter"]])
    run.plot_line("xi_overlay.svg", [("input", t, res["xi_in"].real),
                                     ("scattered", t, res["xi_out"].real),
                                     ("analytic", t, res["xi_ref"].real)],
                  title="Single-photon scattering", xlabel="t", ylabel="Re xi(t)")
    _, rel = l2_error(res["xi_out"], res["xi_ref"], grid.dt)
    run.check("relative_l2_error_below_1e-2", rel, rel < 1e-2)
    run.check("norm_drift_below_1e-8", _drift(res["norm_sq"]), _drift(res["norm_sq"]) < 1e-8)
    exc = float(np.ptp(res["excitations"]))
    run.check("excitation_drift_below_1e-6", exc, exc < 1e-6)


def _two(run: _Run):
    c = run.cfg
    res = run_two_scatter(two_scatter_setup(c["dt"], c["t_max"], c["gamma"], c["tau_g"], c["t0"]),
                          c["substeps"])
    t = res["t"]
    if run.csv:
        run.add(write_two_photon_csv(run.out / "xi2_in.csv", res["xi2_in"]))
        run.add(write_two_photon_csv(run.out / "xi2_out.csv", res["xi2_out"]))
        for p in write_schmidt_csv(run.out, res["schmidt_out"], "schmidt_out"):
            run.add(p)
    run.plot_heat("xi2_out_abs2.svg", np.abs(res["xi2_out"].values) ** 2, t,
                  title="|xi_out(t, t')|^2", xlabel="t", ylabel="t'")
    dec = res["schmidt_out"]
    run.plot_line("schmidt_modes.svg",
                  [(f"|phi_{i + 1}|, lambda^2={dec.lambda_sq[i]:.3f}", t, np.abs(dec.modes[i]))
                   for i in range(min(3, len(dec)))],
                  title="Leading Schmidt modes", xlabel="t", ylabel="|phi_i(t)|")
    lin = float(res["schmidt_in"].lambda_sq[0])
    lout = res["schmidt_out"].lambda_sq
    run.check("input_lambda1_sq_is_1", lin, abs(lin - 1) < 1e-8)
    run.check("output_lambda1_sq_below_0.999", float(lout[0]), lout[0] < 0.999)
    run.check("output_three_lambda_sq_above_1e-3", int(np.sum(lout > 1e-3)),
              np.sum(lout > 1e-3) >= 3)
    drift = float(np.ptp(res["photons"] + res["emitter"]))
    run.check("photon_number_drift_below_1e-3", drift, drift < 1e-3)


def _two_waveguide(run: _Run):
    c = run.cfg
    res = run_two_waveguide(two_waveguide_setup(c["dt"], c["t_max"], c["gamma_left"],
                                                c["gamma_right"], c["tau_g"], c["t0"]),
                            c["substeps"])
    t = res["t"]
    for tag, wf in (("RR", res["xi2_rr"]), ("LL", res["xi2_ll"]), ("LR", res["xi2_lr"])):
        if run.csv:
            run.add(write_two_photon_csv(run.out / f"xi2_{tag}.csv", wf))
        run.plot_heat(f"xi2_{tag}_abs2.svg", np.abs(wf.values) ** 2, t,
                      title=f"|xi_{tag}(t, t')|^2", xlabel="t", ylabel="t'")
    st = res["series_t"]
    run.table("populations.csv", ["t", "n_RR", "n_LL", "n_LR", "emitter"],
              [st, res["n_rr"], res["n_ll"], res["n_lr"], res["emitter"]])
    run.plot_line("populations.svg", [("n_RR", st, res["n_rr"]), ("n_LL", st, res["n_ll"]),
                                      ("n_LR", st, res["n_lr"]), ("<s+s>", st, res["emitter"])],
                  title="Waveguide and emitter populations", xlabel="t", ylabel="population")
    total = res["n_rr_final"] + res["n_ll_final"] + res["n_lr_final"] + 2 * res["emitter"][-1]
    ll = np.abs(res["xi2_ll"].values)
    diag = float(np.max(np.diag(ll)) / np.max(ll))
    run.check("total_excitation_is_2", float(total), abs(total - 2) < 1e-2)
    run.check("LL_diagonal_below_5_percent", diag, diag < 0.05)
    ratio = res["n_ll_final"] / res["n_rr_final"]
    run.check("n_LL_below_0.2_n_RR", float(ratio), ratio < 0.2)
    drift = float(np.ptp(res["photons"] + res["emitter"]))
    run.check("photon_number_drift_below_1e-3", drift, drift < 1e-3)


def _feedback(run: _Run):
    c = run.cfg
    phis = [0.0, math.pi] if c["phi"] is None else [c["phi"]]
    cols, header, series = [], ["t"], []
    t = None
    for phi in phis:
        res = run_feedback(feedback_setup(c["dt"], c["t_max"], c["gamma"], phi, c["delay"]),
                           c["substeps"])
        t = res["series_t"]
        cols.append(res["emitter"])
        header.append(f"phi_{phi:.6g}")
        series.append((f"phi = {phi:.4g}", t, res["emitter"]))
        if abs(phi - math.pi) < 1e-12:
            m = (t >= 8) & (t <= 9)
            if np.any(m):
                lo, hi = float(res["emitter"][m].min()), float(res["emitter"][m].max())
                run.check("phi_pi_plateau_in_0.45_0.55", [lo, hi], lo >= 0.45 and hi <= 0.55)
        if phi == 0.0:
            m = t > c["delay"]
            excess = float(np.max(res["emitter"][m] - np.exp(-c["gamma"] * t[m])))
            run.check("phi_0_below_exp_decay_plus_0.02", excess, excess <= 0.02)
    ref = run_decay(decay_setup(c["dt"], c["t_max"], c["gamma"], t_end=t[-1]), c["substeps"])
    cols.append(ref["emitter"])
    header.append("tau_inf")
    series.append(("tau = inf", ref["series_t"], ref["emitter"]))
    run.table("emitter_population.csv", header, [t] + cols)
    run.plot_line("emitter_population.svg", series, title="Emitter population with feedback",
                  xlabel="t", ylabel="<s+s>")


def _convergence(run: _Run):
    c = run.cfg
    rows, timing = [], {}
    for n in _n_list(c):
        times = times_from_bins(n, c["t_max"])
        t0 = time.perf_counter()
        res = run_single_scatter(single_scatter_setup(gamma=c["gamma"], tau_g=c["tau_g"],
                                                      t0=c["t0"], times=times), c["substeps"])
        timing[str(n)] = time.perf_counter() - t0
        dt = res["setup"].waveguide.dt
        a, r = l2_error(res["xi_out"], res["xi_ref"], dt)
        rows.append((n, dt, a, r))
    rows = np.array(rows)
    run.table("convergence.csv", ["n_bins", "dt", "abs_error", "rel_error"], rows.T)
    run.plot_line("convergence.svg", [("relative L2 error", rows[:, 0], rows[:, 3])],
                  title="Convergence against the analytic solution", xlabel="bins",
                  ylabel="relative error", logy=True)
    mono = bool(np.all(np.diff(rows[:, 3]) < 0))
    run.check("relative_error_strictly_decreasing", rows[:, 3].tolist(), mono)
    run.check("seconds_per_point_below_5", timing, all(v < 5 for v in timing.values()))


def _benchmark(run: _Run):
    c = run.cfg
    reports = run_benchmark(c["bench_scenario"], _n_list(c), repeats=c["repeats"],
                            substeps=c["substeps"], t_max=c["t_max"])
    path = write_benchmark_csv(run.out / "benchmark.csv", reports)
    run.add(path)
    by = {}
    for r in reports:
        by.setdefault(r.method, []).append(r)
    series = [(m, [r.n_bins for r in rs], [r.total_seconds for r in rs]) for m, rs in by.items()]
    run.plot_line("benchmark.svg", series, title="Matrix-free vs sparse", xlabel="bins",
                  ylabel="seconds", logy=True)
    mf = {r.n_bins: r for r in by["matrix-free"]}
    speed = {str(r.n_bins): r.total_seconds / mf[r.n_bins].total_seconds for r in by["sparse"]}
    big = [v for k, v in speed.items() if int(k) >= 200]
    run.check("speedup_at_least_10x_for_n_ge_200", speed, bool(big) and min(big) >= 10)
    sizes = {r.operator_bytes for r in by["matrix-free"]}
    run.check("matrix_free_storage_constant", sorted(sizes), len(sizes) == 1)


_BODIES = {"single-scatter": _single, "two-scatter": _two, "two-waveguide": _two_waveguide,
           "feedback": _feedback, "convergence": _convergence, "benchmark": _benchmark}


def _write_manifest(out: Path, manifest: dict) -> Path:
    path = out / "manifest.json"
    fd, tmp = tempfile.mkstemp(prefix=".manifest-", suffix=".json", dir=out)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def run_scenario(cfg: dict) -> dict:
    """Run one configured scenario, write its outputs and return the manifest."""
    validate(cfg)
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(cfg, out)
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    _BODIES[cfg["scenario"]](run)
    manifest = {
        "scenario": cfg["scenario"],
        "config": cfg,
        "version": __version__,
        "started_utc": started.isoformat(),
        "wall_clock_seconds": time.perf_counter() - t0,
        "outputs": run.files,
        "checks": run.checks,
        "all_checks_pass": all(c["pass"] for c in run.checks.values()),
    }
    _write_manifest(out, manifest)
    return manifest


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
    except ConfigError as exc:
        print(f"wgqed: configuration error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        manifest = run_scenario(cfg)
    except ConfigError as exc:
        print(f"wgqed: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surfaced as exit status 1
        print(f"wgqed: {cfg['scenario']} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for name, c in manifest["checks"].items():
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {name}  ({c['value']})")
    print(f"wrote {len(manifest['outputs'])} files to {cfg['out_dir']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
