"""Batch front-end: config in, reports out.

    conewalk <validate|analyze|simulate|stationary|recurrence|harmonic|report>
             --config <path> [--threads N] [--out DIR] [--no-figures]

Exit codes: 0 = completed (any scientific verdict, including "unknown" or
non-convergence), 1 = semantic or runtime error, 2 = unreadable or
malformed input. All randomness derives from the config seed through
per-section child streams, so identical configs give byte-identical CSV and
report outputs at any thread count.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config
from .ensemble import MatrixEnsemble
from .errors import ConewalkError, ConfigError
from .grids import SphereGrid, Window
from .harmonic import (
    GridFunction,
    SmoothingKernel,
    iterate_to_fixed,
    gridfunction_to_csv,
    osc_history_to_csv,
    smooth,
)
from .parallel import parallel_map
from .recurrence import aperiodicity_probe, build_target, io_event_counter
from .report import write_csv, write_report, write_timings
from .rng import RngStream
from .semigroup import check_condition_C
from .walk import (
    drift_estimate,
    estimate_stationary,
    histogram_to_csv,
    simulate,
    trajectory_to_csv,
)

# one child-stream branch per section, so sections are independent of the
# subcommand combination that ran them
_STREAM_SIMULATE = 1
_STREAM_STATIONARY = 2
_STREAM_RECURRENCE = 3
_STREAM_HARMONIC = 4
_STREAM_SEMIGROUP = 5


def _start_vector(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.walk.start is not None:
        x = np.asarray(cfg.walk.start, dtype=np.float64)
    else:
        x = np.ones(cfg.dimension)
    return x / np.linalg.norm(x)


def _sphere_grid(cfg: ExperimentConfig) -> SphereGrid:
    if cfg.dimension == 2:
        return SphereGrid.angular(cfg.harmonic.grid_nodes)
    return SphereGrid.simplex(cfg.dimension, cfg.harmonic.refinement)


def _run_semigroup(cfg, e: MatrixEnsemble, outdir: Path, threads: int, figures: bool):
    sg = cfg.semigroup
    rep = check_condition_C(
        e,
        max_len=sg.max_len,
        n_lambda_words=sg.n_lambda_words,
        q_max=sg.q_max,
        tol=sg.tol,
        rng=RngStream(cfg.seed, (_STREAM_SEMIGROUP,)),
    )
    write_csv(
        outdir / "lambda_samples.csv",
        ["word", "log_lambda"],
        [(" ".join(str(i) for i in word), lam) for word, lam in rep.lambda_samples],
    )
    write_csv(
        outdir / "commensurability.csv",
        ["i", "j", "ratio", "p", "q", "error"],
        [(p.i, p.j, p.ratio, p.p, p.q, p.error) for p in rep.commensurability.pairs],
    )
    if figures:
        from . import figures as fig

        fig.render_semigroup(
            [lam for _, lam in rep.lambda_samples],
            list(rep.commensurability.pairs),
            outdir / "semigroup.png",
        )
    entries = [
        ("condition-verdict", rep.verdict),
        ("positive-word", rep.positive_word),
        ("orbit-rank", rep.orbit_rank),
        ("lambda-count", len(rep.lambda_samples)),
        ("commensurability-verdict", rep.commensurability.verdict),
        ("q-max", rep.commensurability.q_max),
        ("tol", rep.commensurability.tol),
    ]
    return ("semigroup", entries)


def _run_simulate(cfg, e, outdir: Path, threads: int, figures: bool):
    w = cfg.walk
    start = _start_vector(cfg)

    def one_path(k: int):
        return simulate(e, start, w.t0, w.n_steps, RngStream(cfg.seed, (_STREAM_SIMULATE, k)))

    paths = parallel_map(one_path, range(w.n_paths), threads)
    entries = [
        ("n-steps", w.n_steps),
        ("n-paths", w.n_paths),
        ("start", start),
        ("t0", w.t0),
    ]
    for k, traj in enumerate(paths):
        trajectory_to_csv(traj, outdir / f"trajectory_{k:03d}.csv")
        mean, se = drift_estimate(traj, n_batches=min(100, w.n_steps))
        entries.append((f"path-{k}-drift-mean", mean))
        entries.append((f"path-{k}-drift-se", se))
    if figures:
        from . import figures as fig

        fig.render_trajectories(paths, outdir / "simulate.png")
    return ("simulate", entries)


def _run_stationary(cfg, e, outdir: Path, threads: int, figures: bool):
    w = cfg.walk
    start = _start_vector(cfg)
    grid = _sphere_grid(cfg)
    verdict = check_condition_C(e).verdict
    burn_in = w.burn_in if w.burn_in is not None else w.n_steps // 10

    def one_path(k: int):
        return estimate_stationary(
            e, start, w.n_steps, burn_in, grid,
            RngStream(cfg.seed, (_STREAM_STATIONARY, k)),
            check_condition=False,
        ).masses

    masses = np.mean(parallel_map(one_path, range(w.n_paths), threads), axis=0)
    from .walk import SphereHistogram

    hist = SphereHistogram(grid, masses / masses.sum())
    histogram_to_csv(hist, outdir / "stationary.csv")
    if figures:
        from . import figures as fig

        fig.render_stationary(hist, outdir / "stationary.png")
    top = int(np.argmax(hist.masses))
    entries = [
        ("condition-verdict", verdict),
        ("n-steps", w.n_steps),
        ("burn-in", burn_in),
        ("n-paths", w.n_paths),
        ("grid-nodes", grid.n_nodes),
        ("support-nodes", int(np.count_nonzero(hist.masses))),
        ("top-node", top),
        ("top-node-mass", float(hist.masses[top])),
    ]
    return ("stationary", entries)


def _run_recurrence(cfg, e, outdir: Path, threads: int, figures: bool):
    r = cfg.recurrence
    target = build_target(
        e,
        max_len=r.max_word_len,
        epsilon=r.epsilon,
        delta=r.delta,
        rng=RngStream(cfg.seed, (_STREAM_RECURRENCE, 0)),
    )
    stats = aperiodicity_probe(
        e, target, r.n_trials, RngStream(cfg.seed, (_STREAM_RECURRENCE, 1)), threads=threads
    )
    start = _start_vector(cfg)
    traj = simulate(
        e, start, 0.0, cfg.walk.n_steps, RngStream(cfg.seed, (_STREAM_RECURRENCE, 2))
    )
    if traj.n_steps > target.m:
        stats = dataclasses.replace(stats, pair_events=io_event_counter(traj, target))
    write_csv(
        outdir / "recurrence.csv",
        ["trials", "hits", "eta_hat", "ci_low_99", "pair_events", "pair_steps"],
        [(stats.trials, stats.hits, stats.eta_hat, stats.ci_low, stats.pair_events, traj.n_steps)],
    )
    if figures:
        from . import figures as fig

        fig.render_recurrence(stats, outdir / "recurrence.png")
    entries = [
        ("word", target.word),
        ("m", target.m),
        ("z", target.z),
        ("zeta", target.zeta),
        ("epsilon", target.epsilon),
        ("delta", target.delta),
        ("trials", stats.trials),
        ("hits", stats.hits),
        ("eta-hat", stats.eta_hat),
        ("ci-low-99", stats.ci_low),
        ("pair-events", stats.pair_events),
        ("pair-steps", traj.n_steps),
    ]
    return ("recurrence", entries)


def _run_harmonic(cfg, e, outdir: Path, threads: int, figures: bool):
    h = cfg.harmonic
    grid = _sphere_grid(cfg)
    window = Window(h.window_T, h.ds)
    if h.initial == "cos":
        period = float(h.initial_period)

        def seed_fn(x, s):
            return np.cos(2.0 * math.pi * s / period)

        L0 = GridFunction.from_function(seed_fn, grid, window)
    else:
        L0 = GridFunction.random(grid, window, RngStream(cfg.seed, (_STREAM_HARMONIC, 0)))
    result = iterate_to_fixed(L0, e, n_iter=h.n_iter, tol=h.tol)
    osc_history_to_csv(result, outdir / "harmonic_history.csv")
    if h.snapshot:
        gridfunction_to_csv(result.final, outdir / "harmonic_final.csv")
    kernel = SmoothingKernel.triangular(h.kernel_half_width, window)
    smoothed = smooth(result.final, kernel)
    smoothing_change = float(np.abs(smoothed.values - result.final.values).max())
    if figures:
        from . import figures as fig

        fig.render_harmonic(result, outdir / "harmonic.png")
    osc0, osc_final = float(result.osc[0]), float(result.osc[-1])
    entries = [
        ("grid-nodes", grid.n_nodes),
        ("window-T", window.T),
        ("ds", window.ds),
        ("n-iter", result.iterations),
        ("initial", h.initial),
        ("osc-initial", osc0),
        ("osc-final", osc_final),
        ("osc-ratio", osc_final / osc0 if osc0 > 0 else 0.0),
        ("converged", result.converged),
        ("defect-final", float(result.defect[-1]) if len(result.defect) else 0.0),
        ("kernel-half-width", kernel.half_width),
        ("smoothing-sup-change", smoothing_change),
    ]
    return ("harmonic", entries)


_SECTION_RUNNERS = {
    "analyze": (_run_semigroup,),
    "simulate": (_run_simulate,),
    "stationary": (_run_stationary,),
    "recurrence": (_run_recurrence,),
    "harmonic": (_run_harmonic,),
    "report": (_run_semigroup, _run_simulate, _run_stationary, _run_recurrence, _run_harmonic),
}


def _run_command(command: str, args) -> int:
    cfg = load_config(args.config)
    e = cfg.ensemble()
    if command == "validate":
        print(f"config ok: dimension {cfg.dimension}, {e.size} matrices, seed {cfg.seed}")
        return 0
    outdir = Path(args.out if args.out is not None else cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    figures = not args.no_figures
    sections = []
    timings = []
    for runner in _SECTION_RUNNERS[command]:
        t0 = time.perf_counter()
        sections.append(runner(cfg, e, outdir, args.threads, figures))
        timings.append((sections[-1][0], time.perf_counter() - t0))
    write_report(outdir / "report.txt", cfg.to_dict(), sections)
    write_timings(outdir / "timings.txt", timings)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="conewalk",
        description="simulation and verification toolkit for cone random walks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("validate", "check a configuration file and its matrices"),
        ("analyze", "semigroup condition check, eigenvalue sampling, commensurability"),
        ("simulate", "simulate walk trajectories and estimate the drift"),
        ("stationary", "estimate the stationary direction measure"),
        ("recurrence", "build the recurrence target and probe the return probability"),
        ("harmonic", "iterate the transition operator on a seed grid function"),
        ("report", "run every section and write one combined report"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the YAML experiment file")
        if name != "validate":
            p.add_argument("--threads", type=int, default=1, help="worker cap (results are thread-count invariant)")
            p.add_argument("--out", default=None, help="output directory (overrides config)")
            p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    args = parser.parse_args(argv)
    try:
        return _run_command(args.command, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConewalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
