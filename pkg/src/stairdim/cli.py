"""Command-line front end.

Subcommands map to the pipeline stages:

    simulate   scenario -> runs/<name>/cubes/*.bin + sidecar.json
    process    scenario or cube dir -> targets.jsonl + report.json
    sweep      full dimension grid -> dataset.csv
    train      dataset.csv -> model.json
    evaluate   dataset.csv + model.json -> eval/report.json + histograms

Every command honors --seed and writes a manifest.json entry (config hash,
seed, versions; no timestamps, so fixed-seed reruns are byte-identical).
DIMRAD_THREADS caps the worker threads used for frame- and scenario-level
parallelism (default 1, fully serial). Exit codes: 0 success, 1 validation
error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence, TypeVar

import numpy as np

from . import __version__
from .chirp_sim import load_cube, save_cube
from .dimension import aggregate_estimates, estimate_initial
from .dsp_chain import process_frame, read_target_lists, write_target_lists
from .enhancer import (
    EnhancerSample,
    TrainConfig,
    assemble_dataset,
    dataset_fingerprint,
    forward,
    load_model,
    radar_height,
    read_dataset,
    save_model,
    split_dataset,
    train,
    write_dataset,
)
from .evaluation import build_error_report, report_to_dict, write_histogram_csv
from .scene import corners_of, trajectory_to_dict
from .scenario import (
    ScenarioConfig,
    build_sweep,
    load_scenario,
    run_scenario,
    scenario_from_dict,
    scenario_to_dict,
    scenario_trajectory,
    synthesize_scenario_frame,
)

_T = TypeVar("_T")
_U = TypeVar("_U")


def _thread_count() -> int:
    raw = os.environ.get("DIMRAD_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parallel_map(fn: Callable[[_T], _U], items: Sequence[_T]) -> list[_U]:
    """Map preserving input order; thread count from DIMRAD_THREADS."""
    threads = _thread_count()
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _versions() -> dict:
    return {
        "stairdim": __version__,
        "numpy": np.__version__,
        "python": ".".join(map(str, sys.version_info[:3])),
    }


def _config_hash(sc: ScenarioConfig) -> str:
    canonical = json.dumps(scenario_to_dict(sc), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_manifest(out_dir: Path, command: str, entry: dict) -> None:
    path = out_dir / "manifest.json"
    doc = {}
    if path.exists():
        doc = json.loads(path.read_text(encoding="utf-8"))
    doc[command] = entry
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _apply_overrides(sc: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    if getattr(args, "seed", None) is not None:
        sc = replace(sc, seed=args.seed)
    dsp = sc.dsp
    if getattr(args, "exhaustive_aoa", False):
        dsp = replace(dsp, exhaustive_aoa=True)
    if getattr(args, "peak_interp", False):
        dsp = replace(dsp, peak_interp=True)
    if getattr(args, "cfar_pfa", None) is not None:
        dsp = dsp.with_pfa(args.cfar_pfa)
    return replace(sc, dsp=dsp)


def _load_scenario_arg(args: argparse.Namespace) -> ScenarioConfig:
    sc = load_scenario(args.config) if args.config else ScenarioConfig()
    return _apply_overrides(sc, args)


def _write_sidecar(sc: ScenarioConfig, out_dir: Path) -> None:
    trajectory = scenario_trajectory(sc)
    sidecar = {
        "scenario": scenario_to_dict(sc),
        "trajectory": trajectory_to_dict(trajectory),
        "true_corners_m": [[float(x), float(y)] for x, y in corners_of(sc.staircase)],
        "d_true_m": sc.staircase.depth_m,
        "h_true_m": sc.staircase.height_m,
    }
    (out_dir / "sidecar.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    sc = _load_scenario_arg(args)
    out_dir = Path(args.out)
    cube_dir = out_dir / "cubes"
    cube_dir.mkdir(parents=True, exist_ok=True)
    trajectory = scenario_trajectory(sc)

    def emit(i: int) -> None:
        cube = synthesize_scenario_frame(sc, trajectory, i)
        save_cube(cube, cube_dir / f"frame_{i:05d}.bin")

    _parallel_map(emit, range(len(trajectory.frames)))
    _write_sidecar(sc, out_dir)
    _write_manifest(
        out_dir,
        "simulate",
        {"config": _config_hash(sc), "seed": sc.seed, "versions": _versions()},
    )
    print(f"wrote {len(trajectory.frames)} cubes to {cube_dir}")
    return 0


def _report_from_estimates(estimates, target_lists) -> dict:
    frames = []
    for tl, est in zip(target_lists, estimates):
        frames.append(
            {
                "t": tl.timestamp_s,
                "gamma_deg": math.degrees(tl.gamma_rad),
                "n_targets": len(tl.entries),
                "d_m": est.depth_m if est else None,
                "h_m": est.height_m if est else None,
            }
        )
    agg = aggregate_estimates(estimates)
    return {
        "frames": frames,
        "aggregate": {
            "d_m": agg[0] if agg else None,
            "h_m": agg[1] if agg else None,
            "frames_with_estimate": sum(1 for e in estimates if e is not None),
            "frames_total": len(frames),
        },
    }


def cmd_process(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.cubes:
        given = Path(args.cubes)
        run_dir = given if (given / "sidecar.json").exists() else given.parent
        cube_dir = given / "cubes" if (given / "cubes").is_dir() else given
        sidecar = json.loads((run_dir / "sidecar.json").read_text(encoding="utf-8"))
        sc = _apply_overrides(scenario_from_dict(sidecar["scenario"]), args)
        paths = sorted(cube_dir.glob("frame_*.bin"))
        if not paths:
            raise ValueError(f"no cube files under {cube_dir}")

        def one(path: Path):
            cube = load_cube(path, sc.radar)
            tl = process_frame(cube, sc.dsp)
            h_r = radar_height(sc.walk.mount_height_m, cube.meta.gamma_rad)
            est = estimate_initial(tl, cube.meta.gamma_rad, sc.standards, radar_height_m=h_r)
            return tl, est

        results = _parallel_map(one, paths)
        target_lists = [tl for tl, _ in results]
        estimates = [est for _, est in results]
    else:
        sc = _load_scenario_arg(args)
        result = run_scenario(sc)
        target_lists, estimates = result.target_lists, result.estimates

    write_target_lists(target_lists, out_dir / "targets.jsonl")
    (out_dir / "report.json").write_text(
        json.dumps(_report_from_estimates(estimates, target_lists), indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    _write_manifest(
        out_dir,
        "process",
        {"config": _config_hash(sc), "seed": sc.seed, "versions": _versions()},
    )
    n_est = sum(1 for e in estimates if e is not None)
    print(f"processed {len(target_lists)} frames, {n_est} with dimension estimates")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else 0
    scenarios = build_sweep(base_seed=seed, walks_per_combo=args.walks_per_combo)
    if args.cfar_pfa is not None or args.exhaustive_aoa or args.peak_interp:
        dsp = scenarios[0].dsp
        if args.exhaustive_aoa:
            dsp = replace(dsp, exhaustive_aoa=True)
        if args.peak_interp:
            dsp = replace(dsp, peak_interp=True)
        if args.cfar_pfa is not None:
            dsp = dsp.with_pfa(args.cfar_pfa)
        scenarios = [replace(sc, dsp=dsp) for sc in scenarios]

    chunks = _parallel_map(lambda sc: assemble_dataset([sc]), scenarios)
    samples = [s for chunk in chunks for s in chunk]
    if not samples:
        raise ValueError("sweep produced no dataset rows")
    write_dataset(samples, out_dir / "dataset.csv")
    _write_manifest(
        out_dir,
        "sweep",
        {
            "seed": seed,
            "walks_per_combo": args.walks_per_combo,
            "scenarios": len(scenarios),
            "rows": len(samples),
            "versions": _versions(),
        },
    )
    print(f"sweep: {len(scenarios)} scenarios -> {len(samples)} dataset rows")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset_path = Path(args.dataset) if args.dataset else out_dir / "dataset.csv"
    samples = read_dataset(dataset_path)
    train_split, _ = split_dataset(samples, split_seed=args.split_seed)
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed if args.seed is not None else 0)
    result = train(train_split, cfg)
    save_model(
        result.model,
        out_dir / "model.json",
        train_config=cfg,
        fingerprint=dataset_fingerprint(dataset_path),
    )
    (out_dir / "training_curve.json").write_text(
        json.dumps(
            {"train_loss": result.train_loss, "val_loss": result.val_loss},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    _write_manifest(
        out_dir,
        "train",
        {
            "dataset": dataset_fingerprint(dataset_path),
            "seed": cfg.seed,
            "split_seed": args.split_seed,
            "epochs": cfg.epochs,
            "train_rows": len(train_split),
            "versions": _versions(),
        },
    )
    print(
        f"trained on {len(train_split)} rows, final train loss {result.train_loss[-1]:.3e}"
    )
    return 0


def _per_acquisition(samples: Sequence[EnhancerSample], enhanced: np.ndarray):
    """Median-aggregate initial/enhanced/truth triples per scenario."""
    by_scenario: dict[str, list[int]] = {}
    for i, s in enumerate(samples):
        by_scenario.setdefault(s.scenario_id, []).append(i)
    initial, enh, truth = [], [], []
    for sid in sorted(by_scenario):
        idx = by_scenario[sid]
        init_pairs = np.array([samples[i].initial_estimate() for i in idx])
        initial.append(np.median(init_pairs, axis=0))
        enh.append(np.median(enhanced[idx], axis=0))
        truth.append([samples[idx[0]].d_true_m, samples[idx[0]].h_true_m])
    return np.array(initial), np.array(enh), np.array(truth)


def evaluate_split(samples: Sequence[EnhancerSample], model) -> dict:
    """Per-frame and per-acquisition error reports for a sample set."""
    feats = np.stack([s.features() for s in samples])
    truths = np.stack([s.labels() for s in samples])
    initial = np.array([s.initial_estimate() for s in samples])
    enhanced = forward(model, feats)
    frame_report = build_error_report(initial, enhanced, truths)
    acq = _per_acquisition(samples, enhanced)
    acq_report = build_error_report(*acq)
    return {
        "per_frame": frame_report,
        "per_acquisition": acq_report,
        "n_frames": len(samples),
        "n_acquisitions": acq[0].shape[0],
    }


def cmd_evaluate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    eval_dir = out_dir / "eval"
    eval_dir.mkdir(parents=True, exist_ok=True)
    dataset_path = Path(args.dataset) if args.dataset else out_dir / "dataset.csv"
    model_path = Path(args.model) if args.model else out_dir / "model.json"
    samples = read_dataset(dataset_path)
    _, test_split = split_dataset(samples, split_seed=args.split_seed)
    model = load_model(model_path)
    results = evaluate_split(test_split, model)

    doc = {
        "n_frames": results["n_frames"],
        "n_acquisitions": results["n_acquisitions"],
        "per_frame": report_to_dict(results["per_frame"]),
        "per_acquisition": report_to_dict(results["per_acquisition"]),
    }
    (eval_dir / "report.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    fr = results["per_frame"]
    for name, metrics in (
        ("initial_depth", fr.initial_depth),
        ("initial_height", fr.initial_height),
        ("enhanced_depth", fr.enhanced_depth),
        ("enhanced_height", fr.enhanced_height),
    ):
        write_histogram_csv(metrics, eval_dir / f"hist_{name}.csv")
    _write_manifest(
        out_dir,
        "evaluate",
        {
            "dataset": dataset_fingerprint(dataset_path),
            "split_seed": args.split_seed,
            "test_rows": results["n_frames"],
            "versions": _versions(),
        },
    )
    pf = doc["per_frame"]
    print(
        "per-frame MAE (cm): "
        f"depth {pf['initial']['depth']['mae_cm']:.2f} -> {pf['enhanced']['depth']['mae_cm']:.2f}, "
        f"height {pf['initial']['height']['mae_cm']:.2f} -> {pf['enhanced']['height']['mae_cm']:.2f}"
    )
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems are validation errors, exit 1
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stairdim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"stairdim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", required=True, help="run directory for outputs")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    p = sub.add_parser("simulate", help="synthesize cube files for a scenario")
    p.add_argument("--config", help="scenario JSON (default: built-in scenario)")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("process", help="extract targets and dimensions")
    p.add_argument("--config", help="scenario JSON to synthesize and process in memory")
    p.add_argument("--cubes", help="run directory (or cubes/ dir) from a simulate run")
    common(p)
    p.add_argument("--exhaustive-aoa", action="store_true", help="AoA over all range bins")
    p.add_argument("--peak-interp", action="store_true", help="parabolic range refinement")
    p.add_argument("--cfar-pfa", type=float, default=None, help="false-alarm probability")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("sweep", help="run the dimension grid and write dataset.csv")
    common(p)
    p.add_argument("--walks-per-combo", type=int, default=10)
    p.add_argument("--exhaustive-aoa", action="store_true")
    p.add_argument("--peak-interp", action="store_true")
    p.add_argument("--cfar-pfa", type=float, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("train", help="train the error enhancer on a dataset")
    common(p)
    p.add_argument("--dataset", help="dataset CSV (default: <out>/dataset.csv)")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--split-seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score initial vs enhanced on the test split")
    common(p)
    p.add_argument("--dataset", help="dataset CSV (default: <out>/dataset.csv)")
    p.add_argument("--model", help="model JSON (default: <out>/model.json)")
    p.add_argument("--split-seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"stairdim: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"stairdim: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
