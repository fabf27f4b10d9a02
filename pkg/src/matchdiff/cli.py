"""Command-line interface: synth, register, verify, bench, metrics.

Conventions shared by every subcommand:

* Configuration is a flat JSON object with dotted keys (``{"sampler.steps": 20}``)
  loaded via ``--config``; every key has a mirroring flag (``--sampler.steps``).
  Precedence: built-in defaults < config file < flags.
* Logs go to stderr, data goes to files (and terse manifests to stdout).
* Output root: ``--out``, else the MATCHDIFF_OUTPUT_ROOT environment variable,
  else the current directory.
* Exit codes: 0 success, 1 partial failure (some instances failed), 2 invalid
  configuration or arguments.
* ``--jobs N`` parallelizes instance-level work; results are written in sorted
  instance order so the output does not depend on scheduling.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import logging
import os
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import io as mio
from .denoise import DenoiserConfig, GeometricDenoiser
from .errors import MatchdiffError
from .geometry import rotation_geodesic_deg, soft_procrustes
from .matmath import MatchingMatrix
from .metrics import (
    TAU_FMR,
    TAU_INLIER,
    TAU_RMSE,
    flow_metrics,
    inlier_ratio,
    nfmr,
    pose_auc,
    transform_rmse,
)
from .otsolve import theorem2_iterate, verify_theorem1
from .sampler import SamplerConfig, extract_correspondences, reverse_sample
from .schedule import build_schedule
from .synth import ScenePair, make_deformable_pair, make_features, make_rigid_pair

log = logging.getLogger("matchdiff")

# Registry of every config key: (key, type, default, help).  Flags mirror keys.
CONFIG_KEYS: Tuple[Tuple[str, type, Any, str], ...] = (
    ("task", str, "rigid", "instance family: rigid | deformable"),
    ("seed", int, 0, "master seed; instance k uses seed+k"),
    ("trials", int, 3, "number of instances"),
    ("synth.n", int, 128, "points per cloud"),
    ("synth.noise", float, 0.0, "target jitter sigma (rigid task)"),
    ("synth.overlap", float, 1.0, "matched fraction in (0, 1]"),
    ("synth.rho", float, 0.1, "feature correlation for matched pairs"),
    ("synth.d", int, 528, "feature dimensionality"),
    ("synth.min_separation", float, 0.0, "minimum pairwise distance in the source cloud"),
    ("synth.amp", float, 0.1, "flow amplitude (deformable task)"),
    ("synth.freq", float, 6.0, "flow frequency (deformable task)"),
    ("schedule.T", int, 1000, "diffusion steps in the full schedule"),
    ("schedule.kind", str, "linear-beta", "schedule family: linear-beta | cosine"),
    ("schedule.beta_min", float, 1e-4, "smallest beta (linear-beta)"),
    ("schedule.beta_max", float, 0.02, "largest beta (linear-beta)"),
    ("sampler.steps", int, 20, "reverse-sampling steps"),
    ("sampler.sigma", float, 0.0, "stochasticity; 0 is deterministic"),
    ("sampler.init", str, "white-noise", "initial state: white-noise | provided"),
    ("denoiser.tau_feat", float, 0.001, "feature-logit temperature"),
    ("denoiser.lambda_geo", float, 2.0, "geometric-distance weight"),
    ("denoiser.sinkhorn_iters", int, 100, "projection iterations inside the denoiser"),
    ("denoiser.pe_dim", int, 48, "positional-encoding width (multiple of 6)"),
    ("extract.mode", str, "mutual-argmax", "correspondence rule: mutual-argmax | topk | threshold"),
    ("extract.k", int, 0, "k for topk; 0 means min(N, M)"),
    ("extract.thresh", float, 0.0, "threshold for the threshold rule"),
    ("metrics.tau_inlier", float, TAU_INLIER, "inlier distance threshold"),
    ("metrics.tau_fmr", float, TAU_FMR, "recall threshold on inlier ratio"),
    ("metrics.tau_rmse", float, TAU_RMSE, "registration recall threshold on RMSE"),
    ("verify.trials", int, 200, "theorem-1 instances"),
    ("verify.n", int, 0, "cloud size for theorem 1; 0 cycles 4,5,6 (max 6)"),
    ("verify.warp_samples", int, 32, "sampled warps per theorem-1 instance"),
    ("verify.theorem2_trials", int, 100, "theorem-2 instances"),
    ("verify.theorem2_n", int, 16, "points per cloud for theorem 2"),
    ("verify.theorem2_rho", float, 0.9, "feature correlation for theorem 2"),
    ("verify.theorem2_epsilon", float, 0.01, "entropic regularizer for theorem 2"),
    ("verify.theorem2_lambda_geo", float, 50.0, "geometry weight for theorem 2"),
    ("verify.theorem2_outer", int, 10, "outer-iteration budget for theorem 2"),
    ("verify.theorem2_min_separation", float, 0.25, "minimum point separation for theorem 2"),
    ("bench.steps_grid", str, "1,20", "comma-separated sampler step counts"),
    ("bench.rho_grid", str, "0.1", "comma-separated feature correlations"),
    ("bench.overlap_grid", str, "1.0", "comma-separated overlap ratios"),
)

_KEY_TYPES = {key: typ for key, typ, _, _ in CONFIG_KEYS}
_KEY_DEFAULTS = {key: default for key, _, default, _ in CONFIG_KEYS}


class ConfigError(MatchdiffError):
    """Raised for malformed configuration; maps to exit code 2."""


def _coerce(key: str, value: Any) -> Any:
    typ = _KEY_TYPES[key]
    try:
        if typ is bool and isinstance(value, str):
            return value.lower() in ("1", "true", "yes")
        return typ(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r}: cannot interpret {value!r} as {typ.__name__}") from exc


def load_config(path: Optional[str], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Merge defaults, the optional JSON config file, and flag overrides."""
    merged = dict(_KEY_DEFAULTS)
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key, value in raw.items():
            if key not in _KEY_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, value)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = _coerce(key, value)
    return merged


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat JSON config with dotted keys")
    for key, typ, default, help_text in CONFIG_KEYS:
        parser.add_argument(
            f"--{key}",
            dest=key,
            type=str if typ is bool else typ,
            default=None,
            metavar=key.rsplit(".", 1)[-1].upper(),
            help=f"{help_text} (default {default!r})",
        )


def _collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: getattr(args, key, None) for key in _KEY_TYPES}


def _output_root(args: argparse.Namespace) -> str:
    root = args.out or os.environ.get("MATCHDIFF_OUTPUT_ROOT") or "."
    os.makedirs(root, exist_ok=True)
    return root


def _grid(text: str, typ: type) -> List[Any]:
    try:
        values = [typ(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc
    if not values:
        raise ConfigError(f"grid {text!r} is empty")
    return values


def _make_pair(cfg: Dict[str, Any], seed: int) -> ScenePair:
    if cfg["task"] == "rigid":
        pair = make_rigid_pair(
            cfg["synth.n"],
            noise_sigma=cfg["synth.noise"],
            overlap=cfg["synth.overlap"],
            seed=seed,
            min_separation=cfg["synth.min_separation"],
        )
    elif cfg["task"] == "deformable":
        pair = make_deformable_pair(cfg["synth.n"], amp=cfg["synth.amp"], freq=cfg["synth.freq"], seed=seed)
    else:
        raise ConfigError(f"unknown task {cfg['task']!r}")
    return make_features(pair, cfg["synth.rho"], d=cfg["synth.d"], seed=seed)


# ----------------------------------------------------------------- synth ----


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    root = _output_root(args)
    inst_root = os.path.join(root, "instances")
    os.makedirs(inst_root, exist_ok=True)
    manifest: List[str] = []
    for k in range(cfg["trials"]):
        seed = cfg["seed"] + k
        pair = _make_pair(cfg, seed)
        name = f"{cfg['task']}-{seed:08d}"
        mio.write_scene_pair(os.path.join(inst_root, name), pair)
        manifest.append(f"{name} n={len(pair.source)} mode={pair.mode} seed={seed}")
        log.info("wrote instance %s", name)
    manifest_path = os.path.join(inst_root, "manifest.txt")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(manifest) + "\n")
    for line in manifest:
        print(line)
    return 0


# -------------------------------------------------------------- register ----


def _pipeline(pair: ScenePair, cfg: Dict[str, Any]) -> Dict[str, Any]:
    """Run reverse sampling on one instance and score the result."""
    mode = "registration-3d" if pair.mode == "rigid" else "image-2d"
    schedule = build_schedule(
        cfg["schedule.T"],
        kind=cfg["schedule.kind"],
        beta_min=cfg["schedule.beta_min"],
        beta_max=cfg["schedule.beta_max"],
    )
    denoiser = GeometricDenoiser(
        DenoiserConfig(
            tau_feat=cfg["denoiser.tau_feat"],
            lambda_geo=cfg["denoiser.lambda_geo"],
            sinkhorn_iters=cfg["denoiser.sinkhorn_iters"],
            pe_dim=cfg["denoiser.pe_dim"],
        )
    )
    sampler_cfg = SamplerConfig(
        steps=cfg["sampler.steps"],
        sigma=cfg["sampler.sigma"],
        init=cfg["sampler.init"],
        seed=pair.seed,
    )
    final, _ = reverse_sample(
        pair,
        schedule,
        denoiser,
        sampler_cfg,
        mode=mode,
        sinkhorn_iters=cfg["denoiser.sinkhorn_iters"],
        keep_trace=False,
    )
    k = cfg["extract.k"] if cfg["extract.k"] > 0 else min(final.rows, final.cols)
    corr = extract_correspondences(
        final,
        mode=cfg["extract.mode"],
        k=k,
        thresh=cfg["extract.thresh"],
    )
    record: Dict[str, Any] = {
        "mode": pair.mode,
        "seed": pair.seed,
        "n_source": len(pair.source),
        "n_target": len(pair.target),
        "n_correspondences": len(corr.pairs),
        "correspondences": [[int(i), int(j), float(s)] for i, j, s in corr.pairs],
        "inlier_ratio": inlier_ratio(corr, pair, tau=cfg["metrics.tau_inlier"]),
    }
    if pair.mode == "rigid":
        tf = soft_procrustes(final, pair.source, pair.target)
        rmse = transform_rmse(tf, pair)
        record["transform"] = {
            "rotation": tf.rotation.tolist(),
            "translation": tf.translation.tolist(),
        }
        record["rmse"] = rmse
        record["recalled"] = bool(rmse < cfg["metrics.tau_rmse"])
        record["rot_err_deg"] = rotation_geodesic_deg(tf.rotation, pair.gt_transform.rotation)
        record["t_err"] = float(np.linalg.norm(tf.translation - pair.gt_transform.translation))
    else:
        record["nfmr"] = nfmr(corr, pair)
        if corr.pairs:
            src_idx, tgt_idx = corr.index_arrays()
            pred = pair.target.points[tgt_idx] - pair.source.points[src_idx]
            epe, acc_s, acc_r, outlier = flow_metrics(pred, pair.gt_flow[src_idx])
            record["flow"] = {"epe": epe, "acc_strict": acc_s, "acc_relax": acc_r, "outlier": outlier}
        else:
            record["flow"] = None
    return record


def _register_one(task: Tuple[str, Dict[str, Any]]) -> Tuple[str, Optional[Dict[str, Any]], Optional[str]]:
    path, cfg = task
    name = os.path.basename(os.path.normpath(path))
    try:
        pair = mio.read_scene_pair(path)
        record = _pipeline(pair, cfg)
        record["instance"] = name
        return name, record, None
    except Exception as exc:  # noqa: BLE001 - isolate per-instance failures
        return name, None, f"{type(exc).__name__}: {exc}"


def _run_parallel(tasks: Sequence[Tuple[str, Dict[str, Any]]], jobs: int, fn) -> List[Tuple]:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def cmd_register(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    root = _output_root(args)
    res_root = os.path.join(root, "results")
    os.makedirs(res_root, exist_ok=True)
    instances = sorted(args.instances)
    if not instances:
        raise ConfigError("register needs at least one instance directory")
    results = _run_parallel([(p, cfg) for p in instances], args.jobs, _register_one)
    results.sort(key=lambda item: item[0])
    rows: List[Dict[str, Any]] = []
    failures = 0
    for name, record, error in results:
        if error is not None:
            failures += 1
            log.error("instance %s failed: %s", name, error)
            continue
        out_path = os.path.join(res_root, f"{name}.json")
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(record, fh, sort_keys=True, indent=1)
            fh.write("\n")
        row = {
            "instance": name,
            "mode": record["mode"],
            "n_correspondences": record["n_correspondences"],
            "inlier_ratio": repr(record["inlier_ratio"]),
            "rmse": repr(record["rmse"]) if "rmse" in record else "",
            "recalled": int(record["recalled"]) if "recalled" in record else "",
            "nfmr": repr(record["nfmr"]) if "nfmr" in record else "",
        }
        rows.append(row)
        print(f"{name} corr={record['n_correspondences']} ir={record['inlier_ratio']:.6f}")
    csv_path = os.path.join(res_root, "results.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["instance", "mode", "n_correspondences", "inlier_ratio", "rmse", "recalled", "nfmr"]
        )
        writer.writeheader()
        writer.writerows(rows)
    if failures == len(results):
        return 1
    return 1 if failures else 0


# ---------------------------------------------------------------- verify ----


def _verify_theorem1_one(task: Tuple[int, int, int, int]) -> Dict[str, Any]:
    index, seed, n, warp_samples = task
    from .geometry import PointCloud

    rng = np.random.default_rng(seed)
    p = PointCloud(rng.uniform(-1.0, 1.0, size=(n, 3)))
    q = PointCloud(rng.uniform(-1.0, 1.0, size=(n, 3)))
    out = verify_theorem1(p, q, n_warp_samples=warp_samples, seed=seed)
    return {
        "instance": index,
        "seed": seed,
        "n": n,
        "lhs": out["lhs"],
        "rhs_upper": out["rhs_upper"],
        "holds": out["holds"],
    }


def _verify_theorem2_one(task: Tuple[int, Dict[str, Any]]) -> Dict[str, Any]:
    seed, cfg = task
    pair = make_rigid_pair(
        cfg["verify.theorem2_n"],
        noise_sigma=0.0,
        overlap=1.0,
        seed=seed,
        min_separation=cfg["verify.theorem2_min_separation"],
    )
    pair = make_features(pair, cfg["verify.theorem2_rho"], d=cfg["synth.d"], seed=seed)
    seq, converged = theorem2_iterate(
        pair.source,
        pair.target,
        n_outer=cfg["verify.theorem2_outer"],
        epsilon=cfg["verify.theorem2_epsilon"],
        lambda_geo=cfg["verify.theorem2_lambda_geo"],
    )
    final = seq[-1].entries
    gt = pair.gt_matrix.entries
    matches_gt = bool(np.all(np.argmax(final, axis=1) == np.argmax(gt, axis=1)))
    return {
        "seed": seed,
        "converged": bool(converged),
        "outer_iterations": len(seq) - 1,
        "matches_gt": matches_gt,
    }


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    root = _output_root(args)
    if cfg["verify.n"] > 6:
        raise ConfigError("verify.n must be at most 6; the bound check enumerates all permutations")
    sizes = [cfg["verify.n"]] if cfg["verify.n"] > 0 else [4, 5, 6]
    t1_tasks = [
        (i, cfg["seed"] + i, sizes[i % len(sizes)], cfg["verify.warp_samples"])
        for i in range(cfg["verify.trials"])
    ]
    t1 = _run_parallel(t1_tasks, args.jobs, _verify_theorem1_one)
    t1.sort(key=lambda rec: rec["instance"])
    t2_tasks = [(cfg["seed"] + i, cfg) for i in range(cfg["verify.theorem2_trials"])]
    t2 = _run_parallel(t2_tasks, args.jobs, _verify_theorem2_one)
    t2.sort(key=lambda rec: rec["seed"])
    n_hold = sum(1 for rec in t1 if rec["holds"])
    n_conv = sum(1 for rec in t2 if rec["converged"] and rec["matches_gt"])
    report = {
        "theorem1": t1,
        "theorem2": t2,
        "summary": {
            "theorem1_trials": len(t1),
            "theorem1_holds": n_hold,
            "theorem2_trials": len(t2),
            "theorem2_converged_to_gt": n_conv,
        },
    }
    out_path = os.path.join(root, "verify.json")
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"theorem1 holds {n_hold}/{len(t1)}")
    print(f"theorem2 converged-to-gt {n_conv}/{len(t2)}")
    return 0 if n_hold == len(t1) else 1


# ----------------------------------------------------------------- bench ----


def _bench_one(task: Tuple[int, int, float, float, Dict[str, Any]]) -> Tuple[Tuple, Dict[str, Any]]:
    index, steps, rho, overlap, cfg = task
    cell_cfg = dict(cfg)
    cell_cfg["sampler.steps"] = steps
    cell_cfg["synth.rho"] = rho
    cell_cfg["synth.overlap"] = overlap
    seed = cfg["seed"] + index
    pair = _make_pair(cell_cfg, seed)
    start = time.perf_counter()
    record = _pipeline(pair, cell_cfg)
    elapsed = time.perf_counter() - start
    key = (steps, rho, overlap, index)
    record["elapsed"] = elapsed
    return key, record


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    root = _output_root(args)
    steps_grid = _grid(cfg["bench.steps_grid"], int)
    rho_grid = _grid(cfg["bench.rho_grid"], float)
    overlap_grid = _grid(cfg["bench.overlap_grid"], float)
    tasks = []
    for steps in steps_grid:
        for rho in rho_grid:
            for overlap in overlap_grid:
                for k in range(cfg["trials"]):
                    tasks.append((k, steps, rho, overlap, cfg))
    results = _run_parallel(tasks, args.jobs, _bench_one)
    cells: Dict[Tuple, List[Dict[str, Any]]] = {}
    for key, record in sorted(results, key=lambda item: item[0]):
        cells.setdefault(key[:3], []).append(record)
    csv_path = os.path.join(root, "bench.csv")
    timing: Dict[str, float] = {}
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["steps", "rho", "overlap", "trials", "mean_inlier_ratio", "mean_rmse", "recall"])
        for (steps, rho, overlap), records in sorted(cells.items()):
            irs = [rec["inlier_ratio"] for rec in records]
            rmses = [rec["rmse"] for rec in records if "rmse" in rec]
            recalls = [rec["recalled"] for rec in records if "recalled" in rec]
            writer.writerow(
                [
                    steps,
                    repr(rho),
                    repr(overlap),
                    len(records),
                    repr(float(np.mean(irs))),
                    repr(float(np.mean(rmses))) if rmses else "",
                    repr(float(np.mean(recalls))) if recalls else "",
                ]
            )
            cell_name = f"steps={steps},rho={rho},overlap={overlap}"
            timing[cell_name] = float(np.sum([rec["elapsed"] for rec in records]))
            print(f"{cell_name} mean_ir={float(np.mean(irs)):.6f}")
    with open(os.path.join(root, "bench_timing.json"), "w", encoding="utf-8") as fh:
        json.dump(timing, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return 0


# --------------------------------------------------------------- metrics ----


def cmd_metrics(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    root = _output_root(args)
    res_root = args.results or os.path.join(root, "results")
    if not os.path.isdir(res_root):
        raise ConfigError(f"results directory {res_root!r} does not exist")
    records = []
    for name in sorted(os.listdir(res_root)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(res_root, name), "r", encoding="utf-8") as fh:
            records.append(json.load(fh))
    if not records:
        raise ConfigError(f"no per-instance JSON records under {res_root!r}")
    irs = [rec["inlier_ratio"] for rec in records]
    summary: Dict[str, Any] = {
        "instances": len(records),
        "mean_inlier_ratio": float(np.mean(irs)),
        "feature_matching_recall": float(np.mean([ir > cfg["metrics.tau_fmr"] for ir in irs])),
    }
    rigid = [rec for rec in records if rec["mode"] == "rigid"]
    if rigid:
        summary["mean_rmse"] = float(np.mean([rec["rmse"] for rec in rigid]))
        summary["registration_recall"] = float(np.mean([rec["recalled"] for rec in rigid]))
        rot_errs = np.array([rec["rot_err_deg"] for rec in rigid])
        summary["pose_auc"] = pose_auc(rot_errs)
    deform = [rec for rec in records if rec["mode"] == "deformable"]
    if deform:
        summary["mean_nfmr"] = float(np.mean([rec["nfmr"] for rec in deform]))
    out_path = os.path.join(root, "metrics.json")
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
        fh.write("\n")
    for key in sorted(summary):
        print(f"{key}={summary[key]}")
    return 0


# ------------------------------------------------------------------ main ----


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchdiff",
        description="Correspondence estimation by reverse diffusion over matching matrices.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO instead of WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate benchmark instances")
    p_register = sub.add_parser("register", help="run the sampler on stored instances")
    p_register.add_argument("instances", nargs="*", help="instance directories")
    p_verify = sub.add_parser("verify", help="check the two bound/convergence statements numerically")
    p_bench = sub.add_parser("bench", help="sweep sampler settings over synthetic instances")
    p_metrics = sub.add_parser("metrics", help="aggregate per-instance register outputs")
    p_metrics.add_argument("--results", help="directory of per-instance JSON records")

    for p in (p_synth, p_register, p_verify, p_bench, p_metrics):
        _add_config_flags(p)
        p.add_argument("--out", help="output root (default: MATCHDIFF_OUTPUT_ROOT or '.')")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "register": cmd_register,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "metrics": cmd_metrics,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MatchdiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
