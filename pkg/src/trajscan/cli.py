"""Command-line interface: simplify, scan, oracle, plant, power."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .coreset import TAGS, CoresetMethod, simplify
from .discrepancy import DiscrepancyFn, Family, Model, RegionStats
from .errors import ConfigError, TrajscanError
from .harness import GENERATORS, PlantConfig, SyntheticConfig, exact_scan, expected_planted_stats, generate_synthetic, plant, power_experiment
from .io import ingest, write_points, write_waypoints
from .pipeline import ScanConfig, run_scan
from .trajectory import TrajectoryDataset

SCHEMA_VERSION = 1
SEED_ENV = "TRAJSCAN_SEED"


class CliError(TrajscanError):
    """Bad command-line usage."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


# ------------------------------------------------------------------ helpers


def _seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _fn(args) -> DiscrepancyFn:
    name = args.fn or ("linear" if args.model == "flux" else "kulldorff")
    return DiscrepancyFn(name, args.one_sided)


def _set_threads(n: Optional[int]) -> None:
    if n is None:
        return
    if n < 1:
        raise ConfigError("--threads must be at least 1")
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _to_normalized(value: Optional[float], ds: TrajectoryDataset, units: str) -> Optional[float]:
    if value is None or units == "normalized":
        return value
    return value * ds.transform.scale


def _shape_dict(shape, ds: TrajectoryDataset) -> Optional[dict]:
    if shape is None:
        return None
    return ds.transform.shape_to_original(shape).to_dict()


def _emit_json(obj: dict, path: Optional[str]) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _emit_text(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _header(command: str) -> dict:
    return {"schema_version": SCHEMA_VERSION, "tool": "trajscan", "version": __version__, "command": command}


def _stats(stats: Optional[RegionStats]) -> dict:
    if stats is None:
        return {"r_frac": 0.0, "b_frac": 0.0, "phi": 0.0}
    return stats.to_dict()


# ------------------------------------------------------------------ subcommands


def cmd_simplify(args) -> int:
    ds, report, ids = ingest(args.input)
    alpha = _to_normalized(args.alpha, ds, args.units)
    r = _to_normalized(args.r, ds, args.units)
    method = CoresetMethod(args.method, alpha, r, args.c)
    seed = _seed(args.seed)
    rows = []
    for i, t in enumerate(ds):
        rng = np.random.default_rng([seed, i]) if method.tag == "random" else None
        pts = simplify(t, method, rng)
        rows.append((ids[i], ds.transform.inverse(pts)))
    buf = io.StringIO()
    write_points(buf, rows)
    _emit_text(buf.getvalue(), args.output)
    if args.report:
        out = _header("simplify")
        out.update(input=report.to_dict(), method=method.tag, alpha=alpha, r=r, seed=seed, points=sum(len(p) for _, p in rows))
        _emit_json(out, args.report)
    return 0


def _scan_config(args, ds: TrajectoryDataset, seed: int) -> ScanConfig:
    u = args.units
    return ScanConfig(
        model=Model(args.model),
        family=Family(args.family),
        fn=_fn(args),
        eps=args.eps,
        delta=args.delta,
        alpha=_to_normalized(args.alpha, ds, u),
        r_min=_to_normalized(args.r_min, ds, u),
        r_max=_to_normalized(args.r_max, ds, u),
        z=args.z,
        coreset=args.coreset,
        max_side=_to_normalized(args.max_side, ds, u),
        seed=seed,
        exact_eval=args.exact_eval,
        hull_trick=not args.no_hull_trick,
        c_net=args.c_net,
        c_sample=args.c_sample,
        adapt_k=not args.fixed_k,
        partial_method=args.partial_method,
    )


def cmd_scan(args) -> int:
    ds, report, _ = ingest(args.input)
    seed = _seed(args.seed)
    cfg = _scan_config(args, ds, seed)
    t0 = time.perf_counter()
    out = run_scan(ds, cfg)
    elapsed = time.perf_counter() - t0
    res = out.result
    doc = _header("scan")
    doc.update(
        model=cfg.model.value,
        family=cfg.family.value,
        fn={"name": cfg.fn.name, "one_sided": cfg.fn.one_sided},
        shape=_shape_dict(res.shape, ds),
        shape_normalized=res.shape.to_dict() if res.shape is not None else None,
        **_stats(out.full_stats),
        sample_stats=_stats(res.stats if res.found else None),
        n=out.n,
        s=out.s,
        n_k=out.n_k,
        s_k=out.s_k,
        seed=seed,
        config=cfg.to_dict(),
        input=report.to_dict(),
        runtime_ms=round(elapsed * 1000, 3),
    )
    _emit_json(doc, args.output)
    return 0


def cmd_oracle(args) -> int:
    ds, report, _ = ingest(args.input)
    model, family = Model(args.model), Family(args.family)
    fn = _fn(args)
    guard = None if args.no_guard else args.max_traj
    wguard = None if args.no_guard else args.max_waypoints
    t0 = time.perf_counter()
    res = exact_scan(
        ds, family, model, fn,
        _to_normalized(args.r_min, ds, args.units), _to_normalized(args.r_max, ds, args.units),
        args.resolution, guard, wguard,
    )
    elapsed = time.perf_counter() - t0
    doc = _header("oracle")
    doc.update(
        model=model.value,
        family=family.value,
        fn={"name": fn.name, "one_sided": fn.one_sided},
        shape=_shape_dict(res.shape, ds),
        shape_normalized=res.shape.to_dict() if res.shape is not None else None,
        **_stats(res.stats if res.found else None),
        n=len(ds),
        s=len(ds),
        n_k=ds.n_waypoints,
        s_k=ds.n_waypoints,
        candidates=res.params.get("candidates", 0),
        resolution=args.resolution,
        input=report.to_dict(),
        runtime_ms=round(elapsed * 1000, 3),
    )
    _emit_json(doc, args.output)
    return 0


def _synthetic_config(args, seed: int) -> SyntheticConfig:
    return SyntheticConfig(args.n_traj, (args.min_waypoints, args.max_waypoints), args.step, args.generator, seed)


def cmd_plant(args) -> int:
    seed = _seed(args.seed)
    if args.input:
        ds, _, ids = ingest(args.input)
    else:
        ds = generate_synthetic(_synthetic_config(args, seed))
        ids = [str(t.id) for t in ds]
    pc = PlantConfig(Family(args.family), Model(args.model), args.p, args.q, args.f, seed, _fn(args))
    labeled, shape, stats = plant(ds, pc)
    buf = io.StringIO()
    write_waypoints(buf, labeled, ids)
    _emit_text(buf.getvalue(), args.output)
    doc = _header("plant")
    doc.update(
        model=pc.model.value,
        family=pc.family.value,
        fn={"name": pc.discrepancy.name, "one_sided": pc.discrepancy.one_sided},
        shape=_shape_dict(shape, labeled),
        shape_normalized=shape.to_dict(),
        **stats.to_dict(),
        p=pc.p,
        q=pc.q,
        f=pc.f,
        seed=seed,
        n_traj=len(labeled),
        n_recorded=int(labeled.recorded.sum()),
    )
    if pc.model is Model.FULL:
        doc["expected"] = expected_planted_stats(pc.p, pc.q, pc.f, pc.discrepancy).to_dict()
    if args.region is not None:
        _emit_json(doc, args.region)
    return 0


def cmd_power(args) -> int:
    seed = _seed(args.seed)
    dcfg = _synthetic_config(args, seed)
    pc = PlantConfig(Family(args.family), Model(args.model), args.p, args.q, args.f, seed, _fn(args))
    ident = TrajectoryDataset(())
    reports = []
    for eps in args.eps:
        args_eps = argparse.Namespace(**{**vars(args), "eps": eps})
        scfg = _scan_config(args_eps, ident, seed)
        reports.append(power_experiment(dcfg, pc, scfg, args.trials, args.threshold))
    parts = [rep.to_csv(runtime=not args.no_runtime) for rep in reports]
    # one header, then every eps block
    lines = parts[0].splitlines(keepends=True)
    for p in parts[1:]:
        lines.extend(p.splitlines(keepends=True)[1:])
    _emit_text("".join(lines), args.output)
    if args.plot:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "runtime_ms", "phi"])
        for eps, rep in zip(args.eps, reports):
            w.writerow([eps, f"{np.mean([t.runtime for t in rep.trials]) * 1000:.1f}", f"{np.mean([t.found_phi for t in rep.trials]):.12g}"])
        _emit_text(buf.getvalue(), args.plot)
    if args.summary:
        doc = _header("power")
        doc.update(
            model=pc.model.value,
            family=pc.family.value,
            fn={"name": pc.discrepancy.name, "one_sided": pc.discrepancy.one_sided},
            p=pc.p,
            q=pc.q,
            f=pc.f,
            seed=seed,
            alpha=args.alpha,
            runs=[{"eps": eps, **rep.summary()} for eps, rep in zip(args.eps, reports)],
        )
        _emit_json(doc, args.summary)
    return 0


# ------------------------------------------------------------------ parser


def _add_model(p, fn_default_note: str = "") -> None:
    p.add_argument("--model", choices=[m.value for m in Model], default="full")
    p.add_argument("--family", choices=[f.value for f in Family], default="disk")
    p.add_argument("--fn", choices=["kulldorff", "linear"], default=None,
                   help="discrepancy function (default: linear for flux, kulldorff otherwise)" + fn_default_note)
    p.add_argument("--one-sided", action="store_true", help="only score regions where r > b")


def _add_scan_knobs(p, multi_eps: bool = False) -> None:
    if multi_eps:
        p.add_argument("--eps", type=float, nargs="+", default=[0.1], help="one or more statistical error targets")
    else:
        p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=None, help="spatial error")
    p.add_argument("--r-min", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--z", type=int, default=None, help="number of radius doublings; r_max = r_min * 2^z")
    p.add_argument("--coreset", choices=TAGS, default=None)
    p.add_argument("--max-side", type=float, default=None, help="largest rectangle side")
    p.add_argument("--exact-eval", action="store_true", help="exact sample retrieval in the multi-scale disk scan")
    p.add_argument("--no-hull-trick", action="store_true")
    p.add_argument("--c-net", type=float, default=1.0)
    p.add_argument("--c-sample", type=float, default=0.25)
    p.add_argument("--fixed-k", action="store_true", help="size N and S for k = 1 instead of the realized coreset size")
    p.add_argument("--partial-method", choices=["even", "random"], default="even")


def _add_common(p, units: bool = True) -> None:
    p.add_argument("--seed", type=int, default=None, help=f"random seed (default ${SEED_ENV} or 0)")
    p.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    if units:
        p.add_argument("--units", choices=["normalized", "original"], default="normalized",
                       help="units of distance flags")


def _add_synthetic(p) -> None:
    p.add_argument("--n-traj", type=int, default=1000)
    p.add_argument("--min-waypoints", type=int, default=5)
    p.add_argument("--max-waypoints", type=int, default=20)
    p.add_argument("--step", type=float, default=0.02)
    p.add_argument("--generator", choices=GENERATORS, default="random_walk")


def _add_plant(p) -> None:
    p.add_argument("--p", type=float, default=0.5, help="recorded rate outside the region")
    p.add_argument("--q", type=float, default=0.8, help="recorded rate inside the region")
    p.add_argument("--f", type=float, default=0.05, help="baseline mass fraction of the region")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="trajscan", description="Spatial scan statistics over trajectories.")
    ap.add_argument("--version", action="version", version=f"trajscan {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simplify", help="write per-trajectory coreset points as CSV")
    p.add_argument("input")
    p.add_argument("--method", choices=TAGS, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--r", type=float, default=None, help="disk radius for grid_kernel")
    p.add_argument("--c", type=float, default=1.0, help="size constant for random")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--report", default=None, help="also write an ingestion report JSON")
    _add_common(p)
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("scan", help="approximate scan, result as JSON")
    p.add_argument("input")
    _add_model(p)
    _add_scan_knobs(p)
    p.add_argument("-o", "--output", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("oracle", help="brute-force scan of a small dataset")
    p.add_argument("input")
    _add_model(p)
    p.add_argument("--r-min", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--resolution", choices=["segment", "waypoint"], default="segment")
    p.add_argument("--max-traj", type=int, default=200)
    p.add_argument("--max-waypoints", type=int, default=2000)
    p.add_argument("--no-guard", action="store_true", help="lift the size limits")
    p.add_argument("-o", "--output", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("plant", help="label a dataset around a planted region")
    p.add_argument("--input", default=None, help="waypoint CSV; synthetic data when omitted")
    _add_model(p)
    _add_plant(p)
    _add_synthetic(p)
    p.add_argument("-o", "--output", default=None, help="labeled waypoint CSV")
    p.add_argument("--region", default=None, help="planted region JSON (stdout when omitted and -o is a file)")
    _add_common(p, units=False)
    p.set_defaults(func=cmd_plant)

    p = sub.add_parser("power", help="recovery rate of planted regions on synthetic data")
    _add_model(p)
    _add_plant(p)
    _add_synthetic(p)
    _add_scan_knobs(p, multi_eps=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("-o", "--output", default=None, help="per-trial CSV")
    p.add_argument("--summary", default=None, help="summary JSON")
    p.add_argument("--plot", default=None, help="plot CSV: param, runtime_ms, phi")
    p.add_argument("--no-runtime", action="store_true", help="omit the runtime column")
    _add_common(p, units=False)
    p.set_defaults(func=cmd_power, units="normalized")
    return ap


def _error_doc(exc: BaseException) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "tool": "trajscan", "version": __version__}
    doc["error"] = {"type": type(exc).__name__, "message": str(exc)}
    return doc


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _set_threads(args.threads)
        if args.command == "plant" and args.region is None and args.output not in (None, "-"):
            args.region = "-"
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(json.dumps(_error_doc(exc)) + "\n")
        return 2
    except (TrajscanError, ValueError, OSError) as exc:
        sys.stderr.write(json.dumps(_error_doc(exc)) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
