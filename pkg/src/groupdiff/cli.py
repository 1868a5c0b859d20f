"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 resource guard, 4 numerical failure.
Output files never contain timings, so reruns with the same config and seed
are byte-identical; runtimes go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bounds, csvio, harness
from .core import BoundInputs, FitConfig, to_json
from .errors import ConfigError, GroupDiffError
from .param_select import alpha_from_cbar, default_cbar_grid, lcurve_corner, lcurve_scan
from .preprocess import group_samples
from .solver import fit

log = logging.getLogger("groupdiff")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    print(path)
    return path


def _load_config(args, default: harness.ExperimentConfig) -> harness.ExperimentConfig:
    cfg = default
    if args.config:
        data = json.loads(Path(args.config).read_text())
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        cfg = harness.ExperimentConfig.from_dict({**cfg.to_dict(), **data})
    overrides = {}
    for name in ("function_id", "L", "sigma2", "M", "c_bar", "alpha", "n_seeds"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = tuple(v) if isinstance(v, list) else v
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = cfg.replace(**overrides)
    return cfg


def _out_dir(args, cfg=None) -> Path:
    if getattr(args, "out_dir", None):
        return Path(args.out_dir)
    if cfg is not None and cfg.out_dir:
        return Path(cfg.out_dir)
    return Path("out")


def _samples(args, cfg):
    if getattr(args, "input", None):
        return csvio.ingest_csv(args.input), False
    return harness.generate_samples(cfg), True


def _alpha(args, cfg, N: int) -> float:
    if cfg.alpha is not None:
        return cfg.alpha
    return alpha_from_cbar(cfg.c_bar, cfg.sigma2, N)


def cmd_generate(args):
    cfg = _load_config(args, harness.ExperimentConfig())
    _write(_out_dir(args, cfg), "samples.csv", csvio.samples_csv(harness.generate_samples(cfg)))


def cmd_fit(args):
    cfg = _load_config(args, harness.ExperimentConfig())
    samples, synthetic = _samples(args, cfg)
    grouped = group_samples(samples, cfg.M_list[0], truncate=cfg.truncate)
    f = fit(grouped, FitConfig(alpha=_alpha(args, cfg, grouped.N), solver=cfg.solver))
    out = _out_dir(args, cfg)
    _write(out, "fit.json", to_json(f) + "\n")
    _write(out, "curve.csv", csvio.curve_csv(f, args.density))
    _write(out, "grouped.csv", csvio.grouped_csv(grouped))
    if synthetic:
        rep = harness.error_report(f, cfg.function, samples.L)
        _write(out, "errors.json", _dump(rep.as_dict()))


def cmd_lcurve(args):
    cfg = _load_config(args, harness.ExperimentConfig())
    samples, _ = _samples(args, cfg)
    grouped = group_samples(samples, cfg.M_list[0], truncate=cfg.truncate)
    grid = default_cbar_grid(args.points, args.cbar_min, args.cbar_max)
    curve = lcurve_scan(grouped, cfg.sigma2, grid, penalty_order=args.penalty_order)
    idx, cb, curve = lcurve_corner(curve)
    out = _out_dir(args, cfg)
    _write(out, "lcurve.csv", curve.to_csv())
    _write(out, "lcurve_choice.json", _dump({"index": idx, "c_bar": cb, "alpha": curve.points[idx].alpha}))


def cmd_bound(args):
    inputs = BoundInputs(Q=args.Q, y_k_norm=args.yk_norm, C1=args.C1, C2=args.C2,
                         sigma2=args.sigma2, M=args.M, N=args.N, p=args.p)
    h_M = 1.0 / args.M
    h = args.h if args.h is not None else 1.0 / (args.M * args.N)
    qb = bounds.chi_upper_quantile_bound(args.M, args.p)
    report = {
        "M": args.M, "N": args.N, "p": args.p, "sigma2": args.sigma2, "c_bar": args.c_bar,
        "z_bar": qb.z_bar, "root_residual": qb.root_residual,
        "bound_e": bounds.bound_e(inputs, args.c_bar, h_M, h, args.e1_norm),
        "bound_rate_j0": bounds.bound_rate(inputs, h_M, args.N, 0),
        "bound_rate_j1": bounds.bound_rate(inputs, h_M, args.N, 1),
    }
    if args.sigma2 > 0:
        report["bound_ek"] = bounds.bound_ek(inputs, args.c_bar, h_M)
    _write(_out_dir(args), "bound.json", _dump(report))


def cmd_coverage(args):
    seed = args.seed if args.seed is not None else 0
    rep = bounds.coverage_report(args.M, args.N, args.sigma2, args.p, args.trials, seed)
    _write(_out_dir(args), "coverage.json", _dump(rep))


def cmd_table1(args):
    cfg = _load_config(args, harness.table1_config())
    res = harness.run_table1(cfg)
    out = _out_dir(args, cfg)
    _write(out, "table1.csv", res.to_csv())
    _write(out, "table1_raw.csv", res.raw_csv())


def cmd_convergence(args):
    cfg = _load_config(args, harness.convergence_config())
    if args.L_list:
        cfg = cfg.replace(L_list=tuple(args.L_list))
    res = harness.run_convergence(cfg)
    out = _out_dir(args, cfg)
    _write(out, "convergence.csv", res.to_csv())
    _write(out, "convergence.json", _dump({"slope": res.slope, "against": res.against}))


def cmd_baseline(args):
    cfg = _load_config(args, harness.baseline_config())
    res = harness.run_baseline(cfg)
    print(f"median runtime ms: {res.runtime_ms}", file=sys.stderr)
    _write(_out_dir(args, cfg), "baseline.json", _dump(res.as_dict()))


def cmd_bigdata(args):
    cfg = _load_config(args, harness.bigdata_config())
    res = harness.run_bigdata(cfg)
    rt = [r.report.runtime_ms for r in res.runs]
    print(f"runtime ms per run: median {np.median(rt):.1f}, max {max(rt):.1f}", file=sys.stderr)
    _write(_out_dir(args, cfg), "bigdata.json", _dump(res.as_dict()))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS, help="ExperimentConfig JSON")
    common.add_argument("--out-dir", dest="out_dir", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="groupdiff", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--config", default=None)
    parser.add_argument("--out-dir", dest="out_dir", default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--function", dest="function_id", choices=["cubic", "bump", "sine", "poly"])
        p.add_argument("--L", type=int)
        p.add_argument("--sigma2", type=float)
        p.add_argument("--c-bar", dest="c_bar", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--n-seeds", dest="n_seeds", type=int)
        p.set_defaults(func=func)
        return p

    p = experiment("generate", cmd_generate, "write synthetic noisy samples")
    p.add_argument("--M", type=int)
    p = experiment("fit", cmd_fit, "group and fit samples")
    p.add_argument("--M", type=int)
    p.add_argument("--input", help="samples CSV (x,y); generated from the config when omitted")
    p.add_argument("--density", type=int, default=20, help="curve points per coarse interval")
    p = experiment("lcurve", cmd_lcurve, "scan c_bar and pick the L-curve corner")
    p.add_argument("--M", type=int)
    p.add_argument("--input")
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--cbar-min", type=float, default=1e-4)
    p.add_argument("--cbar-max", type=float, default=10.0)
    p.add_argument("--penalty-order", type=int, choices=[1, 2], default=1)
    p = experiment("table1", cmd_table1, "median errors over seeds for several M")
    p.add_argument("--M", type=int, nargs="+")
    p = experiment("convergence", cmd_convergence, "error scaling with N ~ L^(4/5)")
    p.add_argument("--L-list", dest="L_list", type=int, nargs="+")
    experiment("baseline", cmd_baseline, "ungrouped fit with alpha = sigma^2")
    p = experiment("bigdata", cmd_bigdata, "large-sample pipeline")
    p.add_argument("--M", type=int)

    p = sub.add_parser("bound", parents=[common], help="evaluate the error bounds")
    for name, typ, default in [("M", int, 10), ("N", int, 100), ("p", float, 0.05),
                               ("sigma2", float, 0.2), ("c-bar", float, 0.0239), ("Q", float, 1.0),
                               ("yk-norm", float, 0.0), ("C1", float, 1.0), ("C2", float, 1.0),
                               ("e1-norm", float, 0.0)]:
        p.add_argument(f"--{name}", dest=name.replace("-", "_"), type=typ, default=default)
    p.add_argument("--h", type=float, default=None, help="fine meshsize (default 1/(M N))")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("coverage", parents=[common], help="Monte-Carlo coverage of the chi-square bound")
    p.add_argument("--M", type=int, default=10)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--sigma2", type=float, default=0.2)
    p.add_argument("--p", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=cmd_coverage)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except GroupDiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (json.JSONDecodeError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
