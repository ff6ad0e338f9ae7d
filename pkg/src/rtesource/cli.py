"""Command-line front door: forward runs, reconstructions, checks, plots.

Subcommands: forward, reconstruct, verify, plot, metrics.  Exit codes:
0 success, 2 usage/config error, 3 I/O error, 4 numerical failure.
All experiment parameters live in a JSON config:

    {
      "medium": { ... as accepted by medium_from_config ... },
      "forward": {"grid_n": 256, "n_dirs": 360, "tol": 1e-8,
                  "max_iters": 2000, "n_boundary": 360},
      "reconstruction": {"grid_n": 128, "M": 8, "N": 64,
                         "J_max": null, "smoothing": false},
      "out": "results"
    }
"""

import argparse
import json
import os
import sys

import numpy as np

from . import io as rio
from .errors import (DomainError, FormatError, IterationLimitError,
                     SolverError)
from .forward import extract_boundary_characteristics, solve_forward
from .geometry import DiscDomain, Grid
from .media import medium_from_config
from .reconstruction import (ReconstructionConfig, error_metrics, reconstruct)
from .verify import SUITES, run_suite

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


class UsageError(Exception):
    pass


def _load_config(path):
    if path is None:
        raise UsageError("--config is required")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc


def _require(cfg, key):
    if key not in cfg:
        raise UsageError(f"config is missing the {key!r} section")
    return cfg[key]


def cmd_forward(args):
    cfg = _load_config(args.config)
    med, src = medium_from_config(cfg.get("medium", {}))
    fw = _require(cfg, "forward")
    grid = Grid.make(int(fw.get("grid_n", 256)))
    flux = solve_forward(med, src, grid, int(fw.get("n_dirs", 360)),
                         tol=float(fw.get("tol", 1e-8)),
                         max_iters=int(fw.get("max_iters", 2000)))
    dom = DiscDomain(int(fw.get("n_boundary", 360)))
    bd = extract_boundary_characteristics(flux, med, src, dom)
    out = args.out or cfg.get("out", ".")
    os.makedirs(out, exist_ok=True)
    data_path = os.path.join(out, "boundary.data")
    rio.save_boundary_data(data_path, bd)
    log = {"iterations": len(flux.residuals),
           "final_residual": float(flux.residuals[-1]),
           "residuals": [float(r) for r in flux.residuals]}
    with open(os.path.join(out, "forward_log.json"), "w") as fh:
        json.dump(log, fh, indent=2)
    print(f"wrote {data_path} ({bd.n_boundary} x {bd.n_dirs}), "
          f"{log['iterations']} sweeps, residual {log['final_residual']:.3e}")
    return 0


def apply_noise(bd, level, seed):
    """Multiplicative Gaussian noise on the outgoing samples, in place."""
    rng = np.random.default_rng(seed)
    factor = 1.0 + level * rng.standard_normal(bd.values.shape)
    bd.values *= np.where(bd.values != 0.0, factor, 1.0)
    return bd


def cmd_reconstruct(args):
    cfg = _load_config(args.config)
    if args.data is None:
        raise UsageError("--data is required for reconstruct")
    bd = rio.load_boundary_data(args.data)
    med, src = medium_from_config(cfg.get("medium", {}))
    rc = _require(cfg, "reconstruction")
    fw = cfg.get("forward", {})
    if (int(rc.get("grid_n", 128)) == int(fw.get("grid_n", 256))
            and not args.override_inverse_crime_guard):
        raise UsageError(
            "forward and reconstruction grids are equal; pass "
            "--override-inverse-crime-guard to run anyway")
    if args.noise:
        apply_noise(bd, args.noise, args.seed)
    rcfg = ReconstructionConfig(
        M=int(rc.get("M", 8)), N=int(rc.get("N", 64)),
        grid_n=int(rc.get("grid_n", 128)),
        J_max=rc.get("J_max"), smoothing=bool(rc.get("smoothing", False)),
        n_dirs_h=int(rc.get("n_dirs_h", 360)),
        mode_window=rc.get("mode_window", "cosine"))
    result = reconstruct(bd, med, rcfg)
    grid = Grid.make(rcfg.grid_n)
    f_true = np.where(grid.inside, src(grid.xx, grid.yy), 0.0)
    metrics = error_metrics(result.f_rec, f_true, grid)
    out = args.out or cfg.get("out", "results")
    rio.write_result_bundle(out, result, grid, f_true=f_true,
                            metrics={"rel_l2": metrics["rel_l2"],
                                     "plateau_means": metrics["plateau_means"],
                                     "cross_section": metrics["cross_section"]})
    pm = metrics["plateau_means"]
    print(f"rel_l2 {metrics['rel_l2']:.4f}  plateau rect {pm['rect']:.4f}  "
          f"plateau b2 {pm['b2']:.4f}")
    print(f"bundle written to {out}")
    return 0


def cmd_verify(args):
    name = args.suite
    if name not in SUITES and name != "all":
        raise UsageError(f"unknown suite {name!r}; "
                         f"choose from {sorted(SUITES)} or 'all'")
    report = run_suite(name)
    text = json.dumps(report, indent=2)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"verify_{name}.json"), "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report["passed"] else EXIT_NUMERICAL


def cmd_plot(args):
    if args.data is None:
        raise UsageError("--data BUNDLE_DIR is required for plot")
    path = os.path.join(args.data, "f_rec.field")
    if not os.path.exists(path):
        raise FormatError(f"no result bundle at {args.data}")
    f_rec, header = rio.load_field(path)
    out = args.out or args.data
    os.makedirs(out, exist_ok=True)
    rio.write_pgm(os.path.join(out, "f_rec.pgm"), f_rec.T[::-1])
    print(f"wrote {os.path.join(out, 'f_rec.pgm')} "
          f"({header['n']} x {header['n']})")
    return 0


def cmd_metrics(args):
    if args.data is None:
        raise UsageError("--data BUNDLE_DIR is required for metrics")
    f_path = os.path.join(args.data, "f_rec.field")
    t_path = os.path.join(args.data, "f_true.field")
    if not (os.path.exists(f_path) and os.path.exists(t_path)):
        raise FormatError(f"bundle at {args.data} lacks f_rec/f_true fields")
    f_rec, header = rio.load_field(f_path)
    f_true, _ = rio.load_field(t_path)
    grid = Grid.make(int(header["n"]))
    m = error_metrics(np.real(f_rec), np.real(f_true), grid)
    out = {"rel_l2": m["rel_l2"], "plateau_means": m["plateau_means"]}
    print(json.dumps(out, indent=2))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="rtesource",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in (("forward", cmd_forward), ("reconstruct", cmd_reconstruct),
                     ("verify", cmd_verify), ("plot", cmd_plot),
                     ("metrics", cmd_metrics)):
        sp = sub.add_parser(name)
        sp.set_defaults(fn=fn)
        sp.add_argument("--config", help="experiment config JSON")
        sp.add_argument("--data", help="boundary data file or bundle dir")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--noise", type=float, default=0.0,
                        help="relative noise level on outgoing samples")
        sp.add_argument("--seed", type=int, default=0,
                        help="noise RNG seed")
        sp.add_argument("--override-inverse-crime-guard", action="store_true")
        if name == "verify":
            sp.add_argument("suite", nargs="?", default="all")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (IterationLimitError, SolverError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
