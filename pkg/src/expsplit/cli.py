"""Command line interface: ``expsplit run`` and ``expsplit verify``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import StudyConfig, run_convergence_study
from .problems import problem_labels

# keys accepted both as CLI flags and in a JSON config file
_CONFIG_KEYS = {
    "problem": "problem",
    "schemes": "schemes",
    "norm": "norm",
    "grid": "grid_size",
    "T": "t_final",
    "kmin": "k_min",
    "kmax": "k_max",
    "ref_factor": "ref_factor",
    "out": "out_dir",
    "plot": "plot",
    "threads": "threads",
    "guides": "guide_slopes",
}

_DEFAULTS = {
    "problem": None,
    "schemes": "lie,strang,strangb",
    "norm": "l2",
    "grid_size": 95,
    "t_final": 1.0,
    "k_min": 6,
    "k_max": 12,
    "ref_factor": 32,
    "out_dir": "expsplit-out",
    "plot": False,
    "threads": 1,
    "guide_slopes": None,
}


def _normalize_schemes(value) -> tuple:
    if isinstance(value, str):
        value = [s for s in value.split(",") if s]
    return tuple("strang_b" if s in ("strangb", "strang_b") else s for s in value)


def _normalize_guides(value):
    if value is None:
        return None
    if isinstance(value, str):
        value = [s for s in value.split(",") if s]
    return tuple(float(v) for v in value)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expsplit",
        description="Exponential dimension-splitting convergence laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a convergence study")
    run_p.add_argument("--problem", help=f"one of {', '.join(problem_labels())}")
    run_p.add_argument("--schemes", help="comma list: lie,strang,strangb")
    run_p.add_argument("--norm", help="l2 | dual | frac:<gamma>")
    run_p.add_argument("--grid", type=int, help="interior nodes per direction")
    run_p.add_argument("--T", type=float, help="final time")
    run_p.add_argument("--kmin", type=int, help="smallest k in h = T/2^k")
    run_p.add_argument("--kmax", type=int, help="largest k in h = T/2^k")
    run_p.add_argument("--ref-factor", type=int, dest="ref_factor",
                       help="reference refinement factor (>= 8)")
    run_p.add_argument("--out", help="output directory")
    run_p.add_argument("--plot", action="store_const", const=True, default=None,
                       help="also write plot.svg")
    run_p.add_argument("--threads", type=int, help="worker threads for the sweep")
    run_p.add_argument("--guides", help="comma list of guide-line slopes")
    run_p.add_argument("--config", help="JSON config file; flags override it")

    sub.add_parser("verify", help="run the oracle/property checks on tiny grids")
    return parser


def _merged_config(args: argparse.Namespace) -> dict:
    merged = dict(_DEFAULTS)
    if args.config:
        file_cfg = json.loads(Path(args.config).read_text())
        for key, value in file_cfg.items():
            if key not in _CONFIG_KEYS:
                raise SystemExit(f"unknown config key {key!r}")
            merged[_CONFIG_KEYS[key]] = value
    for flag, field in _CONFIG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            merged[field] = value
    merged["schemes"] = _normalize_schemes(merged["schemes"])
    merged["guide_slopes"] = _normalize_guides(merged["guide_slopes"])
    return merged


def _cmd_run(args: argparse.Namespace) -> int:
    merged = _merged_config(args)
    if merged["problem"] is None:
        raise SystemExit("a problem label is required (--problem or config file)")
    cfg = StudyConfig(**merged)
    report = run_convergence_study(cfg)
    print(f"problem={report.problem} norm={report.norm} "
          f"grid={report.grid_size} T={report.t_final:g}")
    print(f"reference gap: {report.ref_gap:.3e} "
          f"(smallest error {report.min_error:.3e})")
    for scheme, fit in report.fitted.items():
        print(f"  {scheme:9s} fitted order {fit['order']:6.3f} "
              f"(residual {fit['residual']:.3f}, {fit['points_used']} points)")
    out = Path(cfg.out_dir)
    written = ["report.csv", "report.json"] + (["plot.svg"] if cfg.plot else [])
    print("wrote " + ", ".join(str(out / name) for name in written))
    return 0


def _cmd_verify() -> int:
    from .verification import run_verification

    results = run_verification()
    failed = 0
    for name, passed, detail in results:
        status = "PASS" if passed else "FAIL"
        failed += not passed
        print(f"[{status}] {name}: {detail}")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_verify()


if __name__ == "__main__":
    sys.exit(main())
