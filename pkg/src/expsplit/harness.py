"""Convergence-study orchestration: sweeps, order fits, CSV/JSON/SVG output."""

from __future__ import annotations

import json
import math
import os
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .discretization import Grid, GridFunction
from .exceptions import ReferenceInconsistent, TooFewPoints
from .integrators import TimeGrid, build_operator_families, integrate, reference_solve
from .linalg import DENSE_EIGEN_CAP
from .norms import NormKind, error_norm
from .problems import ProblemSpec, problem_by_label

from .discretization import assemble_full_operator

#: points with error below FLOOR_FACTOR * reference gap are excluded from fits
FLOOR_FACTOR = 100.0


@dataclass(frozen=True)
class StudyConfig:
    """Configuration of one convergence study.

    Step sizes are h_k = T / 2^k for k = k_min..k_max.  Errors are always
    measured against the same-grid semidiscrete reference, so the spatial
    error cancels and the fitted slope isolates the temporal order.
    """

    problem: str
    schemes: tuple = ("lie", "strang", "strang_b")
    norm: str = "l2"
    grid_size: int = 95
    t_final: float = 1.0
    k_min: int = 6
    k_max: int = 12
    ref_factor: int = 32
    out_dir: str | None = None
    plot: bool = False
    guide_slopes: tuple | None = None
    threads: int = 1

    def __post_init__(self):
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        unknown = set(self.schemes) - {"lie", "strang", "strang_b"}
        if unknown:
            raise ValueError(f"unknown schemes: {sorted(unknown)}")
        if self.t_final <= 0.0:
            raise ValueError("final time must be positive")
        if self.k_max - self.k_min < 2:
            raise ValueError("need at least three step sizes (k_max >= k_min + 2)")
        if self.ref_factor < 8:
            raise ValueError("reference refinement factor must be >= 8")
        if self.grid_size < 1 or self.grid_size**2 > DENSE_EIGEN_CAP:
            raise ValueError(
                f"grid size must keep nx*ny within the dense cap {DENSE_EIGEN_CAP}"
            )
        if self.threads < 1:
            raise ValueError("thread count must be >= 1")

    @property
    def step_sizes(self) -> list:
        return [self.t_final / 2**k for k in range(self.k_min, self.k_max + 1)]


@dataclass
class ConvergenceReport:
    problem: str
    norm: str
    grid_size: int
    t_final: float
    measurements: dict          # scheme -> list of (h, error)
    fitted: dict                # scheme -> {"order", "residual", "points_used"}
    local_orders: dict          # scheme -> list of pairwise log2 ratios
    ref_gap: float
    min_error: float
    wall_time: float

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "norm": self.norm,
            "grid": self.grid_size,
            "T": self.t_final,
            "measurements": {
                s: [{"h": h, "error": e} for h, e in pts]
                for s, pts in self.measurements.items()
            },
            "fitted_orders": self.fitted,
            "local_orders": self.local_orders,
            "reference_gap": self.ref_gap,
            "min_error": self.min_error,
            "wall_time_seconds": self.wall_time,
        }


class OperatorCache:
    """Shares grids, operator families and decomposed full operators
    between studies that use the same coefficients and resolution."""

    def __init__(self):
        self._entries = {}

    def get(self, problem: ProblemSpec, grid_size: int):
        key = (grid_size, problem.a.name, problem.b.name)
        if key not in self._entries:
            grid = Grid(grid_size, grid_size)
            a_family, b_family = build_operator_families(problem, grid)
            op = assemble_full_operator(a_family, b_family)
            self._entries[key] = (grid, a_family, b_family, op)
        return self._entries[key]


def check_reference_gap(gap: float, min_error: float):
    """Abort rather than fit orders against an untrustworthy reference."""
    if not gap < 0.1 * min_error:
        raise ReferenceInconsistent(
            f"reference self-consistency gap {gap:.3e} is not below 10% of "
            f"the smallest measured error {min_error:.3e}"
        )


def fit_order(points) -> tuple:
    """Least-squares slope of log(error) vs log(h); returns (order, RMS residual)."""
    pts = list(points)
    if len(pts) < 3:
        raise TooFewPoints(f"order fit needs >= 3 points, got {len(pts)}")
    lh = np.log([h for h, _ in pts])
    le = np.log([e for _, e in pts])
    slope, intercept = np.polyfit(lh, le, 1)
    resid = float(np.sqrt(np.mean((le - (slope * lh + intercept)) ** 2)))
    return float(slope), resid


def run_convergence_study(cfg: StudyConfig,
                          cache: OperatorCache | None = None) -> ConvergenceReport:
    """Measure end-time errors for each (scheme, h), fit observed orders."""
    t_start = _time.perf_counter()
    problem = problem_by_label(cfg.problem)
    grid, a_family, b_family, op = (cache or OperatorCache()).get(
        problem, cfg.grid_size
    )
    op.decomposition()
    source = problem.sampled_source(grid, a_family, b_family)
    u0 = problem.initial_values(grid)
    kind = NormKind.parse(cfg.norm)

    # reference with the mandatory self-consistency check at two refinements
    n_ref = cfg.ref_factor * 2**cfg.k_max
    ref_coarse = reference_solve(op, u0, source, TimeGrid(cfg.t_final, n_ref))
    ref = reference_solve(op, u0, source, TimeGrid(cfg.t_final, 2 * n_ref))
    gap = error_norm(kind, op, GridFunction(grid, ref.values - ref_coarse.values))

    ks = list(range(cfg.k_min, cfg.k_max + 1))

    def one_run(args):
        scheme, k = args
        u = integrate(
            scheme, problem, grid, TimeGrid(cfg.t_final, 2**k),
            a_family=a_family, b_family=b_family, source=source, u0=u0,
        )
        return error_norm(kind, op, GridFunction(grid, u.values - ref.values))

    jobs = [(scheme, k) for scheme in cfg.schemes for k in ks]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            errors = list(pool.map(one_run, jobs))
    else:
        errors = [one_run(job) for job in jobs]

    measurements = {scheme: [] for scheme in cfg.schemes}
    for (scheme, k), err in zip(jobs, errors):
        measurements[scheme].append((cfg.t_final / 2**k, err))

    min_error = min(errors)
    check_reference_gap(gap, min_error)

    floor = FLOOR_FACTOR * gap
    fitted = {}
    local_orders = {}
    for scheme, pts in measurements.items():
        usable = [(h, e) for h, e in pts if e >= floor and e > 0.0]
        order, resid = fit_order(usable)
        fitted[scheme] = {
            "order": order,
            "residual": resid,
            "points_used": len(usable),
        }
        local_orders[scheme] = [
            math.log2(pts[i][1] / pts[i + 1][1]) for i in range(len(pts) - 1)
        ]

    report = ConvergenceReport(
        problem=cfg.problem,
        norm=kind.name,
        grid_size=cfg.grid_size,
        t_final=cfg.t_final,
        measurements=measurements,
        fitted=fitted,
        local_orders=local_orders,
        ref_gap=gap,
        min_error=min_error,
        wall_time=_time.perf_counter() - t_start,
    )

    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        emit_csv(report, out / "report.csv")
        emit_json(report, out / "report.json")
        if cfg.plot:
            slopes = cfg.guide_slopes
            if slopes is None:
                slopes = tuple(
                    round(f["order"] * 4) / 4 for f in fitted.values()
                )
            emit_svg_loglog(report, slopes, out / "plot.svg")
    return report


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------


def _atomic_write(path, text: str):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def emit_csv(report: ConvergenceReport, path):
    """Full-precision measurement table, one row per (scheme, h)."""
    lines = ["scheme,h,error,norm,problem,grid,T"]
    for scheme, pts in report.measurements.items():
        for h, err in pts:
            lines.append(
                f"{scheme},{h:.17g},{err:.17g},{report.norm},"
                f"{report.problem},{report.grid_size},{report.t_final:.17g}"
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def emit_json(report: ConvergenceReport, path):
    _atomic_write(path, json.dumps(report.to_dict(), indent=2) + "\n")


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
_WIDTH, _HEIGHT = 640, 480
_MARGIN = {"left": 70, "right": 25, "top": 25, "bottom": 55}


def emit_svg_loglog(report: ConvergenceReport, guide_slopes, path):
    """Standalone log10-log10 SVG: one polyline per scheme plus dashed
    guide lines anchored at the rightmost data point."""
    schemes = [s for s, pts in report.measurements.items() if pts]
    if not schemes:
        raise ValueError("cannot plot an empty report")

    all_pts = [p for s in schemes for p in report.measurements[s]]
    lx = np.log10([h for h, _ in all_pts])
    ly = np.log10([e for _, e in all_pts])
    x_lo, x_hi = _padded_range(lx.min(), lx.max())
    y_lo, y_hi = _padded_range(ly.min(), ly.max())

    # guide lines, anchored 1.5x above the point with the largest h
    i_anchor = int(np.argmax(lx))
    ax_, ay_ = float(lx[i_anchor]), float(ly[i_anchor]) + math.log10(1.5)
    guide_paths = []
    for slope in guide_slopes:
        gy_left = ay_ + slope * (x_lo - ax_)
        guide_paths.append(((x_lo, gy_left), (ax_, ay_), slope))
        y_lo = min(y_lo, gy_left, ay_)
        y_hi = max(y_hi, gy_left, ay_)

    plot_w = _WIDTH - _MARGIN["left"] - _MARGIN["right"]
    plot_h = _HEIGHT - _MARGIN["top"] - _MARGIN["bottom"]

    def px(v):
        return _MARGIN["left"] + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return _MARGIN["top"] + (y_hi - v) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="{_MARGIN["left"]}" y="{_MARGIN["top"]}" width="{plot_w}" '
        f'height="{plot_h}" fill="white" stroke="black"/>',
    ]

    for tick in range(math.ceil(x_lo), math.floor(x_hi) + 1):
        x = px(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{py(y_lo):.2f}" x2="{x:.2f}" '
            f'y2="{py(y_lo) + 5:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{py(y_lo) + 18:.2f}" font-size="11" '
            f'text-anchor="middle">1e{tick}</text>'
        )
    for tick in range(math.ceil(y_lo), math.floor(y_hi) + 1):
        y = py(tick)
        parts.append(
            f'<line x1="{px(x_lo) - 5:.2f}" y1="{y:.2f}" x2="{px(x_lo):.2f}" '
            f'y2="{y:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px(x_lo) - 8:.2f}" y="{y + 4:.2f}" font-size="11" '
            f'text-anchor="end">1e{tick}</text>'
        )

    parts.append(
        f'<text x="{_WIDTH / 2:.0f}" y="{_HEIGHT - 12}" font-size="13" '
        f'text-anchor="middle">step size h</text>'
    )
    parts.append(
        f'<text x="16" y="{_HEIGHT / 2:.0f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {_HEIGHT / 2:.0f})">error ({report.norm})</text>'
    )

    markers = ("circle", "square", "diamond")
    for idx, scheme in enumerate(schemes):
        pts = sorted(report.measurements[scheme])
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(
            f"{px(math.log10(h)):.3f},{py(math.log10(e)):.3f}" for h, e in pts
        )
        parts.append(
            f'<polyline class="data" data-scheme="{scheme}" points="{coords}" '
            f'fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        shape = markers[idx % len(markers)]
        for h, e in pts:
            cx, cy = px(math.log10(h)), py(math.log10(e))
            if shape == "circle":
                parts.append(
                    f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="3.5" fill="{color}"/>'
                )
            elif shape == "square":
                parts.append(
                    f'<rect x="{cx - 3:.3f}" y="{cy - 3:.3f}" width="6" height="6" '
                    f'fill="{color}"/>'
                )
            else:
                parts.append(
                    f'<path d="M {cx:.3f} {cy - 4:.3f} L {cx + 4:.3f} {cy:.3f} '
                    f'L {cx:.3f} {cy + 4:.3f} L {cx - 4:.3f} {cy:.3f} Z" '
                    f'fill="{color}"/>'
                )
        parts.append(
            f'<text x="{_WIDTH - _MARGIN["right"] - 130}" '
            f'y="{_MARGIN["top"] + 18 + 16 * idx}" font-size="12" '
            f'fill="{color}">{scheme}</text>'
        )

    for (p0, p1, slope) in guide_paths:
        coords = f"{px(p0[0]):.3f},{py(p0[1]):.3f} {px(p1[0]):.3f},{py(p1[1]):.3f}"
        parts.append(
            f'<polyline class="guide" data-slope="{slope:g}" points="{coords}" '
            f'fill="none" stroke="#555555" stroke-width="1" '
            f'stroke-dasharray="6,4"/>'
        )

    parts.append("</svg>")
    _atomic_write(path, "\n".join(parts) + "\n")


def _padded_range(lo: float, hi: float, pad: float = 0.05):
    if hi - lo < 1e-12:
        return lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span
