"""Command-line driver: ``generate``, ``estimate`` and ``benchmark``.

Configuration precedence is flags, then the ``--config`` file, then built-in
defaults.  Every output file starts with ``#`` lines echoing the tool version
and the effective configuration.  The thread count and output locations are
left out of that header so that files are byte-identical across them.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .curvature import CurvatureConfig, default_workers, estimate_all, results_arrays
from .errors import CurvatureError, FormatError
from .geometry import Kernel, build_cloud
from .metrics import (
    MetricReport,
    aligned_directions,
    better_mean_convention,
    comparison_pairs,
    run_job,
    summarize,
)
from .scales import FALLBACKS, TAU_SEARCH, SweepConfig
from .surfaces import SAMPLING_MODES, add_noise, parse_surface, sample_surface, surface_to_string

GENERATE_COLUMNS = ["x", "y", "z", "clean_x", "clean_y", "clean_z",
                    "gauss_true", "mean_true", "nx", "ny", "nz"]
ESTIMATE_COLUMNS = ["kappa1", "kappa2", "gauss", "mean", "d1x", "d1y", "d1z",
                    "d2x", "d2y", "d2z", "eps_pca", "tau", "valid"]
REPORT_COLUMNS = ["surface", "noise", "quantity", "rmse", "energy_distance", "pearson",
                  "n_valid", "n_total", "seed"]

_SWEEP_DEFAULTS = SweepConfig()
_CURV_DEFAULTS = CurvatureConfig()


@dataclass
class RunConfig:
    gamma: float = _SWEEP_DEFAULTS.gamma
    extreme_fraction: float = _CURV_DEFAULTS.extreme_fraction
    kernel: str = "gauss"
    bandwidth: float = _CURV_DEFAULTS.kernel.bandwidth
    grid_size: int = _SWEEP_DEFAULTS.grid_size
    max_radius_factor: float = _SWEEP_DEFAULTS.max_radius_factor
    min_neighbors: int = _SWEEP_DEFAULTS.min_neighbors
    min_tau_neighbors: int = _CURV_DEFAULTS.min_tau_neighbors
    tau_search: str = _SWEEP_DEFAULTS.tau_search
    fallback: str = _SWEEP_DEFAULTS.fallback
    seed: int = 0
    threads: int = 0
    # generate / benchmark
    surface: str = "torus:R=2,r=1"
    n: int = 5000
    sigma: float = 0.0
    sampling: str = "area"
    surfaces: list = field(default_factory=lambda: [
        "torus:R=2,r=1", "ellipsoid:a=3,b=2,c=1", "saddle:a=1,b=1,extent=1"])
    noise: list = field(default_factory=lambda: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
    repeats: int = 3

    def sweep(self) -> SweepConfig:
        return SweepConfig(gamma=self.gamma, grid_size=self.grid_size,
                           max_radius_factor=self.max_radius_factor,
                           min_neighbors=self.min_neighbors, tau_search=self.tau_search,
                           fallback=self.fallback)

    def curvature(self) -> CurvatureConfig:
        return CurvatureConfig(extreme_fraction=self.extreme_fraction,
                               kernel=Kernel(self.kernel, self.bandwidth),
                               min_tau_neighbors=self.min_tau_neighbors)

    def workers(self) -> int:
        return self.threads if self.threads > 0 else default_workers()

    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.repeats)]


_ESTIMATOR_KEYS = ["gamma", "extreme_fraction", "kernel", "bandwidth", "grid_size",
                   "max_radius_factor", "min_neighbors", "min_tau_neighbors", "tau_search",
                   "fallback"]
HEADER_KEYS = {
    "generate": ["surface", "n", "sigma", "seed", "sampling"],
    "estimate": _ESTIMATOR_KEYS,
    "benchmark": ["surfaces", "noise", "n", "seed", "repeats", "sampling"] + _ESTIMATOR_KEYS,
}

_LIST_KEYS = {"surfaces": str, "noise": float}
_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CONVERTERS = {"float": float, "int": int, "str": str}


def _split_list(text: str, item_type) -> list:
    # surfaces are separated by ';' because their own parameters use ','
    sep = ";" if item_type is str else ","
    return [item_type(s.strip()) for s in text.split(sep) if s.strip()]


def convert_value(key: str, text: str):
    if key not in _TYPES:
        raise FormatError(f"unknown configuration key {key!r}")
    try:
        if key in _LIST_KEYS:
            return _split_list(text, _LIST_KEYS[key])
        return _CONVERTERS[_TYPES[key]](text.strip())
    except ValueError:
        raise FormatError(f"bad value for {key}: {text!r}") from None


def format_value(value) -> str:
    if isinstance(value, list):
        sep = ";" if value and isinstance(value[0], str) else ","
        return sep.join(format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key = key.strip().replace("-", "_")
            try:
                values[key] = convert_value(key, value)
            except FormatError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return values


def resolve_config(flags: dict, config_path: str | None = None) -> RunConfig:
    merged = asdict(RunConfig())
    if config_path:
        merged.update(read_config_file(config_path))
    merged.update({k: v for k, v in flags.items() if v is not None})
    cfg = RunConfig(**merged)
    if cfg.sampling not in SAMPLING_MODES:
        raise FormatError(f"sampling must be one of {SAMPLING_MODES}")
    if cfg.threads < 0:
        raise FormatError("threads must be >= 0")
    return cfg


def header_lines(command: str, cfg: RunConfig, extra: dict | None = None) -> list[str]:
    lines = [f"# pccurv {__version__} {command}"]
    items = {k: getattr(cfg, k) for k in HEADER_KEYS[command]}
    items.update(extra or {})
    lines += [f"# {k}={format_value(v)}" for k, v in items.items()]
    return lines


def _num(x) -> str:
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def _write_text(path: str, text: str):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(comment_lines, header, rows) -> str:
    buf = io.StringIO()
    for line in comment_lines:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# generate

def generate_rows(cfg: RunConfig):
    surface = parse_surface(cfg.surface)
    truth = add_noise(sample_surface(surface, cfg.n, cfg.seed, mode=cfg.sampling),
                      cfg.sigma, cfg.seed)
    for i in range(len(truth)):
        yield [_num(v) for v in (*truth.noisy_position[i], *truth.position[i],
                                 truth.gauss[i], truth.mean[i], *truth.normal[i])]


def cmd_generate(cfg: RunConfig, out_path: str):
    cfg.surface = surface_to_string(parse_surface(cfg.surface))
    text = _csv_text(header_lines("generate", cfg), GENERATE_COLUMNS, generate_rows(cfg))
    _write_text(out_path, text)


# estimate

def read_point_csv(path: str):
    """Return ``(header, rows, points)``; ``#`` lines before the header are skipped."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    numbered = [(i + 1, line) for i, line in enumerate(lines)
                if line.strip() and not line.lstrip().startswith("#")]
    if not numbered:
        raise FormatError(f"{path}: no header line")
    parsed = list(csv.reader([line for _, line in numbered]))
    header = [h.strip() for h in parsed[0]]
    missing = [c for c in ("x", "y", "z") if c not in header]
    if missing:
        raise FormatError(f"{path}: missing column(s) {', '.join(missing)}")
    cols = [header.index(c) for c in ("x", "y", "z")]
    rows, points = parsed[1:], []
    if not rows:
        raise FormatError(f"{path}: no data rows")
    for (lineno, _), row in zip(numbered[1:], rows):
        if len(row) != len(header):
            raise FormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            points.append([float(row[c]) for c in cols])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-numeric coordinate") from None
        if not all(math.isfinite(v) for v in points[-1]):
            raise FormatError(f"{path}:{lineno}: non-finite coordinate")
    return header, rows, np.array(points, dtype=float)


def estimate_columns(results) -> list[list[str]]:
    arr = results_arrays(results)
    out = []
    for i, ok in enumerate(arr["valid"]):
        if ok:
            vals = [arr["kappa1"][i], arr["kappa2"][i], arr["gauss"][i], arr["mean"][i],
                    *arr["d1"][i], *arr["d2"][i]]
            cells = [_num(v) for v in vals]
        else:
            cells = [""] * 10
        cells += [_num(arr["eps_pca"][i]), _num(arr["tau"][i]), "1" if ok else "0"]
        out.append(cells)
    return out


def cmd_estimate(cfg: RunConfig, in_path: str, out_path: str):
    header, rows, points = read_point_csv(in_path)
    results = estimate_all(build_cloud(points), cfg.sweep(), cfg.curvature(),
                           workers=cfg.workers())
    extra = estimate_columns(results)
    text = _csv_text(header_lines("estimate", cfg),
                     header + ESTIMATE_COLUMNS,
                     (row + cells for row, cells in zip(rows, extra)))
    _write_text(out_path, text)


# benchmark

def _report_row(r: MetricReport) -> list[str]:
    return [r.surface, repr(r.noise_sigma), r.quantity, _num(r.rmse), _num(r.energy_distance),
            _num(r.pearson), str(r.n_valid), str(r.n_total), str(r.seed)]


def _scatter_rows(job):
    truth, est = job.truth, job.estimates
    valid = est["valid"]
    pairs = comparison_pairs(truth, est)
    d1, d2 = aligned_directions(truth, est)
    idx = np.flatnonzero(valid)
    for j, i in enumerate(idx):
        yield [str(i), *(_num(v) for v in truth.position[i]),
               _num(pairs["gauss"][1][j]), _num(pairs["gauss"][0][j]),
               _num(pairs["mean"][1][j]), _num(pairs["mean"][0][j]),
               _num(pairs["mean_half"][0][j]),
               *(_num(v) for v in d1[j]), *(_num(v) for v in d2[j])]


SCATTER_COLUMNS = ["index", "clean_x", "clean_y", "clean_z", "gauss_true", "gauss_est",
                   "mean_true", "mean_sum_est", "mean_half_est",
                   "d1x", "d1y", "d1z", "d2x", "d2y", "d2z"]


def _cell(mean: float, spread: float) -> str:
    if math.isnan(mean):
        return "n/a"
    return f"{mean:.3f} ± {spread:.3f}"


def markdown_tables(rows, surfaces: list[str], noise: list[float]) -> str:
    by_key = {(r.surface, r.noise_sigma, r.quantity): r for r in rows}
    out = []
    titles = (("gauss", "Gaussian curvature"),)
    for quantity, title in titles + (("mean*", "mean curvature (better convention per cell)"),):
        out.append(f"## RMSE and energy distance, {title}\n")
        out.append("| noise | " + " | ".join(f"{s} RMSE | {s} Eng. Dist" for s in surfaces) + " |")
        out.append("|---|" + "---|---|" * len(surfaces))
        for sigma in noise:
            cells = []
            for s in surfaces:
                q = better_mean_convention(rows, s, sigma) if quantity == "mean*" else quantity
                r = by_key.get((s, sigma, q))
                tag = f" ({q})" if quantity == "mean*" and r is not None else ""
                cells.append(_cell(r.rmse, r.rmse_spread) + tag if r else "n/a")
                cells.append(_cell(r.energy_distance, r.energy_spread) if r else "n/a")
            out.append(f"| {sigma:g} | " + " | ".join(cells) + " |")
        out.append("")
        out.append(f"## Pearson correlation, {title}\n")
        out.append("| noise | " + " | ".join(surfaces) + " |")
        out.append("|---|" + "---|" * len(surfaces))
        for sigma in noise:
            cells = []
            for s in surfaces:
                q = better_mean_convention(rows, s, sigma) if quantity == "mean*" else quantity
                r = by_key.get((s, sigma, q))
                cells.append(_cell(r.pearson, r.pearson_spread) if r else "n/a")
            out.append(f"| {sigma:g} | " + " | ".join(cells) + " |")
        out.append("")
    out.append("Cells show the seed mean ± sample standard deviation across seeds.")
    return "\n".join(out) + "\n"


def cmd_benchmark(cfg: RunConfig, out_dir: str):
    surfaces = [parse_surface(s) for s in cfg.surfaces]
    cfg.surfaces = [surface_to_string(s) for s in surfaces]
    header = header_lines("benchmark", cfg)
    sweep, curv, workers = cfg.sweep(), cfg.curvature(), cfg.workers()
    reports = []
    for surface in surfaces:
        for sigma in cfg.noise:
            for seed in cfg.seeds():
                try:
                    job = run_job(surface, cfg.n, sigma, seed, sweep, curv, workers, cfg.sampling)
                except CurvatureError as exc:
                    raise type(exc)(f"{surface.label()} noise={sigma} seed={seed}: {exc}") from exc
                reports.extend(job.reports)
                name = f"{surface.kind}_noise{sigma:g}_seed{seed}.csv"
                _write_text(os.path.join(out_dir, "scatter", name),
                            _csv_text(header, SCATTER_COLUMNS, _scatter_rows(job)))
    _write_text(os.path.join(out_dir, "reports.csv"),
                _csv_text(header, REPORT_COLUMNS, (_report_row(r) for r in reports)))
    rows = summarize(reports)
    summary_cols = ["surface", "noise", "quantity", "rmse", "rmse_spread", "energy_distance",
                    "energy_spread", "pearson", "pearson_spread", "n_seeds"]
    _write_text(os.path.join(out_dir, "summary.csv"), _csv_text(header, summary_cols, (
        [r.surface, repr(r.noise_sigma), r.quantity, _num(r.rmse), _num(r.rmse_spread),
         _num(r.energy_distance), _num(r.energy_spread), _num(r.pearson),
         _num(r.pearson_spread), str(r.n_seeds)] for r in rows)))
    kinds = list(dict.fromkeys(s.kind for s in surfaces))
    md = "\n".join(header) + "\n\n" + markdown_tables(rows, kinds, [float(s) for s in cfg.noise])
    _write_text(os.path.join(out_dir, "tables.md"), md)
    return reports


# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _add_shared(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--gamma", type=float, default=S, help="explained-variance bound for eps_pca")
    p.add_argument("--extreme-fraction", type=float, default=S)
    p.add_argument("--kernel", choices=["gauss", "epan"], default=S)
    p.add_argument("--bandwidth", type=float, default=S)
    p.add_argument("--grid-size", type=int, default=S)
    p.add_argument("--max-radius-factor", type=float, default=S)
    p.add_argument("--min-neighbors", type=int, default=S)
    p.add_argument("--min-tau-neighbors", type=int, default=S)
    p.add_argument("--tau-search", choices=list(TAU_SEARCH), default=S)
    p.add_argument("--fallback", choices=list(FALLBACKS), default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--threads", type=int, default=S, help="worker processes (0 = all cores)")
    p.add_argument("--config", default=None, help="key=value configuration file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pccurv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pccurv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a benchmark surface to CSV")
    _add_shared(g)
    g.add_argument("--surface", default=argparse.SUPPRESS, help='e.g. "torus:R=2,r=1"')
    g.add_argument("-n", type=int, default=argparse.SUPPRESS)
    g.add_argument("--sigma", type=float, default=argparse.SUPPRESS)
    g.add_argument("--sampling", choices=list(SAMPLING_MODES), default=argparse.SUPPRESS)
    g.add_argument("-o", "--output", required=True)

    e = sub.add_parser("estimate", help="estimate curvature for a CSV point cloud")
    _add_shared(e)
    e.add_argument("input")
    e.add_argument("-o", "--output", required=True)

    b = sub.add_parser("benchmark", help="score the estimator on synthetic surfaces")
    _add_shared(b)
    b.add_argument("--surfaces", type=lambda s: _split_list(s, str), default=argparse.SUPPRESS,
                   help='";"-separated surfaces, e.g. "torus;saddle:a=2"')
    b.add_argument("--noise", type=lambda s: _split_list(s, float), default=argparse.SUPPRESS,
                   help="comma-separated noise levels")
    b.add_argument("-n", type=int, default=argparse.SUPPRESS)
    b.add_argument("--repeats", type=int, default=argparse.SUPPRESS,
                   help="number of seeds, starting at --seed")
    b.add_argument("--sampling", choices=list(SAMPLING_MODES), default=argparse.SUPPRESS)
    b.add_argument("-o", "--out-dir", required=True)
    return parser


def run(argv=None) -> int:
    try:
        args = vars(build_parser().parse_args(argv))
    except _UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    command = args.pop("command")
    config_path = args.pop("config", None)
    output = args.pop("output", None) or args.pop("out_dir", None)
    in_path = args.pop("input", None)
    try:
        cfg = resolve_config(args, config_path)
        cfg.sweep(), cfg.curvature()
        if command == "generate":
            cmd_generate(cfg, output)
        elif command == "estimate":
            cmd_estimate(cfg, in_path, output)
        else:
            cmd_benchmark(cfg, output)
    except CurvatureError as exc:
        print(f"error: {exc.category}: {_one_line(exc)}", file=sys.stderr)
        return 1
    except OSError as exc:
        where = exc.filename or ""
        print(f"error: io: {where}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    return 0


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
