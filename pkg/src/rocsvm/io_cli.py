"""CSV ingestion, result emission, manifests, SVG plots, and the CLI.

Subcommands: fit, roc, bands, simulate, reproduce, plot.  Every output file
is written atomically and accompanied by a manifest recording the command,
resolved configuration (hashed), seed, and package version, so any output
can be regenerated exactly.  Numeric CSV cells use 17 significant digits,
enough to round-trip float64.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bands import BandSpec, ConfidenceBand, band_area, build_band
from .data import Dataset, stratified_split
from .kernels import KernelSpec
from .rngs import substream
from .roc import RocCurve, auc, select_operating_point, sweep
from .solver import TrainConfig, fit
from .synth import (ExperimentConfig, GenModel, default_alpha_grid, preset_configs,
                    resolve_threads, run_experiment)
from .tune import TuneGrid, cv_tune

CURVE_HEADER = ["alpha", "fpf", "tpf"]
BAND_HEADER = ["z", "y_lower", "y_hat", "y_upper"]
TABLE_HEADER = ["n", "p", "q", "form", "method", "metric", "mean", "sd"]


def fmt(x) -> str:
    """Full round-trip decimal formatting for float64."""
    return format(float(x), ".17g")


# --- data ingestion ---------------------------------------------------------


def load_csv(path: str, label_column: str, positive_value: str) -> Dataset:
    """Read a headed CSV into a Dataset.

    All non-label columns must be numeric; blank cells and non-numeric cells
    raise with the offending row and column named.  The label column must
    carry exactly two distinct values, one of them positive_value.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: empty file or missing header row")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ValueError(f"{path}: no column named {label_column!r} in header")
        label_idx = header.index(label_column)
        features = []
        raw_labels = []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
            vals = []
            for col_idx, cell in enumerate(row):
                cell = cell.strip()
                name = header[col_idx]
                if cell == "":
                    raise ValueError(f"{path}: missing value at row {row_no}, column {name!r}")
                if col_idx == label_idx:
                    raw_labels.append(cell)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at row {row_no}, column {name!r}") from None
            features.append(vals)
        if not features:
            raise ValueError(f"{path}: no data rows")
    distinct = sorted(set(raw_labels))
    if len(distinct) == 1:
        raise ValueError(f"{path}: one-class file; label column has only {distinct[0]!r}")
    if len(distinct) != 2:
        raise ValueError(f"{path}: label column must have exactly two values, found {distinct}")
    if positive_value not in distinct:
        raise ValueError(f"{path}: positive value {positive_value!r} not among labels {distinct}")
    labels = np.array([1 if raw == positive_value else -1 for raw in raw_labels], dtype=np.int64)
    return Dataset(np.asarray(features, dtype=np.float64), labels)


def write_dataset_csv(data: Dataset, path: str, label_column: str = "label") -> None:
    names = [f"x{j + 1}" for j in range(data.p)]
    lines = [",".join(names + [label_column])]
    for i in range(data.n):
        cells = [fmt(v) for v in data.features[i]] + [str(int(data.labels[i]))]
        lines.append(",".join(cells))
    _atomic_write(path, "\n".join(lines) + "\n")


# --- result emission --------------------------------------------------------


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_curve_csv(curve: RocCurve, path: str) -> None:
    lines = [",".join(CURVE_HEADER)]
    for a, f, t in zip(curve.alphas, curve.fpf, curve.tpf):
        lines.append(f"{fmt(a)},{fmt(f)},{fmt(t)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_band_csv(band: ConfidenceBand, path: str) -> None:
    lines = [",".join(BAND_HEADER)]
    for z, lo, mid, hi in zip(band.z_grid, band.y_lower, band.y_hat, band.y_upper):
        lines.append(f"{fmt(z)},{fmt(lo)},{fmt(mid)},{fmt(hi)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_band_json(band: ConfidenceBand, path: str) -> None:
    payload = {
        "p_star": band.p_star,
        "area": band_area(band),
        "B": band.spec.n_boot,
        "usable_replicates": band.n_usable,
        "gamma_bar": band.spec.gamma_bar,
        "weight_scheme": band.spec.weight_scheme,
        "seed": band.spec.rng_seed,
    }
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_table_csv(rows, path: str) -> None:
    lines = [",".join(TABLE_HEADER)]
    for r in rows:
        lines.append(",".join([str(r["n"]), str(r["p"]), fmt(r["q"]), r["form"],
                               r["method"], r["metric"], fmt(r["mean"]), fmt(r["sd"])]))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(primary_output: str, command: str, argv, config: dict, outputs, seed,
                   started: str) -> str:
    config_json = json.dumps(config, sort_keys=True, default=str)
    payload = {
        "command": command,
        "argv": list(argv),
        "config": json.loads(config_json),
        "config_sha256": hashlib.sha256(config_json.encode()).hexdigest(),
        "seed": seed,
        "package": "rocsvm",
        "version": __version__,
        "started": started,
        "finished": _now(),
        "outputs": [os.path.basename(o) for o in outputs],
    }
    base, _ = os.path.splitext(primary_output)
    path = f"{base}.manifest.json"
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# --- SVG plotting -----------------------------------------------------------


def _svg_coords(x, y, size=440, margin=50):
    px = margin + np.asarray(x) * size
    py = margin + (1.0 - np.asarray(y)) * size
    return px, py


def render_svg(x, y, lower=None, upper=None, x_label="false positive fraction",
               y_label="true positive fraction") -> str:
    size, margin = 440, 50
    total = size + 2 * margin
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" '
             f'viewBox="0 0 {total} {total}">',
             f'<rect width="{total}" height="{total}" fill="white"/>']
    if lower is not None and upper is not None:
        bx, blo = _svg_coords(x, lower, size, margin)
        _, bhi = _svg_coords(x, upper, size, margin)
        pts = [f"{px:.2f},{py:.2f}" for px, py in zip(bx, bhi)]
        pts += [f"{px:.2f},{py:.2f}" for px, py in zip(bx[::-1], blo[::-1])]
        parts.append(f'<polygon points="{" ".join(pts)}" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>')
    px, py = _svg_coords(x, y, size, margin)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#08519c" stroke-width="2"/>')
    ax = margin
    ay = margin + size
    parts.append(f'<line x1="{ax}" y1="{ay}" x2="{ax + size}" y2="{ay}" stroke="black"/>')
    parts.append(f'<line x1="{ax}" y1="{ay}" x2="{ax}" y2="{margin}" stroke="black"/>')
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        tx = margin + tick * size
        ty = margin + (1.0 - tick) * size
        parts.append(f'<line x1="{tx:.1f}" y1="{ay}" x2="{tx:.1f}" y2="{ay + 5}" stroke="black"/>')
        parts.append(f'<text x="{tx:.1f}" y="{ay + 20}" font-size="12" text-anchor="middle">{tick:g}</text>')
        parts.append(f'<line x1="{ax - 5}" y1="{ty:.1f}" x2="{ax}" y2="{ty:.1f}" stroke="black"/>')
        parts.append(f'<text x="{ax - 8}" y="{ty + 4:.1f}" font-size="12" text-anchor="end">{tick:g}</text>')
    parts.append(f'<text x="{margin + size / 2}" y="{total - 8}" font-size="14" '
                 f'text-anchor="middle">{x_label}</text>')
    parts.append(f'<text x="14" y="{margin + size / 2}" font-size="14" text-anchor="middle" '
                 f'transform="rotate(-90 14 {margin + size / 2})">{y_label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_csv(input_path: str, output_path: str) -> None:
    """Render a curve or band CSV (detected by header) as an SVG plot."""
    with open(input_path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [[float(c) for c in row] for row in reader if row]
    cols = np.asarray(rows, dtype=np.float64).T
    if header == CURVE_HEADER:
        order = np.argsort(cols[1], kind="stable")
        svg = render_svg(cols[1][order], cols[2][order])
    elif header == BAND_HEADER:
        svg = render_svg(cols[0], cols[2], lower=cols[1], upper=cols[3])
    else:
        raise ValueError(f"{input_path}: unrecognised header {header}; expected a curve or band CSV")
    _atomic_write(output_path, svg)


# --- CLI --------------------------------------------------------------------


def _out_path(name: str) -> str:
    if os.path.isabs(name):
        return name
    base = os.environ.get("ROCSVM_OUTDIR", ".")
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, name)


def _kernel_from_args(args, p: int) -> KernelSpec:
    if args.kernel == "gaussian":
        gamma = args.gamma if args.gamma is not None else 1.0 / p
        return KernelSpec(family="gaussian", bandwidth_gamma=gamma)
    if args.kernel == "polynomial":
        return KernelSpec(family="polynomial", degree=args.degree, coef0=args.coef0)
    return KernelSpec(family="linear")


def _tuned_config(train, args) -> tuple[TrainConfig, dict]:
    """Resolve lambda (and gamma) from flags or by cross-validation."""
    if args.lambda_ is not None:
        kernel = _kernel_from_args(args, train.p)
        return TrainConfig(alpha_weight=0.5, lambda_=args.lambda_, kernel=kernel), {}
    gammas = (args.gamma,) if (args.kernel == "gaussian" and args.gamma is not None) else ()
    grid = TuneGrid(gamma_candidates=gammas)
    tuned = cv_tune(train, args.kernel, grid, rng=substream(args.seed, 1))
    cfg = TrainConfig(alpha_weight=0.5, lambda_=tuned.lambda_, kernel=tuned.kernel)
    return cfg, {"cv_errors": tuned.cv_errors}


def _cmd_fit(args):
    started = _now()
    data = load_csv(args.input, args.label_column, args.positive_value)
    cfg, _ = _tuned_config(data, args)
    cfg = TrainConfig(alpha_weight=args.alpha, lambda_=cfg.lambda_, kernel=cfg.kernel)
    model = fit(data, cfg)
    out = _out_path(args.out)
    payload = {
        "kernel": {"family": cfg.kernel.family, "degree": cfg.kernel.degree,
                   "coef0": cfg.kernel.coef0, "bandwidth_gamma": cfg.kernel.bandwidth_gamma},
        "alpha_weight": cfg.alpha_weight,
        "lambda": cfg.lambda_,
        "bias": model.bias,
        "dual_coefs": model.dual_coefs.tolist(),
        "support_indices": model.support_indices.tolist(),
        "support_vectors": model.train_features[model.support_indices].tolist(),
        "kkt_residual": model.kkt_residual,
        "dual_objective": model.dual_objective,
    }
    _atomic_write(out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    write_manifest(out, "fit", args.argv, _config_dict(args), [out], args.seed, started)
    print(f"fitted model with {model.support_indices.size} support vectors -> {out}")


def _split_and_curve(args):
    data = load_csv(args.input, args.label_column, args.positive_value)
    train, test = stratified_split(data, args.train_fraction, substream(args.seed, 0))
    cfg, extra = _tuned_config(train, args)
    alphas = default_alpha_grid(args.alpha_grid)
    result = sweep(train, test, cfg, alphas)
    return train, test, cfg, result, extra


def _cmd_roc(args):
    started = _now()
    _, _, cfg, result, _ = _split_and_curve(args)
    out = _out_path(args.out)
    write_curve_csv(result.curve, out)
    write_manifest(out, "roc", args.argv, _config_dict(args, lambda_=cfg.lambda_,
                                                       kernel=cfg.kernel), [out], args.seed, started)
    op = select_operating_point(result.curve, "closest_to_corner")
    print(f"AUC {auc(result.curve):.4f}; optimal point se={op.sensitivity:.4f} "
          f"sp={op.specificity:.4f} at alpha={op.alpha_star:.3f} -> {out}")


def _cmd_bands(args):
    started = _now()
    _, test, cfg, result, _ = _split_and_curve(args)
    scheme = "constant" if args.constant_weights else args.weights
    band_seed = int(np.random.SeedSequence((args.seed, 2)).generate_state(1)[0])
    spec = BandSpec(n_boot=args.n_boot, gamma_bar=args.gamma_bar,
                    weight_scheme=scheme, rng_seed=band_seed)
    band = build_band(result.models, test, spec)
    curve_out = _out_path(f"{args.out_prefix}_curve.csv")
    band_out = _out_path(f"{args.out_prefix}_band.csv")
    json_out = _out_path(f"{args.out_prefix}_band.json")
    write_curve_csv(result.curve, curve_out)
    write_band_csv(band, band_out)
    write_band_json(band, json_out)
    outputs = [curve_out, band_out, json_out]
    write_manifest(band_out, "bands", args.argv, _config_dict(args, lambda_=cfg.lambda_,
                                                              kernel=cfg.kernel), outputs, args.seed, started)
    print(f"band level {1 - spec.gamma_bar:g}, p*={band.p_star:.4f}, "
          f"area={band_area(band):.4f} -> {band_out}")


def _cmd_simulate(args):
    started = _now()
    band = None
    if args.bands:
        band = BandSpec(n_boot=args.n_boot, gamma_bar=args.gamma_bar)
    cfg = ExperimentConfig(
        model=GenModel(p=args.p, q=args.q, form=args.form), n=args.n,
        replications=args.replications, methods=tuple(args.methods.split(",")),
        band_spec=band, truth_set_size=args.truth_size, rng_seed=args.seed)
    result = run_experiment(cfg, n_threads=args.threads)
    out = _out_path(args.out)
    write_table_csv(result.rows(), out)
    write_manifest(out, "simulate", args.argv, _config_dict(args), [out], args.seed, started)
    for row in result.rows():
        print(f"{row['method']:12s} {row['metric']:14s} {row['mean']:.4f} ({row['sd']:.4f})")


def _cmd_reproduce(args):
    started = _now()
    cell = _parse_cell(args.cell) if args.cell else None
    configs, metrics = preset_configs(args.table, cell=cell, replications=args.replications,
                                      seed=args.seed, n_boot=args.n_boot,
                                      gamma_bar=args.gamma_bar, truth_set_size=args.truth_size)
    rows = []
    for cfg in configs:
        result = run_experiment(cfg, n_threads=args.threads)
        for row in result.rows():
            if row["metric"] in metrics:
                rows.append(row)
                print(f"n={row['n']} p={row['p']} q={row['q']:g} {row['form']:9s} "
                      f"{row['method']:12s} {row['metric']:14s} {row['mean']:.4f} ({row['sd']:.4f})")
    out = _out_path(args.out)
    write_table_csv(rows, out)
    write_manifest(out, "reproduce", args.argv, _config_dict(args), [out], args.seed, started)


def _cmd_plot(args):
    out = _out_path(args.out)
    plot_csv(args.input, out)
    print(f"wrote {out}")


def _parse_cell(text: str) -> dict:
    cell = {}
    for part in text.split(","):
        if "=" not in part:
            raise ValueError(f"bad --cell entry {part!r}; expected key=value")
        key, value = part.split("=", 1)
        key = key.strip()
        if key not in ("n", "p", "q", "model"):
            raise ValueError(f"bad --cell key {key!r}; expected n, p, q or model")
        cell[key] = value.strip()
    return cell


def _config_dict(args, **extra) -> dict:
    skip = {"func", "argv"}
    out = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    for k, v in extra.items():
        out[k] = repr(v) if isinstance(v, KernelSpec) else v
    return out


def _add_data_args(sub):
    sub.add_argument("--input", required=True, help="CSV file with a header row")
    sub.add_argument("--label-column", default="label")
    sub.add_argument("--positive-value", default="1")


def _add_kernel_args(sub):
    sub.add_argument("--kernel", choices=["linear", "polynomial", "gaussian"], default="linear")
    sub.add_argument("--gamma", type=float, default=None, help="gaussian bandwidth (default 1/p)")
    sub.add_argument("--degree", type=int, default=3)
    sub.add_argument("--coef0", type=float, default=1.0)
    sub.add_argument("--lambda", dest="lambda_", type=float, default=None,
                     help="penalty; cross-validated at alpha=0.5 when omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rocsvm",
                                     description="Cost-weighted SVM ROC curves with bootstrap confidence bands")
    parser.add_argument("--version", action="version", version=f"rocsvm {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_fit = subs.add_parser("fit", help="train one weighted SVM and emit model JSON")
    _add_data_args(p_fit)
    _add_kernel_args(p_fit)
    p_fit.add_argument("--alpha", type=float, default=0.5)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--out", default="model.json")
    p_fit.set_defaults(func=_cmd_fit)

    p_roc = subs.add_parser("roc", help="sweep the weight grid and emit the ROC curve CSV")
    _add_data_args(p_roc)
    _add_kernel_args(p_roc)
    p_roc.add_argument("--alpha-grid", type=int, default=99, help="number of uniform grid points")
    p_roc.add_argument("--train-fraction", type=float, default=0.7)
    p_roc.add_argument("--seed", type=int, default=0)
    p_roc.add_argument("--out", default="curve.csv")
    p_roc.set_defaults(func=_cmd_roc)

    p_bands = subs.add_parser("bands", help="ROC curve plus bootstrap confidence band")
    _add_data_args(p_bands)
    _add_kernel_args(p_bands)
    p_bands.add_argument("--alpha-grid", type=int, default=99)
    p_bands.add_argument("--train-fraction", type=float, default=0.7)
    p_bands.add_argument("--n-boot", "-B", type=int, default=1000)
    p_bands.add_argument("--gamma-bar", type=float, default=0.10)
    p_bands.add_argument("--weights", choices=["exponential", "multinomial"], default="exponential")
    p_bands.add_argument("--constant-weights", action="store_true",
                         help="debug: unit weights, collapsing the band onto the curve")
    p_bands.add_argument("--seed", type=int, default=0)
    p_bands.add_argument("--out-prefix", default="roc")
    p_bands.set_defaults(func=_cmd_bands)

    p_sim = subs.add_parser("simulate", help="run one synthetic experiment configuration")
    p_sim.add_argument("--form", choices=["linear", "nonlinear"], default="linear")
    p_sim.add_argument("--n", type=int, default=500)
    p_sim.add_argument("--p", type=int, default=2)
    p_sim.add_argument("--q", type=float, default=0.25)
    p_sim.add_argument("--replications", type=int, default=100)
    p_sim.add_argument("--methods", default="svm_linear,svm_gaussian,logistic")
    p_sim.add_argument("--bands", action="store_true")
    p_sim.add_argument("--n-boot", type=int, default=1000)
    p_sim.add_argument("--gamma-bar", type=float, default=0.10)
    p_sim.add_argument("--truth-size", type=int, default=100000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.add_argument("--out", default="results.csv")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rep = subs.add_parser("reproduce", help="run a preset simulation table")
    p_rep.add_argument("table", choices=["table1", "table3", "table4", "table5",
                                         "table6", "table7", "table8"])
    p_rep.add_argument("--cell", default=None, help="restrict to one cell, e.g. n=500,p=2,q=0.25")
    p_rep.add_argument("--replications", type=int, default=100)
    p_rep.add_argument("--n-boot", type=int, default=1000)
    p_rep.add_argument("--gamma-bar", type=float, default=0.10)
    p_rep.add_argument("--truth-size", type=int, default=100000)
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--threads", type=int, default=None)
    p_rep.add_argument("--out", default="results.csv")
    p_rep.set_defaults(func=_cmd_reproduce)

    p_plot = subs.add_parser("plot", help="render a curve or band CSV as SVG")
    p_plot.add_argument("--input", required=True)
    p_plot.add_argument("--out", default="plot.svg")
    p_plot.set_defaults(func=_cmd_plot)

    return parser


def _apply_config_file(argv: list[str]) -> list[str]:
    """Splice `key = value` lines from --config FILE in as defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise SystemExit(2)
    path = argv[idx + 1]
    rest = argv[:idx] + argv[idx + 2:]
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: bad config line {line!r}; expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            pairs.extend([f"--{key.replace('_', '-')}", value])
    # defaults go right after the subcommand so explicit flags override them
    return rest[:1] + pairs + rest[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    args.argv = argv
    try:
        args.func(args)
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
