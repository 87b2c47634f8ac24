"""Command-line surface: generate | degrade | measure | report.

Exit codes: 0 ok, 2 usage, 3 I/O error, 4 numeric-domain error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import fileio
from .acutance import (
    CsfModel,
    ViewingConditions,
    acutance_score,
    csf_quadrature_weights,
    digital_to_angular,
)
from .batchloss import BatchItem, batch_loss
from .deadleaves import DeadLeavesParams, generate
from .degrade import add_awgn, gaussian_blur, unsharp_mask
from .image import GreyImage, psnr
from .rawpath import DEFAULT_READ_B, DEFAULT_SHOT_A, add_poisson_gaussian, pack_rggb, raw_to_grey
from .spectrum import MtfCurve, measure_mtf

LAMBDA_GRID = (0.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _add_viewing_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pixel-size-mm", type=float, default=0.2,
                   help="display pixel pitch in mm (default 0.2)")
    p.add_argument("--distance-mm", type=float, default=1000.0,
                   help="viewing distance in mm (default 1000)")
    p.add_argument("--csf-b", type=float, default=0.2,
                   help="CSF exponential decay parameter (default 0.2)")
    p.add_argument("--csf-c", type=float, default=0.8,
                   help="CSF power-law parameter (default 0.8)")
    p.add_argument("--cap-cpd", type=float, default=None,
                   help="cap the CSF integration limit in cycles/degree "
                        "(e.g. 40 for the rounded standards value); default: "
                        "exact Nyquist of the viewing geometry")


def _measure_context(args) -> tuple[CsfModel, ViewingConditions]:
    viewing = ViewingConditions(args.pixel_size_mm, args.distance_mm)
    model = CsfModel(
        b=args.csf_b,
        c=args.csf_c,
        nyquist_cpd=args.cap_cpd if args.cap_cpd is not None
        else digital_to_angular(0.5, viewing),
    )
    return model, viewing


def _parse_palette(text: str):
    triples = []
    for part in text.split(";"):
        vals = [float(v) for v in part.split(",")]
        if len(vals) != 3:
            raise ValueError(f"palette entry {part!r} is not an RGB triple")
        triples.append(tuple(vals))
    return tuple(triples)


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def params_from_sidecar(doc: dict) -> DeadLeavesParams:
    """Rebuild generation parameters from a generate sidecar."""
    p = doc["params"]
    return DeadLeavesParams(
        width=p["width"],
        height=p["height"],
        alpha=p["alpha"],
        r_min=p["r_min"],
        r_max=p["r_max"],
        color_mode=p["color_mode"],
        palette=tuple(tuple(c) for c in p["palette"]),
        seed=p["seed"],
        disk_budget=p["disk_budget"],
    )


def _cmd_generate(args) -> int:
    palette = _parse_palette(args.palette) if args.palette else ()
    params = DeadLeavesParams(
        width=args.width,
        height=args.height,
        alpha=args.alpha,
        r_min=args.r_min,
        r_max=args.r_max,
        color_mode=args.color_mode,
        palette=palette,
        seed=args.seed,
    )
    img = generate(params)
    fileio.write_image(args.out, img, bit_depth=args.bit_depth)
    fileio.write_sidecar(args.out, {
        "command": "generate",
        "params": {
            "width": params.width,
            "height": params.height,
            "alpha": params.alpha,
            "r_min": params.r_min,
            "r_max": params.r_max,
            "r_max_resolved": params.resolved_r_max,
            "color_mode": params.color_mode,
            "palette": [list(c) for c in params.palette],
            "seed": params.seed,
            "disk_budget": params.disk_budget,
        },
        "bit_depth": args.bit_depth,
    })
    print(f"wrote {args.out} ({params.width}x{params.height}, seed {params.seed})")
    return 0


# ---------------------------------------------------------------------------
# degrade
# ---------------------------------------------------------------------------

def _cmd_degrade(args, parser: argparse.ArgumentParser) -> int:
    ops = [name for name, flag in [
        ("awgn", args.awgn is not None),
        ("blur", args.blur is not None),
        ("sharpen", args.sharpen is not None),
        ("poisson_gaussian", args.poisson_gaussian),
    ] if flag]
    if len(ops) != 1:
        parser.error("choose exactly one of --awgn, --blur, --sharpen, "
                     "--poisson-gaussian")
    op = ops[0]
    is_rawf = args.input.lower().endswith(".rawf")

    if op == "poisson_gaussian":
        if not is_rawf:
            parser.error("--poisson-gaussian operates on RAWF input")
        raw = fileio.read_rawf(args.input)
        out = add_poisson_gaussian(raw, args.shot_a, args.read_b, args.seed)
        fileio.write_rawf(args.out, out)
        operation = {"kind": "poisson_gaussian", "shot_a": args.shot_a,
                     "read_b": args.read_b, "seed": args.seed}
    else:
        if is_rawf:
            parser.error(f"--{op} operates on PNG input")
        img = fileio.read_image(args.input)
        if op == "awgn":
            out = add_awgn(img, args.awgn, args.seed)
            operation = {"kind": "awgn", "sigma_255": args.awgn, "seed": args.seed}
        elif op == "blur":
            out = gaussian_blur(img, args.blur)
            operation = {"kind": "blur", "sigma_b": args.blur}
        else:
            out = unsharp_mask(img, args.sharpen, args.sharpen_sigma)
            operation = {"kind": "sharpen", "amount": args.sharpen,
                         "sigma_b": args.sharpen_sigma}
        fileio.write_image(args.out, out, bit_depth=args.bit_depth)
    fileio.write_sidecar(args.out, {
        "command": "degrade",
        "input": str(args.input),
        "operation": operation,
    })
    print(f"wrote {args.out} ({operation['kind']})")
    return 0


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------

def _measure_pair(ref_path, test_path, model, viewing, eps, window, ring_ratio):
    """Load a pair (PNG or RAWF) and return (curve, psnr_db)."""
    if str(ref_path).lower().endswith(".rawf"):
        raw_ref = fileio.read_rawf(ref_path)
        raw_test = fileio.read_rawf(test_path)
        if raw_ref.wb_gains != raw_test.wb_gains:
            raise ValueError("white-balance gains of the RAW pair differ")
        ref = raw_to_grey(pack_rggb(raw_ref), raw_ref.wb_gains)
        test = raw_to_grey(pack_rggb(raw_test), raw_ref.wb_gains)
        quality = psnr(GreyImage(raw_ref.data), GreyImage(raw_test.data))
    else:
        ref = fileio.read_image(ref_path)
        test = fileio.read_image(test_path)
        quality = psnr(ref, test)
    curve = measure_mtf(ref, test, eps=eps, window=window, ring_ratio=ring_ratio)
    return curve, quality


def _write_curve_csv(path, curve: MtfCurve, weights, viewing) -> None:
    f_ang = digital_to_angular(curve.f_digital, viewing)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "f_digital", "f_angular", "mtf", "csf_weight"])
        for i, k in enumerate(curve.k):
            w.writerow([k, _fmt(curve.f_digital[i]), _fmt(f_ang[i]),
                        _fmt(curve.values[i]), _fmt(weights[i])])


def _cmd_measure(args) -> int:
    model, viewing = _measure_context(args)
    curve, quality = _measure_pair(
        args.ref, args.test, model, viewing,
        args.eps, args.window, args.ring_ratio,
    )
    weights = csf_quadrature_weights(curve, model, viewing)
    score = float(np.dot(weights, curve.values))

    csv_path = args.csv or (args.test + ".mtf.csv")
    json_path = args.json or (args.test + ".measure.json")
    _write_curve_csv(csv_path, curve, weights, viewing)
    summary = {
        "schema": fileio.SCHEMA,
        "command": "measure",
        "ref": str(args.ref),
        "test": str(args.test),
        "n": curve.n,
        "acutance": score,
        "acutance_loss": abs(1.0 - score),
        "psnr": fileio.json_float(quality),
        "eps": args.eps,
        "window": args.window,
        "ring_ratio": args.ring_ratio,
        "viewing": {"pixel_size_mm": viewing.pixel_size_mm,
                    "distance_mm": viewing.distance_mm},
        "csf": {"b": model.b, "c": model.c, "nyquist_cpd": model.nyquist_cpd},
    }
    Path(json_path).write_text(json.dumps(summary, indent=2) + "\n")
    if args.plot:
        from .plots import save_weighted_mtf_figure
        save_weighted_mtf_figure(args.plot, curve, weights, score)
    psnr_text = f"{quality:.2f} dB" if np.isfinite(quality) else "inf"
    print(f"A = {score:.6f}  loss = {abs(1.0 - score):.6f}  psnr = {psnr_text}")
    return 0


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _cmd_report(args) -> int:
    from .plots import save_lambda_sweep_figure, save_mtf_figure

    model, viewing = _measure_context(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = fileio.read_manifest(args.manifest)
    if not manifest:
        raise ValueError(f"manifest {args.manifest} lists no items")
    lambdas = ([float(v) for v in args.lambdas.split(",")]
               if args.lambdas else list(LAMBDA_GRID))

    missing = []
    present = []
    for item in manifest:
        gone = [p for p in (item.clean, item.restored) if not Path(p).is_file()]
        if gone:
            missing.extend(gone)
        else:
            present.append(item)

    def load_and_score(item):
        clean = fileio.read_image(item.clean)
        restored = fileio.read_image(item.restored)
        record = {"psnr": psnr(clean, restored), "curve": None, "acutance": None}
        if item.is_dead_leaves:
            curve = measure_mtf(clean, restored, eps=args.eps)
            record["curve"] = curve
            record["acutance"] = acutance_score(curve, model, viewing)
        return BatchItem(clean, restored, item.is_dead_leaves), record

    with ThreadPoolExecutor() as pool:
        scored = list(pool.map(load_and_score, present))

    items_csv = out_dir / "items.csv"
    with open(items_csv, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["clean", "restored", "is_dead_leaves", "psnr",
                    "acutance", "acutance_loss"])
        for item, (_, rec) in zip(present, scored):
            a = rec["acutance"]
            w.writerow([
                item.clean, item.restored, int(item.is_dead_leaves),
                "" if np.isinf(rec["psnr"]) else _fmt(rec["psnr"]),
                "" if a is None else _fmt(a),
                "" if a is None else _fmt(abs(1.0 - a)),
            ])

    curves = [rec["curve"] for _, rec in scored if rec["curve"] is not None]
    mean_curve = None
    if curves:
        sizes = {c.n for c in curves}
        if len(sizes) != 1:
            raise ValueError(f"dead-leaves items disagree on size: {sorted(sizes)}")
        mean_curve = MtfCurve(np.mean([c.values for c in curves], axis=0),
                              curves[0].n)
        f_ang = digital_to_angular(mean_curve.f_digital, viewing)
        with open(out_dir / "mean_mtf.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "f_digital", "f_angular", "mtf_mean"])
            for i, k in enumerate(mean_curve.k):
                w.writerow([k, _fmt(mean_curve.f_digital[i]), _fmt(f_ang[i]),
                            _fmt(mean_curve.values[i])])
        save_mtf_figure(out_dir / "mean_mtf.png",
                        [(f"dataset mean ({len(curves)} items)", mean_curve)],
                        title="Dataset-averaged MTF")

    batch = [it for it, _ in scored]
    sweep = [batch_loss(batch, lam, fidelity=args.fidelity, m=model, v=viewing)
             for lam in lambdas]
    with open(out_dir / "lambda_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "total", "fidelity_term", "acutance_term"])
        for lam, loss in zip(lambdas, sweep):
            w.writerow([_fmt(lam), _fmt(loss.total), _fmt(loss.fidelity_term),
                        _fmt(loss.acutance_term)])
    save_lambda_sweep_figure(
        out_dir / "lambda_sweep.png", lambdas,
        [s.total for s in sweep], [s.fidelity_term for s in sweep],
        [s.acutance_term for s in sweep],
    )

    acutances = [rec["acutance"] for _, rec in scored if rec["acutance"] is not None]
    summary = {
        "schema": fileio.SCHEMA,
        "command": "report",
        "manifest": str(args.manifest),
        "n_items": len(present),
        "n_dead_leaves": len(curves),
        "missing": sorted(missing),
        "partial": bool(missing),
        "fidelity": args.fidelity,
        "lambdas": lambdas,
        "mean_acutance": float(np.mean(acutances)) if acutances else None,
        "viewing": {"pixel_size_mm": viewing.pixel_size_mm,
                    "distance_mm": viewing.distance_mm},
        "csf": {"b": model.b, "c": model.c, "nyquist_cpd": model.nyquist_cpd},
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    if missing:
        print(f"partial report: {len(missing)} missing file(s)", file=sys.stderr)
        for p in sorted(missing):
            print(f"  missing: {p}", file=sys.stderr)
        return 3
    print(f"report written to {out_dir} ({len(present)} items, "
          f"{len(curves)} dead leaves)")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acutance-bench",
        description="Dead leaves targets, cross-power MTF, and texture "
                    "acutance measurements",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a dead leaves target")
    g.add_argument("--width", type=int, default=512)
    g.add_argument("--height", type=int, default=512)
    g.add_argument("--alpha", type=float, default=3.0,
                   help="radius power-law exponent (default 3)")
    g.add_argument("--r-min", type=float, default=1.0)
    g.add_argument("--r-max", type=float, default=None,
                   help="default: width/4")
    g.add_argument("--color-mode", choices=["uniform-rgb", "grey-uniform",
                                            "palette"], default="uniform-rgb")
    g.add_argument("--palette", default=None,
                   help="semicolon-separated RGB triples, e.g. '1,0,0;0,0.5,1'")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--bit-depth", type=int, choices=[8, 16], default=16)
    g.add_argument("--out", required=True, help="output PNG path")
    g.set_defaults(func=_cmd_generate)

    d = sub.add_parser("degrade", help="apply a degradation to an image")
    d.add_argument("input", help="input PNG or RAWF file")
    d.add_argument("--awgn", type=float, default=None, metavar="SIGMA",
                   help="additive Gaussian noise std on the 0-255 scale "
                        "(benchmark levels: 25, 50)")
    d.add_argument("--blur", type=float, default=None, metavar="SIGMA_B",
                   help="Gaussian blur std in pixels")
    d.add_argument("--sharpen", type=float, default=None, metavar="AMOUNT",
                   help="unsharp mask amount")
    d.add_argument("--sharpen-sigma", type=float, default=1.0)
    d.add_argument("--poisson-gaussian", action="store_true",
                   help="signal-dependent sensor noise (RAWF input only)")
    d.add_argument("--shot-a", type=float, default=DEFAULT_SHOT_A)
    d.add_argument("--read-b", type=float, default=DEFAULT_READ_B)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--bit-depth", type=int, choices=[8, 16], default=16)
    d.add_argument("--out", required=True)
    d.set_defaults(func=lambda a: _cmd_degrade(a, d))

    m = sub.add_parser("measure", help="measure MTF and acutance of a pair")
    m.add_argument("ref", help="reference image (PNG or RAWF)")
    m.add_argument("test", help="test image (PNG or RAWF)")
    m.add_argument("--eps", type=float, default=1e-12,
                   help="relative guard on near-empty reference bins")
    m.add_argument("--window", choices=["hann"], default=None,
                   help="apply a window before the DFT (off by default)")
    m.add_argument("--ring-ratio", action="store_true",
                   help="average cross and auto power per ring before dividing")
    m.add_argument("--csv", default=None, help="per-ring CSV output path")
    m.add_argument("--json", default=None, help="JSON summary output path")
    m.add_argument("--plot", default=None, help="optional figure output path")
    _add_viewing_args(m)
    m.set_defaults(func=_cmd_measure)

    r = sub.add_parser("report", help="dataset report over a batch manifest")
    r.add_argument("manifest", help="lines of 'clean,restored,flag'")
    r.add_argument("--out-dir", required=True)
    r.add_argument("--lambdas", default=None,
                   help="comma-separated acutance weights "
                        "(default 0,2,5,10,20,50,100,200,500)")
    r.add_argument("--fidelity", choices=["l2", "l1"], default="l2")
    r.add_argument("--eps", type=float, default=1e-12)
    _add_viewing_args(r)
    r.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
