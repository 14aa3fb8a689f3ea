"""Command-line entry point: ``muller <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .bench import time_resizers
from .core import (
    BASE_METHODS,
    EQ2_READINGS,
    NONLINEARITIES,
    PRESET_NAMES,
    MullerParams,
    decompose,
    muller_flops,
    muller_forward,
    muller_forward_linear_form,
    preset,
    preset_table,
)
from .data import make_texture_dataset
from .gradients import run_gradcheck
from .image import ImageFormatError, fixture_image, image_stats, load_image, save_image
from .nn import ToyClassifier
from .resize import ResizeSpec, resize, resize_area
from .train import TrainConfig, train_joint, write_metrics

log = logging.getLogger("muller")


class CliError(Exception):
    pass


def display_diff(diff: np.ndarray) -> np.ndarray:
    """Map a signed difference to [0, 1] with zero at mid-gray."""
    maxabs = float(np.max(np.abs(diff)))
    if maxabs == 0.0:
        return np.full_like(diff, 0.5)
    return 0.5 + diff / (2.0 * maxabs)


def _limit_threads():
    n = int(os.environ.get("MULLER_THREADS", "1"))
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        return None
    return threadpool_limits(limits=max(n, 1))


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def params_from_args(args, require_source: bool = True) -> MullerParams:
    sources = [
        name
        for name, given in (
            ("--preset", args.preset is not None),
            ("--params-file", args.params_file is not None),
            ("--alpha/--beta", args.alpha is not None or args.beta is not None),
        )
        if given
    ]
    if len(sources) > 1:
        raise CliError(f"give exactly one parameter source, got {' and '.join(sources)}")
    if not sources:
        if require_source:
            raise CliError("give one of --preset, --params-file or --alpha/--beta")
        params = MullerParams.zeros(args.k or 2)
    elif args.preset is not None:
        params = preset(args.preset, antialias=args.antialias_input)
    elif args.params_file is not None:
        params = MullerParams.load(args.params_file)
    else:
        alpha = _floats(args.alpha or "")
        beta = _floats(args.beta or "")
        if not alpha and not beta:
            raise CliError("--alpha/--beta given without values")
        alpha = alpha or [0.0] * len(beta)
        beta = beta or [0.0] * len(alpha)
        params = MullerParams(alpha=alpha, beta=beta)

    if args.k is not None and args.k != params.k:
        raise CliError(f"--k {args.k} conflicts with the {params.k}-layer parameter source")
    overrides = {
        "ksize": args.ksize,
        "std": args.std,
        "nonlinearity": args.nonlinearity,
        "base_method": args.base_method,
        "eq2_reading": args.eq2_reading,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        d = params.to_dict()
        d.update(overrides)
        params = MullerParams.from_dict(d)
    return params


def _read_input(args) -> np.ndarray:
    img = fixture_image() if args.input is None else load_image(args.input)
    if args.antialias_input:
        h, w = img.shape[:2]
        th, tw = args.input_height or h, args.input_width or w
        if (th, tw) != (h, w):
            img = resize_area(img, th, tw)
    elif args.input_height or args.input_width:
        raise CliError("--input-height/--input-width need --antialias-input")
    return img


def _out_dims(args, img) -> tuple[int, int]:
    h = args.height if args.height is not None else img.shape[0]
    w = args.width if args.width is not None else img.shape[1]
    if h < 1 or w < 1:
        raise CliError(f"invalid output size {h}x{w}")
    return h, w


def cmd_resize(args) -> int:
    if args.output is None:
        raise CliError("--output is required")
    params = params_from_args(args)
    img = _read_input(args)
    out_h, out_w = _out_dims(args, img)
    z = muller_forward(img, params, out_h, out_w)
    base = resize(img, out_h, out_w, params.base_method)
    save_image(z, args.output, clip=True)
    if args.emit_diff:
        save_image(display_diff(z - base), args.emit_diff, clip=True)
    report = {
        "input_shape": list(img.shape),
        "output_shape": list(z.shape),
        "params": params.to_dict(),
        "high_freq_energy": image_stats(z).high_freq_energy,
        "base_high_freq_energy": image_stats(base).high_freq_energy,
    }
    print(json.dumps(report))
    return 0


def cmd_decompose(args) -> int:
    if args.output is None:
        raise CliError("--output (a directory) is required")
    params = params_from_args(args, require_source=False)
    img = _read_input(args)
    out_h, out_w = _out_dims(args, img)
    dec = decompose(img, params, out_h, out_w)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    save_image(dec.base, outdir / "base.png", clip=True)
    for ell, band in enumerate(dec.bands, start=1):
        save_image(display_diff(band), outdir / f"band_{ell}.png", clip=True)
    arrays = {"base": dec.base, **{f"band_{i}": b for i, b in enumerate(dec.bands, start=1)}}
    if params.nonlinearity == "identity":
        arrays["linear_form"] = muller_forward_linear_form(img, params, out_h, out_w)
    np.savez(outdir / "decomposition.npz", **arrays)
    print(json.dumps({"k": params.k, "files": sorted(p.name for p in outdir.iterdir())}))
    return 0


def cmd_train(args) -> int:
    if args.output is None:
        raise CliError("--output (a directory) is required")
    params0 = params_from_args(args, require_source=False)
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr_resizer=args.lr_resizer,
        lr_model=args.lr_model,
        seed=args.seed,
        out_h=args.height or 16,
        out_w=args.width or 16,
        train_resizer=not args.control,
    )
    ds = make_texture_dataset(args.seed, args.n_samples, args.n_classes, args.src_size, args.src_size)
    model0 = ToyClassifier.init(cfg.out_h * cfg.out_w, args.hidden, args.n_classes, seed=args.seed)

    def progress(rec):
        log.info("epoch %d loss %.4f val_acc %.3f alpha %s", rec["epoch"], rec["loss"], rec["val_accuracy"],
                 np.round(rec["alpha"], 4).tolist())

    params, model, metrics = train_joint(ds, params0, model0, cfg, on_epoch=progress)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    write_metrics(metrics, outdir / "metrics.jsonl")
    params.save(outdir / "params.json")
    model.save(outdir / "classifier.npz")
    print(json.dumps(metrics[-1]))
    return 0


def cmd_gradcheck(args) -> int:
    cases = run_gradcheck(
        n_instances=args.instances,
        seed=args.seed,
        with_input=args.with_input,
        size=8 if args.with_input else 16,
        inject_bug=args.inject_bug,
    )
    tol = args.tolerance
    failed = 0
    for case in cases:
        ok = case.worst < tol
        failed += not ok
        errs = " ".join(f"{name}={err:.2e}" for name, err in case.errors.items())
        print(f"case {case.index:3d} k={case.k} {'ok  ' if ok else 'FAIL'} {errs}")
    print(f"{len(cases) - failed}/{len(cases)} within {tol:g}")
    return 1 if failed else 0


def cmd_flops(args) -> int:
    params = params_from_args(args, require_source=False)
    in_h = args.input_height or 512
    in_w = args.input_width or 512
    spec = ResizeSpec(in_h, in_w, args.height or 224, args.width or 224, params.base_method)
    report = muller_flops(spec, params, channels=args.channels)
    out = {**asdict(report), "total": report.total, "gflops": report.total / 1e9}
    print(json.dumps(out))
    return 0


def cmd_bench(args) -> int:
    if args.params_file is None and args.alpha is None and args.beta is None and args.k is None:
        args.preset = args.preset or "resnet50"
    params = params_from_args(args, require_source=False)
    if args.input is None and not (args.input_height or args.input_width):
        img = fixture_image()
    elif args.input is None:
        rng = np.random.default_rng(args.seed)
        img = rng.random((args.input_height or 512, args.input_width or 512, 3))
    else:
        img = load_image(args.input)
    out_h, out_w = args.height or 224, args.width or 224
    result = time_resizers(img, params, out_h, out_w, reps=args.reps)
    print(json.dumps(result))
    return 0


def cmd_presets(args) -> int:
    rows = preset_table()
    if args.preset is not None:
        if args.preset not in PRESET_NAMES:
            raise CliError(f"unknown preset {args.preset!r}; choose from {', '.join(PRESET_NAMES)}")
        rows = [r for r in rows if r["name"] == args.preset]
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'name':<14}{'antialias':<11}{'alpha_1':>9}{'beta_1':>9}{'alpha_2':>9}{'beta_2':>9}")
    for r in rows:
        (l1, l2) = r["layers"]
        print(
            f"{r['name']:<14}{'yes' if r['antialias'] else 'no':<11}"
            f"{l1['alpha']:>9g}{l1['beta']:>9g}{l2['alpha']:>9g}{l2['beta']:>9g}"
        )
    return 0


COMMANDS = {
    "resize": cmd_resize,
    "decompose": cmd_decompose,
    "train": cmd_train,
    "gradcheck": cmd_gradcheck,
    "flops": cmd_flops,
    "bench": cmd_bench,
    "presets": cmd_presets,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="PNG, PGM or PPM file (default: bundled test image)")
    common.add_argument("--output")
    common.add_argument("--width", type=int, help="output width")
    common.add_argument("--height", type=int, help="output height")
    common.add_argument("--input-width", type=int, help="resizer input width after --antialias-input")
    common.add_argument("--input-height", type=int, help="resizer input height after --antialias-input")
    common.add_argument("--preset", help=f"one of {', '.join(PRESET_NAMES)}")
    common.add_argument("--params-file", help="parameter JSON document")
    common.add_argument("--alpha", help="comma-separated per-layer scales")
    common.add_argument("--beta", help="comma-separated per-layer shifts")
    common.add_argument("--antialias-input", action="store_true",
                        help="AREA-downscale the source first; selects anti-aliased preset values")
    common.add_argument("--k", type=int)
    common.add_argument("--ksize", type=int)
    common.add_argument("--std", type=float)
    common.add_argument("--nonlinearity", choices=NONLINEARITIES)
    common.add_argument("--base-method", choices=BASE_METHODS)
    common.add_argument("--eq2-reading", choices=EQ2_READINGS)
    common.add_argument("--emit-diff", metavar="PATH", help="also write the display-normalized difference image")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--epochs", type=int, default=8)
    common.add_argument("--batch-size", type=int, default=32)
    common.add_argument("--lr-resizer", type=float, default=0.05)
    common.add_argument("--lr-model", type=float, default=0.003)
    common.add_argument("--reps", type=int, default=20)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="muller", description="Multilayer Laplacian resizer toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("resize", parents=[common], help="resize an image")
    sub.add_parser("decompose", parents=[common], help="write the base image and resized subbands")
    p = sub.add_parser("train", parents=[common], help="joint training on synthetic textures")
    p.add_argument("--control", action="store_true", help="freeze the resizer at its initial parameters")
    p.add_argument("--n-samples", type=int, default=2000)
    p.add_argument("--n-classes", type=int, default=4)
    p.add_argument("--src-size", type=int, default=64)
    p.add_argument("--hidden", type=int, default=32)
    p = sub.add_parser("gradcheck", parents=[common], help="analytic vs finite-difference gradients")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--with-input", action="store_true", help="also check input gradients (8x8 images)")
    p.add_argument("--inject-bug", action="store_true", help="corrupt the analytic gradient on purpose")
    p = sub.add_parser("flops", parents=[common], help="operation count report")
    p.add_argument("--channels", type=int, default=3)
    sub.add_parser("bench", parents=[common], help="time plain bilinear against the full resizer")
    p = sub.add_parser("presets", parents=[common], help="list learned parameter presets")
    p.add_argument("--json", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    limiter = _limit_threads()
    try:
        return COMMANDS[args.command](args)
    except (CliError, ImageFormatError, ValueError, OSError) as exc:
        print(f"muller {args.command}: error: {exc}", file=sys.stderr)
        return 2
    finally:
        if limiter is not None:
            limiter.unregister()


if __name__ == "__main__":
    sys.exit(main())
