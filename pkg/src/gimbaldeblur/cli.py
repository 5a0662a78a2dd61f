"""Command-line interface.

Subcommands: psf-analytic, psf-estimate, make-pairs, build-lut, deblur,
run, bench, evaluate.  Every subcommand accepts --config (flat key=value
file supplying defaults; explicit flags win), --workers and --verbose.

Exit codes: 0 success, 2 bad arguments, 3 data error, 4 LUT miss.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core.imgio import load_image, save_pgm
from .core.kernel import load_psf_text, save_psf_text
from .deconv import (HyperLapParams, RlParams, WienerParams, deblur,
                     method_names)
from .errors import GimbalDeblurError, ImageFormatError, LutMissError
from .metrics import psnr, ssim
from .pipeline import (BATCH_FRAME_COUNT, STREAMING_FRAME_COUNT,
                       PipelineConfig, PsfLut, bench, build_lut, run_pipeline)
from .psf_analytic import (CameraIntrinsics, GimbalMotion, PsfSynthesisConfig,
                           psf_grid, synthesize_psf)
from .psf_estimate import EstimationConfig, build_pair_dataset, estimate_kernel
from .scenes import write_frame_sequence

log = logging.getLogger("gimbaldeblur")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_LUT_MISS = 4


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE",
                        help="flat key=value file with defaults for this command")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes for frame-parallel commands")
    parser.add_argument("--verbose", action="store_true",
                        help="enable debug logging")


def _camera_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--fov", type=float, help="diagonal field of view, degrees")
    parser.add_argument("--focal", type=float, help="focal length, pixels")
    parser.add_argument("--width", type=int, default=558, help="frame width, pixels")
    parser.add_argument("--height", type=int, default=481, help="frame height, pixels")


def _motion_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--exposure", type=float, default=0.005,
                        help="exposure time, seconds")
    parser.add_argument("--frame-rate", type=float, default=30.0,
                        help="capture frame rate, fps")


def _method_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--method", choices=method_names(), default="wiener")
    parser.add_argument("--nsr", type=float, help="Wiener noise-to-signal ratio")
    parser.add_argument("--rl-iters", type=int, help="Richardson-Lucy iterations")
    parser.add_argument("--lambda", dest="lam", type=float,
                        help="hyper-Laplacian data weight")
    parser.add_argument("--p", type=float, help="hyper-Laplacian prior exponent")
    parser.add_argument("--no-edgetaper", action="store_true",
                        help="skip edge tapering before deconvolution")


def _intrinsics_from(args) -> CameraIntrinsics:
    if args.focal is not None:
        return CameraIntrinsics(args.focal, args.width, args.height)
    if args.fov is not None:
        return CameraIntrinsics.from_fov(args.fov, args.width, args.height)
    raise ValueError("provide --focal or --fov")


def _params_from(args):
    method = args.method
    if method == "wiener":
        return WienerParams(nsr=args.nsr) if args.nsr is not None else WienerParams()
    if method == "rl":
        return RlParams(iterations=args.rl_iters) if args.rl_iters else RlParams()
    kwargs = {}
    if args.lam is not None:
        kwargs["lam"] = args.lam
    if args.p is not None:
        kwargs["p"] = args.p
    return HyperLapParams(**kwargs)


def _parse_rates(text: str) -> list[float]:
    try:
        rates = [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValueError(f"bad rates list {text!r}") from exc
    if not rates:
        raise ValueError("empty rates list")
    return rates


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="gimbal-deblur",
        description="PSF-aware motion deblurring for yaw-panning gimbal cameras")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    p = sub.add_parser("psf-analytic",
                       help="synthesize the yaw PSF from camera and motion parameters")
    _camera_args(p)
    _motion_args(p)
    p.add_argument("--rate", type=float, required=True, help="steering rate, deg/s")
    p.add_argument("--anchors", choices=("center", "grid"), default="grid",
                   help="single center anchor or the averaged 5-anchor grid")
    p.add_argument("--oversample", type=int, default=4)
    p.add_argument("--max-spread", type=float, help="override half-spread, pixels")
    p.add_argument("--output", "-o", required=True, help="kernel text file to write")
    p.add_argument("--plot", metavar="PNG", help="also render the kernel image")
    _add_common(p)
    subparsers["psf-analytic"] = p

    p = sub.add_parser("psf-estimate",
                       help="estimate the PSF from a blur-sharp image pair")
    p.add_argument("--blurred", required=True)
    p.add_argument("--sharp", required=True)
    p.add_argument("--kernel-size", type=int, default=21)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--init", choices=("uniform", "delta"), default="uniform")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--plot", metavar="PNG")
    _add_common(p)
    subparsers["psf-estimate"] = p

    p = sub.add_parser("make-pairs",
                       help="build blur-sharp pairs from a slow-pan sequence")
    p.add_argument("--frames", required=True, help="directory of sharp frames")
    p.add_argument("--rates", required=True, help="steering rates, e.g. '10,20,40'")
    _motion_args(p)
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=16)
    p.add_argument("--output", "-o", required=True, help="output directory")
    _add_common(p)
    subparsers["make-pairs"] = p

    p = sub.add_parser("build-lut", help="precompute a steering-rate PSF table")
    p.add_argument("--mode", choices=("analytic", "pairs"), default="analytic")
    _camera_args(p)
    _motion_args(p)
    p.add_argument("--rates", required=True)
    p.add_argument("--frames", help="slow-pan frame directory (pairs mode)")
    p.add_argument("--kernel-size", type=int, default=31,
                   help="estimation support (pairs mode)")
    p.add_argument("--camera-id", default="unknown")
    p.add_argument("--output", "-o", required=True, help="LUT directory")
    _add_common(p)
    subparsers["build-lut"] = p

    p = sub.add_parser("deblur", help="deblur frames with a known PSF file")
    p.add_argument("--input", required=True, help="image file or frame directory")
    p.add_argument("--psf", required=True, help="kernel text file")
    _method_args(p)
    p.add_argument("--timing-report", metavar="JSON",
                   help="write per-frame timings (and a figure) here")
    p.add_argument("--output", "-o", required=True,
                   help="output file (single image) or directory")
    _add_common(p)
    subparsers["deblur"] = p

    p = sub.add_parser("run", help="deblur a frame directory using a PSF LUT")
    p.add_argument("--input", required=True, help="frame directory")
    p.add_argument("--output", "-o", required=True, help="output directory")
    p.add_argument("--lut", required=True, help="LUT directory")
    p.add_argument("--rate", type=float, required=True, help="steering rate, deg/s")
    p.add_argument("--rates-file", metavar="JSON",
                   help="optional per-frame rates {frame_index: rate}")
    _method_args(p)
    p.add_argument("--report", metavar="JSON",
                   help="write the timing report (and a figure) here")
    _add_common(p)
    subparsers["run"] = p

    p = sub.add_parser("bench", help="compare method timings on a frame set")
    p.add_argument("--input", help="frame directory (generated if --synthetic)")
    p.add_argument("--synthetic", type=int, metavar="N",
                   help="generate N synthetic frames instead of reading --input")
    _camera_args(p)
    p.add_argument("--lut", help="LUT directory (else analytic kernel is built)")
    _motion_args(p)
    p.add_argument("--rate", type=float, default=60.0)
    p.add_argument("--methods", default="wiener,rl,hyperlap")
    p.add_argument("--streaming-frames", type=int, default=STREAMING_FRAME_COUNT)
    p.add_argument("--batch-frames", type=int, default=BATCH_FRAME_COUNT)
    p.add_argument("--report", required=True, metavar="CSV")
    _add_common(p)
    subparsers["bench"] = p

    p = sub.add_parser("evaluate", help="PSNR/SSIM table for deblurred-reference pairs")
    p.add_argument("--manifest", required=True,
                   help="JSONL of {pair_id, method, deblurred, reference}")
    p.add_argument("--merge", metavar="CSV",
                   help="external per-pair scores to join on pair_id")
    p.add_argument("--output", "-o", required=True, metavar="CSV")
    _add_common(p)
    subparsers["evaluate"] = p

    return parser, subparsers


def _load_config_file(path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_defaults(subparser: argparse.ArgumentParser,
                           config: dict[str, str]) -> None:
    for action in subparser._actions:
        if action.dest in config:
            raw = config[action.dest]
            if isinstance(action, (argparse._StoreTrueAction,
                                   argparse._StoreFalseAction)):
                value = raw.lower() in ("1", "true", "yes", "on")
            elif action.type is not None:
                value = action.type(raw)
            else:
                value = raw
            subparser.set_defaults(**{action.dest: value})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()

    # Config files provide defaults; explicit flags override them.
    if "--config" in argv:
        try:
            config_path = argv[argv.index("--config") + 1]
        except IndexError:
            parser.error("--config requires a file argument")
        command = argv[0] if argv and not argv[0].startswith("-") else None
        if command in subparsers:
            try:
                config = _load_config_file(config_path)
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return EXIT_DATA
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_USAGE
            _apply_config_defaults(subparsers[command], config)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")

    handler = _COMMANDS[args.command]
    try:
        return handler(args)
    except LutMissError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LUT_MISS
    except (ImageFormatError, FileNotFoundError, NotADirectoryError,
            json.JSONDecodeError, GimbalDeblurError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _cmd_psf_analytic(args) -> int:
    intrinsics = _intrinsics_from(args)
    motion = GimbalMotion(args.rate, args.exposure, args.frame_rate)
    config = PsfSynthesisConfig(oversample=args.oversample,
                                max_spread_override=args.max_spread)
    if args.anchors == "center":
        kernel = synthesize_psf(intrinsics, motion, config)
    else:
        kernel = psf_grid(intrinsics, motion, config=config)
    save_psf_text(kernel, args.output)
    log.info("wrote %s (%dx%d)", args.output, kernel.size_x, kernel.size_y)
    if args.plot:
        from .report import save_kernel_figure
        save_kernel_figure(kernel, args.plot,
                           title=f"analytic PSF @ {args.rate:g} deg/s")
    return EXIT_OK


def _cmd_psf_estimate(args) -> int:
    blurred = load_image(args.blurred)
    sharp = load_image(args.sharp)
    cfg = EstimationConfig(kernel_size=args.kernel_size, max_iters=args.max_iters,
                           tol=args.tol, init=args.init)
    kernel = estimate_kernel(blurred, sharp, cfg)
    save_psf_text(kernel, args.output)
    log.info("wrote %s (%dx%d)", args.output, kernel.size_x, kernel.size_y)
    if args.plot:
        from .report import save_kernel_figure
        save_kernel_figure(kernel, args.plot, title="estimated PSF")
    return EXIT_OK


def _cmd_make_pairs(args) -> int:
    motions = [GimbalMotion(rate, args.exposure, args.frame_rate)
               for rate in _parse_rates(args.rates)]
    manifest = build_pair_dataset(args.frames, motions, args.output,
                                  bit_depth=args.bit_depth)
    log.info("wrote %s", manifest)
    return EXIT_OK


def _cmd_build_lut(args) -> int:
    motions = [GimbalMotion(rate, args.exposure, args.frame_rate)
               for rate in _parse_rates(args.rates)]
    if args.mode == "analytic":
        intrinsics = _intrinsics_from(args)
        lut = build_lut(intrinsics, motions, mode="analytic",
                        camera_id=args.camera_id)
    else:
        if not args.frames:
            raise ValueError("pairs mode requires --frames")
        lut = build_lut(None, motions, mode="pairs", frame_dir=args.frames,
                        estimation=EstimationConfig(kernel_size=args.kernel_size),
                        camera_id=args.camera_id)
    lut.save(args.output)
    log.info("wrote LUT with %d entries to %s", len(lut.entries), args.output)
    return EXIT_OK


def _cmd_deblur(args) -> int:
    kernel = load_psf_text(args.psf)
    params = _params_from(args)
    in_path = Path(args.input)
    out_path = Path(args.output)
    timings: list[dict] = []

    if in_path.is_dir():
        from .psf_estimate import list_frames
        frames = list_frames(in_path)
        if not frames:
            raise GimbalDeblurError(f"{in_path}: no frames found")
        out_path.mkdir(parents=True, exist_ok=True)
        for frame in frames:
            image = load_image(frame)
            result = deblur(image, kernel, args.method, params=params,
                            taper=not args.no_edgetaper, timings=timings)
            timings[-1]["frame"] = frame.name
            save_pgm(result, out_path / (frame.stem + ".pgm"))
    else:
        image = load_image(in_path)
        result = deblur(image, kernel, args.method, params=params,
                        taper=not args.no_edgetaper, timings=timings)
        timings[-1]["frame"] = in_path.name
        save_pgm(result, out_path)

    if args.timing_report:
        records = [{"frame": t["frame"], "method": t["method"],
                    "ms": round(t["ms"], 3)} for t in timings]
        with open(args.timing_report, "w") as fh:
            json.dump(records, fh, indent=2)
        from .report import figure_path_for, save_bench_figure
        rows = [{"method": args.method, "protocol": "deblur",
                 "ms_per_frame": sum(t["ms"] for t in timings) / len(timings)}]
        save_bench_figure(rows, figure_path_for(args.timing_report))
    return EXIT_OK


def _sidecar_from(path) -> dict[int, float]:
    with open(path) as fh:
        raw = json.load(fh)
    return {int(k): float(v) for k, v in raw.items()}


def _cmd_run(args) -> int:
    lut = PsfLut.load(args.lut)
    cfg = PipelineConfig(
        input_dir=Path(args.input),
        output_dir=Path(args.output),
        steering_rate=args.rate,
        method=args.method,
        params=_params_from(args),
        workers=args.workers,
        taper=not args.no_edgetaper,
        report_path=Path(args.report) if args.report else None,
        rates_sidecar=_sidecar_from(args.rates_file) if args.rates_file else None,
    )
    report = run_pipeline(cfg, lut)
    log.info("%d frames, %.1f fps (%d worker(s))",
             report.frames, report.fps, report.workers)
    if args.report:
        from .report import figure_path_for, save_timing_figure
        save_timing_figure(report, figure_path_for(args.report))
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.synthetic:
        frame_dir = Path(args.input) if args.input else Path("bench_frames")
        write_frame_sequence(frame_dir, args.synthetic, args.width, args.height,
                             seed=1234)
    else:
        if not args.input:
            raise ValueError("provide --input or --synthetic")
        frame_dir = Path(args.input)

    if args.lut:
        lut = PsfLut.load(args.lut)
    else:
        intrinsics = _intrinsics_from(args)
        motion = GimbalMotion(args.rate, args.exposure, args.frame_rate)
        lut = build_lut(intrinsics, [motion], mode="analytic")

    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    rows = bench(frame_dir, lut, args.rate, methods=methods, workers=args.workers,
                 protocols={"streaming": args.streaming_frames,
                            "batch": args.batch_frames})
    from .report import figure_path_for, save_bench_figure, write_csv
    write_csv(rows, args.report)
    save_bench_figure(rows, figure_path_for(args.report))
    for row in rows:
        log.info("%(protocol)s %(method)s: %(ms_per_frame).1f ms/frame "
                 "(%(fps).1f fps)", row)
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    rows = []
    with open(args.manifest) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "warning" in record:
                continue
            deblurred = load_image(record["deblurred"])
            reference = load_image(record["reference"])
            score = psnr(deblurred, reference)
            rows.append({
                "pair_id": record.get("pair_id", f"pair{lineno:04d}"),
                "method": record.get("method", ""),
                "psnr_db": round(score, 4) if score != float("inf") else "inf",
                "ssim": round(ssim(deblurred, reference), 6),
            })
    if args.merge:
        _merge_external_scores(rows, args.merge)
    from .report import figure_path_for, save_eval_figure, write_csv
    write_csv(rows, args.output)
    finite = [r for r in rows if r["psnr_db"] != "inf"]
    if finite:
        save_eval_figure(finite, figure_path_for(args.output))
    log.info("wrote %s (%d pairs)", args.output, len(rows))
    return EXIT_OK


def _merge_external_scores(rows: list[dict], path) -> None:
    """Join externally computed per-pair scores (e.g. no-reference metrics)."""
    import csv as _csv

    with open(path, newline="") as fh:
        external = {rec["pair_id"]: rec for rec in _csv.DictReader(fh)}
    for row in rows:
        extra = external.get(str(row["pair_id"]))
        if extra:
            for key, value in extra.items():
                if key != "pair_id" and key not in row:
                    row[key] = value


_COMMANDS = {
    "psf-analytic": _cmd_psf_analytic,
    "psf-estimate": _cmd_psf_estimate,
    "make-pairs": _cmd_make_pairs,
    "build-lut": _cmd_build_lut,
    "deblur": _cmd_deblur,
    "run": _cmd_run,
    "bench": _cmd_bench,
    "evaluate": _cmd_evaluate,
}


if __name__ == "__main__":
    sys.exit(main())
