"""Command-line interface: ``layersplit {deblock,synthesize,sweep,metrics}``.

Exit codes: 0 success (and convergence, for deblock), 2 deblock stopped at
max-iters without converging, 1 any error.
"""
import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, io, kernels
from .codec import synthesize_blocking
from .metrics import evaluate
from .pipelines import DENOISERS, VARIANTS, DenoiserSpec, PipelineSpec, amplify_artifact, run_pipeline
from .solver import DivergenceError, SolverConfig

log = logging.getLogger("layersplit")

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2
MANIFEST_SCHEMA = "layersplit.manifest/1"
METRICS_SCHEMA = "layersplit.metrics/1"
DETERMINISM = (
    "Outputs depend only on the input pixels, variant and solver settings; "
    "re-running this manifest with the same kernel backend reproduces them byte for byte."
)
ARTIFACT_NOTE = (
    "artifact.png stores input - intrinsic.png as 16-bit with offset 0.5, so the two "
    "files sum back to the decoded input; away from clipped pixels it equals the "
    "artifact layer up to the solver residual."
)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """Flag errors exit 1; status 2 is reserved for non-converged runs."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def thread_cap():
    env = os.environ.get("LAYERSPLIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _float_list(text):
    vals = [v for v in text.replace(" ", "").split(",") if v]
    try:
        return [float(v) for v in vals]
    except ValueError as exc:
        raise UsageError(f"bad value list {text!r}") from exc


def _add_solver_flags(p):
    d = SolverConfig()
    p.add_argument("--alpha", type=float, default=None,
                   help="gradient sparsity weight (default 0.6; 0.3 for idslp/ivdslp)")
    p.add_argument("--beta", type=float, default=d.beta)
    p.add_argument("--gamma", type=float, default=d.gamma)
    p.add_argument("--mu0", type=float, default=d.mu0)
    p.add_argument("--rho", type=float, default=d.rho)
    p.add_argument("--delta", type=float, default=d.delta)
    p.add_argument("--max-iters", type=int, default=d.max_iters)
    p.add_argument("--threshold-rule", choices=("minimizer", "mu"), default=d.threshold_rule)
    p.add_argument("--variant", choices=VARIANTS, default="dslp")
    p.add_argument("--denoiser", choices=DENOISERS, default="bilateral")
    p.add_argument("--denoise-strength", type=float, default=25.0)
    p.add_argument("--gray", action="store_true", help="convert color input to luma")


def _spec_from_args(args):
    overrides = dict(beta=args.beta, gamma=args.gamma, mu0=args.mu0, rho=args.rho,
                     delta=args.delta, max_iters=args.max_iters,
                     threshold_rule=args.threshold_rule)
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    spec = PipelineSpec.default(args.variant, **overrides)
    if spec.denoiser is not None:
        spec.denoiser = DenoiserSpec(args.denoiser, args.denoise_strength)
    return spec


def _spec_to_dict(spec):
    return {
        "variant": spec.variant,
        "solver": spec.solver.to_dict(),
        "denoiser": asdict(spec.denoiser) if spec.denoiser else None,
    }


def _spec_from_dict(d):
    den = DenoiserSpec(**d["denoiser"]) if d.get("denoiser") else None
    return PipelineSpec(d["variant"], SolverConfig(**d["solver"]), den)


def _write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- deblock -----------------------------------------------------------------

def deblock_one(input_path, out_dir, spec_dict, gray=False, reference=None, metrics_json=None):
    """Run one input; returns (exit_code, manifest). Runs in worker processes."""
    t_start = time.perf_counter()
    spec = _spec_from_dict(spec_dict)
    out_dir = Path(out_dir).resolve()
    out_dir.mkdir(parents=True, exist_ok=True)
    timings = {}

    t0 = time.perf_counter()
    c = io.read_input(input_path, gray=gray)
    ref = io.read_input(reference, gray=gray) if reference else None
    if ref is not None and ref.shape != c.shape:
        raise UsageError(f"reference shape {ref.shape} does not match input {c.shape}")
    timings["read"] = time.perf_counter() - t0

    res = run_pipeline(c, spec, reference=ref)
    timings.update(res.timings)

    t0 = time.perf_counter()
    intrinsic_q = io.quantize16(res.intrinsic)
    stored_artifact = c - intrinsic_q
    video = c.ndim == 4
    if video:
        outputs = {
            "intrinsic": str(out_dir / "intrinsic"),
            "artifact": str(out_dir / "artifact"),
            "artifact_x10": str(out_dir / "artifact_x10"),
        }
        io.write_video(outputs["intrinsic"], res.intrinsic, io.write_image16)
        io.write_video(outputs["artifact"], stored_artifact, io.write_signed16)
        io.write_video(outputs["artifact_x10"], amplify_artifact(res.artifact))
    else:
        outputs = {
            "intrinsic": str(out_dir / "intrinsic.png"),
            "artifact": str(out_dir / "artifact.png"),
            "artifact_x10": str(out_dir / "artifact_x10.png"),
        }
        io.write_image16(outputs["intrinsic"], res.intrinsic)
        io.write_signed16(outputs["artifact"], stored_artifact)
        io.write_image8(outputs["artifact_x10"], amplify_artifact(res.artifact))
    timings["write"] = time.perf_counter() - t0

    sr = res.solve
    if res.metrics is not None:
        mpath = Path(metrics_json) if metrics_json else out_dir / "metrics.json"
        metrics = {"schema": METRICS_SCHEMA, **res.metrics.to_dict()}
        _write_json(mpath, metrics)
        outputs["metrics"] = str(mpath)
    timings["total"] = time.perf_counter() - t_start

    manifest = {
        "schema": MANIFEST_SCHEMA,
        "version": __version__,
        "inputs": [str(Path(input_path).resolve())],
        "reference": str(Path(reference).resolve()) if reference else None,
        "gray": bool(gray),
        "spec": spec_dict,
        "backend": kernels.BACKEND,
        "determinism": DETERMINISM,
        "artifact_encoding": ARTIFACT_NOTE,
        "outputs": outputs,
        "result": {
            "iterations": sr.iterations,
            "final_residual": sr.final_residual,
            "converged": sr.converged,
        },
        "timings": timings,
    }
    _write_json(out_dir / "manifest.json", manifest)
    return (EXIT_OK if sr.converged else EXIT_NOT_CONVERGED), manifest


def _deblock_worker(job):
    try:
        return deblock_one(**job)[0]
    except (OSError, ValueError, DivergenceError) as exc:
        log.error("%s: %s", job["input_path"], exc)
        return EXIT_ERROR


def cmd_deblock(args):
    if args.from_manifest:
        m = json.loads(Path(args.from_manifest).read_text())
        if m.get("schema") != MANIFEST_SCHEMA:
            raise UsageError(f"{args.from_manifest} is not a layersplit manifest")
        inputs, spec_dict, gray = m["inputs"], m["spec"], m["gray"]
        reference = m.get("reference")
    else:
        if not args.inputs:
            raise UsageError("no input given")
        inputs, gray, reference = args.inputs, args.gray, args.reference
        spec_dict = _spec_to_dict(_spec_from_args(args))
    if args.metrics_json and not reference:
        raise UsageError("--metrics-json requires --reference")
    if len(inputs) > 1 and (reference or args.metrics_json):
        raise UsageError("--reference applies to a single input")

    out_dir = Path(args.out_dir)
    jobs = []
    for path in inputs:
        target = out_dir if len(inputs) == 1 else out_dir / Path(path).stem
        jobs.append(dict(input_path=path, out_dir=str(target), spec_dict=spec_dict, gray=gray,
                         reference=reference, metrics_json=args.metrics_json))
    workers = max(1, min(args.jobs, thread_cap(), len(jobs)))
    if workers == 1:
        codes = [deblock_one(**j)[0] for j in jobs] if len(jobs) == 1 else [_deblock_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            codes = list(pool.map(_deblock_worker, jobs))
    if EXIT_ERROR in codes:
        return EXIT_ERROR
    return max(codes)


# -- synthesize --------------------------------------------------------------

def cmd_synthesize(args):
    src = Path(args.input)
    clean = io.read_input(src, gray=args.gray)
    offset = tuple(int(v) for v in args.grid_offset.split(","))
    if len(offset) != 2:
        raise UsageError("--grid-offset takes two integers dy,dx")
    t0 = time.perf_counter()
    blocked = synthesize_blocking(clean, args.quality, grid_offset=offset)
    elapsed = time.perf_counter() - t0
    out = Path(args.out)
    if clean.ndim == 4:
        io.write_video(out, blocked)
    else:
        io.write_image8(out, blocked)
    manifest_path = Path(args.manifest) if args.manifest else out.with_name(out.stem + ".manifest.json")
    _write_json(manifest_path, {
        "schema": "layersplit.synthesize/1",
        "version": __version__,
        "input": str(src.resolve()),
        "output": str(out.resolve()),
        "quality": args.quality,
        "grid_offset": list(offset),
        "gray": bool(args.gray),
        "timings": {"synthesize": elapsed},
    })
    return EXIT_OK


# -- sweep -------------------------------------------------------------------

SWEEPABLE = ("alpha", "beta", "gamma")


def cmd_sweep(args):
    values = _float_list(args.values)
    if not values:
        raise UsageError("empty sweep list")
    ref = io.read_input(args.reference, gray=args.gray)
    if args.input:
        c = io.read_input(args.input, gray=args.gray)
    elif args.quality:
        c = synthesize_blocking(ref, args.quality)
    else:
        raise UsageError("give an input or --quality to synthesize one from the reference")
    if c.shape != ref.shape:
        raise UsageError(f"reference shape {ref.shape} does not match input {c.shape}")
    base = _spec_from_args(args)
    rows = []
    for val in values:
        spec = PipelineSpec(base.variant, base.solver.replace(**{args.param: val}), base.denoiser)
        res = run_pipeline(c, spec, reference=ref)
        rows.append({
            args.param: val,
            "ssim": res.metrics.ssim,
            "gc": res.metrics.gc,
            "iterations": res.solve.iterations,
            "final_residual": res.solve.final_residual,
            "converged": res.solve.converged,
        })
        log.info("%s=%g ssim=%.4f gc=%.3e", args.param, val, rows[-1]["ssim"], rows[-1]["gc"])
    base_metrics = evaluate(ref, c)
    summary = {
        "schema": "layersplit.sweep/1",
        "param": args.param,
        "spec": _spec_to_dict(base),
        "input_ssim": base_metrics.ssim,
        "input_gc": base_metrics.gc,
        "rows": rows,
    }
    if args.json:
        _write_json(args.json, summary)
    fields = [args.param, "ssim", "gc", "iterations", "final_residual", "converged"]
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields)
            w.writeheader()
            w.writerows(rows)
    w = csv.DictWriter(sys.stdout, fieldnames=fields)
    w.writeheader()
    w.writerows(rows)
    return EXIT_OK


# -- metrics -----------------------------------------------------------------

def cmd_metrics(args):
    ref = io.read_input(args.reference, gray=args.gray)
    rec = io.read_input(args.recovered, gray=args.gray)
    if ref.shape != rec.shape:
        raise UsageError(f"shape mismatch {ref.shape} vs {rec.shape}")
    report = {"schema": METRICS_SCHEMA, **evaluate(ref, rec).to_dict()}
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.json:
        _write_json(args.json, report)
    print(text)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="layersplit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deblock", help="separate intrinsic and artifact layers")
    p.add_argument("inputs", nargs="*", help="image files or frame directories")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--reference", help="clean image/video for metrics")
    p.add_argument("--metrics-json", help="where to write metrics (needs --reference)")
    p.add_argument("--from-manifest", help="re-run the inputs and settings of a manifest")
    p.add_argument("--jobs", type=int, default=1, help="parallel inputs (capped by LAYERSPLIT_THREADS)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_deblock)

    p = sub.add_parser("synthesize", help="block-DCT compress a clean image or frame directory")
    p.add_argument("input")
    p.add_argument("--quality", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest")
    p.add_argument("--grid-offset", default="0,0", help="block grid shift dy,dx")
    p.add_argument("--gray", action="store_true")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("sweep", help="SSIM/GC as one weight varies")
    p.add_argument("input", nargs="?", help="compressed input (or use --quality)")
    p.add_argument("--reference", required=True)
    p.add_argument("--quality", type=int, help="synthesize the input from the reference")
    p.add_argument("--param", choices=SWEEPABLE, default="alpha")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--csv")
    p.add_argument("--json")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metrics", help="SSIM and GC between two images")
    p.add_argument("reference")
    p.add_argument("recovered")
    p.add_argument("--json")
    p.add_argument("--gray", action="store_true")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"layersplit: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, DivergenceError) as exc:
        print(f"layersplit: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
