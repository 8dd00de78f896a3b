"""Command-line interface.

    massimo analyze <keypoints.json>... --config cfg.json --out dir/
    massimo fit <keypoints.json> --model polynomial --degree 2
    massimo synth --n 20 --deviants 7:40 --seed 1 --out queue.json
    massimo eval --seeds 1..100 --method spring --out eval.csv
    massimo render <keypoints.json> --out dir/

Exit codes: 0 success (warnings allowed), 1 input error, 2 insufficient data.
`MASSIMO_CONFIG` names a default config file; explicit flags override it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import InsufficientQueueError, MassimoError, ParseError, SchemaError
from .ingest import hip_midpoints, order_queue, parse_keypoint_file, serialize_frame
from .pipeline import Config, analyze, run_analysis
from .synth import SceneSpec, evaluate, generate_queue, scene_to_frame

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INSUFFICIENT = 2

EVAL_CSV_HEADER = "seed,n,method,precision,recall,f1,accuracy_paper"


def _load_config(args: argparse.Namespace) -> Config:
    doc: dict = {}
    path = getattr(args, "config", None) or os.environ.get("MASSIMO_CONFIG")
    if path:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    config = Config.from_dict(doc)

    overrides = config.to_dict()
    if getattr(args, "model", None):
        overrides["model"] = {"kind": args.model,
                              "degree": getattr(args, "degree", None),
                              "lambda": getattr(args, "lam", None)}
    else:
        if getattr(args, "degree", None) is not None:
            overrides["model"]["degree"] = args.degree
        if getattr(args, "lam", None) is not None:
            overrides["model"]["lambda"] = args.lam
    if getattr(args, "level", None) is not None:
        overrides["band"]["level"] = args.level
    if getattr(args, "band_mode", None):
        overrides["band"]["mode"] = args.band_mode
    if getattr(args, "k", None) is not None:
        overrides["spring"]["k"] = args.k
    if getattr(args, "direction", None):
        overrides["direction"] = args.direction
    if getattr(args, "alpha", None) is not None:
        overrides["style"]["overlay_alpha"] = args.alpha
    if getattr(args, "conf_threshold", None) is not None:
        overrides["conf_threshold"] = args.conf_threshold
    return Config.from_dict(overrides)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (default: $MASSIMO_CONFIG)")
    parser.add_argument("--model", choices=["linear", "polynomial", "ridge"])
    parser.add_argument("--degree", type=int)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--level", type=float, help="confidence level, default 0.95")
    parser.add_argument("--band-mode", choices=["constant", "prediction"], dest="band_mode")
    parser.add_argument("--k", type=float, help="spring constant")
    parser.add_argument("--direction", choices=["endpoints", "regression"])
    parser.add_argument("--alpha", type=float, help="overlay alpha")
    parser.add_argument("--conf-threshold", dest="conf_threshold", type=float)


def _analyze_one(path: Path, config: Config, out_dir: Path) -> int:
    try:
        report = analyze(path, config, out_dir)
    except (ParseError, SchemaError, FileNotFoundError, MassimoError) as exc:
        if isinstance(exc, InsufficientQueueError):
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_INSUFFICIENT
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    for warning in report.warnings:
        print(f"{path}: warning: {warning}", file=sys.stderr)
    print(f"{path}: report written to {out_dir / 'report.json'}")
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    try:
        config = _load_config(args)
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    inputs = [Path(p) for p in args.inputs]
    if args.validate_only:
        status = EXIT_OK
        for path in inputs:
            try:
                parse_keypoint_file(path.read_bytes())
                print(f"{path}: OK")
            except (ParseError, SchemaError, FileNotFoundError) as exc:
                print(f"{path}: {exc}", file=sys.stderr)
                status = EXIT_INPUT_ERROR
        return status

    out_root = Path(args.out)
    if len(inputs) == 1:
        return _analyze_one(inputs[0], config, out_root)

    # batch mode: one pipeline per worker, nothing shared but the immutable config
    jobs = max(1, args.jobs)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        codes = list(pool.map(
            lambda p: _analyze_one(p, config, out_root / p.stem), inputs
        ))
    if EXIT_INPUT_ERROR in codes:
        return EXIT_INPUT_ERROR
    if EXIT_INSUFFICIENT in codes:
        return EXIT_INSUFFICIENT
    return EXIT_OK


def _cmd_fit(args: argparse.Namespace) -> int:
    try:
        config = _load_config(args)
        raw = Path(args.input).read_bytes()
        frame = parse_keypoint_file(raw)
        points = hip_midpoints(frame, config.conf_threshold)
        if len(points) < max(2, config.model.degree + 1):
            print(f"{args.input}: too few valid people for the fit", file=sys.stderr)
            return EXIT_INSUFFICIENT
        ordered = order_queue(points)
        from .pipeline import _fit_with_swap  # shared swap-retry behavior

        line, _, swapped = _fit_with_swap(ordered, config.model, [])
    except (ParseError, SchemaError, FileNotFoundError, ValueError, MassimoError) as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    doc = {
        "kind": line.spec.kind,
        "degree": line.spec.degree,
        "lambda": line.spec.lam,
        "coefficients": list(line.coefficients),
        "axes_swapped": swapped,
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def _parse_deviants(text: str) -> tuple[tuple[int, float], ...]:
    if not text:
        return ()
    out = []
    for part in text.split(","):
        idx, _, off = part.partition(":")
        out.append((int(idx), float(off)))
    return tuple(out)


def _cmd_synth(args: argparse.Namespace) -> int:
    try:
        if args.spec:
            spec = SceneSpec.from_dict(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        else:
            spec = SceneSpec(
                n_people=args.n,
                base_line=(args.slope, args.intercept),
                spacing=args.spacing,
                noise_sigma=args.noise,
                deviants=_parse_deviants(args.deviants),
                seed=args.seed,
            )
    except (ValueError, KeyError, OSError) as exc:
        print(f"invalid scene: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    points, truth = generate_queue(spec)
    frame = scene_to_frame(points)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(serialize_frame(frame))
    sidecar = out.with_suffix(out.suffix + ".truth.json")
    sidecar.write_text(json.dumps({
        "truth": sorted(truth),
        "scene": spec.to_dict(),
    }, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out} and {sidecar}")
    return EXIT_OK


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        a, _, b = text.partition("..")
        return list(range(int(a), int(b) + 1))
    return [int(text)]


def _cmd_eval(args: argparse.Namespace) -> int:
    try:
        config = _load_config(args)
        seeds = _parse_seeds(args.seeds)
        deviants = _parse_deviants(args.deviants)
    except (ValueError, OSError) as exc:
        print(f"eval setup error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    methods = ["ci", "spring"] if args.method == "both" else [args.method]

    rows = [EVAL_CSV_HEADER]
    records = []
    for seed in seeds:
        spec = SceneSpec(
            n_people=args.n,
            base_line=(args.slope, args.intercept),
            spacing=args.spacing,
            noise_sigma=args.noise,
            deviants=deviants,
            seed=seed,
        )
        points, truth = generate_queue(spec)
        frame = scene_to_frame(points)
        result = run_analysis(frame, config)
        detected_by = {
            "ci": set(result.ci_flags.outlier_ids) if result.ci_flags else set(),
            "spring": set(result.spring_flags.outlier_ids),
        }
        for method in methods:
            ev = evaluate(detected_by[method], truth)
            rows.append(f"{seed},{spec.n_people},{method},{ev.precision!r},"
                        f"{ev.recall!r},{ev.f1!r},{ev.accuracy_paper!r}")
            records.append({"seed": seed, "n": spec.n_people, "method": method,
                            **ev.to_dict()})
    text = "\n".join(rows) + "\n"
    if args.json:
        Path(args.json).write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_render(args: argparse.Namespace) -> int:
    from .pipeline import render_outputs

    try:
        config = _load_config(args)
        raw = Path(args.input).read_bytes()
        warnings: list[str] = []
        frame = parse_keypoint_file(raw, warnings)
        result = run_analysis(frame, config, warnings)
        overlay, topview = render_outputs(result, config.style)
    except InsufficientQueueError as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (ParseError, SchemaError, FileNotFoundError, MassimoError, ValueError) as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    overlay.to_image().save(out / "overlay.png", format="PNG")
    (out / "topview.svg").write_text(topview, encoding="utf-8")
    print(f"wrote {out / 'overlay.png'} and {out / 'topview.svg'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="massimo", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="run the full pipeline on keypoint files")
    p_analyze.add_argument("inputs", nargs="+", metavar="keypoints.json")
    p_analyze.add_argument("--out", default="out", help="output directory")
    p_analyze.add_argument("--jobs", type=int, default=4, help="batch-mode workers")
    p_analyze.add_argument("--validate-only", action="store_true",
                           help="only check the schema; write nothing")
    _add_config_flags(p_analyze)
    p_analyze.set_defaults(func=_cmd_analyze)

    p_fit = sub.add_parser("fit", help="fit the queue line and print it as JSON")
    p_fit.add_argument("input", metavar="keypoints.json")
    _add_config_flags(p_fit)
    p_fit.set_defaults(func=_cmd_fit)

    p_synth = sub.add_parser("synth", help="generate a synthetic keypoint file")
    p_synth.add_argument("--n", type=int, default=20)
    p_synth.add_argument("--slope", type=float, default=0.0)
    p_synth.add_argument("--intercept", type=float, default=300.0)
    p_synth.add_argument("--spacing", type=float, default=60.0)
    p_synth.add_argument("--noise", type=float, default=0.0)
    p_synth.add_argument("--deviants", default="", help="IDX:OFFSET[,IDX:OFFSET...]")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--spec", help="scene spec as a JSON file (overrides the flags)")
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_eval = sub.add_parser("eval", help="score detection methods over seeded scenes")
    p_eval.add_argument("--seeds", default="1..20", help="A..B inclusive, or a single seed")
    p_eval.add_argument("--method", choices=["ci", "spring", "both"], default="both")
    p_eval.add_argument("--n", type=int, default=20)
    p_eval.add_argument("--slope", type=float, default=0.0)
    p_eval.add_argument("--intercept", type=float, default=300.0)
    p_eval.add_argument("--spacing", type=float, default=60.0)
    p_eval.add_argument("--noise", type=float, default=2.0)
    p_eval.add_argument("--deviants", default="10:120")
    p_eval.add_argument("--out", help="CSV path (default: stdout)")
    p_eval.add_argument("--json", help="also write per-seed results as a JSON array")
    _add_config_flags(p_eval)
    p_eval.set_defaults(func=_cmd_eval)

    p_render = sub.add_parser("render", help="write overlay.png and topview.svg only")
    p_render.add_argument("input", metavar="keypoints.json")
    p_render.add_argument("--out", default="out")
    _add_config_flags(p_render)
    p_render.set_defaults(func=_cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
