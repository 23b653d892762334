"""Command-line front end wiring the analysis stages into one pipeline.

Subcommands mirror the stages: `static`, `dynamic`, `merge`, `compare`,
`export`, `layout`, plus `run` which chains them all and writes a
`timing.json` report. `run` isolates stage failures: a broken stage is
recorded as failed, downstream stages continue on whatever model survived,
and the exit code distinguishes full success (0), total failure (1), and
partial success (3). Usage and configuration problems exit with 2.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from archlens.config import PipelineConfig, load_config
from archlens.errors import (
    ConfigError,
    DotParseError,
    ModelFormatError,
    ModelValidationError,
    TraceFormatError,
)
from archlens.export import (
    DOT_MODES,
    EXPORT_FORMATS,
    export_model,
    from_json,
    to_dot,
    to_graphml,
    to_json,
)
from archlens.grouped import build_grouped_graph
from archlens.layout import layout
from archlens.merging import compare_models, merge_models, normalize_model
from archlens.model import ArchitectureModel, model_validate
from archlens.report import RunReport
from archlens.static_analysis import build_static_model, export_entity_csv
from archlens.svg_render import render_svg
from archlens.traces import ingest_trace_logs

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3

STAGE_NAMES = ("static", "ingest", "merge", "export", "layout")


def _model_elements(m: ArchitectureModel) -> int:
    return (
        len(m.components)
        + len(m.operations)
        + len(m.call_edges)
        + len(m.dataflow_edges)
    )


def _write(path: Path, text: str, verbose: bool = False) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    if verbose:
        print(f"wrote {path}", file=sys.stderr)


def _load_model(path: Path, validate: bool = True) -> ArchitectureModel:
    return from_json(Path(path).read_text(encoding="utf-8"), validate=validate)


def _validated(m: ArchitectureModel) -> ArchitectureModel:
    violations = model_validate(m)
    if violations:
        raise ModelValidationError(violations)
    return m


# ---------------------------------------------------------------- config

def _effective_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if getattr(args, "project_root", None) is not None:
        cfg.project_root = args.project_root
    if getattr(args, "include", None):
        cfg.include = list(args.include)
    if getattr(args, "exclude", None):
        cfg.exclude = list(args.exclude)
    if getattr(args, "trace_log", None):
        cfg.trace_logs = list(args.trace_log)
    if args.out_dir is not None:
        cfg.output_dir = args.out_dir
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("jobs must be a positive integer")
        cfg.jobs = args.jobs
    if args.seed is not None:
        cfg.layout_params = replace(cfg.layout_params, rng_seed=args.seed)

    export_changes = {}
    if getattr(args, "format", None) is not None:
        export_changes["format"] = args.format
    if getattr(args, "dot_mode", None) is not None:
        export_changes["dot_mode"] = args.dot_mode
    if getattr(args, "no_dataflow", False):
        export_changes["include_dataflow"] = False
    if getattr(args, "no_weights", False):
        export_changes["include_weights"] = False
    if export_changes:
        cfg.export_options = replace(cfg.export_options, **export_changes)
    return cfg


# ---------------------------------------------------------------- commands

def cmd_static(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if cfg.project_root is None:
        raise ConfigError("static analysis needs project_root (--project-root)")
    report = RunReport()
    model = build_static_model(
        cfg.project_root, cfg.include, cfg.exclude, report, jobs=cfg.jobs
    )
    out = cfg.output_dir
    _write(out / "static_model.json", to_json(model), args.verbose)
    export_entity_csv(model, out)
    _write(out / "static_report.json", report.to_json_text(), args.verbose)
    print(
        f"static: {len(model.components)} components, "
        f"{len(model.operations)} operations -> {out / 'static_model.json'}"
    )
    return EXIT_OK


def cmd_dynamic(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if not cfg.trace_logs:
        raise ConfigError("trace ingestion needs trace_logs (--trace-log)")
    report = RunReport()
    model = ingest_trace_logs(cfg.trace_logs, report)
    out = cfg.output_dir
    _write(out / "dynamic_model.json", to_json(model), args.verbose)
    _write(out / "dynamic_report.json", report.to_json_text(), args.verbose)
    print(
        f"dynamic: {len(model.operations)} operations from "
        f"{len(cfg.trace_logs)} log(s) -> {out / 'dynamic_model.json'}"
    )
    return EXIT_OK


def cmd_merge(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    report = RunReport()
    inputs = [
        normalize_model(_load_model(path), cfg.name_rules, report)
        for path in args.models
    ]
    merged = merge_models(inputs[0], inputs[1])
    out = cfg.output_dir
    _write(out / "merged_model.json", to_json(merged), args.verbose)
    _write(out / "merge_report.json", report.to_json_text(), args.verbose)
    print(
        f"merge: {_model_elements(merged)} elements -> "
        f"{out / 'merged_model.json'}"
    )
    return EXIT_OK


def _diff_payload(diff) -> dict:
    def edge_text(e) -> str:
        if hasattr(e, "caller"):
            return f"{e.caller.text} -> {e.callee.text}"
        return f"{e.source.text} -> {e.target.text} ({e.kind.value})"

    def section(sec, describe) -> dict:
        return {
            "only_in_a": sorted(describe(row) for row in sec.only_in_a),
            "only_in_b": sorted(describe(row) for row in sec.only_in_b),
            "in_both": len(sec.in_both),
        }

    return {
        "components": section(diff.components, lambda c: c.name.text),
        "operations": section(diff.operations, lambda o: o.signature.text),
        "call_edges": section(diff.call_edges, edge_text),
        "dataflow_edges": section(diff.dataflow_edges, edge_text),
    }


def cmd_compare(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    a = _load_model(args.models[0])
    b = _load_model(args.models[1])
    payload = _diff_payload(compare_models(a, b))
    out = cfg.output_dir
    _write(
        out / "compare.json",
        json.dumps(payload, indent=2, sort_keys=True) + "\n",
        args.verbose,
    )
    moved = sum(
        len(payload[k]["only_in_a"]) + len(payload[k]["only_in_b"])
        for k in payload
    )
    print(f"compare: {moved} differing elements -> {out / 'compare.json'}")
    return EXIT_OK


def cmd_export(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    model = _load_model(args.model)
    options = cfg.export_options
    dest = cfg.output_dir / (Path(args.model).stem + options.suffix)
    _write(dest, export_model(model, options), args.verbose)
    print(f"export: {options.format} -> {dest}")
    return EXIT_OK


def cmd_layout(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    model = _load_model(args.model)
    g = build_grouped_graph(
        model, include_dataflow=cfg.export_options.include_dataflow
    )
    result = layout(g, cfg.layout_params, jobs=cfg.jobs)
    dest = cfg.output_dir / (Path(args.model).stem + ".svg")
    _write(dest, render_svg(g, result), args.verbose)
    print(
        f"layout: {g.leaf_count()} nodes in {g.group_count()} groups -> {dest}"
    )
    return EXIT_OK


# ---------------------------------------------------------------- run

class _StageSkipped(Exception):
    """Raised inside a stage runner when the stage has nothing to do."""


def _run_stage(timing: dict, name: str, runner, verbose: bool):
    start = time.perf_counter()
    try:
        value, elements = runner()
    except _StageSkipped:
        timing[name] = {"seconds": 0.0, "status": "skipped", "elements": 0}
        if verbose:
            print(f"{name}: skipped", file=sys.stderr)
        return None
    except Exception as exc:
        # Stage isolation is the point: downstream stages continue on
        # whatever earlier stages produced.
        timing[name] = {
            "seconds": time.perf_counter() - start,
            "status": "failed",
            "elements": 0,
        }
        print(f"archlens: {name} stage failed: {exc}", file=sys.stderr)
        return None
    timing[name] = {
        "seconds": time.perf_counter() - start,
        "status": "ok",
        "elements": elements,
    }
    if verbose:
        print(
            f"{name}: ok ({timing[name]['seconds']:.2f}s, {elements} elements)",
            file=sys.stderr,
        )
    return value


def cmd_run(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if args.static_model is None and args.dynamic_model is None:
        cfg.require_inputs()
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    timing: dict[str, dict] = {}
    total_start = time.perf_counter()
    # Models that later stages may consume; a stage that fails leaves its
    # slot as None rather than aborting the pipeline.
    survivors: dict[str, ArchitectureModel | None] = {
        "static": None,
        "dynamic": None,
        "merged": None,
    }

    def run_static():
        if cfg.project_root is None or args.static_model is not None:
            raise _StageSkipped
        report = RunReport()
        model = build_static_model(
            cfg.project_root, cfg.include, cfg.exclude, report, jobs=cfg.jobs
        )
        _write(out / "static_model.json", to_json(model), args.verbose)
        export_entity_csv(model, out)
        _write(out / "static_report.json", report.to_json_text(), args.verbose)
        survivors["static"] = model
        return model, _model_elements(model)

    def run_ingest():
        if not cfg.trace_logs or args.dynamic_model is not None:
            raise _StageSkipped
        report = RunReport()
        model = ingest_trace_logs(cfg.trace_logs, report)
        _write(out / "dynamic_model.json", to_json(model), args.verbose)
        _write(out / "dynamic_report.json", report.to_json_text(), args.verbose)
        survivors["dynamic"] = model
        return model, _model_elements(model)

    def acquire(side: str, spliced: Path | None) -> ArchitectureModel | None:
        # Spliced models bypass analysis but not validation: the merge
        # stage owns rejecting broken inputs.
        if spliced is None:
            return survivors[side]
        model = _validated(_load_model(spliced, validate=False))
        survivors[side] = model
        return model

    def run_merge():
        a = acquire("static", args.static_model)
        b = acquire("dynamic", args.dynamic_model)
        if a is None or b is None:
            raise _StageSkipped  # fewer than two models: nothing to merge
        report = RunReport()
        merged = merge_models(
            normalize_model(_validated(a), cfg.name_rules, report),
            normalize_model(_validated(b), cfg.name_rules, report),
        )
        _write(out / "merged_model.json", to_json(merged), args.verbose)
        _write(out / "merge_report.json", report.to_json_text(), args.verbose)
        survivors["merged"] = merged
        return merged, _model_elements(merged)

    def best_model() -> ArchitectureModel | None:
        return survivors["merged"] or survivors["static"] or survivors["dynamic"]

    def run_export():
        model = best_model()
        if model is None:
            raise _StageSkipped
        options = cfg.export_options
        _write(
            out / "merged.dot",
            to_dot(
                model,
                grouped=options.dot_mode == "grouped",
                include_dataflow=options.include_dataflow,
                include_weights=options.include_weights,
            ),
            args.verbose,
        )
        _write(out / "merged.graphml", to_graphml(model), args.verbose)
        return model, 2

    def run_layout():
        model = best_model()
        if model is None:
            raise _StageSkipped
        g = build_grouped_graph(
            model, include_dataflow=cfg.export_options.include_dataflow
        )
        result = layout(g, cfg.layout_params, jobs=cfg.jobs)
        _write(out / "merged.svg", render_svg(g, result), args.verbose)
        return model, g.group_count() + g.leaf_count()

    _run_stage(timing, "static", run_static, args.verbose)
    _run_stage(timing, "ingest", run_ingest, args.verbose)
    _run_stage(timing, "merge", run_merge, args.verbose)
    _run_stage(timing, "export", run_export, args.verbose)
    _run_stage(timing, "layout", run_layout, args.verbose)

    statuses = [timing[name]["status"] for name in STAGE_NAMES]
    if "failed" not in statuses:
        total_status, code = "ok", EXIT_OK
    elif any(timing[name]["status"] == "ok" for name in ("export", "layout")):
        total_status, code = "partial", EXIT_PARTIAL
    else:
        total_status, code = "failed", EXIT_FAILURE
    timing["total"] = {
        "seconds": time.perf_counter() - total_start,
        "status": total_status,
        "elements": sum(timing[name]["elements"] for name in STAGE_NAMES),
    }
    _write(
        out / "timing.json",
        json.dumps(timing, indent=2, sort_keys=True) + "\n",
        args.verbose,
    )
    print(f"run: {total_status} -> {out}")
    return code


# ---------------------------------------------------------------- parser

def _add_export_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=EXPORT_FORMATS)
    parser.add_argument("--dot-mode", choices=DOT_MODES)
    parser.add_argument("--no-dataflow", action="store_true")
    parser.add_argument("--no-weights", action="store_true")


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, metavar="FILE")
    shared.add_argument("--out-dir", type=Path, metavar="DIR")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--jobs", type=int)
    shared.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="archlens",
        description="Recover and draw the architecture of Python codebases.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser(
        "static", parents=[shared], help="extract a model from source code"
    )
    p.add_argument("--project-root", type=Path, metavar="DIR")
    p.add_argument("--include", action="append", metavar="GLOB")
    p.add_argument("--exclude", action="append", metavar="GLOB")
    p.set_defaults(handler=cmd_static)

    p = sub.add_parser(
        "dynamic", parents=[shared], help="build a model from trace logs"
    )
    p.add_argument("--trace-log", action="append", type=Path, metavar="FILE")
    p.set_defaults(handler=cmd_dynamic)

    p = sub.add_parser("merge", parents=[shared], help="merge two models")
    p.add_argument("models", nargs=2, type=Path, metavar="MODEL")
    p.set_defaults(handler=cmd_merge)

    p = sub.add_parser("compare", parents=[shared], help="diff two models")
    p.add_argument("models", nargs=2, type=Path, metavar="MODEL")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser(
        "export", parents=[shared], help="write a model as JSON, DOT, or GraphML"
    )
    p.add_argument("model", type=Path, metavar="MODEL")
    _add_export_flags(p)
    p.set_defaults(handler=cmd_export)

    p = sub.add_parser(
        "layout", parents=[shared], help="draw a model as an SVG diagram"
    )
    p.add_argument("model", type=Path, metavar="MODEL")
    p.add_argument("--no-dataflow", action="store_true")
    p.set_defaults(handler=cmd_layout)

    p = sub.add_parser(
        "run", parents=[shared], help="run the whole pipeline end to end"
    )
    p.add_argument("--project-root", type=Path, metavar="DIR")
    p.add_argument("--include", action="append", metavar="GLOB")
    p.add_argument("--exclude", action="append", metavar="GLOB")
    p.add_argument("--trace-log", action="append", type=Path, metavar="FILE")
    p.add_argument("--static-model", type=Path, metavar="FILE")
    p.add_argument("--dynamic-model", type=Path, metavar="FILE")
    _add_export_flags(p)
    p.set_defaults(handler=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _effective_config(args)
        return args.handler(args, cfg)
    except ConfigError as exc:
        print(f"archlens: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"archlens: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        TraceFormatError,
        ModelFormatError,
        ModelValidationError,
        DotParseError,
    ) as exc:
        print(f"archlens: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"archlens: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
