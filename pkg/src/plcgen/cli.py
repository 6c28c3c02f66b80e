"""Command-line entry point.

Exit codes: 0 success (or run accepted), 1 domain failure (a check failed,
a run was rejected), 2 usage or configuration error, 3 environment error
(missing tool binary, unreachable backend). Machine-readable output goes to
stdout only when --json is given; errors are single lines on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import DEFAULT_SEED
from .dataset_tools import (
    DatasetError,
    DatasetRecord,
    SplitManifest,
    cull,
    derive,
    export_finetune,
    split,
)
from .gateway import AuthError, NetworkExhaustedError
from .metrics import (
    MetricsError,
    RunMetrics,
    compare_configs,
    load_expert_scores,
)
from .pipeline import (
    PipelineConfig,
    PipelineError,
    default_run_id,
    run_batch,
    run_pipeline,
)
from .st.checker import check
from .st.diagnostics import format_diagnostic
from .verifier import BinaryNotFoundError

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_ENVIRONMENT = 3


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _progress(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _guard_output_dir(path: Path, force: bool) -> bool:
    """Refuse to reuse a non-empty output directory unless forced."""
    if force or not path.exists():
        return True
    if path.is_dir() and not any(path.iterdir()):
        return True
    _err(f"output directory {path} is not empty; pass --force to overwrite")
    return False


# -- check ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    reports = []
    for name in args.files:
        try:
            text = _read_text(name)
        except OSError as exc:
            _err(str(exc))
            return EXIT_USAGE
        reports.append(check(text, file_id=name))
    if args.json:
        payload = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
        print(json.dumps(payload, indent=2))
    else:
        for report in reports:
            for diagnostic in report.diagnostics:
                print(f"{report.file_id}: {format_diagnostic(diagnostic)}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_DOMAIN


# -- dataset -------------------------------------------------------------------------


def cmd_dataset_cull(args) -> int:
    kept, rejected = cull(args.corpus)
    if args.json:
        print(json.dumps({"kept": kept, "rejected": [list(r) for r in rejected]}, indent=2))
    else:
        _progress(args, f"kept {len(kept)} of {len(kept) + len(rejected)} files")
        for file_id, diagnostic in rejected:
            print(f"{file_id}: {diagnostic}")
    return EXIT_OK


def cmd_dataset_split(args) -> int:
    kept, _ = cull(args.corpus)
    manifest = split(
        kept,
        args.ratio,
        args.seed,
        test_count=args.test_count,
        corpus_id=Path(args.corpus).name,
    )
    if args.out:
        manifest.save(args.out)
        _progress(args, f"wrote {args.out}")
    if args.json:
        print(json.dumps(manifest.to_dict(), indent=2, sort_keys=True))
    else:
        _progress(args, f"train {manifest.counts['train']} / test {manifest.counts['test']}")
    return EXIT_OK


def cmd_dataset_derive(args) -> int:
    out = Path(args.out)
    if not _guard_output_dir(out, args.force):
        return EXIT_USAGE
    result = derive(
        args.corpus, out, args.seed, ratio=args.ratio, test_count=args.test_count
    )
    summary = {
        "records": len(result.records),
        "skipped": [list(s) for s in result.skipped],
        "rejected": [list(r) for r in result.rejections],
        "counts": result.manifest.counts,
    }
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        _progress(
            args,
            f"derived {summary['records']} records "
            f"(train {result.manifest.counts['train']} / test {result.manifest.counts['test']}, "
            f"{len(result.skipped)} skipped)",
        )
    return EXIT_OK


def cmd_dataset_export(args) -> int:
    dataset = Path(args.dataset)
    manifest = SplitManifest.load(dataset / "manifest.json")
    record_dir = dataset / "records" / args.kind
    if not record_dir.is_dir():
        raise DatasetError(f"no {args.kind} records under {dataset}")
    records = [
        DatasetRecord.from_dict(json.loads(p.read_text(encoding="utf-8")))
        for p in sorted(record_dir.glob("*.json"))
    ]
    side = set(manifest.train_ids if args.split == "train" else manifest.test_ids)
    records = [r for r in records if r.source_id in side]
    export_finetune(records, manifest, args.out)
    _progress(args, f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


# -- run and batch ---------------------------------------------------------------------


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    if getattr(args, "shot_mode", None):
        overrides["shot_mode"] = args.shot_mode
    if overrides:
        config = dataclasses.replace(config, **overrides)
        config.validate()
    return config


def _gate_usable(config: PipelineConfig) -> bool:
    if config.human_gate != "off" and not sys.stdin.isatty():
        _err(
            "human_gate is enabled but stdin is not a terminal; "
            "set human_gate to 'off' for unattended runs"
        )
        return False
    return True


def _run_exit_code(status: str) -> int:
    if status == "accepted":
        return EXIT_OK
    if status == "backend_failure":
        return EXIT_ENVIRONMENT
    return EXIT_DOMAIN


def cmd_run(args) -> int:
    config = _load_config(args)
    if not _gate_usable(config):
        return EXIT_USAGE
    spec = _read_text(args.spec)
    if config.output_dir:
        run_dir = Path(config.output_dir) / default_run_id(spec, config.seed)
        if not _guard_output_dir(run_dir, args.force):
            return EXIT_USAGE
    run = run_pipeline(spec, config)
    if args.json:
        payload = run.to_dict()
        payload["config"] = config.to_dict()
        print(json.dumps(payload, indent=2))
    else:
        _progress(args, f"run {run.run_id}: {run.status}")
        if run.error:
            _err(run.error)
    return _run_exit_code(run.status)


def cmd_batch(args) -> int:
    config = _load_config(args)
    if not _gate_usable(config):
        return EXIT_USAGE
    spec_dir = Path(args.specs)
    spec_files = sorted(spec_dir.glob("*.txt"))
    if not spec_files:
        _err(f"no .txt specification files in {spec_dir}")
        return EXIT_USAGE
    out = Path(config.output_dir) if config.output_dir else None
    if out is not None and not _guard_output_dir(out, args.force):
        return EXIT_USAGE
    specs = [(p.stem, p.read_text(encoding="utf-8")) for p in spec_files]
    runs, metrics = run_batch(specs, config, jobs=args.jobs, label=args.label)
    for run in runs:
        _progress(args, f"{run.run_id}: {run.status}")
    report = compare_configs([metrics])
    if out is not None:
        (out / "metrics.json").write_text(
            json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        (out / "metrics.csv").write_text(report.to_csv(), encoding="utf-8")
    if args.json:
        print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    else:
        print(report.text())
    return EXIT_OK


# -- report ------------------------------------------------------------------------------


def cmd_report(args) -> int:
    rows = []
    for name in args.metrics:
        rows.append(RunMetrics.from_dict(json.loads(_read_text(name))))
    scores = load_expert_scores(args.scores) if args.scores else None
    report = compare_configs(rows, expert_scores=scores)
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
        _progress(args, f"wrote {args.csv}")
    if args.json:
        print(report.to_json(), end="")
    else:
        print(report.text())
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plcgen",
        description="Generate, check, and verify IEC 61131-3 Structured Text with "
        "an iterative LLM pipeline.",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run the syntax and scope checker over files")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    dataset = sub.add_parser("dataset", help="corpus curation and training data")
    dsub = dataset.add_subparsers(dest="dataset_command", required=True)

    p = dsub.add_parser("cull", help="keep only files that pass the checker")
    p.add_argument("corpus")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dataset_cull)

    p = dsub.add_parser("split", help="deterministic train/test split")
    p.add_argument("corpus")
    p.add_argument("--ratio", type=float, default=0.95)
    p.add_argument("--test-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("-o", "--out", default="")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dataset_split)

    p = dsub.add_parser("derive", help="build all record kinds and exports")
    p.add_argument("corpus")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--ratio", type=float, default=0.95)
    p.add_argument("--test-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--force", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dataset_derive)

    p = dsub.add_parser("export", help="write fine-tuning pairs from a derived dataset")
    p.add_argument("dataset")
    p.add_argument("--kind", choices=("completion", "fixing"), required=True)
    p.add_argument("--split", choices=("train", "test"), default="train")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_dataset_export)

    p = sub.add_parser("run", help="run the pipeline on one specification")
    p.add_argument("--spec", required=True, help="text file with the specification")
    p.add_argument("--config", required=True, help="pipeline config JSON")
    p.add_argument("-o", "--out", default="", help="override the output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--shot-mode", choices=("zero_shot", "one_shot"), default=None)
    p.add_argument("--force", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="run every spec in a directory and aggregate")
    p.add_argument("--specs", required=True, help="directory of .txt specifications")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--out", default="")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--shot-mode", choices=("zero_shot", "one_shot"), default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--label", default="")
    p.add_argument("--force", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("report", help="compare metrics files side by side")
    p.add_argument("--metrics", nargs="+", required=True, metavar="FILE")
    p.add_argument("--scores", default="", help="expert score JSON file")
    p.add_argument("--csv", default="", help="also write the table as CSV")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (PipelineError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except BinaryNotFoundError as exc:
        _err(str(exc))
        return EXIT_ENVIRONMENT
    except (AuthError, NetworkExhaustedError) as exc:
        _err(str(exc))
        return EXIT_ENVIRONMENT
    except (DatasetError, MetricsError) as exc:
        _err(str(exc))
        return EXIT_DOMAIN
    except OSError as exc:
        _err(str(exc))
        return EXIT_ENVIRONMENT


if __name__ == "__main__":
    sys.exit(main())
