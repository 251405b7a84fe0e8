"""Command-line front end: ``sacluster {anonymize,compare,oracle,validate}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import runner
from .engine import InfeasibleError, read_anonymized_csv, verify_k_anonymity
from .runner import ConfigError
from .schema import DataError, SchemaError, load_dataset, strip_identifiers
from .taxonomy import TaxonomyError, TaxonomyTree, build_trees

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INFEASIBLE = 4


class StageError(Exception):
    def __init__(self, stage: str, exc: Exception, code: int):
        super().__init__(f"{stage}: {exc}")
        self.stage, self.error, self.code = stage, exc, code


def _stage(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except InfeasibleError as exc:
        raise StageError(stage, exc, EXIT_INFEASIBLE) from exc
    except (ConfigError, SchemaError) as exc:
        code = EXIT_CONFIG if stage == "config" else EXIT_DATA
        raise StageError(stage, exc, code) from exc
    except (DataError, TaxonomyError, OSError, KeyError) as exc:
        raise StageError(stage, exc, EXIT_DATA) from exc


def _cli_path(value):
    # command-line paths are relative to the working directory, config paths to the config file
    return str(Path(value).resolve()) if value else None


def _config(args) -> runner.RunConfig:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = runner.load_config(args.config)
    return runner.with_overrides(
        cfg,
        input_path=_cli_path(args.input),
        output_path=_cli_path(getattr(args, "output", None)),
        metrics_path=_cli_path(args.metrics),
        method=getattr(args, "method", None),
        il_variant=args.il,
        k=args.k,
        aggregate_output=getattr(args, "aggregate", None),
        merge_small_clusters=True if args.merge_small else None,
        min_size=getattr(args, "min_size", None),
    )


def _check_taxonomy_values(ds, trees):
    for name, tree in trees.items():
        if isinstance(tree, TaxonomyTree):
            unknown = sorted(set(ds.column(name)) - tree.leaves)
            if unknown:
                raise TaxonomyError(f"{name}: values not leaves of the taxonomy: {unknown[:5]}")


def _load(cfg):
    if not cfg.input_path:
        raise StageError("config", ConfigError("no input path given"), EXIT_CONFIG)
    ds = strip_identifiers(_stage("load", load_dataset, cfg.resolve(cfg.input_path), cfg.schema))
    trees = _stage("taxonomy", build_trees, ds.schema, cfg.base_dir)
    _stage("taxonomy", _check_taxonomy_values, ds, trees)
    return ds, trees


def _emit(path: str | None, cfg, text: str):
    if path:
        _stage("write", runner.atomic_write, {cfg.resolve(path): text})
    else:
        sys.stdout.write(text)


def cmd_anonymize(args) -> int:
    cfg = _stage("config", _config, args)
    if not cfg.output_path:
        raise StageError("config", ConfigError("no output path given"), EXIT_CONFIG)
    ds, trees = _load(cfg)
    result = _stage("cluster", runner.run_method, ds, trees, cfg)
    files = {cfg.resolve(cfg.output_path): result.table.to_csv(cfg.aggregate_output)}
    if cfg.metrics_path:
        files[cfg.resolve(cfg.metrics_path)] = runner.dump_json(result.metrics.to_dict())
    _stage("write", runner.atomic_write, files)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _stage("config", _config, args)
    ds, trees = _load(cfg)
    report = _stage("cluster", runner.compare, ds, trees, cfg)
    _emit(cfg.metrics_path, cfg, runner.dump_json(report))
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _stage("config", _config, args)
    ds, trees = _load(cfg)
    report = _stage("cluster", runner.run_oracle, ds, trees, cfg)
    _emit(cfg.metrics_path, cfg, runner.dump_json(report))
    return EXIT_OK


def cmd_validate(args) -> int:
    sensitive = args.sensitive
    k = args.k
    base = None
    if args.config:
        cfg = _stage("config", runner.load_config, args.config)
        sensitive = sensitive or cfg.schema.sensitive
        k = k or cfg.k
        base = cfg
    if not sensitive or not args.input:
        raise StageError("config", ConfigError("validate needs --input and --sensitive (or --config)"), EXIT_CONFIG)
    path = base.resolve(args.input) if base else args.input
    table = _stage("load", read_anonymized_csv, path, sensitive)
    k = k or 1
    violations = verify_k_anonymity(table, k)
    report = {
        "k": k,
        "n_records": table.source_n,
        "k_anonymous": not violations,
        "violations": [
            {"quasi_identifier": dict(zip(table.columns, v.quasi_identifier)), "count": v.count}
            for v in violations
        ],
    }
    sys.stdout.write(runner.dump_json(report))
    return EXIT_OK if not violations else EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sacluster", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, outputs=True):
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--input", help="input CSV (overrides config)")
        p.add_argument("--k", type=int, help="anonymity parameter")
        if outputs:
            p.add_argument("--metrics", help="metrics/report JSON path (stdout when omitted)")
            p.add_argument("--il", choices=runner.IL_VARIANTS, help="information-loss variant(s)")
            p.add_argument("--merge-small", action="store_true", help="merge clusters smaller than k")

    p = sub.add_parser("anonymize", help="cluster and generalize a table")
    common(p)
    p.add_argument("--output", help="anonymized CSV path")
    p.add_argument("--method", choices=runner.METHODS)
    p.add_argument("--aggregate", action=argparse.BooleanOptionalAction, default=None,
                   help="one row per equivalence class with a Count column (default) or one row per record")
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser("compare", help="run both methods and report side by side")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exhaustive optimum for tiny tables (n <= 12)")
    common(p)
    p.add_argument("--min-size", type=int, help="minimum block size (default: k)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("validate", help="check an anonymized CSV for k-anonymity")
    common(p, outputs=False)
    p.add_argument("--sensitive", help="name of the sensitive column")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"sacluster: error [{exc.stage}]: {exc.error}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
