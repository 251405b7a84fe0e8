"""Run configuration and the end-to-end anonymize / compare / oracle pipelines."""

from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .engine import (
    AnonymizedTable,
    EngineConfig,
    enforce_k,
    generalize_partition,
    propose_clusters,
    systematic_clusters,
)
from .metrics import Partition, total_il_canonical, total_il_legacy
from .oracle import optimal_partition
from .schema import (
    Attribute,
    AttributeRole,
    AttributeSchema,
    Dataset,
    MaskRule,
    SchemaError,
    load_dataset,
    strip_identifiers,
)
from .taxonomy import build_trees

METHODS = ("proposed", "systematic")
IL_VARIANTS = ("canonical", "legacy", "both")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    schema: AttributeSchema
    engine: EngineConfig
    input_path: str = ""
    output_path: str = ""
    metrics_path: str = ""
    method: str = "proposed"
    il_variant: str = "both"
    aggregate_output: bool = True
    min_size: int | None = None
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def k(self) -> int:
        return self.engine.k

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.il_variant not in IL_VARIANTS:
            raise ConfigError(f"il variant must be one of {IL_VARIANTS}, got {self.il_variant!r}")
        unknown = sorted(set(self.engine.always_generalize) - set(self.schema.categorical))
        if unknown:
            raise ConfigError(f"always_generalize names non-categorical attributes: {unknown}")
        if self.engine.primary_sort_attr not in self.schema.numeric:
            raise ConfigError(f"primary_sort_attr {self.engine.primary_sort_attr!r} is not quasi_numeric")

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def _parse_attribute(entry: dict) -> tuple[Attribute, bool]:
    try:
        name = str(entry["name"])
        role = AttributeRole(entry["role"])
    except (KeyError, TypeError):
        raise ConfigError(f"attribute entry needs 'name' and 'role': {entry!r}") from None
    except ValueError:
        raise ConfigError(f"{entry.get('name')}: unknown role {entry.get('role')!r}") from None
    mask = None
    if entry.get("mask") is not None:
        m = entry["mask"]
        suffix_len = int(m.get("suffix_len", 0))
        if suffix_len < 1:
            raise ConfigError(f"{name}: mask suffix_len must be >= 1")
        mask = MaskRule(suffix_len, str(m.get("mask_char", "*")))
    attr = Attribute(name, role, entry.get("taxonomy"), mask)
    return attr, bool(entry.get("always_generalize", False))


def parse_config(data: dict, base_dir: Path | str = ".") -> RunConfig:
    """Build a :class:`RunConfig` from the mapping stored in a YAML config file."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    entries = data.get("attributes")
    if not entries:
        raise ConfigError("config lists no attributes")
    parsed = [_parse_attribute(e) for e in entries]
    try:
        schema = AttributeSchema(tuple(a for a, _ in parsed))
        engine = EngineConfig(
            k=int(data.get("k", 1)),
            primary_sort_attr=data.get("primary_sort_attr") or (schema.numeric or [""])[0],
            merge_small_clusters=bool(data.get("merge_small_clusters", False)),
            always_generalize=frozenset(a.name for a, flag in parsed if flag),
        )
    except SchemaError as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(
        schema=schema,
        engine=engine,
        input_path=data.get("input", ""),
        output_path=data.get("output", ""),
        metrics_path=data.get("metrics", ""),
        method=data.get("method", "proposed"),
        il_variant=data.get("il_variant", "both"),
        aggregate_output=bool(data.get("aggregate_output", True)),
        min_size=data.get("min_size"),
        base_dir=Path(base_dir),
    )
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(data, path.parent)


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Apply command-line overrides; ``None`` leaves a setting as configured."""
    engine_keys = {"k", "merge_small_clusters"}
    engine = replace(cfg.engine, **{k: v for k, v in overrides.items() if k in engine_keys and v is not None})
    rest = {k: v for k, v in overrides.items() if k not in engine_keys and v is not None}
    out = replace(cfg, engine=engine, **rest)
    out.validate()
    return out


@dataclass
class RunMetrics:
    method: str
    k: int
    n_records: int
    n_clusters: int
    cluster_sizes: list
    il_canonical: float | None
    il_legacy: float | None
    runtime_ms: float
    il_reports: list = field(default_factory=list)

    def __post_init__(self):
        if self.n_clusters != len(self.cluster_sizes) or sum(self.cluster_sizes) != self.n_records:
            raise ValueError("cluster sizes inconsistent with record and cluster counts")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "n_records": self.n_records,
            "n_clusters": self.n_clusters,
            "cluster_sizes": self.cluster_sizes,
            "il_canonical": self.il_canonical,
            "il_legacy": self.il_legacy,
            "runtime_ms": self.runtime_ms,
            "il_reports": self.il_reports,
        }


@dataclass
class RunResult:
    partition: Partition
    table: AnonymizedTable
    metrics: RunMetrics


def prepare(cfg: RunConfig, input_path: str | Path | None = None) -> tuple[Dataset, dict]:
    """Load, strip identifiers and read the taxonomies."""
    ds = strip_identifiers(load_dataset(cfg.resolve(input_path or cfg.input_path), cfg.schema))
    trees = build_trees(ds.schema, cfg.base_dir)
    return ds, trees


def cluster(ds: Dataset, cfg: RunConfig, method: str) -> Partition:
    if method == "proposed":
        part = propose_clusters(ds, cfg.engine)
    elif method == "systematic":
        part = systematic_clusters(ds, cfg.engine)
    else:
        raise ConfigError(f"unknown method {method!r}")
    part = enforce_k(part, ds, cfg.engine)
    part.validate(len(ds))
    return part


def run_method(ds: Dataset, trees: dict, cfg: RunConfig, method: str | None = None) -> RunResult:
    method = method or cfg.method
    start = time.perf_counter()
    part = cluster(ds, cfg, method)
    table = generalize_partition(part, ds, cfg.engine, trees)
    runtime_ms = (time.perf_counter() - start) * 1000.0

    reports = []
    il_canonical = il_legacy = None
    if cfg.il_variant in ("canonical", "both"):
        rep = total_il_canonical(part, ds, trees, cfg.engine.always_generalize)
        il_canonical = rep.total
        reports.append(rep.to_dict())
    if cfg.il_variant in ("legacy", "both"):
        rep = total_il_legacy(part, ds, cfg.engine.primary_sort_attr)
        il_legacy = rep.total
        reports.append(rep.to_dict())
    metrics = RunMetrics(
        method=method,
        k=cfg.k,
        n_records=len(ds),
        n_clusters=len(part),
        cluster_sizes=part.sizes,
        il_canonical=il_canonical,
        il_legacy=il_legacy,
        runtime_ms=round(runtime_ms, 3),
        il_reports=reports,
    )
    return RunResult(part, table, metrics)


def _diff(a, b):
    return None if a is None or b is None else a - b


def compare(ds: Dataset, trees: dict, cfg: RunConfig) -> dict:
    """Both methods on the same records, side by side (proposed minus systematic)."""
    prop = run_method(ds, trees, cfg, "proposed").metrics
    syst = run_method(ds, trees, cfg, "systematic").metrics
    ratio = prop.runtime_ms / syst.runtime_ms if syst.runtime_ms > 0 else None
    return {
        "proposed": prop.to_dict(),
        "systematic": syst.to_dict(),
        "deltas": {
            "il_diff_canonical": _diff(prop.il_canonical, syst.il_canonical),
            "il_diff_legacy": _diff(prop.il_legacy, syst.il_legacy),
            "runtime_ratio": ratio,
            "n_clusters": [prop.n_clusters, syst.n_clusters],
        },
    }


def run_oracle(ds: Dataset, trees: dict, cfg: RunConfig, min_size: int | None = None) -> dict:
    min_size = min_size or cfg.min_size or cfg.k
    ag = cfg.engine.always_generalize
    result = optimal_partition(ds, min_size, trees, ag, cfg.engine.primary_sort_attr)
    out = {"n": len(ds), "min_size": min_size, **result.to_dict(), "ratios": {}}
    for method in METHODS:
        try:
            part = cluster(ds, cfg, method)
        except ValueError:
            out["ratios"][method] = None
            continue
        il = total_il_canonical(part, ds, trees, ag).total
        if result.best_il > 0:
            out["ratios"][method] = il / result.best_il
        else:
            out["ratios"][method] = 1.0 if il == 0 else None
    return out


def atomic_write(files: dict):
    """Write every ``path -> text`` pair or none of them."""
    staged = []
    try:
        for path, text in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"
