"""Partition builders and the generalized release table.

Two partitioners are provided. :func:`propose_clusters` sorts on the primary
numeric attribute and forms one cluster per distinct sensitive value.
:func:`systematic_clusters` cuts the sorted records into consecutive blocks of
at least ``k``.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field

from .metrics import Cluster, Partition, make_cluster, order_clusters
from .schema import AttributeRole, DataError, Dataset, SchemaError, Source, _read_text, sort_view


class InfeasibleError(ValueError):
    """Raised when a size constraint cannot be met by the available records."""


@dataclass(frozen=True)
class EngineConfig:
    k: int
    primary_sort_attr: str
    merge_small_clusters: bool = False
    always_generalize: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.k < 1:
            raise SchemaError("k must be at least 1")
        object.__setattr__(self, "always_generalize", frozenset(self.always_generalize))

    def check(self, ds: Dataset):
        attr = self.primary_sort_attr
        if attr not in ds.schema or ds.schema[attr].role is not AttributeRole.QUASI_NUMERIC:
            raise SchemaError(f"primary sort attribute {attr!r} must be quasi_numeric")


def propose_clusters(ds: Dataset, cfg: EngineConfig) -> Partition:
    """One cluster per distinct sensitive value, built over the sorted records."""
    if len(ds) == 0:
        raise DataError("empty dataset")
    cfg.check(ds)
    if ds.schema.with_role(AttributeRole.IDENTIFIER):
        raise SchemaError("strip identifiers before clustering")
    sensitive = ds.schema.sensitive
    groups: dict[str, list[int]] = {}
    for rid in sort_view(ds, cfg.primary_sort_attr):
        groups.setdefault(ds.records[rid].values[sensitive], []).append(rid)
    # insertion order of groups already follows ascending cluster minimum
    return Partition([make_cluster(ds, members) for members in groups.values()])


def systematic_clusters(ds: Dataset, cfg: EngineConfig) -> Partition:
    """Consecutive blocks of the sorted records, each holding at least ``k``.

    There are ``n // k`` blocks and the ``n % k`` leftover records are dealt one
    at a time to the leading blocks.
    """
    cfg.check(ds)
    n, k = len(ds), cfg.k
    if n < k:
        raise InfeasibleError(f"{n} records cannot form a cluster of size {k}")
    order = sort_view(ds, cfg.primary_sort_attr)
    n_groups = n // k
    extra = n - n_groups * k
    sizes = [k + extra // n_groups + (1 if i < extra % n_groups else 0) for i in range(n_groups)]
    clusters, start = [], 0
    for size in sizes:
        clusters.append(make_cluster(ds, order[start:start + size]))
        start += size
    return Partition(clusters)


def _mean(ds: Dataset, c: Cluster, attr: str) -> float:
    return sum(ds.records[rid].values[attr] for rid in c.members) / c.size


def enforce_k(p: Partition, ds: Dataset, cfg: EngineConfig) -> Partition:
    """Merge undersized clusters into their nearest neighbour by primary-attribute mean.

    Returns ``p`` untouched unless ``cfg.merge_small_clusters`` is set.
    """
    total = sum(c.size for c in p.clusters)
    if total < cfg.k:
        raise InfeasibleError(f"{total} records cannot satisfy k={cfg.k}")
    if not cfg.merge_small_clusters:
        return p
    attr = cfg.primary_sort_attr
    clusters = list(p.clusters)
    means = [_mean(ds, c, attr) for c in clusters]
    while True:
        small = [i for i, c in enumerate(clusters) if c.size < cfg.k]
        if not small:
            break
        src = min(small, key=lambda i: (clusters[i].size, i))
        dst = min(
            (i for i in range(len(clusters)) if i != src),
            key=lambda i: (abs(means[i] - means[src]), means[i], i),
        )
        merged = make_cluster(ds, clusters[dst].members + clusters[src].members)
        clusters[dst] = merged
        means[dst] = _mean(ds, merged, attr)
        del clusters[src], means[src]
    return order_clusters(clusters, attr)


def format_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def format_interval(lo: float, hi: float) -> str:
    if lo == hi:
        return format_number(lo)
    return f"{format_number(lo)} - {format_number(hi)}"


@dataclass(frozen=True)
class AnonymizedRow:
    generalized_values: dict
    sensitive_value: str
    count: int

    def key(self, columns) -> tuple:
        return tuple(self.generalized_values[c] for c in columns)


@dataclass(frozen=True)
class AnonymizedTable:
    """Release table. ``rows`` is the aggregated form; ``record_rows`` has one
    entry per source record in record-id order."""

    rows: tuple[AnonymizedRow, ...]
    k_declared: int
    source_n: int
    columns: tuple[str, ...]
    sensitive: str
    record_rows: tuple[AnonymizedRow, ...] = ()

    def __post_init__(self):
        if sum(r.count for r in self.rows) != self.source_n:
            raise ValueError("row counts do not add up to the source size")

    def to_csv(self, aggregate: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = [*self.columns, self.sensitive]
        if aggregate:
            writer.writerow([*header, "Count"])
            for row in self.rows:
                writer.writerow([*row.key(self.columns), row.sensitive_value, row.count])
        else:
            writer.writerow(header)
            for row in self.record_rows:
                for _ in range(row.count):
                    writer.writerow([*row.key(self.columns), row.sensitive_value])
        return buf.getvalue()


def generalize_cluster(c: Cluster, ds: Dataset, cfg: EngineConfig, trees: dict) -> dict:
    out = {}
    for name in ds.schema.quasi_identifiers:
        if name in c.numeric_ranges:
            out[name] = format_interval(*c.numeric_ranges[name])
        else:
            out[name] = trees[name].generalize(
                c.categorical_unions[name], name in cfg.always_generalize
            )
    return out


def generalize_partition(p: Partition, ds: Dataset, cfg: EngineConfig, trees: dict) -> AnonymizedTable:
    columns = tuple(ds.schema.quasi_identifiers)
    sensitive = ds.schema.sensitive
    counts: dict[tuple, int] = {}
    labels: dict[tuple, dict] = {}
    per_record: list = [None] * len(ds)
    for c in p.clusters:
        gen = generalize_cluster(c, ds, cfg, trees)
        gen_key = tuple(gen[col] for col in columns)
        for rid in c.members:
            value = ds.records[rid].values[sensitive]
            key = (gen_key, value)
            counts[key] = counts.get(key, 0) + 1
            labels.setdefault(key, gen)
            per_record[rid] = AnonymizedRow(gen, value, 1)
    rows = tuple(AnonymizedRow(labels[key], key[1], n) for key, n in counts.items())
    return AnonymizedTable(rows, cfg.k, len(ds), columns, sensitive, tuple(per_record))


@dataclass(frozen=True)
class Violation:
    quasi_identifier: tuple
    count: int


def verify_k_anonymity(t: AnonymizedTable, k: int) -> list[Violation]:
    """Equivalence classes (rows grouped on the quasi-identifier columns) smaller than ``k``."""
    sizes: dict[tuple, int] = defaultdict(int)
    for row in t.rows:
        sizes[row.key(t.columns)] += row.count
    return [Violation(key, n) for key, n in sizes.items() if n < k]


def read_anonymized_csv(source: Source, sensitive: str) -> AnonymizedTable:
    """Parse a release CSV in either shape (a trailing ``Count`` column marks the aggregated one)."""
    reader = csv.reader(io.StringIO(_read_text(source)))
    header = next(reader, None)
    if not header:
        raise DataError("empty input: no header row")
    aggregated = header[-1] == "Count"
    fields = header[:-1] if aggregated else header
    if sensitive not in fields:
        raise DataError(f"missing column: {sensitive!r}")
    columns = tuple(f for f in fields if f != sensitive)
    s_idx = fields.index(sensitive)
    rows = []
    for line_no, raw in enumerate(reader, start=2):
        if not raw:
            continue
        if len(raw) != len(header):
            raise DataError(f"row {line_no}: expected {len(header)} fields, got {len(raw)}")
        values = dict(zip(fields, raw[: len(fields)]))
        try:
            count = int(raw[-1]) if aggregated else 1
        except ValueError:
            raise DataError(f"row {line_no}: bad count {raw[-1]!r}") from None
        rows.append(AnonymizedRow({c: values[c] for c in columns}, raw[s_idx], count))
    n = sum(r.count for r in rows)
    return AnonymizedTable(tuple(rows), 1, n, columns, sensitive)
