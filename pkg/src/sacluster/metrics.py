"""Cluster containers and the two information-loss variants.

``canonical`` is the size-weighted sum of normalized numeric spans and
normalized categorical union heights. ``legacy`` is the accumulation used by the
original test application: it keeps only the primary numeric span, charges one
unit per categorical attribute and adds a cluster-position term ``(i + 1) / C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .schema import Dataset


@dataclass(frozen=True)
class Cluster:
    members: tuple[int, ...]
    numeric_ranges: dict = field(compare=False)
    categorical_unions: dict = field(compare=False)

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)


def make_cluster(ds: Dataset, members: Iterable[int]) -> Cluster:
    members = tuple(members)
    if not members:
        raise ValueError("a cluster needs at least one member")
    n = len(ds)
    for rid in members:
        if not 0 <= rid < n:
            raise KeyError(f"cluster references unknown record {rid}")
    recs = [ds.records[rid].values for rid in members]
    numeric = {}
    for name in ds.schema.numeric:
        col = [v[name] for v in recs]
        numeric[name] = (min(col), max(col))
    unions = {name: frozenset(v[name] for v in recs) for name in ds.schema.categorical}
    return Cluster(members, numeric, unions)


@dataclass(frozen=True)
class Partition:
    """Ordered clusters; the order is ascending cluster minimum on the sort attribute."""

    clusters: tuple[Cluster, ...]

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    @property
    def sizes(self) -> list[int]:
        return [c.size for c in self.clusters]

    def blocks(self) -> list[list[int]]:
        return [sorted(c.members) for c in self.clusters]

    def validate(self, n: int):
        seen = sorted(rid for c in self.clusters for rid in c.members)
        if seen != list(range(n)):
            raise ValueError("partition must cover every record exactly once")


def order_clusters(clusters: Iterable[Cluster], primary_attr: str) -> Partition:
    """Sort clusters by (min, max) of ``primary_attr``, then smallest member id."""
    return Partition(
        sorted(
            clusters,
            key=lambda c: (*c.numeric_ranges[primary_attr], min(c.members)),
        )
    )


def partition_from_blocks(ds: Dataset, blocks: Sequence[Iterable[int]], primary_attr: str | None = None) -> Partition:
    clusters = [make_cluster(ds, b) for b in blocks]
    if primary_attr is None:
        return Partition(clusters)
    return order_clusters(clusters, primary_attr)


@dataclass(frozen=True)
class ILReport:
    variant: str
    per_cluster: tuple[tuple[int, float], ...]
    total: float

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "per_cluster": [[i, loss] for i, loss in self.per_cluster],
            "total": self.total,
        }


def _numeric_term(lo: float, hi: float, glo: float, ghi: float) -> float:
    if ghi == glo:
        return 0.0
    return (hi - lo) / (ghi - glo)


def cluster_il_canonical(c: Cluster, ds: Dataset, trees: dict, always_generalize=frozenset()) -> float:
    """Information loss of one cluster.

    Attributes listed in ``always_generalize`` are charged a full unit whatever
    the cluster holds, since they are released at the root of their hierarchy.
    """
    for rid in c.members:
        if not 0 <= rid < len(ds):
            raise KeyError(f"cluster references unknown record {rid}")
    per_record = 0.0
    for name in ds.schema.numeric:
        lo, hi = c.numeric_ranges[name]
        per_record += _numeric_term(lo, hi, *ds.global_ranges[name])
    for name in ds.schema.categorical:
        if name not in trees:
            raise KeyError(f"no taxonomy for attribute {name!r}")
        tree = trees[name]
        if tree.height == 0:
            continue
        if name in always_generalize:
            per_record += 1.0
        else:
            per_record += tree.union_height(c.categorical_unions[name]) / tree.height
    return c.size * per_record


def total_il_canonical(p: Partition, ds: Dataset, trees: dict, always_generalize=frozenset()) -> ILReport:
    per = tuple(
        (i, cluster_il_canonical(c, ds, trees, always_generalize)) for i, c in enumerate(p.clusters)
    )
    total = 0.0
    for _, loss in per:
        total += loss
    return ILReport("canonical", per, total)


def total_il_legacy(p: Partition, ds: Dataset, primary_attr: str) -> ILReport:
    """Legacy accumulation; depends on cluster order, so ``p`` must be ordered."""
    n_clusters = len(p.clusters)
    if n_clusters < 1:
        raise ValueError("partition has no clusters")
    glo, ghi = ds.global_ranges[primary_attr]
    flat = float(ds.schema.s)
    per = []
    total = 0.0
    for i, c in enumerate(p.clusters):
        lo, hi = c.numeric_ranges[primary_attr]
        loss = c.size * (_numeric_term(lo, hi, glo, ghi) + flat + (i + 1) / n_clusters)
        per.append((i, loss))
        total += loss
    return ILReport("legacy", tuple(per), total)
