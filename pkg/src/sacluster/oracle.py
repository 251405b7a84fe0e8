"""Exhaustive minimum-loss partitioning for tiny tables."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .engine import InfeasibleError
from .metrics import Partition, cluster_il_canonical, make_cluster, order_clusters, total_il_canonical
from .schema import Dataset

MAX_N = 12
TIE_TOL = 1e-9


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    """Bell number via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def enumerate_partitions(n: int, min_size: int = 1) -> Iterator[list[tuple[int, ...]]]:
    """Every set-partition of ``range(n)`` with all blocks of at least ``min_size``.

    Blocks come ordered by their smallest element; each partition appears once.
    """
    if not 1 <= n <= MAX_N:
        raise InfeasibleError(f"n={n} outside 1..{MAX_N} (Bell({n}) = {bell(max(n, 0))} partitions)")
    if min_size < 1:
        raise ValueError("min_size must be at least 1")
    if min_size > n:
        return

    blocks: list[list[int]] = []
    deficit = 0  # records still needed to bring every block up to min_size

    def place(i: int):
        nonlocal deficit
        if i == n:
            if deficit == 0:
                yield [tuple(b) for b in blocks]
            return
        left = n - i - 1
        for b in blocks:
            short = len(b) < min_size
            deficit -= short
            b.append(i)
            if deficit <= left:
                yield from place(i + 1)
            b.pop()
            deficit += short
        blocks.append([i])
        deficit += min_size - 1
        if deficit <= left:
            yield from place(i + 1)
        deficit -= min_size - 1
        blocks.pop()

    yield from place(0)


@dataclass(frozen=True)
class OracleResult:
    best_partition: Partition
    best_il: float
    partitions_examined: int

    def to_dict(self) -> dict:
        return {
            "best_il": self.best_il,
            "best_partition": self.best_partition.blocks(),
            "partitions_examined": self.partitions_examined,
        }


def optimal_partition(
    ds: Dataset,
    min_size: int,
    trees: dict,
    always_generalize=frozenset(),
    primary_attr: str | None = None,
) -> OracleResult:
    """Minimum canonical loss over all partitions with blocks of at least ``min_size``.

    Ties go to fewer clusters, then to the lexicographically smallest block list.
    """
    n = len(ds)
    if n > MAX_N:
        raise InfeasibleError(
            f"refusing exhaustive search over n={n} records: Bell({n}) = {bell(n)} partitions "
            f"(limit n <= {MAX_N})"
        )
    if min_size > n:
        raise InfeasibleError(f"no partition of {n} records has blocks of size >= {min_size}")

    cache: dict[tuple[int, ...], float] = {}

    def loss(block: tuple[int, ...]) -> float:
        v = cache.get(block)
        if v is None:
            v = cluster_il_canonical(make_cluster(ds, block), ds, trees, always_generalize)
            cache[block] = v
        return v

    best_key = None
    best_blocks = None
    examined = 0
    for blocks in enumerate_partitions(n, min_size):
        examined += 1
        total = 0.0
        for b in blocks:
            total += loss(b)
        if best_key is not None and total > best_key[0] + TIE_TOL:
            continue
        key = (total, len(blocks), sorted(blocks))
        if (
            best_key is None
            or total < best_key[0] - TIE_TOL
            or (len(blocks), key[2]) < (best_key[1], best_key[2])
        ):
            best_key, best_blocks = key, blocks

    clusters = [make_cluster(ds, b) for b in best_blocks]
    part = order_clusters(clusters, primary_attr) if primary_attr else Partition(clusters)
    report = total_il_canonical(part, ds, trees, always_generalize)
    return OracleResult(part, report.total, examined)
