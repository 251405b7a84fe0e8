"""Generalization hierarchies for categorical attributes and suffix masking."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .schema import MaskRule, SchemaError, Source, _read_text


class TaxonomyError(ValueError):
    """Raised for malformed hierarchies or labels outside a hierarchy."""


@dataclass(frozen=True)
class TaxonomyTree:
    """A rooted tree over the labels of one categorical attribute.

    ``height`` is the longest root-to-leaf edge count; a lone root has height 0.
    """

    parent: dict
    root: str
    nodes: frozenset = field(init=False)
    height: int = field(init=False)
    _depth: dict = field(init=False, repr=False, compare=False)
    _subtree_height: dict = field(init=False, repr=False, compare=False)
    _leaves: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        children: dict[str, list[str]] = {}
        nodes = {self.root}
        for child, par in self.parent.items():
            nodes.update((child, par))
            children.setdefault(par, []).append(child)
        if self.root in self.parent:
            raise TaxonomyError(f"root {self.root!r} has a parent")

        depth = {self.root: 0}
        order = [self.root]
        for node in order:
            for c in children.get(node, ()):
                depth[c] = depth[node] + 1
                order.append(c)
        if len(depth) != len(nodes):
            unreachable = sorted(nodes - depth.keys())
            raise TaxonomyError(f"nodes not connected to root {self.root!r}: {unreachable}")

        sub = {}
        for node in reversed(order):
            sub[node] = 1 + max((sub[c] for c in children.get(node, ())), default=-1)

        object.__setattr__(self, "nodes", frozenset(nodes))
        object.__setattr__(self, "height", sub[self.root])
        object.__setattr__(self, "_depth", depth)
        object.__setattr__(self, "_subtree_height", sub)
        object.__setattr__(self, "_leaves", frozenset(n for n in nodes if n not in children))

    @property
    def leaves(self) -> frozenset:
        return self._leaves

    def ancestors(self, label: str) -> list[str]:
        """Path from ``label`` up to the root, both inclusive."""
        self._check(label)
        path = [label]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return path

    def _check(self, label: str):
        if label not in self.nodes:
            raise TaxonomyError(f"unknown label {label!r}")

    def lca(self, values: Iterable[str]) -> str:
        values = list(values)
        if not values:
            raise TaxonomyError("empty value union")
        common = self.ancestors(values[0])
        for v in values[1:]:
            shared = set(self.ancestors(v))
            common = [a for a in common if a in shared]
        return common[0]

    def union_height(self, values: Iterable[str]) -> int:
        values = set(values)
        if len(values) == 1:
            self._check(next(iter(values)))
            return 0
        return self._subtree_height[self.lca(values)]

    def generalize(self, values: Iterable[str], always: bool = False) -> str:
        values = set(values)
        top = self.lca(values)
        return self.root if always else top


@dataclass(frozen=True)
class MaskTaxonomy:
    """Implicit two-level hierarchy for masked codes: raw value under its masked form.

    Any non-empty union has height 0 when it is a single value and 1 otherwise.
    """

    rule: MaskRule
    height: int = 1

    def union_height(self, values: Iterable[str]) -> int:
        values = set(values)
        if not values:
            raise TaxonomyError("empty value union")
        return 0 if len(values) == 1 else 1

    def generalize(self, values: Iterable[str], always: bool = False) -> str:
        values = sorted(set(values))
        if not values:
            raise TaxonomyError("empty value union")
        if len(values) == 1 and not always:
            return values[0]
        masked = {mask_suffix(v, self.rule) for v in values}
        if len(masked) == 1:
            return masked.pop()
        # prefixes disagree: suppress the whole code
        width = max(len(v) for v in values)
        return self.rule.mask_char * width


def load_taxonomy(edge_list_source: Source) -> TaxonomyTree:
    """Read a ``parent,child`` edge list.

    A line holding a single label declares a root, which is how a one-node tree
    is written.
    """
    text = _read_text(edge_list_source)
    parent: dict[str, str] = {}
    declared: list[str] = []
    for line_no, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        row = [c.strip() for c in row if c.strip()]
        if not row:
            continue
        if len(row) == 1:
            declared.append(row[0])
            continue
        if len(row) != 2:
            raise TaxonomyError(f"line {line_no}: expected 'parent,child'")
        par, child = row
        if child in parent:
            raise TaxonomyError(f"line {line_no}: duplicate child {child!r}")
        if par == child:
            raise TaxonomyError(f"line {line_no}: cycle at {child!r}")
        parent[child] = par
    if not parent and not declared:
        raise TaxonomyError("empty taxonomy")

    nodes = set(parent) | set(parent.values()) | set(declared)
    roots = sorted(n for n in nodes if n not in parent)
    if not roots:
        raise TaxonomyError("cycle: no root")
    if len(roots) > 1:
        raise TaxonomyError(f"multiple roots: {roots}")
    # walking up from every node must reach the root without revisiting
    for node in nodes:
        seen = {node}
        while node in parent:
            node = parent[node]
            if node in seen:
                raise TaxonomyError(f"cycle through {node!r}")
            seen.add(node)
    return TaxonomyTree(parent, roots[0])


def union_height(tree, values: Iterable[str]) -> int:
    """Height of the smallest subtree spanning ``values`` (0 for one value)."""
    return tree.union_height(values)


def generalize_label(tree, values: Iterable[str], always_generalize: bool = False) -> str:
    """Lowest common generalization of ``values``, or the root when ``always_generalize``."""
    return tree.generalize(values, always_generalize)


def mask_suffix(value: str, rule: MaskRule) -> str:
    if len(value) < rule.suffix_len:
        raise TaxonomyError(f"value {value!r} shorter than mask length {rule.suffix_len}")
    if rule.suffix_len == 0:
        return value
    return value[: -rule.suffix_len] + rule.mask_char * rule.suffix_len


def build_trees(schema, base_dir: str | Path = ".") -> dict:
    """Hierarchy for every quasi-categorical attribute of ``schema``."""
    trees = {}
    for name in schema.categorical:
        attr = schema[name]
        if attr.mask_rule is not None:
            trees[name] = MaskTaxonomy(attr.mask_rule)
        elif attr.taxonomy_path:
            trees[name] = load_taxonomy(Path(base_dir) / attr.taxonomy_path)
        else:
            raise SchemaError(f"{name}: quasi_categorical attribute needs a taxonomy or mask rule")
    return trees
