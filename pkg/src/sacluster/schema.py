"""Attribute schema, record loading and sorted views."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import BinaryIO, Iterable, Union


class SchemaError(ValueError):
    """Raised for an inconsistent attribute schema."""


class DataError(ValueError):
    """Raised when input records cannot be parsed against a schema."""


class AttributeRole(str, enum.Enum):
    IDENTIFIER = "identifier"
    QUASI_NUMERIC = "quasi_numeric"
    QUASI_CATEGORICAL = "quasi_categorical"
    SENSITIVE = "sensitive"


@dataclass(frozen=True)
class MaskRule:
    """Replace the last ``suffix_len`` characters with ``mask_char``."""

    suffix_len: int
    mask_char: str = "*"

    def __post_init__(self):
        if self.suffix_len < 0:
            raise SchemaError("suffix_len must be non-negative")
        if len(self.mask_char) != 1:
            raise SchemaError("mask_char must be a single character")


@dataclass(frozen=True)
class Attribute:
    name: str
    role: AttributeRole
    taxonomy_path: str | None = None
    mask_rule: MaskRule | None = None


@dataclass(frozen=True)
class AttributeSchema:
    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        names = [a.name for a in self.attributes]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise SchemaError(f"duplicate attribute names: {dupes}")
        n_sensitive = sum(a.role is AttributeRole.SENSITIVE for a in self.attributes)
        if n_sensitive != 1:
            raise SchemaError(f"exactly one sensitive attribute required, got {n_sensitive}")
        if self.r + self.s < 1:
            raise SchemaError("no quasi-identifiers remain")
        for a in self.attributes:
            if a.role is not AttributeRole.QUASI_CATEGORICAL and (a.taxonomy_path or a.mask_rule):
                raise SchemaError(f"{a.name}: taxonomy/mask only allowed on quasi_categorical attributes")
            if a.taxonomy_path and a.mask_rule:
                raise SchemaError(f"{a.name}: give either a taxonomy or a mask rule, not both")

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def __getitem__(self, name: str) -> Attribute:
        for a in self.attributes:
            if a.name == name:
                return a
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(a.name == name for a in self.attributes)

    def with_role(self, role: AttributeRole) -> list[str]:
        return [a.name for a in self.attributes if a.role is role]

    @property
    def numeric(self) -> list[str]:
        return self.with_role(AttributeRole.QUASI_NUMERIC)

    @property
    def categorical(self) -> list[str]:
        return self.with_role(AttributeRole.QUASI_CATEGORICAL)

    @property
    def quasi_identifiers(self) -> list[str]:
        return [
            a.name
            for a in self.attributes
            if a.role in (AttributeRole.QUASI_NUMERIC, AttributeRole.QUASI_CATEGORICAL)
        ]

    @property
    def sensitive(self) -> str:
        return self.with_role(AttributeRole.SENSITIVE)[0]

    @property
    def r(self) -> int:
        return len(self.numeric)

    @property
    def s(self) -> int:
        return len(self.categorical)


@dataclass(frozen=True)
class Record:
    record_id: int
    values: dict

    def __getitem__(self, name: str):
        return self.values[name]


@dataclass(frozen=True)
class Dataset:
    """Immutable record table.

    ``global_ranges`` maps every quasi-numeric attribute to the (min, max) of
    its values over the whole table and is computed on construction.
    """

    schema: AttributeSchema
    records: tuple[Record, ...]
    global_ranges: dict = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        for i, rec in enumerate(self.records):
            if rec.record_id != i:
                raise DataError(f"record ids must be dense 0..n-1, got {rec.record_id} at {i}")
        ranges = {}
        for name in self.schema.numeric:
            col = [rec.values[name] for rec in self.records]
            if col:
                ranges[name] = (min(col), max(col))
        object.__setattr__(self, "global_ranges", ranges)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> list:
        return [rec.values[name] for rec in self.records]


Source = Union[str, Path, bytes, BinaryIO]


def _read_text(source: Source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes().decode("utf-8-sig")
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    return source.read().decode("utf-8-sig")


def _parse_number(raw: str) -> float:
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError(raw)
    return value


def load_dataset(csv_source: Source, schema: AttributeSchema) -> Dataset:
    """Parse a headed CSV into a :class:`Dataset`.

    Columns not named by ``schema`` are dropped. Row order becomes record id
    order. Blank cells are rejected; there is no imputation.
    """
    text = _read_text(csv_source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header:
        raise DataError("empty input: no header row")
    header = [h.strip() for h in header]
    dupes = sorted({h for h in header if header.count(h) > 1})
    if dupes:
        raise DataError(f"duplicate header names: {dupes}")
    missing = [n for n in schema.names if n not in header]
    if missing:
        raise DataError(f"missing column(s): {missing}")

    index = {name: header.index(name) for name in schema.names}
    numeric = set(schema.numeric)
    records = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataError(f"row {line_no}: expected {len(header)} fields, got {len(row)}")
        values = {}
        for name, col in index.items():
            cell = row[col].strip()
            if cell == "":
                raise DataError(f"row {line_no}: missing value for {name!r}")
            if name in numeric:
                try:
                    values[name] = _parse_number(cell)
                except ValueError:
                    raise DataError(
                        f"row {line_no}: non-numeric value {cell!r} in column {name!r}"
                    ) from None
            else:
                values[name] = cell
        records.append(Record(len(records), values))
    if not records:
        raise DataError("empty input: no data rows")
    return Dataset(schema, records)


def strip_identifiers(ds: Dataset) -> Dataset:
    """Drop every identifier attribute from the schema and the records."""
    keep = tuple(a for a in ds.schema.attributes if a.role is not AttributeRole.IDENTIFIER)
    if len(keep) == len(ds.schema.attributes):
        return ds
    schema = replace(ds.schema, attributes=keep)
    names = [a.name for a in keep]
    records = [Record(rec.record_id, {n: rec.values[n] for n in names}) for rec in ds.records]
    return Dataset(schema, records)


def _sort_key(value):
    # numbers sort before text so mixed tuples stay comparable
    return (0, value, "") if isinstance(value, float) else (1, 0.0, value)


def sort_view(ds: Dataset, attr: str) -> list[int]:
    """Record ids ascending by ``attr``.

    Ties fall back to the full value tuple (schema order), then record id.
    """
    if attr not in ds.schema or ds.schema[attr].role is not AttributeRole.QUASI_NUMERIC:
        raise SchemaError(f"{attr!r} is not a quasi_numeric attribute")
    names = ds.schema.names

    def key(rec: Record):
        return (rec.values[attr], tuple(_sort_key(rec.values[n]) for n in names), rec.record_id)

    return [rec.record_id for rec in sorted(ds.records, key=key)]


def records_from_rows(schema: AttributeSchema, rows: Iterable[dict]) -> Dataset:
    """Build a dataset from in-memory dicts (numeric columns coerced to float)."""
    numeric = set(schema.numeric)
    records = []
    for i, row in enumerate(rows):
        values = {}
        for name in schema.names:
            v = row[name]
            values[name] = float(v) if name in numeric else str(v)
        records.append(Record(i, values))
    if not records:
        raise DataError("empty input: no data rows")
    return Dataset(schema, records)
