"""Relational schemas and database instances with set semantics.

A schema declares named relations with fixed arity and column names; an
instance assigns each relation a finite set of constant tuples.  Both are
immutable once loaded.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError, SchemaError

_DECL_RE = re.compile(
    r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*\(\s*(?P<cols>[^()]*)\s*\)$"
)
_COL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class RelationDecl:
    """A single relation declaration: name, arity and column names."""

    name: str
    columns: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.columns)


@dataclass(frozen=True)
class Schema:
    """An ordered collection of relation declarations with unique names."""

    relations: tuple[RelationDecl, ...]
    _by_name: dict[str, RelationDecl] = field(
        init=False, repr=False, compare=False, hash=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        by_name: dict[str, RelationDecl] = {}
        for decl in self.relations:
            if decl.name in by_name:
                raise SchemaError(f"duplicate relation name: {decl.name!r}")
            if decl.arity < 1:
                raise SchemaError(f"relation {decl.name!r} must have arity >= 1")
            by_name[decl.name] = decl
        object.__setattr__(self, "_by_name", by_name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def relation(self, name: str) -> RelationDecl:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"unknown relation: {name!r}") from None

    def names(self) -> tuple[str, ...]:
        return tuple(decl.name for decl in self.relations)


@dataclass(frozen=True)
class Instance:
    """A database instance: one frozen set of rows per schema relation.

    Rows are tuples of strings; duplicates are collapsed by construction.
    """

    schema: Schema
    tables: dict[str, frozenset[tuple[str, ...]]]

    def __post_init__(self) -> None:
        tables: dict[str, frozenset[tuple[str, ...]]] = {}
        for decl in self.schema.relations:
            rows = frozenset(self.tables.get(decl.name, frozenset()))
            for row in rows:
                if len(row) != decl.arity:
                    raise DataError(
                        f"relation {decl.name!r}: row {row!r} has width "
                        f"{len(row)}, expected {decl.arity}"
                    )
            tables[decl.name] = rows
        object.__setattr__(self, "tables", tables)

    def rows(self, relation: str) -> frozenset[tuple[str, ...]]:
        self.schema.relation(relation)
        return self.tables[relation]

    def size(self) -> int:
        return sum(len(rows) for rows in self.tables.values())


def load_schema(path: str | Path) -> Schema:
    """Parse a schema file: one ``name(col1, col2, ...)`` declaration per line.

    Blank lines and ``#`` comments are ignored.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read schema file {path}: {exc}") from exc
    decls: list[RelationDecl] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DECL_RE.match(line)
        if m is None:
            raise SchemaError(f"{path}:{lineno}: cannot parse declaration: {raw!r}")
        cols = tuple(c.strip() for c in m.group("cols").split(",") if c.strip())
        if not cols:
            raise SchemaError(f"{path}:{lineno}: relation {m.group('name')!r} has no columns")
        for col in cols:
            if not _COL_RE.match(col):
                raise SchemaError(f"{path}:{lineno}: bad column name {col!r}")
        if len(set(cols)) != len(cols):
            raise SchemaError(f"{path}:{lineno}: duplicate column name in {m.group('name')!r}")
        decls.append(RelationDecl(m.group("name"), cols))
    if not decls:
        raise SchemaError(f"{path}: schema declares no relations")
    return Schema(tuple(decls))


def load_instance(schema: Schema, data_dir: str | Path) -> Instance:
    """Load one headerless ``<relation>.csv`` file per schema relation."""
    data_dir = Path(data_dir)
    tables: dict[str, frozenset[tuple[str, ...]]] = {}
    for decl in schema.relations:
        csv_path = data_dir / f"{decl.name}.csv"
        if not csv_path.is_file():
            raise DataError(f"missing data file for relation {decl.name!r}: {csv_path}")
        rows: set[tuple[str, ...]] = set()
        with open(csv_path, newline="", encoding="utf-8") as handle:
            for lineno, record in enumerate(csv.reader(handle), start=1):
                if not record:
                    continue
                if len(record) != decl.arity:
                    raise DataError(
                        f"{csv_path}:{lineno}: expected {decl.arity} fields, "
                        f"got {len(record)}"
                    )
                rows.add(tuple(record))
        tables[decl.name] = frozenset(rows)
    return Instance(schema, tables)


def write_instance(instance: Instance, data_dir: str | Path) -> None:
    """Serialize an instance back to ``<relation>.csv`` files (sorted rows)."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    for decl in instance.schema.relations:
        with open(data_dir / f"{decl.name}.csv", "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            for row in sorted(instance.tables[decl.name]):
                writer.writerow(row)


def active_domain(instance: Instance, relation: str, column: int) -> frozenset[str]:
    """The set of constants occurring in one column (0-based) of a relation."""
    decl = instance.schema.relation(relation)
    if not 0 <= column < decl.arity:
        raise DataError(
            f"column {column} out of range for {relation!r} (arity {decl.arity})"
        )
    return frozenset(row[column] for row in instance.tables[relation])
