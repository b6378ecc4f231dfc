"""Render conjunctive queries as ANSI SQL text.

Plain queries become a single SELECT DISTINCT over aliased tables with
equality predicates for shared variables and constants.  Queries with
symbolic constants become a grouped query: an inner SELECT DISTINCT projects
the placeholder columns alongside the head, and the outer query groups by the
placeholders and filters with ``HAVING COUNT(*) >= :minsup``.
"""

from __future__ import annotations

from .queries import (
    Atom,
    ConjunctiveQuery,
    Constant,
    Term,
    check_against_schema,
)
from .relational import Schema


def _quote(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def emit_sql(query: ConjunctiveQuery, schema: Schema) -> str:
    """Deterministic SQL text computing the query's answer (or grouped supports)."""
    check_against_schema(query, schema)
    atoms = sorted(query.body, key=str)
    aliases: dict[Atom, str] = {
        atom: f"t{i}" for i, atom in enumerate(atoms, start=1)
    }

    first_site: dict[Term, str] = {}
    predicates: list[str] = []
    for atom in atoms:
        columns = schema.relation(atom.relation).columns
        alias = aliases[atom]
        for term, column in zip(atom.args, columns):
            site = f"{alias}.{column}"
            if isinstance(term, Constant):
                predicates.append(f"{site} = {_quote(term.value)}")
                continue
            if term in first_site:
                predicates.append(f"{site} = {first_site[term]}")
            else:
                first_site[term] = site

    from_clause = ", ".join(
        f"{atom.relation} {aliases[atom]}" for atom in atoms
    )
    where = f" WHERE {' AND '.join(predicates)}" if predicates else ""

    symbols = sorted(query.symbolic_constants(), key=lambda s: s.index)
    head_cols = ", ".join(
        f"{first_site[v]} AS {v.name}" for v in query.head
    )
    if not symbols:
        return f"SELECT DISTINCT {head_cols} FROM {from_clause}{where}"

    symbol_cols = ", ".join(
        f"{first_site[s]} AS c{s.index}" for s in symbols
    )
    inner = (
        f"SELECT DISTINCT {symbol_cols}, {head_cols} FROM {from_clause}{where}"
    )
    group_cols = ", ".join(f"s.c{s.index}" for s in symbols)
    return (
        f"SELECT {group_cols}, COUNT(*) AS support FROM ({inner}) s "
        f"GROUP BY {group_cols} HAVING COUNT(*) >= :minsup"
    )
