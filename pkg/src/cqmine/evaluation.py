"""In-memory evaluation of conjunctive queries over an instance.

The answer of a query is the set of head tuples produced by matchings, where
a matching assigns a constant to every variable so that each body atom lands
on a row of its relation.  Support is the number of distinct answer tuples.

Queries with symbolic constants are evaluated grouped: each assignment of the
placeholders to constants gets its own support count.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import QueryError
from .queries import (
    Atom,
    ConjunctiveQuery,
    Constant,
    SymbolicConstant,
    Variable,
    check_against_schema,
    fresh_variable,
    substitute_terms,
)
from .relational import Instance


def evaluate(query: ConjunctiveQuery, instance: Instance) -> frozenset[tuple[str, ...]]:
    """The answer set of a symbolic-constant-free query on an instance.

    Atoms are matched most-bound-first, smallest-relation-first; the heuristic
    affects only running time, never the result.
    """
    if query.symbolic_constants():
        raise QueryError(
            "query contains symbolic constants; use support_grouped instead"
        )
    check_against_schema(query, instance.schema)
    rows_for: dict[Atom, frozenset[tuple[str, ...]]] = {
        atom: instance.rows(atom.relation) for atom in query.body
    }
    answers: set[tuple[str, ...]] = set()

    def rank(atom: Atom, env: dict[Variable, str]) -> tuple[int, int, str]:
        bound = sum(
            1 for t in atom.args if isinstance(t, Constant) or t in env
        )
        return (-bound, len(rows_for[atom]), str(atom))

    def rec(remaining: list[Atom], env: dict[Variable, str]) -> None:
        if not remaining:
            answers.add(tuple(env[v] for v in query.head))
            return
        atom = min(remaining, key=lambda a: rank(a, env))
        rest = [a for a in remaining if a is not atom]
        for row in rows_for[atom]:
            new_env = env
            ok = True
            for term, value in zip(atom.args, row):
                if isinstance(term, Constant):
                    if term.value != value:
                        ok = False
                        break
                else:
                    bound = new_env.get(term)
                    if bound is None:
                        if new_env is env:
                            new_env = dict(env)
                        new_env[term] = value
                    elif bound != value:
                        ok = False
                        break
            if ok:
                rec(rest, new_env)

    rec(list(query.body), {})
    return frozenset(answers)


def support(query: ConjunctiveQuery, instance: Instance) -> int:
    """Number of distinct answer tuples."""
    return len(evaluate(query, instance))


@dataclass(frozen=True)
class GroupedSupport:
    """Per-assignment supports for a query with symbolic constants.

    ``counts`` maps a tuple of constant values — aligned with ``symbols``,
    which lists the query's symbolic constants in index order — to the
    support of the query instantiated at that assignment.
    """

    symbols: tuple[SymbolicConstant, ...]
    counts: dict[tuple[str, ...], int]

    def best(self) -> int:
        return max(self.counts.values(), default=0)

    def sorted_items(self) -> list[tuple[tuple[str, ...], int]]:
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def __bool__(self) -> bool:
        return bool(self.counts)


def support_grouped(
    query: ConjunctiveQuery, instance: Instance, minsup: int = 1
) -> GroupedSupport:
    """Grouped evaluation: support per symbolic-constant assignment.

    Placeholders are treated as extra answer variables in a single evaluation
    pass; distinct head tuples are then counted per assignment, and
    assignments with support below ``minsup`` are omitted.
    """
    symbols = tuple(sorted(query.symbolic_constants(), key=lambda s: s.index))
    if not symbols:
        raise QueryError("query has no symbolic constants; use support/evaluate")
    used = {v.name for v in query.variables()}
    stand_ins: list[Variable] = []
    for _ in symbols:
        var = fresh_variable(used, stem="g")
        used.add(var.name)
        stand_ins.append(var)
    mapping = dict(zip(symbols, stand_ins))
    widened = ConjunctiveQuery(
        query.head + tuple(stand_ins), substitute_terms(query.body, mapping)
    )
    arity = query.arity
    per_assignment: dict[tuple[str, ...], set[tuple[str, ...]]] = {}
    for row in evaluate(widened, instance):
        per_assignment.setdefault(row[arity:], set()).add(row[:arity])
    counts = {
        values: len(heads)
        for values, heads in per_assignment.items()
        if len(heads) >= minsup
    }
    return GroupedSupport(symbols, counts)
