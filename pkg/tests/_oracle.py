"""Brute-force reference implementations used to freeze expected test values.

Everything here is deliberately naive and independent of the library's own
algorithms: evaluation enumerates rows atom by atom, and containment is
decided by instantiating symbolic constants over small constant pools and
checking the classic frozen-body criterion.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Mapping

from cqmine.queries import (
    Atom,
    ConjunctiveQuery,
    Constant,
    SymbolicConstant,
    Variable,
    instantiate,
)

Tables = Mapping[str, Iterable[tuple[str, ...]]]


def eval_naive(query: ConjunctiveQuery, tables: Tables) -> set[tuple[str, ...]]:
    """All answers of a symbolic-constant-free query, by exhaustive matching."""
    assert not query.symbolic_constants()
    atoms = sorted(query.body, key=str)
    answers: set[tuple[str, ...]] = set()

    def rec(i: int, env: dict[Variable, str]) -> None:
        if i == len(atoms):
            answers.add(tuple(env[v] for v in query.head))
            return
        atom = atoms[i]
        for row in tables.get(atom.relation, ()):
            if len(row) != len(atom.args):
                continue
            new = dict(env)
            ok = True
            for term, value in zip(atom.args, row):
                if isinstance(term, Constant):
                    if term.value != value:
                        ok = False
                        break
                else:
                    if new.get(term, value) != value:
                        ok = False
                        break
                    new[term] = value
            if ok:
                rec(i + 1, new)

    rec(0, {})
    return answers


def support_naive(query: ConjunctiveQuery, tables: Tables) -> int:
    return len(eval_naive(query, tables))


def contained_no_symbolics(c1: ConjunctiveQuery, c2: ConjunctiveQuery) -> bool:
    """Classic criterion: freeze c1's variables, then evaluate c2 on the body."""
    if c1.arity != c2.arity:
        return False
    frozen = {v: f"~{v.name}" for v in c1.variables()}
    tables: dict[str, set[tuple[str, ...]]] = {}
    for atom in c1.body:
        row = tuple(
            frozen[t] if isinstance(t, Variable) else t.value for t in atom.args
        )
        tables.setdefault(atom.relation, set()).add(row)
    return tuple(frozen[v] for v in c1.head) in eval_naive(c2, tables)


def _assignments(
    syms: list[SymbolicConstant], pool: list[str]
) -> Iterable[dict[SymbolicConstant, str]]:
    for values in itertools.product(pool, repeat=len(syms)):
        yield dict(zip(syms, values))


def family_contained(q1: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    """Is q1 contained in q2, treating symbolic constants as instance families?

    q1 is contained in q2 when for every instantiation of q1's placeholders
    some instantiation of q2's placeholders contains it.
    """
    if q1.arity != q2.arity:
        return False
    shared = sorted({c.value for c in (q1.constants() | q2.constants())})
    syms1 = sorted(q1.symbolic_constants(), key=lambda s: s.index)
    pool1 = shared + [f"~fresh{i}" for i in range(1, len(syms1) + 1)]
    syms2 = sorted(q2.symbolic_constants(), key=lambda s: s.index)
    for a1 in _assignments(syms1, pool1):
        inst1 = instantiate(q1, a1)
        pool2 = sorted({c.value for c in inst1.constants()})
        if not any(
            contained_no_symbolics(inst1, instantiate(q2, a2))
            for a2 in _assignments(syms2, pool2)
        ):
            return False
    return True


def family_equivalent(q1: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    return family_contained(q1, q2) and family_contained(q2, q1)


def diagonal_contained(q1: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    """Is q1 contained in some reordered projection of q2?"""
    if len(q2.head) < len(q1.head):
        return False
    for positions in itertools.permutations(range(len(q2.head)), len(q1.head)):
        head = tuple(q2.head[i] for i in positions)
        if family_contained(q1, ConjunctiveQuery(head, q2.body)):
            return True
    return False


# ---------------------------------------------------------------------------
# random query generation (over the beer schema)
# ---------------------------------------------------------------------------

RELATIONS = (("likes", 2), ("visits", 2), ("serves", 2))
CONSTANT_POOL = ("Duvel", "Trappist", "Cheers")


def random_query(
    rng: random.Random,
    *,
    max_atoms: int = 3,
    allow_constants: bool = True,
    allow_symbolics: bool = True,
) -> ConjunctiveQuery:
    vars_pool = [Variable(f"v{i}") for i in range(1, 5)]
    atoms: list[Atom] = []
    for _ in range(rng.randint(1, max_atoms)):
        relation, arity = rng.choice(RELATIONS)
        args = []
        for _ in range(arity):
            roll = rng.random()
            if roll < 0.62 or not (allow_constants or allow_symbolics):
                args.append(rng.choice(vars_pool))
            elif allow_constants and (roll < 0.84 or not allow_symbolics):
                args.append(Constant(rng.choice(CONSTANT_POOL)))
            else:
                args.append(SymbolicConstant(rng.randint(1, 2)))
        atoms.append(Atom(relation, tuple(args)))
    body_vars = sorted(
        {t for a in atoms for t in a.args if isinstance(t, Variable)},
        key=lambda v: v.name,
    )
    if not body_vars:
        first = atoms[0]
        atoms[0] = Atom(first.relation, (vars_pool[0],) + first.args[1:])
        body_vars = [vars_pool[0]]
    head = tuple(rng.sample(body_vars, rng.randint(1, min(3, len(body_vars)))))
    return ConjunctiveQuery(head, frozenset(atoms))
