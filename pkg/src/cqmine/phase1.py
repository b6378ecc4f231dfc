"""Levelwise discovery of all frequent conjunctive queries over an instance.

The search starts from the most general queries expressible within the
configured limits and repeatedly specializes them.  A candidate is admitted
for evaluation only once every strictly more general query of its class is
known to be frequent; because support never shrinks under generalization,
classes with an infrequent generalization can be discarded without touching
the data.  Candidates whose generalizations are merely *not yet* classified
stay in a pending pool and are reconsidered on later iterations, so admission
order never loses part of the search space.

Queries are tracked per equivalence class: every generated query is minimized
and canonically renamed, and indices are keyed by the canonical text (by
default up to a permutation of the head, so two queries that only disagree on
answer-column order count as one discovery).
"""

from __future__ import annotations

import itertools
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .containment import (
    canonical_key,
    canonicalize,
    is_diagonally_contained,
    minimize,
)
from .errors import ConfigError
from .evaluation import GroupedSupport, support, support_grouped
from .queries import (
    Atom,
    ConjunctiveQuery,
    SymbolicConstant,
    Variable,
    canonical_form,
    fresh_symbolic_constant,
    fresh_variable,
    substitute_terms,
)
from .relational import Instance, Schema

_KEY_ATOM_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(\s*_(?:\s*,\s*_)*\s*\)\s*$")


def parse_key_atom(pattern: str, schema: Schema) -> Atom:
    """Turn a pattern like ``likes(_, _)`` into an atom over fresh variables.

    Each underscore becomes a distinct variable; the atom's variables double
    as the head of the seed query for key-atom mining.
    """
    match = _KEY_ATOM_RE.match(pattern)
    if match is None:
        raise ConfigError(
            f"key atom must look like 'relation(_, _)', got {pattern!r}"
        )
    name = match.group(1)
    if name not in schema:
        raise ConfigError(f"key atom names unknown relation {name!r}")
    arity = pattern.count("_")
    declared = schema.relation(name).arity
    if arity != declared:
        raise ConfigError(
            f"key atom for {name!r} has {arity} positions, relation has {declared}"
        )
    args = tuple(Variable(f"k{i}") for i in range(1, arity + 1))
    return Atom(name, args)


@dataclass(frozen=True, slots=True)
class MinerConfig:
    """Parameters controlling the frequent-query search.

    minsup: minimum number of answers (for queries with symbolic constants,
        of the best single assignment) for a query to count as frequent.
    max_atoms: largest body size explored.
    enable_constants: when False, the selection operation is switched off and
        no symbolic-constant queries are generated.
    key_atom: optional atom every explored query must contain, with the
        atom's variables as the fixed head (the "transaction key" language).
    modulo_head_permutation: treat queries differing only in head order as
        the same discovery.
    """

    minsup: int
    max_atoms: int = 2
    enable_constants: bool = True
    key_atom: Atom | None = None
    modulo_head_permutation: bool = True

    def __post_init__(self) -> None:
        if self.minsup < 1:
            raise ConfigError(f"minsup must be at least 1, got {self.minsup}")
        if self.max_atoms < 1:
            raise ConfigError(f"max_atoms must be at least 1, got {self.max_atoms}")


@dataclass(frozen=True, slots=True)
class QueryRecord:
    """A frequent discovery: the class representative and its measured support.

    For symbolic-constant queries, ``support`` is the best assignment's count
    and ``frequent_constants`` lists every assignment meeting the threshold.
    """

    query: ConjunctiveQuery
    support: int
    level: int
    frequent_constants: GroupedSupport | None = None


@dataclass(slots=True)
class Level:
    """One admission round: the candidates evaluated and the survivors."""

    number: int
    candidate_keys: tuple[str, ...]
    frequent_keys: tuple[str, ...]


@dataclass(slots=True)
class MinerState:
    """Everything accumulated by a phase-1 run."""

    config: MinerConfig
    schema: Schema
    levels: list[Level] = field(default_factory=list)
    frequent_index: dict[str, QueryRecord] = field(default_factory=dict)
    infrequent_index: set[str] = field(default_factory=set)

    def key(self, query: ConjunctiveQuery) -> str:
        return canonical_key(
            query, modulo_head_permutation=self.config.modulo_head_permutation
        )

    def candidate_keys(self) -> set[str]:
        seen: set[str] = set()
        for level in self.levels:
            seen.update(level.candidate_keys)
        return seen

    def frequent_records(self) -> list[QueryRecord]:
        return [
            self.frequent_index[key]
            for level in self.levels
            for key in level.frequent_keys
        ]


def initial_candidates(schema: Schema, config: MinerConfig) -> list[ConjunctiveQuery]:
    """The most general queries of the language, one per equivalence class.

    Without a key atom these are the queries whose body is a multiset of
    exactly ``max_atoms`` relation atoms over all-distinct variables and
    whose head lists every variable.  Queries with smaller bodies are
    strictly less general (their atoms embed into a padded body while the
    wider head does not map back), so they surface later through projection
    and minimization rather than seeding the search.  With a key atom the
    language is anchored instead: the single seed is the key atom with its
    variables as head.
    """
    if config.key_atom is not None:
        seed = ConjunctiveQuery(config.key_atom.args, frozenset([config.key_atom]))
        return [canonicalize(seed)]
    results: dict[str, ConjunctiveQuery] = {}
    names = sorted(schema.names())
    for combo in itertools.combinations_with_replacement(names, config.max_atoms):
        counter = itertools.count(1)
        atoms = []
        for name in combo:
            arity = schema.relation(name).arity
            args = tuple(Variable(f"v{next(counter)}") for _ in range(arity))
            atoms.append(Atom(name, args))
        head = tuple(term for atom in atoms for term in atom.args)
        query = canonicalize(ConjunctiveQuery(head, frozenset(atoms)))
        results.setdefault(
            canonical_key(
                query, modulo_head_permutation=config.modulo_head_permutation
            ),
            query,
        )
    return [results[key] for key in sorted(results)]


def _used_names(query: ConjunctiveQuery) -> set[str]:
    return {variable.name for variable in query.variables()}


def _sorted_body(query: ConjunctiveQuery) -> list[Atom]:
    return sorted(query.body, key=str)


def _variable_sites(query: ConjunctiveQuery, term) -> list[tuple[Atom, int]]:
    sites = []
    for atom in _sorted_body(query):
        for position, arg in enumerate(atom.args):
            if arg == term:
                sites.append((atom, position))
    return sites


def _rebuild_body(
    body: list[Atom], moved: set[tuple[Atom, int]], replacement
) -> frozenset[Atom]:
    rebuilt = []
    for atom in body:
        args = tuple(
            replacement if (atom, position) in moved else arg
            for position, arg in enumerate(atom.args)
        )
        rebuilt.append(Atom(atom.relation, args))
    return frozenset(rebuilt)


def _class_of(
    query: ConjunctiveQuery, config: MinerConfig
) -> tuple[str, ConjunctiveQuery]:
    """Canonical key plus class representative, in one canonicalization."""
    reduced = minimize(query)
    return canonical_form(
        reduced, modulo_head_permutation=config.modulo_head_permutation
    )


def specializations(
    query: ConjunctiveQuery, schema: Schema, config: MinerConfig
) -> list[ConjunctiveQuery]:
    """All immediate refinements of a query's class, one per resulting class.

    Four operations generate refinements: extending the body with a new atom
    over fresh variables, joining two variables into one, selecting a
    non-head variable to a symbolic constant, and projecting away a head
    position.  Results are minimized and canonically renamed; refinements
    that collapse back into the input's own class are dropped.
    """
    base = canonicalize(query)
    self_key, _ = _class_of(base, config)
    results: dict[str, ConjunctiveQuery] = {}

    def add(candidate: ConjunctiveQuery) -> None:
        key, reduced = _class_of(candidate, config)
        if key == self_key:
            return
        if len(reduced.body) > config.max_atoms:
            return
        results.setdefault(key, reduced)

    biased = config.key_atom is not None
    head_set = set(base.head)

    # Extension: add one atom over all-fresh variables, head unchanged.  If
    # the relation already occurs in the body, the unconstrained new atom
    # maps onto the existing one, so the result collapses back; only absent
    # relations yield new classes.
    if len(base.body) < config.max_atoms:
        used = _used_names(base)
        present = {atom.relation for atom in base.body}
        for name in sorted(schema.names()):
            if name in present:
                continue
            arity = schema.relation(name).arity
            fresh: list[Variable] = []
            for _ in range(arity):
                variable = fresh_variable(used | {v.name for v in fresh})
                fresh.append(variable)
            atom = Atom(name, tuple(fresh))
            add(ConjunctiveQuery(base.head, base.body | {atom}))

    # Join: merge two distinct variables.  When both are head variables the
    # two choices of survivor drop different head positions, so both are
    # produced; otherwise a head variable survives, falling back to name
    # order when neither is in the head.
    variables = sorted(base.variables(), key=lambda v: v.name)
    for left, right in itertools.combinations(variables, 2):
        survivors: list[tuple[Variable, Variable]]
        if left in head_set and right in head_set:
            if biased:
                continue
            survivors = [(left, right), (right, left)]
        elif left in head_set:
            survivors = [(left, right)]
        elif right in head_set:
            survivors = [(right, left)]
        else:
            survivors = [(left, right)]
        for keep, drop in survivors:
            mapping = {drop: keep}
            head = tuple(v for v in base.head if v != drop)
            add(ConjunctiveQuery(head, substitute_terms(base.body, mapping)))

    # Selection: bind a non-head variable to a symbolic constant.
    if config.enable_constants:
        for variable in variables:
            if variable in head_set:
                continue
            symbol = fresh_symbolic_constant(base.symbolic_constants())
            add(
                ConjunctiveQuery(
                    base.head, substitute_terms(base.body, {variable: symbol})
                )
            )

    # Projection: drop one head position (heads never shrink to nothing, and
    # key-atom mode keeps the head fixed).
    if base.arity >= 2 and not biased:
        for position in range(base.arity):
            head = base.head[:position] + base.head[position + 1 :]
            add(ConjunctiveQuery(head, base.body))

    return [results[key] for key in sorted(results)]


def immediate_generalizations(
    query: ConjunctiveQuery, config: MinerConfig
) -> list[ConjunctiveQuery]:
    """Strictly more general classes one inverse operation away.

    Inverse extension removes a body atom, inverse join splits one
    variable's occurrences in two, inverse selection re-opens a constant to
    a fresh variable, and inverse projection extends the head by an existing
    body variable.  Results are minimized and canonically renamed; anything
    equivalent to (or not actually more general than) the input is dropped,
    as is anything outside the key-atom language when one is configured.
    """
    base = canonicalize(query)
    results: dict[str, ConjunctiveQuery] = {}
    anchor_relation = (
        config.key_atom.relation if config.key_atom is not None else None
    )

    def add(candidate: ConjunctiveQuery, *, check_strict: bool) -> None:
        # every inverse operation admits a substitution carrying its result's
        # body onto the base body while covering the head, so the base is
        # always at least as specific as the candidate; only equivalence has
        # to be ruled out, and only where construction does not already
        # guarantee strictness.  Both that check and the key-atom language
        # check are invariant under equivalence, so they run on the raw
        # candidate before the cost of canonicalizing it.
        if anchor_relation is not None:
            if Atom(anchor_relation, candidate.head) not in candidate.body:
                return
        if check_strict and is_diagonally_contained(candidate, base):
            return
        key, reduced = _class_of(candidate, config)
        results.setdefault(key, reduced)

    head_set = set(base.head)
    body = _sorted_body(base)

    # Inverse extension: drop an atom, unless that strands a head variable.
    # The base body is minimized, so the rest never maps onto the whole and
    # the result is strictly more general.
    if len(body) > 1:
        for atom in body:
            remaining = base.body - {atom}
            covered = {
                term
                for other in remaining
                for term in other.args
                if isinstance(term, Variable)
            }
            if head_set <= covered:
                add(ConjunctiveQuery(base.head, remaining), check_strict=False)

    # Inverse join: split one variable's occurrences between itself and a
    # fresh variable, every way that leaves both sides non-empty.  A split
    # can collapse back into the base class, so strictness is checked.  For
    # a non-head variable the fresh name is interchangeable with the old
    # one, so complementary splits coincide and only the half where the
    # first site moves is enumerated.
    for variable in sorted(base.variables(), key=lambda v: v.name):
        sites = _variable_sites(base, variable)
        if len(sites) < 2:
            continue
        fresh = fresh_variable(_used_names(base))
        step = 2 if variable not in head_set else 1
        for mask in range(1, 2 ** len(sites) - 1, step):
            moved = {
                sites[index] for index in range(len(sites)) if mask >> index & 1
            }
            add(
                ConjunctiveQuery(base.head, _rebuild_body(body, moved, fresh)),
                check_strict=True,
            )

    # Inverse selection: symbolic constants re-open wholesale (strict, since
    # no homomorphism can reintroduce the vanished symbol); literal constants
    # re-open at any non-empty subset of their occurrences.
    for symbol in sorted(base.symbolic_constants(), key=lambda s: s.index):
        fresh = fresh_variable(_used_names(base))
        add(
            ConjunctiveQuery(
                base.head, substitute_terms(base.body, {symbol: fresh})
            ),
            check_strict=False,
        )
    for constant in sorted(base.constants(), key=lambda c: c.value):
        sites = _variable_sites(base, constant)
        fresh = fresh_variable(_used_names(base))
        for mask in range(1, 2 ** len(sites)):
            moved = {
                sites[index] for index in range(len(sites)) if mask >> index & 1
            }
            add(
                ConjunctiveQuery(base.head, _rebuild_body(body, moved, fresh)),
                check_strict=True,
            )

    # Inverse projection: put an existing non-head variable into the head.
    # The wider head can never be covered back, so the result is strict.
    if config.key_atom is None:
        for variable in sorted(base.variables() - head_set, key=lambda v: v.name):
            add(ConjunctiveQuery(base.head + (variable,), base.body), check_strict=False)

    return [results[key] for key in sorted(results)]


def prune_candidates(
    candidates: list[ConjunctiveQuery], state: MinerState
) -> list[ConjunctiveQuery]:
    """Keep the candidates whose every immediate generalization is frequent.

    Candidates already seen (any earlier level, either outcome) are dropped
    outright.  The rest are admitted only when all their generalizations are
    in the frequent index; callers decide what to do with the remainder.
    """
    seen = state.candidate_keys()
    admitted = []
    for candidate in candidates:
        key = state.key(candidate)
        if key in seen:
            continue
        generalizations = immediate_generalizations(candidate, state.config)
        if all(
            state.key(parent) in state.frequent_index for parent in generalizations
        ):
            admitted.append(candidate)
    return admitted


def _measure(
    query: ConjunctiveQuery, instance: Instance, minsup: int
) -> tuple[int, GroupedSupport | None] | None:
    """Support of a candidate, or None when it misses the threshold."""
    if query.symbolic_constants():
        grouped = support_grouped(query, instance, minsup=minsup)
        if not grouped:
            return None
        return grouped.best(), grouped
    count = support(query, instance)
    if count < minsup:
        return None
    return count, None


def run_phase1(instance: Instance, config: MinerConfig, jobs: int = 1) -> MinerState:
    """Mine every frequent query class reachable within the configured language.

    Each iteration admits the pooled candidates whose generalizations are all
    frequent, evaluates them (in parallel when ``jobs`` exceeds one), then
    refills the pool with the specializations of the newly frequent classes.
    Classes with a known-infrequent generalization are discarded unevaluated.
    The run ends when an iteration admits nothing.
    """
    if jobs < 1:
        raise ConfigError(f"jobs must be at least 1, got {jobs}")
    state = MinerState(config=config, schema=instance.schema)
    generalization_cache: dict[str, list[str]] = {}

    pending: dict[str, ConjunctiveQuery] = {}
    for query in initial_candidates(instance.schema, config):
        pending[state.key(query)] = query

    level_number = 0
    while True:
        level_number += 1
        admitted: list[tuple[str, ConjunctiveQuery]] = []
        still_pending: dict[str, ConjunctiveQuery] = {}
        for key in sorted(pending):
            query = pending[key]
            if key in state.frequent_index or key in state.infrequent_index:
                continue
            if key not in generalization_cache:
                generalization_cache[key] = [
                    state.key(parent)
                    for parent in immediate_generalizations(query, config)
                ]
            parent_keys = generalization_cache[key]
            if any(parent in state.infrequent_index for parent in parent_keys):
                state.infrequent_index.add(key)
                continue
            if all(parent in state.frequent_index for parent in parent_keys):
                admitted.append((key, query))
            else:
                still_pending[key] = query

        if not admitted:
            break

        queries = [query for _, query in admitted]
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as executor:
                outcomes = list(
                    executor.map(lambda q: _measure(q, instance, config.minsup), queries)
                )
        else:
            outcomes = [_measure(query, instance, config.minsup) for query in queries]

        frequent_keys = []
        for (key, query), outcome in zip(admitted, outcomes):
            if outcome is None:
                state.infrequent_index.add(key)
                continue
            count, grouped = outcome
            state.frequent_index[key] = QueryRecord(
                query=query,
                support=count,
                level=level_number,
                frequent_constants=grouped,
            )
            frequent_keys.append(key)
            for child in specializations(query, instance.schema, config):
                child_key = state.key(child)
                if (
                    child_key not in state.frequent_index
                    and child_key not in state.infrequent_index
                    and child_key not in still_pending
                ):
                    still_pending[child_key] = child

        state.levels.append(
            Level(
                number=level_number,
                candidate_keys=tuple(key for key, _ in admitted),
                frequent_keys=tuple(frequent_keys),
            )
        )
        pending = still_pending

    return state
