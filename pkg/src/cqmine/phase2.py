"""Discovery of confident association rules between frequent queries.

A rule pairs two conjunctive queries with identical heads: an antecedent and
a consequent whose answers are a subset of the antecedent's.  Its confidence
is the ratio of the two supports, so it reads "of the tuples satisfying the
antecedent, this fraction also satisfies the consequent".

For each frequent consequent the search walks from the consequent itself
(the most confident rule possible) toward ever more general antecedents.
Generalization steps are the inverses of the specialization rewritings that
built the query in the first place: removing an atom, splitting a merged
variable apart, and relaxing a constant back into a variable.  Because
merging variables or substituting constants can collapse two distinct atoms
into one, undoing those steps may have to *duplicate* an atom, and the walk
must pass through intermediate bodies that are equivalent to an earlier form
(they carry a redundant atom whose sole purpose is to be generalized
differently).  The walk therefore tracks raw bodies, deduplicated by their
canonical rendering without minimization, while rules are reported per
minimized equivalence class.

Support never shrinks under generalization, so confidence never grows along
the walk; a branch whose confidence already fell below the threshold can be
abandoned without losing any confident rule.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .containment import minimize
from .errors import ConfigError
from .evaluation import support
from .phase1 import MinerState
from .queries import (
    Atom,
    ConjunctiveQuery,
    Term,
    Variable,
    canonical_form,
    fresh_variable,
    instantiate,
    render_query,
)
from .relational import Instance

__all__ = [
    "AssociationRule",
    "RuleConfig",
    "antecedent_generalizations",
    "run_phase2",
]


# ---------------------------------------------------------------------------
# configuration and result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RuleConfig:
    """Thresholds controlling rule generation.

    ``minconf`` is kept as an exact fraction; strings such as ``"0.75"`` and
    floats are converted through their decimal reading so that command-line
    values compare exactly.  ``include_trivial`` additionally reports the
    rule pairing every consequent with itself (confidence 1).
    """

    minconf: Fraction
    include_trivial: bool = False

    def __post_init__(self) -> None:
        value = self.minconf
        try:
            if isinstance(value, float):
                value = Fraction(str(value))
            elif not isinstance(value, Fraction):
                value = Fraction(value)
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise ConfigError(f"minconf is not a valid fraction: {value!r}") from exc
        if not 0 < value <= 1:
            raise ConfigError(f"minconf must lie in (0, 1], got {value}")
        object.__setattr__(self, "minconf", value)


@dataclass(frozen=True, slots=True)
class AssociationRule:
    """``antecedent => consequent`` over queries with identical heads.

    ``support`` is the consequent's support; ``confidence`` is the exact
    ratio of consequent support to antecedent support.
    """

    antecedent: ConjunctiveQuery
    consequent: ConjunctiveQuery
    support: int
    confidence: Fraction

    def __post_init__(self) -> None:
        if self.support < 1:
            raise ConfigError(f"rule support must be positive, got {self.support}")
        if not 0 < self.confidence <= 1:
            raise ConfigError(
                f"rule confidence must lie in (0, 1], got {self.confidence}"
            )


# ---------------------------------------------------------------------------
# single-step generalization
# ---------------------------------------------------------------------------


def _inverse_substitutions(
    query: ConjunctiveQuery, target: Term, max_atoms: int
):
    """Yield every query that one substitution ``fresh -> target`` maps onto ``query``.

    This is the shared inverse of variable merging and constant selection.
    Each atom containing ``target`` is replaced by a non-empty set of
    variants, where a variant renames some of that atom's ``target``
    positions to a fresh variable; substituting the fresh variable back
    restores exactly the original body.  Atoms may gain several variants —
    that re-expands atoms the forward substitution had collapsed together —
    bounded by ``max_atoms``.  A variable target must survive somewhere
    (else the rewrite is a mere renaming, or drops a head variable); a
    constant target may disappear entirely.
    """
    body = sorted(query.body, key=str)
    holders = [atom for atom in body if target in atom.args]
    if not holders:
        return
    others = [atom for atom in body if target not in atom.args]
    budget = max_atoms - len(others)
    if budget < len(holders):
        return
    fresh = fresh_variable({v.name for v in query.variables()}, stem="g")
    variant_lists: list[list[Atom]] = []
    for atom in holders:
        positions = [i for i, arg in enumerate(atom.args) if arg == target]
        variants = []
        for count in range(len(positions) + 1):
            for flipped in itertools.combinations(positions, count):
                args = tuple(
                    fresh if index in flipped else arg
                    for index, arg in enumerate(atom.args)
                )
                variants.append(Atom(atom.relation, args))
        variant_lists.append(variants)
    target_is_variable = isinstance(target, Variable)

    def expand(index: int, chosen: list[Atom], remaining: int):
        if index == len(variant_lists):
            if not any(fresh in atom.args for atom in chosen):
                return  # nothing moved: identical to the original body
            atoms = frozenset(others) | frozenset(chosen)
            if target_is_variable and not any(
                target in atom.args for atom in atoms
            ):
                return  # pure renaming, or a head variable would vanish
            yield ConjunctiveQuery(query.head, atoms)
            return
        pending_holders = len(variant_lists) - index - 1
        widest = remaining - pending_holders
        for count in range(1, widest + 1):
            for subset in itertools.combinations(variant_lists[index], count):
                yield from expand(index + 1, chosen + list(subset), remaining - count)

    yield from expand(0, [], budget)


def _raw_generalization_steps(query: ConjunctiveQuery, max_atoms: int):
    """Yield the results of one inverse rewriting applied to ``query``.

    The head is preserved exactly, so every result contains ``query`` in the
    regular sense: the substitution (or atom inclusion) being undone is a
    homomorphism from the result's body back onto ``query``'s that fixes
    every head variable.
    """
    head_vars = set(query.head)
    body = sorted(query.body, key=str)
    if len(body) > 1:
        for atom in body:
            rest = frozenset(other for other in body if other != atom)
            rest_vars = {
                term
                for other in rest
                for term in other.args
                if isinstance(term, Variable)
            }
            if head_vars <= rest_vars:
                yield ConjunctiveQuery(query.head, rest)
    variables = sorted(query.variables(), key=lambda v: v.name)
    constants = sorted(query.constants(), key=lambda c: c.value)
    for term in (*variables, *constants):
        yield from _inverse_substitutions(query, term, max_atoms)


def antecedent_generalizations(
    query: ConjunctiveQuery, max_atoms: int
) -> list[ConjunctiveQuery]:
    """Strictly more general queries one inverse step away, same head.

    Results are minimized and canonically renamed, deduplicated, and sorted
    by their canonical text.  Rewritings whose minimized form is equivalent
    to ``query`` itself are dropped; the rule search still travels through
    them internally, because a later step applied to the redundant body can
    reach antecedents that no single step produces.
    """
    base_text, base = canonical_form(minimize(query))
    found: dict[str, ConjunctiveQuery] = {}
    for raw in _raw_generalization_steps(base, max_atoms):
        text, reduced = canonical_form(minimize(raw))
        if text != base_text:
            found.setdefault(text, reduced)
    return [found[key] for key in sorted(found)]


# ---------------------------------------------------------------------------
# the per-consequent walk
# ---------------------------------------------------------------------------


def _consequent_queries(state: MinerState) -> list[tuple[ConjunctiveQuery, int]]:
    """All frequent queries eligible as rule consequents, with supports.

    Placeholder-bearing discoveries contribute one consequent per frequent
    constant assignment: both sides of a rule must name the same concrete
    constant for the containment between them to hold, so placeholders are
    pinned down before rules are formed.  Instantiation can make an atom
    redundant, hence the minimization; duplicates arising from distinct
    discoveries are dropped (their supports necessarily agree).
    """
    consequents: list[tuple[ConjunctiveQuery, int]] = []
    seen: set[str] = set()
    for record in state.frequent_records():
        if record.frequent_constants is None:
            text, representative = canonical_form(record.query)
            if text not in seen:
                seen.add(text)
                consequents.append((representative, record.support))
        else:
            grouped = record.frequent_constants
            for assignment, count in grouped.sorted_items():
                mapping = dict(zip(grouped.symbols, assignment))
                text, representative = canonical_form(
                    minimize(instantiate(record.query, mapping))
                )
                if text not in seen:
                    seen.add(text)
                    consequents.append((representative, count))
    return consequents


def _support_of(
    query: ConjunctiveQuery,
    plain_key: str,
    state: MinerState,
    instance: Instance,
    memo: dict[str, int],
) -> int:
    """Antecedent support, from the frequent index when possible.

    Constant-free antecedents of a frequent consequent are themselves
    frequent and in the mined language, so the index usually answers
    directly; antecedents carrying constants (and antecedents outside an
    anchored language) are evaluated once and memoized.
    """
    cached = memo.get(plain_key)
    if cached is not None:
        return cached
    value: int | None = None
    if not query.constants() and not query.symbolic_constants():
        record = state.frequent_index.get(state.key(query))
        if record is not None and record.frequent_constants is None:
            value = record.support
    if value is None:
        value = support(query, instance)
    memo[plain_key] = value
    return value


def _rules_for_consequent(
    consequent: ConjunctiveQuery,
    consequent_support: int,
    state: MinerState,
    instance: Instance,
    config: RuleConfig,
    memo: dict[str, int],
) -> list[AssociationRule]:
    base_text, base = canonical_form(consequent)
    class_text = canonical_form(minimize(base))[0]
    max_atoms = state.config.max_atoms
    rules: list[AssociationRule] = []
    if config.include_trivial:
        rules.append(AssociationRule(base, base, consequent_support, Fraction(1)))
    visited = {base_text}
    emitted = {class_text}
    frontier = [base]
    while frontier:
        next_frontier: list[ConjunctiveQuery] = []
        for form in frontier:
            for raw in _raw_generalization_steps(form, max_atoms):
                raw_text, raw_form = canonical_form(raw)
                if raw_text in visited:
                    continue
                visited.add(raw_text)
                antecedent_text, antecedent = canonical_form(minimize(raw_form))
                antecedent_support = _support_of(
                    antecedent, antecedent_text, state, instance, memo
                )
                confidence = Fraction(consequent_support, antecedent_support)
                if confidence < config.minconf:
                    continue  # every further generalization is even less confident
                if antecedent_text not in emitted:
                    emitted.add(antecedent_text)
                    rules.append(
                        AssociationRule(antecedent, base, consequent_support, confidence)
                    )
                next_frontier.append(raw_form)
        frontier = next_frontier
    return rules


def run_phase2(
    state: MinerState,
    instance: Instance,
    config: RuleConfig,
    *,
    jobs: int = 1,
) -> list[AssociationRule]:
    """Generate every confident association rule over the discovered queries.

    Each frequent query (with placeholders instantiated) is taken in turn as
    a consequent, and its antecedents are explored from most to least
    confident.  Searches for different consequents are independent; with
    ``jobs`` above one they run on a thread pool, sharing the
    antecedent-support memo (concurrent writers only ever store identical
    values for a key, so the map stays consistent).  The result is sorted by
    descending confidence, then antecedent and consequent text.
    """
    if jobs < 1:
        raise ConfigError(f"jobs must be at least 1, got {jobs}")
    consequents = _consequent_queries(state)
    memo: dict[str, int] = {}

    def explore(entry: tuple[ConjunctiveQuery, int]) -> list[AssociationRule]:
        consequent, consequent_support = entry
        return _rules_for_consequent(
            consequent, consequent_support, state, instance, config, memo
        )

    if jobs == 1:
        batches = [explore(entry) for entry in consequents]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(explore, consequents))
    rules = [rule for batch in batches for rule in batch]
    rules.sort(
        key=lambda rule: (
            -rule.confidence,
            render_query(rule.antecedent),
            render_query(rule.consequent),
        )
    )
    return rules
