"""Brute-force reference miner, for tests only.

Enumerates every candidate pattern up to a length bound as a plain
cartesian product over the positive-sequence alphabet and evaluates
each constraint directly from its definition. No projection, no
pruning, no shared state with the engine's search: agreement between
the two is evidence, not tautology.

Items seen only in negative sequences are not enumerated; their
patterns have zero positive support and can never reach a threshold
of at least one.
"""

from __future__ import annotations

import itertools

from .builder import CaseDatabase
from .errors import MissingNegativeWindow, TooLarge
from .model import Pattern, PatternTuple, find_embeddings
from .query import MiningTask

#: Refuse instances whose candidate count exceeds this.
CANDIDATE_LIMIT = 1_000_000


def _candidate_count(alphabet_size: int, max_len: int) -> int:
    return sum(alphabet_size**length for length in range(1, max_len + 1))


def oracle_mine(
    task: MiningTask, database: CaseDatabase, max_len: int
) -> tuple[PatternTuple, ...]:
    """All satisfying PatternTuples up to max_len, canonically sorted."""
    if task.discriminative and len(database) and not database.has_negatives:
        raise MissingNegativeWindow(
            "the task is discriminative but the database has no negative sequences"
        )
    alphabet = set()
    for pair in database:
        alphabet.update(pair.positive.items())
    count = _candidate_count(len(alphabet), max_len)
    if count > CANDIDATE_LIMIT:
        raise TooLarge(
            f"{count} candidate patterns exceed the oracle limit of {CANDIDATE_LIMIT}"
        )
    ordered_alphabet = sorted(alphabet, key=lambda item: item.sort_key())

    found = []
    for length in range(1, max_len + 1):
        for items in itertools.product(ordered_alphabet, repeat=length):
            pattern = Pattern(items)
            embeddings = {}
            for pair in database:
                found_embs = find_embeddings(pattern, pair.positive)
                if found_embs:
                    embeddings[pair.patient] = found_embs
            supported = frozenset(embeddings)
            if not _satisfies(task, pattern, supported):
                continue
            discr = None
            if task.discriminative:
                discr = frozenset(
                    pair.patient
                    for pair in database
                    if pair.patient in supported
                    and not find_embeddings(pattern, pair.negative, limit=1)
                )
                if len(discr) < task.min_support:
                    continue
            found.append(
                PatternTuple(
                    pattern=pattern,
                    supported=supported,
                    embeddings=embeddings,
                    discriminative=discr,
                )
            )
    found.sort(key=lambda pt: pt.pattern.sort_key())
    return tuple(found)


def _satisfies(task: MiningTask, pattern: Pattern, supported: frozenset) -> bool:
    """Every non-discriminative constraint, evaluated from first principles."""
    if len(supported) < task.min_support:
        return False
    for constraint in task.contains_constraints():
        if not any(item.values[constraint.attr_index] == constraint.value for item in pattern.items):
            return False
    for constraint in task.switch_constraints():
        values = [item.values[constraint.attr_index] for item in pattern.items]
        switches = sum(1 for a, b in zip(values, values[1:]) if a != b)
        if constraint.comparator == "==" and switches != constraint.value:
            return False
        if constraint.comparator == "<=" and switches > constraint.value:
            return False
        if constraint.comparator == ">=" and switches < constraint.value:
            return False
    return True
