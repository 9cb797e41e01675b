"""Depth-first constraint-aware pattern search over a case database.

The search grows patterns one item at a time, PrefixSpan style: each
node keeps, per supporting positive sequence, the position of the
leftmost embedding's tail. Extension candidates are exactly the items
occurring after those tails, so the enumeration is complete, and the
leftmost frontier makes per-node work linear in the projected suffixes.

Constraints steer the search through their evaluation class:

* prunable-bound violations (positive support below the threshold, a
  switch count already past an upper bound) kill the whole subtree;
* monotone constraints and switch equality gate emission;
* the discriminative filter (enough supporters whose own negative
  sequence lacks the pattern) is checked last and lazily, since
  negative matching is the expensive part and prunes nothing.

Results are canonically sorted by (length, item order), so repeated and
multi-threaded runs serialize identically.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

from .builder import CaseDatabase
from .errors import MissingNegativeWindow
from .model import (
    Embedding,
    EventSequence,
    Item,
    Pattern,
    PatternTuple,
    find_embeddings,
    supports,
)
from .query import MiningTask

EMBEDDINGS_ALL = "all"
EMBEDDINGS_WITNESS = "witness"


class Decision(Enum):
    EMIT = "emit"
    EXTEND_ONLY = "extend_only"
    PRUNE = "prune"


@dataclass(frozen=True)
class SearchNode:
    """Externally visible search state for one candidate pattern.

    `frontiers` maps each supporting patient to the 0-based position of
    the leftmost embedding's last matched event in their positive
    sequence. `switch_counts` and `contains_satisfied` are aligned with
    the task's switch_constraints() and contains_constraints() orders.
    """

    pattern: Pattern
    frontiers: Mapping[str, int]
    support: frozenset
    switch_counts: tuple[int, ...] = ()
    contains_satisfied: tuple[bool, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "frontiers", dict(self.frontiers))
        object.__setattr__(self, "support", frozenset(self.support))
        if self.support != frozenset(self.frontiers):
            raise ValueError("support set must equal the patients holding a frontier")


@dataclass(frozen=True)
class MiningOptions:
    embeddings: str = EMBEDDINGS_ALL
    max_len: int | None = None
    prune: bool = True
    threads: int = 1
    max_nodes: int | None = None
    max_seconds: float | None = None

    def __post_init__(self) -> None:
        if self.embeddings not in (EMBEDDINGS_ALL, EMBEDDINGS_WITNESS):
            raise ValueError(f"embeddings mode must be all or witness, got {self.embeddings!r}")
        if self.max_len is not None and self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True)
class MiningResult:
    """Sorted patterns plus an explicit completeness flag.

    `complete` is False when a node or time budget ran out; the patterns
    found so far are still returned, never silently truncated.
    """

    patterns: tuple[PatternTuple, ...]
    complete: bool
    nodes_expanded: int
    elapsed_seconds: float


def positive_support(pattern: Pattern, database: CaseDatabase) -> frozenset:
    """Patients whose positive sequence contains the pattern."""
    return frozenset(
        pair.patient for pair in database if supports(pattern, pair.positive)
    )


def discriminative_support(pattern: Pattern, database: CaseDatabase) -> frozenset:
    """Patients supporting the pattern positively but not negatively.

    A patient with an empty negative sequence counts as soon as their
    positive sequence matches: nothing can match inside an empty
    sequence.
    """
    result = set()
    for pair in database:
        if pair.negative is None:
            raise MissingNegativeWindow(
                f"patient {pair.patient} has no negative window"
            )
        if supports(pattern, pair.positive) and not supports(pattern, pair.negative):
            result.add(pair.patient)
    return frozenset(result)


def count_switches(pattern: Pattern, attribute_index: int) -> int:
    """Adjacent position pairs whose attribute values differ."""
    items = pattern.items
    return sum(
        1
        for left, right in zip(items, items[1:])
        if left.values[attribute_index] != right.values[attribute_index]
    )


def _decide(
    support_count: int,
    switch_counts: Sequence[int],
    contains_flags: Sequence[bool],
    task: MiningTask,
    discr_count: Callable[[], int],
) -> Decision:
    """Single source of constraint semantics for engine and adapter.

    Prune when no extension can recover (support bound, overshot switch
    bound); emit when every monotone constraint and output filter holds;
    extend otherwise. The discriminative count is only requested when
    everything else already passed.
    """
    if support_count < task.min_support:
        return Decision.PRUNE
    switches = task.switch_constraints()
    for count, constraint in zip(switch_counts, switches):
        if constraint.comparator in ("==", "<=") and count > constraint.value:
            return Decision.PRUNE
    emittable = all(contains_flags)
    if emittable:
        for count, constraint in zip(switch_counts, switches):
            if constraint.comparator == "==" and count != constraint.value:
                emittable = False
                break
            if constraint.comparator == ">=" and count < constraint.value:
                emittable = False
                break
    if emittable and task.discriminative and discr_count() < task.min_support:
        emittable = False
    return Decision.EMIT if emittable else Decision.EXTEND_ONLY


def check_constraints(
    node: SearchNode, task: MiningTask, database: CaseDatabase | None = None
) -> Decision:
    """Classify one search node: emit, extend_only, or prune.

    The discriminative filter needs the database to match negative
    sequences; passing database=None is fine for tasks without it.
    """

    def discr() -> int:
        if database is None:
            raise ValueError("the discriminative filter needs the database")
        return len(discriminative_support(node.pattern, database))

    return _decide(len(node.support), node.switch_counts, node.contains_satisfied, task, discr)


class _Budget:
    """Shared node/time budget; spend() is False once anything ran out."""

    __slots__ = ("max_nodes", "deadline", "nodes", "exhausted", "_lock")

    def __init__(self, max_nodes: int | None, max_seconds: float | None) -> None:
        self.max_nodes = max_nodes
        self.deadline = None if max_seconds is None else time.monotonic() + max_seconds
        self.nodes = 0
        self.exhausted = False
        self._lock = threading.Lock()

    def spend(self) -> bool:
        with self._lock:
            if self.exhausted:
                return False
            self.nodes += 1
            if self.max_nodes is not None and self.nodes > self.max_nodes:
                self.exhausted = True
                return False
            if self.deadline is not None and time.monotonic() > self.deadline:
                self.exhausted = True
                return False
            return True


class _Prepared:
    """Interned view of the database: items replaced by dense ids.

    Ids are assigned in canonical item order, so ascending id order is
    ascending output order and no per-candidate key computation happens
    in the search loop.
    """

    __slots__ = (
        "task",
        "patients",
        "pos_seqs",
        "pos_ids",
        "neg_ids",
        "items",
        "switch_values",
        "switch_bounded",
        "contains_ids",
        "max_len",
    )

    def __init__(self, task: MiningTask, database: CaseDatabase, options: MiningOptions) -> None:
        self.task = task
        self.patients = list(database.patients())
        self.pos_seqs = [pair.positive for pair in database]
        universe = set()
        for pair in database:
            universe.update(pair.positive.items())
            if pair.negative is not None:
                universe.update(pair.negative.items())
        self.items = sorted(universe, key=lambda it: it.sort_key())
        ids = {item: i for i, item in enumerate(self.items)}
        self.pos_ids = [[ids[item] for item in pair.positive.items()] for pair in database]
        self.neg_ids = None
        if database.has_negatives:
            self.neg_ids = [
                [ids[item] for item in pair.negative.items()] for pair in database
            ]
        self.switch_values = [
            [item.values[c.attr_index] for item in self.items]
            for c in task.switch_constraints()
        ]
        # Upper bounds that allow pruning: == and <= overshoot is final.
        self.switch_bounded = [
            c.value if c.comparator in ("==", "<=") else None
            for c in task.switch_constraints()
        ]
        self.contains_ids = [
            frozenset(i for i, item in enumerate(self.items) if item.values[c.attr_index] == c.value)
            for c in task.contains_constraints()
        ]
        if options.max_len is not None:
            self.max_len = options.max_len
        else:
            self.max_len = max((len(seq) for seq in self.pos_ids), default=0)


def _contains_ids(haystack: Sequence[int], needle: Sequence[int]) -> bool:
    # Greedy two-pointer subsequence test over interned ids.
    at = 0
    end = len(haystack)
    for wanted in needle:
        while at < end and haystack[at] != wanted:
            at += 1
        if at == end:
            return False
        at += 1
    return True


def _child_occurrences(
    pos_ids: list[list[int]], occs: list[tuple[int, int]]
) -> dict[int, list[tuple[int, int]]]:
    """First occurrence of every item after each sequence's frontier."""
    children: dict[int, list[tuple[int, int]]] = {}
    for seq_idx, tail in occs:
        events = pos_ids[seq_idx]
        seen = set()
        for pos in range(tail + 1, len(events)):
            iid = events[pos]
            if iid not in seen:
                seen.add(iid)
                children.setdefault(iid, []).append((seq_idx, pos))
    return children


class _Searcher:
    def __init__(self, prep: _Prepared, options: MiningOptions, budget: _Budget) -> None:
        self.prep = prep
        self.options = options
        self.budget = budget
        self.found: list[PatternTuple] = []
        self.nodes = 0

    def run(self, roots: Iterable[tuple[int, list[tuple[int, int]]]]) -> list[PatternTuple]:
        for iid, occs in roots:
            self._visit((iid,), occs, self._root_switches(), self._root_contains(iid), 1)
            if self.budget.exhausted:
                break
        return self.found

    def _root_switches(self) -> tuple[int, ...]:
        return (0,) * len(self.prep.switch_values)

    def _root_contains(self, iid: int) -> tuple[bool, ...]:
        return tuple(iid in sat for sat in self.prep.contains_ids)

    def _visit(
        self,
        prefix: tuple[int, ...],
        occs: list[tuple[int, int]],
        switch_counts: tuple[int, ...],
        contains_flags: tuple[bool, ...],
        depth: int,
    ) -> None:
        if not self.budget.spend():
            return
        self.nodes += 1
        prep = self.prep
        task = prep.task
        discr_cache: list[frozenset | None] = [None]

        def discr_count() -> int:
            assert prep.neg_ids is not None
            supporters = set()
            for seq_idx, _ in occs:
                if not _contains_ids(prep.neg_ids[seq_idx], prefix):
                    supporters.add(prep.patients[seq_idx])
            discr_cache[0] = frozenset(supporters)
            return len(supporters)

        decision = _decide(len(occs), switch_counts, contains_flags, task, discr_count)
        if decision is Decision.PRUNE and self.options.prune:
            return
        if decision is Decision.EMIT:
            self.found.append(self._emit(prefix, occs, discr_cache[0]))
        if depth >= prep.max_len:
            return
        last = prefix[-1]
        for iid, child_occs in sorted(_child_occurrences(prep.pos_ids, occs).items()):
            if self.options.prune:
                if len(child_occs) < task.min_support:
                    continue
                overshoots = False
                for slot, bound in enumerate(prep.switch_bounded):
                    if bound is None:
                        continue
                    values = prep.switch_values[slot]
                    if switch_counts[slot] + (values[last] != values[iid]) > bound:
                        overshoots = True
                        break
                if overshoots:
                    continue
            child_switches = tuple(
                count + (prep.switch_values[slot][last] != prep.switch_values[slot][iid])
                for slot, count in enumerate(switch_counts)
            )
            child_contains = tuple(
                flag or iid in prep.contains_ids[slot]
                for slot, flag in enumerate(contains_flags)
            )
            self._visit(prefix + (iid,), child_occs, child_switches, child_contains, depth + 1)
            if self.budget.exhausted:
                return

    def _emit(
        self,
        prefix: tuple[int, ...],
        occs: list[tuple[int, int]],
        discr: frozenset | None,
    ) -> PatternTuple:
        prep = self.prep
        pattern = Pattern(tuple(prep.items[iid] for iid in prefix))
        limit = None if self.options.embeddings == EMBEDDINGS_ALL else 1
        embeddings = {}
        supported = set()
        for seq_idx, _ in occs:
            patient = prep.patients[seq_idx]
            supported.add(patient)
            embeddings[patient] = find_embeddings(pattern, prep.pos_seqs[seq_idx], limit=limit)
        return PatternTuple(
            pattern=pattern,
            supported=frozenset(supported),
            embeddings=embeddings,
            discriminative=discr if prep.task.discriminative else None,
        )


def mine(
    task: MiningTask, database: CaseDatabase, options: MiningOptions | None = None
) -> MiningResult:
    """Enumerate every pattern satisfying the task; sound and complete.

    The emitted set never depends on `prune` or `threads`; those only
    trade work for time. Budgets may cut the search short, in which case
    the result is flagged incomplete.
    """
    options = options or MiningOptions()
    started = time.monotonic()
    if task.discriminative and len(database) and not database.has_negatives:
        raise MissingNegativeWindow(
            "the task is discriminative but the database has no negative sequences"
        )
    prep = _Prepared(task, database, options)
    budget = _Budget(options.max_nodes, options.max_seconds)
    root_occs = _child_occurrences(prep.pos_ids, [(i, -1) for i in range(len(prep.pos_ids))])
    roots = sorted(root_occs.items())
    collected: list[PatternTuple] = []
    nodes = 0
    if prep.max_len >= 1 and roots:
        if options.threads == 1:
            searcher = _Searcher(prep, options, budget)
            collected = searcher.run(roots)
            nodes = searcher.nodes
        else:
            searchers = [_Searcher(prep, options, budget) for _ in range(options.threads)]
            slices = [roots[w :: options.threads] for w in range(options.threads)]
            with ThreadPoolExecutor(max_workers=options.threads) as pool:
                futures = [
                    pool.submit(searcher.run, chunk)
                    for searcher, chunk in zip(searchers, slices)
                ]
                for future in futures:
                    collected.extend(future.result())
            nodes = sum(searcher.nodes for searcher in searchers)
    collected.sort(key=lambda pt: pt.pattern.sort_key())
    return MiningResult(
        patterns=tuple(collected),
        complete=not budget.exhausted,
        nodes_expanded=nodes,
        elapsed_seconds=time.monotonic() - started,
    )
