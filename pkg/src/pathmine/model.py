"""Core domain model: items, timestamped sequences, patterns, embeddings.

A pattern is an ordered list of items. It is matched inside a sequence by
an *embedding*: a strictly increasing list of 1-based positions whose
items equal the pattern items position by position. Matching is over list
positions, not timestamps, so two events sharing a day can both be
consumed by consecutive pattern positions.

All types here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

AttributeValue = Union[str, int]

POSITIVE = "positive"
NEGATIVE = "negative"

#: (owner id, polarity) pair naming one sequence.
SequenceId = tuple[str, str]

#: Strictly increasing 1-based positions witnessing a pattern in a sequence.
Embedding = tuple[int, ...]


def _value_key(value: AttributeValue) -> tuple:
    # Total order over mixed str/int attribute values.
    if isinstance(value, int):
        return (0, value, "")
    return (1, 0, value)


@dataclass(frozen=True)
class Item:
    """One reified event: a fixed-order tuple of attribute values.

    Every item inside one mining task shares the same attribute schema
    (names and order); the schema itself lives on the task. Equality is
    exact tuple equality over all attribute values.
    """

    values: tuple[AttributeValue, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError("an item needs at least one attribute value")
        for value in self.values:
            if not isinstance(value, (str, int)):
                raise ValueError(f"attribute values must be str or int, got {value!r}")

    def sort_key(self) -> tuple:
        return tuple(_value_key(v) for v in self.values)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        inner = ",".join(str(v) for v in self.values)
        return f"Item({inner})"


@dataclass(frozen=True)
class EventSequence:
    """Canonically sorted, timestamped item list for one (owner, polarity).

    Events are sorted by (timestamp, item attribute tuple) on
    construction, so embeddings are deterministic regardless of input
    order. Timestamps are non-negative day numbers.
    """

    sequence_id: SequenceId
    events: tuple[tuple[int, Item], ...] = ()

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.events, key=lambda ev: (ev[0], ev[1].sort_key())))
        for day, _ in ordered:
            if day < 0:
                raise ValueError(f"negative day {day} in sequence {self.sequence_id}")
        object.__setattr__(self, "events", ordered)

    def items(self) -> tuple[Item, ...]:
        return tuple(item for _, item in self.events)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[tuple[int, Item]]:
        return iter(self.events)


@dataclass(frozen=True)
class Pattern:
    """Ordered item list sought as a subsequence; empty only as search root."""

    items: tuple[Item, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))

    def extended(self, item: Item) -> "Pattern":
        return Pattern(self.items + (item,))

    def sort_key(self) -> tuple:
        """Canonical output order: by length, then lexicographic item order."""
        return (len(self.items), tuple(it.sort_key() for it in self.items))

    def __len__(self) -> int:
        return len(self.items)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return "Pattern<" + ", ".join(repr(it) for it in self.items) + ">"


@dataclass(frozen=True, eq=True)
class PatternTuple:
    """One mining result: a pattern, its support set, and its embeddings.

    `supported` must equal exactly the keys of `embeddings` holding a
    non-empty embedding set. `discriminative`, when present, is the
    subset of supporters whose paired negative sequence does not support
    the pattern.
    """

    pattern: Pattern
    supported: frozenset
    embeddings: Mapping = field(default_factory=dict)
    discriminative: frozenset | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "supported", frozenset(self.supported))
        cleaned = {key: frozenset(embs) for key, embs in dict(self.embeddings).items() if embs}
        object.__setattr__(self, "embeddings", cleaned)
        if self.supported != frozenset(cleaned):
            raise ValueError("supported set must equal the keys with a non-empty embedding set")
        if self.discriminative is not None:
            discr = frozenset(self.discriminative)
            object.__setattr__(self, "discriminative", discr)
            if not discr <= self.supported:
                raise ValueError("discriminative supporters must be a subset of the support set")


def find_embeddings(
    pattern: Pattern, sequence: EventSequence, limit: int | None = None
) -> frozenset[Embedding]:
    """Every strictly increasing 1-based position list witnessing `pattern`.

    The empty pattern has exactly one witness, the empty embedding. With
    `limit`, enumeration stops after that many embeddings; witnesses are
    produced in leftmost-lexicographic order, so `limit=1` yields the
    leftmost one.
    """
    wanted = pattern.items
    if not wanted:
        return frozenset({()})
    if limit is not None and limit < 1:
        raise ValueError("limit must be at least 1")
    events = sequence.events
    total = len(events)
    depth_last = len(wanted) - 1
    found: list[Embedding] = []

    def walk(depth: int, start: int, prefix: Embedding) -> bool:
        target = wanted[depth]
        for pos in range(start, total):
            if events[pos][1] == target:
                witness = prefix + (pos + 1,)
                if depth == depth_last:
                    found.append(witness)
                    if limit is not None and len(found) >= limit:
                        return True
                elif walk(depth + 1, pos + 1, witness):
                    return True
        return False

    walk(0, 0, ())
    return frozenset(found)


def supports(pattern: Pattern, sequence: EventSequence) -> bool:
    """True iff `sequence` contains at least one embedding of `pattern`.

    Greedy leftmost scan; never materializes the embedding set.
    """
    events = sequence.events
    total = len(events)
    pos = 0
    for target in pattern.items:
        while pos < total and events[pos][1] != target:
            pos += 1
        if pos == total:
            return False
        pos += 1
    return True
