"""Shared test helpers: canonical query text and random instance builders."""

from __future__ import annotations

import random

from pathmine.builder import CaseDatabase, CasePair, IndexEventRule, WindowSpec
from pathmine.model import NEGATIVE, POSITIVE, EventSequence, Item
from pathmine.query import (
    MONOTONE,
    OUTPUT_FILTER,
    PRUNABLE_BOUND,
    CompiledConstraint,
    MiningTask,
)

#: The study query exercised throughout the suite.
STUDY_QUERY = """\
index_event first diagnosis in {G40, G41};
event delivery where atc in {N03AX09, N03AX14, N03AX11, N03AG01, N03AF01}
      as (atc, group, generic);
window positive (index-90, index);
window negative (index-180, index-90);
min_support 20;
constraint discriminative;
constraint contains_value(generic, 1);
constraint contains_value(generic, 0);
constraint switch_count(generic) == 1;
"""

SCHEMA = ("atc", "group", "generic")

#: Small mixed alphabet covering both generic flags and two classes.
ALPHABET = (
    Item(("A1", "10", 0)),
    Item(("A1", "11", 1)),
    Item(("A2", "20", 0)),
    Item(("A2", "21", 1)),
)


def make_seq(owner: str, polarity: str, items, days=None) -> EventSequence:
    items = tuple(items)
    if days is None:
        days = tuple(range(len(items)))
    return EventSequence((owner, polarity), tuple(zip(days, items)))


def make_task(
    f_min: int = 1,
    discriminative: bool = False,
    contains=(),
    switch=(),
    schema=SCHEMA,
    class_filter=frozenset({"A1", "A2"}),
) -> MiningTask:
    """Assemble a MiningTask directly, bypassing the query front end.

    contains: iterable of (attribute, value); switch: iterable of
    (attribute, comparator, value).
    """
    constraints = [
        CompiledConstraint(kind="min_support", evaluation=PRUNABLE_BOUND, value=f_min)
    ]
    if discriminative:
        constraints.append(
            CompiledConstraint(kind="discriminative", evaluation=OUTPUT_FILTER, value=f_min)
        )
    for attribute, value in contains:
        constraints.append(
            CompiledConstraint(
                kind="contains_value",
                evaluation=MONOTONE,
                attribute=attribute,
                attr_index=schema.index(attribute),
                value=value,
            )
        )
    for attribute, comparator, value in switch:
        evaluation = {"==": OUTPUT_FILTER, "<=": PRUNABLE_BOUND, ">=": MONOTONE}[comparator]
        constraints.append(
            CompiledConstraint(
                kind="switch_count",
                evaluation=evaluation,
                attribute=attribute,
                attr_index=schema.index(attribute),
                comparator=comparator,
                value=value,
            )
        )
    return MiningTask(
        index_rule=IndexEventRule(frozenset({"G40", "G41"})),
        schema=schema,
        class_filter=class_filter,
        positive_window=WindowSpec(POSITIVE, -90, 0),
        negative_window=WindowSpec(NEGATIVE, -180, -90) if discriminative else None,
        min_support=f_min,
        constraints=tuple(constraints),
    )


def random_instance(seed: int):
    """Seeded (task, database) pair within the oracle-friendly envelope.

    At most 8 patients, sequences of length at most 6, alphabet of at
    most 4 items, f_min in {1,2,3}; the seed bits toggle the
    discriminative, contains_value, and switch_count families.
    """
    rng = random.Random(seed)
    discriminative = bool(seed & 1)
    contains = [("generic", rng.choice([0, 1]))] if seed & 2 else []
    switch = []
    if seed & 4:
        switch.append(("generic", rng.choice(["==", "<=", ">="]), rng.randint(0, 2)))
    f_min = [1, 2, 3][seed % 3]
    alphabet = ALPHABET[: rng.randint(1, 4)]

    pairs = []
    for i in range(rng.randint(1, 8)):
        def one(polarity):
            length = rng.randint(0, 6)
            days = sorted(rng.sample(range(100), length))
            return make_seq(f"p{i}", polarity, (rng.choice(alphabet) for _ in range(length)), days)

        pairs.append(
            CasePair(f"p{i}", one(POSITIVE), one(NEGATIVE) if discriminative else None)
        )
    task = make_task(
        f_min=f_min, discriminative=discriminative, contains=contains, switch=switch
    )
    return task, CaseDatabase(tuple(pairs))
