"""Core model: items, sequences, patterns, embedding search."""

import pytest
from hypothesis import given, strategies as st

from pathmine.model import (
    NEGATIVE,
    POSITIVE,
    EventSequence,
    Item,
    Pattern,
    PatternTuple,
    find_embeddings,
    supports,
)

from conftest import make_seq

A = Item(("N03AG01", "438", 1))
B = Item(("N03AX14", "1023", 0))
C = Item(("N03AX09", "500", 1))


class TestItem:
    def test_values_are_preserved(self):
        assert A.values == ("N03AG01", "438", 1)

    def test_empty_item_rejected(self):
        with pytest.raises(ValueError):
            Item(())

    def test_non_scalar_value_rejected(self):
        with pytest.raises(ValueError):
            Item((1.5,))

    def test_equality_is_tuple_equality(self):
        assert Item(("A", 1)) == Item(("A", 1))
        assert Item(("A", 1)) != Item(("A", 0))

    def test_sort_key_orders_ints_before_strings(self):
        # Mixed-type values must still have a total order.
        assert Item((0,)).sort_key() < Item(("0",)).sort_key()


class TestEventSequence:
    def test_events_sorted_by_day_then_item(self):
        seq = EventSequence(("p1", POSITIVE), ((5, B), (3, A), (5, A)))
        assert seq.events == ((3, A), (5, A), (5, B))

    def test_negative_day_rejected(self):
        with pytest.raises(ValueError):
            EventSequence(("p1", POSITIVE), ((-1, A),))

    def test_empty_sequence(self):
        seq = EventSequence(("p1", NEGATIVE))
        assert len(seq) == 0
        assert seq.items() == ()

    def test_construction_order_irrelevant(self):
        forward = EventSequence(("p", POSITIVE), ((1, A), (2, B)))
        backward = EventSequence(("p", POSITIVE), ((2, B), (1, A)))
        assert forward == backward


class TestPattern:
    def test_extended_appends(self):
        assert Pattern((A,)).extended(B) == Pattern((A, B))

    def test_sort_key_orders_by_length_first(self):
        assert Pattern((B,)).sort_key() < Pattern((A, A)).sort_key()

    def test_sort_key_lexicographic_within_length(self):
        assert Pattern((A, A)).sort_key() < Pattern((A, B)).sort_key()


class TestPatternTuple:
    def test_supported_must_match_embedding_keys(self):
        with pytest.raises(ValueError):
            PatternTuple(Pattern((A,)), frozenset({"p1"}), {"p2": frozenset({(1,)})})

    def test_empty_embedding_sets_dropped(self):
        pt = PatternTuple(
            Pattern((A,)),
            frozenset({"p1"}),
            {"p1": frozenset({(1,)}), "p2": frozenset()},
        )
        assert set(pt.embeddings) == {"p1"}

    def test_discriminative_must_be_subset(self):
        with pytest.raises(ValueError):
            PatternTuple(
                Pattern((A,)),
                frozenset({"p1"}),
                {"p1": frozenset({(1,)})},
                discriminative=frozenset({"p1", "p9"}),
            )


class TestFindEmbeddings:
    def test_single_item(self):
        seq = make_seq("p", POSITIVE, [A, B, A])
        assert find_embeddings(Pattern((A,)), seq) == {(1,), (3,)}

    def test_pair_enumerates_all(self):
        seq = make_seq("p", POSITIVE, [A, A, B])
        assert find_embeddings(Pattern((A, B)), seq) == {(1, 3), (2, 3)}

    def test_absent_pattern(self):
        seq = make_seq("p", POSITIVE, [A, A])
        assert find_embeddings(Pattern((B,)), seq) == frozenset()

    def test_empty_pattern_has_one_empty_embedding(self):
        seq = make_seq("p", POSITIVE, [A])
        assert find_embeddings(Pattern(), seq) == {()}
        assert find_embeddings(Pattern(), make_seq("p", POSITIVE, [])) == {()}

    def test_limit_one_returns_leftmost(self):
        seq = make_seq("p", POSITIVE, [A, A, B, B])
        assert find_embeddings(Pattern((A, B)), seq, limit=1) == {(1, 3)}

    def test_limit_must_be_positive(self):
        with pytest.raises(ValueError):
            find_embeddings(Pattern((A,)), make_seq("p", POSITIVE, [A]), limit=0)

    def test_same_day_events_matched_by_position(self):
        # Two events on one day are distinct positions after canonical sort.
        seq = EventSequence(("p", POSITIVE), ((7, A), (7, B)))
        assert find_embeddings(Pattern((A, B)), seq) == {(1, 2)}


items_st = st.sampled_from([A, B, C])
sequences_st = st.lists(items_st, max_size=8)
patterns_st = st.lists(items_st, min_size=1, max_size=3)


@given(sequences_st, patterns_st)
def test_supports_agrees_with_find_embeddings(seq_items, pattern_items):
    seq = make_seq("p", POSITIVE, seq_items)
    pattern = Pattern(tuple(pattern_items))
    assert supports(pattern, seq) == bool(find_embeddings(pattern, seq))


@given(sequences_st, patterns_st)
def test_embeddings_strictly_increasing_and_in_range(seq_items, pattern_items):
    seq = make_seq("p", POSITIVE, seq_items)
    pattern = Pattern(tuple(pattern_items))
    for emb in find_embeddings(pattern, seq):
        assert len(emb) == len(pattern)
        assert all(1 <= pos <= len(seq) for pos in emb)
        assert all(a < b for a, b in zip(emb, emb[1:]))
        # Positions must actually witness the pattern.
        assert all(seq.events[pos - 1][1] == item for pos, item in zip(emb, pattern.items))


@given(sequences_st)
def test_every_sequence_supports_the_empty_pattern(seq_items):
    assert supports(Pattern(), make_seq("p", POSITIVE, seq_items))
