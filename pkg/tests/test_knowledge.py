"""Knowledge base: code table, reification, taxonomy closure."""

import pytest

from pathmine.errors import CycleError, DuplicateCode, UnknownCode
from pathmine.knowledge import CodeAttributes, DeliveryAttributes, Taxonomy
from pathmine.model import Item

ROWS = [
    ("C1", "N03AG01", "438", 1, {}),
    ("C2", "N03AX14", "1023", 0, {"strength": "50mg"}),
    ("C3", "N02BE01", "900", 0, {}),
]


def table() -> CodeAttributes:
    return CodeAttributes.from_rows(ROWS)


class TestCodeAttributes:
    def test_lookup(self):
        assert table().attributes("C1") == DeliveryAttributes("N03AG01", "438", 1)

    def test_unknown_code_raises(self):
        with pytest.raises(UnknownCode):
            table().attributes("C9")

    def test_case_insensitive_codes(self):
        kb = CodeAttributes.from_rows([("c1", "n03ax09", "77", 1, {})])
        assert kb.attributes("C1").atc == "N03AX09"

    def test_identical_duplicate_rows_tolerated(self):
        kb = CodeAttributes.from_rows(ROWS + [ROWS[0]])
        assert len(kb) == 3

    def test_conflicting_duplicate_raises(self):
        with pytest.raises(DuplicateCode):
            CodeAttributes.from_rows(ROWS + [("C1", "N03AG01", "439", 1, {})])

    def test_bad_generic_flag_rejected(self):
        with pytest.raises(ValueError):
            CodeAttributes.from_rows([("C1", "A", "1", 2, {})])

    def test_extras_are_opaque_strings(self):
        assert table().extras("C2") == {"strength": "50mg"}
        assert table().extras("C1") == {}

    def test_therapeutic_classes(self):
        assert table().therapeutic_classes() == {"N03AG01", "N03AX14", "N02BE01"}


class TestClassifyDelivery:
    def test_reifies_full_triple(self):
        item = table().classify_delivery("C1", {"N03AG01"})
        assert item == Item(("N03AG01", "438", 1))

    def test_brand_name_flag(self):
        item = table().classify_delivery("C2", {"N03AX14"})
        assert item == Item(("N03AX14", "1023", 0))

    def test_filtered_class_returns_none(self):
        assert table().classify_delivery("C3", {"N03AG01", "N03AX14"}) is None

    def test_no_filter_accepts_everything(self):
        assert table().classify_delivery("C3") == Item(("N02BE01", "900", 0))

    def test_unknown_code_raises_even_with_filter(self):
        with pytest.raises(UnknownCode):
            table().classify_delivery("C9", {"N03AG01"})


class TestTaxonomy:
    def test_one_step_edge_plus_reflexivity(self):
        tax = Taxonomy.from_edges([("G403", "G40")])
        assert tax.ancestors("G403") == {"G403", "G40"}

    def test_isolated_code_is_its_own_ancestor(self):
        assert Taxonomy.from_edges([]).ancestors("G40") == {"G40"}

    def test_transitive_chain(self):
        tax = Taxonomy.from_edges([("a", "b"), ("b", "c")])
        assert tax.ancestors("a") == {"A", "B", "C"}

    def test_multiple_parents(self):
        tax = Taxonomy.from_edges([("x", "p1"), ("x", "p2")])
        assert tax.ancestors("x") == {"X", "P1", "P2"}

    def test_ancestors_monotone_under_edge_addition(self):
        small = Taxonomy.from_edges([("a", "b")])
        grown = Taxonomy.from_edges([("a", "b"), ("b", "c")])
        assert small.ancestors("a") <= grown.ancestors("a")

    def test_self_loop_detected(self):
        with pytest.raises(CycleError):
            Taxonomy.from_edges([("a", "a")])

    def test_long_cycle_detected_and_reported(self):
        with pytest.raises(CycleError) as err:
            Taxonomy.from_edges([("a", "b"), ("b", "c"), ("c", "a")])
        # The diagnostic names one full cycle.
        assert "->" in str(err.value)

    def test_diamond_is_not_a_cycle(self):
        tax = Taxonomy.from_edges([("d", "l"), ("d", "r"), ("l", "t"), ("r", "t")])
        assert tax.ancestors("d") == {"D", "L", "R", "T"}

    def test_is_descendant(self):
        tax = Taxonomy.from_edges([("G403", "G40")])
        assert tax.is_descendant("G403", "G40")
        assert tax.is_descendant("g403", "g40")
        assert not tax.is_descendant("G40", "G403")
