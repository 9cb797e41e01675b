"""Drug and diagnosis knowledge base.

Two read-only structures feed mining:

* a delivery code table mapping each product code to the attribute
  triple it is reified as (therapeutic class, speciality group, generic
  flag), plus any extra columns carried through untouched;
* a taxonomy over class codes, a child-to-parent DAG used to expand a
  class filter or an index-event rule to all descendant codes.

Codes are matched case-insensitively: everything is uppercased on the
way in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Mapping, NamedTuple

from .errors import CycleError, DuplicateCode, UnknownCode
from .model import Item


class DeliveryAttributes(NamedTuple):
    """Reified attribute triple for one delivered product code."""

    atc: str
    group: str
    generic: int


def _norm(code: str) -> str:
    return code.strip().upper()


@dataclass(frozen=True)
class CodeAttributes:
    """Product code table: code -> (atc, group, generic) plus opaque extras.

    The same code may appear on several input rows only if every row
    agrees on all columns; a conflicting re-definition raises
    DuplicateCode.
    """

    _table: Mapping[str, DeliveryAttributes] = field(default_factory=dict)
    _extras: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    @classmethod
    def from_rows(
        cls, rows: Iterable[tuple[str, str, str, int, Mapping[str, str]]]
    ) -> "CodeAttributes":
        """Build from (cip, atc, group, generic, extras) rows."""
        table: dict[str, DeliveryAttributes] = {}
        extras: dict[str, Mapping[str, str]] = {}
        for cip, atc, group, generic, extra in rows:
            code = _norm(cip)
            if generic not in (0, 1):
                raise ValueError(f"generic flag must be 0 or 1, got {generic!r}")
            attrs = DeliveryAttributes(_norm(atc), group.strip(), int(generic))
            row_extras = dict(extra)
            if code in table:
                if table[code] != attrs or extras[code] != row_extras:
                    raise DuplicateCode(f"conflicting rows for delivery code {code}")
                continue
            table[code] = attrs
            extras[code] = row_extras
        return cls(table, extras)

    def attributes(self, cip: str) -> DeliveryAttributes:
        try:
            return self._table[_norm(cip)]
        except KeyError:
            raise UnknownCode(f"unknown delivery code {_norm(cip)}") from None

    def classify_delivery(
        self, cip: str, class_filter: AbstractSet[str] | None = None
    ) -> Item | None:
        """Reify a delivery code as an (atc, group, generic) item.

        Returns None when the code's therapeutic class is outside
        `class_filter` (None means accept every class). Unknown codes
        raise; the caller decides skip versus abort.
        """
        attrs = self.attributes(cip)
        if class_filter is not None and attrs.atc not in class_filter:
            return None
        return Item((attrs.atc, attrs.group, attrs.generic))

    def extras(self, cip: str) -> Mapping[str, str]:
        code = _norm(cip)
        if code not in self._table:
            raise UnknownCode(f"unknown delivery code {code}")
        return dict(self._extras.get(code, {}))

    def knows(self, cip: str) -> bool:
        return _norm(cip) in self._table

    def therapeutic_classes(self) -> frozenset[str]:
        return frozenset(attrs.atc for attrs in self._table.values())

    def codes(self) -> frozenset[str]:
        return frozenset(self._table)

    def __len__(self) -> int:
        return len(self._table)


@dataclass(frozen=True)
class Taxonomy:
    """Child-to-parent DAG over class codes with reflexive-transitive lookup.

    `ancestors` always contains the queried code itself; a code absent
    from the edge list is its own sole ancestor. Multiple parents are
    allowed, cycles are not: a cycle raises CycleError at build time.
    """

    _parents: Mapping[str, frozenset[str]] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]]) -> "Taxonomy":
        parents: dict[str, set[str]] = {}
        for child, parent in edges:
            parents.setdefault(_norm(child), set()).add(_norm(parent))
        frozen = {child: frozenset(ps) for child, ps in parents.items()}
        tax = cls(frozen)
        tax._check_acyclic()
        return tax

    def _check_acyclic(self) -> None:
        # Three-color DFS; gray means "on the current path".
        WHITE, GRAY, BLACK = 0, 1, 2
        color: dict[str, int] = {}
        for start in self._parents:
            if color.get(start, WHITE) != WHITE:
                continue
            stack: list[tuple[str, Iterable[str]]] = [(start, iter(self._parents.get(start, ())))]
            color[start] = GRAY
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    state = color.get(nxt, WHITE)
                    if state == GRAY:
                        path = [entry[0] for entry in stack]
                        loop = path[path.index(nxt):] + [nxt]
                        raise CycleError("taxonomy cycle: " + " -> ".join(loop))
                    if state == WHITE:
                        color[nxt] = GRAY
                        stack.append((nxt, iter(self._parents.get(nxt, ()))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = BLACK
                    stack.pop()

    def ancestors(self, code: str) -> frozenset[str]:
        """Reflexive-transitive parent closure of `code`."""
        root = _norm(code)
        seen = {root}
        frontier = [root]
        while frontier:
            node = frontier.pop()
            for parent in self._parents.get(node, ()):
                if parent not in seen:
                    seen.add(parent)
                    frontier.append(parent)
        return frozenset(seen)

    def is_descendant(self, code: str, of: str) -> bool:
        return _norm(of) in self.ancestors(code)

    def __len__(self) -> int:
        return len(self._parents)


EMPTY_TAXONOMY = Taxonomy()


@dataclass(frozen=True)
class KnowledgeBase:
    """Everything external the pipeline consults: code table plus taxonomy."""

    attributes: CodeAttributes
    taxonomy: Taxonomy = EMPTY_TAXONOMY
