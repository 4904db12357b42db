"""Magic SET squares: construction, validation, and classification metrics.

A magic SET square is a 3x3 grid of nine distinct cards in which every row,
every column, and every diagonal and anti-diagonal -- including the broken
ones that wrap around the grid -- is a set.  That is 12 lines in four
families of three parallel lines each (rows, columns, diagonals,
anti-diagonals).

Grid orientation: row 0 is the top row, column 0 is the left column, and
serialization is row-major top-to-bottom.  Diagonal lines are the classes of
(col - row) mod 3 and anti-diagonal lines the classes of (col + row) mod 3;
which of the two wrapping directions is called "diagonal" is a convention of
this module (swapping them never changes a square's type, because the
type pairs them unordered).

Every square is determined by three corner cards a (bottom left), b (bottom
right), and c (center) that do not form a set:

        -b-c    a+b-c   -a-c
        -a+b+c  c       a-b+c
        a       -a-b    b
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Iterator, Mapping, Sequence

from .cards import (
    Card,
    SetTriple,
    add_cards,
    is_set,
    negate,
    parse_card,
    set_order,
    third_card,
)


class TripletFamily(Enum):
    ROWS = "rows"
    COLS = "cols"
    DIAG = "diag"
    ANTI = "anti"

    def __str__(self) -> str:
        return self.value


FAMILIES = (TripletFamily.ROWS, TripletFamily.COLS, TripletFamily.DIAG, TripletFamily.ANTI)

# Flat cell indices (row-major, row 0 = top) of the three lines per family.
LINE_POSITIONS: dict[TripletFamily, tuple[tuple[int, int, int], ...]] = {
    TripletFamily.ROWS: ((0, 1, 2), (3, 4, 5), (6, 7, 8)),
    TripletFamily.COLS: ((0, 3, 6), (1, 4, 7), (2, 5, 8)),
    TripletFamily.DIAG: ((0, 4, 8), (1, 5, 6), (2, 3, 7)),
    TripletFamily.ANTI: ((0, 5, 7), (1, 3, 8), (2, 4, 6)),
}

ALL_LINE_POSITIONS: tuple[tuple[int, int, int], ...] = tuple(
    line for fam in FAMILIES for line in LINE_POSITIONS[fam]
)


class SquareConstructionError(ValueError):
    """Raised when corner cards cannot seed a magic square."""


class InvalidSquareError(ValueError):
    """Raised when a 3x3 grid of cards is not a magic square."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(v.message for v in report.violations))
        self.report = report


@dataclass(frozen=True)
class MagicSquare:
    """Nine distinct cards, row-major from the top left, all 12 lines sets."""

    cells: tuple[Card, ...]

    def cell(self, row: int, col: int) -> Card:
        return self.cells[row * 3 + col]

    def rows(self) -> tuple[tuple[Card, Card, Card], ...]:
        c = self.cells
        return (c[0:3], c[3:6], c[6:9])

    def corners(self) -> tuple[Card, Card, Card]:
        """The construction seed: bottom left, bottom right, center."""
        return (self.cells[6], self.cells[8], self.cells[4])

    def to_text(self) -> str:
        return " ".join(str(c) for c in self.cells)

    @classmethod
    def from_text(cls, text: str) -> "MagicSquare":
        parts = text.split()
        if len(parts) != 9:
            raise CardCountError(len(parts))
        return square_from_cells([parse_card(p) for p in parts])

    def __str__(self) -> str:
        return self.to_text()


class CardCountError(ValueError):
    def __init__(self, count: int):
        super().__init__(f"a square needs exactly 9 cards, got {count}")


@dataclass(frozen=True, order=True)
class SquareType:
    """Classification key (x-y;z-w): unordered row/column orders paired with
    unordered diagonal/anti-diagonal orders."""

    rc: tuple[int, int]
    da: tuple[int, int]

    def __post_init__(self) -> None:
        if self.rc != tuple(sorted(self.rc)) or self.da != tuple(sorted(self.da)):
            raise ValueError(f"type pairs must be sorted: {self.rc}, {self.da}")

    @property
    def order(self) -> int:
        total = sum(self.rc) + sum(self.da)
        return total // 3

    @property
    def rc_diversity(self) -> Fraction:
        return Fraction(sum(self.rc), 2)

    def flipped(self) -> "SquareType":
        """The mirror type (z-w;x-y)."""
        return SquareType(self.da, self.rc)

    def __str__(self) -> str:
        return f"({self.rc[0]}-{self.rc[1]};{self.da[0]}-{self.da[1]})"

    @classmethod
    def from_orders(cls, rows: int, cols: int, diag: int, anti: int) -> "SquareType":
        return cls(tuple(sorted((rows, cols))), tuple(sorted((diag, anti))))

    @classmethod
    def parse(cls, text: str) -> "SquareType":
        t = text.strip()
        if t.startswith("(") and t.endswith(")"):
            t = t[1:-1]
        try:
            rc_part, da_part = t.split(";")
            x, y = (int(v) for v in rc_part.split("-"))
            z, w = (int(v) for v in da_part.split("-"))
        except ValueError:
            raise ValueError(f"malformed square type {text!r}, expected (x-y;z-w)") from None
        for v in (x, y, z, w):
            if not 1 <= v <= 4:
                raise ValueError(f"triplet orders must be 1..4 in {text!r}")
        return cls.from_orders(x, y, z, w)


def admissible_distributions(order: int) -> frozenset[tuple[int, int, int, int]]:
    """The possible multisets of the four triplet orders for a square order.

    Triplet orders lie in 1..order and sum to 3*order; order-1 squares do
    not exist (only three cards share three fixed feature values).
    """
    table = {
        2: {(1, 1, 2, 2)},
        3: {(1, 2, 3, 3), (2, 2, 2, 3)},
        4: {(1, 3, 4, 4), (2, 2, 4, 4), (2, 3, 3, 4), (3, 3, 3, 3)},
    }
    if order not in table:
        raise ValueError(f"square order must be 2..4, got {order}")
    return frozenset(table[order])


def realizable_types() -> tuple[SquareType, ...]:
    """All 21 square types, sorted by (x, y, z, w)."""
    types = set()
    for order in (2, 3, 4):
        for dist in admissible_distributions(order):
            for perm in permutations(dist):
                types.add(SquareType.from_orders(*perm))
    return tuple(sorted(types, key=lambda t: (t.rc, t.da)))


REALIZABLE_TYPES = realizable_types()


@dataclass(frozen=True)
class SquareProfile:
    order: int
    family_orders: Mapping[TripletFamily, int]
    diversity: Fraction
    rc_diversity: Fraction
    square_type: SquareType

    def order_distribution(self) -> tuple[int, int, int, int]:
        return tuple(sorted(self.family_orders.values()))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    square: MagicSquare | None
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return self.square is not None


def build_from_corners(a: Card, b: Card, c: Card) -> MagicSquare:
    """Construct the unique square with a bottom left, b bottom right,
    c center.  The corners must be distinct and must not form a set."""
    a, b, c = Card(*a), Card(*b), Card(*c)
    if a == b:
        raise SquareConstructionError(f"corner cards must differ, got {a} twice")
    if c == a or c == b:
        raise SquareConstructionError(f"center {c} duplicates a corner")
    if c == third_card(a, b):
        raise SquareConstructionError(f"corners {a}, {b}, {c} form a set")
    neg = negate
    add = add_cards
    cells = (
        neg(add(b, c)),          # top left      -b-c
        add(add(a, b), neg(c)),  # top middle    a+b-c
        neg(add(a, c)),          # top right     -a-c
        add(neg(a), add(b, c)),  # middle left   -a+b+c
        c,                       # center
        add(a, add(neg(b), c)),  # middle right  a-b+c
        a,                       # bottom left
        neg(add(a, b)),          # bottom middle -a-b
        b,                       # bottom right
    )
    return MagicSquare(cells)


def lines(sq: MagicSquare) -> dict[TripletFamily, tuple[SetTriple, ...]]:
    """The 12 lines grouped by family, each line a canonical card triple."""
    out: dict[TripletFamily, tuple[SetTriple, ...]] = {}
    for fam in FAMILIES:
        out[fam] = tuple(
            tuple(sorted(sq.cells[i] for i in pos)) for pos in LINE_POSITIONS[fam]
        )
    return out


def validate(cells: Sequence[Card]) -> ValidationReport:
    """Check 9 distinct cards and all 12 lines; report every failure."""
    cells = tuple(Card(*c) for c in cells)
    violations: list[Violation] = []
    if len(cells) != 9:
        return ValidationReport(None, (Violation("cell_count", f"expected 9 cards, got {len(cells)}"),))
    if len(set(cells)) != 9:
        dupes = sorted({c for c in cells if cells.count(c) > 1})
        violations.append(
            Violation("duplicate_cards", "duplicate cards: " + " ".join(map(str, dupes)))
        )
    for fam in FAMILIES:
        for idx, pos in enumerate(LINE_POSITIONS[fam]):
            a, b, c = (cells[i] for i in pos)
            if not is_set(a, b, c):
                violations.append(
                    Violation(
                        f"line_not_set:{fam.value}:{idx}",
                        f"{fam.value} line {idx} is not a set: {a} {b} {c}",
                    )
                )
    if violations:
        return ValidationReport(None, tuple(violations))
    return ValidationReport(MagicSquare(cells), ())


def square_from_cells(cells: Sequence[Card]) -> MagicSquare:
    report = validate(cells)
    if not report.ok:
        raise InvalidSquareError(report)
    assert report.square is not None
    return report.square


def profile(sq: MagicSquare) -> SquareProfile:
    """Order, per-family orders, diversity, rc-diversity, and type.

    Parallel lines always have equal order; this recomputes all 12 line
    orders and asserts that equality rather than assuming it.
    """
    family_orders: dict[TripletFamily, int] = {}
    for fam, fam_lines in lines(sq).items():
        orders = [set_order(line) for line in fam_lines]
        if orders[0] != orders[1] or orders[0] != orders[2]:
            raise InvalidSquareError(
                ValidationReport(
                    None,
                    (Violation("parallel_orders", f"{fam.value} lines have unequal orders {orders}"),),
                )
            )
        family_orders[fam] = orders[0]
    order = sum(
        1 for f in range(4) if len({card[f] for card in sq.cells}) > 1
    )
    diversity = Fraction(3 * sum(family_orders.values()), 12)
    rc_diversity = Fraction(
        family_orders[TripletFamily.ROWS] + family_orders[TripletFamily.COLS], 2
    )
    square_type = SquareType.from_orders(
        family_orders[TripletFamily.ROWS],
        family_orders[TripletFamily.COLS],
        family_orders[TripletFamily.DIAG],
        family_orders[TripletFamily.ANTI],
    )
    return SquareProfile(order, family_orders, diversity, rc_diversity, square_type)


def support(sq: MagicSquare) -> tuple[Card, ...]:
    """The nine cards in ascending order; closed under third-card completion."""
    return tuple(sorted(sq.cells))


def feature_distribution(sq: MagicSquare) -> dict[int, frozenset[TripletFamily]]:
    """For each varying feature, the families whose lines vary in it.

    Every varying feature varies in exactly three of the four families, and
    for any two families the number of shared varying features is
    order(A) + order(B) - square order.
    """
    fam_lines = lines(sq)
    out: dict[int, frozenset[TripletFamily]] = {}
    for f in range(4):
        if len({card[f] for card in sq.cells}) == 1:
            continue
        varies = frozenset(
            fam for fam in FAMILIES if fam_lines[fam][0][0][f] != fam_lines[fam][0][1][f]
        )
        out[f] = varies
    return out


# Expected feature pattern per triplet-order multiset: for each family, the
# set of varying features, written over abstract feature labels 0..k-1 and
# compared up to relabeling.  One row per admissible order distribution.
FEATURE_PATTERNS: dict[tuple[int, int, int, int], tuple[frozenset[int], ...]] = {
    (1, 1, 2, 2): tuple(map(frozenset, ({0}, {1}, {0, 1}, {0, 1}))),
    (1, 2, 3, 3): tuple(map(frozenset, ({0}, {1, 2}, {0, 1, 2}, {0, 1, 2}))),
    (2, 2, 2, 3): tuple(map(frozenset, ({0, 1}, {0, 2}, {1, 2}, {0, 1, 2}))),
    (1, 3, 4, 4): tuple(map(frozenset, ({0}, {1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}))),
    (2, 2, 4, 4): tuple(map(frozenset, ({0, 1}, {2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}))),
    (2, 3, 3, 4): tuple(map(frozenset, ({0, 1}, {0, 2, 3}, {1, 2, 3}, {0, 1, 2, 3}))),
    (3, 3, 3, 3): tuple(map(frozenset, ({0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}))),
}


def canonical_pattern(family_feature_sets: Iterable[frozenset[int]]) -> tuple[tuple[int, ...], ...]:
    """Canonical form of a per-family feature pattern, invariant under
    renaming features and reordering families."""
    sets = [frozenset(s) for s in family_feature_sets]
    labels = sorted({f for s in sets for f in s})
    best = None
    for perm in permutations(range(len(labels))):
        rename = {lab: perm[i] for i, lab in enumerate(labels)}
        cand = tuple(sorted(tuple(sorted(rename[f] for f in s)) for s in sets))
        if best is None or cand < best:
            best = cand
    return best if best is not None else ()


def matches_expected_pattern(sq: MagicSquare) -> bool:
    """Whether the square's feature distribution matches the expected
    pattern for its triplet-order multiset."""
    prof = profile(sq)
    dist = prof.order_distribution()
    fam_sets = _family_feature_sets(sq)
    return canonical_pattern(fam_sets) == canonical_pattern(FEATURE_PATTERNS[dist])


def _family_feature_sets(sq: MagicSquare) -> list[frozenset[int]]:
    """Transpose of feature_distribution: per family, its varying features."""
    by_feature = feature_distribution(sq)
    return [
        frozenset(f for f, fams in by_feature.items() if fam in fams)
        for fam in FAMILIES
    ]


def _fraction_text(value: Fraction) -> str:
    # all diversities are exact in binary (denominator 1, 2, or 4)
    return f"{float(value):g}"


def profile_to_json(prof: SquareProfile) -> dict:
    return {
        "order": prof.order,
        "family_orders": {str(fam): prof.family_orders[fam] for fam in FAMILIES},
        "diversity": _fraction_text(prof.diversity),
        "rc_diversity": _fraction_text(prof.rc_diversity),
        "type": str(prof.square_type),
    }


def square_to_json(sq: MagicSquare, with_profile: bool = True) -> dict:
    doc: dict = {
        "cells": [[str(sq.cell(r, c)) for c in range(3)] for r in range(3)]
    }
    if with_profile:
        doc["profile"] = profile_to_json(profile(sq))
    return doc


def square_from_json(doc: dict) -> MagicSquare:
    cells = doc["cells"]
    flat: list[Card] = []
    if len(cells) == 9 and all(isinstance(x, str) for x in cells):
        flat = [parse_card(x) for x in cells]
    else:
        for row in cells:
            for text in row:
                flat.append(parse_card(text))
    if len(flat) != 9:
        raise CardCountError(len(flat))
    return square_from_cells(flat)


def iter_all_corner_triples() -> Iterator[tuple[Card, Card, Card]]:
    """Every (a, b, c) accepted by build_from_corners: 81*80*78 triples."""
    from .cards import all_cards

    deck = all_cards()
    for a in deck:
        for b in deck:
            if b == a:
                continue
            t = third_card(a, b)
            for c in deck:
                if c == a or c == b or c == t:
                    continue
                yield (a, b, c)
