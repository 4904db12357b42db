"""The 31104-element group of feature/value shuffles, and geometric moves.

A group element pairs a permutation of the four features with one
permutation of the three values per feature: 24 * 6^4 = 31104 elements.
Acting on a card, the output value at feature f is values[f] applied to the
input value at the feature that maps onto f.  Under this action set orders
are invariant, so acting on a magic square preserves the order of every
triplet family.

Geometric transforms rearrange the cells of one square among themselves.
Reflections and rotations permute the four line families in the evident
way; the shear-wrap move (reflect about the middle column, then cyclically
shift row 1 right by one and row 2 right by two) swaps the column and
diagonal families while fixing rows and anti-diagonals.  Together these
realize all 24 permutations of the families.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from itertools import permutations, product
from math import factorial
from typing import Callable, Iterator, TypeVar

from .cards import Card, SetTriple
from .squares import (
    FAMILIES,
    MagicSquare,
    TripletFamily,
    build_from_corners,
    lines,
    support,
    third_card,
)

GROUP_ORDER = 31104
CARD_STABILIZER_ORDER = 384

_IDENTITY_VALUES = ((0, 1, 2), (0, 1, 2), (0, 1, 2), (0, 1, 2))

T = TypeVar("T")


@dataclass(frozen=True)
class GroupElement:
    """features[i] is the feature index that source feature i maps onto;
    values[f] is the image of (0, 1, 2) at target feature f."""

    features: tuple[int, int, int, int]
    values: tuple[tuple[int, int, int], ...]

    def inverse_features(self) -> tuple[int, int, int, int]:
        inv = [0, 0, 0, 0]
        for src, dst in enumerate(self.features):
            inv[dst] = src
        return tuple(inv)

    def __str__(self) -> str:
        feat = "".join(str(f) for f in self.features)
        vals = "|".join("".join(str(v) for v in vp) for vp in self.values)
        return f"{feat}|{vals}"


class GroupParseError(ValueError):
    pass


def identity_element() -> GroupElement:
    return GroupElement((0, 1, 2, 3), _IDENTITY_VALUES)


def parse_element(text: str) -> GroupElement:
    parts = text.split("|")
    if len(parts) != 5:
        raise GroupParseError(f"element text must have 5 fields, got {len(parts)}: {text!r}")
    feat_part, *val_parts = parts
    if len(feat_part) != 4 or sorted(feat_part) != list("0123"):
        raise GroupParseError(f"bad feature permutation {feat_part!r} in {text!r}")
    features = tuple(int(ch) for ch in feat_part)
    values = []
    for vp in val_parts:
        if len(vp) != 3 or sorted(vp) != list("012"):
            raise GroupParseError(f"bad value permutation {vp!r} in {text!r}")
        values.append(tuple(int(ch) for ch in vp))
    return GroupElement(features, tuple(values))


def format_element(g: GroupElement) -> str:
    return str(g)


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """The element acting as g after h: apply_to_card(compose(g, h), x)
    equals apply_to_card(g, apply_to_card(h, x))."""
    features = tuple(g.features[h.features[i]] for i in range(4))
    g_inv = g.inverse_features()
    values = tuple(
        tuple(g.values[f][h.values[g_inv[f]][v]] for v in range(3)) for f in range(4)
    )
    return GroupElement(features, values)


def inverse(g: GroupElement) -> GroupElement:
    inv_feat = g.inverse_features()
    values = []
    for f in range(4):
        vp = g.values[g.features[f]]
        inv_vp = [0, 0, 0]
        for v in range(3):
            inv_vp[vp[v]] = v
        values.append(tuple(inv_vp))
    return GroupElement(inv_feat, tuple(values))


def apply_to_card(g: GroupElement, card: Card) -> Card:
    inv = g.inverse_features()
    v = g.values
    return Card(
        v[0][card[inv[0]]],
        v[1][card[inv[1]]],
        v[2][card[inv[2]]],
        v[3][card[inv[3]]],
    )


def apply_to_square(g: GroupElement, sq: MagicSquare) -> MagicSquare:
    inv = g.inverse_features()
    v = g.values
    return MagicSquare(
        tuple(
            Card(v[0][c[inv[0]]], v[1][c[inv[1]]], v[2][c[inv[2]]], v[3][c[inv[3]]])
            for c in sq.cells
        )
    )


def all_elements() -> Iterator[GroupElement]:
    """All 31104 group elements, in a fixed deterministic order."""
    value_perms = tuple(permutations(range(3)))
    for feat in permutations(range(4)):
        for vals in product(value_perms, repeat=4):
            yield GroupElement(feat, vals)


def random_element(rng: random.Random) -> GroupElement:
    feat = tuple(rng.sample(range(4), 4))
    vals = tuple(tuple(rng.sample(range(3), 3)) for _ in range(4))
    return GroupElement(feat, vals)


def generators() -> tuple[GroupElement, ...]:
    """A small generating set: adjacent feature swaps plus a value swap and
    a value 3-cycle on feature 0."""
    gens = []
    for i in range(3):
        feat = list(range(4))
        feat[i], feat[i + 1] = feat[i + 1], feat[i]
        gens.append(GroupElement(tuple(feat), _IDENTITY_VALUES))
    gens.append(GroupElement((0, 1, 2, 3), ((1, 0, 2),) + _IDENTITY_VALUES[1:]))
    gens.append(GroupElement((0, 1, 2, 3), ((1, 2, 0),) + _IDENTITY_VALUES[1:]))
    return tuple(gens)


def orbit(start: T, apply: Callable[[GroupElement, T], T]) -> set[T]:
    """Closure of one object under the generating set."""
    gens = generators()
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for obj in frontier:
            for g in gens:
                img = apply(g, obj)
                if img not in seen:
                    seen.add(img)
                    nxt.append(img)
        frontier = nxt
    return seen


def orbit_of_card(card: Card) -> set[Card]:
    return orbit(card, apply_to_card)


def apply_to_set(g: GroupElement, s: SetTriple) -> SetTriple:
    a, b, c = (apply_to_card(g, x) for x in s)
    return tuple(sorted((a, b, c)))


def orbit_of_set(s: SetTriple) -> set[SetTriple]:
    return orbit(tuple(sorted(s)), apply_to_set)


def orbit_of_square(sq: MagicSquare) -> set[MagicSquare]:
    return orbit(sq, apply_to_square)


def stabilizer_order_card(card: Card) -> int:
    """Brute force over all 31104 elements; always 384."""
    return sum(1 for g in all_elements() if apply_to_card(g, card) == card)


def stabilizer_order_set(s: SetTriple) -> int:
    """Brute force; for a set of order k this is 6 * 2^(4-k) * (4-k)! * k!."""
    target = tuple(sorted(s))
    return sum(1 for g in all_elements() if apply_to_set(g, target) == target)


def stabilizer_order_square(sq: MagicSquare) -> int:
    """Brute force count of elements fixing every cell of the labeled grid."""
    n = 0
    cells = sq.cells
    for g in all_elements():
        inv = g.inverse_features()
        v = g.values
        for c in cells:
            if (
                v[0][c[inv[0]]] != c[0]
                or v[1][c[inv[1]]] != c[1]
                or v[2][c[inv[2]]] != c[2]
                or v[3][c[inv[3]]] != c[3]
            ):
                break
        else:
            n += 1
    return n


def set_stabilizer_order_formula(k: int) -> int:
    if not 1 <= k <= 4:
        raise ValueError(f"set order must be 1..4, got {k}")
    return 6 * 2 ** (4 - k) * factorial(4 - k) * factorial(k)


def orbit_count_squares(rows: int, cols: int, diag: int, anti: int) -> int:
    """Number of squares with this exact ordered assignment of triplet
    orders: 31104 / (2^(4-k) * (4-k)! * prod (k - order_i)!), where k is the
    square order.  Verified against the exhaustive census."""
    orders = (rows, cols, diag, anti)
    k, s = _admissible_order(orders)
    for o in orders:
        s *= factorial(k - o)
    return GROUP_ORDER // s


def orbit_count_squares_uncorrected(rows: int, cols: int, diag: int, anti: int) -> int:
    """A plausible-looking variant of the same count with (4 - order_i)!
    stabilizer factors.  It is wrong for some tuples; the census verifier
    reports exactly where it disagrees."""
    orders = (rows, cols, diag, anti)
    k, _ = _admissible_order(orders)
    denom = factorial(4 - k)
    for o in orders:
        denom *= factorial(4 - o)
    return 3888 * 2**k // denom


def _admissible_order(orders: tuple[int, int, int, int]) -> tuple[int, int]:
    """Square order k for an admissible ordered tuple, plus the constant
    stabilizer factor 2^(4-k) * (4-k)!."""
    from .squares import admissible_distributions

    total = sum(orders)
    if total % 3:
        raise ValueError(f"triplet orders {orders} do not sum to a multiple of 3")
    k = total // 3
    if not 2 <= k <= 4 or tuple(sorted(orders)) not in admissible_distributions(k):
        raise ValueError(f"no magic square has triplet orders {orders}")
    return k, 2 ** (4 - k) * factorial(4 - k)


class GeometricTransform(Enum):
    REFLECT_MAIN_DIAG = "reflect_main_diag"
    REFLECT_ANTI_DIAG = "reflect_anti_diag"
    REFLECT_MID_ROW = "reflect_mid_row"
    REFLECT_MID_COL = "reflect_mid_col"
    ROTATE_180 = "rotate_180"
    CYCLE_ROWS = "cycle_rows"
    CYCLE_COLS = "cycle_cols"
    SHEAR_WRAP = "shear_wrap"


def _position_map(new_pos: Callable[[int, int], tuple[int, int]]) -> tuple[int, ...]:
    # out[i] = flat source index for flat destination index i
    out = []
    for r in range(3):
        for c in range(3):
            sr, sc = new_pos(r, c)
            out.append(sr * 3 + sc)
    return tuple(out)


def _shear_wrap_source(r: int, c: int) -> tuple[int, int]:
    # reflect about the middle column, then shift row r right by r (mod 3)
    return (r, (2 - (c - r)) % 3)


POSITION_MAPS: dict[GeometricTransform, tuple[int, ...]] = {
    GeometricTransform.REFLECT_MAIN_DIAG: _position_map(lambda r, c: (c, r)),
    GeometricTransform.REFLECT_ANTI_DIAG: _position_map(lambda r, c: (2 - c, 2 - r)),
    GeometricTransform.REFLECT_MID_ROW: _position_map(lambda r, c: (2 - r, c)),
    GeometricTransform.REFLECT_MID_COL: _position_map(lambda r, c: (r, 2 - c)),
    GeometricTransform.ROTATE_180: _position_map(lambda r, c: (2 - r, 2 - c)),
    GeometricTransform.CYCLE_ROWS: _position_map(lambda r, c: ((r + 1) % 3, c)),
    GeometricTransform.CYCLE_COLS: _position_map(lambda r, c: (r, (c + 1) % 3)),
    GeometricTransform.SHEAR_WRAP: _position_map(_shear_wrap_source),
}

def _family_map(**swaps: str) -> dict[TripletFamily, TripletFamily]:
    mapping = {fam: fam for fam in FAMILIES}
    for a, b in swaps.items():
        fa = TripletFamily(a)
        fb = TripletFamily(b)
        mapping[fa] = fb
        mapping[fb] = fa
    return mapping


# How each transform permutes the four line families.
FAMILY_ACTION: dict[GeometricTransform, dict[TripletFamily, TripletFamily]] = {
    GeometricTransform.REFLECT_MAIN_DIAG: _family_map(rows="cols"),
    GeometricTransform.REFLECT_ANTI_DIAG: _family_map(rows="cols"),
    GeometricTransform.REFLECT_MID_ROW: _family_map(diag="anti"),
    GeometricTransform.REFLECT_MID_COL: _family_map(diag="anti"),
    GeometricTransform.ROTATE_180: _family_map(),
    GeometricTransform.CYCLE_ROWS: _family_map(),
    GeometricTransform.CYCLE_COLS: _family_map(),
    GeometricTransform.SHEAR_WRAP: _family_map(cols="diag"),
}


def apply_geometric(t: GeometricTransform, sq: MagicSquare) -> MagicSquare:
    src = POSITION_MAPS[t]
    return MagicSquare(tuple(sq.cells[src[i]] for i in range(9)))


def induced_family_permutation(
    t: GeometricTransform, sq: MagicSquare
) -> dict[TripletFamily, TripletFamily]:
    """Where each family's set of line supports lands after the transform;
    always equals FAMILY_ACTION[t] for a valid square."""
    before = {fam: frozenset(ls) for fam, ls in lines(sq).items()}
    after = {fam: frozenset(ls) for fam, ls in lines(apply_geometric(t, sq)).items()}
    out = {}
    for fam, line_set in before.items():
        targets = [g for g, ls in after.items() if ls == line_set]
        if len(targets) != 1:
            raise ValueError(f"family {fam} lines not preserved by {t}")
        out[fam] = targets[0]
    return out


def rearrangements_same_cards(sq: MagicSquare) -> tuple[MagicSquare, ...]:
    """All 432 squares on the same nine cards: 72 ordered corner pairs times
    6 center choices, every one valid by closure of the support."""
    cards = support(sq)
    card_set = set(cards)
    out = []
    for a in cards:
        for b in cards:
            if a == b:
                continue
            blocked = {a, b, third_card(a, b)}
            for c in cards:
                if c in blocked:
                    continue
                out.append(build_from_corners(a, b, c))
    assert all(set(s.cells) == card_set for s in out)
    return tuple(out)


def family_permutation_of(
    original: MagicSquare, rearranged: MagicSquare
) -> dict[TripletFamily, TripletFamily]:
    """For two squares on one support: which family of the rearranged square
    carries each of the original's line-triplet groups."""
    orig = {fam: frozenset(ls) for fam, ls in lines(original).items()}
    new = {fam: frozenset(ls) for fam, ls in lines(rearranged).items()}
    out = {}
    for fam, line_set in orig.items():
        targets = [g for g, ls in new.items() if ls == line_set]
        if len(targets) != 1:
            raise ValueError("squares do not share a support")
        out[fam] = targets[0]
    return out


def triplet_fixing_rearrangements(sq: MagicSquare) -> tuple[MagicSquare, ...]:
    """The rearrangements keeping every line family in place; always 18."""
    identity = {fam: fam for fam in FAMILIES}
    return tuple(
        s for s in rearrangements_same_cards(sq) if family_permutation_of(sq, s) == identity
    )


def family_permutation_buckets(
    sq: MagicSquare,
) -> dict[tuple[TripletFamily, ...], int]:
    """Bucket the 432 rearrangements by induced family permutation, keyed by
    the images of (ROWS, COLS, DIAG, ANTI); all 24 permutations appear, 18
    squares each."""
    buckets: dict[tuple[TripletFamily, ...], int] = {}
    for s in rearrangements_same_cards(sq):
        perm = family_permutation_of(sq, s)
        key = tuple(perm[fam] for fam in FAMILIES)
        buckets[key] = buckets.get(key, 0) + 1
    return buckets
