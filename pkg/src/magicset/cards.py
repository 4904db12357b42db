"""SET cards as vectors over GF(3).

A card has four features -- shape, number, color, shading -- each taking one
of three values, so the deck is the 81-point vector space GF(3)^4.  Three
cards form a *set* exactly when their componentwise sum is zero mod 3, which
is equivalent to every feature being all-same or all-different across the
three cards.  The *order* of a set is the number of features in which its
cards differ (1 to 4).

Text encoding: a card is a 4-character trit string in feature order
(shape, number, color, shading), e.g. "0000" is one empty red oval.
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Iterable, Iterator, NamedTuple


class Card(NamedTuple):
    shape: int
    number: int
    color: int
    shading: int

    def __str__(self) -> str:
        return f"{self.shape}{self.number}{self.color}{self.shading}"


# A set is kept canonical as an ascending 3-tuple of distinct cards.
SetTriple = tuple[Card, Card, Card]

FEATURE_NAMES = ("shape", "number", "color", "shading")
SHAPE_WORDS = ("oval", "diamond", "squiggle")
COUNT_WORDS = ("one", "two", "three")
COLOR_WORDS = ("red", "green", "purple")
SHADING_WORDS = ("empty", "striped", "filled")

SET_COUNT_TOTAL = 1080


class CardParseError(ValueError):
    """Raised for malformed card text; the message names the bad position."""


class NotASetError(ValueError):
    """Raised when three cards that were required to form a set do not."""


def parse_card(text: str) -> Card:
    if len(text) != 4:
        raise CardParseError(f"card text must be 4 trits, got {len(text)}: {text!r}")
    coords = []
    for pos, ch in enumerate(text):
        if ch not in "012":
            raise CardParseError(f"bad trit {ch!r} at position {pos} in {text!r}")
        coords.append(ord(ch) - ord("0"))
    return Card(*coords)


def format_card(card: Card) -> str:
    return str(Card(*card))


def describe_card(card: Card) -> str:
    """Human wording, e.g. (0,0,0,0) -> 'one empty red oval'."""
    shape, number, color, shading = card
    noun = SHAPE_WORDS[shape] + ("s" if number > 0 else "")
    return f"{COUNT_WORDS[number]} {SHADING_WORDS[shading]} {COLOR_WORDS[color]} {noun}"


def add_cards(a: Card, b: Card) -> Card:
    return Card(*((x + y) % 3 for x, y in zip(a, b)))


def negate(a: Card) -> Card:
    return Card(*((-x) % 3 for x in a))


def is_set(a: Card, b: Card, c: Card) -> bool:
    """True iff a, b, c are pairwise distinct and sum to zero componentwise."""
    if a == b or a == c or b == c:
        return False
    return all((x + y + z) % 3 == 0 for x, y, z in zip(a, b, c))


def third_card(a: Card, b: Card) -> Card:
    """The unique card completing {a, b} to a set; requires a != b."""
    if a == b:
        raise ValueError(f"third_card needs two distinct cards, got {a} twice")
    return Card(*((-x - y) % 3 for x, y in zip(a, b)))


def make_set(a: Card, b: Card, c: Card) -> SetTriple:
    if not is_set(a, b, c):
        raise NotASetError(f"{a}, {b}, {c} do not form a set")
    x, y, z = sorted((a, b, c))
    return (x, y, z)


def set_order(cards: Iterable[Card]) -> int:
    """Number of features in which the three cards of a set differ."""
    a, b, c = cards
    if not is_set(a, b, c):
        raise NotASetError(f"{a}, {b}, {c} do not form a set")
    # In a set a feature is all-different exactly when any two cards differ.
    return sum(1 for x, y in zip(a, b) if x != y)


def all_cards() -> tuple[Card, ...]:
    """The 81-card deck in ascending text order."""
    return tuple(
        Card(s, n, c, h)
        for s in range(3)
        for n in range(3)
        for c in range(3)
        for h in range(3)
    )


def card_index(card: Card) -> int:
    """Rank of the card in all_cards(), i.e. its trit string read base 3."""
    s, n, c, h = card
    return s * 27 + n * 9 + c * 3 + h


def card_from_index(index: int) -> Card:
    if not 0 <= index < 81:
        raise ValueError(f"card index out of range: {index}")
    return Card((index // 27) % 3, (index // 9) % 3, (index // 3) % 3, index % 3)


def enumerate_sets() -> Iterator[SetTriple]:
    """All 1080 sets, as canonical triples, in ascending order.

    Each set is produced from its two smallest members, so every unordered
    set appears exactly once.
    """
    deck = all_cards()
    for a, b in combinations(deck, 2):
        c = third_card(a, b)
        if c > b:
            yield (a, b, c)


def count_sets_by_order(k: int) -> int:
    """Closed-form count of sets of order k: C(4,k) * 3^(4-k) * 6^(k-1)."""
    if not 1 <= k <= 4:
        raise ValueError(f"set order must be 1..4, got {k}")
    return comb(4, k) * 3 ** (4 - k) * 6 ** (k - 1)


def format_set(triple: Iterable[Card]) -> str:
    """Three card strings joined by single spaces, sorted ascending."""
    return " ".join(str(c) for c in sorted(Card(*t) for t in triple))


def parse_set(text: str) -> SetTriple:
    parts = text.split()
    if len(parts) != 3:
        raise CardParseError(f"set text must hold 3 cards, got {len(parts)}")
    a, b, c = (parse_card(p) for p in parts)
    return make_set(a, b, c)
