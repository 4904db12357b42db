"""SET tic-tac-toe: rules, a perfect solver, and the first-player strategy.

Two players alternately claim cards from the pool of a magic SET square;
whoever first owns three cards forming a set wins.  Within the square the
only sets are its 12 lines, so win detection scans lines.  The game can
never end in a draw: the largest set-free subset of a square's nine cards
has 4 cards, so after a full playout the first player's five cards contain
a set.  With best play the first player always wins with at most 4 picks.

The first-player strategy here is: complete an own set when possible,
otherwise block the single available completion of an opponent pair,
otherwise (including the opening picks) play the exact solver's move.  The
solver move is also used when several distinct blocking cards exist, since
one pick cannot cover two independent threats.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

from .cards import Card, SetTriple, parse_card, third_card
from .squares import ALL_LINE_POSITIONS, MagicSquare, support


class Player(Enum):
    FIRST = "first"
    SECOND = "second"

    def other(self) -> "Player":
        return Player.SECOND if self is Player.FIRST else Player.FIRST


class Outcome(Enum):
    FIRST_WINS = "first_wins"
    SECOND_WINS = "second_wins"
    DRAW = "draw"


class MoveError(ValueError):
    """Illegal move or move on a finished game."""


@dataclass(frozen=True)
class Win:
    player: Player
    line: SetTriple


@dataclass(frozen=True)
class GameValue:
    outcome: Outcome
    plies_to_outcome: int


@dataclass(frozen=True)
class SolveResult:
    value: GameValue
    move: Card | None


@dataclass(frozen=True)
class GameState:
    square: MagicSquare
    first: frozenset[Card]
    second: frozenset[Card]
    to_move: Player
    win: Win | None = None

    @property
    def status(self) -> str:
        return "won" if self.win else "in_progress"

    def claimed(self, player: Player) -> frozenset[Card]:
        return self.first if player is Player.FIRST else self.second

    def available(self) -> tuple[Card, ...]:
        taken = self.first | self.second
        return tuple(c for c in sorted(self.square.cells) if c not in taken)


def new_game(pool: MagicSquare) -> GameState:
    return GameState(pool, frozenset(), frozenset(), Player.FIRST)


def legal_moves(state: GameState) -> tuple[Card, ...]:
    if state.win:
        return ()
    return state.available()


def lines_of_square(sq: MagicSquare) -> tuple[SetTriple, ...]:
    return tuple(
        tuple(sorted(sq.cells[i] for i in pos)) for pos in ALL_LINE_POSITIONS
    )


def apply_move(state: GameState, card: Card) -> GameState:
    if state.win:
        raise MoveError("game is already won")
    card = Card(*card)
    if card in state.first or card in state.second:
        raise MoveError(f"card {card} is already claimed")
    if card not in state.square.cells:
        raise MoveError(f"card {card} is not in the pool")
    mover = state.to_move
    first, second = state.first, state.second
    if mover is Player.FIRST:
        first = first | {card}
        owned = first
    else:
        second = second | {card}
        owned = second
    win = None
    for line in lines_of_square(state.square):
        if card in line and all(c in owned for c in line):
            win = Win(mover, line)
            break
    return GameState(state.square, first, second, mover.other(), win)


def _winning_completions(owned: Iterable[Card], available: Sequence[Card]) -> list[Card]:
    """Available cards that complete a pair of the owned cards to a set."""
    owned = sorted(owned)
    avail = set(available)
    out = set()
    for i, a in enumerate(owned):
        for b in owned[i + 1 :]:
            t = third_card(a, b)
            if t in avail:
                out.add(t)
    return sorted(out)


class _SupportSolver:
    """Memoized perfect play over one 9-card support.

    Cells are the support's cards in ascending order; positions are bit
    indices 0..8.  The 12 lines are found by brute force over all 84 card
    triples, which doubles as a check that a magic square's support holds
    no other sets.
    """

    def __init__(self, cards: Sequence[Card]):
        self.cards = tuple(sorted(cards))
        if len(set(self.cards)) != 9:
            raise ValueError("support must hold 9 distinct cards")
        self.index = {c: i for i, c in enumerate(self.cards)}
        masks = []
        for i in range(9):
            for j in range(i + 1, 9):
                t = third_card(self.cards[i], self.cards[j])
                k = self.index.get(t)
                if k is not None and k > j:
                    masks.append((1 << i) | (1 << j) | (1 << k))
        if len(masks) != 12:
            raise ValueError(
                f"a magic square support must contain exactly 12 sets, found {len(masks)}"
            )
        self.line_masks = tuple(masks)
        self.cell_lines = tuple(
            tuple(m for m in masks if m & (1 << i)) for i in range(9)
        )
        self._memo: dict[tuple[int, int], tuple[int, int, int]] = {}

    def mask_of(self, cards: Iterable[Card]) -> int:
        m = 0
        for c in cards:
            m |= 1 << self.index[Card(*c)]
        return m

    def has_line(self, mask: int) -> bool:
        return any((mask & m) == m for m in self.line_masks)

    def solve(self, me: int, opp: int) -> tuple[int, int, int]:
        """Value of the position for the side to move, with the mover's
        cards in `me`.  Returns (score, plies, best position) where score is
        +1 win / 0 draw / -1 loss for the mover.  Mover tie-break: fastest
        win, then slowest loss, then lowest position (= smallest card)."""
        key = (me, opp)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        free = 0x1FF & ~(me | opp)
        if not free:
            result = (0, 0, -1)
            self._memo[key] = result
            return result
        best_score, best_plies, best_pos = -2, 0, -1
        f = free
        while f:
            low = f & -f
            f ^= low
            pos = low.bit_length() - 1
            nme = me | low
            if any((nme & m) == m for m in self.cell_lines[pos]):
                score, plies = 1, 1
            else:
                oscore, oplies, _ = self.solve(opp, nme)
                score, plies = -oscore, oplies + 1
            if _better(score, plies, best_score, best_plies):
                best_score, best_plies, best_pos = score, plies, pos
                if score == 1 and plies == 1:
                    break  # immediate win at the lowest position is optimal
        result = (best_score, best_plies, best_pos)
        self._memo[key] = result
        return result


def _better(score: int, plies: int, ref_score: int, ref_plies: int) -> bool:
    if score != ref_score:
        return score > ref_score
    if score > 0:
        return plies < ref_plies
    if score < 0:
        return plies > ref_plies
    return False


_solver_cache: dict[tuple[Card, ...], _SupportSolver] = {}


def solver_for(cards: Sequence[Card]) -> _SupportSolver:
    key = tuple(sorted(Card(*c) for c in cards))
    solver = _solver_cache.get(key)
    if solver is None:
        solver = _SupportSolver(key)
        _solver_cache[key] = solver
    return solver


def exact_solve(state: GameState) -> SolveResult:
    """Perfect-play value and move for the side to move."""
    if state.win:
        raise MoveError("game is already won")
    solver = solver_for(support(state.square))
    mover = state.to_move
    me = solver.mask_of(state.claimed(mover))
    opp = solver.mask_of(state.claimed(mover.other()))
    score, plies, pos = solver.solve(me, opp)
    if score > 0:
        outcome = Outcome.FIRST_WINS if mover is Player.FIRST else Outcome.SECOND_WINS
    elif score < 0:
        outcome = Outcome.SECOND_WINS if mover is Player.FIRST else Outcome.FIRST_WINS
    else:
        outcome = Outcome.DRAW
    move = solver.cards[pos] if pos >= 0 else None
    return SolveResult(GameValue(outcome, plies), move)


def strategy_move(state: GameState) -> Card:
    """The first player's move: win now, else block the one threat, else
    take the solver's move."""
    if state.to_move is not Player.FIRST:
        raise ValueError("strategy_move decides for the first player only")
    if state.win:
        raise MoveError("game is already won")
    available = state.available()
    wins = _winning_completions(state.first, available)
    if wins:
        return wins[0]
    blocks = _winning_completions(state.second, available)
    if len(blocks) == 1:
        return blocks[0]
    move = exact_solve(state).move
    assert move is not None
    return move


def max_setfree_subset(sq: MagicSquare) -> int:
    """Largest subset of the nine cards containing none of the 12 lines,
    by brute force over all 512 subsets; always 4."""
    solver = solver_for(support(sq))
    best = 0
    for mask in range(512):
        if not solver.has_line(mask):
            best = max(best, mask.bit_count())
    return best


def setfree_subsets(sq: MagicSquare, size: int) -> Iterator[tuple[Card, ...]]:
    solver = solver_for(support(sq))
    for mask in range(512):
        if mask.bit_count() == size and not solver.has_line(mask):
            yield tuple(solver.cards[i] for i in range(9) if mask & (1 << i))


def transcript_text(square: MagicSquare, moves: Sequence[Card]) -> str:
    """Nine pool cards row-major, then the claimed cards in move order."""
    return " ".join([str(c) for c in square.cells] + [str(Card(*m)) for m in moves])


def replay_transcript(text: str) -> tuple[GameState, tuple[Card, ...]]:
    parts = text.split()
    if len(parts) < 9:
        raise MoveError(f"transcript needs at least 9 pool cards, got {len(parts)}")
    square = MagicSquare.from_text(" ".join(parts[:9]))
    moves = tuple(parse_card(p) for p in parts[9:])
    state = new_game(square)
    for m in moves:
        state = apply_move(state, m)
    return state, moves
