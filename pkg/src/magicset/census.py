"""Exhaustive census of all 505440 magic SET squares.

Every square arises exactly once from an ordered corner triple (a, b, c)
with a != b and c outside {a, b, third(a, b)}: 81 * 80 * 78 = 505440
labeled grids.  The census walks all of them and tallies counts by square
order, by ordered triplet-order tuple, by type, and by 9-card support,
verifying structural laws for 100% of squares along the way:

  * all 12 lines of every constructed grid are sets, and parallel lines
    have equal order;
  * the triplet-order multiset is admissible and the diversity equals
    3k/4 for square order k;
  * each varying feature varies in exactly 3 of the 4 families, the
    per-family feature sets match the expected pattern for the order
    distribution, and |shared varying features| = order(A) + order(B) - k
    for every family pair;
  * every support carries exactly 432 arrangements.

The tally is keyed by the per-coordinate family-variation masks, which are
determined by the corner values at that coordinate alone; the grid-level
pass recomputes family orders from the constructed cells as an independent
cross-check of the mask arithmetic.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Iterator, Sequence

from .cards import Card, card_from_index
from .squares import (
    MagicSquare,
    SquareType,
    REALIZABLE_TYPES,
    admissible_distributions,
    canonical_pattern,
    FEATURE_PATTERNS,
)
from .symmetry import orbit_count_squares, orbit_count_squares_uncorrected

TOTAL_SQUARES = 505440
ARRANGEMENTS_PER_SUPPORT = 432

_COORDS = [((i // 27) % 3, (i // 9) % 3, (i // 3) % 3, i % 3) for i in range(81)]

# third-card index table: _THIRD[a][b] completes cards a, b to a set
_THIRD = [
    [
        (-x0 - y0) % 3 * 27 + (-x1 - y1) % 3 * 9 + (-x2 - y2) % 3 * 3 + (-x3 - y3) % 3
        for (y0, y1, y2, y3) in _COORDS
    ]
    for (x0, x1, x2, x3) in _COORDS
]

# Per-coordinate family-variation mask, indexed by (a_i*3 + b_i)*3 + c_i for
# corner values a_i, b_i, c_i at that coordinate.  Bit set when the family's
# lines vary there: rows iff a_i != b_i, columns iff a_i + b_i + c_i != 0,
# diagonals iff b_i != c_i, anti-diagonals iff a_i != c_i.
_R, _C, _D, _A = 1, 2, 4, 8
_MASK = [0] * 27
for _ai in range(3):
    for _bi in range(3):
        for _ci in range(3):
            _m = 0
            if _ai != _bi:
                _m |= _R
            if (_ai + _bi + _ci) % 3:
                _m |= _C
            if _bi != _ci:
                _m |= _D
            if _ai != _ci:
                _m |= _A
            _MASK[(_ai * 3 + _bi) * 3 + _ci] = _m

_BITS = [bin(m).count("1") for m in range(16)]


@dataclass(frozen=True)
class Check:
    """One verified claim: the computed value against its expectation."""

    name: str
    expected: object
    computed: object
    ok: bool


@dataclass
class CensusReport:
    total_squares: int
    by_order: dict[int, int]
    by_type: dict[SquareType, int]
    by_ordered_tuple: dict[tuple[int, int, int, int], int]
    supports_total: int
    supports_by_order: dict[int, int]
    formula_checks: list[Check] = field(default_factory=list)

    def check_failures(self) -> list[Check]:
        return [c for c in self.formula_checks if not c.ok]


def enumerate_all_squares() -> Iterator[MagicSquare]:
    """Stream all 505440 squares, one per ordered corner triple."""
    third = _THIRD
    from_index = card_from_index
    for a in range(81):
        row_a = third[a]
        for b in range(81):
            if b == a:
                continue
            t = row_a[b]
            for c in range(81):
                if c == a or c == b or c == t:
                    continue
                yield MagicSquare(tuple(from_index(i) for i in _grid_indices(a, b, c)))


def _grid_indices(a: int, b: int, c: int) -> tuple[int, ...]:
    """Flat card indices of the grid built from corner indices (a, b, c)."""
    third = _THIRD
    t_ab = third[a][b]
    t_bc = third[b][c]
    t_ac = third[a][c]
    return (
        t_bc,              # -b-c
        third[c][t_ab],    # a+b-c
        t_ac,              # -a-c
        third[a][t_bc],    # -a+b+c
        c,
        third[b][t_ac],    # a-b+c
        a,
        t_ab,              # -a-b
        b,
    )


def _census_shard(a_range: Sequence[int]) -> tuple[dict, dict, int]:
    """Tallies for all corner triples whose bottom-left card is in a_range.

    Returns (mask-key tally, support tally with per-support order, count of
    grid-level law violations).  Shards are independent, so partial tallies
    merge by plain addition.
    """
    coords = _COORDS
    third = _THIRD
    mask = _MASK
    key_tally: dict[tuple[int, int, int, int], int] = {}
    support_tally: dict[tuple[int, ...], list] = {}
    violations = 0
    for a in a_range:
        a0, a1, a2, a3 = coords[a]
        row_a = third[a]
        for b in range(81):
            if b == a:
                continue
            b0, b1, b2, b3 = coords[b]
            t_ab = row_a[b]
            p0 = (a0 * 3 + b0) * 3
            p1 = (a1 * 3 + b1) * 3
            p2 = (a2 * 3 + b2) * 3
            p3 = (a3 * 3 + b3) * 3
            row_b = third[b]
            for c in range(81):
                if c == a or c == b or c == t_ab:
                    continue
                c0, c1, c2, c3 = coords[c]
                key = (mask[p0 + c0], mask[p1 + c1], mask[p2 + c2], mask[p3 + c3])
                if key in key_tally:
                    key_tally[key] += 1
                else:
                    key_tally[key] = 1

                # independent grid-level pass: build the cells and recheck
                # the 12 lines directly
                t_bc = row_b[c]
                t_ac = row_a[c]
                ml = row_a[t_bc]
                mr = row_b[t_ac]
                tm = third[c][t_ab]
                if not _lines_ok(t_bc, tm, t_ac, ml, c, mr, a, t_ab, b, key):
                    violations += 1
                skey = tuple(sorted((a, b, c, t_ab, t_bc, t_ac, ml, mr, tm)))
                entry = support_tally.get(skey)
                korder = sum(1 for m in key if m)
                if entry is None:
                    support_tally[skey] = [1, korder]
                else:
                    entry[0] += 1
                    if entry[1] != korder:
                        violations += 1
    return key_tally, support_tally, violations


def _lines_ok(
    g0: int, g1: int, g2: int, g3: int, g4: int, g5: int, g6: int, g7: int, g8: int,
    key: tuple[int, int, int, int],
) -> bool:
    """Recheck the constructed grid: all 12 lines are sets, parallel lines
    share one order per family, and those orders match the mask tally key."""
    third = _THIRD
    grid = (g0, g1, g2, g3, g4, g5, g6, g7, g8)
    if len(set(grid)) != 9:
        return False
    expected = tuple(sum(1 for m in key if m & bit) for bit in (_R, _C, _D, _A))
    for fam_idx, fam_lines in enumerate(_FLAT_LINES):
        order = -1
        for i, j, k in fam_lines:
            x, y, z = grid[i], grid[j], grid[k]
            if third[x][y] != z:
                return False
            line_order = _DIFF[x][y]
            if order < 0:
                order = line_order
            elif order != line_order:
                return False
        if order != expected[fam_idx]:
            return False
    return True


_FLAT_LINES = (
    ((0, 1, 2), (3, 4, 5), (6, 7, 8)),
    ((0, 3, 6), (1, 4, 7), (2, 5, 8)),
    ((0, 4, 8), (1, 5, 6), (2, 3, 7)),
    ((0, 5, 7), (1, 3, 8), (2, 4, 6)),
)

# pairwise differing-coordinate counts; for two cards of a set this is the
# set's order
_DIFF = [
    [sum(1 for x, y in zip(ca, cb) if x != y) for cb in _COORDS] for ca in _COORDS
]


def classify_census(workers: int = 1) -> CensusReport:
    """Run the full census and return verified tallies.

    workers > 1 partitions the corner sweep over the bottom-left card and
    merges the per-shard tallies; the merge is plain addition, so the result
    is identical for any worker count.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1:
        shards = [_census_shard(range(81))]
    else:
        chunks = [range(i, 81, workers) for i in range(workers)]
        with Pool(workers) as pool:
            shards = pool.map(_census_shard, chunks)

    key_tally: dict[tuple[int, int, int, int], int] = {}
    support_tally: dict[tuple[int, ...], list] = {}
    violations = 0
    for kt, st, v in shards:
        violations += v
        for k, n in kt.items():
            key_tally[k] = key_tally.get(k, 0) + n
        for s, (n, korder) in st.items():
            entry = support_tally.get(s)
            if entry is None:
                support_tally[s] = [n, korder]
            else:
                entry[0] += n
                if entry[1] != korder:
                    violations += 1

    return _report_from_tallies(key_tally, support_tally, violations)


def _report_from_tallies(
    key_tally: dict[tuple[int, int, int, int], int],
    support_tally: dict[tuple[int, ...], list],
    grid_violations: int,
) -> CensusReport:
    checks: list[Check] = []
    by_order: dict[int, int] = {}
    by_tuple: dict[tuple[int, int, int, int], int] = {}
    by_type: dict[SquareType, int] = {}

    pattern_ok = True
    law_ok = True
    for key, n in key_tally.items():
        orders = tuple(sum(1 for m in key if m & bit) for bit in (_R, _C, _D, _A))
        korder = sum(1 for m in key if m)
        # diversity = 3k/4 is equivalent to the orders summing to 3k
        if sum(orders) != 3 * korder:
            law_ok = False
        if tuple(sorted(orders)) not in admissible_distributions(korder):
            law_ok = False
        if not _pattern_matches(key, orders, korder):
            pattern_ok = False
        by_order[korder] = by_order.get(korder, 0) + n
        by_tuple[orders] = by_tuple.get(orders, 0) + n
        sq_type = SquareType.from_orders(*orders)
        by_type[sq_type] = by_type.get(sq_type, 0) + n

    total = sum(key_tally.values())
    supports_total = len(support_tally)
    supports_by_order: dict[int, int] = {}
    all_432 = True
    for _, (n, korder) in support_tally.items():
        supports_by_order[korder] = supports_by_order.get(korder, 0) + 1
        if n != ARRANGEMENTS_PER_SUPPORT:
            all_432 = False

    checks.append(Check("grid pass: 12 set lines, equal parallel orders, mask agreement", 0, grid_violations, grid_violations == 0))
    checks.append(Check("diversity = 3k/4 and admissible order multiset for 100% of squares", True, law_ok, law_ok))
    checks.append(Check("feature-distribution pattern for 100% of squares", True, pattern_ok, pattern_ok))
    checks.append(Check("every support has exactly 432 arrangements", True, all_432, all_432))

    return CensusReport(
        total_squares=total,
        by_order=dict(sorted(by_order.items())),
        by_type={t: by_type[t] for t in sorted(by_type, key=lambda t: (t.rc, t.da))},
        by_ordered_tuple=dict(sorted(by_tuple.items())),
        supports_total=supports_total,
        supports_by_order=dict(sorted(supports_by_order.items())),
        formula_checks=checks,
    )


def _pattern_matches(
    key: tuple[int, int, int, int], orders: tuple[int, int, int, int], korder: int
) -> bool:
    """Feature-distribution laws for one mask key: every varying feature
    varies in exactly 3 families, family pairs share order(A)+order(B)-k
    varying features, and the per-family feature sets match the expected
    pattern for the order multiset."""
    for m in key:
        if m and _BITS[m] != 3:
            return False
    bits = (_R, _C, _D, _A)
    for i in range(4):
        for j in range(i + 1, 4):
            shared = sum(1 for m in key if m & bits[i] and m & bits[j])
            if shared != orders[i] + orders[j] - korder:
                return False
    fam_sets = [
        frozenset(f for f in range(4) if key[f] & bit) for bit in bits
    ]
    expected = FEATURE_PATTERNS[tuple(sorted(orders))]
    return canonical_pattern(fam_sets) == canonical_pattern(expected)


# Golden counts per type: (type text, rc-diversity text, count).
EXPECTED_TYPE_TABLE: tuple[tuple[str, str, int], ...] = (
    ("(1-1;2-2)", "1", 3888),
    ("(1-2;1-2)", "1.5", 15552),
    ("(2-2;1-1)", "2", 3888),
    ("(1-2;3-3)", "1.5", 15552),
    ("(1-3;2-3)", "2", 31104),
    ("(2-3;1-3)", "2.5", 31104),
    ("(3-3;1-2)", "3", 15552),
    ("(2-2;2-3)", "2", 31104),
    ("(2-3;2-2)", "2.5", 31104),
    ("(1-3;4-4)", "2", 10368),
    ("(1-4;3-4)", "2.5", 20736),
    ("(3-4;1-4)", "2.5", 20736),
    ("(4-4;1-3)", "3", 10368),
    ("(2-2;4-4)", "2", 7776),
    ("(2-4;2-4)", "2.5", 31104),
    ("(4-4;2-2)", "3", 7776),
    ("(2-3;3-4)", "2.5", 62208),
    ("(2-4;3-3)", "3", 31104),
    ("(3-3;2-4)", "3", 31104),
    ("(3-4;2-3)", "3.5", 62208),
    ("(3-3;3-3)", "3", 31104),
)

EXPECTED_BY_ORDER = {2: 23328, 3: 155520, 4: 326592}
EXPECTED_SUPPORTS_BY_ORDER = {2: 54, 3: 360, 4: 756}


def verify_relations(report: CensusReport) -> list[Check]:
    """All count identities and symmetry relations against the census."""
    checks: list[Check] = []

    def add(name: str, expected, computed) -> None:
        checks.append(Check(name, expected, computed, expected == computed))

    add("total squares", TOTAL_SQUARES, report.total_squares)
    for order, count in EXPECTED_BY_ORDER.items():
        add(f"squares of order {order}", count, report.by_order.get(order, 0))
    add("number of types", 21, len(report.by_type))
    add("realizable type list", set(REALIZABLE_TYPES), set(report.by_type))

    expected_by_type = {SquareType.parse(t): n for t, _, n in EXPECTED_TYPE_TABLE}
    for sq_type, count in expected_by_type.items():
        add(f"count of type {sq_type}", count, report.by_type.get(sq_type, 0))
    for text, rc_div, _ in EXPECTED_TYPE_TABLE:
        sq_type = SquareType.parse(text)
        add(
            f"rc-diversity of {sq_type}",
            rc_div,
            f"{float(sq_type.rc_diversity):g}",
        )

    # multiplicity: N(x-y;z-w) is N(x,y,z,w) times 1, 2, or 4 depending on
    # how many of x=y, z=w hold
    for sq_type, count in report.by_type.items():
        x, y = sq_type.rc
        z, w = sq_type.da
        mult = (1 if x == y else 2) * (1 if z == w else 2)
        add(
            f"multiplicity x{mult} for {sq_type}",
            count,
            mult * report.by_ordered_tuple.get((x, y, z, w), 0),
        )
    # mirror symmetry between (x-y;z-w) and (z-w;x-y)
    for sq_type, count in report.by_type.items():
        add(
            f"mirror count {sq_type} vs {sq_type.flipped()}",
            count,
            report.by_type.get(sq_type.flipped(), 0),
        )

    add("supports total", TOTAL_SQUARES // ARRANGEMENTS_PER_SUPPORT, report.supports_total)
    for order, count in EXPECTED_SUPPORTS_BY_ORDER.items():
        add(f"supports of order {order}", count, report.supports_by_order.get(order, 0))
        add(
            f"supports of order {order} = squares/432",
            report.by_order.get(order, 0) // ARRANGEMENTS_PER_SUPPORT,
            report.supports_by_order.get(order, 0),
        )

    # counting-argument identities, each against its census bucket
    add("81*8*6 = N(1,1,2,2)", 81 * 8 * 6, report.by_ordered_tuple.get((1, 1, 2, 2), 0))
    add("81*8*12 = N(1,2,3,3)", 81 * 8 * 12, report.by_ordered_tuple.get((1, 2, 3, 3), 0))
    add("108*6*8 = N(1,3,4,4)", 108 * 6 * 8, report.by_ordered_tuple.get((1, 3, 4, 4), 0))
    add("324*6*4 = N(2,2,4,4)", 324 * 6 * 4, report.by_ordered_tuple.get((2, 2, 4, 4), 0))
    add("432*6*12 = N(3,3,3,3)", 432 * 6 * 12, report.by_ordered_tuple.get((3, 3, 3, 3), 0))
    add(
        "31104 - 15552 = N(3,2,2,2)",
        31104 - 15552,
        report.by_ordered_tuple.get((3, 2, 2, 2), 0),
    )
    add(
        "rows-3 cols-2 squares total 31104",
        31104,
        sum(n for t, n in report.by_ordered_tuple.items() if t[0] == 3 and t[1] == 2),
    )
    add(
        "31104 - 31104/2 = N(2,4,3,3)",
        31104 - 31104 // 2,
        report.by_ordered_tuple.get((2, 4, 3, 3), 0),
    )

    # the corrected orbit formula must reproduce every census bucket
    formula_ok = all(
        orbit_count_squares(*t) == n for t, n in report.by_ordered_tuple.items()
    )
    add("orbit formula matches census for all ordered tuples", True, formula_ok)

    # erratum: the (4 - order)!-style variant must NOT reproduce the census;
    # the check passes when the discrepancy is present as expected
    t3333 = (3, 3, 3, 3)
    uncorrected = orbit_count_squares_uncorrected(*t3333)
    census_val = report.by_ordered_tuple.get(t3333, 0)
    checks.append(
        Check(
            "erratum flagged: uncorrected orbit formula disagrees at (3,3,3,3) "
            f"(gives {uncorrected}, census {census_val})",
            True,
            uncorrected != census_val,
            uncorrected != census_val,
        )
    )
    mismatch_tuples = sorted(
        t
        for t, n in report.by_ordered_tuple.items()
        if orbit_count_squares_uncorrected(*t) != n
    )
    checks.append(
        Check(
            "erratum flagged: uncorrected formula mismatch set is non-empty",
            True,
            bool(mismatch_tuples),
            bool(mismatch_tuples),
        )
    )
    return checks


def emit_report(report: CensusReport, fmt: str = "json") -> str:
    """Serialize the census; types are ordered by (x, y, z, w)."""
    ordered_types = sorted(report.by_type, key=lambda t: (t.rc, t.da))
    if fmt == "json":
        doc = {
            "total_squares": report.total_squares,
            "by_order": {str(k): v for k, v in report.by_order.items()},
            "by_type": [
                {
                    "type": str(t),
                    "order": t.order,
                    "rc_diversity": f"{float(t.rc_diversity):g}",
                    "count": report.by_type[t],
                }
                for t in ordered_types
            ],
            "by_ordered_tuple": {
                ",".join(map(str, t)): n for t, n in report.by_ordered_tuple.items()
            },
            "supports_total": report.supports_total,
            "supports_by_order": {str(k): v for k, v in report.supports_by_order.items()},
            "checks": [
                {
                    "name": c.name,
                    "expected": repr(c.expected),
                    "computed": repr(c.computed),
                    "ok": c.ok,
                }
                for c in report.formula_checks
            ],
        }
        return json.dumps(doc, indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["type", "order", "rc_diversity", "count"])
        for t in ordered_types:
            writer.writerow(
                [str(t), t.order, f"{float(t.rc_diversity):g}", report.by_type[t]]
            )
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}, expected json or csv")


def all_supports() -> list[tuple[Card, ...]]:
    """The 1170 distinct 9-card supports, each as an ascending card tuple."""
    seen: set[tuple[int, ...]] = set()
    out: list[tuple[Card, ...]] = []
    third = _THIRD
    for a in range(81):
        row_a = third[a]
        for b in range(a + 1, 81):
            t_ab = row_a[b]
            for c in range(81):
                if c == a or c == b or c == t_ab:
                    continue
                key = tuple(
                    sorted(
                        (a, b, c, t_ab, third[b][c], row_a[c],
                         row_a[third[b][c]], third[b][row_a[c]], third[c][t_ab])
                    )
                )
                if key not in seen:
                    seen.add(key)
                    out.append(tuple(card_from_index(i) for i in key))
    return out


def support_order(cards: Sequence[Card]) -> int:
    """Number of features not constant across the nine cards."""
    return sum(1 for f in range(4) if len({c[f] for c in cards}) > 1)
