"""Published classification tables for three- and four-qubit states.

Patterns are transcribed as printed. The 28 level-4 minors of the four-qubit
table are printed only as counts of zeros and ones, so they are stored as a
:class:`Tally`. Expected coarse values are recomputed from the printed
patterns; where the printed coarse value disagrees, it is kept in
``printed_coarse`` and the row carries a note.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .indicators import EPS_ZERO, level_minors
from .ketparse import parse_state
from .state import PureState, normalize, random_state, tensor_product

__all__ = [
    "Tally",
    "TableRow",
    "TableFixture",
    "RowCheck",
    "TABLE_1",
    "TABLE_2",
    "TABLES",
    "separable_state",
    "pattern_matches",
    "format_pattern",
    "check_row",
    "check_table",
]

SEPARABLE_SEED = 2013


@dataclass(frozen=True)
class Tally:
    """A pattern known only by its number of zeros and ones."""

    zeros: int
    ones: int

    def __len__(self):
        return self.zeros + self.ones

    def matches(self, pattern: Sequence[int]) -> bool:
        return len(pattern) == len(self) and sum(pattern) == self.ones

    def __str__(self):
        if self.ones == 0:
            return f"[0_{self.zeros}]"
        ones = "1" if self.ones == 1 else f"1_{self.ones}"
        return f"[0_{self.zeros},{ones}]"


Pattern = Union[tuple[int, ...], Tally]


def _ones(p: Pattern) -> int:
    return p.ones if isinstance(p, Tally) else sum(p)


def pattern_matches(expected: Pattern, got: Sequence[int]) -> bool:
    if isinstance(expected, Tally):
        return expected.matches(got)
    return list(expected) == list(got)


def format_pattern(p: Pattern) -> str:
    if isinstance(p, Tally):
        return str(p)
    return "[" + ",".join(str(b) for b in p) + "]"


def separable_state(n_sites: int, seed: int = SEPARABLE_SEED) -> PureState:
    """Product of seeded random single-qubit states, standing in for the generic product row."""
    out = random_state([2], seed)
    for k in range(1, n_sites):
        out = tensor_product(out, random_state([2], seed + k))
    return normalize(out)


@dataclass(frozen=True)
class TableRow:
    label: str
    expression: str | None
    patterns: dict[int, Pattern]  # level -> expected binary pattern
    printed_coarse: tuple[Fraction, ...] | None = None
    note: str = ""
    n_sites: int = 3

    @property
    def levels(self) -> list[int]:
        return sorted(self.patterns, reverse=True)

    @property
    def derived_coarse(self) -> tuple[Fraction, ...]:
        """Coarse values implied by the printed patterns (unweighted mean)."""
        return tuple(Fraction(_ones(self.patterns[m]), len(self.patterns[m])) for m in self.levels)

    @property
    def expected_coarse(self) -> tuple[Fraction, ...]:
        return self.printed_coarse if self.printed_coarse is not None else self.derived_coarse

    @property
    def discrepancy(self) -> bool:
        return self.printed_coarse is not None and self.printed_coarse != self.derived_coarse

    def state(self) -> PureState:
        if self.expression is None:
            return separable_state(self.n_sites)
        return normalize(parse_state(self.expression))


@dataclass(frozen=True)
class TableFixture:
    name: str
    caption: str
    rows: tuple[TableRow, ...] = field(default=())


F = Fraction
Z6, Z12 = (0,) * 6, (0,) * 12

TABLE_1 = TableFixture(
    "table-1",
    "3-qubit reference states",
    (
        TableRow("General Separable State", None, {3: Z6, 2: (0, 0)}, (F(0), F(0))),
        TableRow(
            "GHZ-state",
            "(1/sqrt(2))(|000>+|111>)",
            {3: (0, 0, 1, 0, 0, 0), 2: (0, 0)},
            (F(1, 6), F(0)),
        ),
        TableRow(
            "W-state",
            "(1/sqrt(3))(|001>+|010>+|100>)",
            {3: (1, 1, 0, 0, 0, 0), 2: (1, 0)},
            (F(1, 3), F(1, 2)),
        ),
        TableRow(
            "Cluster state",
            "(1/sqrt(8))(|000>+|001>+|010>-|011>+|100>+|101>-|110>+|111>)",
            {3: (1, 0, 1, 1, 0, 1), 2: (1, 1)},
            (F(2, 3), F(1)),
        ),
        TableRow(
            "psi-state",
            "(1/2)(|001>+|010>+|100>+|111>)",
            {3: (1, 1, 0, 0, 1, 1), 2: (1, 1)},
            (F(2, 3), F(1)),
        ),
        TableRow(
            "phi-state",
            "(1/2)(|000>+|011>+|101>+|110>)",
            {3: (1, 1, 0, 0, 1, 1), 2: (1, 1)},
            (F(2, 3), F(1)),
        ),
    ),
)

TABLE_2 = TableFixture(
    "table-2",
    "4-qubit reference states",
    (
        TableRow(
            "Separable", None, {4: Tally(28, 0), 3: Z12, 2: (0, 0, 0, 0)},
            (F(0), F(0), F(0)), n_sites=4,
        ),
        TableRow(
            "GHZ",
            "(1/sqrt(2))(|0000>+|1111>)",
            {4: Tally(27, 1), 3: Z12, 2: (0, 0, 0, 0)},
            (F(1, 28), F(0), F(0)),
            n_sites=4,
        ),
        TableRow(
            "W",
            "(1/sqrt(4))(|0001>+|0010>+|0100>+|1000>)",
            {4: Tally(25, 3), 3: (1, 1) + (0,) * 10, 2: (1, 0, 0, 0)},
            (F(3, 28), F(1, 6), F(1, 4)),
            n_sites=4,
        ),
        TableRow(
            "Cluster",
            "(1/sqrt(4))(|0000>+|0011>+|1100>-|1111>)",
            {4: Tally(24, 4), 3: Z12, 2: (1, 0, 0, 1)},
            (F(1, 12), F(0), F(1)),
            note=(
                "printed coarse [1/12; 0; 1] differs from the unweighted mean of the "
                "printed patterns [1/7; 0; 1/2]"
            ),
            n_sites=4,
        ),
        TableRow(
            "psi",
            "(1/sqrt(8))(|0001>+|0010>+|0100>+|0111>+|1000>+|1011>-|1101>+|1110>)",
            {4: Tally(12, 16), 3: (1, 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1), 2: (1, 1, 1, 1)},
            (F(4, 7), F(2, 3), F(1)),
            n_sites=4,
        ),
        TableRow(
            "phi",
            "(1/sqrt(8))(|0000>+|0011>+|0101>+|0110>+|1001>+|1010>-|1100>+|1111>)",
            {4: Tally(12, 16), 3: (1, 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1), 2: (1, 1, 1, 1)},
            (F(4, 7), F(2, 3), F(1)),
            n_sites=4,
        ),
    ),
)

TABLES = {1: TABLE_1, 2: TABLE_2}


@dataclass(frozen=True)
class RowCheck:
    row: TableRow
    patterns: dict[int, list[int]]
    coarse: tuple[Fraction, ...]
    pattern_ok: dict[int, bool]
    coarse_ok: tuple[bool, ...]

    @property
    def ok(self) -> bool:
        return all(self.pattern_ok.values()) and all(self.coarse_ok)


def check_row(row: TableRow, tol: float | None = None) -> RowCheck:
    """Recompute a row and compare it with the transcription.

    Coarse cells are compared against the values derived from the printed
    patterns, so a row with a printed-coarse discrepancy can still pass.
    """
    state = row.state()
    got, ok = {}, {}
    coarse = []
    for m in row.levels:
        rep = level_minors(state, m, EPS_ZERO if tol is None else tol)
        got[m] = rep.binary_pattern
        ok[m] = pattern_matches(row.patterns[m], got[m])
        coarse.append(rep.coarse_fraction)
    coarse_ok = tuple(c == e for c, e in zip(coarse, row.derived_coarse))
    return RowCheck(row, got, tuple(coarse), ok, coarse_ok)


def check_table(table: TableFixture, tol: float | None = None) -> list[RowCheck]:
    return [check_row(r, tol) for r in table.rows]

