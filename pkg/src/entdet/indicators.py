"""Level-by-level 2x2 minor enumeration and the indicators built on it.

At level ``m`` the sites ``m+1 .. n`` are taken as measured in the
computational basis. Each outcome tuple ``(b_n, ..., b_{m+1})`` is a branch;
its raw coefficient slice is laid out as a ``d_m x prod(d_1..d_{m-1})`` matrix
(site 1 most significant in the column index) and every 2x2 minor of that
matrix is recorded. Canonical order is branch-lex, then column pair, then row
pair. For three qubits this numbers the level-3 minors exactly as

    det(1)_3 = x000 x011 - x001 x010      det(4)_3 = x010 x101 - x011 x100
    det(2)_3 = x000 x101 - x001 x100      det(5)_3 = x010 x111 - x011 x110
    det(3)_3 = x000 x111 - x001 x110      det(6)_3 = x100 x111 - x101 x110
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .state import DimensionError, PureState

__all__ = [
    "EPS_ZERO",
    "MinorRecord",
    "LevelReport",
    "AnalysisReport",
    "level_minors",
    "minor_count",
    "total_distinct_minors",
    "coarse_indicator",
    "full_profile",
    "concurrence",
    "cayley_hyperdet",
    "three_tangle",
    "hyperdet_from_minors",
]

EPS_ZERO = 1e-10

Mode = Literal["binary", "raw"]


@dataclass(frozen=True)
class MinorRecord:
    level: int
    branch: tuple[int, ...]
    row_pair: tuple[int, int]
    col_pair: tuple[int, int]
    value: complex
    magnitude: float
    binary: int

    def to_dict(self) -> dict:
        return {
            "branch": list(self.branch),
            "row_pair": list(self.row_pair),
            "col_pair": list(self.col_pair),
            "re": self.value.real,
            "im": self.value.imag,
            "magnitude": self.magnitude,
            "binary": self.binary,
        }


@dataclass(frozen=True)
class LevelReport:
    level: int
    minors: tuple[MinorRecord, ...]
    branches: tuple[tuple[int, ...], ...]
    branch_probabilities: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.minors)

    @property
    def binary_pattern(self) -> list[int]:
        return [r.binary for r in self.minors]

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.minors], dtype=np.complex128)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.array([r.magnitude for r in self.minors])

    @property
    def coarse_binary(self) -> float:
        return coarse_indicator(self, "binary")

    @property
    def coarse_raw(self) -> float:
        return coarse_indicator(self, "raw")

    @property
    def coarse_fraction(self) -> Fraction:
        """Binary coarse value as an exact rational (reduced)."""
        return Fraction(sum(self.binary_pattern), self.count)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "count": self.count,
            "branches": [list(b) for b in self.branches],
            "branch_probabilities": list(self.branch_probabilities),
            "coarse_binary": self.coarse_binary,
            "coarse_raw": self.coarse_raw,
            "minors": [r.to_dict() for r in self.minors],
        }


@dataclass(frozen=True)
class AnalysisReport:
    dims: tuple[int, ...]
    levels: tuple[LevelReport, ...]  # m = N down to 2
    concurrence: float | None = None
    cayley: complex | None = None
    tangle: float | None = None
    tol: float = field(default=EPS_ZERO, repr=False)

    @property
    def coarse_binary(self) -> list[float]:
        return [lv.coarse_binary for lv in self.levels]

    @property
    def coarse_raw(self) -> list[float]:
        return [lv.coarse_raw for lv in self.levels]

    def coarse(self, mode: Mode = "binary") -> list[float]:
        return self.coarse_binary if mode == "binary" else self.coarse_raw

    def level(self, m: int) -> LevelReport:
        for lv in self.levels:
            if lv.level == m:
                return lv
        raise KeyError(m)

    def to_dict(self) -> dict:
        doc = {
            "dims": list(self.dims),
            "tolerance": self.tol,
            "levels": [lv.to_dict() for lv in self.levels],
            "coarse": {
                "binary": self.coarse_binary,
                "binary_exact": [str(lv.coarse_fraction) for lv in self.levels],
                "raw": self.coarse_raw,
            },
        }
        if self.concurrence is not None:
            doc["concurrence"] = self.concurrence
        if self.cayley is not None:
            doc["cayley"] = {"re": self.cayley.real, "im": self.cayley.imag}
            doc["tangle"] = self.tangle
        return doc


def _check_level(n: int, m: int) -> None:
    if not 2 <= m <= n:
        raise DimensionError(f"level {m} out of range 2..{n}")


def minor_count(dims: Sequence[int], m: int) -> int:
    """Number of minors emitted at level ``m``.

    ``prod(d_j, j > m) * C(d_m, 2) * C(prod(d_i, i < m), 2)``; for qubits this
    is ``2**(N-m) * C(2**(m-1), 2)``.
    """
    dims = list(dims)
    _check_level(len(dims), m)
    return math.prod(dims[m:]) * math.comb(dims[m - 1], 2) * math.comb(math.prod(dims[: m - 1]), 2)


def total_distinct_minors(N: int) -> int:
    """``sum_{m=2..N} C(2**(m-1), 2)``, checked against the Gaussian binomial [N,2]_2."""
    if N < 2:
        raise ValueError("N must be at least 2")
    total = sum(math.comb(2 ** (m - 1), 2) for m in range(2, N + 1))
    closed = (2**N - 1) * (2 ** (N - 1) - 1) // 3
    if total != closed:
        raise ArithmeticError(f"minor total {total} disagrees with Gaussian binomial {closed}")
    return total


def _pairs(k: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(k), 2))


def level_minors(state: PureState, m: int, tol: float = EPS_ZERO) -> LevelReport:
    """All 2x2 minors at level ``m``, in canonical order.

    Slices are the raw coefficients of the given state; nothing is
    renormalized, so an unrealizable branch contributes zero minors.
    """
    dims = state.dims
    n = len(dims)
    _check_level(n, m)
    t = state.tensor
    d_m = dims[m - 1]
    n_cols = math.prod(dims[: m - 1])
    col_pairs = _pairs(n_cols)
    row_pairs = _pairs(d_m)

    records = []
    branches = []
    probs = []
    for branch in itertools.product(*(range(d) for d in reversed(dims[m:]))):
        # branch is (b_n, ..., b_{m+1}); index trailing axes in site order
        sl = t[(Ellipsis,) + tuple(reversed(branch))]
        mat = sl.reshape(n_cols, d_m).T
        branches.append(branch)
        probs.append(float(np.vdot(sl, sl).real))
        for c1, c2 in col_pairs:
            for r1, r2 in row_pairs:
                v = complex(mat[r1, c1] * mat[r2, c2] - mat[r2, c1] * mat[r1, c2])
                mag = abs(v)
                records.append(MinorRecord(m, branch, (r1, r2), (c1, c2), v, mag, int(mag > tol)))
    return LevelReport(m, tuple(records), tuple(branches), tuple(probs))


def coarse_indicator(report: LevelReport, mode: Mode = "binary") -> float:
    """Unweighted mean of the level's minors, binarized or raw magnitudes."""
    if mode not in ("binary", "raw"):
        raise ValueError(f"unknown mode {mode!r}")
    if report.count == 0:
        return 0.0
    if mode == "binary":
        return sum(r.binary for r in report.minors) / report.count
    return math.fsum(r.magnitude for r in report.minors) / report.count


def concurrence(state: PureState) -> float:
    """``2 |x00 x11 - x01 x10|`` for a two-qubit state."""
    if state.dims != (2, 2):
        raise DimensionError(f"concurrence needs dims [2, 2], got {list(state.dims)}")
    x = state.amps
    return 2.0 * abs(x[0] * x[3] - x[1] * x[2])


def cayley_hyperdet(state: PureState) -> complex:
    """Cayley hyperdeterminant of a 2x2x2 coefficient tensor."""
    if state.dims != (2, 2, 2):
        raise DimensionError(f"hyperdeterminant needs dims [2, 2, 2], got {list(state.dims)}")
    x000, x001, x010, x011, x100, x101, x110, x111 = (complex(z) for z in state.amps)
    return (
        x000**2 * x111**2 + x001**2 * x110**2 + x010**2 * x101**2 + x100**2 * x011**2
        - 2 * (
            x000 * x001 * x110 * x111
            + x000 * x010 * x101 * x111
            + x000 * x011 * x100 * x111
            + x001 * x010 * x101 * x110
            + x001 * x011 * x110 * x100
            + x010 * x011 * x101 * x100
        )
        + 4 * (x000 * x011 * x101 * x110 + x001 * x010 * x100 * x111)
    )


def three_tangle(state: PureState) -> float:
    return 4.0 * abs(cayley_hyperdet(state))


def hyperdet_from_minors(d1, d2, d3, d4, d5, d6) -> complex:
    """The hyperdeterminant rebuilt from the six level-3 minors."""
    return complex(d3 * d3 + d4 * d4 - 2 * d2 * d5 - 2 * d1 * d6)


def full_profile(state: PureState, tol: float = EPS_ZERO) -> AnalysisReport:
    """Level reports for m = N..2, plus concurrence or hyperdeterminant when they apply."""
    n = state.n_sites
    if n < 2:
        raise DimensionError("profiling needs at least two sites")
    levels = tuple(level_minors(state, m, tol) for m in range(n, 1, -1))
    conc = concurrence(state) if state.dims == (2, 2) else None
    cay = tangle = None
    if state.dims == (2, 2, 2):
        cay = cayley_hyperdet(state)
        tangle = 4.0 * abs(cay)
    return AnalysisReport(state.dims, levels, conc, cay, tangle, tol)
