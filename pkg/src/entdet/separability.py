"""Rank-one tests on single-site flattenings and the peel-off factorization.

A state splits off site ``s`` exactly when its site-``s`` flattening has rank
one, i.e. every 2x2 minor vanishes. Rank is decided from the minors against
an absolute threshold rather than from singular values, so the verdicts agree
with the level-``n`` indicator pattern.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .indicators import EPS_ZERO
from .state import (
    DegenerateStateError,
    DimensionError,
    Flattening,
    PureState,
    flatten,
    phase_fix,
    scalar_residual,
    state_to_dict,
    tensor_product,
)

__all__ = [
    "MARGIN",
    "RankDecision",
    "Factorization",
    "SeparabilityReport",
    "PartialSplit",
    "matrix_rank_one",
    "partially_separable",
    "factorize",
    "completely_separable",
    "classify",
]

# decisions with max_minor in [tol / MARGIN, tol * MARGIN] are flagged marginal
MARGIN = 10.0


@dataclass(frozen=True)
class RankDecision:
    rank_one: bool
    max_minor: float
    witness: tuple[tuple[int, int], tuple[int, int], float] | None = None
    degenerate: bool = False
    marginal: bool = False


def _all_minors(mat: np.ndarray) -> tuple[np.ndarray, list, list]:
    rows, cols = mat.shape
    rp = list(itertools.combinations(range(rows), 2))
    cp = list(itertools.combinations(range(cols), 2))
    if not rp or not cp:
        return np.zeros(0), rp, cp
    r1, r2 = np.array(rp).T
    c1, c2 = np.array(cp).T
    # shape (len(cp), len(rp)): column pair outer, row pair inner
    minors = (
        mat[r1[None, :], c1[:, None]] * mat[r2[None, :], c2[:, None]]
        - mat[r2[None, :], c1[:, None]] * mat[r1[None, :], c2[:, None]]
    )
    return np.abs(minors).reshape(-1), rp, cp


def matrix_rank_one(flat: Flattening | np.ndarray, tol: float = EPS_ZERO) -> RankDecision:
    """Decide rank one from the 2x2 minors.

    The witness is the first violating minor in column-pair-major order. An
    all-zero matrix is reported as rank one with ``degenerate`` set.
    """
    mat = np.asarray(flat.matrix if isinstance(flat, Flattening) else flat, dtype=np.complex128)
    if mat.ndim != 2:
        raise DimensionError("expected a matrix")
    mags, rp, cp = _all_minors(mat)
    degenerate = not np.any(np.abs(mat) > tol)
    if mags.size == 0:
        return RankDecision(True, 0.0, None, degenerate)
    max_minor = float(mags.max())
    marginal = tol / MARGIN <= max_minor <= tol * MARGIN
    bad = np.flatnonzero(mags > tol)
    if bad.size == 0:
        return RankDecision(True, max_minor, None, degenerate, marginal)
    k = int(bad[0])
    ci, ri = divmod(k, len(rp))
    return RankDecision(False, max_minor, (rp[ri], cp[ci], float(mags[k])), degenerate, marginal)


class PartialSplit(NamedTuple):
    separable: bool
    factor: np.ndarray | None
    remainder: PureState | None
    decision: RankDecision


def _split(flat: Flattening) -> tuple[np.ndarray, np.ndarray]:
    """Factor a rank-one flattening as ``z (x) w``; ``z`` unit and phase-fixed."""
    mat = flat.matrix
    col = int(np.unravel_index(np.argmax(np.abs(mat)), mat.shape)[1])
    z = mat[:, col]
    z = phase_fix(z / np.linalg.norm(z))
    w = z.conj() @ mat
    return z, w


def partially_separable(state: PureState, site: int, tol: float = EPS_ZERO) -> PartialSplit:
    """Test whether ``site`` factors out of ``state``.

    On success the factor is a unit vector with its largest component real
    positive and the remainder is the unit-norm state on the other sites
    (``None`` for a single-site input).
    """
    flat = flatten(state, site)
    dec = matrix_rank_one(flat, tol)
    if dec.degenerate:
        raise DegenerateStateError("the zero vector has no factorization")
    if not dec.rank_one:
        return PartialSplit(False, None, None, dec)
    z, w = _split(flat)
    if state.n_sites == 1:
        return PartialSplit(True, z, None, dec)
    dims = state.dims[: site - 1] + state.dims[site:]
    return PartialSplit(True, z, PureState(dims, w / np.linalg.norm(w)), dec)


@dataclass(frozen=True)
class Factorization:
    """Result of peeling factors off the last site inward.

    ``factors[k]`` belongs to site ``factor_sites[k]``; the first entry is
    site n. ``core`` is the entangled block on sites ``1..core_sites`` left
    when peeling stops, or ``None`` if every site split off.
    """

    factors: tuple[np.ndarray, ...]
    factor_sites: tuple[int, ...]
    core: PureState | None
    core_sites: int
    marginal: bool = False

    @property
    def complete(self) -> bool:
        return self.core is None

    def reconstruct(self) -> PureState:
        """Re-tensor core and factors back into one state (up to a scalar)."""
        if self.core is not None:
            out = self.core
            pieces = list(reversed(self.factors))
        else:
            ordered = list(reversed(self.factors))
            out = PureState((ordered[0].size,), ordered[0])
            pieces = ordered[1:]
        for z in pieces:
            out = tensor_product(out, PureState((z.size,), z))
        return out

    def residual(self, state: PureState) -> float:
        """Max per-amplitude error against ``state`` after the best global scalar."""
        return scalar_residual(state, self.reconstruct())

    def to_dict(self) -> dict:
        return {
            "complete": self.complete,
            "marginal": self.marginal,
            "factors": [
                {"site": s, "amps": [[float(c.real), float(c.imag)] for c in z]}
                for s, z in zip(self.factor_sites, self.factors)
            ],
            "core_sites": self.core_sites,
            "core": state_to_dict(self.core) if self.core is not None else None,
        }


def factorize(state: PureState, tol: float = EPS_ZERO) -> Factorization:
    """Split off the last site while its flattening is rank one."""
    if state.unrealizable:
        raise DegenerateStateError("the zero vector has no factorization")
    factors, sites = [], []
    marginal = False
    current = state
    while current.n_sites > 1:
        split = partially_separable(current, current.n_sites, tol)
        marginal |= split.decision.marginal
        if not split.separable:
            break
        factors.append(split.factor)
        sites.append(current.n_sites)
        current = split.remainder
    else:
        factors.append(phase_fix(current.amps / np.linalg.norm(current.amps)))
        sites.append(1)
        return Factorization(tuple(factors), tuple(sites), None, 0, marginal)
    return Factorization(tuple(factors), tuple(sites), current, current.n_sites, marginal)


def completely_separable(state: PureState, tol: float = EPS_ZERO) -> bool:
    return all(partially_separable(state, s, tol).separable for s in range(1, state.n_sites + 1))


@dataclass(frozen=True)
class SeparabilityReport:
    completely_separable: bool
    per_site_separable: tuple[bool, ...]
    per_site_marginal: tuple[bool, ...]
    factorization: Factorization

    @property
    def marginal(self) -> bool:
        return any(self.per_site_marginal) or self.factorization.marginal

    def to_dict(self) -> dict:
        return {
            "completely_separable": self.completely_separable,
            "per_site_separable": list(self.per_site_separable),
            "per_site_marginal": list(self.per_site_marginal),
            "marginal": self.marginal,
            "factorization": self.factorization.to_dict(),
        }


def classify(state: PureState, tol: float = EPS_ZERO) -> SeparabilityReport:
    splits = [partially_separable(state, s, tol) for s in range(1, state.n_sites + 1)]
    per_site = tuple(bool(sp.separable) for sp in splits)
    return SeparabilityReport(
        all(per_site),
        per_site,
        tuple(sp.decision.marginal for sp in splits),
        factorize(state, tol),
    )
