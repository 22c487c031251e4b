"""Dense multipartite pure states.

Amplitudes are stored row-major with site 1 as the most significant index,
so the amplitude of ``|b1 b2 ... bn>`` sits at offset
``sum(b_i * prod(d_j for j > i))``. Sites are numbered from 1 throughout the
public API.

States are immutable. Collapsed and projected states are returned raw
(unnormalized); call :func:`normalize` when a unit vector is needed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "StateError",
    "DimensionError",
    "ValidationError",
    "DegenerateStateError",
    "PureState",
    "Flattening",
    "make_state",
    "basis_state",
    "normalize",
    "flatten",
    "unflatten",
    "collapse",
    "project_site",
    "apply_local_unitary",
    "tensor_product",
    "permute_sites",
    "random_state",
    "scalar_residual",
    "phase_fix",
    "state_to_dict",
    "state_from_dict",
    "dumps_state",
    "loads_state",
    "save_state",
    "load_state",
]

UNITARY_TOL = 1e-9


class StateError(ValueError):
    """Base class for invalid state operations."""


class DimensionError(StateError):
    """Shapes, lengths or site indices that do not fit together."""


class ValidationError(StateError):
    """Non-finite amplitudes, non-unitary matrices, non-unit directions."""


class DegenerateStateError(StateError):
    """Raised when an operation needs a nonzero vector and gets zero."""


@dataclass(frozen=True, eq=False)
class PureState:
    """Coefficient tensor of an n-partite pure state.

    Attributes
    ----------
    dims : tuple of int
        Local dimensions ``(d_1, ..., d_n)``.
    amps : numpy.ndarray
        Flat complex128 array of length ``prod(dims)``, read-only.
    """

    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("a state needs at least one site")
        if any(d < 2 for d in dims):
            raise DimensionError(f"local dimensions must be >= 2, got {list(dims)}")
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        if amps.size != math.prod(dims):
            raise DimensionError(
                f"dims {list(dims)} need {math.prod(dims)} amplitudes, got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValidationError("amplitudes must be finite")
        amps.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def tensor(self) -> np.ndarray:
        """Amplitudes viewed with one axis per site."""
        return self.amps.reshape(self.dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    @property
    def unrealizable(self) -> bool:
        """True for the all-zero vector (a probability-zero branch)."""
        return not np.any(self.amps)

    def offset(self, digits: Sequence[int]) -> int:
        if len(digits) != self.n_sites:
            raise DimensionError(f"expected {self.n_sites} digits, got {len(digits)}")
        off = 0
        for b, d in zip(digits, self.dims):
            if not 0 <= b < d:
                raise DimensionError(f"digit {b} out of range for dimension {d}")
            off = off * d + b
        return off

    def amplitude(self, digits: Sequence[int] | str) -> complex:
        if isinstance(digits, str):
            digits = [int(c) for c in digits]
        return complex(self.amps[self.offset(digits)])

    def __repr__(self):
        return f"PureState(dims={list(self.dims)}, norm={self.norm:.6g})"


@dataclass(frozen=True, eq=False)
class Flattening:
    """Matrix of the map from the duals of all other sites onto one site.

    ``matrix[r, c]`` is the amplitude whose index at ``site`` is ``r`` and whose
    remaining indices, in their original relative order, spell ``c`` row-major.
    """

    site: int
    matrix: np.ndarray

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.reshape(-1)


def make_state(dims: Iterable[int], amps: Iterable[complex]) -> PureState:
    """Build a state verbatim; no normalization is applied."""
    if not isinstance(amps, np.ndarray):
        amps = list(amps)
    return PureState(tuple(dims), np.asarray(amps))


def basis_state(dims: Sequence[int], digits: Sequence[int] | str) -> PureState:
    if isinstance(digits, str):
        digits = [int(c) for c in digits]
    amps = np.zeros(math.prod(dims), dtype=np.complex128)
    tmp = PureState(tuple(dims), amps)
    amps[tmp.offset(digits)] = 1.0
    return PureState(tuple(dims), amps)


def normalize(state: PureState) -> PureState:
    nrm = np.linalg.norm(state.amps)
    if nrm == 0.0:
        raise DegenerateStateError("cannot normalize the zero vector")
    return PureState(state.dims, state.amps / nrm)


def _check_site(state: PureState, site: int) -> int:
    if not 1 <= site <= state.n_sites:
        raise DimensionError(f"site {site} out of range 1..{state.n_sites}")
    return site - 1


def flatten(state: PureState, site: int) -> Flattening:
    axis = _check_site(state, site)
    mat = np.moveaxis(state.tensor, axis, 0).reshape(state.dims[axis], -1)
    mat = np.array(mat)
    mat.flags.writeable = False
    return Flattening(site, mat)


def unflatten(flat: Flattening, dims: Sequence[int]) -> PureState:
    """Inverse of :func:`flatten` given the source dimensions."""
    dims = tuple(dims)
    axis = flat.site - 1
    rest = dims[:axis] + dims[axis + 1:]
    t = np.asarray(flat.matrix).reshape((dims[axis],) + rest)
    return PureState(dims, np.moveaxis(t, 0, axis).reshape(-1))


def _reduced(state: PureState, axis: int, tensor: np.ndarray) -> PureState:
    if state.n_sites < 2:
        raise DimensionError("cannot remove the only site of a state")
    dims = state.dims[:axis] + state.dims[axis + 1:]
    return PureState(dims, tensor.reshape(-1))


def collapse(state: PureState, site: int, outcome: int) -> PureState:
    """Slice with ``site`` fixed at ``outcome``; the result is not renormalized.

    A zero slice comes back as the zero vector, with ``unrealizable`` set.
    """
    axis = _check_site(state, site)
    if not 0 <= outcome < state.dims[axis]:
        raise DimensionError(f"outcome {outcome} out of range for dimension {state.dims[axis]}")
    return _reduced(state, axis, np.take(state.tensor, outcome, axis=axis))


def project_site(state: PureState, site: int, direction: Sequence[complex]) -> PureState:
    """Contract ``<direction|`` into ``site`` (raw, unnormalized)."""
    axis = _check_site(state, site)
    v = np.asarray(direction, dtype=np.complex128).reshape(-1)
    if v.size != state.dims[axis]:
        raise DimensionError(f"direction needs {state.dims[axis]} components, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("direction must be finite")
    if abs(np.linalg.norm(v) - 1.0) > UNITARY_TOL:
        raise ValidationError("direction must have unit norm")
    # keep computational-basis projections bit-identical to collapse
    nz = np.flatnonzero(v)
    if nz.size == 1 and v[nz[0]] == 1.0:
        return collapse(state, site, int(nz[0]))
    out = np.tensordot(v.conj(), state.tensor, axes=(0, axis))
    return _reduced(state, axis, out)


def apply_local_unitary(state: PureState, site: int, u) -> PureState:
    axis = _check_site(state, site)
    u = np.asarray(u, dtype=np.complex128)
    d = state.dims[axis]
    if u.shape != (d, d):
        raise DimensionError(f"unitary for site {site} must be {d}x{d}, got {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValidationError("unitary must be finite")
    if np.max(np.abs(u @ u.conj().T - np.eye(d))) > UNITARY_TOL:
        raise ValidationError("matrix is not unitary")
    out = np.moveaxis(np.tensordot(u, state.tensor, axes=(1, axis)), 0, axis)
    return PureState(state.dims, out.reshape(-1))


def tensor_product(a: PureState, b: PureState) -> PureState:
    return PureState(a.dims + b.dims, np.kron(a.amps, b.amps))


def permute_sites(state: PureState, order: Sequence[int]) -> PureState:
    """Reorder sites; ``order[k]`` is the (1-based) old site placed at position k+1."""
    order = [int(s) for s in order]
    if sorted(order) != list(range(1, state.n_sites + 1)):
        raise DimensionError(f"{order} is not a permutation of the sites")
    axes = [s - 1 for s in order]
    t = np.transpose(state.tensor, axes)
    return PureState(tuple(state.dims[a] for a in axes), t.reshape(-1))


def random_state(dims: Sequence[int], seed: int) -> PureState:
    """Haar-random unit vector from independent complex Gaussians."""
    dims = tuple(int(d) for d in dims)
    n = math.prod(dims)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState(dims, z / np.linalg.norm(z))


def scalar_residual(a, b) -> float:
    """Max per-amplitude error of ``a`` against the best multiple of ``b``.

    Accepts states or flat arrays. Used for "equal up to a global scalar".
    """
    x = a.amps if isinstance(a, PureState) else np.asarray(a, dtype=np.complex128).reshape(-1)
    y = b.amps if isinstance(b, PureState) else np.asarray(b, dtype=np.complex128).reshape(-1)
    if x.shape != y.shape:
        raise DimensionError("vectors differ in length")
    yy = np.vdot(y, y).real
    lam = np.vdot(y, x) / yy if yy > 0 else 0.0
    return float(np.max(np.abs(x - lam * y)))


def phase_fix(v: np.ndarray) -> np.ndarray:
    """Scale so the largest-magnitude component is real and positive."""
    v = np.asarray(v, dtype=np.complex128)
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v.copy()
    out = v * (abs(v[k]) / v[k])
    out[k] = abs(v[k])  # exact, not just up to rounding
    return out


# -- state file format ---------------------------------------------------------


def state_to_dict(state: PureState) -> dict:
    return {
        "dims": list(state.dims),
        "amps": [[float(z.real), float(z.imag)] for z in state.amps],
    }


def state_from_dict(doc) -> PureState:
    if not isinstance(doc, dict) or "dims" not in doc or "amps" not in doc:
        raise ValidationError('state document needs "dims" and "amps"')
    dims = doc["dims"]
    if not isinstance(dims, list) or not all(isinstance(d, int) and not isinstance(d, bool) for d in dims):
        raise ValidationError('"dims" must be a list of integers')
    amps = []
    for pair in doc["amps"]:
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise ValidationError('each amplitude must be a [re, im] pair of numbers')
        amps.append(complex(pair[0], pair[1]))
    if len(amps) != math.prod(dims):
        raise DimensionError(f"dims {dims} need {math.prod(dims)} amplitudes, got {len(amps)}")
    return PureState(tuple(dims), np.array(amps, dtype=np.complex128))


def dumps_state(state: PureState) -> str:
    return json.dumps(state_to_dict(state))


def loads_state(text: str) -> PureState:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"state file is not valid JSON: {exc}") from None
    return state_from_dict(doc)


def save_state(state: PureState, path) -> None:
    Path(path).write_text(dumps_state(state) + "\n")


def load_state(path) -> PureState:
    return loads_state(Path(path).read_text())
