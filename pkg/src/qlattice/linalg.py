"""Small complex linear algebra layer for composite quantum registers.

Amplitudes are stored as a flat row-major array over mixed-radix subsystem
indices, most-significant subsystem first. Operators are plain complex
``numpy`` arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

UNITARY_TOL = 1e-12
NORM_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when operator and state dimensions do not line up."""


@dataclass(frozen=True)
class StateVector:
    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise DimensionError(f"subsystem dimensions must be >= 2, got {dims}")
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size != prod(dims):
            raise DimensionError(
                f"{amps.size} amplitudes do not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, dims: Sequence[int], index: Sequence[int]) -> "StateVector":
        """Computational basis state ``|index>`` over ``dims``."""
        amps = np.zeros(prod(dims), dtype=complex)
        amps[np.ravel_multi_index(tuple(index), tuple(dims))] = 1.0
        return cls(tuple(dims), amps)

    @property
    def num_subsystems(self) -> int:
        return len(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tensor_view(self) -> np.ndarray:
        return self.amps.reshape(self.dims)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.dims + b.dims, np.kron(a.amps, b.amps))


def apply_local(op: np.ndarray, targets: Sequence[int], s: StateVector) -> StateVector:
    """Apply ``op`` to the subsystems in ``targets``, identity elsewhere.

    The operator's row/column index is read mixed-radix over ``targets`` in
    the given order, first target most significant.
    """
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise DimensionError(f"duplicate target index in {targets}")
    n = s.num_subsystems
    if any(t < 0 or t >= n for t in targets):
        raise DimensionError(f"targets {targets} out of range for {n} subsystems")
    op = np.asarray(op, dtype=complex)
    tdims = [s.dims[t] for t in targets]
    side = prod(tdims)
    if op.shape != (side, side):
        raise DimensionError(
            f"operator shape {op.shape} does not act on dims {tdims}")

    k = len(targets)
    psi = s.tensor_view()
    op_t = op.reshape(tdims + tdims)
    out = np.tensordot(op_t, psi, axes=(list(range(k, 2 * k)), targets))
    # tensordot puts the target axes first; put them back in place
    out = np.moveaxis(out, list(range(k)), targets)
    return StateVector(s.dims, out.reshape(-1))


def is_unitary(op: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    err = np.abs(op.conj().T @ op - np.eye(op.shape[0]))
    return bool(err.max() <= tol)


def inner(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.dims != b.dims:
        raise DimensionError(f"dims differ: {a.dims} vs {b.dims}")
    return complex(np.vdot(a.amps, b.amps))


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out
