"""Named operators and initial states for the lattice games.

Coin basis convention: ``|L>`` is index 0 and ``|R>`` is index 1. For the
prisoner's dilemma qubits, ``|0>`` is cooperate and ``|1>`` is defect.
"""
from __future__ import annotations

from enum import Enum
from math import pi, sqrt

import numpy as np

from .linalg import StateVector

L, R = 0, 1
_S2 = 1 / sqrt(2)


class StrategyName(str, Enum):
    C = "C"
    D = "D"
    H = "H"
    Q = "Q"
    Sigma = "Sigma"

    @classmethod
    def parse(cls, value) -> "StrategyName":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        lookup = {"C": cls.C, "D": cls.D, "H": cls.H, "Q": cls.Q,
                  "SIGMA": cls.Sigma, "S": cls.Sigma, "Σ": cls.Sigma}
        if key not in lookup:
            allowed = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown strategy {value!r}; allowed: {allowed}")
        return lookup[key]


class CoinStateKind(str, Enum):
    Separable = "Separable"
    GHZ = "GHZ"
    W = "W"

    @classmethod
    def parse(cls, value) -> "CoinStateKind":
        if isinstance(value, cls):
            return value
        for kind in cls:
            if kind.value.lower() == str(value).strip().lower():
                return kind
        allowed = ", ".join(k.value for k in cls)
        raise ValueError(f"unknown coin state {value!r}; allowed: {allowed}")


_STRATEGIES = {
    StrategyName.C: np.array([[1, 0], [0, 1]], dtype=complex),
    StrategyName.D: np.array([[0, 1], [1, 0]], dtype=complex),
    StrategyName.H: np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    StrategyName.Q: np.array([[1j, 0], [0, -1j]], dtype=complex),
    StrategyName.Sigma: np.array([[0, 1], [-1, 0]], dtype=complex),
}


def strategy_gate(name: StrategyName | str) -> np.ndarray:
    return _STRATEGIES[StrategyName.parse(name)].copy()


def entangler(n: int) -> np.ndarray:
    """``(I + i X^{(x)n}) / sqrt(2)`` on ``n`` qubits."""
    if n < 2:
        raise ValueError(f"entangler needs at least 2 players, got {n}")
    dim = 2 ** n
    # X^{(x)n} maps basis index b to its bitwise complement
    flip = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    flip[idx ^ (dim - 1), idx] = 1.0
    return (np.eye(dim, dtype=complex) + 1j * flip) * _S2


def coin_a() -> np.ndarray:
    return np.array([[1, 1j], [1j, 1]], dtype=complex) * _S2


def coin_b(rho: float, theta: float = pi / 2, phi: float = pi / 2) -> np.ndarray:
    """Game B coin; ``rho`` is the probability the coin keeps its face."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    a, b = sqrt(rho), sqrt(1.0 - rho)
    return np.array([
        [a, b * np.exp(1j * theta)],
        [b * np.exp(1j * phi), -a * np.exp(1j * (theta + phi))],
    ], dtype=complex)


def initial_coin_state(kind: CoinStateKind | str, n: int) -> StateVector:
    kind = CoinStateKind.parse(kind)
    minimum = 1 if kind is CoinStateKind.Separable else 2
    if n < minimum:
        raise ValueError(f"{kind.value} coin state needs n >= {minimum}, got {n}")
    dim = 2 ** n
    amps = np.zeros(dim, dtype=complex)
    if kind is CoinStateKind.Separable:
        amps[0] = 1.0
    elif kind is CoinStateKind.GHZ:
        amps[0] = amps[dim - 1] = _S2
    else:
        for i in range(n):
            amps[1 << (n - 1 - i)] = 1 / sqrt(n)
    return StateVector((2,) * n, amps)
