"""Eisert-quantized K-player prisoner's dilemma.

The final state is ``J^dagger (U_1 (x) ... (x) U_K) J |0...0>`` and a seat's
payoff is the Born-weighted average of its classical payoffs over the 2^K
measurement outcomes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .gamelib import StrategyName, entangler, strategy_gate
from .linalg import StateVector, apply_local

MIN_PLAYERS, MAX_PLAYERS = 2, 5

# 2-player PD values, indexed [my bit][their bit]; bit 0 = C, bit 1 = D
PAIR_PAYOFF = np.array([[3.0, 0.0], [5.0, 1.0]])

Profile = tuple[StrategyName, ...]


def as_profile(seats: Iterable) -> Profile:
    profile = tuple(StrategyName.parse(s) for s in seats)
    if not MIN_PLAYERS <= len(profile) <= MAX_PLAYERS:
        raise ValueError(
            f"profile needs {MIN_PLAYERS}..{MAX_PLAYERS} seats, got {len(profile)}")
    return profile


def outcome_bits(index: int, k: int) -> tuple[int, ...]:
    return tuple((index >> (k - 1 - j)) & 1 for j in range(k))


def bitstring(index: int, k: int) -> str:
    return format(index, f"0{k}b")


@dataclass(frozen=True, eq=False)
class PayoffTable:
    """Per-seat classical payoffs for each of the 2^K outcomes.

    ``values[b, j]`` is seat ``j``'s payoff when the measured bit-string has
    integer value ``b`` (seat 0 is the most significant bit).
    """
    k: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (2 ** self.k, self.k):
            raise ValueError(
                f"payoff table for K={self.k} needs shape {(2 ** self.k, self.k)}, "
                f"got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("payoff table entries must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, k: int, mapping: Mapping[str, Sequence[float]]) -> "PayoffTable":
        """Build from ``{"010": [p0, p1, p2], ...}``; all 2^K keys required."""
        expected = {bitstring(b, k) for b in range(2 ** k)}
        keys = {str(key) for key in mapping}
        if keys != expected:
            missing = sorted(expected - keys)
            extra = sorted(keys - expected)
            raise ValueError(
                f"payoff table for K={k}: missing outcomes {missing}, unexpected {extra}")
        values = np.empty((2 ** k, k))
        for key, row in mapping.items():
            row = list(row)
            if len(row) != k:
                raise ValueError(f"outcome {key}: expected {k} payoffs, got {len(row)}")
            values[int(str(key), 2)] = row
        return cls(k, values)

    def to_mapping(self) -> dict[str, list[float]]:
        return {bitstring(b, self.k): [float(v) for v in self.values[b]]
                for b in range(2 ** self.k)}

    def scaled(self, factor: float) -> "PayoffTable":
        return PayoffTable(self.k, self.values * factor)


def default_payoff_table(k: int) -> PayoffTable:
    """Pairwise-sum PD table: each seat collects the 2-player PD payoff
    against every other seat in the group."""
    if not MIN_PLAYERS <= k <= MAX_PLAYERS:
        raise ValueError(f"K must be in {MIN_PLAYERS}..{MAX_PLAYERS}, got {k}")
    values = np.zeros((2 ** k, k))
    for b in range(2 ** k):
        bits = outcome_bits(b, k)
        for j in range(k):
            values[b, j] = sum(PAIR_PAYOFF[bits[j], bits[m]] for m in range(k) if m != j)
    return PayoffTable(k, values)


@lru_cache(maxsize=None)
def _entangler(k: int) -> np.ndarray:
    j = entangler(k)
    j.setflags(write=False)
    return j


def final_state(profile: Iterable) -> StateVector:
    profile = as_profile(profile)
    k = len(profile)
    j = _entangler(k)
    psi = StateVector.basis((2,) * k, (0,) * k)
    psi = apply_local(j, range(k), psi)
    for seat, name in enumerate(profile):
        psi = apply_local(strategy_gate(name), [seat], psi)
    return apply_local(j.conj().T, range(k), psi)


def outcome_distribution(psi_f: StateVector) -> np.ndarray:
    return np.abs(psi_f.amps) ** 2


def payoff(profile: Iterable, table: PayoffTable) -> np.ndarray:
    profile = as_profile(profile)
    if table.k != len(profile):
        raise ValueError(
            f"payoff table is for K={table.k} but profile has {len(profile)} seats")
    probs = outcome_distribution(final_state(profile))
    return probs @ table.values


def enumerate_profiles(k: int, strategy_set: Sequence) -> list[Profile]:
    """All profiles in ``strategy_set^k``, lexicographic in the given order."""
    names = [StrategyName.parse(s) for s in strategy_set]
    return [tuple(p) for p in itertools.product(names, repeat=k)]


class PayoffMemo(dict):
    """``{(K, profile): payoff vector}`` for every profile of a strategy set."""

    def __init__(self, k: int, strategy_set: Sequence, table: PayoffTable):
        super().__init__()
        if not strategy_set:
            raise ValueError("strategy set must be nonempty")
        self.k = k
        self.strategy_set = tuple(StrategyName.parse(s) for s in strategy_set)
        self.table = table
        for profile in enumerate_profiles(k, self.strategy_set):
            vec = payoff(profile, table)
            vec.setflags(write=False)
            self[(k, profile)] = vec

    def lookup(self, profile: Iterable) -> np.ndarray:
        return self[(self.k, as_profile(profile))]

    def mean_payoff(self) -> np.ndarray:
        """Seat-wise payoff averaged over every profile."""
        return np.mean(np.stack(list(self.values())), axis=0)


def memoized_payoffs(k: int, strategy_set: Sequence, table: PayoffTable) -> PayoffMemo:
    return PayoffMemo(k, strategy_set, table)
