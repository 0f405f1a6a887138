"""Cooperative Parrondo game as a multi-walker discrete-time quantum walk.

Each of the K players owns a coin qubit and a walker on the integer line.
A step is a coin operation (game A or game B) followed by a coin-controlled
move of every walker: ``+1`` on ``|R>`` and ``-1`` on ``|L>``. A player's
payoff is the expected displacement of its walker.

Two engines evolve the same state:

* ``DenseWalk`` keeps the full amplitude tensor over
  ``2^K x (2 T_max + 1)^K`` and applies every coin operator locally, one
  player at a time. It is the reference.
* ``SparseWalk`` keeps only the reachable displacement vectors, each with a
  2^K coin amplitude block, and applies precomputed joint coin matrices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import pi
from typing import Sequence

import numpy as np

from .gamelib import L, R, CoinStateKind, coin_a, coin_b, initial_coin_state
from .linalg import StateVector, apply_local, kron_all

PRUNE_TOL = 1e-14


class BudgetExceeded(RuntimeError):
    """A dense walk was stepped past its position capacity."""


class Scheme(str, Enum):
    AB_random = "AB_random"
    Seq22 = "Seq22"
    A_only = "A_only"
    B_only = "B_only"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        aliases = {"a+b": cls.AB_random, "ab_random": cls.AB_random,
                   "[2,2]": cls.Seq22, "seq22": cls.Seq22,
                   "a": cls.A_only, "a_only": cls.A_only,
                   "b": cls.B_only, "b_only": cls.B_only}
        key = str(value).strip().lower()
        if key not in aliases:
            allowed = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {value!r}; allowed: {allowed}")
        return aliases[key]


B_ORDERS = ("symmetrized", "sequential")


@dataclass(frozen=True)
class BRule:
    """Game B coin choice: ``rho_all_lost`` when every other coin shows
    ``|L>``, ``rho_default`` otherwise.

    The per-player controlled flips do not commute. ``order="sequential"``
    applies them in seat order 0..K-1; ``"symmetrized"`` averages payoffs
    over all K! flip orders, each order held fixed for the whole game.
    """
    rho_default: float = 0.5
    rho_all_lost: float = 0.9
    theta: float = pi / 2
    phi: float = pi / 2
    order: str = "symmetrized"

    def __post_init__(self):
        for name in ("rho_default", "rho_all_lost"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.order not in B_ORDERS:
            raise ValueError(f"order must be one of {B_ORDERS}, got {self.order!r}")

    def coin(self, others_all_lost: bool) -> np.ndarray:
        rho = self.rho_all_lost if others_all_lost else self.rho_default
        return coin_b(rho, self.theta, self.phi)


# -- game schedules ---------------------------------------------------------

def _random_bits(seed: int, game_id: Sequence[int], n: int) -> np.ndarray:
    words = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(int(g) for g in game_id)
    ).generate_state(max(1, -(-n // 32)), dtype=np.uint32)
    bits = (words[:, None] >> np.arange(32, dtype=np.uint32)) & 1
    return bits.reshape(-1)[:n]


def scheme_labels(scheme: Scheme | str, steps: int, seed: int = 0,
                  game_id: Sequence[int] = ()) -> tuple[str, ...]:
    """Game labels ``'A'``/``'B'`` for steps ``0..steps-1`` of one game.

    Random draws are a pure function of ``(seed, game_id, step)``.
    """
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.A_only:
        return ("A",) * steps
    if scheme is Scheme.B_only:
        return ("B",) * steps
    if scheme is Scheme.Seq22:
        return tuple("A" if t % 4 < 2 else "B" for t in range(steps))
    bits = _random_bits(seed, game_id, steps)
    return tuple("B" if b else "A" for b in bits)


def scheme_label(scheme: Scheme | str, t: int, seed: int = 0,
                 game_id: Sequence[int] = ()) -> str:
    if t < 0:
        raise ValueError(f"step index must be >= 0, got {t}")
    return scheme_labels(scheme, t + 1, seed, game_id)[t]


# -- operators ----------------------------------------------------------------

def _coin_bits(k: int) -> np.ndarray:
    """``(2^k, k)`` array of coin bits, seat 0 most significant."""
    idx = np.arange(2 ** k)
    return (idx[:, None] >> np.arange(k - 1, -1, -1)) & 1


def controlled_b_operator(k: int, seat: int, rule: BRule) -> np.ndarray:
    """Joint-coin operator for one player's game B flip.

    Block diagonal over the other coins' basis states: ``coin(True)`` on
    the block where all other coins are ``|L>``, ``coin(False)`` elsewhere.
    """
    if k < 2:
        raise ValueError(f"game B needs at least 2 players, got {k}")
    if not 0 <= seat < k:
        raise ValueError(f"seat {seat} out of range for K={k}")
    dim = 2 ** k
    op = np.zeros((dim, dim), dtype=complex)
    lost, other = rule.coin(True), rule.coin(False)
    for col in range(dim):
        rest = col & ~(1 << (k - 1 - seat))
        u = lost if rest == 0 else other
        c_in = (col >> (k - 1 - seat)) & 1
        for c_out in (L, R):
            row = rest | (c_out << (k - 1 - seat))
            op[row, col] = u[c_out, c_in]
    return op


@lru_cache(maxsize=None)
def joint_coin_operator(k: int, label: str, rule: BRule,
                        order: tuple[int, ...] | None = None) -> np.ndarray:
    """Full 2^k coin operator for one step of game ``label``.

    ``order`` is the sequence of seats flipping in game B (default 0..k-1).
    """
    if label == "A":
        op = kron_all([coin_a()] * k)
    elif label == "B":
        op = np.eye(2 ** k, dtype=complex)
        for seat in (range(k) if order is None else order):
            op = controlled_b_operator(k, seat, rule) @ op
    else:
        raise ValueError(f"unknown game label {label!r}")
    op.setflags(write=False)
    return op


@dataclass(frozen=True)
class GeneralShift:
    """Alternating-direction shift: seat ``k`` (0-based) moves by
    ``(-1)^k``, independent of its coin. Not used by default."""
    k: int

    @property
    def directions(self) -> np.ndarray:
        return np.array([1 if seat % 2 == 0 else -1 for seat in range(self.k)])

    def matrix(self, span: int) -> np.ndarray:
        """Operator on ``k`` cyclic position registers of size ``span``."""
        shift = np.roll(np.eye(span, dtype=complex), 1, axis=0)
        return kron_all([shift if d > 0 else shift.conj().T for d in self.directions])


def general_shift(k: int) -> GeneralShift:
    if k < 1:
        raise ValueError(f"need at least one player, got {k}")
    return GeneralShift(k)


def _move_vectors(k: int, shift: str) -> np.ndarray:
    """Displacement of every walker for each coin basis state."""
    if shift == "coin":
        return 2 * _coin_bits(k) - 1
    if shift == "alternating":
        return np.tile(general_shift(k).directions, (2 ** k, 1))
    raise ValueError(f"unknown shift {shift!r}; allowed: coin, alternating")


# -- dense engine ------------------------------------------------------------

class DenseWalk:
    """Full amplitude tensor, axes ``(coin_0..coin_{K-1}, pos_0..pos_{K-1})``.

    Position axis index ``T_max + d`` holds displacement ``d``.
    """

    def __init__(self, coin: StateVector, t_max: int, shift: str = "coin"):
        k = coin.num_subsystems
        self.k = k
        self.t_max = int(t_max)
        self.t = 0
        self.shift = shift
        span = 2 * self.t_max + 1
        amps = np.zeros((2,) * k + (span,) * k, dtype=complex)
        amps[(slice(None),) * k + (self.t_max,) * k] = coin.amps.reshape((2,) * k)
        self.state = StateVector((2,) * k + (span,) * k, amps.reshape(-1))

    @property
    def tensor(self) -> np.ndarray:
        return self.state.tensor_view()

    def coin_a(self):
        u = coin_a()
        for seat in range(self.k):
            self.state = apply_local(u, [seat], self.state)

    def coin_b(self, rule: BRule, order: Sequence[int] | None = None):
        if self.k < 2:
            raise ValueError(f"game B needs at least 2 players, got {self.k}")
        psi = self.tensor.copy()
        for seat in (range(self.k) if order is None else order):
            others = [s for s in range(self.k) if s != seat]
            out = np.empty_like(psi)
            for bits in itertools.product((L, R), repeat=self.k - 1):
                idx: list = [slice(None)] * psi.ndim
                for s, b in zip(others, bits):
                    idx[s] = b
                idx = tuple(idx)
                u = rule.coin(all(b == L for b in bits))
                # with the other coins fixed, the seat's coin is axis 0
                out[idx] = np.tensordot(u, psi[idx], axes=([1], [0]))
            psi = out
        self.state = StateVector(self.state.dims, psi.reshape(-1))

    def move(self):
        if self.t + 1 > self.t_max:
            raise BudgetExceeded(
                f"dense walk with T_max={self.t_max} cannot take step {self.t + 1}")
        k = self.k
        psi = self.tensor
        out = np.zeros_like(psi)
        moves = _move_vectors(k, self.shift)
        for c, bits in enumerate(itertools.product((L, R), repeat=k)):
            src = psi[bits]
            dst: list = [slice(None)] * k
            srcsl: list = [slice(None)] * k
            for seat in range(k):
                if moves[c, seat] > 0:
                    dst[seat], srcsl[seat] = slice(1, None), slice(None, -1)
                else:
                    dst[seat], srcsl[seat] = slice(None, -1), slice(1, None)
            out[bits][tuple(dst)] = src[tuple(srcsl)]
        self.state = StateVector(self.state.dims, out.reshape(-1))
        self.t += 1

    def step(self, label: str, rule: BRule, order: Sequence[int] | None = None):
        if label == "A":
            self.coin_a()
        else:
            self.coin_b(rule, order)
        self.move()

    def norm(self) -> float:
        return self.state.norm()

    def expected_positions(self) -> np.ndarray:
        k = self.k
        probs = np.abs(self.tensor) ** 2
        xs = np.arange(-self.t_max, self.t_max + 1)
        out = np.empty(k)
        for seat in range(k):
            axes = tuple(a for a in range(2 * k) if a != k + seat)
            out[seat] = probs.sum(axis=axes) @ xs
        return out

    def to_dict(self, tol: float = 0.0) -> dict[tuple[int, tuple[int, ...]], complex]:
        """``{(coin index, displacement): amplitude}`` for nonzero entries."""
        k = self.k
        flat = self.tensor.reshape((2 ** k,) + (2 * self.t_max + 1,) * k)
        out = {}
        for idx in zip(*np.nonzero(np.abs(flat) > tol)):
            disp = tuple(int(i) - self.t_max for i in idx[1:])
            out[(int(idx[0]), disp)] = complex(flat[idx])
        return out


# -- sparse engine -----------------------------------------------------------

class SparseWalk:
    """Amplitudes on the reachable support only.

    After ``t`` steps every displacement satisfies ``|d_i| <= t`` and
    ``d_i = t (mod 2)``, so each walker has ``t + 1`` reachable sites
    ``d = -t + 2 j``. ``amps`` has shape ``(2^K, t+1, ..., t+1)``; a move
    grows every site axis by one and never touches unreachable positions.
    Amplitudes below ``PRUNE_TOL`` are zeroed after each move.
    """

    def __init__(self, coin: StateVector, shift: str = "coin"):
        self.k = coin.num_subsystems
        self.t = 0
        self.shift = shift
        self.amps = coin.amps.reshape((2 ** self.k,) + (1,) * self.k).copy()
        self._moves = _move_vectors(self.k, shift)

    def apply_coin(self, op: np.ndarray):
        dim = 2 ** self.k
        flat = self.amps.reshape(dim, -1)
        self.amps = (op @ flat).reshape(self.amps.shape)

    def move(self):
        k = self.k
        out = np.zeros((2 ** k,) + (self.t + 2,) * k, dtype=complex)
        for c in range(2 ** k):
            # site index j is kept on a -1 move and becomes j + 1 on a +1 move
            dst = tuple(slice(1, None) if m > 0 else slice(None, -1)
                        for m in self._moves[c])
            out[(c,) + dst] = self.amps[c]
        out[np.abs(out) < PRUNE_TOL] = 0.0
        self.amps = out
        self.t += 1

    def step(self, label: str, rule: BRule, order: Sequence[int] | None = None):
        if label == "B" and self.k < 2:
            raise ValueError(f"game B needs at least 2 players, got {self.k}")
        order = None if order is None else tuple(order)
        self.apply_coin(joint_coin_operator(self.k, label, rule, order))
        self.move()

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def sites(self) -> np.ndarray:
        return np.arange(-self.t, self.t + 1, 2)

    def expected_positions(self) -> np.ndarray:
        probs = (np.abs(self.amps) ** 2).sum(axis=0)
        xs = self.sites()
        out = np.empty(self.k)
        for seat in range(self.k):
            axes = tuple(a for a in range(self.k) if a != seat)
            out[seat] = probs.sum(axis=axes) @ xs
        return out

    def to_dict(self, tol: float = 0.0) -> dict[tuple[int, tuple[int, ...]], complex]:
        """``{(coin index, displacement): amplitude}`` for nonzero entries."""
        xs = self.sites()
        out = {}
        for idx in zip(*np.nonzero(np.abs(self.amps) > tol)):
            disp = tuple(int(xs[j]) for j in idx[1:])
            out[(int(idx[0]), disp)] = complex(self.amps[idx])
        return out

    def support_ok(self) -> bool:
        """Every stored displacement satisfies ``|d| <= t`` and ``d = t (mod 2)``."""
        return all(abs(d) <= self.t and (d - self.t) % 2 == 0
                   for (_, disp) in self.to_dict() for d in disp)


# -- functional step interface --------------------------------------------

Walk = DenseWalk | SparseWalk


def new_walk(coin: StateVector, t_max: int, engine: str = "sparse",
             shift: str = "coin") -> Walk:
    if engine == "dense":
        return DenseWalk(coin, t_max, shift)
    if engine == "sparse":
        return SparseWalk(coin, shift)
    raise ValueError(f"unknown engine {engine!r}; allowed: dense, sparse")


def step_move(s: Walk) -> Walk:
    s.move()
    return s


def step_a(s: Walk) -> Walk:
    if isinstance(s, DenseWalk):
        s.coin_a()
        s.move()
    else:
        s.step("A", BRule())
    return s


def step_b(s: Walk, rule: BRule = BRule()) -> Walk:
    if s.k < 2:
        raise ValueError(f"game B needs at least 2 players, got {s.k}")
    if isinstance(s, DenseWalk):
        s.coin_b(rule)
        s.move()
    else:
        s.step("B", rule)
    return s


def _ordered_payoff(coin: StateVector, labels: Sequence[str], rule: BRule,
                    engine: str, shift: str, order: Sequence[int] | None) -> np.ndarray:
    walk = new_walk(coin, max(len(labels), 1), engine, shift)
    for label in labels:
        walk.step(label, rule, order)
    return walk.expected_positions()


def is_permutation_symmetric(coin: StateVector, tol: float = 1e-12) -> bool:
    """True if the coin state is unchanged by every permutation of players."""
    k = coin.num_subsystems
    psi = coin.tensor_view()
    return all(np.abs(np.transpose(psi, perm) - psi).max() <= tol
               for perm in itertools.permutations(range(k)))


def symmetrized_payoff(coin: StateVector, labels: Sequence[str], rule: BRule,
                       engine: str = "sparse", shift: str = "coin") -> np.ndarray:
    """Payoff averaged explicitly over all K! game-B flip orders."""
    k = coin.num_subsystems
    perms = list(itertools.permutations(range(k)))
    total = sum(_ordered_payoff(coin, labels, rule, engine, shift, p) for p in perms)
    return total / len(perms)


@lru_cache(maxsize=4096)
def walk_payoff(k: int, labels: tuple[str, ...], init: CoinStateKind,
                rule: BRule = BRule(), engine: str = "sparse",
                shift: str = "coin") -> np.ndarray:
    """Expected displacement per player after playing ``labels`` in order.

    Cached: a lattice run replays the same few label sequences many times.
    """
    init = CoinStateKind.parse(init)
    coin = initial_coin_state(init, k)
    if rule.order == "sequential" or "B" not in labels or k < 2:
        out = _ordered_payoff(coin, labels, rule, engine, shift, None)
    elif shift == "coin" and is_permutation_symmetric(coin):
        # relabelling seats maps the walk under one flip order onto the walk
        # under any other, so the order average is the seat mean
        seq = _ordered_payoff(coin, labels, rule, engine, shift, None)
        out = np.full(k, seq.mean())
    else:
        out = symmetrized_payoff(coin, labels, rule, engine, shift)
    out.setflags(write=False)
    return out


def run_game(k: int, scheme: Scheme | str, steps: int, init: CoinStateKind | str,
             rule: BRule = BRule(), engine: str = "sparse", seed: int = 0,
             game_id: Sequence[int] = (), shift: str = "coin") -> np.ndarray:
    """Play one fresh walk game and return the K expected displacements."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if k < 1:
        raise ValueError(f"need at least one player, got {k}")
    if steps == 0:
        return np.zeros(k)
    labels = scheme_labels(scheme, steps, seed, game_id)
    return walk_payoff(k, labels, CoinStateKind.parse(init), rule, engine, shift).copy()

