"""2D lattice driver: neighborhoods, game groups and capital updates.

Every node hosts one game per iteration with itself in seat 0 and its von
Neumann neighbors (up, down, left, right) in seats 1.. . Payoff vectors are
added seat-wise to the participants' capital, center by center in row-major
order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from . import eisert
from .eisert import PayoffMemo, PayoffTable, Profile, as_profile, default_payoff_table
from .gamelib import CoinStateKind
from .walk import BRule, Scheme, run_game

Node = tuple[int, int]
GAME_SIZES = (3, 4, 5)
BAR_GAMES = ("A", "B", "[2,2]", "A+B")


class Boundary(str, Enum):
    Periodic = "Periodic"
    Open = "Open"

    @classmethod
    def parse(cls, value) -> "Boundary":
        if isinstance(value, cls):
            return value
        for b in cls:
            if b.value.lower() == str(value).strip().lower():
                return b
        allowed = ", ".join(b.value for b in cls)
        raise ValueError(f"unknown boundary {value!r}; allowed: {allowed}")


@dataclass
class LatticeState:
    rows: int
    cols: int
    boundary: Boundary = Boundary.Open
    capital: np.ndarray = None
    iteration: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"lattice must be at least 1x1, got {self.rows}x{self.cols}")
        self.boundary = Boundary.parse(self.boundary)
        if self.capital is None:
            self.capital = np.zeros((self.rows, self.cols))
        elif self.capital.shape != (self.rows, self.cols):
            raise ValueError(
                f"capital shape {self.capital.shape} != {(self.rows, self.cols)}")


def neighbors(node: Node, rows: int, cols: int, boundary: Boundary | str) -> list[Node]:
    """Von Neumann neighbors in (up, down, left, right) order."""
    boundary = Boundary.parse(boundary)
    r, c = node
    if not (0 <= r < rows and 0 <= c < cols):
        raise ValueError(f"node {node} outside {rows}x{cols} grid")
    cand = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
    if boundary is Boundary.Periodic:
        return [(rr % rows, cc % cols) for rr, cc in cand]
    return [(rr, cc) for rr, cc in cand if 0 <= rr < rows and 0 <= cc < cols]


@dataclass(frozen=True)
class GamePlan:
    rows: int
    cols: int
    boundary: Boundary
    groups: tuple[tuple[Node, ...], ...]

    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def participation(self) -> np.ndarray:
        """Number of groups each node plays in per iteration."""
        counts = np.zeros((self.rows, self.cols), dtype=int)
        for group in self.groups:
            for node in group:
                counts[node] += 1
        return counts

    def participation_by_size(self) -> dict[int, np.ndarray]:
        out = {}
        for group in self.groups:
            counts = out.setdefault(len(group), np.zeros((self.rows, self.cols), dtype=int))
            for node in group:
                counts[node] += 1
        return out


def build_game_plan(rows: int, cols: int, boundary: Boundary | str) -> GamePlan:
    boundary = Boundary.parse(boundary)
    if rows < 3 or cols < 3:
        raise ValueError(f"grid must be at least 3x3, got {rows}x{cols}")
    groups = tuple(
        ((r, c), *neighbors((r, c), rows, cols, boundary))
        for r in range(rows) for c in range(cols))
    return GamePlan(rows, cols, boundary, groups)


def network_average_capital(lattice: LatticeState | np.ndarray) -> float:
    capital = lattice.capital if isinstance(lattice, LatticeState) else np.asarray(lattice)
    return float(np.mean(capital))


def _apply_iteration(capital: np.ndarray, plan: GamePlan, payoffs_for) -> None:
    for gi, group in enumerate(plan.groups):
        vec = payoffs_for(gi, group)
        for seat, node in enumerate(group):
            capital[node] += vec[seat]


# -- prisoner's dilemma -----------------------------------------------------

@dataclass
class PDExperiment:
    """Either ``profiles`` (one fixed profile per game size) or
    ``strategy_sets`` (one set per game size, swept exhaustively)."""
    updates: int = 100
    profiles: Mapping[int, Sequence] | None = None
    strategy_sets: Mapping[int, Sequence] | None = None
    tables: Mapping[int, PayoffTable] = field(default_factory=dict)

    def table(self, k: int) -> PayoffTable:
        return self.tables.get(k) or default_payoff_table(k)


def _sizes(plan: GamePlan) -> list[int]:
    return sorted(set(plan.sizes()))


def run_pd_with_payoffs(payoffs: Mapping[int, np.ndarray], plan: GamePlan,
                        lattice: LatticeState, updates: int) -> np.ndarray:
    """Capital grid after each of ``updates`` iterations, given one payoff
    vector per game size. Also advances ``lattice`` in place."""
    missing = set(_sizes(plan)) - set(payoffs)
    if missing:
        raise ValueError(f"no payoff vector for game sizes {sorted(missing)}")
    for k, vec in payoffs.items():
        if len(vec) != k:
            raise ValueError(f"payoff vector for K={k} has length {len(vec)}")
    series = np.empty((updates, lattice.rows, lattice.cols))
    for t in range(updates):
        _apply_iteration(lattice.capital, plan, lambda gi, g: payoffs[len(g)])
        lattice.iteration += 1
        series[t] = lattice.capital
    return series


def run_pd(exp: PDExperiment, plan: GamePlan, lattice: LatticeState) -> np.ndarray:
    if exp.profiles is None:
        raise ValueError("run_pd needs a fixed profile for every game size")
    payoffs = {}
    for k in _sizes(plan):
        if k not in exp.profiles:
            raise ValueError(f"no profile given for {k}-player games")
        profile = as_profile(exp.profiles[k])
        if len(profile) != k:
            raise ValueError(f"profile {profile} has {len(profile)} seats, expected {k}")
        payoffs[k] = eisert.payoff(profile, exp.table(k))
    return run_pd_with_payoffs(payoffs, plan, lattice, exp.updates)


def sweep_memos(exp: PDExperiment, plan: GamePlan) -> dict[int, PayoffMemo]:
    if exp.strategy_sets is None:
        raise ValueError("sweep needs a strategy set for every game size")
    memos = {}
    for k in _sizes(plan):
        strategies = exp.strategy_sets.get(k)
        if not strategies:
            raise ValueError(f"empty strategy set for {k}-player games")
        memos[k] = eisert.memoized_payoffs(k, strategies, exp.table(k))
    return memos


def run_pd_average(exp: PDExperiment, plan: GamePlan, lattice: LatticeState) -> np.ndarray:
    """Final capital grid averaged over every profile triple.

    Capital is linear in the payoff vectors and each game size draws its
    profile independently, so averaging each size's memo first gives the
    same grid as simulating every triple.
    """
    memos = sweep_memos(exp, plan)
    means = {k: memo.mean_payoff() for k, memo in memos.items()}
    return run_pd_with_payoffs(means, plan, lattice, exp.updates)[-1]


def profile_triples(memos: Mapping[int, PayoffMemo]):
    """Yield ``{K: profile}`` for every combination, lexicographic in K order."""
    sizes = sorted(memos)
    keyed = [[key[1] for key in memos[k]] for k in sizes]
    for combo in itertools.product(*keyed):
        yield dict(zip(sizes, combo))


def triple_average_capital(memos: Mapping[int, PayoffMemo], plan: GamePlan,
                           updates: int) -> dict[tuple[Profile, ...], float]:
    """Network average capital after ``updates`` iterations for every
    profile combination."""
    n_groups = {k: sum(1 for g in plan.groups if len(g) == k) for k in memos}
    n_nodes = plan.rows * plan.cols
    out = {}
    for combo in profile_triples(memos):
        total = sum(n_groups[k] * memos[k][(k, p)].sum() for k, p in combo.items())
        out[tuple(combo[k] for k in sorted(combo))] = updates * total / n_nodes
    return out


# -- cooperative Parrondo -----------------------------------------------------

@dataclass
class ParrondoExperiment:
    scheme: Scheme = Scheme.Seq22
    steps: int = 4
    init: CoinStateKind = CoinStateKind.GHZ
    rule: BRule = field(default_factory=BRule)
    iterations: int = 1000
    runs: int = 1
    engine: str = "sparse"

    def __post_init__(self):
        self.scheme = Scheme.parse(self.scheme)
        self.init = CoinStateKind.parse(self.init)
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")


def run_parrondo_single(exp: ParrondoExperiment, plan: GamePlan,
                        lattice: LatticeState, seed: int, run: int = 0) -> np.ndarray:
    """One run; returns the capital grid after each iteration."""
    series = np.empty((exp.iterations, lattice.rows, lattice.cols))
    for it in range(exp.iterations):
        def play(gi, group):
            return run_game(len(group), exp.scheme, exp.steps, exp.init, exp.rule,
                            exp.engine, seed, game_id=(run, it, gi))
        _apply_iteration(lattice.capital, plan, play)
        lattice.iteration += 1
        series[it] = lattice.capital
    return series


def run_parrondo(exp: ParrondoExperiment, plan: GamePlan, lattice: LatticeState,
                 seed: int = 0) -> np.ndarray:
    """Capital grid after each iteration, averaged over ``exp.runs`` runs.

    Each run starts from ``lattice``'s capital; ``lattice`` ends holding the
    run-averaged final grid.
    """
    start = lattice.capital.copy()
    total = np.zeros((exp.iterations, lattice.rows, lattice.cols))
    for run in range(exp.runs):
        sub = LatticeState(lattice.rows, lattice.cols, lattice.boundary, start.copy(),
                           lattice.iteration)
        total += run_parrondo_single(exp, plan, sub, seed, run)
    series = total / exp.runs
    if exp.iterations:
        lattice.capital = series[-1].copy()
    lattice.iteration += exp.iterations
    return series


def standalone_game_average(k: int, exp: ParrondoExperiment, seed: int = 0) -> dict[str, float]:
    """Seat-mean payoff of one isolated ``k``-player game for each of the
    four bar-chart games (A, B, [2,2], A+B)."""
    if k not in GAME_SIZES:
        raise ValueError(f"K must be one of {GAME_SIZES}, got {k}")
    schemes = {"A": Scheme.A_only, "B": Scheme.B_only,
               "[2,2]": Scheme.Seq22, "A+B": Scheme.AB_random}
    out = {}
    for name, scheme in schemes.items():
        runs = exp.runs if scheme is Scheme.AB_random else 1
        vals = [run_game(k, scheme, exp.steps, exp.init, exp.rule, exp.engine, seed,
                         game_id=(run, k)).mean()
                for run in range(runs)]
        out[name] = float(np.mean(vals))
    return out


def d4_images(grid: np.ndarray) -> list[np.ndarray]:
    """The grid under all eight square symmetries (square grids only)."""
    out = []
    for g in (grid, grid.T):
        for rot in range(4):
            out.append(np.rot90(g, rot))
    return out
