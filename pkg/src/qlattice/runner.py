"""Experiment orchestration: config -> lattice simulation -> ResultBundle."""
from __future__ import annotations

import dataclasses
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .lattice import (
    GAME_SIZES,
    LatticeState,
    build_game_plan,
    run_parrondo,
    run_pd,
    run_pd_with_payoffs,
    standalone_game_average,
    sweep_memos,
    triple_average_capital,
)
from .results import ResultBundle, emit


class ExperimentError(RuntimeError):
    """A run failed after its configuration was accepted."""


def provenance(cfg: RunConfig) -> dict:
    return {
        "config": cfg.echo(),
        "seed": cfg.seed,
        "engine": cfg.engine(),
        "code_version": f"qlattice {__version__}",
    }


def _pd_sweep(cfg: RunConfig, plan, lattice) -> ResultBundle:
    memos = sweep_memos(cfg.pd, plan)
    means = {k: memo.mean_payoff() for k, memo in memos.items()}
    grids = run_pd_with_payoffs(means, plan, lattice, cfg.pd.updates)
    per_triple = triple_average_capital(memos, plan, cfg.pd.updates)
    best = max(per_triple, key=per_triple.get)
    summary = {
        "profile_combinations": len(per_triple),
        "average_capital": float(np.mean(grids[-1])) if cfg.pd.updates else 0.0,
        "best_profiles": {str(len(p)): [s.value for s in p] for p in best},
        "best_average_capital": per_triple[best],
    }
    return ResultBundle(grids[-1] if cfg.pd.updates else lattice.capital.copy(),
                        grids.mean(axis=(1, 2)), summary=summary)


def execute(cfg: RunConfig) -> ResultBundle:
    try:
        return _execute(cfg)
    except Exception as exc:
        raise ExperimentError(f"{cfg.kind} experiment failed: {exc}") from exc


def _execute(cfg: RunConfig) -> ResultBundle:
    if cfg.kind == "parrondo_bars":
        bars = []
        for k in GAME_SIZES:
            for game, value in standalone_game_average(k, cfg.parrondo, cfg.seed).items():
                bars.append((k, game, value))
        bundle = ResultBundle(None, np.zeros(0), bars=bars)
        bundle.provenance = provenance(cfg)
        return bundle

    plan = build_game_plan(cfg.rows, cfg.cols, cfg.boundary)
    lattice = LatticeState(cfg.rows, cfg.cols, cfg.boundary)
    if cfg.kind == "pd":
        grids = run_pd(cfg.pd, plan, lattice)
        bundle = ResultBundle(lattice.capital.copy(), grids.mean(axis=(1, 2)))
    elif cfg.kind == "pd_sweep":
        bundle = _pd_sweep(cfg, plan, lattice)
    else:
        grids = run_parrondo(cfg.parrondo, plan, lattice, cfg.seed)
        bundle = ResultBundle(lattice.capital.copy(), grids.mean(axis=(1, 2)))
    bundle.provenance = provenance(cfg)
    return bundle


# -- sweeps --------------------------------------------------------------------

def sweep_cells(cfg: RunConfig) -> list[tuple[str, RunConfig]]:
    """One config per combination of the sweep axes, in declared order."""
    axes = [a for a in ("init", "scheme", "boundary") if a in cfg.sweep]
    cells = []
    for values in itertools.product(*(cfg.sweep[a] for a in axes)):
        cell = dataclasses.replace(cfg, sweep={})
        cell.parrondo = dataclasses.replace(cfg.parrondo)
        names = []
        for axis, value in zip(axes, values):
            if axis == "boundary":
                cell.boundary = value
            else:
                setattr(cell.parrondo, axis, value)
            names.append(value.value)
        name = "_".join(names) or "cell"
        cell.out_dir = str(Path(cfg.out_dir) / name)
        cells.append((name, cell))
    return cells


def _run_cell(cell: RunConfig):
    bundle = execute(cell)
    emit(bundle, cell.out_dir, cell.formats)
    final = float(bundle.series[-1]) if len(bundle.series) else 0.0
    return final


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("QLATTICE_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(cfg: RunConfig) -> list[tuple[str, float]]:
    cells = sweep_cells(cfg)
    workers = min(worker_count(), len(cells))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(_run_cell, [c for _, c in cells]))
    else:
        finals = [_run_cell(c) for _, c in cells]
    return [(name, final) for (name, _), final in zip(cells, finals)]
