"""Declarative run configuration (YAML or JSON), validated up front."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from math import pi
from pathlib import Path
from typing import Any

import yaml

from .eisert import PayoffTable, as_profile
from .gamelib import CoinStateKind, StrategyName
from .lattice import GAME_SIZES, Boundary, ParrondoExperiment, PDExperiment
from .walk import B_ORDERS, BRule, Scheme

KINDS = ("pd", "pd_sweep", "parrondo", "parrondo_bars")
ENGINES = ("dense", "sparse")
FORMATS = ("csv", "json")
SWEEP_AXES = ("init", "scheme", "boundary")
U64_MAX = 2 ** 64 - 1


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key path."""

    def __init__(self, field: str, reason: str, line: int | None = None,
                 column: int | None = None):
        self.field, self.reason, self.line, self.column = field, reason, line, column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{field}: {reason}{where}")


@dataclass
class RunConfig:
    kind: str
    rows: int = 5
    cols: int = 5
    boundary: Boundary = Boundary.Open
    seed: int = 0
    out_dir: str = "out"
    formats: tuple[str, ...] = ("csv", "json")
    pd: PDExperiment | None = None
    parrondo: ParrondoExperiment | None = None
    sweep: dict[str, list] = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Normalized, JSON-ready view of the configuration."""
        out: dict[str, Any] = {
            "kind": self.kind,
            "lattice": {"rows": self.rows, "cols": self.cols,
                        "boundary": self.boundary.value},
            "seed": self.seed,
        }
        if self.pd is not None:
            pd = {"updates": self.pd.updates}
            if self.pd.profiles is not None:
                pd["profiles"] = {str(k): [s.value for s in as_profile(p)]
                                  for k, p in sorted(self.pd.profiles.items())}
            if self.pd.strategy_sets is not None:
                pd["strategy_sets"] = {str(k): [StrategyName.parse(s).value for s in v]
                                       for k, v in sorted(self.pd.strategy_sets.items())}
            if self.pd.tables:
                pd["payoff_tables"] = {str(k): t.to_mapping()
                                       for k, t in sorted(self.pd.tables.items())}
            out["pd"] = pd
        if self.parrondo is not None:
            p = self.parrondo
            out["parrondo"] = {
                "scheme": p.scheme.value, "steps": p.steps, "init": p.init.value,
                "rho_default": p.rule.rho_default, "rho_all_lost": p.rule.rho_all_lost,
                "theta": p.rule.theta, "phi": p.rule.phi, "b_order": p.rule.order,
                "iterations": p.iterations, "runs": p.runs, "engine": p.engine,
            }
        if self.sweep:
            out["sweep"] = {k: [str(getattr(v, "value", v)) for v in vals]
                            for k, vals in self.sweep.items()}
        return out

    def engine(self) -> str:
        return self.parrondo.engine if self.parrondo is not None else "exact"


# -- field helpers -----------------------------------------------------------

def _reject_unknown(block: dict, allowed: set[str], path: str):
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{path}{key}", f"unknown key; allowed: {', '.join(sorted(allowed))}")


def _mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _int(value, path: str, lo: int | None = None, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(path, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(path, f"must be <= {hi}, got {value}")
    return value


def _real(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _prob(value, path: str) -> float:
    x = _real(value, path)
    if not 0.0 <= x <= 1.0:
        raise ConfigError(path, f"probability must lie in [0, 1], got {x}")
    return x


def _choice(value, path: str, parse):
    try:
        return parse(value)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _strategies(value, path: str) -> list[StrategyName]:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a nonempty list of strategies")
    return [_choice(s, f"{path}[{i}]", StrategyName.parse) for i, s in enumerate(value)]


def _per_size(block, path: str) -> dict[int, Any]:
    out = {}
    for key, value in _mapping(block, path).items():
        try:
            k = int(key)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}.{key}", "game size keys must be integers") from None
        if k not in GAME_SIZES:
            raise ConfigError(f"{path}.{key}", f"game size must be one of {GAME_SIZES}")
        out[k] = value
    return out


# -- blocks ------------------------------------------------------------------

def _parse_pd(block: dict, kind: str) -> PDExperiment:
    _reject_unknown(block, {"updates", "profiles", "strategy_set", "strategy_sets",
                            "payoff_tables"}, "pd.")
    updates = _int(block.get("updates", 100), "pd.updates", lo=0)
    profiles = strategy_sets = None
    if kind == "pd":
        raw = _per_size(block.get("profiles"), "pd.profiles")
        if set(raw) != set(GAME_SIZES):
            raise ConfigError("pd.profiles", f"need one profile for each of {GAME_SIZES}")
        profiles = {}
        for k, prof in raw.items():
            names = _strategies(prof, f"pd.profiles.{k}")
            if len(names) != k:
                raise ConfigError(f"pd.profiles.{k}", f"expected {k} strategies, got {len(names)}")
            profiles[k] = tuple(names)
    else:
        if "strategy_set" in block and "strategy_sets" in block:
            raise ConfigError("pd.strategy_set", "give strategy_set or strategy_sets, not both")
        if "strategy_set" in block:
            shared = _strategies(block["strategy_set"], "pd.strategy_set")
            strategy_sets = {k: shared for k in GAME_SIZES}
        else:
            raw = _per_size(block.get("strategy_sets"), "pd.strategy_sets")
            if set(raw) != set(GAME_SIZES):
                raise ConfigError("pd.strategy_sets", f"need a set for each of {GAME_SIZES}")
            strategy_sets = {k: _strategies(v, f"pd.strategy_sets.{k}") for k, v in raw.items()}
    tables = {}
    for k, mapping in _per_size(block.get("payoff_tables"), "pd.payoff_tables").items():
        path = f"pd.payoff_tables.{k}"
        try:
            tables[k] = PayoffTable.from_mapping(k, _mapping(mapping, path))
        except (TypeError, ValueError) as exc:
            raise ConfigError(path, str(exc)) from None
    return PDExperiment(updates=updates, profiles=profiles,
                        strategy_sets=strategy_sets, tables=tables)


def _parse_parrondo(block: dict) -> ParrondoExperiment:
    _reject_unknown(block, {"scheme", "steps", "init", "rho_default", "rho_all_lost",
                            "theta", "phi", "b_order", "iterations", "runs", "engine"},
                    "parrondo.")
    scheme = _choice(block.get("scheme", "Seq22"), "parrondo.scheme", Scheme.parse)
    init = _choice(block.get("init", "GHZ"), "parrondo.init", CoinStateKind.parse)
    engine = block.get("engine", "sparse")
    if engine not in ENGINES:
        raise ConfigError("parrondo.engine", f"unknown engine {engine!r}; allowed: {', '.join(ENGINES)}")
    order = block.get("b_order", "symmetrized")
    if order not in B_ORDERS:
        raise ConfigError("parrondo.b_order", f"unknown order {order!r}; allowed: {', '.join(B_ORDERS)}")
    rule = BRule(
        rho_default=_prob(block.get("rho_default", 0.5), "parrondo.rho_default"),
        rho_all_lost=_prob(block.get("rho_all_lost", 0.9), "parrondo.rho_all_lost"),
        theta=_real(block.get("theta", pi / 2), "parrondo.theta"),
        phi=_real(block.get("phi", pi / 2), "parrondo.phi"),
        order=order,
    )
    return ParrondoExperiment(
        scheme=scheme,
        steps=_int(block.get("steps", 4), "parrondo.steps", lo=0, hi=64),
        init=init,
        rule=rule,
        iterations=_int(block.get("iterations", 1000), "parrondo.iterations", lo=0),
        runs=_int(block.get("runs", 1), "parrondo.runs", lo=1),
        engine=engine,
    )


def _parse_sweep(block: dict) -> dict[str, list]:
    _reject_unknown(block, set(SWEEP_AXES), "sweep.")
    parsers = {"init": CoinStateKind.parse, "scheme": Scheme.parse,
               "boundary": Boundary.parse}
    out = {}
    for axis in SWEEP_AXES:
        if axis not in block:
            continue
        values = block[axis]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep.{axis}", "expected a nonempty list")
        out[axis] = [_choice(v, f"sweep.{axis}[{i}]", parsers[axis])
                     for i, v in enumerate(values)]
    return out


def parse_config(doc: Any) -> RunConfig:
    """Validate a parsed document and fill in defaults."""
    doc = _mapping(doc, "<root>")
    _reject_unknown(doc, {"kind", "lattice", "seed", "output", "pd", "parrondo", "sweep"}, "")
    if "kind" not in doc:
        raise ConfigError("kind", f"required; one of {', '.join(KINDS)}")
    kind = doc["kind"]
    if kind not in KINDS:
        raise ConfigError("kind", f"unknown kind {kind!r}; allowed: {', '.join(KINDS)}")

    lattice = _mapping(doc.get("lattice"), "lattice")
    _reject_unknown(lattice, {"rows", "cols", "boundary"}, "lattice.")
    rows = _int(lattice.get("rows", 5), "lattice.rows", lo=3)
    cols = _int(lattice.get("cols", 5), "lattice.cols", lo=3)
    boundary = _choice(lattice.get("boundary", "Open"), "lattice.boundary", Boundary.parse)

    seed = _int(doc.get("seed", 0), "seed", lo=0, hi=U64_MAX)

    output = _mapping(doc.get("output"), "output")
    _reject_unknown(output, {"dir", "formats"}, "output.")
    out_dir = output.get("dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("output.dir", "expected a nonempty path string")
    formats = parse_formats(output.get("formats", list(FORMATS)), "output.formats")

    cfg = RunConfig(kind=kind, rows=rows, cols=cols, boundary=boundary, seed=seed,
                    out_dir=out_dir, formats=formats, raw=copy.deepcopy(doc))
    if kind in ("pd", "pd_sweep"):
        if "parrondo" in doc:
            raise ConfigError("parrondo", f"not allowed for kind {kind!r}")
        cfg.pd = _parse_pd(_mapping(doc.get("pd"), "pd"), kind)
    else:
        if "pd" in doc:
            raise ConfigError("pd", f"not allowed for kind {kind!r}")
        cfg.parrondo = _parse_parrondo(_mapping(doc.get("parrondo"), "parrondo"))
    if "sweep" in doc:
        if kind not in ("parrondo", "parrondo_bars"):
            raise ConfigError("sweep", "sweep blocks are only supported for parrondo kinds")
        cfg.sweep = _parse_sweep(_mapping(doc["sweep"], "sweep"))
    return cfg


def parse_formats(value, path: str = "--format") -> tuple[str, ...]:
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    if not isinstance(value, list) or not value:
        raise ConfigError(path, f"expected a nonempty subset of {FORMATS}")
    for v in value:
        if v not in FORMATS:
            raise ConfigError(path, f"unknown format {v!r}; allowed: {', '.join(FORMATS)}")
    return tuple(f for f in FORMATS if f in value)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ConfigError("<parse>", exc.problem or str(exc), line, col) from None
    except yaml.YAMLError as exc:
        raise ConfigError("<parse>", str(exc)) from None
    return parse_config(doc)
