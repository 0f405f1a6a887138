"""Built-in oracle checks runnable without a test harness."""
from __future__ import annotations

import itertools

import numpy as np

from .eisert import default_payoff_table, final_state, outcome_distribution, payoff
from .gamelib import CoinStateKind
from .walk import BRule, Scheme, run_game

SELFTEST_SEED = 20130117


def engine_equivalence(tol: float = 1e-10) -> tuple[bool, str]:
    worst = 0.0
    for k, steps, init, scheme in itertools.product(
            (2, 3), range(1, 7), CoinStateKind, (Scheme.Seq22, Scheme.AB_random)):
        for order in ("sequential", "symmetrized"):
            rule = BRule(order=order)
            dense = run_game(k, scheme, steps, init, rule, "dense", SELFTEST_SEED)
            sparse = run_game(k, scheme, steps, init, rule, "sparse", SELFTEST_SEED)
            worst = max(worst, float(np.abs(dense - sparse).max()))
    return worst <= tol, f"max |dense - sparse| = {worst:.3e} (tol {tol:g})"


def classical_consistency(tol: float = 1e-12) -> tuple[bool, str]:
    worst_prob, worst_pay, count = 0.0, 0.0, 0
    for k in range(2, 6):
        table = default_payoff_table(k)
        for bits in itertools.product((0, 1), repeat=k):
            profile = ["D" if b else "C" for b in bits]
            probs = outcome_distribution(final_state(profile))
            target = int("".join(map(str, bits)), 2)
            worst_prob = max(worst_prob, 1.0 - probs[target])
            worst_pay = max(worst_pay, float(np.abs(payoff(profile, table)
                                                    - table.values[target]).max()))
            count += 1
    ok = worst_prob <= 1e-10 and worst_pay <= tol
    return ok, (f"{count} classical profiles; max missing mass {worst_prob:.3e}, "
                f"max payoff error {worst_pay:.3e}")


CHECKS = {
    "dense_vs_sparse": engine_equivalence,
    "classical_consistency": classical_consistency,
}


def run_selftest() -> dict[str, dict]:
    report = {}
    for name, check in CHECKS.items():
        ok, detail = check()
        report[name] = {"passed": bool(ok), "detail": detail}
    return report
