"""Built-in oracle and property checks, run by ``prefnet verify``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    DynamicsSpec,
    Info,
    PopulationState,
    Rule,
    Termination,
    best_response_profile,
    default_phi,
    run,
    step_best_response,
    step_proportional_imitation,
)
from .equilibrium import enumerate_equilibria, verify_nash_bruteforce
from .experiments import reference_alpha_grid, reference_beta_grid
from .game import (
    GameKind,
    PayoffParams,
    best_response_complete,
    lower_threshold,
    payoff,
    upper_threshold,
)
from .graph import generate_ba, generate_er


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def reference_rewards():
    return [PayoffParams(a, b) for a in reference_alpha_grid() for b in reference_beta_grid(a)]


def argmax_response(theta, k, chi, p, kind):
    """Payoff argmax with exact rewards, ties to ``theta``."""
    exact = PayoffParams(p.exact_alpha, p.exact_beta)
    u1 = payoff(theta, 1, k, chi, exact, kind)
    u0 = payoff(theta, 0, k, chi, exact, kind)
    if u1 == u0:
        return theta
    return 1 if u1 > u0 else 0


def check_threshold_argmax(kmax=30) -> Check:
    mismatches = cases = 0
    for p in reference_rewards():
        for kind in GameKind:
            for theta in (0, 1):
                for k in range(kmax + 1):
                    for chi in range(k + 1):
                        cases += 1
                        if best_response_complete(theta, k, chi, p, kind) != argmax_response(
                                theta, k, chi, p, kind):
                            mismatches += 1
    return Check("threshold rule equals payoff argmax", mismatches == 0,
                 f"{cases} cases, {mismatches} mismatches")


def check_threshold_identity(kmax=30) -> Check:
    worst = max(abs(lower_threshold(k, p) + upper_threshold(k, p) - k)
                for p in reference_rewards() for k in range(kmax + 1))
    return Check("lower + upper threshold = k", worst <= 1e-12, f"max error {worst:.3g}")


def check_vectorised_rule(kmax=30) -> Check:
    ks, chis, thetas = [], [], []
    for k in range(kmax + 1):
        for chi in range(k + 1):
            for theta in (0, 1):
                ks.append(k)
                chis.append(chi)
                thetas.append(theta)
    ks, chis, thetas = map(np.array, (ks, chis, thetas))
    bad = 0
    for p in reference_rewards():
        for kind in GameKind:
            fast = best_response_profile(thetas, ks, chis, 1, p, kind)
            slow = [best_response_complete(t, k, c, p, kind) for t, k, c in zip(thetas, ks, chis)]
            bad += int(np.count_nonzero(fast != np.array(slow)))
    return Check("vectorised rule equals scalar rule", bad == 0, f"{bad} mismatches")


def check_nash_soundness(instances=100, seed=2024) -> Check:
    rng = np.random.default_rng(seed)
    fixed = violations = 0
    rewards = reference_rewards()
    for i in range(instances):
        n = int(rng.integers(2, 13))
        if i % 2 == 0 or n < 3:
            g = generate_er(n, float(rng.uniform(0.5, min(4.0, n - 1.5))), int(rng.integers(2**31)))
        else:
            g = generate_ba(n, int(rng.integers(1, 3)), int(rng.integers(2**31)))
        kind = GameKind.CG if i % 4 < 2 else GameKind.AG
        p = rewards[int(rng.integers(len(rewards)))]
        rho = float(rng.uniform(0.2, 0.8))
        res = run(g, DynamicsSpec(), p, kind, rho, "uniform_random", int(rng.integers(2**31)))
        if res.termination is not Termination.FIXED_POINT:
            continue
        fixed += 1
        s = res.final_state
        ok, _ = verify_nash_bruteforce(s, p, kind)
        listed = {prof for prof, _ in enumerate_equilibria(g, s.preferences, p, kind)}
        if not ok or tuple(int(v) for v in s.actions) not in listed:
            violations += 1
    return Check("best-response fixed points are Nash", violations == 0,
                 f"{fixed} fixed points checked, {violations} violations")


def check_pi_absorbing(seeds=20, steps=100) -> Check:
    p = PayoffParams(0.8, 0.5)
    moved = 0
    for seed in range(seeds):
        g = generate_er(100, 10, seed)
        prefs = np.random.default_rng(seed).integers(0, 2, g.n)
        for action in (0, 1):
            s = PopulationState(g, prefs, np.full(g.n, action))
            rng = np.random.default_rng(seed)
            for _ in range(steps):
                s, changed = step_proportional_imitation(s, p, GameKind.CG, default_phi(g, p), 1.0, rng)
                moved += changed
    return Check("imitation leaves homogeneous profiles alone", moved == 0, f"{moved} changes")


def check_incomplete_one_step(seeds=20) -> Check:
    late = 0
    for seed, kind in itertools.product(range(seeds), GameKind):
        g = generate_er(100, 8, seed)
        p = PayoffParams(0.7, 0.5)
        res = run(g, DynamicsSpec(rule=Rule.BEST_RESPONSE), p, kind, 0.3 + 0.02 * seed,
                  "uniform_random", seed, info=Info.INCOMPLETE)
        _, again = step_best_response(res.final_state, p, kind, Info.INCOMPLETE)
        if res.termination is not Termination.FIXED_POINT or res.steps_taken > 2 or again:
            late += 1
    return Check("incomplete-information best response settles in one step", late == 0,
                 f"{late} runs needed more")


ALL_CHECKS = (
    check_threshold_argmax,
    check_threshold_identity,
    check_vectorised_rule,
    check_nash_soundness,
    check_pi_absorbing,
    check_incomplete_one_step,
)


def run_all() -> list[Check]:
    return [check() for check in ALL_CHECKS]
