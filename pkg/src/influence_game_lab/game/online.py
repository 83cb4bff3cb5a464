"""Online play: every influencer runs the pacing algorithm against the others.

Per campaign each player picks a pre-gate purchase, gates it against its
remaining budget and updates its own price.  The purchase rule depends on
what a player knows about the others:

* ``full``: opinions, budgets and initial prices of everyone are common
  knowledge, so the joint system of stationarity conditions is solved by
  iteration (started from the closed form below).
* ``partial``: only the sum of prices is broadcast by a coordinator and
  each player uses the interior closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..online_single import (
    DualState,
    OnlineRunTrace,
    StageRecord,
    budget_gate,
    dual_subgradient,
    mirror_descent_update,
    resolve_eta,
    ENTROPY,
)
from ..scenario import Scenario, path_arrays, sample_path
from .offline import EquilibriumReport, StrategyProfile, algorithm2_epsilon_nash, br_dynamics_m2, measure_epsilon, total_utilities

FULL = "full"
PARTIAL = "partial"
CYCLE_WINDOW = 8
CYCLE_TOL = 1e-9


def _rho(weights):
    return np.asarray(getattr(weights, "rho", weights), dtype=float)


def partial_info_raw(weights, x_own, theta_own: float, theta_sum: float, m: int) -> np.ndarray:
    if theta_sum <= 0:
        raise ValueError("the broadcast price sum must be positive")
    g = (m - 1) * _rho(weights) / theta_sum
    return g * (1.0 - (m - 1) * theta_own / theta_sum) - np.asarray(x_own, dtype=float)


def online_stage_partial_info(weights, x_own, theta_own: float, theta_sum: float, m: int, cap: float) -> np.ndarray:
    """Closed-form purchase from the own opinions and the broadcast price sum, clipped to the box."""
    return np.clip(partial_info_raw(weights, x_own, theta_own, theta_sum, m), 0.0, cap)


def corollary5_feasibility(theta, rho, m: int, cap: float, alpha, u_bar: float) -> dict:
    """Sufficient conditions for the closed-form purchase to be nonnegative.

    Both the current prices and the price ceilings ``u_bar / alpha_j + 1``
    must sit below ``rho / (m cap) * (1 - 1 / (m cap))`` for every individual.
    """
    theta = np.atleast_1d(np.asarray(theta, float))
    rho = np.atleast_1d(np.asarray(rho, float))
    alpha = np.atleast_1d(np.asarray(alpha, float))
    bound = rho / (m * cap) * (1.0 - 1.0 / (m * cap))
    th_max = u_bar / alpha + 1.0
    return {
        "bound": bound,
        "bound_positive": bool(np.all(bound > 0)),
        "theta_ok": bool(np.all(theta[:, None] <= bound[None, :])),
        "theta_max_ok": bool(np.all(th_max[:, None] <= bound[None, :])),
    }


def _response(rho, x, others, theta, cap):
    score = rho[:, None] * (1.0 - x + others)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.sqrt(score / theta) - 1.0 - others
    raw = np.where(theta > 0, raw, np.where(score > 0, np.inf, 0.0))
    raw = np.where(score > 0, raw, 0.0)
    return np.clip(raw, 0.0, cap)


def _effective(b, remaining):
    """What each player actually spends: the gate zeroes purchases the budget cannot cover."""
    if remaining is None:
        return b
    ok = b.sum(axis=0) <= remaining
    return np.where(ok[None, :], b, 0.0)


@dataclass
class FixedPoint:
    b: np.ndarray  # (n, m) pre-gate purchases
    converged: bool
    iterations: int
    oscillating: bool = False
    residual: float = 0.0


def full_info_residual(weights, x, b, thetas, caps, remaining=None) -> float:
    rho = _rho(weights)
    eff = _effective(b, remaining)
    others = eff.sum(axis=1, keepdims=True) - eff
    return float(np.abs(_response(rho, x, others, np.asarray(thetas, float), np.asarray(caps, float)) - b).max())


def online_stage_full_info(weights, x, thetas, caps, remaining=None, max_iters: int = 500) -> FixedPoint:
    """Joint purchase solving every player's stationarity condition simultaneously.

    Jacobi iteration from the closed-form seed.  When ``remaining`` budgets
    are given, players anticipate the others' gates.  If the iterates cycle
    the member with the lowest total spend is returned (ties: earliest).
    """
    rho = _rho(weights)
    x = np.asarray(x, dtype=float)
    n, m = x.shape
    thetas = np.asarray(thetas, dtype=float)
    caps = np.broadcast_to(np.asarray(caps, float), (m,))
    if m == 1 or np.sum(thetas) <= 0:
        b = _response(rho, x, np.zeros_like(x), thetas, caps)
    else:
        b = np.stack(
            [online_stage_partial_info(rho, x[:, j], thetas[j], thetas.sum(), m, caps[j]) for j in range(m)], axis=1
        )
    history = [b]
    for it in range(1, max_iters + 1):
        eff = _effective(b, remaining)
        others = eff.sum(axis=1, keepdims=True) - eff
        new = _response(rho, x, others, thetas, caps)
        if np.abs(new - b).max() <= 1e-13:
            return FixedPoint(new, True, it, residual=full_info_residual(rho, x, new, thetas, caps, remaining))
        for back, old in enumerate(reversed(history[-CYCLE_WINDOW:-1]), start=2):
            if np.abs(new - old).max() <= CYCLE_TOL:
                # new repeats history[-back]: the cycle is history[-back:]
                cycle = history[-back:]
                pick = min(range(len(cycle)), key=lambda c: (cycle[c].sum(), c))
                chosen = cycle[pick]
                return FixedPoint(
                    chosen, False, it, oscillating=True,
                    residual=full_info_residual(rho, x, chosen, thetas, caps, remaining),
                )
        history.append(new)
        b = new
    window = history[-CYCLE_WINDOW:]
    pick = min(range(len(window)), key=lambda c: (window[c].sum(), c))
    chosen = window[pick]
    return FixedPoint(chosen, False, max_iters, residual=full_info_residual(rho, x, chosen, thetas, caps, remaining))


@dataclass
class GameRun:
    traces: list[OnlineRunTrace]
    b: np.ndarray  # (K, n, m) realized purchases
    flags: list[dict] = field(default_factory=list)


def run_online_game(
    path,
    budgets,
    caps,
    mode: str = FULL,
    etas=None,
    theta0=None,
    th_max=None,
    regularizer: str = ENTROPY,
) -> GameRun:
    arr = path_arrays(path)
    K, n, m = arr.K, arr.n, arr.m
    budgets = np.asarray(budgets, float)
    caps = np.broadcast_to(np.asarray(caps, float), (m,))
    theta0 = np.full(m, math.exp(-1)) if theta0 is None else np.broadcast_to(np.asarray(theta0, float), (m,))
    th_max = np.full(m, math.inf) if th_max is None else np.asarray(th_max, float)
    etas = np.broadcast_to(np.asarray(etas, float), (m,))
    alphas = budgets / K
    states = [DualState(float(theta0[j]), float(etas[j]), regularizer, float(th_max[j])) for j in range(m)]
    traces = [OnlineRunTrace(budget=float(budgets[j]), cap=float(caps[j])) for j in range(m)]
    remaining = budgets.copy()
    spent = np.zeros(m)
    realized = np.zeros((K, n, m))
    flags = []
    for k in range(K):
        rho, x = arr.rho[k], arr.x[k]
        thetas = np.array([s.theta for s in states])
        flag = {}
        if mode == FULL:
            fp = online_stage_full_info(rho, x, thetas, caps, remaining)
            b_tilde = fp.b
            flag = {"converged": fp.converged, "oscillating": fp.oscillating, "residual": fp.residual}
        elif mode == PARTIAL:
            raw = np.stack([partial_info_raw(rho, x[:, j], thetas[j], thetas.sum(), m) for j in range(m)], axis=1)
            b_tilde = np.clip(raw, 0.0, caps)
            flag = {"clamped": bool(np.any(raw != b_tilde))}
        else:
            raise ValueError(f"unknown mode {mode!r}")
        flags.append(flag)
        b_hat = np.stack([budget_gate(b_tilde[:, j], remaining[j]) for j in range(m)], axis=1)
        realized[k] = b_hat
        phi = (x + b_hat) / (1.0 + b_hat.sum(axis=1, keepdims=True))
        for j in range(m):
            remaining[j] -= b_hat[:, j].sum()
            spent[j] += b_hat[:, j].sum()
            if traces[j].stop_time is None and spent[j] + caps[j] >= budgets[j]:
                traces[j].stop_time = k
            g = dual_subgradient(b_tilde[:, j], alphas[j])
            others = b_hat.sum(axis=1) - b_hat[:, j]
            traces[j].records.append(
                StageRecord(
                    k=k,
                    x=x[:, j],
                    rho=rho,
                    b_tilde=b_tilde[:, j],
                    b_hat=b_hat[:, j],
                    theta=states[j].theta,
                    g=g,
                    remaining=float(remaining[j]),
                    utility=float(rho @ phi[:, j]),
                    utility_adjusted=float(rho @ (b_hat[:, j] * (1.0 - x[:, j] + others) / (1.0 + b_hat.sum(axis=1)))),
                )
            )
            states[j] = mirror_descent_update(states[j], g)
    return GameRun(traces, realized, flags)


def _player_params(sc: Scenario, eta, regularizer):
    etas, th_max = [], []
    for j in range(sc.m):
        e, t = resolve_eta(sc, None if eta is None else float(np.broadcast_to(eta, (sc.m,))[j]), regularizer, j)
        etas.append(e)
        th_max.append(t)
    return np.array(etas), np.array(th_max)


def _online_report(arr, run: GameRun, budgets, caps, reference: EquilibriumReport) -> EquilibriumReport:
    gains = measure_epsilon(arr, run.b, caps, budgets)
    utilities = total_utilities(arr, run.b)
    gap = np.abs(utilities - reference.utilities) / arr.K
    return EquilibriumReport(
        profile=StrategyProfile(run.b, np.asarray(budgets, float), np.asarray(caps, float)),
        epsilon=float(gains.max()),
        gains=gains,
        iterations=arr.K,
        converged=True,
        utilities=utilities,
        extra={"utility_gap": gap, "reference_utilities": reference.utilities, "reference": reference},
    )


def online_game_m2(
    sc: Scenario, seed: int | None = None, eta=None, theta0=None, *, stream=(), regularizer: str = ENTROPY
):
    """Two influencers each running the pacing algorithm; compared with the offline Nash profile."""
    if sc.m != 2:
        raise ValueError("online_game_m2 needs two influencers")
    path = path_arrays(sample_path(sc, seed, stream))
    etas, th_max = _player_params(sc, eta, regularizer)
    run = run_online_game(path, sc.budgets, sc.caps, FULL, etas, theta0, th_max, regularizer)
    nash = br_dynamics_m2(path, sc.budgets, sc.caps)
    return run.traces, _online_report(path, run, sc.budgets, sc.caps, nash)


def online_game_multi(
    sc: Scenario,
    seed: int | None = None,
    mode: str = FULL,
    eta=None,
    theta0=None,
    *,
    stream=(),
    regularizer: str = ENTROPY,
    reference: EquilibriumReport | None = None,
):
    """``m`` influencers online under full or partial information, compared with the offline profile."""
    path = path_arrays(sample_path(sc, seed, stream))
    etas, th_max = _player_params(sc, eta, regularizer)
    run = run_online_game(path, sc.budgets, sc.caps, mode, etas, theta0, th_max, regularizer)
    if reference is None:
        reference = algorithm2_epsilon_nash(path, sc.budgets, sc.caps)
    report = _online_report(path, run, sc.budgets, sc.caps, reference)
    report.extra["flags"] = run.flags
    return run.traces, report
