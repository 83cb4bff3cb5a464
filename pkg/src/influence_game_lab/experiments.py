"""Sweep drivers behind the bundled figures.

Each figure is a list of sweep points; each point averages ``trials``
paired paths (trial ``t`` uses stream ``(t,)`` at every sweep point).
Points run through :func:`pmap`, results are merged in sweep order and
written as one ``sweep,mean,stderr`` CSV per curve plus a JSON manifest.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib.resources import files
from pathlib import Path

import numpy as np

from . import __version__
from .game.offline import algorithm2_epsilon_nash, br_dynamics_m2, total_utilities
from .game.online import FULL, PARTIAL, run_online_game
from .online_single import path_regret, resolve_eta, run_online_path
from .parallel import pmap
from .scenario import Scenario, load_scenario, path_arrays, sample_path

FIGURES = {
    "fig2": "single influencer: average regret vs K for alpha in {0.2, 0.4, 0.6}",
    "fig3": "two influencers: online vs offline Nash utilities and their gap vs K",
    "fig4": "three influencers: offline, full- and partial-information utilities vs K",
    "fig5": "first influencer's utility vs the opponents' total budget, m in {3, 5, 7, 9}",
}

DEFAULT_SWEEPS = {
    "fig2": [2, 5, 10, 25, 50, 100],
    "fig3": [10, 20, 30, 40, 50, 60],
    "fig4": [10, 20, 30, 40, 50, 60],
    "fig5": [50, 100, 200, 300, 400, 500, 600],
}
# fig5 solves an m-player equilibrium per trial for four values of m; 20
# trials keeps the full sweep inside ten minutes on one core
DEFAULT_TRIALS = {"fig2": 50, "fig3": 50, "fig4": 50, "fig5": 20}
DEFAULT_PARAMS = {
    "fig2": {"alphas": [0.2, 0.4, 0.6]},
    "fig3": {},
    "fig4": {},
    "fig5": {"m_values": [3, 5, 7, 9]},
}


class ExperimentError(RuntimeError):
    pass


def bundled_scenario_path(name: str) -> Path:
    return Path(str(files("influence_game_lab") / "figures" / f"{name}.json"))


def resolve_scenario(ref) -> tuple[Scenario, dict]:
    """Load a bundled name (``fig3``) or a path; also return the raw document."""
    path = bundled_scenario_path(ref) if ref in FIGURES else Path(ref)
    doc = json.loads(path.read_text())
    return load_scenario(doc), doc


@dataclass
class ExperimentSpec:
    figure: str
    scenario: str | None = None
    sweep: list = field(default_factory=list)
    trials: int | None = None
    seed: int = 7
    out: str = "results"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario is None:
            self.scenario = self.figure
        if not self.sweep and self.figure in DEFAULT_SWEEPS:
            self.sweep = list(DEFAULT_SWEEPS[self.figure])
        if self.trials is None:
            self.trials = DEFAULT_TRIALS.get(self.figure, 50)
        self.params = {**DEFAULT_PARAMS.get(self.figure, {}), **self.params}

    def validate(self):
        problems = []
        if self.figure not in FIGURES:
            problems.append(f"figure: unknown figure {self.figure!r}")
        if len(self.sweep) == 0:
            problems.append("sweep: must not be empty")
        elif any(b <= a for a, b in zip(self.sweep, self.sweep[1:])):
            problems.append("sweep: values must be strictly increasing")
        if self.trials < 1:
            problems.append("trials: must be >= 1")
        if problems:
            raise ValueError("; ".join(problems))


def _mean_se(v) -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    return float(v.mean()), se


# ---------------------------------------------------------------------------
# one sweep point per function; each returns {curve name: (mean, stderr)}


def _fig2_point(sc: Scenario, K: int, seed: int, trials: int, params: dict) -> dict:
    out = {}
    for alpha in params["alphas"]:
        s = sc.with_budgets([alpha * sc.horizon]).with_horizon(K)
        eta, th_max = resolve_eta(s, None, "entropy")
        regrets = []
        for t in range(trials):
            path = sample_path(s, seed, (t,))
            trace = run_online_path(path, float(s.budgets[0]), float(s.caps[0]), eta=eta, th_max=th_max)
            regrets.append(path_regret(path, trace, float(s.budgets[0]), float(s.caps[0])) / K)
        out[f"regret_alpha{alpha}"] = _mean_se(regrets)
    return out


def _player_etas(s: Scenario):
    pairs = [resolve_eta(s, None, "entropy", j) for j in range(s.m)]
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


def _fig3_point(sc: Scenario, K: int, seed: int, trials: int, params: dict) -> dict:
    s = sc.with_horizon(K)
    etas, th_max = _player_etas(s)
    on, off, gap = [], [], []
    for t in range(trials):
        path = path_arrays(sample_path(s, seed, (t,)))
        nash = br_dynamics_m2(path, s.budgets, s.caps)
        if not nash.converged:
            raise ExperimentError("best-response dynamics did not converge")
        run = run_online_game(path, s.budgets, s.caps, FULL, etas, None, th_max)
        u_on = total_utilities(path, run.b) / K
        on.append(u_on)
        off.append(nash.average_utilities)
        gap.append(abs(u_on[0] - nash.average_utilities[0]))
    on, off = np.array(on), np.array(off)
    out = {}
    for j in range(s.m):
        out[f"online_u{j + 1}"] = _mean_se(on[:, j])
        out[f"offline_u{j + 1}"] = _mean_se(off[:, j])
    out["gap_u1"] = _mean_se(gap)
    return out


def _multi_trials(s: Scenario, seed: int, trials: int, eps_thr: float = 1e-3):
    etas, th_max = _player_etas(s)
    rows = {"offline": [], FULL: [], PARTIAL: []}
    for t in range(trials):
        path = path_arrays(sample_path(s, seed, (t,)))
        ref = algorithm2_epsilon_nash(path, s.budgets, s.caps, eps_thr=eps_thr)
        rows["offline"].append(ref.average_utilities)
        for mode in (FULL, PARTIAL):
            run = run_online_game(path, s.budgets, s.caps, mode, etas, None, th_max)
            rows[mode].append(total_utilities(path, run.b) / s.horizon)
    return {k: np.array(v) for k, v in rows.items()}


def _fig4_point(sc: Scenario, K: int, seed: int, trials: int, params: dict) -> dict:
    s = sc.with_horizon(K)
    rows = _multi_trials(s, seed, trials)
    out = {}
    for mode, u in rows.items():
        for j in range(s.m):
            out[f"{mode}_u{j + 1}"] = _mean_se(u[:, j])
    for mode in (FULL, PARTIAL):
        out[f"gap_{mode}"] = _mean_se(np.abs(rows[mode] - rows["offline"]).sum(axis=1))
    return out


def fig5_scenario(base: Scenario, m: int, opponents_total: float) -> Scenario:
    """The fig5 setting with ``m`` influencers; opponents share ``opponents_total`` equally."""
    from dataclasses import replace

    from .scenario import OpinionDistribution

    first = base.opinions.support[:, 0]
    rows = np.column_stack([first] + [(1.0 - first) / (m - 1)] * (m - 1))
    opinions = OpinionDistribution("product", rows, base.opinions.probs, base.n)
    budgets = np.array([base.budgets[0]] + [opponents_total / (m - 1)] * (m - 1))
    caps = np.full(m, base.caps[0])
    return replace(base, opinions=opinions, budgets=budgets, caps=caps)


def _fig5_point(sc: Scenario, total: float, seed: int, trials: int, params: dict) -> dict:
    out = {}
    for m in params["m_values"]:
        s = fig5_scenario(sc, m, total)
        problems = s.validate()
        if problems:
            raise ExperimentError("; ".join(problems))
        rows = _multi_trials(s, seed, trials)
        for mode, u in rows.items():
            out[f"m{m}_{mode}_u1"] = _mean_se(u[:, 0])
    return out


POINTS = {"fig2": _fig2_point, "fig3": _fig3_point, "fig4": _fig4_point, "fig5": _fig5_point}


def _run_point(job):
    figure, sc, value, seed, trials, params = job
    try:
        return POINTS[figure](sc, value, seed, trials, params)
    except Exception as exc:
        raise ExperimentError(f"{figure}: sweep point {value!r} failed: {exc}") from exc


def run_sweep(spec: ExperimentSpec, workers: int | None = None) -> dict:
    """Compute every curve; returns ``{curve: [(sweep value, mean, stderr), ...]}``."""
    spec.validate()
    sc, _ = resolve_scenario(spec.scenario)
    jobs = [(spec.figure, sc, v, spec.seed, spec.trials, spec.params) for v in spec.sweep]
    points = pmap(_run_point, jobs, workers)
    curves = {}
    for value, point in zip(spec.sweep, points):
        for name, (mean, se) in point.items():
            curves.setdefault(name, []).append((value, mean, se))
    return curves


def _fmt(v) -> str:
    return repr(float(v)) if not isinstance(v, (int, np.integer)) else str(int(v))


def reproduce(spec: ExperimentSpec, workers: int | None = None) -> list[Path]:
    """Run a figure sweep and write its CSVs and manifest into ``spec.out``."""
    curves = run_sweep(spec, workers)
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in curves.items():
        path = out / f"{spec.figure}_{name}.csv"
        lines = ["sweep,mean,stderr"] + [f"{_fmt(v)},{_fmt(m)},{_fmt(s)}" for v, m, s in rows]
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    _, doc = resolve_scenario(spec.scenario)
    manifest = {
        "figure": spec.figure,
        "description": FIGURES[spec.figure],
        # the output directory is not part of what determines the results
        "spec": {k: v for k, v in asdict(spec).items() if k != "out"},
        "scenario": doc,
        "library_version": __version__,
        "numpy_version": np.__version__,
        "files": [p.name for p in written],
    }
    mpath = out / f"{spec.figure}_manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(mpath)
    return written
