"""Random campaign environments and their JSON configuration.

A scenario fixes the network, a finite distribution over opinion matrices,
a finite distribution over campaign durations, the horizon and the
influencers' budgets.  Sampling is counter-based: stage ``k`` of stream
``s`` always draws from the same Philox key, so paths for different
horizons share their prefixes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import CampaignWeights, InvalidNetworkError, Network, de_groot_weights

SIMPLEX_TOL = 1e-12
PROB_TOL = 1e-12


class ScenarioError(ValueError):
    """Raised when a scenario document is malformed or violates a constraint.

    ``problems`` lists every failing constraint, each prefixed by its field.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _check_opinion_matrix(x: np.ndarray, where: str) -> list[str]:
    problems = []
    if np.any(x < -SIMPLEX_TOL) or np.any(x > 1 + SIMPLEX_TOL):
        problems.append(f"{where}: opinions must lie in [0, 1]")
    # a single influencer competes against an implicit "undecided" share
    if x.shape[-1] >= 2:
        err = np.abs(x.sum(axis=-1) - 1.0).max()
        if err > SIMPLEX_TOL:
            problems.append(f"{where}: opinion rows must sum to 1 (max residual {err:.3e})")
    return problems


def _check_probs(p: np.ndarray, where: str) -> list[str]:
    problems = []
    if p.ndim != 1 or p.size == 0:
        return [f"{where}: probabilities must be a non-empty vector"]
    if np.any(p < 0):
        problems.append(f"{where}: probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > PROB_TOL:
        problems.append(f"{where}: probabilities must sum to 1 (got {p.sum():.15g})")
    return problems


@dataclass(frozen=True)
class OpinionDistribution:
    """Distribution over ``n x m`` opinion matrices.

    ``kind="atoms"``: ``support`` is a ``(d, n, m)`` array of whole matrices.
    ``kind="product"``: ``support`` is a ``(d, m)`` array of candidate rows and
    every individual draws its row independently.
    """

    kind: str
    support: np.ndarray
    probs: np.ndarray
    n: int

    @property
    def m(self) -> int:
        return self.support.shape[-1]

    def validate(self) -> list[str]:
        problems = []
        if self.kind not in ("atoms", "product"):
            return [f"opinions.kind: unknown kind {self.kind!r}"]
        expected = 3 if self.kind == "atoms" else 2
        if self.support.ndim != expected:
            return [f"opinions: support has wrong rank {self.support.ndim}"]
        if self.kind == "atoms" and self.support.shape[1] != self.n:
            problems.append(f"opinions.matrices: expected {self.n} rows per matrix, got {self.support.shape[1]}")
        if len(self.probs) != self.support.shape[0]:
            problems.append("opinions.probs: length does not match the support")
        problems += _check_opinion_matrix(self.support, "opinions")
        problems += _check_probs(self.probs, "opinions.probs")
        return problems

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "atoms":
            return self.support[rng.choice(len(self.probs), p=self.probs)].copy()
        return self.support[rng.choice(len(self.probs), size=self.n, p=self.probs)].copy()


@dataclass(frozen=True)
class DurationDistribution:
    support: np.ndarray
    probs: np.ndarray

    def validate(self) -> list[str]:
        problems = []
        if self.support.ndim != 1 or self.support.size == 0:
            return ["durations.values: must be a non-empty list"]
        if np.any(~np.isfinite(self.support)) or np.any(self.support <= 0):
            problems.append("durations.values: durations must be positive")
        if len(self.probs) != len(self.support):
            problems.append("durations.probs: length does not match values")
        problems += _check_probs(self.probs, "durations.probs")
        return problems

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.support[rng.choice(len(self.probs), p=self.probs)])


@dataclass(frozen=True)
class Scenario:
    network: Network
    opinions: OpinionDistribution
    durations: DurationDistribution
    horizon: int
    budgets: np.ndarray
    caps: np.ndarray
    seed: int = 0
    name: str = "custom"

    @property
    def n(self) -> int:
        return self.network.n

    @property
    def m(self) -> int:
        return self.opinions.m

    @property
    def alpha(self) -> np.ndarray:
        """Average budget per campaign, ``B_j / K``."""
        return self.budgets / self.horizon

    def validate(self) -> list[str]:
        problems = []
        if self.opinions.n != self.n:
            problems.append(f"opinions: n={self.opinions.n} does not match the network (n={self.n})")
        problems += self.opinions.validate()
        problems += self.durations.validate()
        if not (isinstance(self.horizon, (int, np.integer)) and self.horizon >= 1):
            problems.append(f"horizon: must be a positive integer, got {self.horizon!r}")
            return problems
        m = self.m
        if self.budgets.shape != (m,):
            problems.append(f"budgets: expected {m} entries, got {self.budgets.shape}")
        if self.caps.shape != (m,):
            problems.append(f"caps: expected {m} entries, got {self.caps.shape}")
        if problems:
            return problems
        if np.any(~np.isfinite(self.budgets)) or np.any(self.budgets < 0):
            problems.append("budgets: must be finite and nonnegative")
        if np.any(~np.isfinite(self.caps)) or np.any(self.caps <= 0):
            problems.append("caps: must be finite and positive")
        for j in range(m):
            if self.budgets[j] > self.n * self.horizon * self.caps[j]:
                problems.append(
                    f"budgets[{j}]: {self.budgets[j]} exceeds n*K*cap = {self.n * self.horizon * self.caps[j]}"
                )
        if not 0 <= int(self.seed) < 2**64:
            problems.append("seed: must be an unsigned 64-bit integer")
        return problems

    def with_horizon(self, horizon: int, *, keep_alpha: bool = True) -> "Scenario":
        """Same scenario over ``horizon`` campaigns; budgets rescale with ``K`` by default."""
        budgets = self.alpha * horizon if keep_alpha else self.budgets
        return replace(self, horizon=int(horizon), budgets=budgets)

    def with_budgets(self, budgets) -> "Scenario":
        return replace(self, budgets=np.asarray(budgets, dtype=float))


@dataclass(frozen=True)
class StageRealization:
    k: int
    x: np.ndarray
    weights: CampaignWeights


@dataclass(frozen=True)
class PathArrays:
    """Stacked view of a realized path: ``rho`` is ``(K, n)``, ``x`` is ``(K, n, m)``."""

    rho: np.ndarray
    x: np.ndarray
    durations: np.ndarray = field(default=None)

    @property
    def K(self) -> int:
        return self.rho.shape[0]

    @property
    def n(self) -> int:
        return self.rho.shape[1]

    @property
    def m(self) -> int:
        return self.x.shape[2]

    def column(self, j: int) -> "PathArrays":
        return PathArrays(self.rho, self.x[:, :, j : j + 1], self.durations)


def path_arrays(path) -> PathArrays:
    if isinstance(path, PathArrays):
        return path
    path = list(path)
    rho = np.stack([s.weights.rho for s in path])
    x = np.stack([np.asarray(s.x, dtype=float).reshape(rho.shape[1], -1) for s in path])
    durations = np.array([s.weights.duration for s in path])
    return PathArrays(rho, x, durations)


def stage_generator(seed: int, stream: Sequence[int], k: int) -> np.random.Generator:
    """Philox generator for stage ``k`` of a given stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream) + (int(k),))
    return np.random.Generator(np.random.Philox(ss))


@lru_cache(maxsize=256)
def _cached_weights(lap_bytes: bytes, n: int, duration: float) -> CampaignWeights:
    lap = np.frombuffer(lap_bytes, dtype=float).reshape(n, n)
    return de_groot_weights(Network(lap), duration)


def weights_for(network: Network, duration: float) -> CampaignWeights:
    return _cached_weights(network.laplacian.tobytes(), network.n, float(duration))


def sample_path(sc: Scenario, seed: int | None = None, stream: Sequence[int] = ()) -> list[StageRealization]:
    """Draw ``K`` independent campaigns (opinions and duration independent)."""
    seed = sc.seed if seed is None else seed
    stages = []
    for k in range(sc.horizon):
        rng = stage_generator(seed, stream, k)
        x = sc.opinions.sample(rng)
        duration = sc.durations.sample(rng)
        stages.append(StageRealization(k=k, x=x, weights=weights_for(sc.network, duration)))
    return stages


# ---------------------------------------------------------------------------
# configuration documents


def _opinions_from_doc(doc, n: int) -> OpinionDistribution:
    kind = doc.get("kind", "product")
    if kind == "atoms":
        support = np.asarray(doc["matrices"], dtype=float)
        if support.ndim == 2:
            support = support[:, :, None]
    elif kind == "product":
        support = np.asarray(doc["rows"], dtype=float)
        if support.ndim == 1:
            support = support[:, None]
    else:
        raise ScenarioError(f"opinions.kind: unknown kind {kind!r}")
    if doc.get("complete_last", False):
        support = np.concatenate([support, 1.0 - support.sum(axis=-1, keepdims=True)], axis=-1)
    d = support.shape[0]
    probs = np.asarray(doc["probs"], dtype=float) if "probs" in doc else np.full(d, 1.0 / d)
    return OpinionDistribution(kind=kind, support=support, probs=probs, n=n)


def scenario_from_dict(doc: dict) -> Scenario:
    problems = []
    for key in ("laplacian", "opinions", "durations", "horizon", "caps"):
        if key not in doc:
            problems.append(f"{key}: missing")
    if "budgets" not in doc and "alpha" not in doc:
        problems.append("budgets: provide either 'budgets' or 'alpha'")
    if problems:
        raise ScenarioError(problems)
    try:
        network = Network(np.asarray(doc["laplacian"], dtype=float))
    except InvalidNetworkError as exc:
        raise ScenarioError(f"laplacian: {exc}") from exc
    try:
        opinions = _opinions_from_doc(doc["opinions"], network.n)
        dur = doc["durations"]
        values = np.asarray(dur["values"], dtype=float)
        probs = np.asarray(dur["probs"], dtype=float) if "probs" in dur else np.full(len(values), 1.0 / max(len(values), 1))
        durations = DurationDistribution(values, probs)
        horizon = doc["horizon"]
        caps = np.atleast_1d(np.asarray(doc["caps"], dtype=float))
        if "budgets" in doc:
            budgets = np.atleast_1d(np.asarray(doc["budgets"], dtype=float))
        else:
            budgets = np.atleast_1d(np.asarray(doc["alpha"], dtype=float)) * horizon
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario document: {exc!r}") from exc
    if caps.size == 1 and opinions.m > 1:
        caps = np.full(opinions.m, caps[0])
    sc = Scenario(
        network=network,
        opinions=opinions,
        durations=durations,
        horizon=horizon,
        budgets=budgets,
        caps=caps,
        seed=int(doc.get("seed", 0)),
        name=str(doc.get("name", "custom")),
    )
    problems = sc.validate()
    if problems:
        raise ScenarioError(problems)
    return sc


def load_scenario(source) -> Scenario:
    """Load a scenario from a path, a JSON string or an already-parsed dict."""
    if isinstance(source, dict):
        return scenario_from_dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text()
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("parse error: top-level document must be an object")
    return scenario_from_dict(doc)
