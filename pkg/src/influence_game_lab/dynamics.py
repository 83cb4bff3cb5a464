"""Opinion dynamics on a weighted social graph.

Individuals hold opinions over ``m`` influencers.  Investments shift the
opinions at the start of a campaign, after which the network relaxes by
De Groot consensus ``dx/dt = -L x`` for the campaign duration.  Only the
end-of-campaign aggregate matters for the rewards, so a campaign is
summarised by the weight vector ``rho = 1^T expm(-L T)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

ROW_SUM_TOL = 1e-12
EXPM_TOL = 1e-9


class InvalidNetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Network:
    laplacian: np.ndarray

    def __post_init__(self):
        lap = np.array(self.laplacian, dtype=float)
        if lap.ndim != 2 or lap.shape[0] != lap.shape[1] or lap.shape[0] == 0:
            raise InvalidNetworkError(f"laplacian must be a non-empty square matrix, got shape {lap.shape}")
        if not np.all(np.isfinite(lap)):
            raise InvalidNetworkError("laplacian has non-finite entries")
        scale = max(1.0, float(np.abs(lap).max()))
        row_err = np.abs(lap.sum(axis=1)).max()
        if row_err > ROW_SUM_TOL * scale * lap.shape[0]:
            raise InvalidNetworkError(f"laplacian rows must sum to zero (max residual {row_err:.3e})")
        off = lap - np.diag(np.diag(lap))
        if np.any(off > 0):
            raise InvalidNetworkError("laplacian off-diagonal entries must be <= 0")
        if np.any(np.diag(lap) < 0):
            raise InvalidNetworkError("laplacian diagonal entries must be >= 0")
        lap.setflags(write=False)
        object.__setattr__(self, "laplacian", lap)

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]


@dataclass(frozen=True)
class CampaignWeights:
    """Per-individual weights of one campaign of length ``duration``."""

    rho: np.ndarray
    duration: float


def de_groot_weights(net: Network, duration: float) -> CampaignWeights:
    """Column sums of ``expm(-L * duration)``.

    The matrix exponential is row-stochastic whenever the Laplacian has
    zero row sums, so the weights are nonnegative and add up to ``n``.
    """
    if not (np.isfinite(duration) and duration > 0):
        raise ValueError(f"duration must be positive and finite, got {duration}")
    a = expm(-net.laplacian * float(duration))
    if not np.all(np.isfinite(a)):
        raise InvalidNetworkError("matrix exponential overflowed")
    rho = a.sum(axis=0)
    # tiny negative round-off from the exponential is clipped; anything larger is a bug
    if rho.min() < -EXPM_TOL:
        raise InvalidNetworkError(f"negative campaign weight {rho.min():.3e}")
    rho = np.clip(rho, 0.0, None)
    rho.setflags(write=False)
    return CampaignWeights(rho=rho, duration=float(duration))


def opinion_update(x_row, b_row) -> np.ndarray:
    """Post-investment opinions ``(x_j + b_j) / (1 + sum_l b_l)``.

    Works on a single row or on stacked rows (last axis = influencers).
    """
    x_row = np.asarray(x_row, dtype=float)
    b_row = np.asarray(b_row, dtype=float)
    return (x_row + b_row) / (1.0 + b_row.sum(axis=-1, keepdims=True))


def _rho(weights) -> np.ndarray:
    return np.asarray(getattr(weights, "rho", weights), dtype=float)


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def _check(rho, x, b, j):
    if x.shape != b.shape or x.shape[0] != rho.shape[0]:
        raise ValueError(f"shape mismatch: rho {rho.shape}, x {x.shape}, b {b.shape}")
    if not 0 <= j < x.shape[1]:
        raise IndexError(f"influencer index {j} out of range for m={x.shape[1]}")


def stage_utility(weights, x, b, j: int) -> float:
    """Reward of influencer ``j`` for one campaign: ``sum_i rho_i phi_ij``."""
    rho, x, b = _rho(weights), _as_matrix(x), _as_matrix(b)
    _check(rho, x, b, j)
    return float(rho @ ((x[:, j] + b[:, j]) / (1.0 + b.sum(axis=1))))


def adjusted_stage_utility(weights, x, b, j: int) -> float:
    """Stage reward minus the reward obtained with ``b_j = 0`` (others fixed)."""
    rho, x, b = _rho(weights), _as_matrix(x), _as_matrix(b)
    _check(rho, x, b, j)
    total = 1.0 + b.sum(axis=1)
    others = total - 1.0 - b[:, j]
    return float(rho @ (b[:, j] * (1.0 - x[:, j] + others) / total))


def stage_gradient(weights, x, b, j: int) -> np.ndarray:
    """Gradient of influencer ``j``'s stage reward in its own investments."""
    rho, x, b = _rho(weights), _as_matrix(x), _as_matrix(b)
    _check(rho, x, b, j)
    total = 1.0 + b.sum(axis=1)
    others = total - 1.0 - b[:, j]
    return rho * (1.0 - x[:, j] + others) / total**2
