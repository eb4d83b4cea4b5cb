"""Denoising-diffusion forward-process algebra, as pure numerics.

Covers the noise schedule (alpha_t and its running product), the forward
noising map z_t = sqrt(abar_t) x + sqrt(1 - abar_t) eps, its algebraic
inversion, and the mean-squared noise-prediction objective. There is no
learned component here; the reverse process with a trained predictor is out
of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Below this, reconstruct() considers the schedule degenerate (z carries no
# recoverable signal at double precision).
ALPHA_BAR_FLOOR = 1e-300


@dataclass(frozen=True)
class NoiseSchedule:
    """alphas[t-1] is alpha_t for t = 1..T; alpha_bars the running product."""

    alphas: np.ndarray
    alpha_bars: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float).ravel()
        ab = np.asarray(self.alpha_bars, dtype=float).ravel()
        if a.size == 0 or a.size != ab.size:
            raise ValueError("alphas and alpha_bars must be non-empty and equal length")
        if np.any(a <= 0.0) or np.any(a >= 1.0):
            raise ValueError("each alpha_t must lie in (0, 1)")
        if np.any(np.diff(ab) >= 0.0):
            raise ValueError("alpha_bar must be strictly decreasing")
        prod = np.concatenate([[a[0]], ab[:-1] * a[1:]])
        if np.max(np.abs(prod - ab)) > 1e-12:
            raise ValueError("alpha_bar must equal the running product of alphas")
        object.__setattr__(self, "alphas", a.copy())
        object.__setattr__(self, "alpha_bars", ab.copy())

    @property
    def T(self) -> int:
        return self.alphas.size

    @classmethod
    def linear_beta(cls, T: int = 1000, beta_start: float = 1e-4, beta_end: float = 0.02):
        betas = np.linspace(beta_start, beta_end, T)
        alphas = 1.0 - betas
        return cls(alphas=alphas, alpha_bars=np.cumprod(alphas))

    def alpha_bar(self, t: int) -> float:
        if not 1 <= t <= self.T:
            raise ValueError(f"step t={t} outside 1..{self.T}")
        return float(self.alpha_bars[t - 1])


def forward_noise(x, t: int, eps, sched: NoiseSchedule) -> np.ndarray:
    """z_t = sqrt(abar_t) x + sqrt(1 - abar_t) eps."""
    x = np.asarray(x, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if x.shape != eps.shape:
        raise ValueError("x and eps must share a shape")
    ab = sched.alpha_bar(t)
    return np.sqrt(ab) * x + np.sqrt(1.0 - ab) * eps


def reconstruct(z, t: int, eps, sched: NoiseSchedule) -> np.ndarray:
    """Invert the forward map: x_hat = (z - sqrt(1 - abar_t) eps) / sqrt(abar_t)."""
    z = np.asarray(z, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if z.shape != eps.shape:
        raise ValueError("z and eps must share a shape")
    ab = sched.alpha_bar(t)
    if ab <= ALPHA_BAR_FLOOR:
        raise ValueError(f"alpha_bar at t={t} is degenerate ({ab:.3e})")
    return (z - np.sqrt(1.0 - ab) * eps) / np.sqrt(ab)


def loss_target(eps_true, eps_pred) -> float:
    """Mean squared error between true and predicted noise."""
    a = np.asarray(eps_true, dtype=float)
    b = np.asarray(eps_pred, dtype=float)
    if a.shape != b.shape:
        raise ValueError("noise arrays must share a shape")
    return float(np.mean((a - b) ** 2))
