"""Entropy penalties, the clamp map and the inter-run diversity term.

These turn a relaxed energy into the annealed objective of one run,
``relaxed_energy(p) + gamma * entropy(p)``, and the ensemble objective over S
runs, which subtracts ``S * comm_strength * sum_i std_s(p[s, i])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import EnergyModel


@dataclass(frozen=True)
class EntropyConfig:
    alpha: int = 4

    def __post_init__(self):
        if int(self.alpha) != self.alpha or self.alpha < 2 or self.alpha % 2:
            raise ValueError(f"entropy exponent must be an even integer >= 2, got {self.alpha}")


@dataclass(frozen=True)
class CommConfig:
    comm_strength: float = 0.2
    epsilon_std: float = 1e-12

    def __post_init__(self):
        if not 0.0 <= self.comm_strength <= 1.0:
            raise ValueError("comm_strength must lie in [0, 1]")


@dataclass
class RelaxedEnsemble:
    """Relaxed variables for S runs: ``(S, N)`` or ``(S, N, K)``, entries in [0, 1]."""

    p: np.ndarray
    gamma: float = 0.0

    @property
    def n_runs(self) -> int:
        return self.p.shape[0]

    @property
    def categorical(self) -> bool:
        return self.p.ndim == 3

    def validate(self, atol=1e-9):
        if np.any(self.p < 0) or np.any(self.p > 1):
            raise ValueError("relaxed variables left [0, 1]")
        if self.categorical and np.any(np.abs(self.p.sum(axis=-1) - 1) > atol):
            raise ValueError("categorical rows are not on the simplex")


def ipow(x, n: int):
    """``x ** n`` for a small non-negative integer n by repeated squaring (much faster than ``**``)."""
    out = None
    base = x
    while n:
        if n & 1:
            out = base if out is None else out * base
        n >>= 1
        if n:
            base = base * base
    return np.ones_like(x) if out is None else out


def clamp_sigma(w, out=None):
    w = np.asarray(w, dtype=np.float64)
    out = np.maximum(w, 0.0, out=out)
    return np.minimum(out, 1.0, out=out)


def kary_sigma(W):
    """Clamp each entry, then normalize rows; an all-zero row becomes uniform."""
    c = np.clip(np.asarray(W, dtype=np.float64), 0.0, 1.0)
    tot = c.sum(axis=-1, keepdims=True)
    k = c.shape[-1]
    dead = tot <= 0.0
    return np.where(dead, 1.0 / k, c / np.where(dead, 1.0, tot))


# ---------------------------------------------------------------------------
# entropies


def entropy_binary(p, cfg: EntropyConfig = EntropyConfig()):
    """``sum_i 1 - (2 p_i - 1)^alpha`` over the last axis."""
    p = np.asarray(p, dtype=np.float64)
    return np.sum(1.0 - ipow(2.0 * p - 1.0, cfg.alpha), axis=-1)


def entropy_binary_grad(p, cfg: EntropyConfig = EntropyConfig(), scale: float = 1.0):
    """Gradient of :func:`entropy_binary`, optionally multiplied by ``scale``."""
    q = np.asarray(p, dtype=np.float64) * 2.0
    q -= 1.0
    out = ipow(q, cfg.alpha - 1)
    out *= -2.0 * cfg.alpha * scale
    return out


def _kary_norm(k, alpha):
    return 1.0 / ((k - 1) * ((k - 1) ** (alpha - 1) + 1))


def entropy_kary(P, cfg: EntropyConfig = EntropyConfig()):
    """Categorical alpha-entropy over rows of ``(..., N, K)``; 1 per uniform row, 0 per one-hot row."""
    P = np.asarray(P, dtype=np.float64)
    k = P.shape[-1]
    per_row = 1.0 - _kary_norm(k, cfg.alpha) * np.sum(ipow(k * P - 1.0, cfg.alpha), axis=-1)
    return per_row.sum(axis=-1)


def entropy_kary_grad(P, cfg: EntropyConfig = EntropyConfig(), scale: float = 1.0):
    P = np.asarray(P, dtype=np.float64)
    k = P.shape[-1]
    q = P * float(k)
    q -= 1.0
    out = ipow(q, cfg.alpha - 1)
    out *= -_kary_norm(k, cfg.alpha) * cfg.alpha * k * scale
    return out


def entropy(p, cfg: EntropyConfig, categorical: bool):
    return entropy_kary(p, cfg) if categorical else entropy_binary(p, cfg)


def entropy_grad(p, cfg: EntropyConfig, categorical: bool, scale: float = 1.0):
    return (entropy_kary_grad if categorical else entropy_binary_grad)(p, cfg, scale)


def entropy_per_node(p, categorical: bool, cfg: EntropyConfig = EntropyConfig()):
    """Mean entropy per node for each run."""
    p = np.asarray(p)
    n = p.shape[-2] if categorical else p.shape[-1]
    return entropy(p, cfg, categorical) / max(n, 1)


# ---------------------------------------------------------------------------
# objectives


def qqa_energy(p, model: EnergyModel, gamma: float, cfg: EntropyConfig = EntropyConfig()):
    """Per-run annealed objective ``relaxed_energy + gamma * entropy``."""
    return model.relaxed_energy(p) + gamma * entropy(p, cfg, model.categorical)


def qqa_grad(p, model: EnergyModel, gamma: float, cfg: EntropyConfig = EntropyConfig()):
    g = model.relaxed_grad(p)
    if gamma != 0.0:
        g += entropy_grad(p, cfg, model.categorical, gamma)
    return g


def _column_std(P):
    flat = P.reshape(P.shape[0], -1)
    centered = flat - flat.mean(axis=0)
    sq = np.einsum("si,si->i", centered, centered)
    return centered, np.sqrt(sq / flat.shape[0])


def comm_term(P, cfg: CommConfig):
    """Signed diversity contribution ``-S * strength * sum_i std_s P[s, i]`` (<= 0).

    Trailing axes are flattened, so categorical ensembles are treated per
    (node, category) coordinate. Population standard deviation.
    """
    P = np.asarray(P, dtype=np.float64)
    S = P.shape[0]
    if S < 2 or cfg.comm_strength == 0.0:
        return 0.0
    _, std = _column_std(P)
    return -S * cfg.comm_strength * float(std.sum())


def comm_active(P, cfg: CommConfig) -> bool:
    return P.shape[0] >= 2 and cfg.comm_strength != 0.0


def comm_grad(P, cfg: CommConfig):
    P = np.asarray(P, dtype=np.float64)
    if not comm_active(P, cfg):
        return np.zeros_like(P)
    centered, std = _column_std(P)
    centered *= -cfg.comm_strength / np.maximum(std, cfg.epsilon_std)
    return centered.reshape(P.shape)


def ensemble_energy(P, model, gamma, entropy_cfg=EntropyConfig(), comm_cfg=CommConfig()):
    """Total ensemble objective: sum of per-run objectives plus the diversity term."""
    return float(np.sum(qqa_energy(P, model, gamma, entropy_cfg))) + comm_term(P, comm_cfg)


def ensemble_grad(P, model, gamma, entropy_cfg=EntropyConfig(), comm_cfg=CommConfig()):
    g = qqa_grad(P, model, gamma, entropy_cfg)
    if comm_active(P, comm_cfg):
        g += comm_grad(P, comm_cfg)
    return g
