"""Group-sparsity penalty on hidden activation probabilities and the
two-step regularized training loop.

The penalty is the sum over groups of the Euclidean norm of the group's
activation probabilities (an l1,2 mixed norm). Overlapping groups are
handled by expanding the probabilities onto the augmented axis where the
groups are disjoint; gradient contributions of a unit shared by several
groups are summed over its copies.

Each training step is two sequential updates: a plain CD step with
momentum, then a descent step on the penalty term applied to the weights
and hidden biases only (scaled by lr * lambda). Visible biases are never
regularized.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import Rng
from .data import shuffle_split
from .groups import GroupPartition, accumulate, expand
from .rbm import (
    Rbm,
    Velocity,
    apply_update,
    cd_step,
    prob_h_given_x,
    prob_x_given_h,
)


@dataclass
class PenaltyConfig:
    """Penalty strength, group layout, and the norm-denominator floor.

    epsilon floors the per-group norm in the gradient so the all-zero group
    (where the l2 norm is not differentiable) gets a well-defined, vanishing
    subgradient.
    """

    lam: float
    partition: GroupPartition
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if not 0.0 < self.epsilon <= 1e-6:
            raise ValueError(f"epsilon must be in (0, 1e-6], got {self.epsilon}")


@dataclass
class TrainConfig:
    """Hyperparameters for one RBM training run."""

    lr: float = 0.1
    momentum: float = 0.5
    final_momentum: float = 0.9
    momentum_switch_epoch: int = 5
    batch_size: int = 100
    epochs: int = 30
    cd_k: int = 1
    seed: int = 0


@dataclass
class EpochStats:
    """One training-log row; wall_seconds is the only clock-derived field."""

    epoch: int
    recon_error: float
    mean_hidden_activation: float
    mixed_norm_value: float
    wall_seconds: float


def mixed_norm(h_probs, cfg: PenaltyConfig):
    """Sum over groups of the l2 norm of the group's probabilities.

    For a single vector returns a float; for a batch (rows are samples)
    returns the per-sample values.
    """
    h_probs = np.asarray(h_probs, dtype=float)
    if h_probs.size and (h_probs.min() < 0.0 or h_probs.max() > 1.0):
        raise ValueError("activation probabilities must lie in [0, 1]")
    part = cfg.partition
    pe = expand(h_probs, part)
    grouped = pe.reshape(pe.shape[:-1] + (part.num_groups, part.group_size))
    norms = np.sqrt((grouped * grouped).sum(axis=-1))
    total = norms.sum(axis=-1)
    return float(total) if h_probs.ndim == 1 else total


def penalty_grad(m: Rbm, x, cfg: PenaltyConfig):
    """Gradient of the penalty w.r.t. the weights and hidden biases.

    For each augmented copy of unit j in group G the scalar contribution is
    p_j^2 (1 - p_j) / max(||p_G||_2, epsilon); copies are summed back onto
    the original units, the weight column j picks up that sum times x, and
    the hidden bias picks up the sum itself. Given a batch, returns the
    batch average. Returns (gw, ga).
    """
    x = np.asarray(x, dtype=float)
    part = cfg.partition
    p = prob_h_given_x(m, x)
    pe = expand(p, part)
    grouped = pe.reshape(pe.shape[:-1] + (part.num_groups, part.group_size))
    norms = np.sqrt((grouped * grouped).sum(axis=-1, keepdims=True))
    s = grouped * grouped * (1.0 - grouped) / np.maximum(norms, cfg.epsilon)
    s_orig = accumulate(s.reshape(pe.shape), part)
    if x.ndim == 1:
        return np.outer(x, s_orig), s_orig
    n = x.shape[0]
    return x.T @ s_orig / n, s_orig.mean(axis=0)


def regularized_update(
    m: Rbm,
    batch,
    cfg: PenaltyConfig,
    lr: float,
    momentum: float,
    velocity: Velocity,
    rng: Rng,
    k: int = 1,
) -> Rbm:
    """One two-step training update, in place.

    Step 1 is the plain CD update with momentum. Step 2 subtracts
    lr * lambda times the batch-averaged penalty gradient from the weights
    and hidden biases, using activation probabilities recomputed from the
    post-step-1 parameters. With lambda = 0 the second step is skipped, so
    the call is indistinguishable from vanilla CD training, including RNG
    consumption.
    """
    stats = cd_step(m, batch, k, rng)
    apply_update(m, stats, lr, momentum, velocity)
    if cfg.lam > 0.0:
        gw, ga = penalty_grad(m, batch, cfg)
        m.w -= lr * cfg.lam * gw
        m.a_hid -= lr * cfg.lam * ga
    return m


def _epoch_metrics(m: Rbm, images: np.ndarray, cfg: PenaltyConfig, chunk: int = 10000):
    """Deterministic full-pass metrics with the current parameters.

    Reconstruction error is the mean squared error of the one-step
    mean-field reconstruction (probabilities everywhere, no sampling).
    """
    sq_err = 0.0
    act_sum = 0.0
    mn_sum = 0.0
    n = images.shape[0]
    for lo in range(0, n, chunk):
        xb = images[lo : lo + chunk]
        p = prob_h_given_x(m, xb)
        xhat = prob_x_given_h(m, p)
        sq_err += float(((xb - xhat) ** 2).sum())
        act_sum += float(p.sum())
        mn_sum += float(np.sum(mixed_norm(p, cfg)))
    return (
        sq_err / (n * m.n_visible),
        act_sum / (n * m.n_hidden),
        mn_sum / n,
    )


def train_mnrbm(data, layer_size: int, cfg: PenaltyConfig, params: TrainConfig, rng: Rng):
    """Train one RBM with the group-sparsity penalty (lambda may be 0).

    `data` is either a Dataset or a plain (samples x visibles) array in
    [0, 1]. Runs `params.epochs` epochs of shuffled mini-batches of
    `regularized_update` and returns (model, log), where the log holds one
    EpochStats per epoch, computed on a deterministic full pass over the
    training data after the epoch.
    """
    images = np.asarray(getattr(data, "images", data), dtype=float)
    if images.ndim != 2 or images.shape[0] == 0:
        raise ValueError(f"training data must be a non-empty 2-D array, got {images.shape}")
    if cfg.partition.j_original != layer_size:
        raise ValueError(
            f"partition is over {cfg.partition.j_original} units, layer has {layer_size}"
        )
    m = Rbm.init_random(images.shape[1], layer_size, rng)
    velocity = Velocity.zeros(m)
    log: list[EpochStats] = []
    for epoch in range(params.epochs):
        t0 = time.perf_counter()
        mom = (
            params.momentum
            if epoch < params.momentum_switch_epoch
            else params.final_momentum
        )
        for idx in shuffle_split(images.shape[0], params.batch_size, rng):
            regularized_update(
                m, images[idx], cfg, params.lr, mom, velocity, rng, k=params.cd_k
            )
        recon, mean_act, mn_value = _epoch_metrics(m, images, cfg)
        log.append(
            EpochStats(
                epoch=epoch,
                recon_error=recon,
                mean_hidden_activation=mean_act,
                mixed_norm_value=mn_value,
                wall_seconds=time.perf_counter() - t0,
            )
        )
    return m, log


TRAINING_LOG_COLUMNS = (
    "epoch",
    "recon_error",
    "mean_hidden_activation",
    "mixed_norm_value",
    "wall_seconds",
)


def write_training_log(path, log: list[EpochStats]) -> None:
    """Emit the per-epoch log as CSV."""
    lines = [",".join(TRAINING_LOG_COLUMNS)]
    for row in log:
        lines.append(
            f"{row.epoch},{row.recon_error!r},{row.mean_hidden_activation!r},"
            f"{row.mixed_norm_value!r},{row.wall_seconds!r}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
