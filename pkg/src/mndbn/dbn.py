"""Deep belief network built from stacked binary-latent feature layers.

Layers are pretrained greedily, bottom up, each on the mean-field hidden
probabilities of the layer below. Classification attaches a softmax head
on top of the deepest feature layer; supervised fine-tuning runs nonlinear
conjugate gradients (Polak-Ribiere with restarts) over mini-batches, with a
plain gradient-descent fallback. Visible biases take no part in the
feedforward pass, so fine-tuning leaves them untouched.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import Rng, require_finite
from .data import shuffle_split
from .errors import ConfigError
from .mixed_norm import EpochStats, train_mnrbm
from .rbm import prob_h_given_x


@dataclass
class SoftmaxLayer:
    """Linear map to class logits; columns index classes."""

    w_out: np.ndarray
    b_out: np.ndarray

    def __post_init__(self):
        self.w_out = np.asarray(self.w_out, dtype=float)
        self.b_out = np.asarray(self.b_out, dtype=float)
        if self.w_out.ndim != 2:
            raise ValueError(f"w_out must be 2-D, got shape {self.w_out.shape}")
        if self.b_out.shape != (self.w_out.shape[1],):
            raise ValueError(
                f"b_out shape {self.b_out.shape} does not match {self.w_out.shape[1]} classes"
            )

    @property
    def n_classes(self) -> int:
        return self.w_out.shape[1]


@dataclass
class Dbn:
    """Feature layer stack plus an optional softmax head."""

    layers: list
    head: SoftmaxLayer | None = None

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a network needs at least one feature layer")
        for lower, upper in zip(self.layers, self.layers[1:]):
            if upper.n_visible != lower.n_hidden:
                raise ValueError(
                    f"layer sizes do not chain: {lower.n_hidden} hidden feeds "
                    f"{upper.n_visible} visible"
                )
        if self.head is not None and self.head.w_out.shape[0] != self.layers[-1].n_hidden:
            raise ValueError("head input size does not match top layer")

    @property
    def n_visible(self) -> int:
        return self.layers[0].n_visible

    @property
    def n_features(self) -> int:
        return self.layers[-1].n_hidden


def forward(d: Dbn, x) -> np.ndarray:
    """Mean-field pass: compose hidden probabilities layer by layer.

    No sampling is involved, so the output is a deterministic function of
    the input. Accepts a single flattened image or a batch.
    """
    out = np.asarray(x, dtype=float)
    for layer in d.layers:
        out = prob_h_given_x(layer, out)
    return out


def _forward_stack(d: Dbn, x: np.ndarray) -> list[np.ndarray]:
    """All layer activations, input first, for use by backprop."""
    acts = [x]
    for layer in d.layers:
        acts.append(prob_h_given_x(layer, acts[-1]))
    return acts


def attach_head(d: Dbn, n_classes: int = 10) -> Dbn:
    """Put a zero-initialized softmax head on the top feature layer."""
    if n_classes < 2:
        raise ValueError(f"need at least 2 classes, got {n_classes}")
    d.head = SoftmaxLayer(np.zeros((d.n_features, n_classes)), np.zeros(n_classes))
    return d


def _logits(d: Dbn, x) -> np.ndarray:
    if d.head is None:
        raise ValueError("model has no classification head; call attach_head first")
    feats = forward(d, x)
    return feats @ d.head.w_out + d.head.b_out


def softmax_predict(d: Dbn, x) -> np.ndarray:
    """Class probabilities for a single image or a batch (rows sum to 1)."""
    logits = _logits(d, x)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def predict_labels(d: Dbn, x) -> np.ndarray:
    return np.argmax(_logits(d, x), axis=-1)


def pretrain_greedy(data, layer_sizes, cfgs, params, rng: Rng):
    """Train the layer stack bottom up.

    cfgs is one PenaltyConfig per layer (or a single config reused when the
    partition fits every layer); params likewise a TrainConfig or one per
    layer. Each layer gets its own child generator via rng.spawn(index), so
    adding layers never perturbs the draws of the ones below. Returns the
    network and the per-layer training logs.
    """
    layer_sizes = list(layer_sizes)
    if not layer_sizes:
        raise ConfigError("layer_sizes must name at least one layer")
    cfg_list = list(cfgs) if isinstance(cfgs, (list, tuple)) else [cfgs] * len(layer_sizes)
    par_list = list(params) if isinstance(params, (list, tuple)) else [params] * len(layer_sizes)
    if len(cfg_list) != len(layer_sizes) or len(par_list) != len(layer_sizes):
        raise ConfigError(
            f"got {len(cfg_list)} penalty configs and {len(par_list)} training configs "
            f"for {len(layer_sizes)} layers"
        )
    current = np.asarray(getattr(data, "images", data), dtype=float)
    layers = []
    logs: list[list[EpochStats]] = []
    for idx, size in enumerate(layer_sizes):
        m, log = train_mnrbm(current, size, cfg_list[idx], par_list[idx], rng.spawn(idx))
        layers.append(m)
        logs.append(log)
        current = prob_h_given_x(m, current)
    return Dbn(layers), logs


@dataclass
class FineTuneConfig:
    """Knobs for supervised fine-tuning.

    method "cg" runs cg_iters conjugate-gradient iterations per mini-batch
    with Armijo backtracking; "gd" takes the same number of fixed-step
    gradient moves instead. Search directions reset to steepest descent
    once per full cycle of parameter count, the usual restart rule.
    """

    batch_size: int = 1000
    cg_iters: int = 3
    method: str = "cg"
    lr: float = 0.1
    c1: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 30

    def __post_init__(self):
        if self.method not in ("cg", "gd"):
            raise ConfigError(f"method must be 'cg' or 'gd', got {self.method!r}")
        if self.batch_size < 1 or self.cg_iters < 1:
            raise ConfigError("batch_size and cg_iters must be >= 1")
        if not 0.0 < self.backtrack < 1.0:
            raise ConfigError(f"backtrack factor must be in (0, 1), got {self.backtrack}")
        if self.lr <= 0.0 or self.c1 <= 0.0:
            raise ConfigError("lr and c1 must be positive")


@dataclass
class FineTuneEpoch:
    epoch: int
    loss: float
    train_accuracy: float
    test_accuracy: float
    wall_seconds: float


FINETUNE_LOG_COLUMNS = ("epoch", "loss", "train_accuracy", "test_accuracy", "wall_seconds")


def _pack(d: Dbn, head_only: bool) -> np.ndarray:
    """Flatten the feedforward parameters into one vector.

    Layer weights and hidden biases, then head weights and biases; visible
    biases are omitted because the feedforward pass never reads them.
    """
    parts = []
    if not head_only:
        for layer in d.layers:
            parts.append(layer.w.ravel())
            parts.append(layer.a_hid)
    parts.append(d.head.w_out.ravel())
    parts.append(d.head.b_out)
    return np.concatenate(parts)


def _unpack(d: Dbn, vec: np.ndarray, head_only: bool) -> None:
    pos = 0

    def take(shape):
        nonlocal pos
        size = int(np.prod(shape))
        out = vec[pos : pos + size].reshape(shape)
        pos += size
        return out

    if not head_only:
        for layer in d.layers:
            layer.w = take(layer.w.shape).copy()
            layer.a_hid = take(layer.a_hid.shape).copy()
    d.head.w_out = take(d.head.w_out.shape).copy()
    d.head.b_out = take(d.head.b_out.shape).copy()
    if pos != vec.size:
        raise ValueError(f"parameter vector has {vec.size} entries, model needs {pos}")


def _onehot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], n_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _loss_only(d: Dbn, x: np.ndarray, y: np.ndarray) -> float:
    logits = _logits(d, x)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(log_z - shifted[np.arange(y.shape[0]), y]))


def loss_and_grad(d: Dbn, x, y, head_only: bool = False):
    """Mean cross-entropy of the softmax output and its gradient.

    The gradient comes back packed in the same layout as _pack. Backprop
    multiplies by p(1-p) at each sigmoid layer.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    n = x.shape[0]
    acts = _forward_stack(d, x)
    logits = acts[-1] @ d.head.w_out + d.head.b_out
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    loss = float(np.mean(np.log(e.sum(axis=1)) - shifted[np.arange(n), y]))
    d_logits = (probs - _onehot(y, d.head.n_classes)) / n
    g_w_out = acts[-1].T @ d_logits
    g_b_out = d_logits.sum(axis=0)
    if head_only:
        return loss, np.concatenate([g_w_out.ravel(), g_b_out])
    parts = []
    d_act = d_logits @ d.head.w_out.T
    for idx in range(len(d.layers) - 1, -1, -1):
        a = acts[idx + 1]
        d_pre = d_act * a * (1.0 - a)
        parts.append((acts[idx].T @ d_pre, d_pre.sum(axis=0)))
        d_act = d_pre @ d.layers[idx].w.T
    grads = []
    for g_w, g_a in reversed(parts):
        grads.append(g_w.ravel())
        grads.append(g_a)
    grads.append(g_w_out.ravel())
    grads.append(g_b_out)
    return loss, np.concatenate(grads)


def _armijo(d, theta, direction, loss0, slope, x, y, head_only, cfg, alpha0):
    """Backtracking line search satisfying the Armijo condition.

    Starts from the adaptive trial step alpha0 and shrinks geometrically.
    Returns the accepted step and its loss, or (None, loss0) when
    max_backtracks shrinkings never reach sufficient decrease; the model is
    left holding theta in that case.
    """
    alpha = alpha0
    for _ in range(cfg.max_backtracks):
        _unpack(d, theta + alpha * direction, head_only)
        trial = _loss_only(d, x, y)
        if np.isfinite(trial) and trial <= loss0 + cfg.c1 * alpha * slope:
            return alpha, trial
        alpha *= cfg.backtrack
    _unpack(d, theta, head_only)
    return None, loss0


def fine_tune(
    d: Dbn,
    dataset,
    epochs: int,
    cfg: FineTuneConfig,
    rng: Rng,
    head_only: bool = False,
    eval_dataset=None,
):
    """Supervised fine-tuning of the feedforward parameters.

    Runs cfg.cg_iters conjugate-gradient (or plain gradient) iterations on
    each mini-batch, a fresh steepest-descent direction per batch, and
    logs one row per epoch (epoch loss and accuracies are measured on the
    full splits after the epoch's updates). Zero epochs returns the model
    untouched with an empty log.
    """
    if d.head is None:
        raise ValueError("model has no classification head; call attach_head first")
    if epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {epochs}")
    log: list[FineTuneEpoch] = []
    if epochs == 0:
        return d, log
    images = dataset.images
    labels = dataset.labels
    if images.shape[0] == 0:
        raise ValueError("cannot fine-tune on an empty dataset")
    theta = _pack(d, head_only)
    n_params = theta.size
    since_restart = 0
    alpha_prev = 1.0
    for epoch in range(1, epochs + 1):
        t0 = time.perf_counter()
        for idx in shuffle_split(images.shape[0], cfg.batch_size, rng):
            x, y = images[idx], labels[idx]
            loss, g = loss_and_grad(d, x, y, head_only)
            if cfg.method == "gd":
                for _ in range(cfg.cg_iters):
                    theta = theta - cfg.lr * g
                    _unpack(d, theta, head_only)
                    loss, g = loss_and_grad(d, x, y, head_only)
                continue
            direction = -g
            for _ in range(cfg.cg_iters):
                gg = float(g @ g)
                if gg == 0.0:
                    break
                slope = float(g @ direction)
                if slope >= 0.0:
                    direction = -g
                    slope = -gg
                alpha, loss = _armijo(
                    d, theta, direction, loss, slope, x, y, head_only, cfg, 2.0 * alpha_prev
                )
                if alpha is None:
                    break
                alpha_prev = alpha
                theta = theta + alpha * direction
                _unpack(d, theta, head_only)
                new_loss, new_g = loss_and_grad(d, x, y, head_only)
                since_restart += 1
                if since_restart >= n_params:
                    beta = 0.0
                    since_restart = 0
                else:
                    beta = max(0.0, float(new_g @ (new_g - g)) / gg)
                direction = -new_g + beta * direction
                loss, g = new_loss, new_g
        require_finite("fine-tune parameters", theta)
        train_acc, _ = evaluate(d, dataset)
        test_acc = float("nan")
        if eval_dataset is not None:
            test_acc, _ = evaluate(d, eval_dataset)
        epoch_loss = _mean_loss(d, dataset)
        log.append(
            FineTuneEpoch(epoch, epoch_loss, train_acc, test_acc, time.perf_counter() - t0)
        )
    return d, log


def _mean_loss(d: Dbn, dataset, chunk: int = 10000) -> float:
    total = 0.0
    n = dataset.images.shape[0]
    for lo in range(0, n, chunk):
        x = dataset.images[lo : lo + chunk]
        y = dataset.labels[lo : lo + chunk]
        total += _loss_only(d, x, y) * x.shape[0]
    return total / n


def evaluate(d: Dbn, dataset, chunk: int = 10000):
    """Accuracy and the confusion matrix (rows true class, cols predicted)."""
    n = dataset.images.shape[0]
    if n == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    n_classes = d.head.n_classes if d.head is not None else 0
    if n_classes == 0:
        raise ValueError("model has no classification head; call attach_head first")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    correct = 0
    for lo in range(0, n, chunk):
        pred = predict_labels(d, dataset.images[lo : lo + chunk])
        true = dataset.labels[lo : lo + chunk]
        correct += int((pred == true).sum())
        np.add.at(confusion, (true, pred), 1)
    return correct / n, confusion


def write_finetune_log(path, log: list[FineTuneEpoch]) -> None:
    """One CSV row per epoch, matching FINETUNE_LOG_COLUMNS."""
    lines = [",".join(FINETUNE_LOG_COLUMNS)]
    for row in log:
        lines.append(
            ",".join(
                [
                    str(row.epoch),
                    repr(row.loss),
                    repr(row.train_accuracy),
                    repr(row.test_accuracy),
                    repr(row.wall_seconds),
                ]
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
