"""Dense array helpers, the logistic nonlinearity, and seeded sampling.

Everything operates on float64 numpy arrays. The checked operations reject
shape mismatches with ValueError instead of silently broadcasting.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericError

SIGMOID_CLIP = 500.0

# Largest double strictly below 1; sigmoid output is capped here so that
# log(1 - p) and p * (1 - p) never degenerate.
_ONE_BELOW_1 = float(np.nextafter(1.0, 0.0))


def sigmoid(z):
    """Logistic function 1 / (1 + exp(-z)), strictly inside (0, 1).

    Inputs are clamped to [-500, 500] before exponentiation, which keeps the
    result finite without overflow; the top end is capped just below 1.0 at
    64-bit precision. Accepts scalars or arrays.
    """
    z = np.clip(z, -SIGMOID_CLIP, SIGMOID_CLIP)
    out = 1.0 / (1.0 + np.exp(-z))
    return np.minimum(out, _ONE_BELOW_1)


class Rng:
    """Seeded random stream with a hard reproducibility guarantee.

    The stream is fully specified by the seed (PCG64), so equal seeds give
    bit-identical draw sequences across runs. A stream is single-owner:
    never share one across threads; derive independent child streams with
    `spawn` for parallel work.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, shape=None):
        """Uniform draw(s) in [0, 1); consumes one draw per element."""
        if shape is None:
            return self._gen.random()
        return self._gen.random(shape)

    def normal(self, shape=None, std: float = 1.0):
        """Zero-mean Gaussian draw(s) with the given standard deviation."""
        return self._gen.normal(0.0, std, shape)

    def integers(self, low: int, high: int, shape=None):
        """Integer draw(s) in [low, high)."""
        return self._gen.integers(low, high, size=shape)

    def permutation(self, n: int):
        """Random permutation of range(n)."""
        return self._gen.permutation(n)

    def spawn(self, index: int) -> "Rng":
        """Child stream determined only by (seed, index).

        Children are independent of each other and of any draws already
        consumed from this stream, so per-batch or per-layer work stays
        reproducible regardless of consumption order elsewhere.
        """
        child = Rng.__new__(Rng)
        child.seed = self.seed
        child._gen = np.random.Generator(np.random.PCG64(self.seed).jumped(index + 1))
        return child

    def __repr__(self):
        return f"Rng(seed={self.seed})"


def sample_bernoulli(p, rng: Rng):
    """Draw 0/1 with success probability p; one RNG draw per element.

    Accepts a scalar probability (returns int) or an array (returns a float
    array of 0.0/1.0). Probabilities outside [0, 1] are a contract
    violation and raise ValueError.
    """
    arr = np.asarray(p, dtype=float)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(
            f"bernoulli probability outside [0, 1]: min={arr.min()}, max={arr.max()}"
        )
    if arr.ndim == 0:
        return int(rng.uniform() < float(arr))
    return (rng.uniform(arr.shape) < arr).astype(float)


def _as_2d(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def matmul(a, b) -> np.ndarray:
    """Matrix product with an explicit inner-dimension check."""
    a = _as_2d(a, "a")
    b = _as_2d(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def add(a, b) -> np.ndarray:
    """Elementwise sum; shapes must match exactly (no broadcasting)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"add shape mismatch: {a.shape} vs {b.shape}")
    return a + b


def scale(a, c: float) -> np.ndarray:
    """Multiply every entry by a finite scalar."""
    if not np.isfinite(c):
        raise ValueError(f"scale factor must be finite, got {c}")
    return np.asarray(a, dtype=float) * float(c)


def transpose(a) -> np.ndarray:
    return _as_2d(a, "a").T.copy()


def rowsum(a) -> np.ndarray:
    """Vector of per-row sums of a 2-D array."""
    return _as_2d(a, "a").sum(axis=1)


def require_finite(name: str, arr) -> None:
    """Raise NumericError if any entry is NaN or infinite."""
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values detected in {name}")
