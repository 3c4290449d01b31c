"""Monte Carlo estimates with standard errors.

Sums use :func:`math.fsum`, which is correctly rounded and therefore gives
the same answer for any ordering of the same values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["MCEstimate", "mean_se", "variance_terms", "combined_se"]


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean, its standard error and the number of trials behind it."""

    mean: float
    std_error: float
    trials: int

    def __post_init__(self):
        if self.std_error < 0 or not (self.std_error == self.std_error):
            raise ValueError("std_error must be a nonnegative number")
        if self.trials < 1:
            raise ValueError("trials must be positive")

    @classmethod
    def from_samples(cls, x) -> "MCEstimate":
        m, se = mean_se(x)
        return cls(m, se, int(np.size(x)))

    @classmethod
    def exact(cls, value: float, trials: int = 1) -> "MCEstimate":
        return cls(float(value), 0.0, trials)

    def scaled(self, c: float) -> "MCEstimate":
        return MCEstimate(self.mean * c, self.std_error * abs(c), self.trials)

    def as_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "trials": self.trials}


def mean_se(x) -> tuple[float, float]:
    """Mean and standard error of the mean of a 1-d sample."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    m = math.fsum(x) / n
    if n == 1:
        return m, 0.0
    d = x - m
    var = math.fsum(d * d) / (n - 1)
    return m, math.sqrt(var / n)


def variance_terms(x) -> np.ndarray:
    """Per-trial terms whose mean is the unbiased sample variance of ``x``.

    The mean of ``n/(n-1) (x_t - xbar)^2`` is the usual unbiased variance,
    and its standard error (computed by :func:`mean_se`) is the standard
    delta-method error of a variance estimate.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples")
    m = math.fsum(x) / n
    return (x - m) ** 2 * (n / (n - 1))


def combined_se(*ses: float) -> float:
    """Standard error of a difference of independent estimates."""
    return math.sqrt(math.fsum(s * s for s in ses))
