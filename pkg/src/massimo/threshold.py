"""Otsu thresholding of net force magnitudes.

Magnitudes are min-max scaled to [0, 255], binned by floor into a 256-bin
histogram, and split at the threshold t minimizing the intra-class variance
sigma_w^2(t) = w1 * var1 + w2 * var2. Scaled forces strictly above t are the
spring-model outliers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateDistributionError
from .springs import ForceField


@dataclass(frozen=True)
class OtsuResult:
    threshold: int
    class_probs: tuple[float, float]
    class_vars: tuple[float, float]
    intra_class_variance: float


class SpringFlag(NamedTuple):
    person_id: int
    scaled_force: float
    is_outlier: bool


@dataclass(frozen=True)
class SpringFlags:
    otsu_threshold: float
    flags: tuple[SpringFlag, ...]

    @property
    def outlier_ids(self) -> list[int]:
        return [f.person_id for f in self.flags if f.is_outlier]

    @property
    def scaled_forces(self) -> list[float]:
        return [f.scaled_force for f in self.flags]


def minmax_scale(values: list[float], warnings: list[str] | None = None) -> list[float]:
    """Map values affinely onto [0, 255]; an all-equal input maps to all zeros."""
    if len(values) == 0:
        raise ValueError("minmax_scale requires a non-empty input")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("minmax_scale requires finite values")
    lo, hi = min(values), max(values)
    if hi == lo:
        if warnings is not None:
            warnings.append("degenerate force distribution: all values equal")
        return [0.0 for _ in values]
    span = hi - lo
    return [(v - lo) / span * 255.0 for v in values]


def otsu_threshold(scaled: list[float]) -> OtsuResult:
    """Exhaustive 256-bin Otsu scan.

    Evaluates sigma_w^2(t) for every t in 0..254 where both classes
    {bins <= t} and {bins > t} are non-empty and returns the smallest
    minimizing t.
    """
    if len(scaled) < 2:
        raise DegenerateDistributionError("need at least 2 values to threshold")
    bins = np.floor(np.clip(np.asarray(scaled, dtype=float), 0.0, 255.0)).astype(np.int64)
    hist = np.bincount(bins, minlength=256).astype(float)
    n = hist.sum()

    levels = np.arange(256, dtype=float)
    p = hist / n
    w1 = np.cumsum(p)                      # w1[t] = P(bin <= t)
    m1 = np.cumsum(p * levels)             # first moment of the low class
    s1 = np.cumsum(p * levels * levels)    # second moment of the low class
    m_total, s_total = m1[-1], s1[-1]

    valid = (w1[:-1] > 0.0) & (w1[:-1] < 1.0)  # candidate t = 0..254
    if not valid.any():
        raise DegenerateDistributionError("all values fall in a single histogram bin")

    with np.errstate(divide="ignore", invalid="ignore"):
        w1c = w1[:-1]
        w2c = 1.0 - w1c
        mu1 = m1[:-1] / w1c
        mu2 = (m_total - m1[:-1]) / w2c
        var1 = s1[:-1] / w1c - mu1 ** 2
        var2 = (s_total - s1[:-1]) / w2c - mu2 ** 2
        sigma_w = w1c * var1 + w2c * var2
    sigma_w = np.where(valid, sigma_w, np.inf)

    t = int(np.argmin(sigma_w))  # argmin takes the first (smallest) minimizer
    return OtsuResult(
        threshold=t,
        class_probs=(float(w1c[t]), float(w2c[t])),
        class_vars=(float(var1[t]), float(var2[t])),
        intra_class_variance=float(sigma_w[t]),
    )


def flag_force_outliers(field: ForceField, warnings: list[str] | None = None) -> SpringFlags:
    """Scale net force magnitudes, run Otsu, and flag scaled forces strictly above
    the threshold. A degenerate (all-equal) distribution flags nobody."""
    if len(field.person_ids) < 2:
        raise ValueError("force-outlier flagging needs at least 2 people")
    scaled = minmax_scale(list(field.net_magnitude), warnings)
    try:
        threshold = float(otsu_threshold(scaled).threshold)
    except DegenerateDistributionError:
        # all scaled values are 0; any non-negative cut flags nobody
        threshold = 0.0
    flags = tuple(
        SpringFlag(pid, s, s > threshold)
        for pid, s in zip(field.person_ids, scaled)
    )
    return SpringFlags(otsu_threshold=threshold, flags=flags)
