"""95% confidence band around the fitted line and the people outside it.

The band is y_hat +/- t_crit * SE. In the default ``constant`` mode SE is the
scalar standard error of the estimate; ``prediction`` mode widens it with the
leverage term sqrt(1 + 1/n + (x - x_mean)^2 / Sxx).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import betainc

from .ingest import QueuePoint
from .linefit import FittedLine, ResidualStats, predict_many

BAND_MODES = ("constant", "prediction")

_T_ABS_TOL = 1e-9  # bisection width; tighter than the 1e-8 contract


@dataclass(frozen=True)
class BandSpec:
    level: float = 0.95
    mode: str = "constant"

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must be in (0, 1), got {self.level}")
        if self.mode not in BAND_MODES:
            raise ValueError(f"unknown band mode {self.mode!r}")


class CiFlag(NamedTuple):
    person_id: int
    predicted: float
    lower: float
    upper: float
    is_outlier: bool


@dataclass(frozen=True)
class CiFlags:
    level: float
    mode: str
    flags: tuple[CiFlag, ...]

    @property
    def outlier_ids(self) -> list[int]:
        return [f.person_id for f in self.flags if f.is_outlier]


def _t_cdf(t: float, df: int) -> float:
    """Student's t CDF via the regularized incomplete beta function."""
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * betainc(df / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def t_critical(df: int, level: float) -> float:
    """Two-sided critical value: the (1 + level)/2 quantile of Student's t.

    Inverts the CDF by bisection to well below 1e-8 absolute error.
    """
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    target = (1.0 + level) / 2.0
    lo, hi = 0.0, 1.0
    while _t_cdf(hi, df) < target:
        hi *= 2.0
        if hi > 1e12:  # level this close to 1 is outside any practical use
            raise ValueError(f"level {level} too close to 1 for df={df}")
    while hi - lo > _T_ABS_TOL:
        mid = 0.5 * (lo + hi)
        if _t_cdf(mid, df) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _se_at(stats: ResidualStats, xs: np.ndarray, mode: str) -> np.ndarray:
    if mode == "constant":
        return np.full_like(xs, stats.se, dtype=float)
    n = stats.df + 2
    leverage = 1.0 + 1.0 / n + (xs - stats.x_mean) ** 2 / stats.sxx
    return stats.se * np.sqrt(leverage)


def confidence_band(
    line: FittedLine, stats: ResidualStats, x: float, band: BandSpec
) -> tuple[float, float]:
    """Band (lower, upper) at a single x."""
    t = t_critical(stats.df, band.level)
    xs = np.array([x], dtype=float)
    y_hat = float(predict_many(line, xs)[0])
    half = t * float(_se_at(stats, xs, band.mode)[0])
    return y_hat - half, y_hat + half


def flag_ci_outliers(
    points: list[QueuePoint], line: FittedLine, stats: ResidualStats, band: BandSpec
) -> CiFlags:
    """Flag every person whose y falls strictly outside the band (boundary counts
    as inside, so a zero-residual fit flags nobody)."""
    t = t_critical(stats.df, band.level)
    xs = np.array([p.x for p in points], dtype=float)
    ys = np.array([p.y for p in points], dtype=float)
    y_hat = predict_many(line, xs)
    half = t * _se_at(stats, xs, band.mode)
    lower = y_hat - half
    upper = y_hat + half
    outside = (ys < lower) | (ys > upper)
    flags = tuple(
        CiFlag(p.person_id, float(y_hat[i]), float(lower[i]), float(upper[i]), bool(outside[i]))
        for i, p in enumerate(points)
    )
    return CiFlags(level=band.level, mode=band.mode, flags=flags)
