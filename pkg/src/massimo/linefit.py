"""Queue-line regression: linear, polynomial, and ridge fits on hip midpoints,
plus residual statistics, the queue direction vector, and top-view projection.

Fits solve the normal equations with a Cholesky factorization. The x values
are mapped to [-1, 1] internally so pixel-scale powers stay well conditioned;
reported coefficients are always in raw image coordinates. The ridge penalty
applies to the raw coefficients beta_1..beta_n (intercept unpenalized).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DegenerateGeometryError, FitError, InsufficientDataError
from .ingest import QueuePoint

MODEL_KINDS = ("linear", "polynomial", "ridge")

# Relative x-spread below this is treated as a vertical line.
_SPREAD_EPS = 1e-9


@dataclass(frozen=True)
class ModelSpec:
    """Which regression to run. linear pins degree=1, lambda=0; polynomial
    defaults to degree 2; ridge defaults to degree 1 with lambda 1.0."""

    kind: str = "linear"
    degree: int | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        degree = self.degree
        lam = self.lam
        if degree is None:
            degree = 2 if self.kind == "polynomial" else 1
        if lam is None:
            lam = 1.0 if self.kind == "ridge" else 0.0
        if not isinstance(degree, int) or degree < 1:
            raise ValueError(f"degree must be an integer >= 1, got {degree!r}")
        if lam < 0:
            raise ValueError(f"lambda must be >= 0, got {lam}")
        if self.kind == "linear" and (degree != 1 or lam != 0.0):
            raise ValueError("linear model requires degree=1 and lambda=0")
        if self.kind == "polynomial" and lam != 0.0:
            raise ValueError("polynomial model requires lambda=0")
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "lam", float(lam))


@dataclass(frozen=True)
class FittedLine:
    """Polynomial model y = beta_0 + beta_1 x + ... + beta_n x^n."""

    spec: ModelSpec
    coefficients: tuple[float, ...]
    n_points: int

    def __post_init__(self):
        if len(self.coefficients) != self.spec.degree + 1:
            raise ValueError("coefficient count must be degree + 1")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise ValueError("coefficients must be finite")


@dataclass(frozen=True)
class ResidualStats:
    """Residual summary backing the confidence band."""

    sse: float
    se: float
    df: int
    x_mean: float
    sxx: float


@dataclass(frozen=True)
class DirectionVector:
    """Queue direction from the first to the last person."""

    dx: float
    dy: float

    def __post_init__(self):
        if self.dx == 0.0 and self.dy == 0.0:
            raise ValueError("direction vector must have positive magnitude")

    @property
    def magnitude(self) -> float:
        return math.hypot(self.dx, self.dy)


def _scaled_basis_map(center: float, half: float, degree: int) -> np.ndarray:
    """Matrix M with beta = M @ alpha, converting coefficients of powers of
    u = (x - center)/half into coefficients of powers of x."""
    m = np.zeros((degree + 1, degree + 1))
    for j in range(degree + 1):
        scale = half ** (-j)
        for k in range(j + 1):
            m[k, j] = math.comb(j, k) * ((-center) ** (j - k)) * scale
    return m


def fit_line(points: list[QueuePoint], spec: ModelSpec) -> FittedLine:
    """Least-squares fit of y on x (plus lambda * sum(beta_j^2), j >= 1, for ridge)."""
    n = len(points)
    if n < spec.degree + 1:
        raise FitError(f"need at least {spec.degree + 1} points for degree {spec.degree}, got {n}")
    xs = np.array([p.x for p in points], dtype=float)
    ys = np.array([p.y for p in points], dtype=float)

    x_min, x_max = float(xs.min()), float(xs.max())
    spread = x_max - x_min
    if spread <= _SPREAD_EPS * max(1.0, abs(x_min), abs(x_max)):
        raise DegenerateGeometryError(
            "all x values are (nearly) identical; swap axes and retry the fit"
        )

    center = (x_min + x_max) / 2.0
    half = spread / 2.0
    u = (xs - center) / half
    design = np.vander(u, spec.degree + 1, increasing=True)
    gram = design.T @ design
    rhs = design.T @ ys

    basis = _scaled_basis_map(center, half, spec.degree)
    if spec.lam > 0.0:
        slope_rows = basis[1:, :]  # raw beta_1..beta_n as functions of alpha
        gram = gram + spec.lam * (slope_rows.T @ slope_rows)

    try:
        alpha = cho_solve(cho_factor(gram), rhs)
    except LinAlgError as exc:
        raise FitError("design matrix is singular: too few distinct x values for this degree") from exc

    beta = basis @ alpha
    return FittedLine(spec=spec, coefficients=tuple(float(b) for b in beta), n_points=n)


def predict(line: FittedLine, x: float) -> float:
    """Horner evaluation of the fitted polynomial at x."""
    acc = 0.0
    for c in reversed(line.coefficients):
        acc = acc * x + c
    return acc


def predict_many(line: FittedLine, xs: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(xs, dtype=float)
    for c in reversed(line.coefficients):
        acc = acc * xs + c
    return acc


def residual_stats(line: FittedLine, points: list[QueuePoint]) -> ResidualStats:
    """SSE, standard error of the estimate sqrt(SSE/(n-2)), df = n-2, and the
    x moments the prediction-mode band needs."""
    n = len(points)
    if n < 3:
        raise InsufficientDataError(f"residual statistics need at least 3 points, got {n}")
    xs = np.array([p.x for p in points], dtype=float)
    ys = np.array([p.y for p in points], dtype=float)
    resid = ys - predict_many(line, xs)
    sse = float(resid @ resid)
    df = n - 2
    x_mean = float(xs.mean())
    sxx = float(((xs - x_mean) ** 2).sum())
    return ResidualStats(sse=sse, se=math.sqrt(sse / df), df=df, x_mean=x_mean, sxx=sxx)


def direction_vector(points: list[QueuePoint]) -> DirectionVector:
    """Vector from the first to the last person of the ordered queue."""
    if len(points) < 2:
        raise ValueError("direction vector needs at least 2 points")
    first, last = points[0], points[-1]
    dx, dy = last.x - first.x, last.y - first.y
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometryError("queue endpoints coincide; direction undefined")
    return DirectionVector(dx, dy)


def top_view(points: list[QueuePoint], line: FittedLine) -> list[tuple[float, float]]:
    """Project points to (along-axis, signed perpendicular offset) coordinates.

    The axis is the fitted line for degree 1, else the chord between the first
    and last predictions. Positive offset means below the line (image y grows
    downward); points on the line project to offset 0.
    """
    if line.spec.degree == 1:
        origin = (0.0, line.coefficients[0])
        direction = (1.0, line.coefficients[1])
    else:
        x_f, x_l = points[0].x, points[-1].x
        origin = (x_f, predict(line, x_f))
        direction = (x_l - x_f, predict(line, x_l) - predict(line, x_f))
    norm = math.hypot(*direction)
    if norm == 0.0:
        raise DegenerateGeometryError("top-view axis is degenerate")
    ux, uy = direction[0] / norm, direction[1] / norm
    if ux < 0 or (ux == 0 and uy < 0):
        ux, uy = -ux, -uy
    rx = np.array([p.x for p in points], dtype=float) - origin[0]
    ry = np.array([p.y for p in points], dtype=float) - origin[1]
    along = rx * ux + ry * uy
    offset = rx * -uy + ry * ux
    return list(zip(along.tolist(), offset.tolist()))
