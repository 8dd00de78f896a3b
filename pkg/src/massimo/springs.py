"""Mass-spring chain over the ordered queue.

Adjacent people are joined by virtual springs. A link's deformation comes from
its angular deviation off the queue direction e_v: for inter-person distance d
and angle theta, delta_d = d * (1 - cos(theta)), giving a Hooke force
k * delta_d split into components along (+cos) and perpendicular (+sin) to the
line. Each link applies equal and opposite contributions to its two people;
the per-person net force magnitude is what the Otsu stage thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .ingest import QueuePoint
from .linefit import DirectionVector


@dataclass(frozen=True)
class SpringParams:
    k: float = 1.0  # spring constant, force per pixel of deformation

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"spring constant must be > 0, got {self.k}")


class LinkGeometry(NamedTuple):
    d: float
    theta: float
    delta_d: float


class SpringLink(NamedTuple):
    """Force on the link between person i and i+1 of the ordered queue."""

    i: int
    d: float
    theta: float
    delta_d: float
    f_parallel: float
    f_perp: float
    magnitude: float


@dataclass(frozen=True)
class ForceField:
    """Per-link forces plus accumulated per-person net vectors."""

    links: tuple[SpringLink, ...]
    person_ids: tuple[int, ...]
    net: tuple[tuple[float, float], ...]
    net_magnitude: tuple[float, ...]
    k: float
    direction: tuple[float, float] = field(default=(1.0, 0.0))


def link_geometry(
    p_i: QueuePoint,
    p_next: QueuePoint,
    e_v: DirectionVector,
    warnings: list[str] | None = None,
) -> LinkGeometry:
    """Distance, angle to e_v, and deformation for one adjacent pair.

    Coincident people yield a zero link (plus a warning) rather than an error:
    detector jitter can merge two people and must not abort the pipeline.
    """
    dx, dy = p_next.x - p_i.x, p_next.y - p_i.y
    d = math.hypot(dx, dy)
    if d == 0.0:
        if warnings is not None:
            warnings.append(
                f"persons {p_i.person_id} and {p_next.person_id} coincide; zero-length link"
            )
        return LinkGeometry(0.0, 0.0, 0.0)
    # normalize both vectors first so products cannot underflow or overflow
    ev_mag = e_v.magnitude
    ux, uy = e_v.dx / ev_mag, e_v.dy / ev_mag
    ndx, ndy = dx / d, dy / d
    dot = ndx * ux + ndy * uy
    cross = ndx * uy - ndy * ux
    if cross == 0.0:  # exactly parallel links must carry exactly zero deformation
        cos_theta = 1.0 if dot > 0.0 else -1.0
    else:
        cos_theta = min(1.0, max(-1.0, dot))
    theta = math.acos(cos_theta)
    return LinkGeometry(d=d, theta=theta, delta_d=d * (1.0 - cos_theta))


def link_force(geometry: LinkGeometry, params: SpringParams, index: int = 0) -> SpringLink:
    """Hooke force for one link: magnitude k * delta_d, components via cos/sin."""
    magnitude = params.k * geometry.delta_d
    return SpringLink(
        i=index,
        d=geometry.d,
        theta=geometry.theta,
        delta_d=geometry.delta_d,
        f_parallel=magnitude * math.cos(geometry.theta),
        f_perp=magnitude * math.sin(geometry.theta),
        magnitude=magnitude,
    )


def chain_forces(
    points: list[QueuePoint],
    e_v: DirectionVector,
    params: SpringParams,
    warnings: list[str] | None = None,
) -> ForceField:
    """Accumulate link forces over the whole ordered queue.

    Per link (i, i+1): the along-line slot gets f_parallel; the vertical slot
    gets f_perp, signed positive when the next person sits lower in the image
    (larger y). Person i receives (+fx, +fy), person i+1 the negation, so net
    forces sum to zero over the queue.
    """
    ids = tuple(p.person_id for p in points)
    n = len(points)
    if n < 2:
        zero = tuple((0.0, 0.0) for _ in range(n))
        return ForceField(links=(), person_ids=ids, net=zero,
                          net_magnitude=tuple(0.0 for _ in range(n)), k=params.k,
                          direction=(1.0, 0.0))

    xs = np.array([p.x for p in points], dtype=float)
    ys = np.array([p.y for p in points], dtype=float)
    dx = np.diff(xs)
    dy = np.diff(ys)
    d = np.hypot(dx, dy)

    degenerate = d == 0.0
    if degenerate.any() and warnings is not None:
        for idx in np.flatnonzero(degenerate):
            warnings.append(
                f"persons {ids[idx]} and {ids[idx + 1]} coincide; zero-length link"
            )
    safe_d = np.where(degenerate, 1.0, d)
    ev_mag = e_v.magnitude
    ux, uy = e_v.dx / ev_mag, e_v.dy / ev_mag
    ndx, ndy = dx / safe_d, dy / safe_d
    dot = ndx * ux + ndy * uy
    cross = ndx * uy - ndy * ux
    cos_theta = np.clip(dot, -1.0, 1.0)
    # exactly parallel links must carry exactly zero deformation
    parallel = cross == 0.0
    if parallel.any():
        cos_theta[parallel & (dot > 0.0)] = 1.0
        cos_theta[parallel & (dot < 0.0)] = -1.0
    if degenerate.any():
        cos_theta[degenerate] = 1.0
    theta = np.arccos(cos_theta)
    delta_d = d * (1.0 - cos_theta)

    magnitude = params.k * delta_d
    f_parallel = magnitude * cos_theta
    f_perp = magnitude * np.sin(theta)
    sign = np.where(ys[1:] > ys[:-1], 1.0, -1.0)
    fx_link = f_parallel
    fy_link = sign * f_perp

    net_x = np.zeros(n)
    net_y = np.zeros(n)
    net_x[:-1] += fx_link
    net_x[1:] -= fx_link
    net_y[:-1] += fy_link
    net_y[1:] -= fy_link
    net_mag = np.hypot(net_x, net_y)

    links = tuple(
        SpringLink(i, *vals)
        for i, vals in enumerate(
            zip(d.tolist(), theta.tolist(), delta_d.tolist(),
                f_parallel.tolist(), f_perp.tolist(), magnitude.tolist())
        )
    )
    return ForceField(
        links=links,
        person_ids=ids,
        net=tuple(zip(net_x.tolist(), net_y.tolist())),
        net_magnitude=tuple(net_mag.tolist()),
        k=params.k,
        direction=(e_v.dx, e_v.dy),
    )


def per_link_magnitudes(field: ForceField) -> list[float]:
    """Link force magnitudes in queue order, for coloring inter-person segments."""
    return [link.magnitude for link in field.links]
