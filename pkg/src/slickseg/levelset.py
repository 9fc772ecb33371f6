"""Smoothed Heaviside/Dirac, level-set initialization and regularization forces.

Sign convention: ``phi < 0`` inside the contour, ``phi > 0`` outside.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .fields import (
    GRAD_FLOOR,
    as_field,
    backward_divergence,
    curvature,
    forward_gradient,
)

log = logging.getLogger(__name__)


def heaviside(phi, epsilon: float):
    """Arctan-smoothed step ``(1 + (2/pi) arctan(phi/eps)) / 2``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return 0.5 + np.arctan(np.asarray(phi, dtype=np.float64) / epsilon) / math.pi


def dirac(phi, epsilon: float):
    """Derivative of :func:`heaviside`, ``eps / (pi (eps^2 + phi^2))``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    phi = np.asarray(phi, dtype=np.float64)
    return epsilon / (math.pi * (epsilon**2 + phi**2))


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned box over pixel indices ``x0 <= x < x1``, ``y0 <= y < y1``."""

    x0: int
    y0: int
    x1: int
    y1: int

    def mask(self, shape):
        h, w = shape
        yy, xx = np.mgrid[0:h, 0:w]
        return (xx >= self.x0) & (xx < self.x1) & (yy >= self.y0) & (yy < self.y1)

    def spec(self) -> str:
        return f"rect:{self.x0},{self.y0},{self.x1},{self.y1}"


@dataclass(frozen=True)
class Circle:
    """Disc of pixel centers with ``(x - cx)^2 + (y - cy)^2 < r^2``."""

    cx: float
    cy: float
    r: float

    def mask(self, shape):
        h, w = shape
        yy, xx = np.mgrid[0:h, 0:w]
        return (xx - self.cx) ** 2 + (yy - self.cy) ** 2 < self.r**2

    def spec(self) -> str:
        return "circle:" + ",".join(fmt_coord(v) for v in (self.cx, self.cy, self.r))


def fmt_coord(v) -> str:
    """Shortest text that parses back to the same float."""
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


def parse_geometry(text: str):
    """Parse ``rect:x0,y0,x1,y1`` or ``circle:cx,cy,r``."""
    kind, _, rest = text.strip().partition(":")
    try:
        values = [float(v) for v in rest.split(",")]
    except ValueError:
        raise ValueError(f"bad geometry {text!r}") from None
    if kind == "rect" and len(values) == 4:
        return Rectangle(*(int(round(v)) for v in values))
    if kind == "circle" and len(values) == 3:
        return Circle(*values)
    raise ValueError(f"bad geometry {text!r}; expected rect:x0,y0,x1,y1 or circle:cx,cy,r")


def init_phi(geometry, shape, c0: float = 2.0) -> np.ndarray:
    """Binary step level set: ``-c0`` inside *geometry*, ``+c0`` elsewhere."""
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    inside = geometry.mask(shape)
    if not inside.any():
        raise ValueError(f"initial geometry {geometry} covers no pixel of a {shape} grid")
    if inside.all():
        log.warning("initial geometry %s covers the whole grid; exterior is empty", geometry)
    return np.where(inside, -c0, c0).astype(np.float64)


def contour_regularization_force(phi, epsilon: float, grad_floor: float = GRAD_FLOOR):
    """``dirac(phi) * div(grad phi / |grad phi|)``; shortens the zero level set."""
    phi = as_field(phi)
    return dirac(phi, epsilon) * curvature(phi, grad_floor)


def distance_regularization_force(phi, grad_floor: float = GRAD_FLOOR):
    """``laplacian(phi) - staggered_curvature(phi)``; drives ``|grad phi|`` toward 1.

    Evaluated as ``div((1 - 1/|grad phi|) grad phi)`` on the staggered
    scheme, which makes it exactly minus the gradient of
    :func:`slickseg.energy.distance_energy`.
    """
    phi = as_field(phi)
    gx, gy = forward_gradient(phi)
    scale = 1.0 - 1.0 / np.maximum(np.hypot(gx, gy), grad_floor)
    return backward_divergence(scale * gx, scale * gy)
