"""Speckled two-region test scenes with exact ground truth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .levelset import Circle, Rectangle, fmt_coord, parse_geometry
from .models import DistributionModel, Exponential


@dataclass(frozen=True)
class Polygon:
    """Closed polygon in pixel coordinates, rasterized by the even-odd rule at pixel centers."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise ValueError("polygon needs at least 3 vertices")

    def mask(self, shape):
        h, w = shape
        yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
        inside = np.zeros(shape, dtype=bool)
        verts = self.vertices
        for (xa, ya), (xb, yb) in zip(verts, verts[1:] + verts[:1]):
            if ya == yb:
                continue
            crosses = (ya > yy) != (yb > yy)
            x_at = xa + (yy - ya) * (xb - xa) / (yb - ya)
            inside ^= crosses & (xx < x_at)
        return inside

    def spec(self) -> str:
        return "polygon:" + ",".join(f"{fmt_coord(x)},{fmt_coord(y)}" for x, y in self.vertices)


def parse_shape(text: str):
    """Parse ``rect:...``, ``circle:...`` or ``polygon:x1,y1,x2,y2,...``."""
    kind, _, rest = text.strip().partition(":")
    if kind == "polygon":
        try:
            values = [float(v) for v in rest.split(",")]
        except ValueError:
            raise ValueError(f"bad polygon {text!r}") from None
        if len(values) % 2 or len(values) < 6:
            raise ValueError(f"polygon needs >= 3 x,y pairs, got {text!r}")
        return Polygon(tuple(zip(values[::2], values[1::2])))
    return parse_geometry(text)


@dataclass(frozen=True)
class SceneSpec:
    width: int = 128
    height: int = 128
    oil_shape: Rectangle | Circle | Polygon = Circle(64, 64, 30)
    background_sigma: float = 1.0
    oil_sigma: float = 0.2
    model: DistributionModel = Exponential()
    seed: int = 0

    def validate(self, check_contrast: bool = True) -> np.ndarray:
        """Check the invariants and return the truth mask."""
        if self.width < 1 or self.height < 1:
            raise ValueError("scene dimensions must be positive")
        if not (self.oil_sigma > 0 and self.background_sigma > 0):
            raise ValueError("sigma values must be positive")
        if check_contrast and not self.oil_sigma < self.background_sigma:
            raise ValueError(
                f"oil_sigma ({self.oil_sigma}) must be below background_sigma "
                f"({self.background_sigma})"
            )
        truth = self.oil_shape.mask((self.height, self.width))
        frac = truth.mean()
        if not 0.01 <= frac <= 0.60:
            raise ValueError(f"oil shape covers {frac:.1%} of the image; allowed 1%-60%")
        return truth


def generate(spec: SceneSpec, check_contrast: bool = True):
    """Sample a scene; returns ``(image, truth)`` with truth in ``{0, 1}``.

    Each pixel is drawn independently from ``spec.model`` with the oil or
    background scale. ``check_contrast=False`` admits equal scales, for
    null-hypothesis checks.
    """
    truth = spec.validate(check_contrast)
    rng = np.random.default_rng(spec.seed)
    shape = (spec.height, spec.width)
    sigma = np.where(truth, spec.oil_sigma, spec.background_sigma)
    # one draw per pixel at unit scale, then scaled: keeps the stream layout
    # independent of the shape
    unit = spec.model.sample(1.0, rng, shape)
    return unit * sigma, truth.astype(np.uint8)
