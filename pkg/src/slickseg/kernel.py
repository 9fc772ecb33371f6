"""Truncated Gaussian localization kernel and convolution against fields."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .fields import as_field

# Half-sample symmetric extension (d c b a | a b c d). Row sums of the
# resulting operator are 1 and the operator is symmetric, so a convolution
# is also its own adjoint; the sigma update and the fitting fields rely on it.
BOUNDARY_MODE = "reflect"


def gaussian_density(offset, tau: float) -> np.ndarray:
    """Continuous 2-D Gaussian ``exp(-|f|^2 / 2 tau^2) / (2 pi tau^2)``."""
    f = np.asarray(offset, dtype=np.float64)
    r2 = np.sum(f**2, axis=-1) if f.ndim else f**2
    return np.exp(-r2 / (2.0 * tau**2)) / (2.0 * math.pi * tau**2)


@dataclass(frozen=True)
class GaussianKernel:
    tau: float
    radius: int
    profile: np.ndarray = field(repr=False)

    @property
    def weights(self) -> np.ndarray:
        """Full ``(2r+1, 2r+1)`` weight array, summing to one."""
        return np.outer(self.profile, self.profile)

    @property
    def size(self) -> int:
        return 2 * self.radius + 1


def build_kernel(tau: float, radius: int | None = None) -> GaussianKernel:
    """Gaussian kernel truncated at ``ceil(3 tau)`` and renormalized.

    The 2-D weights are the outer product of a 1-D profile, which is exact
    for an isotropic Gaussian on a square window.
    """
    if not tau > 0 or not math.isfinite(tau):
        raise ValueError(f"tau must be positive, got {tau}")
    if radius is None:
        radius = math.ceil(3.0 * tau)
    if radius < 1:
        raise ValueError(f"radius must be a positive integer, got {radius}")
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    profile = np.exp(-(offsets**2) / (2.0 * tau**2))
    profile /= profile.sum()
    profile.setflags(write=False)
    return GaussianKernel(tau=float(tau), radius=int(radius), profile=profile)


def convolve(k: GaussianKernel, f) -> np.ndarray:
    """Separable convolution of *f* with *k* under symmetric boundaries."""
    f = as_field(f)
    out = ndimage.correlate1d(f, k.profile, axis=0, mode=BOUNDARY_MODE)
    return ndimage.correlate1d(out, k.profile, axis=1, mode=BOUNDARY_MODE)


def reflect_index(i, n: int):
    """Map any integer index onto ``[0, n)`` by half-sample reflection."""
    m = np.mod(i, 2 * n)
    return np.where(m >= n, 2 * n - 1 - m, m)


def convolve_direct(k: GaussianKernel, f) -> np.ndarray:
    """Direct 2-D summation, slow; used as a reference for :func:`convolve`."""
    f = as_field(f)
    h, w = f.shape
    weights = k.weights
    rows = np.arange(h)
    cols = np.arange(w)
    out = np.zeros_like(f)
    for dy in range(-k.radius, k.radius + 1):
        ry = reflect_index(rows + dy, h)
        for dx in range(-k.radius, k.radius + 1):
            rx = reflect_index(cols + dx, w)
            out += weights[dy + k.radius, dx + k.radius] * f[np.ix_(ry, rx)]
    return out


def kernel_matrix(k: GaussianKernel, shape: tuple[int, int]) -> np.ndarray:
    """Dense ``(N, N)`` matrix ``W`` with ``convolve(k, f).ravel() == W @ f.ravel()``.

    Entry ``W[x, y]`` is the total weight pixel *y* receives in the
    neighborhood of *x*, folding reflected offsets back onto the grid.
    Quadratic in pixel count; meant for small grids and reference checks.
    """
    h, w = shape
    n = h * w
    mat = np.zeros((n, n))
    weights = k.weights
    r = k.radius
    for y in range(h):
        for x in range(w):
            row = y * w + x
            for dy in range(-r, r + 1):
                yy = int(reflect_index(y + dy, h))
                for dx in range(-r, r + 1):
                    xx = int(reflect_index(x + dx, w))
                    mat[row, yy * w + xx] += weights[dy + r, dx + r]
    return mat
