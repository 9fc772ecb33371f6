"""Finite-difference operators on 2-D scalar fields.

Fields are plain ``float64`` arrays of shape ``(height, width)``; axis 0 is
``y`` (rows) and axis 1 is ``x`` (columns). Pixel spacing is fixed at 1 and
boundaries are zero-flux (edge values replicated).

Two difference schemes are provided:

* central: :func:`gradient`, :func:`divergence`, :func:`curvature`.
  Second-order in the interior, one-sided on the outer row/column.
* staggered: :func:`forward_gradient` and :func:`backward_divergence`.
  The backward divergence is minus the adjoint of the forward gradient, and
  their composition is the compact five-point :func:`laplacian`. Unlike the
  central pair this scheme sees the checkerboard mode, which is what keeps
  the explicit level-set evolution stable.
"""
from __future__ import annotations

import numpy as np

GRAD_FLOOR = 1e-8


def as_field(f) -> np.ndarray:
    """Coerce *f* to a finite 2-D float64 array."""
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D field, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field contains NaN or Inf values")
    return arr


def _diff(f: np.ndarray, axis: int) -> np.ndarray:
    if f.shape[axis] < 2:
        return np.zeros_like(f)
    return np.gradient(f, axis=axis)


def gradient(f) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference ``(df/dx, df/dy)``."""
    f = as_field(f)
    return _diff(f, 1), _diff(f, 0)


def divergence(vx, vy) -> np.ndarray:
    vx = as_field(vx)
    vy = as_field(vy)
    if vx.shape != vy.shape:
        raise ValueError(f"shape mismatch: {vx.shape} vs {vy.shape}")
    return _diff(vx, 1) + _diff(vy, 0)


def forward_gradient(f) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences; zero across the last row/column (no flux out)."""
    f = as_field(f)
    gx = np.zeros_like(f)
    gy = np.zeros_like(f)
    gx[:, :-1] = f[:, 1:] - f[:, :-1]
    gy[:-1, :] = f[1:, :] - f[:-1, :]
    return gx, gy


def backward_divergence(vx, vy) -> np.ndarray:
    """Backward-difference divergence, the negative adjoint of :func:`forward_gradient`.

    Flux components on the last row/column are ignored, matching the zeros
    :func:`forward_gradient` puts there.
    """
    vx = as_field(vx)
    vy = as_field(vy)
    if vx.shape != vy.shape:
        raise ValueError(f"shape mismatch: {vx.shape} vs {vy.shape}")
    vx = vx.copy()
    vy = vy.copy()
    vx[:, -1] = 0.0
    vy[-1, :] = 0.0
    out = vx.copy()
    out[:, 1:] -= vx[:, :-1]
    out += vy
    out[1:, :] -= vy[:-1, :]
    return out


def laplacian(f) -> np.ndarray:
    """Compact five-point Laplacian with replicated edges.

    Equal to ``backward_divergence(*forward_gradient(f))`` everywhere.
    """
    f = as_field(f)
    p = np.pad(f, 1, mode="edge")
    return p[2:, 1:-1] + p[:-2, 1:-1] + p[1:-1, 2:] + p[1:-1, :-2] - 4.0 * f


def grad_norm(f, grad_floor: float = 0.0) -> np.ndarray:
    fx, fy = gradient(f)
    return np.maximum(np.hypot(fx, fy), grad_floor)


def forward_grad_norm(f, grad_floor: float = 0.0) -> np.ndarray:
    fx, fy = forward_gradient(f)
    return np.maximum(np.hypot(fx, fy), grad_floor)


def curvature(f, grad_floor: float = GRAD_FLOOR) -> np.ndarray:
    """Mean curvature ``div(grad f / |grad f|)`` (central scheme), ``|grad f|`` floored."""
    if grad_floor <= 0:
        raise ValueError("grad_floor must be positive")
    fx, fy = gradient(f)
    norm = np.maximum(np.hypot(fx, fy), grad_floor)
    return divergence(fx / norm, fy / norm)


def staggered_curvature(f, grad_floor: float = GRAD_FLOOR) -> np.ndarray:
    """Curvature built from the staggered pair, consistent with :func:`laplacian`."""
    if grad_floor <= 0:
        raise ValueError("grad_floor must be positive")
    fx, fy = forward_gradient(f)
    norm = np.maximum(np.hypot(fx, fy), grad_floor)
    return backward_divergence(fx / norm, fy / norm)
