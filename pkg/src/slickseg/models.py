"""Speckle intensity models and their local fitting terms.

Each model supplies the per-pixel negative log-likelihood used as the
fitting integrand, the closed-form local estimate of the scale field
``sigma`` for a fixed soft region membership, and the fitting field that
drives the level-set evolution::

    eps[x] = sum_y W[y, x] * integrand(I[x], sigma[y])

with ``W`` the (symmetric) kernel operator of :mod:`slickseg.kernel`.
Terms that are separable in ``sigma`` are aggregated by convolution, so
every evaluation is a handful of convolutions.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .fields import as_field
from .kernel import GaussianKernel, convolve

log = logging.getLogger(__name__)

REL_FLOOR = 1e-8
DEN_FLOOR = 1e-12


def intensity_floor(image) -> float:
    """Smallest intensity admitted into logs and powers: ``1e-8 * max(I)``."""
    peak = float(np.max(image))
    return REL_FLOOR * peak if peak > 0 else REL_FLOOR


sigma_floor = intensity_floor


def _clamp(values, floor: float, what: str):
    values = np.asarray(values, dtype=np.float64)
    low = values < floor
    if np.any(low):
        log.debug("clamped %d %s value(s) to floor %g", int(np.count_nonzero(low)), what, floor)
        values = np.where(low, floor, values)
    return values


class DistributionModel:
    """Base class; concrete models are frozen dataclasses below."""

    kind: str

    def integrand(self, intensity, sigma):
        raise NotImplementedError

    def update_sigma(self, k: GaussianKernel, image, membership):
        raise NotImplementedError

    def epsilon_field(self, k: GaussianKernel, image, sigma):
        raise NotImplementedError

    def sample(self, sigma: float, rng: np.random.Generator, size):
        raise NotImplementedError

    def mean(self, sigma: float) -> float:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


def _weighted_average(k, image, membership, values):
    image = as_field(image)
    membership = as_field(membership)
    if image.shape != membership.shape:
        raise ValueError(f"shape mismatch: image {image.shape} vs membership {membership.shape}")
    den = np.maximum(convolve(k, membership), DEN_FLOOR)
    return convolve(k, membership * values) / den, den


@dataclass(frozen=True)
class Exponential(DistributionModel):
    """Single-look intensity, ``p(I) = exp(-I / (Ks sigma)) / (Ks sigma)``."""

    ks: float = 1.0
    kind = "exp"

    def __post_init__(self):
        if not self.ks > 0:
            raise ValueError(f"Ks must be positive, got {self.ks}")

    def integrand(self, intensity, sigma):
        return intensity / (self.ks * sigma) + np.log(sigma)

    def update_sigma(self, k, image, membership):
        image = as_field(image)
        floor = intensity_floor(image)
        avg, _ = _weighted_average(k, image, membership, _clamp(image, floor, "intensity"))
        return np.maximum(avg / self.ks, floor)

    def epsilon_field(self, k, image, sigma):
        image = as_field(image)
        floor = intensity_floor(image)
        sigma = _clamp(as_field(sigma), floor, "sigma")
        intensity = _clamp(image, floor, "intensity")
        return intensity * convolve(k, 1.0 / (self.ks * sigma)) + convolve(k, np.log(sigma))

    def sample(self, sigma, rng, size):
        return rng.exponential(self.ks * sigma, size=size)

    def mean(self, sigma):
        return self.ks * sigma

    def params(self):
        return {"model": self.kind, "ks": self.ks}


@dataclass(frozen=True)
class Weibull(DistributionModel):
    """``p(I) = (v / sigma^v) I^(v-1) exp(-(I / sigma)^v)`` with shape ``v``."""

    upsilon: float = 1.0
    kind = "weibull"

    def __post_init__(self):
        if not self.upsilon > 0:
            raise ValueError(f"Weibull shape must be positive, got {self.upsilon}")

    def integrand(self, intensity, sigma):
        v = self.upsilon
        return v * np.log(sigma) + (intensity / sigma) ** v - (v - 1.0) * np.log(intensity)

    def update_sigma(self, k, image, membership):
        image = as_field(image)
        floor = intensity_floor(image)
        v = self.upsilon
        powered = _clamp(image, floor, "intensity") ** v
        avg, _ = _weighted_average(k, image, membership, powered)
        return np.maximum(np.maximum(avg, 0.0) ** (1.0 / v), floor)

    def epsilon_field(self, k, image, sigma):
        image = as_field(image)
        floor = intensity_floor(image)
        v = self.upsilon
        sigma = _clamp(as_field(sigma), floor, "sigma")
        intensity = _clamp(image, floor, "intensity")
        return (
            v * convolve(k, np.log(sigma))
            + intensity**v * convolve(k, sigma ** (-v))
            - (v - 1.0) * np.log(intensity)
        )

    def sample(self, sigma, rng, size):
        return sigma * rng.weibull(self.upsilon, size=size)

    def mean(self, sigma):
        return sigma * math.gamma(1.0 + 1.0 / self.upsilon)

    def params(self):
        return {"model": self.kind, "upsilon": self.upsilon}


@dataclass(frozen=True)
class Gamma(DistributionModel):
    """Multi-look intensity of order ``kappa`` and mean ``sigma``.

    The integrand is the negative log-density without the ``kappa ln kappa``
    constant.
    """

    kappa: float = 1.0
    kind = "gamma"

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"Gamma order must be positive, got {self.kappa}")

    def integrand(self, intensity, sigma):
        c = self.kappa
        return (
            c * np.log(sigma) + c * intensity / sigma
            - (c - 1.0) * np.log(intensity) + math.lgamma(c)
        )

    def update_sigma(self, k, image, membership):
        image = as_field(image)
        floor = intensity_floor(image)
        avg, _ = _weighted_average(k, image, membership, _clamp(image, floor, "intensity"))
        return np.maximum(avg, floor)

    def epsilon_field(self, k, image, sigma):
        image = as_field(image)
        floor = intensity_floor(image)
        c = self.kappa
        sigma = _clamp(as_field(sigma), floor, "sigma")
        intensity = _clamp(image, floor, "intensity")
        return (
            c * convolve(k, np.log(sigma))
            + c * intensity * convolve(k, 1.0 / sigma)
            - (c - 1.0) * np.log(intensity)
            + math.lgamma(c)
        )

    def sample(self, sigma, rng, size):
        return rng.gamma(self.kappa, sigma / self.kappa, size=size)

    def mean(self, sigma):
        return sigma

    def params(self):
        return {"model": self.kind, "kappa": self.kappa}


def make_model(kind: str = "exp", ks: float = 1.0, upsilon: float = 1.0,
               kappa: float = 1.0) -> DistributionModel:
    kind = kind.lower()
    if kind in ("exp", "exponential"):
        return Exponential(ks)
    if kind == "weibull":
        return Weibull(upsilon)
    if kind == "gamma":
        return Gamma(kappa)
    raise ValueError(f"unknown model {kind!r}; expected exp, weibull or gamma")


def fit_integrand(model: DistributionModel, intensity, sigma, floor: float = REL_FLOOR):
    """Pointwise fitting integrand with both arguments clamped at *floor*."""
    return model.integrand(_clamp(intensity, floor, "intensity"), _clamp(sigma, floor, "sigma"))


def update_sigma(model: DistributionModel, k: GaussianKernel, image, membership) -> np.ndarray:
    return model.update_sigma(k, image, membership)


def epsilon_field(model: DistributionModel, k: GaussianKernel, image, sigma) -> np.ndarray:
    return model.epsilon_field(k, image, sigma)


def sample_intensity(model: DistributionModel, sigma: float, rng_seed: int, n: int) -> np.ndarray:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    rng = np.random.default_rng(rng_seed)
    return model.sample(sigma, rng, n)
