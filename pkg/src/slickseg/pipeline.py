"""Alternating minimization: closed-form sigma update, then one gradient-flow step on phi."""
from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .energy import (
    EnergyBreakdown,
    data_force,
    energy_from_fields,
    evaluate_energy,
    fitting_fields,
)
from .fields import GRAD_FLOOR, as_field
from .kernel import GaussianKernel, build_kernel
from .levelset import (
    Circle,
    Rectangle,
    contour_regularization_force,
    distance_regularization_force,
    heaviside,
    init_phi,
)
from .models import DistributionModel, make_model

log = logging.getLogger(__name__)

# contour weights of the published parameter study; they are tied to a data
# scale where the contour term is negligible, so they are not the default
PAPER_NU_RANGE = (0.00007, 0.0004)
CONVERGENCE_WINDOW = 5
# a step that would raise the energy is retried with dt halved, at most this often
MAX_HALVINGS = 12


class EvolutionError(FloatingPointError):
    """Non-finite values appeared while evolving the level set."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass(frozen=True)
class SegmentationConfig:
    gamma1: float = 2.3
    gamma2: float = 2.304
    nu: float = 2.0
    mu: float = 0.2
    epsilon: float = 1.5
    tau: float = 16.0
    ks: float = 1.0
    dt: float = 1.0
    max_iters: int = 500
    tol: float = 5e-5
    c0: float = 2.0
    model: str = "exp"
    upsilon: float = 1.0
    kappa: float = 1.0
    # None means a centered box spanning the middle half of the image
    init: Rectangle | Circle | None = None
    # halve dt whenever a full step would raise the energy
    safeguard: bool = True

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "nu", "mu", "epsilon", "tau", "ks", "tol", "c0",
                     "upsilon", "kappa"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0 and np.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not self.dt >= 0:
            raise ValueError(f"dt must be non-negative, got {self.dt!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if self.dt * self.mu > 0.25:
            raise ValueError(f"dt * mu = {self.dt * self.mu:g} exceeds the stability limit 0.25")
        make_model(self.model)
        if self.gamma1 > self.gamma2:
            warnings.warn(f"gamma1={self.gamma1:g} exceeds gamma2={self.gamma2:g}", stacklevel=3)

    @property
    def distribution(self) -> DistributionModel:
        return make_model(self.model, ks=self.ks, upsilon=self.upsilon, kappa=self.kappa)

    def replace(self, **changes) -> "SegmentationConfig":
        return dataclasses.replace(self, **changes)

    def init_geometry(self, shape) -> Rectangle | Circle:
        if self.init is not None:
            return self.init
        h, w = shape
        return Rectangle(w // 4, h // 4, w - w // 4, h - h // 4)


@dataclass
class SegmentationState:
    phi: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    iter: int = 0
    energy_trace: list[EnergyBreakdown] = field(default_factory=list)


@dataclass
class SegmentationResult:
    oil_mask: np.ndarray
    contour: list[tuple[int, int]]
    iterations_used: int
    converged: bool
    final_energy: EnergyBreakdown
    region_means: tuple[float, float]
    phi: np.ndarray
    energy_trace: list[EnergyBreakdown]
    oil_sign: int
    single_region: bool = False

    @property
    def phi_oil_score(self) -> np.ndarray:
        """``phi`` oriented so larger values mean more oil-like."""
        return self.oil_sign * self.phi


class Segmenter:
    """Holds the kernel and model for one configuration."""

    def __init__(self, cfg: SegmentationConfig | None = None):
        self.cfg = cfg or SegmentationConfig()
        self.model = self.cfg.distribution
        self.kernel: GaussianKernel = build_kernel(self.cfg.tau)

    def memberships(self, phi):
        h = heaviside(phi, self.cfg.epsilon)
        return h, 1.0 - h

    def fit_sigma(self, image, phi):
        m1, m2 = self.memberships(phi)
        return (self.model.update_sigma(self.kernel, image, m1),
                self.model.update_sigma(self.kernel, image, m2))

    def energy(self, image, phi, sigma1, sigma2) -> EnergyBreakdown:
        return evaluate_energy(self.model, self.kernel, image, phi, sigma1, sigma2, self.cfg)

    def initial_state(self, image, phi0=None) -> SegmentationState:
        image = as_field(image)
        if phi0 is None:
            phi0 = init_phi(self.cfg.init_geometry(image.shape), image.shape, self.cfg.c0)
        phi0 = as_field(phi0).copy()
        if phi0.shape != image.shape:
            raise ValueError(f"phi0 shape {phi0.shape} differs from image shape {image.shape}")
        s1, s2 = self.fit_sigma(image, phi0)
        return SegmentationState(phi0, s1, s2, 0, [self.energy(image, phi0, s1, s2)])

    def force(self, image, phi, sigma1, sigma2, eps=None):
        """Right-hand side of the level-set evolution at fixed sigma."""
        cfg = self.cfg
        if eps is None:
            eps = fitting_fields(self.model, self.kernel, image, sigma1, sigma2)
        eps1, eps2 = eps
        return (
            data_force(eps1, eps2, phi, cfg.gamma1, cfg.gamma2, cfg.epsilon)
            + cfg.nu * contour_regularization_force(phi, cfg.epsilon, GRAD_FLOOR)
            + cfg.mu * distance_regularization_force(phi, GRAD_FLOOR)
        )

    def step(self, state: SegmentationState, image) -> SegmentationState:
        """One alternation: refit sigma at ``phi^k``, then move ``phi`` along the force.

        With ``cfg.safeguard`` the time step is halved (up to
        ``MAX_HALVINGS`` times) while the energy at the new ``phi`` exceeds
        the energy at ``phi^k`` under the refreshed sigma. Since the sigma
        refit is an exact minimization, accepted steps never raise the total.
        """
        image = as_field(image)
        if state.phi.shape != image.shape:
            raise ValueError(f"state shape {state.phi.shape} differs from image shape {image.shape}")
        cfg = self.cfg
        k = state.iter + 1
        s1, s2 = self.fit_sigma(image, state.phi)
        eps = fitting_fields(self.model, self.kernel, image, s1, s2)
        force = self.force(image, state.phi, s1, s2, eps)
        if not np.all(np.isfinite(force)):
            raise EvolutionError("force became non-finite", k)
        ref = energy_from_fields(eps, state.phi, cfg).total if cfg.safeguard else None
        dt = cfg.dt
        for _ in range(MAX_HALVINGS + 1):
            phi = state.phi + dt * force
            e = energy_from_fields(eps, phi, cfg)
            if not np.isfinite(e.total):
                raise EvolutionError("energy became non-finite", k)
            if ref is None or e.total <= ref or dt == 0:
                break
            dt *= 0.5
        if dt != cfg.dt:
            log.debug("iteration %d: step reduced to dt=%g", k, dt)
        return SegmentationState(phi, s1, s2, k, state.energy_trace + [e])

    def run(self, image, phi0=None) -> SegmentationResult:
        image = as_field(image)
        if np.any(image <= 0):
            log.info("image has %d non-positive pixels; they are clamped to the intensity floor",
                     int(np.count_nonzero(image <= 0)))
        state = self.initial_state(image, phi0)
        converged = False
        calm = 0
        while state.iter < self.cfg.max_iters:
            state = self.step(state, image)
            prev, cur = state.energy_trace[-2].total, state.energy_trace[-1].total
            if abs(cur - prev) / max(abs(prev), 1.0) < self.cfg.tol:
                calm += 1
                if calm >= CONVERGENCE_WINDOW:
                    converged = True
                    break
            else:
                calm = 0
        log.info("stopped after %d iterations (converged=%s)", state.iter, converged)
        return finalize(image, state, converged)


def label_regions(image, phi):
    """Pick the darker sign region as oil; returns ``(mask, oil_sign, means, single)``.

    Region 1 is ``phi >= 0`` and wins ties. An empty region has mean +inf.
    """
    outside = phi >= 0
    inside = ~outside
    m_out = float(image[outside].mean()) if outside.any() else np.inf
    m_in = float(image[inside].mean()) if inside.any() else np.inf
    single = not (outside.any() and inside.any())
    if m_in < m_out:
        return inside.astype(np.uint8), -1, (m_out, m_in), single
    return outside.astype(np.uint8), 1, (m_out, m_in), single


def extract_contour(phi) -> list[tuple[int, int]]:
    """Pixels with ``phi < 0`` that have a 4-neighbor with ``phi >= 0``, row-major, as ``(x, y)``."""
    neg = phi < 0
    edge = np.zeros_like(neg)
    edge[1:, :] |= neg[1:, :] & ~neg[:-1, :]
    edge[:-1, :] |= neg[:-1, :] & ~neg[1:, :]
    edge[:, 1:] |= neg[:, 1:] & ~neg[:, :-1]
    edge[:, :-1] |= neg[:, :-1] & ~neg[:, 1:]
    ys, xs = np.nonzero(edge)
    return [(int(x), int(y)) for y, x in zip(ys, xs)]


def finalize(image, state: SegmentationState, converged: bool) -> SegmentationResult:
    mask, sign, means, single = label_regions(image, state.phi)
    if single:
        log.warning("level set holds a single region; contour is empty")
    return SegmentationResult(
        oil_mask=mask,
        contour=extract_contour(state.phi),
        iterations_used=state.iter,
        converged=converged,
        final_energy=state.energy_trace[-1],
        region_means=means,
        phi=state.phi,
        energy_trace=state.energy_trace,
        oil_sign=sign,
        single_region=single,
    )


def step(state: SegmentationState, image, cfg: SegmentationConfig) -> SegmentationState:
    return Segmenter(cfg).step(state, image)


def run(image, cfg: SegmentationConfig | None = None, phi0=None) -> SegmentationResult:
    """Segment *image* with *cfg*; see :class:`Segmenter`."""
    return Segmenter(cfg).run(image, phi0)
