"""Generalized Stormer-Verlet dynamics with recoil, step policies and MH.

This is the generic (python) integration path, usable with any Target; the
samplers switch to the compiled kernels in ``_kernels`` for built-in
targets. Both paths implement the identical update, which is asserted by
the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .kinetics import KineticParams, kinetic_energy, kinetic_gradient
from .targets import Target

DIVERGENCE_THRESHOLD = 1e3  # |dH| above this marks the proposal divergent


@dataclass(frozen=True)
class IntegratorConfig:
    base_step: float
    step_jitter_range: Tuple[float, float] = (0.09, 0.11)
    decay_init: Optional[float] = None  # None disables the decay schedule
    decay_rate: float = 0.9
    leapfrog_center: int = 100
    leapfrog_halfwidth: int = 20
    reflection_enabled: Optional[bool] = None  # None -> enabled when a > 1

    def __post_init__(self):
        if self.base_step <= 0:
            raise ValueError(f"base_step must be positive, got {self.base_step}")
        r1, r2 = self.step_jitter_range
        if not (0 < r1 <= r2):
            raise ValueError(f"step_jitter_range must satisfy 0 < r1 <= r2, got {self.step_jitter_range}")
        if not (0 < self.decay_rate < 1):
            raise ValueError(f"decay_rate must lie in (0, 1), got {self.decay_rate}")
        if not (0 <= self.leapfrog_halfwidth < self.leapfrog_center):
            raise ValueError("leapfrog_halfwidth must be smaller than leapfrog_center")


def resolve_reflection(config: IntegratorConfig, params: KineticParams) -> bool:
    if config.reflection_enabled is not None:
        return config.reflection_enabled
    return params.a > 1.0


@dataclass(frozen=True)
class PhasePoint:
    position: np.ndarray
    momentum: np.ndarray
    potential: float
    kinetic: float

    @property
    def hamiltonian(self) -> float:
        return self.potential + self.kinetic

    @property
    def valid(self) -> bool:
        return bool(np.isfinite(self.potential))


def make_phase_point(target: Target, params: KineticParams, x, p) -> PhasePoint:
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    return PhasePoint(x, p, target.energy(x), kinetic_energy(p, params))


def _mirror(x, p, lower, upper):
    """Fold positions back across hard support bounds, negating momentum."""
    x = x.copy()
    p = p.copy()
    for d in range(x.shape[0]):
        for _ in range(64):
            if x[d] < lower[d]:
                x[d] = 2.0 * lower[d] - x[d]
                p[d] = -p[d]
            elif x[d] > upper[d]:
                x[d] = 2.0 * upper[d] - x[d]
                p[d] = -p[d]
            else:
                break
    return x, p


def leapfrog_step(state: PhasePoint, target: Target, params: KineticParams,
                  eps: float, reflect: bool = False) -> PhasePoint:
    """One Stormer-Verlet step: half kick, drift along grad K, half kick.

    With ``reflect`` on, dimensions whose momentum sign flips between the
    post-half-kick momentum and the end of the step recoil: position reverts
    to the step start and the pre-step momentum is negated.
    """
    x = state.position
    p = state.momentum
    p_half = p - 0.5 * eps * target.grad(x)
    sign_in = np.sign(p_half)
    x_new = x + eps * kinetic_gradient(p_half, params)
    x_new, p_half = _mirror(x_new, p_half, target.lower, target.upper)
    u_new = target.energy(x_new)
    if not np.isfinite(u_new):
        return PhasePoint(x_new, p_half, np.inf, kinetic_energy(p_half, params))
    p_new = p_half - 0.5 * eps * target.grad(x_new)
    if reflect:
        flipped = sign_in * p_new < 0
        if flipped.any():
            x_new = np.where(flipped, x, x_new)
            p_new = np.where(flipped, -p, p_new)
            u_new = target.energy(x_new)
    return PhasePoint(x_new, p_new, u_new, kinetic_energy(p_new, params))


def reflect_recoil(before: PhasePoint, after: PhasePoint, target: Target,
                   params: KineticParams) -> PhasePoint:
    """Recoil every dimension whose momentum sign flipped across a step."""
    if before.position.shape != after.position.shape:
        raise ValueError("phase points must share dimension")
    flipped = np.sign(before.momentum) * np.sign(after.momentum) < 0
    if not flipped.any():
        return after
    x = np.where(flipped, before.position, after.position)
    p = np.where(flipped, -before.momentum, after.momentum)
    return make_phase_point(target, params, x, p)


def draw_step_size(config: IntegratorConfig, params: KineticParams,
                   iteration: int, rng) -> float:
    """Uniform jitter when a == 1 (grid-avoidance), else decayed step size."""
    if params.a == 1.0:
        r1, r2 = config.step_jitter_range
        return float(rng.uniform(r1, r2))
    eps1 = config.decay_init if config.decay_init is not None else config.base_step
    return float(max(eps1 * config.decay_rate ** iteration, config.base_step))


def draw_step_count(config: IntegratorConfig, rng) -> int:
    lo = config.leapfrog_center - config.leapfrog_halfwidth
    hi = config.leapfrog_center + config.leapfrog_halfwidth
    return int(rng.integers(lo, hi + 1))


def propose_trajectory(start: PhasePoint, target: Target, params: KineticParams,
                       config: IntegratorConfig, iteration: int, rng):
    """Integrate a full proposal: one step size and step count per trajectory."""
    eps = draw_step_size(config, params, iteration, rng)
    n_steps = draw_step_count(config, rng)
    reflect = resolve_reflection(config, params)
    state = start
    for _ in range(n_steps):
        state = leapfrog_step(state, target, params, eps, reflect)
        if not state.valid:
            break
    return state, n_steps


def mh_accept(start: PhasePoint, proposal: PhasePoint, rng) -> bool:
    """Accept with probability min(1, exp(H_start - H_proposal))."""
    u = rng.uniform()
    if not np.isfinite(proposal.hamiltonian):
        return False
    return bool(u < np.exp(min(0.0, start.hamiltonian - proposal.hamiltonian)))
