"""Virtual mass-damper force-to-motion law with singularity-scheduled damping.

Total damping is base_damping plus an extra term that ramps linearly from 0
(at sigma_min >= sigma1_bar) to lambda_max (at sigma_min <= sigma0_bar), so
the arm always stiffens on the way into a singular region. sigma1_bar, the
onset threshold, is the quantity the learning agent tunes; its legal range
depends on whether the arm is approaching or leaving the singularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kinematics import APPROACHING, LEAVING

BOUNDS_APPROACHING = (0.35, 0.45)
BOUNDS_LEAVING = (0.25, 0.45)


@dataclass
class AdmittanceParams:
    virtual_mass: float = 8.0
    base_damping: float = 15.0
    lambda_max: float = 40.0
    sigma0_bar: float = 0.25
    sigma1_bar: float = 0.40
    bounds_approaching: tuple = BOUNDS_APPROACHING
    bounds_leaving: tuple = BOUNDS_LEAVING

    def __post_init__(self):
        if self.virtual_mass <= 0:
            raise ValueError("virtual_mass must be positive")
        if self.base_damping < 0 or self.lambda_max <= 0:
            raise ValueError("base_damping must be >= 0 and lambda_max > 0")
        # the leaving bounds reach down to sigma0_bar itself, so equality is
        # attainable via clamping; the schedule degenerates to a step there
        if self.sigma0_bar > self.sigma1_bar:
            raise ValueError("sigma0_bar must not exceed sigma1_bar")

    def bounds_for(self, mode: str) -> tuple:
        if mode == APPROACHING:
            return self.bounds_approaching
        if mode == LEAVING:
            return self.bounds_leaving
        raise ValueError(f"unknown mode {mode!r}")


@dataclass
class MotionState:
    velocity: np.ndarray
    acceleration: np.ndarray = field(default=None)

    def __post_init__(self):
        self.velocity = np.asarray(self.velocity, dtype=np.float64)
        if self.acceleration is None:
            self.acceleration = np.zeros_like(self.velocity)
        self.acceleration = np.asarray(self.acceleration, dtype=np.float64)
        if self.velocity.shape != self.acceleration.shape:
            raise ValueError("velocity and acceleration must share a shape")
        if not (np.all(np.isfinite(self.velocity)) and np.all(np.isfinite(self.acceleration))):
            raise ValueError("motion state must be finite")

    @classmethod
    def rest(cls, dims: int) -> "MotionState":
        return cls(np.zeros(dims), np.zeros(dims))


def damping_schedule(sigma_min: float, params: AdmittanceParams) -> float:
    """Extra damping: lambda_max below sigma0_bar, 0 above sigma1_bar, linear between."""
    if sigma_min < 0:
        raise ValueError("sigma_min must be >= 0")
    if sigma_min <= params.sigma0_bar:
        return params.lambda_max
    if sigma_min >= params.sigma1_bar:
        return 0.0
    frac = (params.sigma1_bar - sigma_min) / (params.sigma1_bar - params.sigma0_bar)
    return params.lambda_max * frac


def admittance_step(force, state: MotionState, params: AdmittanceParams,
                    sigma_min: float, dt: float) -> MotionState:
    """Semi-implicit Euler step: a = (F - D_total v) / M, then v += a dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    force = np.asarray(force, dtype=np.float64)
    if not np.all(np.isfinite(force)):
        raise ValueError("force must be finite")
    if force.shape != state.velocity.shape:
        raise ValueError("force dimension must match the motion state")
    d_total = params.base_damping + damping_schedule(sigma_min, params)
    accel = (force - d_total * state.velocity) / params.virtual_mass
    return MotionState(state.velocity + accel * dt, accel)


def clamp_sigma1(raw_action: float, mode: str,
                 params: AdmittanceParams | None = None) -> float:
    """Clamp a raw onset-threshold action into the active mode's legal range."""
    if not np.isfinite(raw_action):
        raise ValueError("sigma1 action must be finite")
    lo, hi = (params or AdmittanceParams()).bounds_for(mode)
    return float(min(max(raw_action, lo), hi))
