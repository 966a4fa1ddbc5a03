"""Serial-arm kinematics and the proximity-to-singularity measure.

The arm is described by standard Denavit-Hartenberg rows. The quantity that
drives everything downstream is sigma_min, the smallest singular value of the
position Jacobian: it collapses to zero as the arm stretches out, and the
damping schedule in :mod:`neurocobot.admittance` keys off it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

JACOBI_TOL = 1e-12

# singularity-mode detection smooths sigma_min over this many samples before
# differencing, to avoid mode chatter from integration noise
SIGMA_SMOOTH_WINDOW = 5

APPROACHING = "approaching"
LEAVING = "leaving"


@dataclass
class ArmModel:
    """DH table (one row per revolute joint) plus joint limits."""

    dh_a: np.ndarray
    dh_alpha: np.ndarray
    dh_d: np.ndarray
    dh_theta0: np.ndarray
    limits_low: np.ndarray
    limits_high: np.ndarray
    task_dims: int = 2

    def __post_init__(self):
        for name in ("dh_a", "dh_alpha", "dh_d", "dh_theta0", "limits_low", "limits_high"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        n = self.dh_a.shape[0]
        if n < 2:
            raise ValueError("need at least 2 joints")
        for name in ("dh_alpha", "dh_d", "dh_theta0", "limits_low", "limits_high"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have one entry per joint")
        if np.any(self.limits_low >= self.limits_high):
            raise ValueError("joint limits must satisfy low < high")
        if self.task_dims not in (2, 3):
            raise ValueError("task_dims must be 2 or 3")

    @property
    def n_joints(self) -> int:
        return self.dh_a.shape[0]

    @classmethod
    def planar(cls, lengths=(0.6, 0.5, 0.2), limit: float = 2.9) -> "ArmModel":
        """Planar arm (shoulder/elbow/wrist by default); task space is x-y."""
        lengths = np.asarray(lengths, dtype=np.float64)
        n = lengths.shape[0]
        zeros = np.zeros(n)
        return cls(lengths, zeros.copy(), zeros.copy(), zeros.copy(),
                   np.full(n, -limit), np.full(n, limit), task_dims=2)

    @classmethod
    def spatial_6dof(cls) -> "ArmModel":
        """Six-joint elbow-type industrial arm, for 3-D task-space runs."""
        a = [0.0, -0.612, -0.5723, 0.0, 0.0, 0.0]
        d = [0.1273, 0.0, 0.0, 0.163941, 0.1157, 0.0922]
        alpha = [np.pi / 2, 0.0, 0.0, np.pi / 2, -np.pi / 2, 0.0]
        lim = np.full(6, 2.0 * np.pi)
        return cls(a, alpha, d, np.zeros(6), -lim, lim, task_dims=3)

    @classmethod
    def from_config(cls, cfg: dict, prefix: str = "arm.") -> "ArmModel":
        """Build from flat dotted keys: arm.dh.N.a, arm.dh.N.alpha, ... ."""
        rows = []
        i = 0
        while f"{prefix}dh.{i}.a" in cfg:
            rows.append(i)
            i += 1
        if len(rows) < 2:
            raise ValueError(f"config holds fewer than 2 joints under {prefix}dh.*")

        def col(name, default=None):
            out = []
            for j in rows:
                key = f"{prefix}dh.{j}.{name}"
                if key in cfg:
                    out.append(float(cfg[key]))
                elif default is not None:
                    out.append(default)
                else:
                    raise KeyError(key)
            return out

        return cls(
            col("a"), col("alpha", 0.0), col("d", 0.0), col("theta0", 0.0),
            col("limit_low", -2.9), col("limit_high", 2.9),
            task_dims=int(cfg.get(f"{prefix}task_dims", 2)),
        )

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(q, self.limits_low), self.limits_high)


@dataclass
class JointState:
    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=np.float64)
        self.qdot = np.asarray(self.qdot, dtype=np.float64)
        if self.q.shape != self.qdot.shape:
            raise ValueError("q and qdot must have matching lengths")


@dataclass(frozen=True)
class SingularityReading:
    """sigma_min plus the approach/leave flag derived from its smoothed trend.

    ``history`` keeps the most recent raw sigma_min values (newest last, at
    most SIGMA_SMOOTH_WINDOW) so successive readings can difference a moving
    average instead of raw samples.
    """

    sigma_min: float
    mode: str
    history: tuple = field(default=())

    @property
    def smoothed(self) -> float:
        return float(np.mean(self.history)) if self.history else self.sigma_min


def forward_kinematics(model: ArmModel, q):
    """End-effector pose: (position[task_dims], yaw) planar, (position, R) spatial."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (model.n_joints,):
        raise ValueError(f"q must have length {model.n_joints}")
    origins, _, R = kernels.dh_chain(model.dh_a, model.dh_alpha, model.dh_d,
                                     model.dh_theta0, q)
    pos = origins[-1][: model.task_dims].copy()
    if model.task_dims == 2:
        return pos, float(np.arctan2(R[1, 0], R[0, 0]))
    return pos, R


def jacobian(model: ArmModel, q) -> np.ndarray:
    """Position Jacobian, task_dims x n_joints."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (model.n_joints,):
        raise ValueError(f"q must have length {model.n_joints}")
    return kernels.position_jacobian(model.dh_a, model.dh_alpha, model.dh_d,
                                     model.dh_theta0, q, model.task_dims)


def singular_values(J) -> np.ndarray:
    """Descending singular values >= 0 (Jacobi iteration on the Gram matrix)."""
    J = np.asarray(J, dtype=np.float64)
    if not np.all(np.isfinite(J)):
        raise ValueError("Jacobian must be finite")
    return kernels.singular_values(J, JACOBI_TOL)


def singularity_measure(model: ArmModel, q, previous: SingularityReading | None = None) -> SingularityReading:
    """New reading; mode is 'approaching' iff the smoothed sigma_min decreased."""
    sigma = float(singular_values(jacobian(model, q))[-1])
    history = (() if previous is None else previous.history)[-(SIGMA_SMOOTH_WINDOW - 1):] + (sigma,)
    reading = SingularityReading(sigma, LEAVING, history)
    if previous is not None and reading.smoothed < previous.smoothed:
        return SingularityReading(sigma, APPROACHING, history)
    return reading


def joint_step(model: ArmModel, q, v_task, dt: float, dls_lambda: float = 0.0) -> np.ndarray:
    """Advance joints by damped-least-squares tracking of a task velocity."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    q = np.asarray(q, dtype=np.float64)
    v_task = np.asarray(v_task, dtype=np.float64)
    if v_task.shape != (model.task_dims,):
        raise ValueError(f"v_task must have length {model.task_dims}")
    J = jacobian(model, q)
    qdot = kernels.dls_qdot(J, v_task, float(dls_lambda))
    return model.clamp(q + qdot * dt)
