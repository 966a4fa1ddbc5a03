"""32-channel sensor layout shipped as a versioned data file."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

CONFLICT_CENTER = "Fz"  # conflict topography is frontal-central
DEFAULT_WEIGHT_SCALE = 0.45


@dataclass(frozen=True)
class Montage:
    version: str
    names: tuple
    positions: np.ndarray  # n x 2

    @property
    def n_channels(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


def load_montage() -> Montage:
    text = resources.files("neurocobot.data").joinpath("montage32.csv").read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    version = lines[0].lstrip("# ").split()[0] + " " + lines[0].split()[2]
    names, xs, ys = [], [], []
    for ln in lines[2:]:
        name, x, y = ln.split(",")
        names.append(name)
        xs.append(float(x))
        ys.append(float(y))
    return Montage(version, tuple(names), np.column_stack([xs, ys]))


def conflict_weights(montage: Montage, center: str = CONFLICT_CENTER,
                     scale: float = DEFAULT_WEIGHT_SCALE) -> np.ndarray:
    """Gaussian spatial falloff exp(-d^2 / (2 scale^2)) from the center channel."""
    c = montage.positions[montage.index(center)]
    d2 = np.sum((montage.positions - c) ** 2, axis=1)
    return np.exp(-d2 / (2.0 * scale * scale))
