"""Desk-scale closed-loop simulator for neurally tuned compliant manipulation.

A simulated operator drives a virtual admittance-controlled arm in and out of
a kinematic singularity. Expectation violations become conflict events, which
are rendered as synthetic EEG, decoded by a classifier into rewards, and fed
to a continuous-action actor-critic agent that tunes the damping-onset
threshold online.
"""

__version__ = "0.1.0"

from .accel import BACKEND

__all__ = ["BACKEND", "__version__"]
