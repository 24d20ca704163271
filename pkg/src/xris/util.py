"""Shared constants and angle helpers."""

from __future__ import annotations

import os

import numpy as np

SPEED_OF_LIGHT = 299792458.0
"Speed of light in m/s (exact)."


def wavenumber(freq_hz: float) -> float:
    "Free-space wavenumber k = 2*pi*f/c in rad/m."
    return 2.0 * np.pi * freq_hz / SPEED_OF_LIGHT


def wrap_two_pi(angle):
    "Wrap angle(s) to [0, 2*pi)."
    return np.mod(angle, 2.0 * np.pi)


def wrap_pi(angle):
    "Wrap angle(s) to [-pi, pi)."
    return np.mod(np.asarray(angle) + np.pi, 2.0 * np.pi) - np.pi


def resolve_threads(threads: int | None = None) -> int:
    """Worker count for grid evaluation.

    Explicit argument wins, then the XRIS_THREADS environment variable,
    then all available CPUs.
    """
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("XRIS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
