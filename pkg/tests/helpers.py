"""Shared test utilities: independent oracles and fixtures-by-hand.

The oracles here deliberately avoid the library code paths they check:
naive_field sums with plain cmath in its own loop order, bisect_root is a
standalone bisection, and differential_phase recomputes the two-resonator
phase difference straight from the arctan formula.
"""

import cmath
import math

import numpy as np

from xris.codebook import Channel, Codebook, CodeState, Scheme

SPEED_OF_LIGHT = 299792458.0


def ideal_book(bits: int, freq: float = 10e9) -> Codebook:
    "Uniform 2^bits-state unit-magnitude codebook anchored at phase 0."
    n = 2**bits
    states = tuple(
        CodeState(
            index=i,
            label=f"P{i}",
            config=None,
            channel=Channel.CO_POL,
            coeff=cmath.exp(1j * 2 * math.pi * i / n),
            phase=(2 * math.pi * i / n) % (2 * math.pi),
        )
        for i in range(n)
    )
    scheme = Scheme.ONE_BIT_B5 if bits == 1 else Scheme.TWO_BIT_B5B6
    return Codebook(scheme=scheme, freq=freq, states=states, bits=bits)


def naive_field(geom, exc, f, theta_samples, phi_samples, q_e):
    "Triple-loop direct summation with cmath, independent of the library."
    k = 2.0 * math.pi * f / SPEED_OF_LIGHT
    rows, cols = geom.rows, geom.cols
    out = np.empty((len(theta_samples), len(phi_samples)), dtype=complex)
    for it, theta in enumerate(theta_samples):
        for ip, phi in enumerate(phi_samples):
            u = math.sin(theta) * math.cos(phi)
            v = math.sin(theta) * math.sin(phi)
            acc = 0j
            for r in range(rows):
                for c in range(cols):
                    x = (c - (cols - 1) / 2.0) * geom.spacing
                    y = (r - (rows - 1) / 2.0) * geom.spacing
                    acc += exc[r, c] * cmath.exp(1j * k * (x * u + y * v))
            out[it, ip] = math.cos(theta) ** q_e * acc
    return out


def bisect_root(fn, lo: float, hi: float, iters: int = 200) -> float:
    "Plain bisection; fn(lo) and fn(hi) must differ in sign."
    flo = fn(lo)
    if flo == 0.0:
        return lo
    if flo * fn(hi) > 0:
        raise ValueError("root not bracketed")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def arctan_phase(f: float, f_r: float, q: float) -> float:
    "The resonator phase formula, written out independently."
    return -2.0 * math.atan(2.0 * q * (f - f_r) / f_r)


def differential_phase(f: float, f0: float, q: float, long_f: float, short_f: float) -> float:
    "Phase of the long resonator minus the short one at frequency f."
    return arctan_phase(f, f0 / long_f, q) - arctan_phase(f, f0 / short_f, q)


def conversion_crossings(f0: float, q: float, long_f: float, short_f: float,
                         f_lo: float, f_hi: float, n: int = 20001) -> list[float]:
    "All frequencies in [f_lo, f_hi] where the differential phase hits -pi."
    fs = np.linspace(f_lo, f_hi, n)
    vals = np.array([differential_phase(float(f), f0, q, long_f, short_f) + math.pi for f in fs])
    sign_change = np.where(np.diff(np.sign(vals)) != 0)[0]
    return [
        bisect_root(
            lambda x: differential_phase(x, f0, q, long_f, short_f) + math.pi,
            float(fs[i]),
            float(fs[i + 1]),
        )
        for i in sign_change
    ]


def wrap_pi_scalar(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi
