"""Array far-field computation and the evaluation metrics built on it.

The radiated field is the direct superposition
E(theta, phi) = cos^q_e(theta) * sum_mn exc_mn exp(j k (x u + y v)),
u = sin(theta) cos(phi), v = sin(theta) sin(phi).  Per observation point the
element sum always runs in row-major order, so results are reproducible at
any worker count.  Directivity integrates over the upper hemisphere only:
a reflective array radiates into a half space.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .synthesis import ArrayGeometry, FeedSpec, PhaseMap, StateMap, feed_field
from .util import resolve_threads, wavenumber, wrap_two_pi

# Cancellation metrics bottom out here instead of diverging to -inf.
DB_FLOOR = -60.0

# A summed field below this fraction of the total excitation magnitude is
# indistinguishable from float cancellation noise and treated as zero.
ZERO_FIELD_RTOL = 1e-12

DEFAULT_THETA_POINTS = 181
DEFAULT_PHI_POINTS = 361


def default_theta_samples(n: int = DEFAULT_THETA_POINTS) -> np.ndarray:
    "Uniform theta samples covering [0, pi/2]."
    return np.linspace(0.0, np.pi / 2, n)


def default_phi_samples(n: int = DEFAULT_PHI_POINTS) -> np.ndarray:
    "Uniform phi samples covering [0, 2*pi), endpoint excluded."
    return np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)


@dataclass(frozen=True)
class FieldGrid:
    "Complex field sampled on a (theta, phi) grid, with run metadata."

    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray
    freq: float
    geometry: ArrayGeometry
    q_e: float

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if theta.ndim != 1 or phi.ndim != 1:
            raise ValueError("sample axes must be one-dimensional")
        if np.any(np.diff(theta) <= 0) or np.any(np.diff(phi) <= 0):
            raise ValueError("sample axes must be strictly increasing")
        if self.values.shape != (len(theta), len(phi)):
            raise ValueError("field values must be shaped (n_theta, n_phi)")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def radiated_field(
    geom: ArrayGeometry,
    exc: np.ndarray,
    f: float,
    theta_samples: np.ndarray,
    phi_samples: np.ndarray,
    q_e: float = 1.0,
    threads: int | None = None,
) -> FieldGrid:
    """Superpose the element contributions over an observation grid.

    exc is the rows x cols complex excitation (illumination times reflection
    coefficient).  Observation points are independent and are chunked across
    `threads` workers (XRIS_THREADS caps the default); the per-point element
    sum runs in fixed row-major order, so the output is bit-identical at any
    worker count.
    """
    exc = np.asarray(exc, dtype=complex)
    if exc.size == 0:
        raise ValueError("excitation is empty")
    if exc.shape != geom.shape:
        raise ValueError(
            f"excitation shape {exc.shape} does not match geometry {geom.shape}"
        )
    if not np.all(np.isfinite(exc)):
        raise ValueError("excitation entries must be finite")
    theta = np.asarray(theta_samples, dtype=float)
    phi = np.asarray(phi_samples, dtype=float)
    if len(theta) < 2 or len(phi) < 2:
        raise ValueError("need at least 2 samples per axis")
    if f <= 0:
        raise ValueError("frequency must be positive")

    k = wavenumber(f)
    x, y = geom.xy()
    xe = x.ravel()
    ye = y.ravel()
    ce = exc.ravel()
    sin_t = np.sin(theta)
    u = sin_t[:, None] * np.cos(phi)[None, :]
    v = sin_t[:, None] * np.sin(phi)[None, :]
    element_factor = np.power(np.cos(theta), q_e)[:, None]

    out = np.empty((len(theta), len(phi)), dtype=complex)

    def fill(rows: slice):
        usub = u[rows]
        vsub = v[rows]
        acc = np.zeros(usub.shape, dtype=complex)
        for n in range(len(ce)):  # fixed element order
            acc += ce[n] * np.exp(1j * k * (xe[n] * usub + ye[n] * vsub))
        out[rows] = element_factor[rows] * acc

    n_workers = min(resolve_threads(threads), len(theta))
    if n_workers <= 1:
        fill(slice(0, len(theta)))
    else:
        bounds = np.linspace(0, len(theta), n_workers + 1, dtype=int)
        chunks = [slice(bounds[i], bounds[i + 1]) for i in range(n_workers)]
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(fill, chunks))

    return FieldGrid(theta=theta, phi=phi, values=out, freq=f, geometry=geom, q_e=q_e)


def field_at(
    geom: ArrayGeometry,
    exc: np.ndarray,
    f: float,
    theta: float,
    phi: float,
    q_e: float = 1.0,
) -> complex:
    "Field of the excitation at a single observation direction."
    exc = np.asarray(exc, dtype=complex)
    if exc.shape != geom.shape:
        raise ValueError(
            f"excitation shape {exc.shape} does not match geometry {geom.shape}"
        )
    k = wavenumber(f)
    x, y = geom.xy()
    u = np.sin(theta) * np.cos(phi)
    v = np.sin(theta) * np.sin(phi)
    total = np.sum(exc * np.exp(1j * k * (x * u + y * v)))
    return complex(np.cos(theta) ** q_e * total)


def _parabolic_offset(x: np.ndarray, y: np.ndarray) -> float:
    """Vertex abscissa of the parabola through three points, as an offset
    from the middle point.  Returns 0 when the points are degenerate."""
    x0, x1, x2 = x
    y0, y1, y2 = y
    denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if denom == 0:
        return 0.0
    num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    return float(-num / (2.0 * denom))


def peak_direction(grid: FieldGrid) -> tuple[float, float]:
    """Direction of maximum field magnitude, refined off-grid.

    The discrete argmax (ties resolve to smallest theta, then smallest phi)
    is refined by a 3-point parabolic fit on log-magnitude along each axis.
    The phi axis wraps; the theta axis skips refinement at its borders.
    """
    mag = grid.magnitude()
    if mag.size == 0:
        raise ValueError("empty field grid")
    it, ip = np.unravel_index(int(np.argmax(mag)), mag.shape)
    theta_pk = float(grid.theta[it])
    phi_pk = float(grid.phi[ip])

    def log_mag(t_idx, p_idx):
        m = mag[t_idx, p_idx % mag.shape[1]]
        return np.log10(m) if m > 0 else None

    # theta axis: interior points only
    if 0 < it < mag.shape[0] - 1:
        ys = [log_mag(it - 1, ip), log_mag(it, ip), log_mag(it + 1, ip)]
        if None not in ys:
            xs = grid.theta[it - 1 : it + 2]
            theta_pk = float(grid.theta[it] + _parabolic_offset(xs, np.array(ys)))

    # phi axis: periodic wrap when the grid spans the full circle uniformly
    n_phi = mag.shape[1]
    if n_phi >= 3:
        step = grid.phi[1] - grid.phi[0]
        uniform = np.allclose(np.diff(grid.phi), step)
        full_circle = uniform and np.isclose(grid.phi[0] + 2 * np.pi, grid.phi[-1] + step)
        ys = None
        if full_circle:
            ys = [log_mag(it, ip - 1), log_mag(it, ip), log_mag(it, ip + 1)]
            xs = np.array([-step, 0.0, step]) + grid.phi[ip]
        elif 0 < ip < n_phi - 1:
            ys = [log_mag(it, ip - 1), log_mag(it, ip), log_mag(it, ip + 1)]
            xs = grid.phi[ip - 1 : ip + 2]
        if ys is not None and None not in ys:
            phi_pk = float(
                wrap_two_pi(grid.phi[ip] + _parabolic_offset(xs, np.array(ys)))
            )
    return theta_pk, phi_pk


def _hemisphere_power(grid: FieldGrid) -> float:
    "Quadrature of |E|^2 sin(theta) over the sampled hemisphere."
    power = grid.magnitude() ** 2 * np.sin(grid.theta)[:, None]
    phi = grid.phi
    step = phi[1] - phi[0] if len(phi) > 1 else 0.0
    if np.allclose(np.diff(phi), step) and np.isclose(phi[0] + 2 * np.pi, phi[-1] + step):
        # endpoint-free full circle: close the period for the trapezoid
        phi = np.append(phi, phi[0] + 2 * np.pi)
        power = np.concatenate([power, power[:, :1]], axis=1)
    inner = np.trapezoid(power, x=phi, axis=1)
    return float(np.trapezoid(inner, x=grid.theta))


def directivity(grid: FieldGrid, theta: float, phi: float) -> float:
    """Directivity in dB toward (theta, phi), from hemisphere quadrature.

    D = 4 pi |E|^2 / integral(|E|^2 sin(theta)); the field is read at the
    nearest grid sample.  The grid must sample the hemisphere densely
    enough that halving the step moves the result by < 0.05 dB.
    """
    total = _hemisphere_power(grid)
    if total <= 0.0:
        raise ValueError("total radiated power is zero")
    it = int(np.argmin(np.abs(grid.theta - theta)))
    dphi = np.abs(wrap_two_pi(grid.phi) - wrap_two_pi(phi))
    ip = int(np.argmin(np.minimum(dphi, 2 * np.pi - dphi)))
    d_lin = 4.0 * np.pi * grid.magnitude()[it, ip] ** 2 / total
    if d_lin <= 0.0:
        raise ValueError("field is zero toward the requested direction")
    return float(10.0 * np.log10(d_lin))


def excitation_from_phases(
    pmap: PhaseMap, feed: FeedSpec, f: float
) -> np.ndarray:
    "Feed illumination times the unit-magnitude phase-only reflection."
    return feed_field(pmap.geometry, feed, f) * np.exp(1j * pmap.phases)


def excitation_from_statemap(
    smap: StateMap, feed: FeedSpec, f: float, band: int = 1
) -> np.ndarray:
    """Feed illumination times the complex codebook coefficients.

    band selects the coefficient set of dual-band books (1 or 2).
    """
    if band == 1:
        coeffs = smap.book.coeffs()
    elif band == 2:
        per_state = [s.coeff2 for s in smap.book.states]
        if any(c is None for c in per_state):
            raise ValueError("codebook has no second-band coefficients")
        coeffs = np.array(per_state, dtype=complex)
    else:
        raise ValueError("band must be 1 or 2")
    return feed_field(smap.geometry, feed, f) * coeffs[smap.indices]


def quantization_loss(
    geom: ArrayGeometry,
    feed: FeedSpec,
    f: float,
    continuous: PhaseMap,
    smap: StateMap,
    direction: tuple[float, float],
) -> float:
    """Field loss of the quantized map against the continuous map, in dB.

    Both excitations carry identical feed amplitudes and unit-magnitude
    element phases (the continuous map's phase vs. the assigned codebook
    state's phase), so the ratio isolates pure phase-quantization loss.
    It is <= 0 whenever the continuous map is the conjugate optimum for
    `direction`.
    """
    if continuous.geometry != geom or smap.geometry != geom:
        raise ValueError("phase map and state map must share the geometry")
    theta, phi = direction
    exc_c = excitation_from_phases(continuous, feed, f)
    quant = PhaseMap(smap.state_phases(), geom)
    exc_q = excitation_from_phases(quant, feed, f)
    zero_tol = ZERO_FIELD_RTOL * float(np.sum(np.abs(exc_c)))
    e_c = abs(field_at(geom, exc_c, f, theta, phi))
    if e_c <= zero_tol:
        raise ValueError("continuous-phase field is zero toward the direction")
    e_q = abs(field_at(geom, exc_q, f, theta, phi))
    if e_q <= zero_tol:
        return DB_FLOOR
    return float(20.0 * np.log10(e_q / e_c))


def oam_spectrum(
    grid: FieldGrid, theta_ring: float, ell_max: int
) -> tuple[np.ndarray, np.ndarray]:
    """Azimuthal mode purity on a constant-theta ring.

    Returns (ells, purity) for ell in [-ell_max, ell_max]: purity_ell is the
    normalized |DFT coefficient|^2 of the ring field.  Requires theta_ring
    to be a grid sample and uniform full-circle phi sampling with more than
    2 * ell_max points.
    """
    if ell_max < 0:
        raise ValueError("ell_max must be >= 0")
    matches = np.where(np.isclose(grid.theta, theta_ring, rtol=0.0, atol=1e-12))[0]
    if len(matches) == 0:
        raise ValueError(f"theta_ring {theta_ring} is not one of the grid samples")
    phi = grid.phi
    if len(phi) <= 2 * ell_max:
        raise ValueError("phi sampling must exceed 2 * ell_max points")
    step = phi[1] - phi[0]
    if not (
        np.allclose(np.diff(phi), step)
        and np.isclose(phi[0] + 2 * np.pi, phi[-1] + step)
    ):
        raise ValueError("phi sampling must be uniform over the full circle")
    ring = grid.values[int(matches[0]), :]
    ells = np.arange(-ell_max, ell_max + 1)
    coeffs = np.array([np.mean(ring * np.exp(-1j * ell * phi)) for ell in ells])
    weights = np.abs(coeffs) ** 2
    total = float(np.sum(weights))
    if total == 0.0:
        raise ValueError("ring field is identically zero")
    return ells, weights / total


def boresight_reduction(
    geom: ArrayGeometry,
    coded: np.ndarray,
    reference: np.ndarray,
    f: float,
) -> float:
    """Boresight backscatter of a coded surface relative to a reference, dB.

    Both excitations must share the geometry and have uniform magnitude
    (pure 0/pi coding); the reference is conventionally the all-zero-phase
    surface.  Results are floored at -60 dB.
    """
    coded = np.asarray(coded, dtype=complex)
    reference = np.asarray(reference, dtype=complex)
    if coded.shape != geom.shape or reference.shape != geom.shape:
        raise ValueError("excitation shapes must match the geometry")
    for name, exc in (("coded", coded), ("reference", reference)):
        mags = np.abs(exc)
        if not np.allclose(mags, mags.flat[0], rtol=1e-9, atol=0.0):
            raise ValueError(f"{name} excitation magnitude is not uniform")
    zero_tol = ZERO_FIELD_RTOL * float(np.sum(np.abs(reference)))
    e_ref = abs(field_at(geom, reference, f, 0.0, 0.0, q_e=0.0))
    if e_ref <= zero_tol:
        raise ValueError("reference boresight field is zero")
    e_cod = abs(field_at(geom, coded, f, 0.0, 0.0, q_e=0.0))
    if e_cod <= zero_tol:
        return DB_FLOOR
    return float(max(20.0 * np.log10(e_cod / e_ref), DB_FLOOR))
