"""Spherical-harmonic directivity coefficients for sources and receivers.

A transducer mounted on a device radiates (or, through reciprocity, receives)
a field that is fully described outside a transparent sphere of radius r0 by
complex coefficients C_{n,m}(k). This module fits those coefficients from
pressure samples on the sphere, converts between the wave spectrum on the
sphere and the coefficients, and provides the analytic special cases used by
the reference methods (monopole source, point receiver).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import sph
from .errors import ConditioningError, SingularityError

CONDITION_WARN_THRESHOLD = 1e8
HANKEL_MAGNITUDE_FLOOR = 1e-12


@dataclass(frozen=True)
class Medium:
    """Propagation medium: speed of sound in m/s, density in kg/m^3."""

    speed_of_sound: float = 343.0
    density: float = 1.2

    def __post_init__(self):
        if self.speed_of_sound <= 0:
            raise ValueError("speed_of_sound must be positive")
        if self.density <= 0:
            raise ValueError("density must be positive")

    def wavenumbers(self, frequencies_hz) -> np.ndarray:
        return 2.0 * math.pi * np.asarray(frequencies_hz, dtype=np.float64) / self.speed_of_sound


@dataclass(frozen=True)
class SampledSphereField:
    """Complex pressure sampled at J directions on a transparent sphere.

    ``directions`` has shape (J, 2) holding (theta, phi) per sample and
    ``pressure`` has shape (n_freq, J).
    """

    r0: float
    directions: np.ndarray
    frequencies: np.ndarray
    pressure: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "directions", np.asarray(self.directions, dtype=np.float64))
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies, dtype=np.float64))
        object.__setattr__(self, "pressure", np.asarray(self.pressure, dtype=np.complex128))
        if self.r0 <= 0:
            raise ValueError("transparent sphere radius r0 must be positive")
        if self.directions.ndim != 2 or self.directions.shape[1] != 2:
            raise ValueError("directions must have shape (J, 2)")
        if self.pressure.shape != (self.frequencies.size, self.directions.shape[0]):
            raise ValueError("pressure must have shape (n_freq, J)")
        if not np.all(np.isfinite(self.pressure)):
            raise ValueError("pressure samples must be finite")
        rounded = np.round(self.directions, 12)
        if np.unique(rounded, axis=0).shape[0] != self.directions.shape[0]:
            raise ValueError("direction list contains duplicate samples")

    @property
    def n_samples(self) -> int:
        return self.directions.shape[0]


@dataclass(frozen=True)
class Directivity:
    """Per-frequency directivity coefficients C_{n,m}(k) on a reference sphere.

    ``coeffs`` has shape (n_freq, (max_order+1)^2) in the flat layout of
    :func:`deism.sph.sh_index`. ``kind`` is "source" or "receiver"; receiver
    coefficients are interpreted through the reciprocity relation when they
    enter a transfer function.
    """

    r0: float
    max_order: int
    frequencies: np.ndarray
    coeffs: np.ndarray
    kind: str = "source"

    def __post_init__(self):
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies, dtype=np.float64))
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=np.complex128))
        if self.kind not in ("source", "receiver"):
            raise ValueError("kind must be 'source' or 'receiver'")
        if self.r0 < 0:
            raise ValueError("r0 must be non-negative")
        if self.max_order < 0:
            raise ValueError("max_order must be non-negative")
        expected = (self.frequencies.size, (self.max_order + 1) ** 2)
        if self.coeffs.shape != expected:
            raise ValueError(f"coeffs shape {self.coeffs.shape} does not match {expected}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("directivity coefficients must be finite")

    @property
    def n_freq(self) -> int:
        return int(self.frequencies.size)


@dataclass
class FitReport:
    """Per-frequency diagnostics from the least-squares fit."""

    residuals: np.ndarray
    condition_number: float


def fibonacci_sphere_directions(n_points: int) -> np.ndarray:
    """Near-uniform (theta, phi) samples from the Fibonacci spiral."""
    if n_points < 1:
        raise ValueError("need at least one point")
    i = np.arange(n_points, dtype=np.float64)
    z = 1.0 - (2.0 * i + 1.0) / n_points
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.mod(i * math.pi * (3.0 - math.sqrt(5.0)), 2.0 * math.pi)
    return np.column_stack([theta, phi])


def gauss_legendre_sphere_grid(order: int):
    """Gauss-Legendre x uniform-azimuth grid exact for products up to ``order``.

    Returns (directions, weights) with weights summing to 4*pi. Suitable both
    for fitting and for quadrature checks of spherical-harmonic products.
    """
    n_theta = order + 1
    n_phi = 2 * order + 2
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = np.arange(n_phi) * 2.0 * math.pi / n_phi
    th_grid, ph_grid = np.meshgrid(theta, phi, indexing="ij")
    w_grid = np.broadcast_to((wx * 2.0 * math.pi / n_phi)[:, None], th_grid.shape)
    directions = np.column_stack([th_grid.ravel(), ph_grid.ravel()])
    return directions, w_grid.ravel().copy()


def truncation_order(k: float, r0: float) -> int:
    """Smallest order that resolves a sphere of radius r0 at wavenumber k."""
    if k < 0 or r0 < 0:
        raise ValueError("k and r0 must be non-negative")
    return int(math.ceil(k * r0))


def fit_wave_spectrum(field: SampledSphereField, max_order: int):
    """Least-squares spherical wave spectrum P_{n,m}(k, r0) from sampled pressure.

    Solves the overdetermined system P(r_j) = sum_{n,m} P_{n,m} Y_{n,m}(theta_j, phi_j)
    for every frequency at once. Returns (wave_spectrum, FitReport) where
    wave_spectrum has shape (n_freq, (max_order+1)^2).

    Requires J >= (max_order+1)^2 samples; a rank-deficient direction matrix
    raises ConditioningError carrying the condition number.
    """
    n_coeff = (max_order + 1) ** 2
    if field.n_samples < n_coeff:
        raise ValueError(
            f"need at least {n_coeff} samples to fit order {max_order}, got {field.n_samples}"
        )
    basis = sph.sh_matrix(max_order, field.directions[:, 0], field.directions[:, 1])
    a = np.ascontiguousarray(basis.T)  # (J, n_coeff)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    if s[-1] <= s[0] * np.finfo(np.float64).eps * max(a.shape):
        raise ConditioningError(
            f"direction grid is rank deficient for order {max_order} "
            f"(condition number {cond:.3e})"
        )
    if cond > CONDITION_WARN_THRESHOLD:
        warnings.warn(
            f"directivity fit is poorly conditioned (condition number {cond:.3e})",
            RuntimeWarning,
        )
    rhs = field.pressure.T  # (J, n_freq)
    spectrum = (vh.conj().T @ ((u.conj().T @ rhs) / s[:, None])).T
    fitted = (a @ spectrum.T).T
    num = np.linalg.norm(fitted - field.pressure, axis=1)
    den = np.linalg.norm(field.pressure, axis=1)
    residuals = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return spectrum, FitReport(residuals=residuals, condition_number=cond)


def _radial_factors(max_order: int, k: np.ndarray, radius: float) -> np.ndarray:
    """h2_n(k * radius) replicated over modes, shape (n_freq, (max_order+1)^2)."""
    h = sph.hankel2_stack(max_order, k * radius)  # (n_freq, max_order+1)
    n_of = np.concatenate([[n] * (2 * n + 1) for n in range(max_order + 1)])
    return h[:, n_of]


def wave_spectrum_to_coefficients(
    wave_spectrum: np.ndarray,
    r0: float,
    frequencies,
    medium: Medium,
    kind: str = "source",
    magnitude_floor: float = HANKEL_MAGNITUDE_FLOOR,
) -> Directivity:
    """Divide the wave spectrum by the radial factor: C_{n,m} = P_{n,m} / h2_n(k r0).

    Raises ConditioningError naming the offending (n, frequency) when the
    radial factor magnitude falls below ``magnitude_floor``.
    """
    wave_spectrum = np.asarray(wave_spectrum, dtype=np.complex128)
    frequencies = np.asarray(frequencies, dtype=np.float64)
    max_order = int(math.isqrt(wave_spectrum.shape[1])) - 1
    if (max_order + 1) ** 2 != wave_spectrum.shape[1]:
        raise ValueError("wave_spectrum column count must be a perfect square")
    k = medium.wavenumbers(frequencies)
    if np.any(k * r0 <= 0):
        raise ValueError("k * r0 must be positive for every frequency")
    radial = _radial_factors(max_order, k, r0)
    mag = np.abs(radial)
    if np.any(mag < magnitude_floor):
        fi, ci = np.unravel_index(np.argmin(mag), mag.shape)
        n_bad = int(math.isqrt(ci))
        raise ConditioningError(
            f"radial factor |h2_{n_bad}(k r0)| = {mag[fi, ci]:.3e} below floor "
            f"{magnitude_floor:.1e} at f = {frequencies[fi]:g} Hz"
        )
    return Directivity(
        r0=r0,
        max_order=max_order,
        frequencies=frequencies,
        coeffs=wave_spectrum / radial,
        kind=kind,
    )


def fit_directivity(
    field: SampledSphereField, max_order: int, medium: Medium, kind: str = "source"
):
    """Full fitting pipeline: sampled sphere -> wave spectrum -> coefficients."""
    spectrum, report = fit_wave_spectrum(field, max_order)
    d = wave_spectrum_to_coefficients(spectrum, field.r0, field.frequencies, medium, kind)
    return d, report


def receiver_weights_from_reciprocity(d: Directivity, medium: Medium) -> np.ndarray:
    """Receiving-mode weights D_{v,u}(k) = i (-1)^u / k * C_{v,-u}(k).

    The returned array has the same shape and flat layout as ``d.coeffs``.
    """
    k = medium.wavenumbers(d.frequencies)
    if np.any(k <= 0):
        raise ValueError("wavenumbers must be positive")
    out = np.empty_like(d.coeffs)
    for v in range(d.max_order + 1):
        for u in range(-v, v + 1):
            out[:, sph.sh_index(v, u)] = (
                (1j * (-1.0) ** u / k) * d.coeffs[:, sph.sh_index(v, -u)]
            )
    return out


def monopole_coefficients(frequencies, medium: Medium, kind: str = "source") -> Directivity:
    """Order-0 coefficient set of an ideal point transducer: C_00 = -ik/sqrt(4 pi)."""
    frequencies = np.asarray(frequencies, dtype=np.float64)
    k = medium.wavenumbers(frequencies)
    if np.any(k <= 0):
        raise ValueError("monopole coefficients need positive wavenumbers")
    coeffs = (-1j * k / math.sqrt(4.0 * math.pi))[:, None]
    return Directivity(r0=0.0, max_order=0, frequencies=frequencies, coeffs=coeffs, kind=kind)


def point_receiver_coefficients(
    frequencies,
    medium: Medium,
    d_y: float,
    theta_y: float,
    phi_y: float,
    max_order: int | None = None,
) -> Directivity:
    """Coefficients of an open observation point at offset (d_y, theta_y, phi_y).

    C_{v,u}(k) = -ik j_v(k d_y) conj(Y_{v,u}(theta_y, phi_y)) up to the
    per-frequency truncation ceil(k d_y); entries above that order are zero.
    ``max_order`` caps the stored order (defaults to the largest per-frequency
    truncation). d_y = 0 degenerates to the omnidirectional receiver.
    """
    frequencies = np.asarray(frequencies, dtype=np.float64)
    if d_y < 0:
        raise ValueError("observation offset d_y must be non-negative")
    k = medium.wavenumbers(frequencies)
    if np.any(k <= 0):
        raise ValueError("point receiver needs positive wavenumbers")
    if d_y == 0.0:
        return monopole_coefficients(frequencies, medium, kind="receiver")
    v_per_freq = np.ceil(k * d_y).astype(int)
    vmax = int(v_per_freq.max()) if max_order is None else int(max_order)
    coeffs = np.zeros((frequencies.size, (vmax + 1) ** 2), dtype=np.complex128)
    y = sph.sh_matrix(vmax, theta_y, phi_y)
    for v in range(vmax + 1):
        jv = sph.spherical_bessel_j(v, k * d_y)
        active = v <= v_per_freq
        for u in range(-v, v + 1):
            col = sph.sh_index(v, u)
            coeffs[active, col] = (-1j * k * jv * np.conj(y[col]))[active]
    return Directivity(
        r0=d_y, max_order=vmax, frequencies=frequencies, coeffs=coeffs, kind="receiver"
    )


def rotate_azimuth(d: Directivity, delta_phi: float) -> Directivity:
    """Yaw the directivity pattern by ``delta_phi`` about the vertical axis.

    C'_{n,m} = C_{n,m} e^{-i m delta_phi}, so that evaluating the rotated set
    at azimuth phi equals evaluating the original at phi - delta_phi.
    """
    m_of = np.concatenate(
        [np.arange(-n, n + 1) for n in range(d.max_order + 1)]
    )
    phase = np.exp(-1j * m_of * float(delta_phi))
    return Directivity(
        r0=d.r0,
        max_order=d.max_order,
        frequencies=d.frequencies,
        coeffs=d.coeffs * phase[None, :],
        kind=d.kind,
    )


def evaluate_exterior_field(d: Directivity, r: float, theta: float, phi: float, medium: Medium):
    """Pressure radiated by the coefficient set at one exterior point, per frequency.

    P(k) = sum_{n,m} C_{n,m}(k) h2_n(k r) Y_{n,m}(theta, phi). Warns when the
    point lies inside the reference sphere; fails at r = 0.
    """
    if r == 0:
        raise SingularityError("exterior field is singular at r = 0")
    if r < 0:
        raise ValueError("radius must be positive")
    if 0 < r < d.r0:
        warnings.warn(
            f"evaluating at r = {r:g} m inside the reference sphere r0 = {d.r0:g} m",
            RuntimeWarning,
        )
    k = medium.wavenumbers(d.frequencies)
    radial = _radial_factors(d.max_order, k, r)
    y = sph.sh_matrix(d.max_order, theta, phi)
    return (d.coeffs * radial) @ y


def extrapolate_to_radius(d: Directivity, r_meas: float, medium: Medium) -> np.ndarray:
    """Wave spectrum on a measurement sphere: C~_{n,m}(k) = C_{n,m}(k) h2_n(k r_meas)."""
    if r_meas <= 0:
        raise ValueError("measurement radius must be positive")
    k = medium.wavenumbers(d.frequencies)
    return d.coeffs * _radial_factors(d.max_order, k, r_meas)


def synthetic_directivity(
    max_order: int,
    frequencies,
    medium: Medium,
    r0: float,
    kind: str = "source",
    seed: int = 0,
    order_decay: float = 0.5,
) -> Directivity:
    """Reproducible random coefficient set for studies and benchmarks.

    Draws a complex-normal wave spectrum on the reference sphere, decaying by
    ``order_decay`` per order, and divides by the radial factor h2_n(k r0).
    Orders beyond k r0 are therefore suppressed the way a physical radiator
    confined to the sphere suppresses them. The order-0 scale matches the
    ideal point transducer so magnitudes are comparable across frequency.
    The same seed always yields the same coefficients.
    """
    if r0 <= 0:
        raise ValueError("synthetic directivity needs a positive reference radius")
    frequencies = np.asarray(frequencies, dtype=np.float64)
    k = medium.wavenumbers(frequencies)
    if np.any(k <= 0):
        raise ValueError("synthetic directivity needs positive wavenumbers")
    rng = np.random.default_rng(seed)
    n_coeff = (max_order + 1) ** 2
    n_of = np.concatenate([[n] * (2 * n + 1) for n in range(max_order + 1)])
    draw = rng.standard_normal((frequencies.size, n_coeff)) + 1j * rng.standard_normal(
        (frequencies.size, n_coeff)
    )
    radial = _radial_factors(max_order, k, r0)
    sphere_scale = np.abs(radial[:, :1])  # |h2_0(k r0)|, the monopole radial magnitude
    scale = (-1j * k / math.sqrt(4.0 * math.pi))[:, None]
    coeffs = scale * draw * (order_decay ** n_of)[None, :] * sphere_scale / radial
    return Directivity(
        r0=r0, max_order=max_order, frequencies=frequencies, coeffs=coeffs, kind=kind
    )
