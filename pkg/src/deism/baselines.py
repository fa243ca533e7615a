"""Reference transfer-function methods: ISM-Omni, GISM, and FSRR.

ISM-Omni sums attenuated free-space Green's functions over image paths. GISM
couples a directional source to an open observation point near the receiver
origin through the mode-coupling machinery. FSRR is a far-field baseline with
per-path random signs and directivity coefficients extrapolated to a 1 m
measurement sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import sph
from .coupling import FOUR_PI, CouplingContext, PathGeometry
from .directivity import Directivity, extrapolate_to_radius, truncation_order
from .errors import ConfigError, SingularityError
from .kernels import coupled_path_sum, factored_path_sum
from .parallel import DEFAULT_CHUNK_SIZE, chunk_slices, run_tasks
from .room import RoomSpec, generate_images

METHOD_TAGS = ("ISM_OMNI", "GISM", "FSRR", "DEISM", "DEISM_LC")


@dataclass(frozen=True)
class RtfSpectrum:
    """Complex transfer-function values on a strictly increasing frequency grid."""

    frequencies: np.ndarray
    values: np.ndarray
    method_tag: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies, dtype=np.float64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128))
        if self.method_tag not in METHOD_TAGS:
            raise ValueError(f"unknown method tag {self.method_tag!r}")
        if self.frequencies.ndim != 1 or self.frequencies.shape != self.values.shape:
            raise ValueError("frequencies and values must be 1-D arrays of equal length")
        if self.frequencies.size and np.any(np.diff(self.frequencies) <= 0):
            raise ValueError("frequencies must be strictly increasing")


def assert_same_grid(a: RtfSpectrum | Directivity, b: RtfSpectrum | Directivity):
    if not np.array_equal(a.frequencies, b.frequencies):
        raise ConfigError("frequency grids differ; no interpolation is performed")


@dataclass(frozen=True)
class FsrrConfig:
    """Randomized-sign settings for the FSRR baseline.

    ``sign_mode`` selects the per-path factor: "set" draws from {+1, -1},
    "interval" draws uniformly from [-1, 1], "all_plus" fixes +1 (useful for
    single-term checks). The same seed always yields the same sign sequence,
    tied to the deterministic image ordering.
    """

    rng_seed: int = 0
    measurement_radius: float = 1.0
    sign_mode: str = "set"

    def __post_init__(self):
        if self.sign_mode not in ("set", "interval", "all_plus"):
            raise ValueError("sign_mode must be 'set', 'interval', or 'all_plus'")
        if self.measurement_radius <= 0:
            raise ValueError("measurement_radius must be positive")

    def draw_signs(self, n_paths: int) -> np.ndarray:
        rng = np.random.default_rng(self.rng_seed)
        if self.sign_mode == "set":
            return rng.integers(0, 2, size=n_paths).astype(np.float64) * 2.0 - 1.0
        if self.sign_mode == "interval":
            return rng.uniform(-1.0, 1.0, size=n_paths)
        return np.ones(n_paths)


def greens_function(d, k):
    """Free-space Green's function e^{-ikd} / (4 pi d)."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0):
        raise SingularityError("Green's function is singular at zero distance")
    return np.exp(-1j * np.asarray(k) * d) / (FOUR_PI * d)


def _reduce_spectrum(frequencies, n_images, per_chunk, chunk_size, workers):
    """Run (frequency, chunk) tasks and reduce chunk partials in order."""
    slices = chunk_slices(n_images, chunk_size) if n_images else []
    keys = [(fi, ci) for fi in range(len(frequencies)) for ci in range(len(slices))]
    results = run_tasks(lambda key: per_chunk(key[0], slices[key[1]]), keys, workers)
    values = np.zeros(len(frequencies), dtype=np.complex128)
    ops = 0
    for fi in range(len(frequencies)):
        for ci in range(len(slices)):
            part, part_ops = results[(fi, ci)]
            values[fi] += part
            ops += part_ops
    return values, ops


def ism_omni_spectrum(
    room: RoomSpec,
    src,
    rcv,
    max_reflection_order: int,
    frequencies,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
) -> RtfSpectrum:
    """Point-source/omnidirectional-receiver transfer function over a grid."""
    frequencies = np.asarray(frequencies, dtype=np.float64)
    src = np.asarray(src, dtype=np.float64)
    rcv = np.asarray(rcv, dtype=np.float64)
    if np.allclose(src, rcv):
        raise SingularityError("source and receiver positions coincide")
    images = generate_images(room, src, rcv, max_reflection_order)
    k_all = room.medium.wavenumbers(frequencies)
    beta = images.attenuation
    dists = images.distances

    def per_chunk(fi, sl):
        k = k_all[fi]
        part = np.sum(beta[sl] * np.exp(-1j * k * dists[sl]) / (FOUR_PI * dists[sl]))
        return complex(part), dists[sl].size

    values, _ = _reduce_spectrum(frequencies, len(images), per_chunk, chunk_size, workers)
    return RtfSpectrum(frequencies=frequencies, values=values, method_tag="ISM_OMNI")


def rtf_ism_omni(room: RoomSpec, src, rcv, max_reflection_order: int, k: float) -> complex:
    """Single-wavenumber ISM-Omni value."""
    f = k * room.medium.speed_of_sound / (2.0 * math.pi)
    spec = ism_omni_spectrum(room, src, rcv, max_reflection_order, [f])
    return complex(spec.values[0])


def gism_spectrum(
    c_src: Directivity,
    d_y: float,
    theta_y: float,
    phi_y: float,
    room: RoomSpec,
    src,
    rcv,
    max_reflection_order: int,
    v_cap: int = 30,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
) -> RtfSpectrum:
    """Directional source to an open observation point offset from the receiver.

    The receiver-side weight of mode (v, u) is j_v(k d_y) Y_{v,u}(theta_y, phi_y)
    with the per-frequency truncation ceil(k d_y), capped at ``v_cap``.
    """
    if d_y < 0:
        raise ValueError("observation offset must be non-negative")
    frequencies = c_src.frequencies
    k_all = room.medium.wavenumbers(frequencies)
    v_max = min(max(truncation_order(float(k), d_y) for k in k_all), int(v_cap))
    ctx = CouplingContext.build(c_src.max_order, v_max)
    images = generate_images(room, np.asarray(src, float), np.asarray(rcv, float),
                             max_reflection_order)
    geo = PathGeometry(images)
    y_si = geo.sh_cache("outgoing", ctx.n_max + ctx.v_max)

    y_obs = sph.sh_matrix(v_max, theta_y, phi_y)
    rw_all = np.zeros((frequencies.size, (v_max + 1) ** 2), dtype=np.complex128)
    for fi, k in enumerate(k_all):
        v_k = min(truncation_order(float(k), d_y), v_max)
        for v in range(v_k + 1):
            jv = sph.spherical_bessel_j(v, k * d_y)
            for u in range(-v, v + 1):
                col = sph.sh_index(v, u)
                rw_all[fi, col] = jv * y_obs[col]

    lmax = ctx.n_max + ctx.v_max

    def per_chunk(fi, sl):
        k = float(k_all[fi])
        hl = sph.hankel2_stack(lmax, k * geo.dists[sl])
        return coupled_path_sum(
            hl, y_si[sl], images.attenuation[sl], geo.msign[sl], geo.lam_m[sl],
            geo.lam_n[sl], c_src.coeffs[fi], rw_all[fi], ctx.w1x, ctx.wigner.w2,
            ctx.il, ctx.ivn,
        )

    values, _ = _reduce_spectrum(frequencies, len(images), per_chunk, chunk_size, workers)
    return RtfSpectrum(frequencies=frequencies, values=values, method_tag="GISM")


def rtf_gism(
    c_src: Directivity,
    d_y: float,
    theta_y: float,
    phi_y: float,
    room: RoomSpec,
    src,
    rcv,
    max_reflection_order: int,
    k: float,
    v_cap: int = 30,
) -> complex:
    """Single-wavenumber GISM value; k must correspond to a grid frequency."""
    f = k * room.medium.speed_of_sound / (2.0 * math.pi)
    fi = int(np.argmin(np.abs(c_src.frequencies - f)))
    if not math.isclose(c_src.frequencies[fi], f, rel_tol=1e-9):
        raise ConfigError(f"wavenumber {k:g} does not match the directivity grid")
    sub = Directivity(
        r0=c_src.r0,
        max_order=c_src.max_order,
        frequencies=c_src.frequencies[fi : fi + 1],
        coeffs=c_src.coeffs[fi : fi + 1],
        kind=c_src.kind,
    )
    spec = gism_spectrum(sub, d_y, theta_y, phi_y, room, src, rcv,
                         max_reflection_order, v_cap)
    return complex(spec.values[0])


def fsrr_spectrum(
    c_src: Directivity,
    c_rcv: Directivity,
    room: RoomSpec,
    src,
    rcv,
    max_reflection_order: int,
    cfg: FsrrConfig,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
) -> RtfSpectrum:
    """Far-field baseline with randomized per-path signs.

    Per path: B * beta * e^{-ikd}/d times the two directivity sums, with the
    source harmonics taken along the reversed path and coefficients
    extrapolated to the measurement sphere. Note the 1/d spreading factor
    carries no 1/(4 pi); the method is implemented as defined.
    """
    assert_same_grid(c_src, c_rcv)
    frequencies = c_src.frequencies
    k_all = room.medium.wavenumbers(frequencies)
    images = generate_images(room, np.asarray(src, float), np.asarray(rcv, float),
                             max_reflection_order)
    geo = PathGeometry(images)
    y_src = geo.sh_cache("reversed", c_src.max_order)
    y_rcv = geo.sh_cache("incoming", c_rcv.max_order)
    signs = cfg.draw_signs(len(images))

    cs_tilde = extrapolate_to_radius(c_src, cfg.measurement_radius, room.medium)
    cr_tilde = extrapolate_to_radius(c_rcv, cfg.measurement_radius, room.medium)

    def per_chunk(fi, sl):
        k = float(k_all[fi])
        pref = (
            signs[sl]
            * images.attenuation[sl]
            * np.exp(-1j * k * geo.dists[sl])
            / geo.dists[sl]
        )
        return factored_path_sum(pref, y_src[sl], y_rcv[sl], cs_tilde[fi], cr_tilde[fi])

    values, _ = _reduce_spectrum(frequencies, len(images), per_chunk, chunk_size, workers)
    return RtfSpectrum(
        frequencies=frequencies,
        values=values,
        method_tag="FSRR",
        metadata={"rng_seed": cfg.rng_seed, "sign_mode": cfg.sign_mode},
    )


def rtf_fsrr(
    c_src: Directivity,
    c_rcv: Directivity,
    room: RoomSpec,
    src,
    rcv,
    max_reflection_order: int,
    k: float,
    cfg: FsrrConfig,
) -> complex:
    """Single-wavenumber FSRR value; k must correspond to a grid frequency."""
    f = k * room.medium.speed_of_sound / (2.0 * math.pi)
    fi = int(np.argmin(np.abs(c_src.frequencies - f)))
    if not math.isclose(c_src.frequencies[fi], f, rel_tol=1e-9):
        raise ConfigError(f"wavenumber {k:g} does not match the directivity grid")
    spec = fsrr_spectrum(c_src, c_rcv, room, src, rcv, max_reflection_order, cfg)
    return complex(spec.values[fi])
