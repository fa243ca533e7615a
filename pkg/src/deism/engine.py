"""Transfer functions between two directional transducers: full and far-field.

The full method contracts source coefficients with receiver coefficients
through mirrored, attenuated mode-coupling sums over all image paths. The
far-field variant (tagged LC) replaces the radial coupling sum by its
large-argument limit, which factorizes each path into a product of one
source-side and one receiver-side spherical-harmonic sum; it is exact for
order-0 patterns and converges to the full method as path length grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import sph
from .baselines import RtfSpectrum
from .coupling import (
    FOUR_PI,
    CouplingContext,
    PathGeometry,
    cart_to_sph,
    mirror_mode_sign,
    mirror_parity,
)
from .directivity import (
    Directivity,
    receiver_weights_from_reciprocity,
    rotate_azimuth,
    truncation_order,
)
from .errors import ConfigError, SingularityError
from .kernels import coupled_path_sum, factored_path_sum, ipow_table
from .parallel import DEFAULT_CHUNK_SIZE, chunk_slices, run_tasks
from .room import ImageRecord, ImageSet, RoomSpec, TransducerPose, generate_images, path_vectors, reversed_path_indices

MIRROR_IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class DeismRequest:
    """One simulation request: geometry, directivities, grid, and method.

    The directivity grids and the request grid must be identical. The two
    reference spheres must not overlap unless a direct-path override spectrum
    is supplied; with an override, the direct path term is replaced by the
    supplied values.
    """

    room: RoomSpec
    src_pose: TransducerPose
    rcv_pose: TransducerPose
    c_src: Directivity
    c_rcv: Directivity
    max_reflection_order: int
    frequencies: np.ndarray
    method: str = "FULL"
    direct_path_override: RtfSpectrum | None = None
    adaptive_truncation: bool = False
    n_m: int | None = None
    chunk_size: int = DEFAULT_CHUNK_SIZE
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies, dtype=np.float64))
        if self.method not in ("FULL", "LC"):
            raise ConfigError(f"method must be 'FULL' or 'LC', got {self.method!r}")
        if self.max_reflection_order < 0:
            raise ConfigError("max_reflection_order must be non-negative")
        if self.frequencies.ndim != 1 or self.frequencies.size == 0:
            raise ConfigError("frequency grid must be a non-empty 1-D array")
        if np.any(self.frequencies <= 0) or np.any(np.diff(self.frequencies) <= 0):
            raise ConfigError("frequencies must be positive and strictly increasing")
        try:
            self.src_pose.validate_inside(self.room)
            self.rcv_pose.validate_inside(self.room)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.c_src.kind != "source":
            raise ConfigError("c_src must have kind 'source'")
        if self.c_rcv.kind != "receiver":
            raise ConfigError("c_rcv must have kind 'receiver'")
        for d in (self.c_src, self.c_rcv):
            if not np.array_equal(d.frequencies, self.frequencies):
                raise ConfigError("directivity grids must match the request grid exactly")
        gap = float(
            np.linalg.norm(np.subtract(self.src_pose.position, self.rcv_pose.position))
        )
        if self.direct_path_override is None:
            if gap <= self.c_src.r0 + self.c_rcv.r0:
                raise ConfigError(
                    f"reference spheres overlap (separation {gap:g} m <= "
                    f"{self.c_src.r0:g} + {self.c_rcv.r0:g} m); supply a direct-path override"
                )
        else:
            if not np.array_equal(self.direct_path_override.frequencies, self.frequencies):
                raise ConfigError("direct-path override grid must match the request grid")

    def with_method(self, method: str) -> "DeismRequest":
        return replace(self, method=method)


@dataclass
class SimulationStats:
    """Bookkeeping from one spectrum computation."""

    n_images: int
    coupling_terms: int


def _oriented_coeffs(req: DeismRequest):
    c_src = rotate_azimuth(req.c_src, req.src_pose.yaw)
    c_rcv = rotate_azimuth(req.c_rcv, req.rcv_pose.yaw)
    return c_src, c_rcv


def _request_images(req: DeismRequest) -> ImageSet:
    images = generate_images(
        req.room,
        req.src_pose.position,
        req.rcv_pose.position,
        req.max_reflection_order,
        n_m=req.n_m,
    )
    if req.direct_path_override is not None:
        keep = images.reflection_order > 0
        images = ImageSet(
            p=images.p[keep].copy(),
            q=images.q[keep].copy(),
            positions=images.positions[keep].copy(),
            r_si_to_r=images.r_si_to_r[keep].copy(),
            r_s_to_ri_rev=images.r_s_to_ri_rev[keep].copy(),
            attenuation=images.attenuation[keep].copy(),
            reflection_order=images.reflection_order[keep].copy(),
        )
    return images


def _adaptive_mask(coeffs: np.ndarray, max_order: int, k_all: np.ndarray, r0: float):
    """Zero coefficients above the per-frequency resolvable order ceil(k r0)."""
    if r0 <= 0:
        return coeffs
    out = coeffs.copy()
    n_of = np.concatenate([[n] * (2 * n + 1) for n in range(max_order + 1)])
    for fi, k in enumerate(k_all):
        lim = truncation_order(float(k), r0)
        out[fi, n_of > lim] = 0.0
    return out


def deism_spectrum(req: DeismRequest):
    """Compute the requested spectrum; returns (RtfSpectrum, SimulationStats)."""
    c_src, c_rcv = _oriented_coeffs(req)
    images = _request_images(req)
    frequencies = req.frequencies
    k_all = req.room.medium.wavenumbers(frequencies)
    n_max, v_max = c_src.max_order, c_rcv.max_order

    cs_all = c_src.coeffs
    if req.adaptive_truncation:
        cs_all = _adaptive_mask(cs_all, n_max, k_all, req.c_src.r0)
        cr_masked = _adaptive_mask(c_rcv.coeffs, v_max, k_all, req.c_rcv.r0)
        c_rcv = Directivity(
            r0=c_rcv.r0, max_order=v_max, frequencies=frequencies,
            coeffs=cr_masked, kind="receiver",
        )

    ops_total = 0
    values = np.zeros(frequencies.size, dtype=np.complex128)
    if len(images):
        geo = PathGeometry(images)
        if req.method == "FULL":
            ctx = CouplingContext.build(n_max, v_max)
            lmax = n_max + v_max
            y_si = geo.sh_cache("outgoing", lmax)
            rw_all = receiver_weights_from_reciprocity(c_rcv, req.room.medium)

            def per_chunk(fi, sl):
                k = float(k_all[fi])
                hl = sph.hankel2_stack(lmax, k * geo.dists[sl])
                return coupled_path_sum(
                    hl, y_si[sl], images.attenuation[sl], geo.msign[sl],
                    geo.lam_m[sl], geo.lam_n[sl], cs_all[fi], rw_all[fi],
                    ctx.w1x, ctx.wigner.w2, ctx.il, ctx.ivn,
                )

        else:
            y_src = geo.sh_cache("reversed", n_max)
            y_rcv = geo.sh_cache("incoming", v_max)
            n_of = np.concatenate([[n] * (2 * n + 1) for n in range(n_max + 1)])
            v_of = np.concatenate([[v] * (2 * v + 1) for v in range(v_max + 1)])
            i_n = ipow_table(n_max)[n_of]
            i_v = ipow_table(v_max)[v_of]
            cs_eff = cs_all * i_n[None, :]
            cr_eff = c_rcv.coeffs * i_v[None, :]

            def per_chunk(fi, sl):
                k = float(k_all[fi])
                pref = (
                    -images.attenuation[sl]
                    * (FOUR_PI / k)
                    * np.exp(-1j * k * geo.dists[sl])
                    / (k * geo.dists[sl])
                )
                return factored_path_sum(pref, y_src[sl], y_rcv[sl], cs_eff[fi], cr_eff[fi])

        slices = chunk_slices(len(images), req.chunk_size)
        keys = [(fi, ci) for fi in range(frequencies.size) for ci in range(len(slices))]
        results = run_tasks(lambda key: per_chunk(key[0], slices[key[1]]), keys, req.workers)
        for fi in range(frequencies.size):
            for ci in range(len(slices)):
                part, part_ops = results[(fi, ci)]
                values[fi] += part
                ops_total += part_ops

    if req.direct_path_override is not None:
        values = values + req.direct_path_override.values

    tag = "DEISM" if req.method == "FULL" else "DEISM_LC"
    spec = RtfSpectrum(frequencies=frequencies, values=values, method_tag=tag)
    return spec, SimulationStats(n_images=len(images), coupling_terms=ops_total)


def _freq_index(req: DeismRequest, k: float) -> int:
    f = k * req.room.medium.speed_of_sound / (2.0 * math.pi)
    fi = int(np.argmin(np.abs(req.frequencies - f)))
    if not math.isclose(req.frequencies[fi], f, rel_tol=1e-9, abs_tol=0.0):
        raise ConfigError(f"wavenumber {k:g} does not match the request grid")
    return fi


def _single_freq_request(req: DeismRequest, fi: int) -> DeismRequest:
    cut = slice(fi, fi + 1)
    override = req.direct_path_override
    if override is not None:
        override = RtfSpectrum(
            frequencies=override.frequencies[cut],
            values=override.values[cut],
            method_tag=override.method_tag,
            metadata=override.metadata,
        )
    def slice_dir(d):
        return Directivity(r0=d.r0, max_order=d.max_order,
                           frequencies=d.frequencies[cut],
                           coeffs=d.coeffs[cut], kind=d.kind)
    return replace(
        req,
        c_src=slice_dir(req.c_src),
        c_rcv=slice_dir(req.c_rcv),
        frequencies=req.frequencies[cut],
        direct_path_override=override,
    )


def rtf_deism(req: DeismRequest, k: float) -> complex:
    """Full-method value at one wavenumber of the request grid."""
    fi = _freq_index(req, k)
    spec, _ = deism_spectrum(_single_freq_request(req, fi).with_method("FULL"))
    return complex(spec.values[0])


def rtf_deism_lc(req: DeismRequest, k: float) -> complex:
    """Far-field value at one wavenumber of the request grid."""
    fi = _freq_index(req, k)
    spec, _ = deism_spectrum(_single_freq_request(req, fi).with_method("LC"))
    return complex(spec.values[0])


def single_path_lc(rec: ImageRecord, cs_row: np.ndarray, cr_row: np.ndarray, k: float):
    """Far-field contribution of one image path (reference implementation).

    ``cs_row`` and ``cr_row`` are single-frequency coefficient rows in the
    flat (n, m) layout; orientation must already be applied.
    """
    d = float(np.linalg.norm(rec.r_si_to_r))
    if d <= 0:
        raise SingularityError("zero-length path")
    n_max = int(math.isqrt(cs_row.size)) - 1
    v_max = int(math.isqrt(cr_row.size)) - 1
    _, th_s, ph_s = cart_to_sph(rec.r_s_to_ri_rev)
    _, th_r, ph_r = cart_to_sph(rec.r_r_to_si)
    y_s = sph.sh_matrix(n_max, th_s, ph_s)
    y_r = sph.sh_matrix(v_max, th_r, ph_r)
    ssum = 0.0 + 0.0j
    for n in range(n_max + 1):
        for m in range(-n, n + 1):
            ssum += (1j) ** n * cs_row[sph.sh_index(n, m)] * y_s[sph.sh_index(n, m)]
    rsum = 0.0 + 0.0j
    for v in range(v_max + 1):
        for u in range(-v, v + 1):
            rsum += (1j) ** v * cr_row[sph.sh_index(v, u)] * y_r[sph.sh_index(v, u)]
    pref = -rec.attenuation * (FOUR_PI / k) * np.exp(-1j * k * d) / (k * d)
    return complex(pref * ssum * rsum)


def mirror_identity_deviations(p, q, n, m, room: RoomSpec, src, rcv):
    """Absolute deviations of the two identities behind the far-field form.

    First: the mirror parities map the outgoing-direction harmonic onto the
    reversed-path harmonic, Lambda(p, m, n) Y_{n,m'}(outgoing) =
    Y_{n,m}(reversed). Second: harmonics of antipodal directions differ by
    the parity factor (-1)^n. Returns (mirror_dev, antipodal_dev).
    """
    src = np.asarray(src, dtype=np.float64)
    rcv = np.asarray(rcv, dtype=np.float64)
    r_si_to_r, _ = path_vectors(p, q, src, rcv, room)
    pt, qt = reversed_path_indices(p, q)
    _, r_rev = path_vectors(pt, qt, src, rcv, room)

    _, th_out, ph_out = cart_to_sph(r_si_to_r)
    _, th_rev, ph_rev = cart_to_sph(r_rev)
    _, th_in, ph_in = cart_to_sph(-r_si_to_r)

    mp = mirror_mode_sign(p) * m
    lhs = mirror_parity(p, m, n) * sph.sh_matrix(n, th_out, ph_out)[sph.sh_index(n, mp)]
    rhs = sph.sh_matrix(n, th_rev, ph_rev)[sph.sh_index(n, m)]

    y_out = sph.sh_matrix(n, th_out, ph_out)[sph.sh_index(n, -m)]
    y_in = sph.sh_matrix(n, th_in, ph_in)[sph.sh_index(n, -m)]
    return float(abs(lhs - rhs)), float(abs(y_out - (-1.0) ** n * y_in))


def mirror_sh_identity_check(p, q, n, m, room: RoomSpec, src, rcv) -> bool:
    """True when both mirror-direction identities hold within 1e-12."""
    dev_mirror, dev_antipodal = mirror_identity_deviations(p, q, n, m, room, src, rcv)
    return dev_mirror <= MIRROR_IDENTITY_TOL and dev_antipodal <= MIRROR_IDENTITY_TOL


def reciprocity_report(req: DeismRequest) -> dict:
    """Diagnostic: swap device roles and report how the full method deviates.

    Physical reciprocity suggests the transfer function should survive
    exchanging positions while the transmit-mode patterns swap transducers.
    Reported, not asserted.
    """
    fwd, _ = deism_spectrum(req.with_method("FULL"))
    swapped = replace(
        req,
        src_pose=req.rcv_pose,
        rcv_pose=req.src_pose,
        c_src=Directivity(
            r0=req.c_rcv.r0, max_order=req.c_rcv.max_order,
            frequencies=req.c_rcv.frequencies, coeffs=req.c_rcv.coeffs, kind="source",
        ),
        c_rcv=Directivity(
            r0=req.c_src.r0, max_order=req.c_src.max_order,
            frequencies=req.c_src.frequencies, coeffs=req.c_src.coeffs, kind="receiver",
        ),
    )
    rev, _ = deism_spectrum(swapped.with_method("FULL"))
    num = float(np.linalg.norm(fwd.values - rev.values))
    den = float(np.linalg.norm(fwd.values))
    return {
        "relative_l2_deviation": num / den if den > 0 else math.inf,
        "forward_norm": den,
    }
