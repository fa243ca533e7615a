"""Mode-coupling context and per-path geometry caches shared by all methods.

The translation of an outgoing spherical wavefunction between two expansion
origins couples source mode (n, m) to receiver mode (v, u) through a sum over
intermediate orders l with 3j weights. Image paths additionally carry mirror
parities: flipping an axis of the lattice negates the azimuthal mode or
multiplies by a sign that depends on (m, n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sph
from .errors import SingularityError
from .kernels import ipow_table
from .room import ImageSet

FOUR_PI = 4.0 * math.pi


def cart_to_sph(vecs):
    """(distance, inclination, azimuth) of Cartesian vectors, last axis xyz."""
    vecs = np.asarray(vecs, dtype=np.float64)
    d = np.linalg.norm(vecs, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.arccos(np.clip(vecs[..., 2] / d, -1.0, 1.0))
    phi = np.arctan2(vecs[..., 1], vecs[..., 0])
    return d, theta, phi


@dataclass(frozen=True)
class CouplingContext:
    """Precomputed tables for coupling source order N to receiver order V.

    ``w1x`` folds the scalar weight 4*pi*sqrt((2n+1)(2v+1)(2l+1)/(4*pi)) into
    the (n v l; 0 0 0) symbol so the kernels do one multiply per table read.
    Immutable after construction and safe to share across workers.
    """

    n_max: int
    v_max: int
    wigner: sph.WignerTable
    w1x: np.ndarray
    il: np.ndarray
    ivn: np.ndarray

    @classmethod
    def build(cls, n_max: int, v_max: int, memory_budget_bytes: int = 1 << 30):
        table = sph.build_wigner_tables(n_max, v_max, memory_budget_bytes)
        lmax = n_max + v_max
        n_idx = np.arange(n_max + 1)[:, None, None]
        v_idx = np.arange(v_max + 1)[None, :, None]
        l_idx = np.arange(lmax + 1)[None, None, :]
        xi = np.sqrt((2 * n_idx + 1) * (2 * v_idx + 1) * (2 * l_idx + 1) / FOUR_PI)
        w1x = FOUR_PI * table.w1 * xi
        w1x.setflags(write=False)
        il = ipow_table(lmax)
        # i^(v-n) as an exact unit table
        ivn = np.empty((n_max + 1, v_max + 1), dtype=np.complex128)
        cycle = ipow_table(3)
        for n in range(n_max + 1):
            for v in range(v_max + 1):
                ivn[n, v] = cycle[(v - n) % 4]
        il.setflags(write=False)
        ivn.setflags(write=False)
        return cls(n_max=n_max, v_max=v_max, wigner=table, w1x=w1x, il=il, ivn=ivn)


def mirror_mode_sign(p) -> int:
    """Sign flipping the azimuthal mode: m' = (-1)^(p_x + p_y) * m."""
    return -1 if (int(p[0]) + int(p[1])) % 2 else 1


def mirror_parity(p, m: int, n: int) -> float:
    """Scalar mirror factor (-1)^((p_y + p_z) m + p_z n) of an image path."""
    return -1.0 if ((int(p[1]) + int(p[2])) * m + int(p[2]) * n) % 2 else 1.0


def single_path_coupling(n, m, v, u, x0_sph, k, ctx: CouplingContext):
    """Free-field coupling of source mode (n, m) to receiver mode (v, u).

    ``x0_sph`` is the (distance, theta, phi) of the vector from the source
    expansion origin to the receiver origin. Uses the context's lookup tables;
    the sum runs over l in [|n-v|, n+v].
    """
    d, theta, phi = x0_sph
    if d <= 0:
        raise SingularityError("coupling distance must be positive")
    if abs(m) > n or abs(u) > v:
        raise ValueError("modes must satisfy |m| <= n and |u| <= v")
    lmax = n + v
    y = sph.sh_matrix(lmax, theta, phi)
    h = sph.hankel2_stack(lmax, np.array([k * d]))[0]
    total = 0.0 + 0.0j
    for l in range(abs(n - v), n + v + 1):
        mu = m - u
        if abs(mu) > l:
            continue
        w = ctx.w1x[n, v, l] * ctx.wigner.w2_at(n, v, l, m, u)
        if w != 0.0:
            total += w * ctx.il[l] * h[l] * y[sph.sh_index(l, mu)]
    return ctx.ivn[n, v] * (-1.0) ** m * total


def reverberant_coupling(n, m, v, u, images: ImageSet, k, ctx: CouplingContext):
    """Mirrored, attenuated sum of single-path couplings over an image set."""
    if len(images) == 0:
        raise ValueError("image set is empty")
    total = 0.0 + 0.0j
    for rec in images:
        d, theta, phi = cart_to_sph(rec.r_si_to_r)
        if d <= 0:
            raise SingularityError("image path has zero length")
        mp = mirror_mode_sign(rec.p) * m
        total += (
            rec.attenuation
            * mirror_parity(rec.p, m, n)
            * single_path_coupling(n, mp, v, u, (d, theta, phi), k, ctx)
        )
    return total


class PathGeometry:
    """Direction caches for one image set, built lazily per requested order.

    Spherical-harmonic matrices are cached by (role, order) where the roles
    are the outgoing direction (source image to receiver), its reverse, and
    the reversed-path direction used by the far-field methods. All caches are
    frequency independent.
    """

    def __init__(self, images: ImageSet):
        self.images = images
        self.dists = images.distances
        if np.any(self.dists <= 0):
            raise SingularityError("image set contains a zero-length path")
        _, self.theta_si, self.phi_si = cart_to_sph(images.r_si_to_r)
        _, self.theta_rcv, self.phi_rcv = cart_to_sph(-images.r_si_to_r)
        _, self.theta_rev, self.phi_rev = cart_to_sph(images.r_s_to_ri_rev)
        p = images.p
        self.msign = np.where((p[:, 0] + p[:, 1]) % 2 == 1, -1, 1).astype(np.int64)
        self.lam_m = (p[:, 1] + p[:, 2]).astype(np.int64) % 2
        self.lam_n = p[:, 2].astype(np.int64) % 2
        self._sh_cache: dict[tuple[str, int], np.ndarray] = {}

    def _directions(self, role: str):
        if role == "outgoing":
            return self.theta_si, self.phi_si
        if role == "incoming":
            return self.theta_rcv, self.phi_rcv
        if role == "reversed":
            return self.theta_rev, self.phi_rev
        raise ValueError(f"unknown direction role {role!r}")

    def sh_cache(self, role: str, max_order: int) -> np.ndarray:
        """Y_{l,mu} at every path direction, shape (n_images, (max_order+1)^2)."""
        key = (role, max_order)
        if key not in self._sh_cache:
            theta, phi = self._directions(role)
            mat = np.ascontiguousarray(sph.sh_matrix(max_order, theta, phi).T)
            mat.setflags(write=False)
            self._sh_cache[key] = mat
        return self._sh_cache[key]
