"""Shoebox-room geometry: image lattice, reflection attenuation, reversed paths.

Image positions follow the familiar unfolded-lattice bookkeeping: a binary
triple p selects mirroring about the walls through the origin, an integer
triple q shifts by whole room periods. The total reflection order of a path
is |2q_x - p_x| + |2q_y - p_y| + |2q_z - p_z|. Reflection coefficients are
angle dependent, derived from a uniform frequency-independent normalized
impedance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .directivity import Medium
from .errors import SingularityError

__all__ = [
    "RoomSpec",
    "TransducerPose",
    "ImageRecord",
    "ImageSet",
    "image_position",
    "path_vectors",
    "reversed_path_indices",
    "incident_angles",
    "reflection_coefficient",
    "path_attenuation",
    "generate_images",
    "cube_half_width",
]


@dataclass(frozen=True)
class RoomSpec:
    """Rectangular room with uniform real normalized wall impedance."""

    dimensions: tuple[float, float, float]
    zeta: float
    medium: Medium = Medium()

    def __post_init__(self):
        dims = tuple(float(x) for x in self.dimensions)
        object.__setattr__(self, "dimensions", dims)
        if len(dims) != 3 or any(x <= 0 for x in dims):
            raise ValueError("room dimensions must be three positive lengths")
        if self.zeta <= 0:
            raise ValueError("normalized impedance zeta must be positive")


@dataclass(frozen=True)
class TransducerPose:
    """Device position inside the room plus yaw about the vertical axis."""

    position: tuple[float, float, float]
    yaw: float = 0.0

    def __post_init__(self):
        pos = tuple(float(x) for x in self.position)
        object.__setattr__(self, "position", pos)
        if len(pos) != 3:
            raise ValueError("position must have three components")

    def validate_inside(self, room: RoomSpec):
        # Poses exactly on a wall are rejected: the inequality is strict.
        for a, (x, L) in enumerate(zip(self.position, room.dimensions)):
            if not (0.0 < x < L):
                raise ValueError(
                    f"pose coordinate {x:g} on axis {a} is not strictly inside (0, {L:g})"
                )


@dataclass(frozen=True)
class ImageRecord:
    """One reflection path: lattice indices, geometry vectors, attenuation."""

    p: tuple[int, int, int]
    q: tuple[int, int, int]
    image_position: np.ndarray
    r_si_to_r: np.ndarray
    r_r_to_si: np.ndarray
    r_s_to_ri_rev: np.ndarray
    attenuation: float
    reflection_order: int


class ImageSet:
    """Images with reflection order <= the requested maximum, in deterministic order.

    Stores the path data as column arrays for the kernels; indexing and
    iteration yield :class:`ImageRecord` views for inspection and tests. The
    ordering key is (reflection_order, q_z, q_y, q_x, p_z, p_y, p_x) and the
    arrays are read-only, so a set can be shared across workers.
    """

    def __init__(self, p, q, positions, r_si_to_r, r_s_to_ri_rev, attenuation, reflection_order):
        self.p = p
        self.q = q
        self.positions = positions
        self.r_si_to_r = r_si_to_r
        self.r_s_to_ri_rev = r_s_to_ri_rev
        self.attenuation = attenuation
        self.reflection_order = reflection_order
        self.distances = np.linalg.norm(r_si_to_r, axis=1)
        for arr in (p, q, positions, r_si_to_r, r_s_to_ri_rev, attenuation,
                    reflection_order, self.distances):
            arr.setflags(write=False)

    def __len__(self):
        return self.p.shape[0]

    def __getitem__(self, i) -> ImageRecord:
        return ImageRecord(
            p=tuple(int(x) for x in self.p[i]),
            q=tuple(int(x) for x in self.q[i]),
            image_position=self.positions[i],
            r_si_to_r=self.r_si_to_r[i],
            r_r_to_si=-self.r_si_to_r[i],
            r_s_to_ri_rev=self.r_s_to_ri_rev[i],
            attenuation=float(self.attenuation[i]),
            reflection_order=int(self.reflection_order[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def image_position(p, q, src, room: RoomSpec) -> np.ndarray:
    """Image of the source for lattice indices (p, q)."""
    p = np.asarray(p, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    src = np.asarray(src, dtype=np.float64)
    L = np.asarray(room.dimensions)
    return src - 2.0 * p * src + 2.0 * q * L


def path_vectors(p, q, src, rcv, room: RoomSpec):
    """(R_sI_to_r, R_s_to_rI): receiver seen from the source image, and the
    receiver image seen from the source, for the same (p, q)."""
    p = np.asarray(p, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    src = np.asarray(src, dtype=np.float64)
    rcv = np.asarray(rcv, dtype=np.float64)
    L = np.asarray(room.dimensions)
    r_si_to_r = rcv - src + 2.0 * p * src - 2.0 * q * L
    r_s_to_ri = rcv - src - 2.0 * p * rcv + 2.0 * q * L
    return r_si_to_r, r_s_to_ri


def reversed_path_indices(p, q):
    """Indices (p~, q~) of the reversed traversal of the path (p, q).

    Per axis the indices are unchanged when the axis order |2q - p| is odd;
    for even order the path reflects to the cell symmetric about the original
    room, with q' = floor((p - 2q) / 2) and p' = 2q - p + 2q'.
    """
    pt, qt = [], []
    for pa, qa in zip(p, q):
        pa, qa = int(pa), int(qa)
        if abs(2 * qa - pa) % 2 == 1:
            pt.append(pa)
            qt.append(qa)
        else:
            qp = (pa - 2 * qa) // 2
            pt.append(2 * qa - pa + 2 * qp)
            qt.append(qp)
    return tuple(pt), tuple(qt)


def incident_angles(r_vec, convention: str = "absolute"):
    """Per-axis incidence angles of a path measured from each wall normal.

    The default takes |component| / norm so angles stay in [0, pi/2]; the
    "signed" variant keeps the raw component and can exceed pi/2.
    """
    r_vec = np.asarray(r_vec, dtype=np.float64)
    norm = np.linalg.norm(r_vec, axis=-1)
    if np.any(norm == 0):
        raise SingularityError("incident angles undefined for a zero-length path")
    comp = np.abs(r_vec) if convention == "absolute" else r_vec
    if convention not in ("absolute", "signed"):
        raise ValueError("convention must be 'absolute' or 'signed'")
    return np.arccos(np.clip(comp / norm[..., None], -1.0, 1.0))


def reflection_coefficient(zeta: float, theta):
    """Angle-dependent wall reflection coefficient for normalized impedance zeta."""
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    zc = zeta * np.cos(theta)
    return (zc - 1.0) / (zc + 1.0)


def path_attenuation(p, q, angles, zeta: float) -> float:
    """Product of powered per-wall reflection coefficients for one path.

    ``angles`` are the three per-axis incidence angles of this path; the walls
    perpendicular to one axis see the same angle, so the two wall coefficients
    on an axis coincide and combine with exponent |q_a - p_a| + |q_a|.
    """
    p = np.asarray(p, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    beta = reflection_coefficient(zeta, np.asarray(angles, dtype=np.float64))
    exponents = np.abs(q - p) + np.abs(q)
    return float(np.prod(beta ** exponents.astype(np.float64)))


def cube_half_width(max_reflection_order: int) -> int:
    """Smallest q-cube half width whose lattice covers every path of the order."""
    return math.ceil((max_reflection_order + 1) / 2)


def generate_images(
    room: RoomSpec,
    src,
    rcv,
    max_reflection_order: int,
    n_m: int | None = None,
    angle_convention: str = "absolute",
) -> ImageSet:
    """All images with reflection order <= ``max_reflection_order``.

    ``n_m`` overrides the derived q-cube half width for comparisons against
    implementations that control the cube truncation separately; the order
    filter still applies. Raises SingularityError for coincident poses.
    """
    if max_reflection_order < 0:
        raise ValueError("max_reflection_order must be non-negative")
    src = np.asarray(src, dtype=np.float64)
    rcv = np.asarray(rcv, dtype=np.float64)
    L = np.asarray(room.dimensions)
    half = cube_half_width(max_reflection_order) if n_m is None else int(n_m)

    qs = np.arange(-half, half + 1, dtype=np.int64)
    ps = np.array([0, 1], dtype=np.int64)
    grid = np.meshgrid(ps, ps, ps, qs, qs, qs, indexing="ij")
    p = np.column_stack([g.ravel() for g in grid[:3]])
    q = np.column_stack([g.ravel() for g in grid[3:]])

    order_axis = np.abs(2 * q - p)
    order = order_axis.sum(axis=1)
    keep = order <= max_reflection_order
    p, q, order = p[keep], q[keep], order[keep]

    # lexsort uses the last key as primary
    idx = np.lexsort((p[:, 0], p[:, 1], p[:, 2], q[:, 0], q[:, 1], q[:, 2], order))
    p, q, order = p[idx], q[idx], order[idx]

    positions = src[None, :] - 2.0 * p * src[None, :] + 2.0 * q * L[None, :]
    r_si_to_r = rcv[None, :] - positions
    dist = np.linalg.norm(r_si_to_r, axis=1)
    if np.any(dist == 0):
        raise SingularityError("coincident source and receiver produce a zero-length path")

    angles = incident_angles(r_si_to_r, convention=angle_convention)
    beta = reflection_coefficient(room.zeta, angles)
    exponents = (np.abs(q - p) + np.abs(q)).astype(np.float64)
    attenuation = np.prod(beta**exponents, axis=1)

    odd = (np.abs(2 * q - p) % 2) == 1
    q_prime = (p - 2 * q) // 2
    p_prime = 2 * q - p + 2 * q_prime
    pt = np.where(odd, p, p_prime)
    qt = np.where(odd, q, q_prime)
    r_s_to_ri_rev = rcv[None, :] - src[None, :] - 2.0 * pt * rcv[None, :] + 2.0 * qt * L[None, :]

    return ImageSet(
        p=p,
        q=q,
        positions=positions,
        r_si_to_r=r_si_to_r,
        r_s_to_ri_rev=r_s_to_ri_rev,
        attenuation=attenuation,
        reflection_order=order,
    )
