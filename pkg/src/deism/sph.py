"""Special functions for the spherical-harmonic machinery.

Provides complex orthonormal spherical harmonics (Condon-Shortley phase),
spherical Bessel and Hankel functions, exact Wigner 3j symbols, and dense
precomputed 3j lookup tables used by the mode-coupling kernels.

Convention: Y_{n,m}(theta, phi) = A_{n,m} P_n^m(cos theta) e^{i m phi} with
orthonormal A_{n,m} and the Condon-Shortley sign folded into P_n^m, so that
conj(Y_{n,m}) = (-1)^m Y_{n,-m}. Outgoing radial waves use the second-kind
Hankel function h2_n = j_n - i*y_n, matching the e^{-ikd} free-space
Green's function used throughout the engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special as _sp

from .errors import ResourceError, SingularityError

__all__ = [
    "SphIndex",
    "WignerTable",
    "sh_index",
    "sh_matrix",
    "spherical_harmonic",
    "spherical_bessel_j",
    "spherical_bessel_y",
    "spherical_hankel2",
    "wigner3j",
    "build_wigner_tables",
]


@dataclass(frozen=True)
class SphIndex:
    """Order/mode pair addressing one spherical-harmonic basis function."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"order must be non-negative, got n={self.n}")
        if abs(self.m) > self.n:
            raise ValueError(f"mode |m| must not exceed order, got n={self.n}, m={self.m}")

    @property
    def flat(self) -> int:
        return sh_index(self.n, self.m)


def sh_index(n: int, m: int) -> int:
    """Flat index of (n, m) in the packed coefficient layout n^2 + n + m."""
    return n * n + n + m


def sh_matrix(max_order: int, theta, phi) -> np.ndarray:
    """Evaluate all Y_{n,m} up to ``max_order`` at the given directions.

    Returns a complex array of shape ((max_order+1)^2,) + broadcast(theta, phi),
    indexed by the flat layout of :func:`sh_index`. Uses the fully normalized
    associated-Legendre recurrence, stable to high order.
    """
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    theta, phi = np.broadcast_arrays(theta, phi)
    L = int(max_order)
    if L < 0:
        raise ValueError("max_order must be >= 0")

    ct = np.cos(theta)
    st = np.sin(theta)
    eiphi = np.exp(1j * phi)

    out = np.empty(((L + 1) ** 2,) + theta.shape, dtype=np.complex128)
    # p holds the normalized P~_{l,m}(cos theta) including 1/sqrt(4pi)
    pmm = np.full(theta.shape, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(L + 1):
        if m > 0:
            # Condon-Shortley phase enters through the leading minus sign
            pmm = -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * pmm
        emphi = eiphi**m
        out[sh_index(m, m)] = pmm * emphi
        if m > 0:
            out[sh_index(m, -m)] = (-1.0) ** m * np.conj(out[sh_index(m, m)])
        p_prev = pmm
        if m + 1 <= L:
            p_cur = math.sqrt(2.0 * m + 3.0) * ct * pmm
            out[sh_index(m + 1, m)] = p_cur * emphi
            if m > 0:
                out[sh_index(m + 1, -m)] = (-1.0) ** m * np.conj(out[sh_index(m + 1, m)])
            for l in range(m + 2, L + 1):
                a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
                p_new = a * (ct * p_cur - b * p_prev)
                p_prev, p_cur = p_cur, p_new
                out[sh_index(l, m)] = p_cur * emphi
                if m > 0:
                    out[sh_index(l, -m)] = (-1.0) ** m * np.conj(out[sh_index(l, m)])
    return out


def spherical_harmonic(idx: SphIndex, theta, phi):
    """Single spherical harmonic Y_{n,m}(theta, phi).

    ``theta`` is the inclination in [0, pi], ``phi`` the azimuth. Raises for
    |m| > n (via SphIndex) and for inclinations outside [0, pi].
    """
    th = np.asarray(theta, dtype=np.float64)
    if np.any(th < -1e-12) or np.any(th > math.pi + 1e-12):
        raise ValueError("theta must lie in [0, pi]")
    vals = sh_matrix(idx.n, theta, phi)[idx.flat]
    if vals.ndim == 0:
        return complex(vals)
    return vals


def spherical_bessel_j(n, x):
    """Spherical Bessel function of the first kind, j_n(x) for x >= 0."""
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(x_arr < 0):
        raise ValueError("spherical_bessel_j requires x >= 0")
    return _sp.spherical_jn(n, x)


def spherical_bessel_y(n, x):
    """Spherical Bessel function of the second kind, y_n(x) for x > 0."""
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(x_arr <= 0):
        raise SingularityError("spherical_bessel_y is singular at x = 0")
    return _sp.spherical_yn(n, x)


def spherical_hankel2(n, x):
    """Spherical Hankel function of the second kind, h2_n(x) = j_n(x) - i y_n(x).

    Refuses x = 0: callers must guard coincident source/receiver geometry.
    """
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(x_arr <= 0):
        raise SingularityError("spherical_hankel2 is singular at x = 0")
    return _sp.spherical_jn(n, x) - 1j * _sp.spherical_yn(n, x)


def hankel2_stack(max_order: int, x: np.ndarray) -> np.ndarray:
    """h2_l(x) for all l in 0..max_order, shape (len(x), max_order+1)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise SingularityError("hankel2_stack is singular at x = 0")
    l = np.arange(max_order + 1)[:, None]
    h = _sp.spherical_jn(l, x[None, :]) - 1j * _sp.spherical_yn(l, x[None, :])
    return np.ascontiguousarray(h.T)


def _racah_sum(j1, j2, j3, m1, m2, m3) -> Fraction:
    t_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    t_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    s = Fraction(0)
    f = math.factorial
    for t in range(t_min, t_max + 1):
        den = (
            f(t)
            * f(j3 - j2 + t + m1)
            * f(j3 - j1 + t - m2)
            * f(j1 + j2 - j3 - t)
            * f(j1 - t - m1)
            * f(j2 - t + m2)
        )
        s += Fraction((-1) ** t, den)
    return s


def wigner3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """Wigner 3j symbol for integer arguments, evaluated exactly.

    Returns 0.0 whenever a selection rule fails (m1+m2+m3 != 0, triangle
    inequality violated, or |m_i| > j_i). The rational Racah sum is carried in
    exact integer arithmetic; only the final square root is floating point, so
    results are correctly rounded doubles at the orders used here.
    """
    for name, j in (("j1", j1), ("j2", j2), ("j3", j3)):
        if j < 0 or int(j) != j:
            raise ValueError(f"{name} must be a non-negative integer, got {j}")
    j1, j2, j3, m1, m2, m3 = int(j1), int(j2), int(j3), int(m1), int(m2), int(m3)
    if m1 + m2 + m3 != 0:
        return 0.0
    if j3 < abs(j1 - j2) or j3 > j1 + j2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    f = math.factorial
    s = _racah_sum(j1, j2, j3, m1, m2, m3)
    if s == 0:
        return 0.0
    pref = Fraction(
        f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3), f(j1 + j2 + j3 + 1)
    )
    pref *= f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3)
    value_sq = pref * s * s
    sign = (-1) ** (j1 - j2 - m3) * (1 if s > 0 else -1)
    return sign * math.sqrt(float(value_sq))


@dataclass(frozen=True)
class WignerTable:
    """Dense 3j lookup tables for the mode-coupling sums.

    ``w1[n, v, l]`` holds (n v l; 0 0 0) and ``w2[n, v, l, m + nmax, u + vmax]``
    holds (n v l; -m u m-u). Entries outside the selection rules are explicit
    zeros so inner loops stay branch-free. Arrays are read-only after build.
    """

    nmax: int
    vmax: int
    w1: np.ndarray
    w2: np.ndarray

    @property
    def lmax(self) -> int:
        return self.nmax + self.vmax

    def w1_at(self, n: int, v: int, l: int) -> float:
        return float(self.w1[n, v, l])

    def w2_at(self, n: int, v: int, l: int, m: int, u: int) -> float:
        return float(self.w2[n, v, l, m + self.nmax, u + self.vmax])


def build_wigner_tables(nmax: int, vmax: int, memory_budget_bytes: int = 1 << 30) -> WignerTable:
    """Precompute the w1/w2 tables for all n <= nmax, v <= vmax.

    Raises ResourceError before allocating if the dense tables would exceed
    ``memory_budget_bytes``.
    """
    if nmax < 0 or vmax < 0:
        raise ValueError("table orders must be non-negative")
    lmax = nmax + vmax
    w1_shape = (nmax + 1, vmax + 1, lmax + 1)
    w2_shape = (nmax + 1, vmax + 1, lmax + 1, 2 * nmax + 1, 2 * vmax + 1)
    need = 8 * (math.prod(w1_shape) + math.prod(w2_shape))
    if need > memory_budget_bytes:
        raise ResourceError(
            f"Wigner tables for (nmax={nmax}, vmax={vmax}) need {need} bytes, "
            f"budget is {memory_budget_bytes}"
        )
    w1 = np.zeros(w1_shape)
    w2 = np.zeros(w2_shape)
    for n in range(nmax + 1):
        for v in range(vmax + 1):
            for l in range(abs(n - v), n + v + 1):
                w1[n, v, l] = wigner3j(n, v, l, 0, 0, 0)
                for m in range(-n, n + 1):
                    for u in range(-v, v + 1):
                        w2[n, v, l, m + nmax, u + vmax] = wigner3j(n, v, l, -m, u, m - u)
    w1.setflags(write=False)
    w2.setflags(write=False)
    return WignerTable(nmax=nmax, vmax=vmax, w1=w1, w2=w2)
