"""Independent oracles used across the test suite.

Everything here is deliberately dumb and slow: closed forms, brute-force
enumeration, high-precision arithmetic via mpmath, and sympy's exact Wigner
symbols. None of it shares code with the package paths it checks.
"""

import math
from fractions import Fraction

import mpmath
import numpy as np


def bessel_j_downward(n, x, extra=25):
    """Miller's downward recurrence for j_n(x), normalized against j_0."""
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    m = n + extra + int(x)
    jp = 0.0
    j = 1e-30
    out = 0.0
    for l in range(m, -1, -1):
        jm = (2 * l + 3) / x * j - jp
        jp, j = j, jm
        if l == n:
            out = j
    return out * (math.sin(x) / x) / j


def bessel_j_mp(n, x):
    """j_n(x) through half-integer Bessel functions at 50 digits."""
    with mpmath.workdps(50):
        if x == 0:
            return 1.0 if n == 0 else 0.0
        val = mpmath.sqrt(mpmath.pi / (2 * x)) * mpmath.besselj(n + mpmath.mpf(1) / 2, x)
        return float(val)


def bessel_y_mp(n, x):
    with mpmath.workdps(50):
        val = mpmath.sqrt(mpmath.pi / (2 * x)) * mpmath.bessely(n + mpmath.mpf(1) / 2, x)
        return float(val)


def hankel2_mp(n, x):
    return bessel_j_mp(n, x) - 1j * bessel_y_mp(n, x)


def wigner3j_sympy(j1, j2, j3, m1, m2, m3):
    from sympy.physics.wigner import wigner_3j

    return float(wigner_3j(j1, j2, j3, m1, m2, m3))


def sph_harm_scipy(n, m, theta, phi):
    from scipy.special import sph_harm_y

    return sph_harm_y(n, m, theta, phi)


def brute_force_images(room_dims, src, max_order, n_m):
    """Every (p, q, order, position) with order <= max_order, as a set of keys."""
    lx, ly, lz = room_dims
    out = {}
    for px in (0, 1):
        for py in (0, 1):
            for pz in (0, 1):
                for qx in range(-n_m, n_m + 1):
                    for qy in range(-n_m, n_m + 1):
                        for qz in range(-n_m, n_m + 1):
                            order = (
                                abs(2 * qx - px) + abs(2 * qy - py) + abs(2 * qz - pz)
                            )
                            if order > max_order:
                                continue
                            pos = (
                                src[0] - 2 * px * src[0] + 2 * qx * lx,
                                src[1] - 2 * py * src[1] + 2 * qy * ly,
                                src[2] - 2 * pz * src[2] + 2 * qz * lz,
                            )
                            out[(px, py, pz, qx, qy, qz)] = (order, pos)
    return out


def unfolded_wall_hits(image_pos, rcv, room_dims):
    """Wall hits of one reflection path, counted by plane crossings.

    In the unfolded lattice, crossing x = j * L corresponds to a hit on the
    wall through the origin when j is even and on the opposite wall when j is
    odd. Returns per-axis (hits_wall_at_0, hits_wall_at_L).
    """
    hits = []
    for a in range(3):
        lo, hi = sorted((image_pos[a], rcv[a]))
        L = room_dims[a]
        j_lo = math.floor(lo / L) + 1
        j_hi = math.ceil(hi / L) - 1
        even = odd = 0
        for j in range(j_lo, j_hi + 1):
            if j % 2 == 0:
                even += 1
            else:
                odd += 1
        hits.append((even, odd))
    return hits


def racah_3j_fraction(j1, j2, j3, m1, m2, m3):
    """Exact squared 3j value as a Fraction, plus its sign (slow, direct)."""
    if m1 + m2 + m3 != 0 or not (abs(j1 - j2) <= j3 <= j1 + j2):
        return Fraction(0), 1
    f = math.factorial
    s = Fraction(0)
    for t in range(0, j1 + j2 + j3 + 1):
        denoms = [
            t,
            j3 - j2 + t + m1,
            j3 - j1 + t - m2,
            j1 + j2 - j3 - t,
            j1 - t - m1,
            j2 - t + m2,
        ]
        if any(d < 0 for d in denoms):
            continue
        prod = 1
        for d in denoms:
            prod *= f(d)
        s += Fraction((-1) ** t, prod)
    if s == 0:
        return Fraction(0), 1
    pref = Fraction(f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3), f(j1 + j2 + j3 + 1))
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        pref *= f(j + m) * f(j - m)
    sign = (-1) ** (j1 - j2 - m3) * (1 if s > 0 else -1)
    return pref * s * s, sign


def ball_l1_image_count(max_order):
    """Number of image paths with total reflection order <= max_order.

    Per axis, order o has one realization for o = 0 and two for o >= 1.
    """
    per_axis = lambda o: 1 if o == 0 else 2
    count = 0
    for ox in range(max_order + 1):
        for oy in range(max_order + 1 - ox):
            for oz in range(max_order + 1 - ox - oy):
                count += per_axis(ox) * per_axis(oy) * per_axis(oz)
    return count


def random_direction(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)
