"""Hot inner-loop kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once per process from the DEISM_BACKEND environment
variable ("numba" or "numpy"); without the variable, numba is used when it
imports cleanly. ``set_backend`` overrides the choice at runtime, which the
backend benchmark and the tests rely on.

Two kernels cover every method:

``coupled_path_sum``
    Mode-coupled contraction over image paths for the full method and for the
    open-receiver baseline. For each path, each source mode (n, m) couples to
    each receiver mode (v, u) through a radial sum over intermediate orders l,
    weighted by precomputed 3j tables and mirror parities.

``factored_path_sum``
    Far-field form: per path, one weighted sum over source modes times one
    weighted sum over receiver modes times a scalar spreading factor. Also
    evaluates the randomized-sign baseline, which has the same shape.

Both return (value, ops) where ops counts coupling terms of the method's
defining contraction: every (n, m, v, u, l) term for the coupled kernel and
every (n, m) x (v, u) pair for the factored kernel. These are the units in
which the two methods' cost models are stated, so the ratio of counters
tracks the expected speedup.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "active_backend",
    "set_backend",
    "available_backends",
    "coupled_path_sum",
    "factored_path_sum",
    "ipow_table",
]

_BACKEND = None


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except Exception:
        return False
    return True


def available_backends():
    backends = ["numpy"]
    if _numba_available():
        backends.insert(0, "numba")
    return backends


def active_backend() -> str:
    global _BACKEND
    if _BACKEND is None:
        choice = os.environ.get("DEISM_BACKEND", "").strip().lower()
        if choice in ("numba", "numpy"):
            _BACKEND = choice
        else:
            _BACKEND = "numba" if _numba_available() else "numpy"
    return _BACKEND


def set_backend(name: str):
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError("backend must be 'numba' or 'numpy'")
    if name == "numba" and not _numba_available():
        raise ValueError("numba backend requested but numba is not importable")
    _BACKEND = name


def ipow_table(max_power: int) -> np.ndarray:
    """Exact powers of the imaginary unit, i^0 .. i^max_power."""
    cycle = np.array([1.0 + 0.0j, 0.0 + 1.0j, -1.0 + 0.0j, 0.0 - 1.0j])
    return cycle[np.arange(max_power + 1) % 4]


def _coupled_path_sum_impl(hl, y_si, beta, msign, lam_m, lam_n, cs, rw, w1x, w2, il, ivn):
    n_img = hl.shape[0]
    n_l = hl.shape[1]
    n_max = w1x.shape[0] - 1
    v_max = w1x.shape[1] - 1
    hly = np.empty(n_l * n_l, dtype=np.complex128)
    total = 0.0 + 0.0j
    ops = 0
    for i in range(n_img):
        # per-path cache: i^l * h2_l(k d_i) * Y_{l,mu}(direction_i)
        for l in range(n_l):
            c = il[l] * hl[i, l]
            base = l * l + l
            for mu in range(-l, l + 1):
                hly[base + mu] = c * y_si[i, base + mu]
        ms = msign[i]
        lm = lam_m[i]
        ln = lam_n[i]
        acc = 0.0 + 0.0j
        for n in range(n_max + 1):
            for m in range(-n, n + 1):
                cs_nm = cs[n * n + n + m]
                skip_s = cs_nm.real == 0.0 and cs_nm.imag == 0.0
                mp = ms * m
                sign = 1.0
                if (lm * m + ln * n) % 2 != 0:
                    sign = -sign  # mirror parity of the image lattice
                if mp % 2 != 0:
                    sign = -sign  # (-1)^{m'} of the translation theorem
                pre_nm = cs_nm * sign
                for v in range(v_max + 1):
                    pre_nv = pre_nm * ivn[n, v]
                    base_v = v * v + v
                    lo = n - v if n >= v else v - n
                    hi = n + v
                    for u in range(-v, v + 1):
                        # the counter covers the full defining contraction,
                        # independent of coefficient sparsity
                        ops += hi - lo + 1
                        if skip_s:
                            continue
                        r_vu = rw[base_v + u]
                        if r_vu.real == 0.0 and r_vu.imag == 0.0:
                            continue
                        mu = mp - u
                        a = 0.0 + 0.0j
                        # odd n+v+l terms vanish by the parity selection rule
                        for l in range(lo + ((n + v + lo) & 1), hi + 1, 2):
                            w = w1x[n, v, l] * w2[n, v, l, mp + n_max, u + v_max]
                            if w != 0.0:
                                a += w * hly[l * l + l + mu]
                        acc += pre_nv * a * r_vu
        total += beta[i] * acc
    return total, ops


def _factored_path_sum_impl(pref, y_src, y_rcv, cs_eff, cr_eff):
    n_img = pref.shape[0]
    n_s = cs_eff.shape[0]
    n_r = cr_eff.shape[0]
    total = 0.0 + 0.0j
    ops = 0
    for i in range(n_img):
        ssum = 0.0 + 0.0j
        for a in range(n_s):
            ssum += cs_eff[a] * y_src[i, a]
        rsum = 0.0 + 0.0j
        for b in range(n_r):
            rsum += cr_eff[b] * y_rcv[i, b]
        total += pref[i] * ssum * rsum
        ops += n_s * n_r
    return total, ops


if _numba_available():
    from numba import njit

    _coupled_path_sum_nb = njit(cache=True, nogil=True)(_coupled_path_sum_impl)
    _factored_path_sum_nb = njit(cache=True, nogil=True)(_factored_path_sum_impl)
else:  # pragma: no cover - exercised only when numba is absent
    _coupled_path_sum_nb = None
    _factored_path_sum_nb = None


def _coupled_path_sum_np(hl, y_si, beta, msign, lam_m, lam_n, cs, rw, w1x, w2, il, ivn):
    n_img = hl.shape[0]
    n_l = hl.shape[1]
    n_max = w1x.shape[0] - 1
    v_max = w1x.shape[1] - 1
    lmax = n_l - 1

    # full per-path cache as one matrix, then vectorize over images per mode pair
    hly = np.zeros((n_img, n_l * n_l), dtype=np.complex128)
    for l in range(n_l):
        base = l * l + l
        c = il[l] * hl[:, l]
        for mu in range(-l, l + 1):
            hly[:, base + mu] = c * y_si[:, base + mu]

    classes = {}
    key = msign * 4 + lam_m * 2 + lam_n
    for kval in np.unique(key):
        classes[int(kval)] = np.nonzero(key == kval)[0]

    acc = np.zeros(n_img, dtype=np.complex128)
    ops = 0
    lvals_all = np.arange(n_l)
    for n in range(n_max + 1):
        for m in range(-n, n + 1):
            cs_nm = cs[n * n + n + m]
            for v in range(v_max + 1):
                lo, hi = abs(n - v), n + v
                lvals = lvals_all[lo : hi + 1]
                for u in range(-v, v + 1):
                    r_vu = rw[v * v + v + u]
                    ops += n_img * (hi - lo + 1)
                    if cs_nm == 0 or r_vu == 0:
                        continue
                    for kval, sel in classes.items():
                        ms = 1 if kval >= 4 else -1
                        lm = (kval // 2) & 1
                        ln = kval & 1
                        mp = ms * m
                        mu = mp - u
                        w = w1x[n, v, lo : hi + 1] * w2[n, v, lo : hi + 1, mp + n_max, u + v_max]
                        wnz = w != 0.0
                        if not np.any(wnz):
                            continue
                        lw = lvals[wnz]
                        cols = lw * lw + lw + mu
                        sign = 1.0 if (lm * m + ln * n + mp) % 2 == 0 else -1.0
                        weight = cs_nm * sign * ivn[n, v] * r_vu
                        acc[sel] += weight * (hly[np.ix_(sel, cols)] @ w[wnz])
    total = complex(np.sum(beta * acc))
    return total, ops


def _factored_path_sum_np(pref, y_src, y_rcv, cs_eff, cr_eff):
    total = complex(np.sum(pref * (y_src @ cs_eff) * (y_rcv @ cr_eff)))
    ops = pref.shape[0] * cs_eff.shape[0] * cr_eff.shape[0]
    return total, ops


def coupled_path_sum(hl, y_si, beta, msign, lam_m, lam_n, cs, rw, w1x, w2, il, ivn):
    if active_backend() == "numba":
        return _coupled_path_sum_nb(hl, y_si, beta, msign, lam_m, lam_n, cs, rw, w1x, w2, il, ivn)
    return _coupled_path_sum_np(hl, y_si, beta, msign, lam_m, lam_n, cs, rw, w1x, w2, il, ivn)


def factored_path_sum(pref, y_src, y_rcv, cs_eff, cr_eff):
    if active_backend() == "numba":
        return _factored_path_sum_nb(pref, y_src, y_rcv, cs_eff, cr_eff)
    return _factored_path_sum_np(pref, y_src, y_rcv, cs_eff, cr_eff)
