import math

import numpy as np
import pytest

from deism import baselines as bl
from deism import directivity as dv
from deism import sph
from deism.coupling import cart_to_sph
from deism.errors import ConfigError, SingularityError
from deism.room import RoomSpec, generate_images

import oracles


class TestRtfSpectrum:
    def test_grid_invariants(self):
        with pytest.raises(ValueError):
            bl.RtfSpectrum(frequencies=[100.0, 100.0], values=[1j, 2j], method_tag="DEISM")
        with pytest.raises(ValueError):
            bl.RtfSpectrum(frequencies=[100.0], values=[1j, 2j], method_tag="DEISM")
        with pytest.raises(ValueError):
            bl.RtfSpectrum(frequencies=[100.0], values=[1j], method_tag="nope")

    def test_grid_mismatch_detected(self):
        a = bl.RtfSpectrum(frequencies=[100.0, 200.0], values=[1j, 2j], method_tag="DEISM")
        b = bl.RtfSpectrum(frequencies=[100.0, 300.0], values=[1j, 2j], method_tag="DEISM")
        with pytest.raises(ConfigError):
            bl.assert_same_grid(a, b)


class TestGreensFunction:
    def test_static_limit(self):
        assert bl.greens_function(1.0, 1e-12) == pytest.approx(1.0 / (4 * math.pi), rel=1e-9)

    def test_inverse_distance_law(self):
        k = 3.7
        assert abs(bl.greens_function(2.0, k)) == pytest.approx(
            abs(bl.greens_function(1.0, k)) / 2.0, rel=1e-14
        )

    def test_half_wavelength_phase(self):
        f, c = 343.0, 343.0
        k = 2 * math.pi * f / c
        d = 0.5 * c / f  # half a wavelength
        val = bl.greens_function(d, k)
        assert val == pytest.approx(-abs(val), abs=1e-15)  # e^{-i pi} factor

    def test_singularity(self):
        with pytest.raises(SingularityError):
            bl.greens_function(0.0, 1.0)


class TestIsmOmni:
    def test_order_zero_is_free_space(self, room, poses):
        src, rcv = poses
        freqs = np.array([200.0, 500.0])
        spec = bl.ism_omni_spectrum(room, src.position, rcv.position, 0, freqs)
        k = room.medium.wavenumbers(freqs)
        d = np.linalg.norm(np.subtract(rcv.position, src.position))
        assert np.allclose(spec.values, bl.greens_function(d, k), rtol=1e-14)

    def test_rigid_walls_first_order_hand_sum(self, medium):
        room = RoomSpec(dimensions=(4.0, 3.0, 2.5), zeta=1e9, medium=medium)
        src = np.array([1.1, 1.1, 1.3])
        rcv = np.array([2.9, 1.9, 1.3])
        freqs = np.array([313.0])
        k = float(medium.wavenumbers(freqs)[0])
        spec = bl.ism_omni_spectrum(room, src, rcv, 1, freqs)
        images = generate_images(room, src, rcv, 1)
        assert len(images) == 7
        expected = sum(bl.greens_function(float(d), k) for d in images.distances)
        assert spec.values[0] == pytest.approx(expected, rel=1e-8)

    def test_reciprocity_under_pose_exchange(self, room, rng):
        freqs = np.array([150.0, 650.0])
        for _ in range(5):
            a = rng.uniform(0.2, 0.8, 3) * room.dimensions
            b = rng.uniform(0.2, 0.8, 3) * room.dimensions
            fwd = bl.ism_omni_spectrum(room, a, b, 3, freqs)
            rev = bl.ism_omni_spectrum(room, b, a, 3, freqs)
            assert np.max(np.abs(fwd.values - rev.values) / np.abs(fwd.values)) < 1e-12

    def test_coincident_positions_rejected(self, room):
        with pytest.raises(SingularityError):
            bl.ism_omni_spectrum(room, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 1,
                                 np.array([100.0]))


def brute_force_free_field_gism(c_src, d_y, theta_y, phi_y, x0_sph, k):
    """Direct contraction of the translation coupling, no lookup tables."""
    d, th, ph = x0_sph
    n_max = c_src.max_order
    v_max = max(1, math.ceil(k * d_y))
    total = 0.0 + 0.0j
    for n in range(n_max + 1):
        for m in range(-n, n + 1):
            cs = c_src.coeffs[0, sph.sh_index(n, m)]
            for v in range(v_max + 1):
                jv = sph.spherical_bessel_j(v, k * d_y)
                for u in range(-v, v + 1):
                    alpha = 0.0 + 0.0j
                    for l in range(abs(n - v), n + v + 1):
                        w1 = oracles.wigner3j_sympy(n, v, l, 0, 0, 0)
                        w2 = oracles.wigner3j_sympy(n, v, l, -m, u, m - u)
                        if w1 == 0.0 or w2 == 0.0:
                            continue
                        xi = math.sqrt((2 * n + 1) * (2 * v + 1) * (2 * l + 1) / (4 * math.pi))
                        h2l = complex(sph.spherical_hankel2(l, k * d))
                        ylm = complex(sph.sh_matrix(l, th, ph)[sph.sh_index(l, m - u)])
                        alpha += (1j) ** l * h2l * ylm * w1 * w2 * xi
                    alpha *= 4 * math.pi * (1j) ** (v - n) * (-1.0) ** m
                    yv = complex(sph.sh_matrix(v, theta_y, phi_y)[sph.sh_index(v, u)])
                    total += cs * alpha * jv * yv
    return total


class TestGism:
    def test_zero_offset_monopole_reduces_to_ism_omni(self, room, poses):
        src, rcv = poses
        freqs = np.array([120.0, 480.0])
        mono = dv.monopole_coefficients(freqs, room.medium, kind="source")
        gism = bl.gism_spectrum(mono, 0.0, 0.0, 0.0, room, src.position, rcv.position, 4)
        omni = bl.ism_omni_spectrum(room, src.position, rcv.position, 4, freqs)
        assert np.max(np.abs(gism.values - omni.values) / np.abs(omni.values)) < 1e-12

    def test_free_field_matches_table_free_oracle(self, room, rng):
        freqs = np.array([400.0])
        k = float(room.medium.wavenumbers(freqs)[0])
        c_src = dv.synthetic_directivity(2, freqs, room.medium, 0.3, seed=5)
        src = np.array([1.1, 1.2, 1.3])
        rcv = np.array([2.4, 1.8, 1.1])
        d_y, th_y, ph_y = 0.08, 1.1, 2.0
        spec = bl.gism_spectrum(c_src, d_y, th_y, ph_y, room, src, rcv, 0)
        x0 = cart_to_sph(rcv - src)
        ref = brute_force_free_field_gism(c_src, d_y, th_y, ph_y, x0, k)
        assert complex(spec.values[0]) == pytest.approx(ref, rel=1e-12)

    def test_linearity_in_source_coefficients(self, room, poses):
        src, rcv = poses
        freqs = np.array([300.0])
        c1 = dv.synthetic_directivity(2, freqs, room.medium, 0.3, seed=1)
        c2 = dv.synthetic_directivity(2, freqs, room.medium, 0.3, seed=2)
        alpha = 1.7 - 0.4j
        mixed = dv.Directivity(r0=0.3, max_order=2, frequencies=freqs,
                               coeffs=alpha * c1.coeffs + c2.coeffs, kind="source")
        args = (0.05, 0.9, 0.4, room, src.position, rcv.position, 2)
        h_mixed = bl.gism_spectrum(mixed, *args).values[0]
        h1 = bl.gism_spectrum(c1, *args).values[0]
        h2 = bl.gism_spectrum(c2, *args).values[0]
        assert h_mixed == pytest.approx(alpha * h1 + h2, rel=1e-12)


class TestFsrr:
    def test_same_seed_bitwise_identical(self, room, poses):
        src, rcv = poses
        freqs = np.array([100.0, 500.0, 900.0])
        cs = dv.synthetic_directivity(2, freqs, room.medium, 0.3, seed=3)
        cr = dv.synthetic_directivity(2, freqs, room.medium, 0.3, seed=4,
                                      kind="receiver")
        cfg = bl.FsrrConfig(rng_seed=11)
        a = bl.fsrr_spectrum(cs, cr, room, src.position, rcv.position, 3, cfg)
        b = bl.fsrr_spectrum(cs, cr, room, src.position, rcv.position, 3, cfg)
        assert np.array_equal(a.values, b.values)
        c = bl.fsrr_spectrum(cs, cr, room, src.position, rcv.position, 3,
                             bl.FsrrConfig(rng_seed=12))
        assert not np.array_equal(a.values, c.values)

    def test_single_term_closed_form(self, room, poses):
        # direct path only, all signs +1, monopoles: the spreading factor has
        # no 1/(4 pi) and the coefficients sit on the 1 m measurement sphere
        src, rcv = poses
        freqs = np.array([250.0])
        k = float(room.medium.wavenumbers(freqs)[0])
        mono_s = dv.monopole_coefficients(freqs, room.medium, kind="source")
        mono_r = dv.monopole_coefficients(freqs, room.medium, kind="receiver")
        cfg = bl.FsrrConfig(rng_seed=0, sign_mode="all_plus")
        spec = bl.fsrr_spectrum(mono_s, mono_r, room, src.position, rcv.position, 0, cfg)
        d = float(np.linalg.norm(np.subtract(rcv.position, src.position)))
        c_tilde = (-1j * k / math.sqrt(4 * math.pi)) * complex(sph.spherical_hankel2(0, k))
        y00 = 1.0 / math.sqrt(4 * math.pi)
        expected = np.exp(-1j * k * d) / d * (c_tilde * y00) ** 2
        assert complex(spec.values[0]) == pytest.approx(expected, rel=1e-12)
        assert abs(spec.values[0]) == pytest.approx(abs(c_tilde * y00) ** 2 / d, rel=1e-12)

    def test_interval_mode_draws_inside_interval(self, room, poses):
        src, rcv = poses
        cfg = bl.FsrrConfig(rng_seed=5, sign_mode="interval")
        signs = cfg.draw_signs(1000)
        assert np.all(np.abs(signs) <= 1.0)
        assert np.unique(np.abs(signs)).size > 2

    def test_differs_from_far_field_method(self, room, poses):
        from deism.engine import DeismRequest, deism_spectrum

        src, rcv = poses
        freqs = np.array([200.0, 600.0])
        cs = dv.synthetic_directivity(3, freqs, room.medium, 0.4, seed=6)
        cr = dv.synthetic_directivity(3, freqs, room.medium, 0.5, seed=7, kind="receiver")
        fsrr = bl.fsrr_spectrum(cs, cr, room, src.position, rcv.position, 2,
                                bl.FsrrConfig(rng_seed=1))
        req = DeismRequest(room=room, src_pose=src, rcv_pose=rcv, c_src=cs, c_rcv=cr,
                           max_reflection_order=2, frequencies=freqs, method="LC")
        lc, _ = deism_spectrum(req)
        assert np.max(np.abs(fsrr.values - lc.values) / np.abs(lc.values)) > 0.01

    def test_grid_mismatch_rejected(self, room, poses):
        src, rcv = poses
        cs = dv.synthetic_directivity(2, np.array([100.0]), room.medium, 0.3, seed=1)
        cr = dv.synthetic_directivity(2, np.array([200.0]), room.medium, 0.3, seed=1,
                                      kind="receiver")
        with pytest.raises(ConfigError):
            bl.fsrr_spectrum(cs, cr, room, src.position, rcv.position, 1, bl.FsrrConfig())
