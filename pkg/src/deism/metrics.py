"""Quantitative comparison of transfer-function spectra.

Three scalar metrics over identical frequency grids: a root-mean-square log
spectral distance in decibels, a root-mean-square unwrapped phase error in
radians, and a relative l2 error of the complex spectra. The log spectral
distance squares the magnitude ratio inside the logarithm (so it equals the
conventional definition scaled by two); the conventional single-square value
is reported alongside.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .baselines import RtfSpectrum, assert_same_grid
from .errors import ConfigError

P_REF = 2e-5  # reference pressure, Pa


@dataclass
class ComparisonReport:
    """Scalar metrics plus optional per-frequency difference traces."""

    e_lsd: float
    e_lsd_conventional: float
    e_phase: float
    e_l2: float
    band: tuple[float, float]
    traces: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "e_lsd_db": self.e_lsd,
            "e_lsd_conventional_db": self.e_lsd_conventional,
            "e_phase_rad": self.e_phase,
            "e_l2": self.e_l2,
            "band_hz": list(self.band),
        }


def spl(spectrum: RtfSpectrum) -> np.ndarray:
    """Sound pressure level trace in dB re 2e-5 Pa.

    The root-mean-square pressure of a single-frequency complex amplitude is
    |H|/sqrt(2). Zero magnitudes yield -inf entries and a warning.
    """
    mag = np.abs(spectrum.values)
    if np.any(mag == 0):
        warnings.warn("spectrum contains zero magnitudes; SPL trace has -inf entries",
                      RuntimeWarning)
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(mag / math.sqrt(2.0) / P_REF)


def log_spectral_distance(h_test: RtfSpectrum, h_ref: RtfSpectrum):
    """RMS log spectral distance in dB, (printed form, conventional form).

    Printed form: sqrt(mean((10 log10(ratio^2))^2)) = sqrt(mean((20 log10 ratio)^2)),
    twice the conventional sqrt(mean((10 log10 ratio)^2)).
    """
    assert_same_grid(h_test, h_ref)
    ref_mag = np.abs(h_ref.values)
    if np.any(ref_mag == 0):
        raise ConfigError("reference spectrum has zero magnitude entries")
    ratio_db = 10.0 * np.log10(np.abs(h_test.values) / ref_mag)
    conventional = float(np.sqrt(np.mean(ratio_db**2)))
    return 2.0 * conventional, conventional


def phase_error(h_test: RtfSpectrum, h_ref: RtfSpectrum) -> float:
    """RMS difference of the phases, each unwrapped along frequency."""
    assert_same_grid(h_test, h_ref)
    ph_t = np.unwrap(np.angle(h_test.values))
    ph_r = np.unwrap(np.angle(h_ref.values))
    return float(np.sqrt(np.mean((ph_t - ph_r) ** 2)))


def relative_l2(h_a: RtfSpectrum, h_b: RtfSpectrum) -> float:
    """Relative l2 error ||H_a - H_b|| / ||H_a|| over the whole grid."""
    assert_same_grid(h_a, h_b)
    den = float(np.linalg.norm(h_a.values))
    if den == 0:
        raise ValueError("reference spectrum norm is zero")
    return float(np.linalg.norm(h_a.values - h_b.values)) / den


def compare(h_test: RtfSpectrum, h_ref: RtfSpectrum, with_traces: bool = False) -> ComparisonReport:
    """All metrics in one report; ``h_ref`` is the reference for e_lsd and e_l2."""
    lsd, lsd_conv = log_spectral_distance(h_test, h_ref)
    report = ComparisonReport(
        e_lsd=lsd,
        e_lsd_conventional=lsd_conv,
        e_phase=phase_error(h_test, h_ref),
        e_l2=relative_l2(h_ref, h_test),
        band=(float(h_ref.frequencies[0]), float(h_ref.frequencies[-1])),
    )
    if with_traces:
        report.traces = {
            "freq_hz": h_ref.frequencies.copy(),
            "magnitude_ratio_db": 20.0 * np.log10(
                np.abs(h_test.values) / np.abs(h_ref.values)
            ),
            "phase_difference_rad": np.unwrap(np.angle(h_test.values))
            - np.unwrap(np.angle(h_ref.values)),
        }
    return report
