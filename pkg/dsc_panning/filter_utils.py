"""
Magnitude responses used by the impulse response analysis: spectral weightings (A-weighting per
IEC 61672, pink tilt) and the fractional-octave bands used by the truncation.

All filters here are zero-phase magnitude responses applied in the frequency domain.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# IEC 61672 A-weighting pole frequencies (Hz) and the gain normalizing the response to 0 dB at 1 kHz:
A_WEIGHTING_F1 = 20.598997
A_WEIGHTING_F2 = 107.65265
A_WEIGHTING_F3 = 737.86223
A_WEIGHTING_F4 = 12194.217
A_WEIGHTING_A1000 = 1.9997

PINK_REFERENCE_HZ = 1000.


@dataclass(frozen=True)
class WeightingSpec:
    a_weighting: bool = False
    pink_weighting: bool = False

    @classmethod
    def from_name(cls, name: str) -> "WeightingSpec":
        names = {
            "none": cls(),
            "a": cls(a_weighting=True),
            "pink": cls(pink_weighting=True),
            "pink+a": cls(a_weighting=True, pink_weighting=True),
        }
        try:
            return names[name.lower()]
        except KeyError:
            raise ValidationError(f"unknown weighting '{name}', expected one of {list(names)}")

    @property
    def name(self) -> str:
        if self.a_weighting and self.pink_weighting:
            return "pink+a"
        if self.a_weighting:
            return "a"
        if self.pink_weighting:
            return "pink"
        return "none"

    @property
    def enabled(self) -> bool:
        return self.a_weighting or self.pink_weighting


# Calibration default: pink and A weighting combined
CALIBRATION_WEIGHTING = WeightingSpec(a_weighting=True, pink_weighting=True)


def a_weighting_magnitude(freqs):
    """Linear A-weighting magnitude |R_A(f)|, normalized to unity at 1 kHz."""
    f_sq = np.asarray(freqs, dtype="float64") ** 2
    numerator = (A_WEIGHTING_F4 ** 2) * f_sq ** 2
    denominator = ((f_sq + A_WEIGHTING_F1 ** 2)
                   * np.sqrt((f_sq + A_WEIGHTING_F2 ** 2) * (f_sq + A_WEIGHTING_F3 ** 2))
                   * (f_sq + A_WEIGHTING_F4 ** 2))
    return numerator / denominator * 10 ** (A_WEIGHTING_A1000 / 20.)


def pink_weighting_magnitude(freqs):
    """-3 dB/octave tilt referenced to 1 kHz (zero at DC)."""
    freqs = np.asarray(freqs, dtype="float64")
    magnitude = np.zeros_like(freqs)
    positive = freqs > 0
    magnitude[positive] = np.sqrt(PINK_REFERENCE_HZ / freqs[positive])
    return magnitude


def weighting_magnitude(freqs, weighting: WeightingSpec):
    magnitude = np.ones_like(np.asarray(freqs, dtype="float64"))
    if weighting.a_weighting:
        magnitude = magnitude * a_weighting_magnitude(freqs)
    if weighting.pink_weighting:
        magnitude = magnitude * pink_weighting_magnitude(freqs)
    return magnitude


def octave_band_centers(f_low_hz: float, f_high_hz: float, bands_per_octave: int = 3) -> np.ndarray:
    """
    Fractional-octave center frequencies f_low * 2 ** (k / bands_per_octave) up to f_high (included).
    """
    assert f_low_hz > 0 and f_high_hz > f_low_hz and bands_per_octave >= 1
    nb_bands = int(np.floor(bands_per_octave * np.log2(f_high_hz / f_low_hz) + 1e-9)) + 1
    return f_low_hz * 2. ** (np.arange(nb_bands) / bands_per_octave)


def band_upper_edges(centers):
    """
    Upper edge of each band: the geometric mean of its center and the next one. The last band
    extends up to Nyquist (inf), the first one down to DC.
    """
    centers = np.asarray(centers, dtype="float64")
    return np.append(np.sqrt(centers[:-1] * centers[1:]), np.inf)
