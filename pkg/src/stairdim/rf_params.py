"""FMCW radar parametrization and its derived resolution attributes.

The chirp configuration fixes everything the rest of the pipeline needs to
know about the waveform: range resolution and maximum unambiguous range from
the sweep bandwidth, velocity resolution from the frame's chirp train, and
angular resolution from the virtual aperture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import c as SPEED_OF_LIGHT

__all__ = ["RadarConfig", "DerivedAttributes", "derive_attributes", "SPEED_OF_LIGHT"]


@dataclass(frozen=True)
class RadarConfig:
    """Chirp and array configuration of the sensor.

    Attributes:
        carrier_frequency_hz: RF carrier at the start of the sweep.
        bandwidth_hz: swept bandwidth per chirp.
        chirp_duration_s: duration of one chirp (fast-time window).
        samples_per_chirp: ADC samples per chirp.
        chirps_per_frame: chirps forming one frame (slow-time length).
        tx_count: physical transmit antennas.
        rx_count: physical receive antennas.
    """

    carrier_frequency_hz: float = 77.0e9
    bandwidth_hz: float = 3.6e9
    chirp_duration_s: float = 64.0e-6
    samples_per_chirp: int = 144
    chirps_per_frame: int = 8
    tx_count: int = 2
    rx_count: int = 4

    def __post_init__(self) -> None:
        for name in (
            "carrier_frequency_hz",
            "bandwidth_hz",
            "chirp_duration_s",
            "samples_per_chirp",
            "chirps_per_frame",
            "tx_count",
            "rx_count",
        ):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        for name in ("samples_per_chirp", "chirps_per_frame", "tx_count", "rx_count"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ValueError(f"{name} must be an integer, got {getattr(self, name)!r}")

    @property
    def virtual_antennas(self) -> int:
        """Size of the TDM virtual array."""
        return self.tx_count * self.rx_count

    @property
    def sample_interval_s(self) -> float:
        """Fast-time sample spacing T_s."""
        return self.chirp_duration_s / self.samples_per_chirp


@dataclass(frozen=True)
class DerivedAttributes:
    """Resolution/ambiguity attributes derived from a RadarConfig."""

    range_resolution_m: float
    max_range_m: float
    velocity_resolution_mps: float
    angular_resolution_rad: float
    wavelength_m: float
    virtual_antennas: int


def derive_attributes(cfg: RadarConfig) -> DerivedAttributes:
    """Derive resolution attributes from the chirp configuration.

    range resolution  c / (2 B)
    max range         N_S * range resolution
    velocity res.     c / (2 f_o T_ch N_P)
    angular res.      1.78 / N_A  (radians, half-wavelength uniform array)
    """
    r_res = SPEED_OF_LIGHT / (2.0 * cfg.bandwidth_hz)
    r_max = cfg.samples_per_chirp * r_res
    v_res = SPEED_OF_LIGHT / (
        2.0 * cfg.carrier_frequency_hz * cfg.chirp_duration_s * cfg.chirps_per_frame
    )
    n_virtual = cfg.virtual_antennas
    alpha_res = 1.78 / n_virtual
    return DerivedAttributes(
        range_resolution_m=r_res,
        max_range_m=r_max,
        velocity_resolution_mps=v_res,
        angular_resolution_rad=alpha_res,
        wavelength_m=SPEED_OF_LIGHT / cfg.carrier_frequency_hz,
        virtual_antennas=n_virtual,
    )


if __name__ == "__main__":
    attrs = derive_attributes(RadarConfig())
    print(f"range resolution   {attrs.range_resolution_m * 100:.4f} cm")
    print(f"max range          {attrs.max_range_m:.4f} m")
    print(f"velocity res.      {attrs.velocity_resolution_mps:.4f} m/s")
    print(f"angular res.       {math.degrees(attrs.angular_resolution_rad):.3f} deg")
    assert abs(attrs.range_resolution_m - 0.041638) < 1e-4
    assert abs(attrs.max_range_m - 5.996) < 1e-2
