"""Radio-cell parameter sets and fronthaul latency budgets.

Everything in this module is an immutable value object: instances can be
shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

MODULATION_NAMES = {2: "QPSK", 4: "16QAM", 6: "64QAM", 8: "256QAM"}

#: LTE normal cyclic prefix: 7 symbols per 0.5 ms slot.
LTE_SYMBOLS_PER_SECOND = 14_000


class Direction(Enum):
    DL = "dl"
    UL = "ul"


class SplitOption(Enum):
    """The functional splits this planner models."""

    OPTION_8 = "8"
    OPTION_7_1 = "7.1"
    OPTION_7_2 = "7.2"
    OPTION_7_3_DL = "7.3dl"
    OPTION_7_3_UL = "7.3ul"


def _as_fraction(value: Union[int, float, str, Fraction]) -> Fraction:
    # Fraction(str(x)) keeps decimal literals exact: 1.71 -> 171/100,
    # not the nearest binary float.
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class CellConfig:
    """One radio cell, parameterized for the split rate models.

    Attributes:
        n_sc: subcarrier count (600 for 10 MHz LTE, 1200 for 20 MHz).
        n_layers: MIMO layer count.
        n_ant: antenna-port count.
        mod_order: bits per constellation symbol (2/4/6/8).
        bw_mhz: informational bandwidth label, not used in any formula.
        iq_component_bits: bits per I or Q component (a 32-bit I/Q pair
            is 2 x 16).
        soft_bit_width: bits used to code one uplink soft bit (LLR).
        symbols_per_second: exact integer symbol rate; stored instead of
            a rounded symbol period so rates come out in exact bit/s.
        oversampling_factor: time-domain/frequency-domain rate ratio used
            by the option 8 model; kept as an exact rational.
        n_fft: optional FFT size; when given, the oversampling factor is
            recomputed as n_fft / n_sc and the explicit factor is ignored.
    """

    n_sc: int
    n_layers: int
    n_ant: int
    mod_order: int
    bw_mhz: float = 0.0
    iq_component_bits: int = 16
    soft_bit_width: int = 8
    symbols_per_second: int = LTE_SYMBOLS_PER_SECOND
    oversampling_factor: Fraction = Fraction(171, 100)
    n_fft: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_sc <= 0:
            raise ValueError(f"n_sc must be positive, got {self.n_sc}")
        if self.n_layers < 1:
            raise ValueError(f"n_layers must be >= 1, got {self.n_layers}")
        if self.n_ant < 1:
            raise ValueError(f"n_ant must be >= 1, got {self.n_ant}")
        if self.mod_order not in MODULATION_NAMES:
            raise ValueError(
                f"mod_order must be one of {sorted(MODULATION_NAMES)}, "
                f"got {self.mod_order}"
            )
        if self.iq_component_bits < 1:
            raise ValueError("iq_component_bits must be >= 1")
        if self.soft_bit_width < 1:
            raise ValueError("soft_bit_width must be >= 1")
        if self.symbols_per_second <= 0:
            raise ValueError("symbols_per_second must be positive")
        if self.n_fft is not None:
            if self.n_fft < self.n_sc:
                raise ValueError("n_fft must be >= n_sc")
            object.__setattr__(
                self, "oversampling_factor", Fraction(self.n_fft, self.n_sc)
            )
        else:
            object.__setattr__(
                self, "oversampling_factor", _as_fraction(self.oversampling_factor)
            )
        if self.oversampling_factor < 1:
            raise ValueError("oversampling_factor must be >= 1")

    @property
    def modulation_name(self) -> str:
        return MODULATION_NAMES[self.mod_order]


@dataclass(frozen=True)
class LinkBudget:
    """HARQ-loop latency budget constraining the DU-RU distance.

    The LTE HARQ loop fixes the round trip at 3 ms, which leaves 1 ms for
    downlink and 2 ms for uplink frame processing; whatever a direction
    does not spend on processing is available for one-way propagation at
    propagation_us_per_km.
    """

    harq_rtt_ms: float = 3.0
    dl_processing_ms: float = 1.0
    ul_processing_ms: float = 2.0
    propagation_us_per_km: float = 5.0

    def __post_init__(self) -> None:
        for name in (
            "harq_rtt_ms",
            "dl_processing_ms",
            "ul_processing_ms",
            "propagation_us_per_km",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.dl_processing_ms > self.harq_rtt_ms:
            raise ValueError("dl_processing_ms exceeds harq_rtt_ms")
        if self.ul_processing_ms > self.harq_rtt_ms:
            raise ValueError("ul_processing_ms exceeds harq_rtt_ms")

    def deadline_ms(self, direction: Direction) -> float:
        """Frame processing deadline for one direction."""
        if direction is Direction.DL:
            return self.dl_processing_ms
        return self.ul_processing_ms

    def propagation_delay_us(self, distance_km: float) -> float:
        """One-way fiber propagation delay over distance_km."""
        if distance_km < 0:
            raise ValueError("distance_km must be >= 0")
        return distance_km * self.propagation_us_per_km


def preset(name: str) -> CellConfig:
    """Return a named cell profile shipped with the planner."""
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


PRESETS = {
    # 10 and 20 MHz LTE cells, 2x2 MIMO, 4 antenna ports, 16-QAM.
    "lte10": CellConfig(bw_mhz=10.0, n_sc=600, n_layers=2, n_ant=4, mod_order=4),
    "lte20": CellConfig(bw_mhz=20.0, n_sc=1200, n_layers=2, n_ant=4, mod_order=4),
    # Worst-case 100 MHz NR-like cell: 273 PRB at 30 kHz spacing, 8 layers,
    # 32 ports, 64-QAM uplink with 5-bit soft bits.
    "worst100": CellConfig(
        bw_mhz=100.0,
        n_sc=3276,
        n_layers=8,
        n_ant=32,
        mod_order=6,
        soft_bit_width=5,
        symbols_per_second=28_000,
        n_fft=4096,
    ),
}
