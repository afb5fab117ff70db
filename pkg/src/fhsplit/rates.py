"""Closed-form fronthaul bandwidth models for splits 8 / 7.1 / 7.2 / 7.3.

All rates are bit/s. Inputs are integral, so 7.1/7.2/7.3 rates are exact
integers; option 8 multiplies by the rational oversampling factor and is
returned as an exact Fraction. Display rounding (half-up to 0.1 Mbit/s)
happens only at the formatting boundary.

Per cell, with N_sc subcarriers, N_layers layers, N_ant antenna ports,
O_m bits/symbol, IQ bits per I/Q component, S_bw bits per soft bit and
R_sym symbols per second:

    option 7.1:    2 * IQ * N_sc * N_ant * N_layers * R_sym
    option 7.2:    2 * IQ * N_sc * N_layers * R_sym        (= 7.1 / N_ant)
    option 7.3 DL: N_sc * N_layers * O_m * R_sym
    option 7.3 UL: N_sc * N_layers * O_m * S_bw * R_sym    (= 7.3 DL * S_bw)
    option 8:      7.1 * oversampling_factor
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple, Union

from .cell import CellConfig, Direction, LinkBudget, MODULATION_NAMES, SplitOption

RateBps = Union[int, Fraction]


def rate_71(cfg: CellConfig) -> int:
    """Frequency-domain I/Q rate; scales with antenna ports."""
    return (
        2
        * cfg.iq_component_bits
        * cfg.n_sc
        * cfg.n_ant
        * cfg.n_layers
        * cfg.symbols_per_second
    )


def rate_72(cfg: CellConfig) -> int:
    """Port-combined I/Q rate: option 7.1 divided by the port count."""
    return 2 * cfg.iq_component_bits * cfg.n_sc * cfg.n_layers * cfg.symbols_per_second


def rate_73_dl(cfg: CellConfig) -> int:
    """Downlink hard-bit rate: bits instead of I/Q symbols."""
    return cfg.n_sc * cfg.n_layers * cfg.mod_order * cfg.symbols_per_second


def rate_73_ul(cfg: CellConfig) -> int:
    """Uplink soft-bit rate: one S_bw-bit code per demodulated bit."""
    return rate_73_dl(cfg) * cfg.soft_bit_width


def rate_option8(cfg: CellConfig) -> Fraction:
    """Time-domain I/Q rate: option 7.1 times the oversampling factor."""
    return Fraction(rate_71(cfg)) * cfg.oversampling_factor


def rate(cfg: CellConfig, option: SplitOption) -> RateBps:
    """Dispatch a rate model by split option."""
    if option is SplitOption.OPTION_8:
        return rate_option8(cfg)
    if option is SplitOption.OPTION_7_1:
        return rate_71(cfg)
    if option is SplitOption.OPTION_7_2:
        return rate_72(cfg)
    if option is SplitOption.OPTION_7_3_DL:
        return rate_73_dl(cfg)
    return rate_73_ul(cfg)


def efficiency_ratio(
    direction: Direction,
    mod_order: int,
    soft_bit_width: Optional[int] = None,
    iq_component_bits: int = 16,
) -> Fraction:
    """7.2-over-7.3 bandwidth ratio for one direction.

    Downlink: 2*IQ / O_m. Uplink: 2*IQ / (O_m * S_bw). Values above 1 mean
    the bit-carrying split needs less fronthaul than the I/Q-carrying one.
    """
    if mod_order not in MODULATION_NAMES:
        raise ValueError(f"mod_order must be one of {sorted(MODULATION_NAMES)}")
    if iq_component_bits < 1:
        raise ValueError("iq_component_bits must be >= 1")
    if direction is Direction.DL:
        return Fraction(2 * iq_component_bits, mod_order)
    if soft_bit_width is None or soft_bit_width < 1:
        raise ValueError("uplink ratio needs soft_bit_width >= 1")
    return Fraction(2 * iq_component_bits, mod_order * soft_bit_width)


def expected_efficiency(
    mix: Iterable[Tuple[int, float]],
    direction: Direction,
    soft_bit_width: Optional[int] = None,
    iq_component_bits: int = 16,
) -> float:
    """Traffic-weighted mean of efficiency_ratio over a modulation mix.

    The mix lists (mod_order, fraction) pairs; fractions may sum to less
    than 1 (unreported traffic), in which case the mean is renormalized
    over the reported fractions.
    """
    pairs = list(mix)
    if not pairs:
        raise ValueError("modulation mix must not be empty")
    total = 0.0
    weighted = 0.0
    for mod_order, fraction in pairs:
        if fraction < 0:
            raise ValueError(f"negative mix fraction for mod_order {mod_order}")
        ratio = efficiency_ratio(direction, mod_order, soft_bit_width, iq_component_bits)
        weighted += fraction * float(ratio)
        total += fraction
    if total <= 0:
        raise ValueError("mix fractions sum to zero")
    if total > 1 + 1e-9:
        raise ValueError(f"mix fractions sum to {total}, expected <= 1")
    return weighted / total


def max_fronthaul_distance_km(
    budget: LinkBudget, direction: Direction, processing_ms: float
) -> float:
    """Longest DU-RU fiber run that still meets the HARQ deadline.

    The direction's frame deadline minus the actual processing time is
    what remains for one-way propagation, charged once per direction.
    """
    if processing_ms < 0:
        raise ValueError("processing_ms must be >= 0")
    deadline = budget.deadline_ms(direction)
    margin_ms = deadline - processing_ms
    if margin_ms < 0:
        raise ValueError(
            f"processing time {processing_ms} ms exceeds the "
            f"{deadline} ms {direction.value} deadline"
        )
    return margin_ms * 1000.0 / budget.propagation_us_per_km


def mbps_tenths(rate_bps: RateBps) -> int:
    """Rate as an integer count of 0.1 Mbit/s, rounded half-up."""
    return math.floor(Fraction(rate_bps) / 100_000 + Fraction(1, 2))


def format_mbps(rate_bps: RateBps) -> str:
    """Rate as a one-decimal Mbit/s string (half-up rounding)."""
    tenths = mbps_tenths(rate_bps)
    return f"{tenths // 10}.{tenths % 10}"


class CapacityRow(NamedTuple):
    split: str
    direction: str
    rate_bps: RateBps

    @property
    def rate_mbps(self) -> float:
        return mbps_tenths(self.rate_bps) / 10


#: Shown next to planning tables: the option 8 model is 7.1 times the
#: oversampling factor, so the 20 MHz figure is 1.71 x 4300.8 = 7354.4
#: Mbit/s; the 7357.4 quoted in some published capacity tables does not
#: follow from that product and looks like a misprint.
OPTION8_NOTE = (
    "option 8 = option 7.1 x oversampling factor; at 20 MHz this gives "
    "7354.4 Mbit/s (the occasionally quoted 7357.4 appears to be a misprint)"
)


def capacity_table(cfg: CellConfig) -> list[CapacityRow]:
    """Per-split required fronthaul capacity, fixed row order."""
    return [
        CapacityRow("8", "both", rate_option8(cfg)),
        CapacityRow("7.1", "both", rate_71(cfg)),
        CapacityRow("7.2", "both", rate_72(cfg)),
        CapacityRow("7.3", "dl", rate_73_dl(cfg)),
        CapacityRow("7.3", "ul", rate_73_ul(cfg)),
    ]


def table_to_csv(rows: Sequence[CapacityRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["split", "direction", "rate_mbps"])
    for row in rows:
        writer.writerow([row.split, row.direction, format_mbps(row.rate_bps)])
    return buf.getvalue()


def table_to_json(rows: Sequence[CapacityRow]) -> str:
    payload = {
        "rows": [
            {"split": r.split, "direction": r.direction, "rate_mbps": r.rate_mbps}
            for r in rows
        ],
        "notes": [OPTION8_NOTE],
    }
    return json.dumps(payload, indent=2) + "\n"
