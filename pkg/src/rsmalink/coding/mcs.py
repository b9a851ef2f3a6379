"""The ten-level MCS catalogue (802.11g-style plus two 256-QAM levels)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..channel import OfdmParams

EFFECTIVE_BANDWIDTH_HZ = 12e6


@dataclass(frozen=True)
class McsLevel:
    index: int
    modulation: str
    m: int                  # bits per constellation symbol
    code_rate: Fraction

    @property
    def data_rate_bps(self) -> float:
        return EFFECTIVE_BANDWIDTH_HZ * self.m * float(self.code_rate)

    @property
    def rate_bits_per_symbol(self) -> float:
        return self.m * float(self.code_rate)

    def __str__(self) -> str:
        return f"{self.modulation} {self.code_rate}"


_CATALOGUE = (
    McsLevel(0, "BPSK", 1, Fraction(1, 2)),
    McsLevel(1, "BPSK", 1, Fraction(3, 4)),
    McsLevel(2, "QPSK", 2, Fraction(1, 2)),
    McsLevel(3, "QPSK", 2, Fraction(3, 4)),
    McsLevel(4, "16QAM", 4, Fraction(1, 2)),
    McsLevel(5, "16QAM", 4, Fraction(3, 4)),
    McsLevel(6, "64QAM", 6, Fraction(2, 3)),
    McsLevel(7, "64QAM", 6, Fraction(3, 4)),
    McsLevel(8, "256QAM", 8, Fraction(3, 4)),
    McsLevel(9, "256QAM", 8, Fraction(5, 6)),
)


def mcs_catalogue() -> tuple[McsLevel, ...]:
    return _CATALOGUE


def payload_geometry(mcs: McsLevel, params: OfdmParams) -> tuple[int, int]:
    """Coded length E and info length K (CRC included) for one stream.

    A stream fills every data subcarrier of every payload symbol, so
    E = n_data_subcarriers * n_data_symbols * m; K adds the 8 CRC bits on top
    of the nominal E*r info payload.
    """
    e = len(params.data_indices) * params.n_data_symbols * mcs.m
    k = int(round(e * mcs.code_rate)) + 8
    return e, k
