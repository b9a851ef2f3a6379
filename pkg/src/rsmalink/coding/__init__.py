"""Channel coding: MCS catalogue, CRC-8 and polar codes with SCL decoding."""

from .mcs import EFFECTIVE_BANDWIDTH_HZ, McsLevel, mcs_catalogue, payload_geometry
from .polar import (
    CRC8_POLY,
    PolarCodeConfig,
    bhattacharyya_profile,
    code_for_mcs,
    crc8,
    dump_code_description,
    encode,
    load_code_description,
    polar_construct,
    scl_decode,
)

__all__ = [
    "EFFECTIVE_BANDWIDTH_HZ",
    "McsLevel",
    "mcs_catalogue",
    "payload_geometry",
    "CRC8_POLY",
    "PolarCodeConfig",
    "bhattacharyya_profile",
    "code_for_mcs",
    "crc8",
    "dump_code_description",
    "encode",
    "load_code_description",
    "polar_construct",
    "scl_decode",
]
