"""Polar codes with CRC-aided list decoding and shortening-based rate matching.

Construction ranks the synthetic bit channels by a Bhattacharyya-parameter
recursion (computed in the log domain for numerical stability) at a fixed
design SNR. Rate matching shortens the tail of the codeword: input bits at
positions >= E are forced frozen, which makes the last N - E codeword bits
deterministically zero, so they are not transmitted and re-enter decoding as
large known-sign LLRs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..channel import OfdmParams
from .mcs import McsLevel, payload_geometry
from ._kernels import LARGE_LLR, crc_remainder, polar_transform_bits, scl_decode_kernel

CODE_DESCRIPTION_SCHEMA = "rsmalink-polar-code/1"

CRC8_POLY = 0x07  # x^8 + x^2 + x + 1, zero init, no reflection


def _poly_bits(poly: int, width: int) -> np.ndarray:
    bits = [(poly >> (width - 1 - i)) & 1 for i in range(width)]
    return np.array([1] + bits, dtype=np.uint8)


@dataclass(frozen=True)
class PolarCodeConfig:
    block_len: int                 # N, power of two
    info_len: int                  # K, CRC bits included
    coded_len: int                 # E <= N after shortening
    frozen_mask: np.ndarray        # (N,) uint8, 1 = frozen
    info_positions: np.ndarray     # (K,) int64 ascending
    crc_width: int = 8
    crc_poly: int = CRC8_POLY
    list_depth: int = 2
    design_snr_db: float = 2.0

    @property
    def payload_len(self) -> int:
        return self.info_len - self.crc_width

    def crc_poly_bits(self) -> np.ndarray:
        return _poly_bits(self.crc_poly, self.crc_width)


def bhattacharyya_profile(n_levels: int, design_snr_db: float) -> np.ndarray:
    """Log-domain Bhattacharyya parameters of the 2^n_levels bit channels."""
    es_n0 = 10.0 ** (design_snr_db / 10.0)
    lz = np.array([-es_n0], dtype=np.float64)  # log z0 = -Es/N0
    for _ in range(n_levels):
        # minus (check) channel: z' = 2z - z^2 ; plus (bit) channel: z' = z^2
        with np.errstate(divide="ignore"):
            minus = lz + np.log(2.0 - np.exp(np.minimum(lz, 0.0)))
        plus = 2.0 * lz
        lz = np.concatenate([minus, plus])
    return lz


def shortened_erasure_profile(block_len: int, coded_len: int,
                              design_snr_db: float) -> np.ndarray:
    """Per-bit-channel erasure probabilities with the shortened tail known.

    Exact erasure-channel evolution with a position-dependent start: the
    untransmitted positions are never erased (the decoder knows them), so
    heavily shortened codes get a materially better frozen set than the
    uniform profile would give.
    """
    eps = float(np.exp(-10.0 ** (design_snr_db / 10.0)))
    z = np.full(block_len, eps)
    z[coded_len:] = 0.0

    def recurse(vec: np.ndarray) -> np.ndarray:
        if vec.size == 1:
            return vec
        half = vec.size // 2
        a, b = vec[:half], vec[half:]
        left = recurse(a + b - a * b)   # erased if either input is
        right = recurse(a * b)          # genie-aided: erased only if both
        return np.concatenate([left, right])

    return recurse(z)


def polar_construct(block_len: int, info_len: int, design_snr_db: float = 2.0,
                    coded_len: int | None = None, crc_width: int = 8,
                    crc_poly: int = CRC8_POLY, list_depth: int = 2) -> PolarCodeConfig:
    n = block_len
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError("block length must be a power of two >= 2")
    if info_len >= n or info_len <= crc_width:
        raise ValueError("need crc_width < K < N")
    e = n if coded_len is None else coded_len
    if not info_len <= e <= n:
        raise ValueError("coded length must satisfy K <= E <= N")
    if e < n:
        reliability = shortened_erasure_profile(n, e, design_snr_db)
    else:
        reliability = bhattacharyya_profile(int(np.log2(n)), design_snr_db)
    # most reliable first; index breaks exact ties deterministically
    order = np.lexsort((np.arange(n), reliability))
    info = [int(i) for i in order if i < e][:info_len]
    if len(info) < info_len:
        raise ValueError("not enough transmittable positions for K info bits")
    info_positions = np.array(sorted(info), dtype=np.int64)
    frozen = np.ones(n, dtype=np.uint8)
    frozen[info_positions] = 0
    return PolarCodeConfig(block_len=n, info_len=info_len, coded_len=e,
                           frozen_mask=frozen, info_positions=info_positions,
                           crc_width=crc_width, crc_poly=crc_poly,
                           list_depth=list_depth, design_snr_db=design_snr_db)


@lru_cache(maxsize=None)
def _code_for_geometry(coded_len: int, info_len: int, design_snr_db: float,
                       list_depth: int) -> PolarCodeConfig:
    block_len = 1
    while block_len < coded_len:
        block_len <<= 1
    return polar_construct(block_len, info_len, design_snr_db,
                           coded_len=coded_len, list_depth=list_depth)


# Construction design SNR per MCS index, calibrated so each code's waterfall
# sits as low as the erasure-proxy construction allows for its constellation.
MCS_DESIGN_SNR_DB = {0: 0.0, 1: 2.0, 2: 0.0, 3: 2.0, 4: 0.0,
                     5: 3.0, 6: 4.0, 7: 6.0, 8: 8.0, 9: 12.0}


def code_for_mcs(mcs: McsLevel, params: OfdmParams,
                 design_snr_db: float | None = None,
                 list_depth: int = 2) -> PolarCodeConfig:
    e, k = payload_geometry(mcs, params)
    if design_snr_db is None:
        design_snr_db = MCS_DESIGN_SNR_DB[mcs.index]
    return _code_for_geometry(e, k, design_snr_db, list_depth)


def crc8(bits: np.ndarray, poly: int = CRC8_POLY, width: int = 8) -> np.ndarray:
    """CRC remainder bits (MSB first) of a bit sequence."""
    bits = np.ascontiguousarray(np.asarray(bits, dtype=np.uint8))
    return crc_remainder(bits, _poly_bits(poly, width))


def encode(info_bits: np.ndarray, cfg: PolarCodeConfig) -> np.ndarray:
    """CRC-append, map to the unfrozen positions, transform, shorten to E."""
    info_bits = np.ascontiguousarray(np.asarray(info_bits, dtype=np.uint8))
    if info_bits.shape[0] != cfg.payload_len:
        raise ValueError(f"expected {cfg.payload_len} info bits, got {info_bits.shape[0]}")
    if cfg.crc_width:
        tail = crc_remainder(info_bits, cfg.crc_poly_bits())
        vec = np.concatenate([info_bits, tail])
    else:
        vec = info_bits
    u = np.zeros(cfg.block_len, dtype=np.uint8)
    u[cfg.info_positions] = vec
    x = polar_transform_bits(u)
    return x[: cfg.coded_len]


def scl_decode(llrs: np.ndarray, cfg: PolarCodeConfig) -> tuple[np.ndarray, bool]:
    """List decode; returns (payload bits, crc_ok).

    Among the surviving list paths the most likely CRC-passing one wins; if
    none passes, the best-metric path is returned with crc_ok False.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape[0] != cfg.coded_len:
        raise ValueError("LLR length must equal the rate-matched length")
    full = np.empty(cfg.block_len, dtype=np.float64)
    full[: cfg.coded_len] = np.clip(np.nan_to_num(llrs, nan=0.0,
                                                  posinf=LARGE_LLR, neginf=-LARGE_LLR),
                                    -LARGE_LLR, LARGE_LLR)
    full[cfg.coded_len:] = LARGE_LLR  # shortened bits are known zeros
    xs, _pms, count = scl_decode_kernel(full, cfg.frozen_mask, cfg.list_depth)
    poly = cfg.crc_poly_bits()
    fallback = None
    for r in range(count):
        u = polar_transform_bits(xs[r])
        vec = u[cfg.info_positions]
        if fallback is None:
            fallback = vec
        if cfg.crc_width == 0:
            return vec, True
        if not crc_remainder(vec, poly).any():
            return vec[: cfg.payload_len], True
    assert fallback is not None
    if cfg.crc_width == 0:
        return fallback, True
    return fallback[: cfg.payload_len], False


def dump_code_description(cfg: PolarCodeConfig) -> str:
    """Versioned JSON description for cross-implementation interop."""
    return json.dumps({
        "schema": CODE_DESCRIPTION_SCHEMA,
        "block_len": cfg.block_len,
        "info_len": cfg.info_len,
        "coded_len": cfg.coded_len,
        "crc_width": cfg.crc_width,
        "crc_poly": cfg.crc_poly,
        "list_depth": cfg.list_depth,
        "design_snr_db": cfg.design_snr_db,
        "frozen_positions": [int(i) for i in np.flatnonzero(cfg.frozen_mask)],
    }, indent=2)


def load_code_description(text: str) -> PolarCodeConfig:
    doc = json.loads(text)
    if doc.get("schema") != CODE_DESCRIPTION_SCHEMA:
        raise ValueError("unknown code description schema")
    n = doc["block_len"]
    frozen = np.zeros(n, dtype=np.uint8)
    frozen[doc["frozen_positions"]] = 1
    info_positions = np.flatnonzero(frozen == 0).astype(np.int64)
    return PolarCodeConfig(block_len=n, info_len=doc["info_len"],
                           coded_len=doc["coded_len"], frozen_mask=frozen,
                           info_positions=info_positions,
                           crc_width=doc["crc_width"], crc_poly=doc["crc_poly"],
                           list_depth=doc["list_depth"],
                           design_snr_db=doc["design_snr_db"])
