"""OFDM signal construction and parsing for the two-stage protocol.

Stage 1 sends classic 802.11a training (STF + long-format LTF) from one
antenna at a time for channel estimation. Stage 2 sends one superposed frame:
STF, three precoded one-symbol LTFs (common, private 1, private 2; absent
streams keep a zero slot so timing is fixed), a SERVICE symbol carrying the
MCS indices, and 50 payload symbols. DFTs are unitary so grid and sample
energies match exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import OfdmParams

__all__ = [
    "StreamRole",
    "TxSignal",
    "effective_bandwidth",
    "map_constellation",
    "demap_llr",
    "constellation",
    "stf_time",
    "ltf_time_stage1",
    "build_stage1_frame",
    "build_stage2_frame",
    "ofdm_modulate",
    "ofdm_demodulate",
    "pilot_values",
    "pilot_symbol_mask",
    "encode_service_bits",
    "decode_service_bits",
    "write_sample_file",
    "read_sample_file",
]

STREAM_ROLES = ("common", "private1", "private2")


class StreamRole:
    COMMON = "common"
    PRIVATE1 = "private1"
    PRIVATE2 = "private2"


# 802.11a short training sequence (frequency domain, logical index -26..26).
_STF_LOGICAL = {
    -24: 1 + 1j, -20: -1 - 1j, -16: 1 + 1j, -12: -1 - 1j, -8: -1 - 1j, -4: 1 + 1j,
    4: -1 - 1j, 8: -1 - 1j, 12: 1 + 1j, 16: 1 + 1j, 20: 1 + 1j, 24: 1 + 1j,
}

# 802.11a long training sequence on the 52 used subcarriers.
_LTF_LOGICAL_SEQ = [
    1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1,
    1, 1, 1,  # -26..-1
    1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1,
    -1, 1, 1, 1, 1,  # 1..26
]

# 802.11a pilot polarity sequence p_0..p_126, cyclically reused ('1' = +1).
_PILOT_POLARITY = np.array([int(c) for c in
    "1111" "0001" "0000" "1101" "0011" "0110" "1111" "1101"
    "1101" "1001" "1101" "0001" "0100" "1001" "1111" "0011"
    "0010" "1011" "0001" "1000" "0100" "1011" "1101" "0101"
    "0000" "0101" "1010" "1110" "0100" "0111" "0000" "000"], dtype=np.int8) * 2 - 1

# Base pilot pattern on logical subcarriers (-21, -7, 7, 21).
_PILOT_BASE_LOGICAL = {-21: 1.0, -7: 1.0, 7: 1.0, 21: -1.0}


def _logical_to_bin(logical: int, n: int = 64) -> int:
    return logical % n


def stf_freq(params: OfdmParams) -> np.ndarray:
    grid = np.zeros(params.n_subcarriers, dtype=np.complex128)
    for logical, v in _STF_LOGICAL.items():
        grid[_logical_to_bin(logical)] = np.sqrt(13.0 / 6.0) * v
    return grid


def ltf_freq(params: OfdmParams) -> np.ndarray:
    grid = np.zeros(params.n_subcarriers, dtype=np.complex128)
    logicals = [k for k in range(-26, 27) if k != 0]
    for logical, v in zip(logicals, _LTF_LOGICAL_SEQ):
        grid[_logical_to_bin(logical)] = v
    return grid


def pilot_values(params: OfdmParams, symbol_index: int) -> np.ndarray:
    """Pilot cell values for one payload symbol (order of pilot_indices)."""
    base = np.array([_PILOT_BASE_LOGICAL[k] for k in (-21, -7, 7, 21)])
    order = np.argsort([_logical_to_bin(k) for k in (-21, -7, 7, 21)])
    pol = _PILOT_POLARITY[symbol_index % len(_PILOT_POLARITY)]
    return (base * pol)[order]


def pilot_symbol_mask(role: str, n_symbols: int) -> np.ndarray:
    """Which payload symbols carry this stream's pilots.

    Symbols are labelled DATA 1..50; the common stream owns the pilots of the
    odd-labelled symbols, the private streams those of the even-labelled ones.
    """
    labels = np.arange(1, n_symbols + 1)
    if role == StreamRole.COMMON:
        return labels % 2 == 1
    return labels % 2 == 0


def effective_bandwidth(params: OfdmParams) -> float:
    """Bandwidth left for data after CP and guard-band overhead."""
    n = params.n_subcarriers
    return (params.total_bandwidth_hz
            * (n / (n + params.cp_len))
            * (len(params.data_indices) / n))


# ---------------------------------------------------------------------------
# Constellations: Gray-mapped square QAM, unit average energy, 802.11 style.

_QAM_NORM = {1: 1.0, 2: np.sqrt(2.0), 4: np.sqrt(10.0), 6: np.sqrt(42.0), 8: np.sqrt(170.0)}


def _gray_to_index(g: np.ndarray) -> np.ndarray:
    idx = g.copy()
    shift = 1
    while shift < 16:
        idx ^= idx >> shift
        shift <<= 1
    return idx


def _axis_levels(bits_per_axis: int) -> np.ndarray:
    """levels[b] = amplitude for the Gray codeword b on one axis."""
    m = 1 << bits_per_axis
    idx = _gray_to_index(np.arange(m))
    return (2 * idx - (m - 1)).astype(np.float64)


def constellation(m: int) -> np.ndarray:
    """All 2^m points, indexed by the integer value of their bit label
    (first half of the bits on I, second half on Q; BPSK is real)."""
    if m == 1:
        return np.array([-1.0 + 0j, 1.0 + 0j])
    half = m // 2
    lev = _axis_levels(half)
    i_part = np.repeat(lev, 1 << half)
    q_part = np.tile(lev, 1 << half)
    return (i_part + 1j * q_part) / _QAM_NORM[m]


def map_constellation(bits: np.ndarray, m: int) -> np.ndarray:
    """Map a bit sequence to unit-average-energy symbols, m bits apiece."""
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    if bits.size % m:
        raise ValueError("bit count not divisible by bits per symbol")
    groups = bits.reshape(-1, m)
    labels = groups @ (1 << np.arange(m - 1, -1, -1, dtype=np.int64))
    return constellation(m)[labels]


def demap_llr(symbols: np.ndarray, m: int, snr_lin: np.ndarray | float) -> np.ndarray:
    """Max-log per-bit LLRs (positive favours bit 0) for Gray square QAM.

    snr_lin is the post-equalization SINR |g|^2 / v per symbol (scalar or
    per-symbol array); symbols are the unbiased estimates s + noise.
    """
    symbols = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    snr = np.broadcast_to(np.asarray(snr_lin, dtype=np.float64), symbols.shape)
    if m == 1:
        out = np.empty((symbols.size, 1))
        out[:, 0] = -4.0 * symbols.real * snr  # d(-1)^2 - d(+1)^2 = -4x
        return out.reshape(-1)
    half = m // 2
    lev = _axis_levels(half) / _QAM_NORM[m]   # lev[label] = axis amplitude
    labels = np.arange(1 << half)
    out = np.empty((symbols.size, m))
    for axis, vals in ((0, symbols.real), (1, symbols.imag)):
        d2 = (vals[:, None] - lev[None, :]) ** 2  # columns indexed by label
        for b in range(half):
            bit_of_label = (labels >> (half - 1 - b)) & 1
            d0 = d2[:, bit_of_label == 0].min(axis=1)
            d1 = d2[:, bit_of_label == 1].min(axis=1)
            out[:, axis * half + b] = (d1 - d0) * snr
    return out.reshape(-1)


# ---------------------------------------------------------------------------
# Unitary per-symbol DFT processing.

def ofdm_modulate(grid: np.ndarray, cp_len: int = 16) -> np.ndarray:
    """Grid (..., n_sc) -> CP-prefixed time samples (..., n_sc + cp_len)."""
    grid = np.asarray(grid, dtype=np.complex128)
    n = grid.shape[-1]
    body = np.fft.ifft(grid, axis=-1) * np.sqrt(n)
    return np.concatenate([body[..., n - cp_len:], body], axis=-1)


def ofdm_demodulate(samples: np.ndarray, n_sc: int = 64, cp_len: int = 16) -> np.ndarray:
    """CP-prefixed symbol samples (..., n_sc + cp_len) -> grid (..., n_sc)."""
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.shape[-1] != n_sc + cp_len:
        raise ValueError("symbol sample count must be n_sc + cp_len")
    body = samples[..., cp_len:]
    return np.fft.fft(body, axis=-1) / np.sqrt(n_sc)


def stf_time(params: OfdmParams) -> np.ndarray:
    """8 us short training field: ten repeats of the 16-sample pattern."""
    base = np.fft.ifft(stf_freq(params)) * np.sqrt(params.n_subcarriers)
    return np.tile(base[:16], 10)


def ltf_time_stage1(params: OfdmParams) -> np.ndarray:
    """8 us long training field: 32-sample guard + two 64-sample periods."""
    body = np.fft.ifft(ltf_freq(params)) * np.sqrt(params.n_subcarriers)
    return np.concatenate([body[-32:], body, body])


# ---------------------------------------------------------------------------
# Frames.

@dataclass
class TxSignal:
    """Per-antenna baseband samples plus the per-symbol frequency grids."""

    time: np.ndarray                    # (2, n_samples)
    grids: np.ndarray                   # (n_ofdm_symbols, 2, n_sc); STF excluded
    stf: np.ndarray                     # (2, 160)
    stage: int
    meta: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.time.shape[1]


def build_stage1_frame(antenna: int, params: OfdmParams, amplitude: float = 1.0) -> TxSignal:
    """STF + long LTF on one antenna, silence on the other."""
    if antenna not in (0, 1):
        raise ValueError("antenna must be 0 or 1")
    stf = stf_time(params) * amplitude
    ltf = ltf_time_stage1(params) * amplitude
    time = np.zeros((2, stf.size + ltf.size), dtype=np.complex128)
    time[antenna, : stf.size] = stf
    time[antenna, stf.size:] = ltf
    grids = np.zeros((0, 2, params.n_subcarriers), dtype=np.complex128)
    stf2 = np.zeros((2, stf.size), dtype=np.complex128)
    stf2[antenna] = stf
    return TxSignal(time=time, grids=grids, stf=stf2, stage=1,
                    meta={"antenna": antenna, "amplitude": amplitude,
                          "ltf_start": stf.size})


SERVICE_SPARE_BITS = 4


def encode_service_bits(mcs_indices: tuple[int | None, int | None, int | None]) -> np.ndarray:
    """Three 4-bit MCS indices (0xF marks an absent stream) + spare bits."""
    bits = []
    for idx in mcs_indices:
        v = 0xF if idx is None else int(idx)
        if not 0 <= v <= 0xF:
            raise ValueError("MCS index out of 4-bit range")
        bits.extend((v >> (3 - b)) & 1 for b in range(4))
    bits.extend([0] * SERVICE_SPARE_BITS)
    return np.array(bits, dtype=np.uint8)


def decode_service_bits(bits: np.ndarray) -> tuple[int | None, int | None, int | None]:
    bits = np.asarray(bits).reshape(-1)
    vals = []
    for s in range(3):
        v = 0
        for b in range(4):
            v = (v << 1) | int(bits[4 * s + b])
        vals.append(None if v == 0xF else v)
    return tuple(vals)


def _stream_symbol_grid(data_symbols: np.ndarray, role: str, params: OfdmParams) -> np.ndarray:
    """Place one stream's payload symbols and parity pilots on the grid.

    data_symbols: (n_data_symbols, n_data_subcarriers) complex.
    Returns (n_data_symbols, n_sc).
    """
    n_sym = params.n_data_symbols
    grid = np.zeros((n_sym, params.n_subcarriers), dtype=np.complex128)
    grid[:, list(params.data_indices)] = data_symbols
    mask = pilot_symbol_mask(role, n_sym)
    pil = list(params.pilot_indices)
    for j in np.flatnonzero(mask):
        grid[j, pil] = pilot_values(params, j)
    return grid


def build_stage2_frame(stream_symbols: dict, precoders: dict, params: OfdmParams,
                       service_symbols: np.ndarray, meta: dict | None = None) -> TxSignal:
    """Assemble the superposed stage-2 frame.

    stream_symbols maps roles to (n_data_symbols, n_data_subcarriers) payload
    symbol arrays; precoders maps roles to length-2 complex vectors. Absent
    streams simply do not appear. service_symbols is the length-48 BPSK
    payload of the SERVICE symbol (sent through the common precoder, or the
    sum of the private precoders when there is no common stream).
    """
    n_sc = params.n_subcarriers
    n_sym = params.n_data_symbols
    roles = list(STREAM_ROLES)
    pset = {r: np.asarray(precoders[r], dtype=np.complex128).reshape(2)
            for r in roles if r in precoders and precoders[r] is not None}
    if not pset:
        raise ValueError("at least one stream must be precoded")

    ltf = ltf_freq(params)
    n_ofdm = 3 + 1 + n_sym   # three LTF slots + SERVICE + payload
    grids = np.zeros((n_ofdm, 2, n_sc), dtype=np.complex128)

    for slot, role in enumerate(roles):
        if role in pset:
            grids[slot] = np.outer(pset[role], ltf)

    # SERVICE rides the sum of the present precoders: always at full power
    # even when the optimizer turns a stream off
    service_pc = sum(pset[r] for r in pset)
    svc_grid = np.zeros(n_sc, dtype=np.complex128)
    svc_grid[list(params.data_indices)] = service_symbols
    svc_grid[list(params.pilot_indices)] = pilot_values(params, 0)
    grids[3] = np.outer(service_pc, svc_grid)

    for role, syms in stream_symbols.items():
        if role not in pset:
            raise ValueError(f"stream {role} has symbols but no precoder")
        syms = np.asarray(syms, dtype=np.complex128)
        if syms.shape != (n_sym, len(params.data_indices)):
            raise ValueError("payload symbol geometry mismatch")
        sgrid = _stream_symbol_grid(syms, role, params)          # (n_sym, n_sc)
        grids[4:] += sgrid[:, None, :] * pset[role][None, :, None]

    # STF rides both antennas at the precoders' total power
    total_power = sum(float(np.vdot(p, p).real) for p in pset.values())
    stf = stf_time(params)
    stf2 = np.stack([stf, stf]) * np.sqrt(total_power / 2.0)
    sym_time = ofdm_modulate(grids, params.cp_len)               # (n_ofdm, 2, 80)
    time = np.concatenate([stf2] + [sym_time[i] for i in range(n_ofdm)], axis=1)
    info = {"mcs_indices": None, "n_ofdm_symbols": n_ofdm}
    if meta:
        info.update(meta)
    return TxSignal(time=time, grids=grids, stf=stf2, stage=2, meta=info)


# ---------------------------------------------------------------------------
# Channel application: per-subcarrier multiplication symbol by symbol (exact
# circular convolution given the CP); the 16-periodic STF sees the wideband
# mean response since it only serves synchronization.

def apply_channel(tx: TxSignal, h: np.ndarray, noise_variance: float,
                  rng: np.random.Generator | None = None,
                  noise: np.ndarray | None = None,
                  phase_walk_std: float = 0.0,
                  pad: int = 0, cp_len: int = 16) -> tuple[np.ndarray, int]:
    """Receive tx through the per-subcarrier channel h (n_sc, 2) at one RX.

    Returns (samples, frame_start). Noise may be supplied explicitly (for
    paired-seed reuse across MCS candidates) or drawn from rng. An optional
    per-symbol common phase random walk models receiver LO drift.
    """
    n_sc = h.shape[0]
    h_mean = h.mean(axis=0)
    pieces = []
    theta = 0.0

    if tx.stage == 1:
        stf_len = 160
        # y[n] = sum_ant conj(h_ant) x_ant[n]
        y_stf = np.tensordot(np.conj(h_mean), tx.time[:, :stf_len], axes=(0, 0))
        body = tx.time[:, stf_len + 32: stf_len + 96]   # one LTF period
        grid = np.fft.fft(body, axis=-1) / np.sqrt(n_sc)
        y_grid = np.sum(np.conj(h).T * grid, axis=0)
        y_body = np.fft.ifft(y_grid) * np.sqrt(n_sc)
        pieces.append(np.concatenate([y_stf, y_body[-32:], y_body, y_body]))
    else:
        pieces.append(np.tensordot(np.conj(h_mean), tx.stf, axes=(0, 0)))
        n_ofdm = tx.grids.shape[0]
        y_grids = np.einsum("ka,jak->jk", np.conj(h), tx.grids)
        sym = ofdm_modulate(y_grids, cp_len)
        for j in range(n_ofdm):
            if phase_walk_std > 0:
                theta += phase_walk_std * rng.standard_normal()
                pieces.append(sym[j] * np.exp(1j * theta))
            else:
                pieces.append(sym[j])
    y = np.concatenate(pieces)
    out_len = pad + y.size + pad
    if noise is None:
        if rng is None:
            rng = np.random.default_rng(0)
        noise = (rng.standard_normal(out_len) + 1j * rng.standard_normal(out_len)) \
            * np.sqrt(noise_variance / 2.0)
    else:
        if noise.size < out_len:
            raise ValueError("supplied noise is too short")
        noise = noise[:out_len]
    samples = noise.astype(np.complex128).copy()
    samples[pad: pad + y.size] += y
    return samples, pad


# ---------------------------------------------------------------------------
# Raw-sample export: interleaved float32 re/im pairs, antennas planar, with a
# small JSON sidecar handled by the caller.

def write_sample_file(path, signal: TxSignal) -> None:
    flat = np.empty((signal.time.shape[0], signal.n_samples, 2), dtype=np.float32)
    flat[..., 0] = signal.time.real
    flat[..., 1] = signal.time.imag
    flat.tofile(path)


def read_sample_file(path, n_antennas: int = 2) -> np.ndarray:
    raw = np.fromfile(path, dtype=np.float32).reshape(n_antennas, -1, 2)
    return (raw[..., 0] + 1j * raw[..., 1]).astype(np.complex128)
