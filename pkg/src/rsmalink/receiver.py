"""Per-receiver processing: synchronization, precoded-CSI estimation, fine
phase correction, MMSE equalization, SIC and stream decoding.

Pipelines per scheme: RSMA decodes the common stream, re-synthesizes and
subtracts it, then decodes the own private stream; SDMA decodes only the own
private stream (everything else is noise); NOMA's weak user stops after the
common stream while the strong one continues with SIC. Erroneous SIC is
faithful: whatever came out of the common decoder is re-encoded and removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import OfdmParams
from .coding import McsLevel, code_for_mcs, encode, scl_decode
from .coding.polar import PolarCodeConfig, polar_construct
from .ofdm import (
    StreamRole,
    decode_service_bits,
    demap_llr,
    ltf_freq,
    map_constellation,
    pilot_symbol_mask,
    pilot_values,
    stf_time,
)
from .precoding import SchemeKind

__all__ = [
    "SyncError",
    "RxObservation",
    "EffectiveChannelEstimate",
    "DecodeOutcome",
    "GenieAids",
    "service_code",
    "synchronize",
    "parse_frame",
    "estimate_precoded_csi",
    "estimate_noise_variance",
    "fps_phase_estimates",
    "fps_correct",
    "mmse_equalize",
    "sic_subtract",
    "decode_stream",
    "run_rx_pipeline",
    "diagnostics_to_csv",
]

SNR_CAP = 1e12          # post-equalization SINR ceiling (keeps LLRs finite)
SYNC_THRESHOLD = 0.8


class SyncError(RuntimeError):
    pass


@dataclass
class RxObservation:
    samples: np.ndarray
    true_timing_offset: int | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("non-finite received samples")


@dataclass
class EffectiveChannelEstimate:
    """Per-subcarrier estimates of h^H p for the three stream slots."""

    g_c: np.ndarray
    g_1: np.ndarray
    g_2: np.ndarray

    def get(self, role: str) -> np.ndarray:
        return {StreamRole.COMMON: self.g_c, StreamRole.PRIVATE1: self.g_1,
                StreamRole.PRIVATE2: self.g_2}[role]


@dataclass
class DecodeOutcome:
    service_ok: bool
    common_ok: bool | None
    private_ok: bool | None
    decoded_common_bits: np.ndarray | None
    decoded_private_bits: np.ndarray | None
    sigma2_hat: float
    service_mcs: tuple = (None, None, None)
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GenieAids:
    """Test-only shortcuts: exact timing, known noise power, known effective
    channels, or an externally supplied residual-interference level."""

    timing: bool = True
    sigma2: float | None = None
    effective: EffectiveChannelEstimate | None = None
    assume_service: bool = False


def service_code() -> PolarCodeConfig:
    """SERVICE symbol code: 16 info bits + CRC-8 in 48 BPSK cells."""
    return polar_construct(64, 24, design_snr_db=2.0, coded_len=48)


def synchronize(obs: RxObservation, params: OfdmParams, mode: str = "genie",
                threshold: float = SYNC_THRESHOLD) -> int:
    """Locate the frame start (index of the first STF sample)."""
    if mode == "genie":
        if obs.true_timing_offset is None:
            raise ValueError("genie sync needs the true offset")
        return obs.true_timing_offset
    if mode != "stf-correlate":
        raise ValueError("mode must be 'genie' or 'stf-correlate'")
    tmpl = stf_time(params)
    n = tmpl.size
    r = obs.samples
    if r.size < n:
        raise SyncError("observation shorter than the training field")
    # normalized matched filter |<r_d, t>|^2 / (|r_d|^2 |t|^2)
    corr = np.correlate(r, tmpl, mode="valid")
    energy = np.convolve(np.abs(r) ** 2, np.ones(n), mode="valid")
    metric = np.abs(corr) ** 2 / (energy * np.vdot(tmpl, tmpl).real + 1e-300)
    d = int(np.argmax(metric))
    if metric[d] < threshold:
        raise SyncError(f"no training-field peak (best metric {metric[d]:.3f})")
    return d


def parse_frame(samples: np.ndarray, start: int, params: OfdmParams,
                n_ofdm: int) -> np.ndarray:
    """Strip the STF and CP-prefixed symbols; return per-symbol grids."""
    sym_len = params.symbol_len
    base = start + 160
    need = base + n_ofdm * sym_len
    if need > samples.size:
        raise ValueError("frame extends past the observation")
    body = samples[base:need].reshape(n_ofdm, sym_len)[:, params.cp_len:]
    return np.fft.fft(body, axis=-1) / np.sqrt(params.n_subcarriers)


SMOOTHING_TAPS = 9


def _smooth_used(values: np.ndarray, used_logical_order: np.ndarray,
                 taps: int = SMOOTHING_TAPS) -> np.ndarray:
    """Moving-average denoising across neighbouring used subcarriers."""
    if taps <= 1:
        return values
    kernel = np.ones(taps)
    seq = values[used_logical_order]
    num = np.convolve(seq, kernel, mode="same")
    den = np.convolve(np.ones(seq.size), kernel, mode="same")
    out = values.copy()
    out[used_logical_order] = num / den
    return out


def _used_logical_order(params: OfdmParams) -> np.ndarray:
    n = params.n_subcarriers
    used = sorted(params.used_indices, key=lambda k: k if k < n // 2 else k - n)
    return np.array(used, dtype=np.int64)


def estimate_precoded_csi(ltf_grids: np.ndarray, params: OfdmParams,
                          smoothing_taps: int = SMOOTHING_TAPS) -> EffectiveChannelEstimate:
    """LS estimates of the three precoded channels from the stage-2 LTFs.

    The raw one-shot estimates are smoothed across adjacent subcarriers: the
    channel is nearly frequency flat, and SIC quality hinges directly on the
    estimation noise of the (strong) common stream's effective channel.
    """
    ref = ltf_freq(params)
    used = list(params.used_indices)
    if np.any(ref[used] == 0):
        raise ValueError("zero reference on a used subcarrier")
    order = _used_logical_order(params)
    out = []
    for slot in range(3):
        g = np.zeros(params.n_subcarriers, dtype=np.complex128)
        g[used] = ltf_grids[slot][used] / ref[used]
        out.append(_smooth_used(g, order, smoothing_taps))
    return EffectiveChannelEstimate(g_c=out[0], g_1=out[1], g_2=out[2])


def estimate_noise_variance(grids: np.ndarray, params: OfdmParams) -> float:
    """Average guard-band power across all parsed symbols."""
    guards = list(params.guard_indices)
    return float(np.mean(np.abs(grids[:, guards]) ** 2))


def fps_phase_estimates(data_grids: np.ndarray, expected_pilots: np.ndarray,
                        parity_mask: np.ndarray, params: OfdmParams) -> np.ndarray:
    """Per-symbol common phase estimates from one stream-parity's pilots.

    Symbols without pilots for this parity inherit the most recent estimate
    (zero-order hold; the leading edge backfills from the first pilot symbol).
    """
    pil = list(params.pilot_indices)
    n_sym = data_grids.shape[0]
    if not parity_mask.any():
        raise ValueError("no pilot symbols for this parity")
    phases = np.zeros(n_sym)
    last = None
    first = None
    for j in range(n_sym):
        if parity_mask[j]:
            num = np.vdot(expected_pilots[j], data_grids[j, pil])
            last = float(np.angle(num)) if num != 0 else 0.0
            if first is None:
                first = last
        if last is not None:
            phases[j] = last
    if first is not None:
        for j in range(n_sym):
            if parity_mask[j]:
                break
            phases[j] = first
    return phases


def fps_correct(data_grids: np.ndarray, phases: np.ndarray) -> np.ndarray:
    return data_grids * np.exp(-1j * phases)[:, None]


def carrier_phase_track(data_grids: np.ndarray, expected_by_parity: dict,
                        params: OfdmParams, drift_std: float = 0.05) -> np.ndarray:
    """One common-phase estimate per symbol from whichever pilots it carries.

    Raw per-symbol estimates from the stronger parity are interpolated across
    the other parity's symbols and blended with that parity's own (usually
    weaker) estimates, weighting by pilot SNR and the drift prior. The LO
    phase is stream independent, so a single track serves equalization and
    SIC re-synthesis alike.
    """
    pil = list(params.pilot_indices)
    n_sym = data_grids.shape[0]
    raw = np.full(n_sym, np.nan)
    var = np.full(n_sym, np.inf)
    noise = max(np.mean(np.abs(data_grids[:, list(params.guard_indices)]) ** 2), 1e-30)
    for mask, expected in expected_by_parity.items():
        for j in np.flatnonzero(np.array(mask)):
            e = expected[j]
            energy = float(np.vdot(e, e).real)
            if energy <= 0:
                continue
            num = np.vdot(e, data_grids[j, pil])
            if num == 0:
                continue
            raw[j] = float(np.angle(num))
            var[j] = noise / (2.0 * energy)
    good = np.flatnonzero(np.isfinite(raw))
    if good.size == 0:
        raise ValueError("no usable pilots for phase tracking")
    # anchor parity: the lower-variance half; interpolate it everywhere
    strong = good[np.argsort(var[good])][: max(1, good.size // 2)]
    strong = np.sort(strong)
    base = np.unwrap(raw[strong])
    interp = np.interp(np.arange(n_sym), strong, base)
    interp_var = var[strong].mean() + 0.5 * drift_std ** 2
    track = interp.copy()
    # blend: own-symbol estimate vs interpolated anchor, inverse variance
    for j in range(n_sym):
        if np.isfinite(raw[j]):
            # wrap the raw estimate onto the interpolated branch
            r = interp[j] + np.angle(np.exp(1j * (raw[j] - interp[j])))
            w_own = 1.0 / var[j]
            w_int = 1.0 / interp_var
            track[j] = (w_own * r + w_int * interp[j]) / (w_own + w_int)
        else:
            track[j] = interp[j]
    return track


def expected_pilot_matrix(est: EffectiveChannelEstimate, roles: list[str],
                          params: OfdmParams, n_sym: int) -> np.ndarray:
    """Expected pilot-cell observations for the parity shared by `roles`."""
    pil = list(params.pilot_indices)
    out = np.zeros((n_sym, len(pil)), dtype=np.complex128)
    for j in range(n_sym):
        vals = pilot_values(params, j)
        for role in roles:
            out[j] += est.get(role)[pil] * vals
    return out


def mmse_equalize(y: np.ndarray, g: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scalar MMSE equalizer; returns (symbol estimates, post-eq SINR)."""
    g = np.broadcast_to(g, y.shape)
    v = np.broadcast_to(np.maximum(v, 0.0), y.shape)
    g2 = np.abs(g) ** 2
    s_hat = np.conj(g) * y / (g2 + v)
    snr = np.where(g2 > 0, g2 / np.maximum(v, g2 / SNR_CAP), 0.0)
    return s_hat, snr


def sic_subtract(data_grids: np.ndarray, decoded_bits: np.ndarray, mcs: McsLevel,
                 g_c: np.ndarray, params: OfdmParams,
                 phases: np.ndarray | None = None,
                 code=None) -> np.ndarray:
    """Re-encode, re-modulate and remove the common stream's contribution.

    decoded_bits is whatever the common decoder produced, right or wrong.
    Pilot cells of the common parity are removed as well.
    """
    if code is None:
        code = code_for_mcs(mcs, params)
    coded = encode(np.asarray(decoded_bits, dtype=np.uint8), code)
    syms = map_constellation(coded, mcs.m).reshape(params.n_data_symbols,
                                                   len(params.data_indices))
    recon = np.zeros_like(data_grids)
    recon[:, list(params.data_indices)] = syms
    mask = pilot_symbol_mask(StreamRole.COMMON, params.n_data_symbols)
    pil = list(params.pilot_indices)
    for j in np.flatnonzero(mask):
        recon[j, pil] = pilot_values(params, j)
    recon = recon * g_c[None, :]
    if phases is not None:
        recon = recon * np.exp(1j * phases)[:, None]
    return data_grids - recon


def decode_stream(data_grids: np.ndarray, g: np.ndarray, v: np.ndarray,
                  mcs: McsLevel, params: OfdmParams,
                  code=None) -> tuple[np.ndarray, bool, np.ndarray]:
    """Equalize the data cells, demap max-log LLRs, list-decode."""
    if code is None:
        code = code_for_mcs(mcs, params)
    data_idx = list(params.data_indices)
    y = data_grids[:, data_idx]
    s_mmse, snr = mmse_equalize(y, g[data_idx][None, :], v[data_idx][None, :])
    g2 = np.abs(np.broadcast_to(g[data_idx][None, :], y.shape)) ** 2
    vv = np.broadcast_to(v[data_idx][None, :], y.shape)
    with np.errstate(invalid="ignore", divide="ignore"):
        unbiased = np.where(g2 > 0, s_mmse * (g2 + vv) / np.where(g2 > 0, g2, 1.0), 0.0)
    llr = demap_llr(unbiased.reshape(-1), mcs.m, snr.reshape(-1))
    bits, ok = scl_decode(llr, code)
    return bits, ok, s_mmse


def _present_roles(mcs_triple) -> list[str]:
    roles = []
    for role, level in zip((StreamRole.COMMON, StreamRole.PRIVATE1, StreamRole.PRIVATE2),
                           mcs_triple):
        if level is not None:
            roles.append(role)
    return roles


def run_rx_pipeline(obs: RxObservation, scheme: SchemeKind, rx_index: int,
                    mcs_selection, params: OfdmParams,
                    sync_mode: str = "genie",
                    genie: GenieAids = GenieAids(),
                    collect_diagnostics: bool = False) -> DecodeOutcome:
    """Full receive chain for one receiver of one stage-2 frame."""
    n_sym = params.n_data_symbols
    n_ofdm = 3 + 1 + n_sym
    start = synchronize(obs, params, sync_mode)
    grids = parse_frame(obs.samples, start, params, n_ofdm)
    ltf_grids, svc_grid, data_grids = grids[:3], grids[3], grids[4:]

    est = genie.effective or estimate_precoded_csi(ltf_grids, params)
    sigma2_hat = genie.sigma2 if genie.sigma2 is not None \
        else estimate_noise_variance(grids, params)

    mcs_c, mcs_p1, mcs_p2 = (mcs_selection.common, mcs_selection.private1,
                             mcs_selection.private2)

    # SERVICE: alone on its symbol (only noise competes) and precoded with
    # the sum of the present precoders; absent-stream estimates are ~zero so
    # summing all three effective channels matches the transmit side.
    svc_cfg = service_code()
    g_svc = est.g_c + est.g_1 + est.g_2
    data_idx = list(params.data_indices)
    v_svc = np.full(params.n_subcarriers, sigma2_hat)
    y_svc = svc_grid[data_idx][None, :]
    s_svc, snr_svc = mmse_equalize(y_svc, g_svc[data_idx][None, :], v_svc[data_idx][None, :])
    g2 = np.abs(g_svc[data_idx][None, :]) ** 2
    unb = np.where(g2 > 0, s_svc * (g2 + v_svc[data_idx][None, :]) / np.where(g2 > 0, g2, 1.0), 0.0)
    svc_llr = demap_llr(unb.reshape(-1), 1, snr_svc.reshape(-1))
    svc_bits, svc_ok = scl_decode(svc_llr, svc_cfg)
    service_mcs = decode_service_bits(svc_bits) if svc_ok else (None, None, None)
    expected_idx = tuple(None if lvl is None else lvl.index
                         for lvl in (mcs_c, mcs_p1, mcs_p2))
    # in measurement mode the harness hands the RX its configuration; the
    # SERVICE decode is still reported but does not gate the streams
    service_match = bool(svc_ok and service_mcs == expected_idx) \
        or genie.assume_service

    diag: dict = {}
    own_role = StreamRole.PRIVATE1 if rx_index == 0 else StreamRole.PRIVATE2
    own_mcs = mcs_p1 if rx_index == 0 else mcs_p2
    other_role = StreamRole.PRIVATE2 if rx_index == 0 else StreamRole.PRIVATE1
    other_mcs = mcs_p2 if rx_index == 0 else mcs_p1
    present = _present_roles((mcs_c, mcs_p1, mcs_p2))

    common_ok: bool | None = None
    private_ok: bool | None = None
    common_bits = None
    private_bits = None

    if not service_match:
        # the RX cannot configure its decoders; every present stream fails
        common_ok = False if mcs_c is not None else None
        private_ok = False if own_mcs is not None else None
        return DecodeOutcome(service_ok=False, common_ok=common_ok,
                             private_ok=private_ok, decoded_common_bits=None,
                             decoded_private_bits=None, sigma2_hat=float(sigma2_hat),
                             service_mcs=service_mcs, diagnostics=diag)

    priv_parity = pilot_symbol_mask(StreamRole.PRIVATE1, n_sym)
    common_parity = pilot_symbol_mask(StreamRole.COMMON, n_sym)
    priv_roles_present = [r for r in (StreamRole.PRIVATE1, StreamRole.PRIVATE2)
                          if r in present]

    # one carrier-phase track from every symbol's own pilots
    expected_by_parity = {}
    if mcs_c is not None:
        expected_by_parity[tuple(common_parity)] = \
            expected_pilot_matrix(est, [StreamRole.COMMON], params, n_sym)
    if priv_roles_present:
        expected_by_parity[tuple(priv_parity)] = \
            expected_pilot_matrix(est, priv_roles_present, params, n_sym)
    track_phases = carrier_phase_track(data_grids, expected_by_parity, params)
    corrected = fps_correct(data_grids, track_phases)

    residual = corrected
    sic_done = False
    if mcs_c is not None:
        v_c = np.full(params.n_subcarriers, sigma2_hat)
        for role in priv_roles_present:
            v_c = v_c + np.abs(est.get(role)) ** 2
        c_code = code_for_mcs(mcs_c, params)
        common_bits, c_ok, c_syms = decode_stream(corrected, est.g_c, v_c,
                                                  mcs_c, params, code=c_code)
        common_ok = bool(c_ok)
        if collect_diagnostics:
            diag["common_equalized"] = c_syms
        # Subtract the re-encoded common stream only when its CRC passed: a
        # failed block would subtract garbage, which is strictly worse than
        # treating the (possibly near-zero-power) stream as noise.
        if own_mcs is not None and c_ok:
            residual = sic_subtract(corrected, common_bits, mcs_c, est.g_c,
                                    params, phases=None, code=c_code)
            sic_done = True
    if own_mcs is not None:
        v_p = np.full(params.n_subcarriers, sigma2_hat)
        if other_mcs is not None:
            v_p = v_p + np.abs(est.get(other_role)) ** 2
        if mcs_c is not None and not sic_done:
            v_p = v_p + np.abs(est.g_c) ** 2
        p_code = code_for_mcs(own_mcs, params)
        private_bits, p_ok, p_syms = decode_stream(residual, est.get(own_role),
                                                   v_p, own_mcs, params, code=p_code)
        private_ok = bool(p_ok)
        if collect_diagnostics:
            diag["private_equalized"] = p_syms

    return DecodeOutcome(service_ok=bool(svc_ok and service_mcs == expected_idx),
                         common_ok=common_ok,
                         private_ok=private_ok,
                         decoded_common_bits=common_bits,
                         decoded_private_bits=private_bits,
                         sigma2_hat=float(sigma2_hat),
                         service_mcs=service_mcs, diagnostics=diag)


def diagnostics_to_csv(outcome: DecodeOutcome, path) -> None:
    """Equalized-symbol dump (symbol index, re, im, stream, stage)."""
    rows = ["symbol,re,im,stream,stage"]
    for key, stage in (("common_equalized", "pre-sic"), ("private_equalized", "post-sic")):
        if key not in outcome.diagnostics:
            continue
        arr = outcome.diagnostics[key]
        stream = key.split("_")[0]
        for j in range(arr.shape[0]):
            for val in arr[j]:
                rows.append(f"{j},{val.real:.8g},{val.imag:.8g},{stream},{stage}")
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
