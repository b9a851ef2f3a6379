"""Measurement harness: two-stage runs, decode tallies, MCS brute force,
fairness splitting and multi-case sweeps.

A batch fixes the channel geometry (per-run LO phases drift) and derives all
randomness from (base_seed, run_index, purpose), so every MCS candidate is
evaluated against identical channels, estimation noise and payload noise;
the brute-force argmax is then a paired comparison. Success means the CRC
passed and the bits match what was sent.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .channel import (
    ChannelGeometry,
    ChannelRealization,
    CsitEstimate,
    CsitMode,
    OfdmParams,
    WidebandCsi,
    dequantize_user_csi,
    quantize_user_csi,
    solve_geometry_for_targets,
    synthesize_channel_pair,
    wideband_average,
)
from .coding import McsLevel, code_for_mcs, encode, mcs_catalogue
from .ofdm import (
    StreamRole,
    apply_channel,
    build_stage1_frame,
    build_stage2_frame,
    effective_bandwidth,
    encode_service_bits,
    ltf_freq,
    map_constellation,
)
from .precoding import (
    CommonSplit,
    PrecoderSet,
    SchemeKind,
    WmmseOptions,
    WmmseResult,
    rate_breakdown,
    wmmse_optimize,
)
from .receiver import GenieAids, RxObservation, run_rx_pipeline, service_code

__all__ = [
    "McsSelection",
    "RunTally",
    "ThroughputReport",
    "FairnessReport",
    "RunConfig",
    "CaseRunner",
    "run_single",
    "measured_throughput",
    "brute_force_mcs_search",
    "fairness_split",
    "sweep_cases",
]

_PAD = 24  # noise-only samples before the frame start


@dataclass(frozen=True)
class McsSelection:
    """Per-stream MCS choice; absent streams are None."""

    common: McsLevel | None = None
    private1: McsLevel | None = None
    private2: McsLevel | None = None

    def present_pattern(self) -> tuple[bool, bool, bool]:
        return (self.common is not None, self.private1 is not None,
                self.private2 is not None)

    def indices(self) -> tuple[int | None, int | None, int | None]:
        return tuple(None if m is None else m.index
                     for m in (self.common, self.private1, self.private2))

    def validate_for(self, scheme: SchemeKind, noma_swapped: bool = False) -> None:
        c, p1, p2 = self.present_pattern()
        if scheme == SchemeKind.RSMA:
            ok = c and p1 and p2
        elif scheme == SchemeKind.SDMA:
            ok = (not c) and p1 and p2
        else:
            ok = c and (p1 != p2) and (p2 if noma_swapped else p1)
        if not ok:
            raise ValueError(f"MCS presence pattern inconsistent with {scheme}")


@dataclass
class RunTally:
    d_common: int = 0
    d_private1: int = 0
    d_private2: int = 0
    n_runs: int = 0

    def accumulate(self, flags: dict) -> None:
        self.n_runs += 1
        if flags.get("common_ok_both"):
            self.d_common += 1
        if flags.get("private1_ok"):
            self.d_private1 += 1
        if flags.get("private2_ok"):
            self.d_private2 += 1


@dataclass
class ThroughputReport:
    sum_bps: float
    per_rx_bps: tuple[float, float]
    tally: RunTally
    mcs: McsSelection
    scheme: SchemeKind
    csi_mode: str
    split: CommonSplit

    def stream_bps(self) -> dict:
        """Per-stream measured throughput contributions."""
        n = max(self.tally.n_runs, 1)
        b = effective_bandwidth(OfdmParams())
        out = {}
        if self.mcs.common is not None:
            out["common"] = b * self.mcs.common.rate_bits_per_symbol * self.tally.d_common / n
        if self.mcs.private1 is not None:
            out["private1"] = b * self.mcs.private1.rate_bits_per_symbol * self.tally.d_private1 / n
        if self.mcs.private2 is not None:
            out["private2"] = b * self.mcs.private2.rate_bits_per_symbol * self.tally.d_private2 / n
        return out


@dataclass
class FairnessReport:
    min_rx_bps: float
    sum_bps: float
    rule_applied: str
    per_rx_bps: tuple[float, float]


@dataclass
class RunConfig:
    """Everything one measurement batch needs."""

    alpha_db: float = -7.6
    rho: float = 0.15
    scheme: SchemeKind = SchemeKind.RSMA
    csi_mode: str = "unquantized"          # "unquantized" | "quantized"
    mcs: McsSelection | None = None
    n_runs: int = 100
    base_seed: int = 1234
    snr_db: float = 28.0                   # per-subcarrier SNR at RX1
    p_t: float = 1.0
    wmmse: WmmseOptions = field(default_factory=WmmseOptions)
    equal_private_mcs: bool = True
    n_feedback_bits: int = 4
    ripple_amplitude: float = 0.0
    phase_walk_std: float = 0.05
    sync_mode: str = "genie"
    random_run_phases: bool = True
    geometry: ChannelGeometry | None = None
    params: OfdmParams = field(default_factory=OfdmParams)

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.csi_mode not in ("unquantized", "quantized"):
            raise ValueError("csi_mode must be 'unquantized' or 'quantized'")
        if self.csi_mode == "quantized" and self.n_feedback_bits != 4:
            raise ValueError("quantized feedback uses 4-bit components")

    @property
    def sigma2(self) -> float:
        gain = self.geometry.gain_rx1 if self.geometry is not None else 1.0
        return gain ** 2 * self.p_t / 10.0 ** (self.snr_db / 10.0)


def _seed(*parts: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts]))


_ROLE_ID = {StreamRole.COMMON: 0, StreamRole.PRIVATE1: 1, StreamRole.PRIVATE2: 2}


class CaseRunner:
    """Caches everything MCS-independent so candidate MCS triples see the
    same channels, CSIT, precoders and noise (paired comparisons)."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.params = cfg.params
        self.geometry = cfg.geometry if cfg.geometry is not None else \
            solve_geometry_for_targets(cfg.alpha_db, cfg.rho,
                                       ripple_amplitude=cfg.ripple_amplitude)
        self.sigma2 = cfg.sigma2
        self._channels: dict[int, ChannelRealization] = {}
        self._wideband: dict[int, tuple] = {}
        self._csit: dict[int, CsitEstimate] = {}
        self._psets: dict[tuple, PrecoderSet] = {}
        self._s2_noise: dict[tuple, np.ndarray] = {}
        self._svc_cfg = service_code()
        self._frame_len = 160 + (3 + 1 + self.params.n_data_symbols) * self.params.symbol_len
        # NOMA role assignment follows the case geometry, like a testbed
        # operator placing the antennas, not the per-run noisy feedback
        self.strong_rx = 1 if self.geometry.gain_rx2 > self.geometry.gain_rx1 else 0

    # ---- per-run raw material ------------------------------------------

    def channel(self, r: int) -> ChannelRealization:
        if r not in self._channels:
            geo = self.geometry
            if self.cfg.random_run_phases:
                rng = _seed(self.cfg.base_seed, 5, r)
                geo = replace(geo, phase_rx1=float(rng.uniform(0, 2 * np.pi)),
                              phase_rx2=float(rng.uniform(0, 2 * np.pi)))
            self._channels[r] = synthesize_channel_pair(
                geo, self.params, seed=self.cfg.base_seed,
                noise_variance=self.sigma2)
        return self._channels[r]

    def wideband_estimates(self, r: int) -> tuple[WidebandCsi, WidebandCsi]:
        """Stage 1: orthogonal pilots, LS estimation, subcarrier averaging."""
        if r not in self._wideband:
            ch = self.channel(r)
            amp = np.sqrt(self.cfg.p_t)
            ref = ltf_freq(self.params) * amp
            used = list(self.params.used_indices)
            ests = []
            for rx in (0, 1):
                h_est = np.zeros((self.params.n_subcarriers, 2), dtype=np.complex128)
                for ant in (0, 1):
                    tx = build_stage1_frame(ant, self.params, amplitude=amp)
                    rng = _seed(self.cfg.base_seed, 1, r, rx, ant)
                    samples, start = apply_channel(tx, ch.h(rx), self.sigma2, rng=rng)
                    block = samples[start + 160 + 32:]
                    grids = np.fft.fft(block[:128].reshape(2, 64), axis=-1) / 8.0
                    y = grids.mean(axis=0)
                    # y[k] = conj(h_ant[k]) x[k]; recover h from the ratio
                    h_est[used, ant] = np.conj(y[used] / ref[used])
                ests.append(wideband_average(h_est))
            self._wideband[r] = (ests[0], ests[1])
        return self._wideband[r]

    def csit(self, r: int) -> CsitEstimate:
        if r not in self._csit:
            wb1, wb2 = self.wideband_estimates(r)
            if self.cfg.csi_mode == "unquantized":
                est = CsitEstimate(h_tx_1=wb1.h_hat, h_tx_2=wb2.h_hat,
                                   mode=CsitMode.UNQUANTIZED)
            else:
                # each receiver quantizes on its own feedback link
                vecs = []
                for wb in (wb1, wb2):
                    q = quantize_user_csi(wb, self.cfg.n_feedback_bits)
                    vecs.append(dequantize_user_csi(q, CsitMode.QUANTIZED_RESCALED))
                est = CsitEstimate(h_tx_1=vecs[0], h_tx_2=vecs[1],
                                   mode=CsitMode.QUANTIZED_RESCALED)
            self._csit[r] = est
        return self._csit[r]

    # Transmit-side link-adaptation table used only to pick between near-tied
    # WMMSE stationary points: per-level SINR needed to decode (calibrated on
    # the codes over AWGN), a selection margin, and a cap at 64QAM 3/4 since
    # the residual-phase EVM floor makes the 256QAM rungs unbankable.
    MCS_SINR_THRESHOLDS_DB = {0: -1.5, 1: 2.0, 2: 1.5, 3: 5.0, 4: 8.0,
                              5: 11.5, 6: 16.0, 7: 18.5, 8: 25.0, 9: 26.0}
    _SELECTION_MARGIN_DB = 1.5
    _SELECTION_CAP_INDEX = 7

    def _bankable(self, sinr_db: float) -> float:
        best = 0.0
        for lvl in mcs_catalogue():
            if lvl.index > self._SELECTION_CAP_INDEX:
                continue
            if self.MCS_SINR_THRESHOLDS_DB[lvl.index] + self._SELECTION_MARGIN_DB <= sinr_db:
                best = max(best, lvl.rate_bits_per_symbol)
        return best

    def _grid_value(self, est: CsitEstimate, pset: PrecoderSet) -> tuple[float, float]:
        """Selection metric for near-tied WMMSE stationary points: the nominal
        MCS-limited sum rate the precoders could support on the CSIT, judged
        through the link-adaptation table; tie-broken by the continuous rate."""
        sig2 = self.sigma2
        h1, h2 = est.h_tx_1, est.h_tx_2

        def sinr_db(h, sig_p, interf):
            if sig_p is None:
                return -np.inf
            num = abs(np.vdot(h, sig_p)) ** 2
            den = sig2 + sum(abs(np.vdot(h, p)) ** 2 for p in interf if p is not None)
            return 10.0 * np.log10(max(num / den, 1e-30))

        common_val = 0.0
        common_poison = False
        if pset.p_c is not None and float(np.vdot(pset.p_c, pset.p_c).real) > 0:
            s_c = min(sinr_db(h1, pset.p_c, [pset.p_1, pset.p_2]),
                      sinr_db(h2, pset.p_c, [pset.p_1, pset.p_2]))
            common_val = self._bankable(s_c)
            common_poison = common_val == 0.0
        sic = [] if not common_poison else [pset.p_c]
        s1 = sinr_db(h1, pset.p_1, [pset.p_2] + sic)
        s2 = sinr_db(h2, pset.p_2, [pset.p_1] + sic)
        if self.cfg.equal_private_mcs and pset.p_1 is not None and pset.p_2 is not None:
            priv = 0.0
            for lvl in mcs_catalogue():
                if lvl.index > self._SELECTION_CAP_INDEX:
                    continue
                need = self.MCS_SINR_THRESHOLDS_DB[lvl.index] + self._SELECTION_MARGIN_DB
                hits = int(s1 >= need) + int(s2 >= need)
                priv = max(priv, lvl.rate_bits_per_symbol * hits)
        else:
            priv = self._bankable(s1) + self._bankable(s2)
        bd = rate_breakdown(est.h_tx_1, est.h_tx_2, pset, sig2)
        return (common_val + priv, bd.sum_rate)

    def precoders(self, r: int, scheme: SchemeKind) -> PrecoderSet:
        key = (r, scheme)
        if key not in self._psets:
            est = self.csit(r)
            opts = self.cfg.wmmse
            strong = self.strong_rx
            sdma = wmmse_optimize(est, self.sigma2, self.cfg.p_t, SchemeKind.SDMA, opts)

            noma_cands = [wmmse_optimize(est, self.sigma2, self.cfg.p_t,
                                         SchemeKind.NOMA, opts, noma_strong_rx=strong)]
            h_s = est.h_tx(strong)
            h_w = est.h_tx(1 - strong)
            for q_c in (0.85, 0.15):
                if np.linalg.norm(h_s) == 0 or np.linalg.norm(h_w + h_s) == 0:
                    continue
                dc = (h_s + h_w) / np.linalg.norm(h_s + h_w)
                d1 = h_s / np.linalg.norm(h_s)
                cols = [np.sqrt(self.cfg.p_t * q_c) * dc,
                        np.sqrt(self.cfg.p_t * (1 - q_c)) * d1,
                        np.zeros(2, complex)]
                if strong == 1:
                    warm = PrecoderSet(SchemeKind.NOMA, cols[0], None, cols[1],
                                       self.cfg.p_t, noma_swapped=True)
                else:
                    warm = PrecoderSet(SchemeKind.NOMA, cols[0], cols[1], None,
                                       self.cfg.p_t)
                noma_cands.append(wmmse_optimize(est, self.sigma2, self.cfg.p_t,
                                                 SchemeKind.NOMA,
                                                 replace(opts, init=warm),
                                                 noma_strong_rx=strong))
            noma = max(noma_cands, key=lambda res: self._grid_value(est, res.pset))

            rsma_cands = [wmmse_optimize(est, self.sigma2, self.cfg.p_t,
                                         SchemeKind.RSMA, opts)]
            for donor in (sdma, noma):
                d = donor.pset
                warm = PrecoderSet(SchemeKind.RSMA,
                                   d.p_c if d.p_c is not None else np.zeros(2, complex),
                                   d.p_1 if d.p_1 is not None else np.zeros(2, complex),
                                   d.p_2 if d.p_2 is not None else np.zeros(2, complex),
                                   self.cfg.p_t)
                rsma_cands.append(wmmse_optimize(est, self.sigma2, self.cfg.p_t,
                                                 SchemeKind.RSMA, replace(opts, init=warm)))
                # the embedded donor point itself is also a valid candidate
                rsma_cands.append(WmmseResult(pset=warm, objective_bits=donor.objective_bits,
                                              trajectory=donor.trajectory,
                                              n_iters=donor.n_iters,
                                              converged=donor.converged))
            best_rsma = max(rsma_cands, key=lambda res: self._grid_value(est, res.pset))

            self._psets[(r, SchemeKind.SDMA)] = sdma.pset
            self._psets[(r, SchemeKind.NOMA)] = noma.pset
            self._psets[(r, SchemeKind.RSMA)] = best_rsma.pset
        return self._psets[key]

    def stage2_noise(self, r: int, rx: int) -> np.ndarray:
        key = (r, rx)
        if key not in self._s2_noise:
            rng = _seed(self.cfg.base_seed, 3, r, rx)
            n = 2 * _PAD + self._frame_len
            self._s2_noise[key] = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) \
                * np.sqrt(self.sigma2 / 2.0)
        return self._s2_noise[key]

    def payload_bits(self, r: int, role: str, n_bits: int) -> np.ndarray:
        rng = _seed(self.cfg.base_seed, 2, r, _ROLE_ID[role])
        return rng.integers(0, 2, n_bits).astype(np.uint8)

    # ---- one full measurement run --------------------------------------

    def default_mcs(self, scheme: SchemeKind, pset: PrecoderSet) -> McsSelection:
        cat = mcs_catalogue()
        mid = cat[4]
        if scheme == SchemeKind.SDMA:
            return McsSelection(None, mid, mid)
        if scheme == SchemeKind.NOMA:
            return (McsSelection(mid, None, mid) if pset.noma_swapped
                    else McsSelection(mid, mid, None))
        return McsSelection(mid, mid, mid)

    def run_flags(self, r: int, scheme: SchemeKind,
                  mcs: McsSelection | None = None,
                  collect_diagnostics: bool = False) -> dict:
        cfg = self.cfg
        ch = self.channel(r)
        pset = self.precoders(r, scheme)
        if mcs is None:
            mcs = cfg.mcs if cfg.mcs is not None else self.default_mcs(scheme, pset)
        mcs.validate_for(scheme, pset.noma_swapped)

        role_mcs = {StreamRole.COMMON: mcs.common, StreamRole.PRIVATE1: mcs.private1,
                    StreamRole.PRIVATE2: mcs.private2}
        role_p = {StreamRole.COMMON: pset.p_c, StreamRole.PRIVATE1: pset.p_1,
                  StreamRole.PRIVATE2: pset.p_2}

        payloads = {}
        symbols = {}
        precoders = {}
        shape = (self.params.n_data_symbols, len(self.params.data_indices))
        for role, level in role_mcs.items():
            if level is None:
                continue
            code = code_for_mcs(level, self.params)
            bits = self.payload_bits(r, role, code.payload_len)
            payloads[role] = bits
            coded = encode(bits, code)
            symbols[role] = map_constellation(coded, level.m).reshape(shape)
            precoders[role] = role_p[role]

        svc_bits = encode_service_bits(mcs.indices())
        svc_syms = map_constellation(encode(svc_bits, self._svc_cfg), 1)
        tx = build_stage2_frame(symbols, precoders, self.params, svc_syms,
                                meta={"mcs_indices": mcs.indices()})

        outcomes = []
        for rx in (0, 1):
            rng_ph = _seed(cfg.base_seed, 4, r, rx)
            samples, start = apply_channel(tx, ch.h(rx), self.sigma2,
                                           rng=rng_ph,
                                           noise=self.stage2_noise(r, rx),
                                           phase_walk_std=cfg.phase_walk_std,
                                           pad=_PAD)
            obs = RxObservation(samples=samples, true_timing_offset=start)
            # measurement mode hands the configured MCS to the RX; SERVICE is
            # still transmitted, decoded and reported in the outcome
            outcomes.append(run_rx_pipeline(
                obs, scheme, rx, mcs, self.params, sync_mode=cfg.sync_mode,
                genie=GenieAids(assume_service=True),
                collect_diagnostics=collect_diagnostics))

        def _stream_ok(rx: int, which: str, sent_role: str) -> bool:
            out = outcomes[rx]
            ok = getattr(out, f"{which}_ok")
            bits = getattr(out, f"decoded_{which}_bits")
            if not ok or bits is None:
                return False
            return np.array_equal(bits, payloads[sent_role])

        flags = {"outcomes": outcomes}
        if mcs.common is not None:
            c1 = _stream_ok(0, "common", StreamRole.COMMON)
            c2 = _stream_ok(1, "common", StreamRole.COMMON)
            flags["common_ok_rx"] = (c1, c2)
            flags["common_ok_both"] = c1 and c2
        if mcs.private1 is not None:
            flags["private1_ok"] = _stream_ok(0, "private", StreamRole.PRIVATE1)
        if mcs.private2 is not None:
            flags["private2_ok"] = _stream_ok(1, "private", StreamRole.PRIVATE2)
        flags["service_ok"] = (outcomes[0].service_ok, outcomes[1].service_ok)
        return flags

    def tally(self, scheme: SchemeKind, mcs: McsSelection,
              runs: range | None = None) -> RunTally:
        runs = runs if runs is not None else range(self.cfg.n_runs)
        t = RunTally()
        for r in runs:
            t.accumulate(self.run_flags(r, scheme, mcs))
        return t


def run_single(cfg: RunConfig, run_index: int) -> dict:
    """One measurement run; deterministic in (cfg.base_seed, run_index)."""
    runner = CaseRunner(cfg)
    return runner.run_flags(run_index, cfg.scheme, cfg.mcs)


def measured_throughput(tally: RunTally, mcs: McsSelection, scheme: SchemeKind,
                        csi_mode: str = "unquantized",
                        split: CommonSplit | None = None,
                        noma_swapped: bool = False,
                        params: OfdmParams | None = None) -> ThroughputReport:
    """Empirical throughput: B * m * r weighted by the decode frequencies."""
    mcs.validate_for(scheme, noma_swapped)
    b = effective_bandwidth(params or OfdmParams())
    n = max(tally.n_runs, 1)
    t_c = b * mcs.common.rate_bits_per_symbol * tally.d_common / n \
        if mcs.common is not None else 0.0
    t_1 = b * mcs.private1.rate_bits_per_symbol * tally.d_private1 / n \
        if mcs.private1 is not None else 0.0
    t_2 = b * mcs.private2.rate_bits_per_symbol * tally.d_private2 / n \
        if mcs.private2 is not None else 0.0
    if split is None:
        if scheme == SchemeKind.NOMA:
            # the common stream carries the weak user's whole message
            split = CommonSplit(1.0) if noma_swapped else CommonSplit(0.0)
        else:
            split = CommonSplit(0.5)
    per_rx = (t_1 + split.fraction(0) * t_c, t_2 + split.fraction(1) * t_c)
    return ThroughputReport(sum_bps=t_c + t_1 + t_2, per_rx_bps=per_rx,
                            tally=tally, mcs=mcs, scheme=scheme,
                            csi_mode=csi_mode, split=split)


def _combos(scheme: SchemeKind, equal_private: bool, noma_swapped: bool):
    cat = mcs_catalogue()
    if scheme == SchemeKind.RSMA:
        for c in cat:
            if equal_private:
                for p in cat:
                    yield McsSelection(c, p, p)
            else:
                for p1 in cat:
                    for p2 in cat:
                        yield McsSelection(c, p1, p2)
    elif scheme == SchemeKind.SDMA:
        if equal_private:
            for p in cat:
                yield McsSelection(None, p, p)
        else:
            for p1 in cat:
                for p2 in cat:
                    yield McsSelection(None, p1, p2)
    else:
        for c in cat:
            for p in cat:
                yield (McsSelection(c, None, p) if noma_swapped
                       else McsSelection(c, p, None))


def brute_force_mcs_search(cfg: RunConfig, scheme: SchemeKind | None = None,
                           runner: CaseRunner | None = None,
                           progress=None) -> tuple[ThroughputReport, list[ThroughputReport]]:
    """Evaluate the measured throughput of every admissible MCS combination
    with common random numbers; returns (argmax, full table). Ties go to the
    lowest total MCS index (most robust combination)."""
    scheme = scheme or cfg.scheme
    runner = runner or CaseRunner(cfg)
    swapped = runner.precoders(0, scheme).noma_swapped if scheme == SchemeKind.NOMA else False
    table = []
    for combo in _combos(scheme, cfg.equal_private_mcs, swapped):
        t = runner.tally(scheme, combo)
        rep = measured_throughput(t, combo, scheme, csi_mode=cfg.csi_mode,
                                  noma_swapped=swapped, params=cfg.params)
        table.append(rep)
        if progress is not None:
            progress(rep)
    best = max(table, key=lambda rep: (rep.sum_bps,
                                       -sum(i for i in rep.mcs.indices() if i is not None)))
    return best, table


def fairness_split(private_rx1: float, private_rx2: float, common: float) -> \
        tuple[CommonSplit, FairnessReport]:
    """Partition the common stream for max-min fairness without touching the
    precoders: equalize the two totals when possible (S1), otherwise give the
    whole common stream to the starved receiver (S2)."""
    if private_rx1 < 0 or private_rx2 < 0 or common < 0:
        raise ValueError("rates must be nonnegative")
    gap = private_rx1 - private_rx2
    if abs(gap) <= common and common > 0:
        frac2 = 0.5 * (1.0 + gap / common)
        split = CommonSplit(1.0 - frac2)
        total = 0.5 * (private_rx1 + private_rx2 + common)
        per_rx = (total, total)
        rule = "S1"
    elif gap > 0:
        split = CommonSplit(0.0)
        per_rx = (private_rx1, private_rx2 + common)
        rule = "S2"
    elif gap < 0:
        split = CommonSplit(1.0)
        per_rx = (private_rx1 + common, private_rx2)
        rule = "S2"
    else:  # equal privates, no common stream
        split = CommonSplit(0.5)
        per_rx = (private_rx1, private_rx2)
        rule = "S1"
    return split, FairnessReport(min_rx_bps=min(per_rx), sum_bps=sum(per_rx),
                                 rule_applied=rule, per_rx_bps=per_rx)


def sweep_cases(cases: list[tuple[float, float]], schemes: list[SchemeKind],
                csi_modes: list[str], base_cfg: RunConfig,
                progress=None) -> dict:
    """Brute-force every (case, scheme, csi) cell; returns a report bundle."""
    bundle = {"schema": "rsmalink-sweep/1", "base_seed": base_cfg.base_seed,
              "snr_db": base_cfg.snr_db, "n_runs": base_cfg.n_runs, "cells": []}
    for alpha_db, rho in cases:
        for csi in csi_modes:
            cfg = replace(base_cfg, alpha_db=alpha_db, rho=rho, csi_mode=csi)
            runner = CaseRunner(cfg)
            for scheme in schemes:
                best, table = brute_force_mcs_search(cfg, scheme, runner=runner)
                bundle["cells"].append({
                    "alpha_db": alpha_db, "rho": rho, "csi_mode": csi,
                    "scheme": scheme.value, "best": best, "table": table,
                })
                if progress is not None:
                    progress(alpha_db, rho, csi, scheme, best)
    return bundle
