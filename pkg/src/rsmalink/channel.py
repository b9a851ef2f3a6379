"""LoS channel synthesis, receiver-side estimation and limited CSI feedback.

The two-antenna transmitter talks to two single-antenna receivers over
frequency-flat (up to a small ripple) channels. Channel pairs are generated
from a half-wavelength 2-element ULA steering-vector model so that a target
strength disparity (alpha, dB) and spatial correlation (rho, in [0,1]) can be
dialed in exactly. Feedback is either the raw wideband average ("unquantized")
or a 4-bit-per-component scheme with a 3-bit dB scaling ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "OfdmParams",
    "ChannelGeometry",
    "ChannelRealization",
    "WidebandCsi",
    "QuantizedCsi",
    "UserQuantizedCsi",
    "CsitEstimate",
    "CsitMode",
    "ChannelMetrics",
    "synthesize_channel_pair",
    "solve_geometry_for_targets",
    "wideband_average",
    "channel_metrics",
    "ls_channel_estimate",
    "quantize_csi",
    "dequantize_csi",
    "quantize_user_csi",
    "dequantize_user_csi",
]


def _default_data_indices() -> tuple[int, ...]:
    # 802.11a layout over a 64-point FFT: logical subcarriers -26..-1, 1..26
    # are occupied, pilots sit at +-7 and +-21.  FFT bin = logical mod 64.
    used = [k for k in range(-26, 27) if k != 0]
    pilots = {-21, -7, 7, 21}
    return tuple(sorted((k % 64) for k in used if k not in pilots))


def _default_pilot_indices() -> tuple[int, ...]:
    return tuple(sorted(k % 64 for k in (-21, -7, 7, 21)))


@dataclass(frozen=True)
class OfdmParams:
    """Static OFDM numerology: 64 subcarriers at 20 MHz, 16-sample CP."""

    n_subcarriers: int = 64
    data_indices: tuple[int, ...] = field(default_factory=_default_data_indices)
    pilot_indices: tuple[int, ...] = field(default_factory=_default_pilot_indices)
    cp_len: int = 16
    total_bandwidth_hz: float = 20e6
    n_data_symbols: int = 50

    def __post_init__(self):
        data = set(self.data_indices)
        pilot = set(self.pilot_indices)
        if data & pilot:
            raise ValueError("data and pilot subcarriers overlap")
        if not (data | pilot) <= set(range(self.n_subcarriers)):
            raise ValueError("subcarrier index out of range")

    @property
    def guard_indices(self) -> tuple[int, ...]:
        used = set(self.data_indices) | set(self.pilot_indices)
        return tuple(k for k in range(self.n_subcarriers) if k not in used)

    @property
    def used_indices(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.data_indices) | set(self.pilot_indices)))

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len


@dataclass(frozen=True)
class ChannelGeometry:
    """Parametric stand-in for a lab placement: gains, angles and phases of
    two LoS paths plus an optional per-subcarrier ripple."""

    gain_rx1: float
    gain_rx2: float
    angle_rx1: float = 0.0
    angle_rx2: float = 0.0
    phase_rx1: float = 0.0
    phase_rx2: float = 0.0
    ripple_amplitude: float = 0.0

    def __post_init__(self):
        vals = [self.gain_rx1, self.gain_rx2, self.angle_rx1, self.angle_rx2,
                self.phase_rx1, self.phase_rx2, self.ripple_amplitude]
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("non-finite geometry")
        if self.gain_rx1 <= 0 or self.gain_rx2 <= 0:
            raise ValueError("gains must be positive")
        if self.ripple_amplitude < 0:
            raise ValueError("ripple_amplitude must be >= 0")
        if self.ripple_amplitude > 0.1 * min(self.gain_rx1, self.gain_rx2):
            raise ValueError("ripple_amplitude exceeds 10% of the weakest gain")


@dataclass
class ChannelRealization:
    """Per-subcarrier 2-antenna channel vectors for both receivers."""

    h1: np.ndarray  # (n_subcarriers, 2) complex
    h2: np.ndarray  # (n_subcarriers, 2) complex
    noise_variance: float

    def __post_init__(self):
        self.h1 = np.asarray(self.h1, dtype=np.complex128)
        self.h2 = np.asarray(self.h2, dtype=np.complex128)
        if self.h1.shape != self.h2.shape or self.h1.ndim != 2 or self.h1.shape[1] != 2:
            raise ValueError("channel arrays must both be (n_subcarriers, 2)")
        if not (np.all(np.isfinite(self.h1)) and np.all(np.isfinite(self.h2))):
            raise ValueError("non-finite channel entries")
        if self.noise_variance <= 0:
            raise ValueError("noise_variance must be > 0")

    def h(self, rx: int) -> np.ndarray:
        return self.h1 if rx == 0 else self.h2


@dataclass(frozen=True)
class WidebandCsi:
    """Subcarrier-averaged 2-vector channel estimate for one receiver."""

    h_hat: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.h_hat, dtype=np.complex128).reshape(2)
        if not np.all(np.isfinite(vec)):
            raise ValueError("non-finite CSI")
        object.__setattr__(self, "h_hat", vec)


class CsitMode(str, Enum):
    UNQUANTIZED = "unquantized"
    QUANTIZED_LITERAL = "quantized-literal"
    QUANTIZED_RESCALED = "quantized-rescaled"


@dataclass(frozen=True)
class QuantizedCsi:
    """Joint 4-entry feedback word set: one 3-bit scaling ratio plus signed
    n_bits-wide integers for the Re/Im parts of both receivers' 2-vectors."""

    scaling_ratio: int          # M_h, clamped to the 3-bit range [0, 7]
    n_bits: int                 # N_b
    re: np.ndarray              # (2, 2) ints, [rx, antenna]
    im: np.ndarray              # (2, 2) ints

    def __post_init__(self):
        object.__setattr__(self, "re", np.asarray(self.re, dtype=np.int64).reshape(2, 2))
        object.__setattr__(self, "im", np.asarray(self.im, dtype=np.int64).reshape(2, 2))
        lim = 2 ** (self.n_bits - 1) - 1
        if not (0 <= self.scaling_ratio <= 7):
            raise ValueError("scaling ratio outside 3-bit range")
        if np.any(np.abs(self.re) > lim) or np.any(np.abs(self.im) > lim):
            raise ValueError("quantized word outside signed range")

    @property
    def payload_bits(self) -> int:
        return 3 + 2 * self.n_bits * 4

    def words(self) -> np.ndarray:
        """Words in wire order: Re/Im interleaved, rx-major then antenna."""
        out = np.empty(8, dtype=np.int64)
        out[0::2] = self.re.reshape(4)
        out[1::2] = self.im.reshape(4)
        return out

    def to_bytes(self) -> bytes:
        """Pack as 35 bits (3-bit scaling, 8 signed 4-bit words), big-endian
        bit order, zero-padded to 5 bytes."""
        if self.n_bits != 4:
            raise ValueError("packed layout is defined for n_bits=4")
        acc = self.scaling_ratio & 0x7
        for w in self.words():
            acc = (acc << 4) | (int(w) & 0xF)
        acc <<= 5  # pad 35 -> 40 bits
        return acc.to_bytes(5, "big")

    @classmethod
    def from_bytes(cls, blob: bytes, n_bits: int = 4) -> "QuantizedCsi":
        if n_bits != 4 or len(blob) != 5:
            raise ValueError("expected the 5-byte packed layout")
        acc = int.from_bytes(blob, "big") >> 5
        words = []
        for _ in range(8):
            raw = acc & 0xF
            words.append(raw - 16 if raw >= 8 else raw)
            acc >>= 4
        words.reverse()
        scaling = acc & 0x7
        w = np.array(words, dtype=np.int64)
        return cls(scaling_ratio=scaling, n_bits=4,
                   re=w[0::2].reshape(2, 2), im=w[1::2].reshape(2, 2))


@dataclass(frozen=True)
class UserQuantizedCsi:
    """Single receiver's feedback packet: own scaling ratio + four words.

    Each receiver quantizes its own wideband estimate on its own feedback
    link. Unlike the joint packet, the scale field is a wider (8-bit signed)
    dB value so a weak receiver's absolute gain survives the feedback; the
    words still use the signed n_bits range (24 bits per user at n_bits=4).
    """

    scaling_ratio: int
    n_bits: int
    re: np.ndarray  # (2,)
    im: np.ndarray  # (2,)

    def __post_init__(self):
        object.__setattr__(self, "re", np.asarray(self.re, dtype=np.int64).reshape(2))
        object.__setattr__(self, "im", np.asarray(self.im, dtype=np.int64).reshape(2))
        lim = 2 ** (self.n_bits - 1) - 1
        if not (-128 <= self.scaling_ratio <= 7):
            raise ValueError("scaling ratio outside the signed 8-bit range")
        if np.any(np.abs(self.re) > lim) or np.any(np.abs(self.im) > lim):
            raise ValueError("quantized word outside signed range")


@dataclass(frozen=True)
class CsitEstimate:
    """Channel knowledge as seen by the transmitter."""

    h_tx_1: np.ndarray
    h_tx_2: np.ndarray
    mode: CsitMode

    def __post_init__(self):
        object.__setattr__(self, "h_tx_1", np.asarray(self.h_tx_1, dtype=np.complex128).reshape(2))
        object.__setattr__(self, "h_tx_2", np.asarray(self.h_tx_2, dtype=np.complex128).reshape(2))
        if not (np.all(np.isfinite(self.h_tx_1)) and np.all(np.isfinite(self.h_tx_2))):
            raise ValueError("non-finite CSIT")

    def h_tx(self, rx: int) -> np.ndarray:
        return self.h_tx_1 if rx == 0 else self.h_tx_2


@dataclass(frozen=True)
class ChannelMetrics:
    alpha_db: float   # strength disparity, dB gain of RX2 over RX1
    rho: float        # 0 = aligned, 1 = orthogonal


def _steering(angle: float) -> np.ndarray:
    # Half-wavelength ULA with two elements.
    return np.array([1.0, np.exp(1j * np.pi * np.sin(angle))], dtype=np.complex128)


def synthesize_channel_pair(geometry: ChannelGeometry, params: OfdmParams,
                            seed: int, noise_variance: float = 1e-3) -> ChannelRealization:
    """Build per-subcarrier channel vectors from the LoS geometry.

    h_i[k] = g_i * exp(j phi_i) * a(theta_i) + ripple[k], where the ripple is
    a zero-mean complex perturbation of the given scale drawn per subcarrier
    and per antenna. Deterministic for a fixed (geometry, seed).
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, 0x6C05]))
    n = params.n_subcarriers
    base1 = geometry.gain_rx1 * np.exp(1j * geometry.phase_rx1) * _steering(geometry.angle_rx1)
    base2 = geometry.gain_rx2 * np.exp(1j * geometry.phase_rx2) * _steering(geometry.angle_rx2)
    h1 = np.tile(base1, (n, 1))
    h2 = np.tile(base2, (n, 1))
    if geometry.ripple_amplitude > 0:
        scale = geometry.ripple_amplitude / np.sqrt(2.0)
        h1 = h1 + scale * (rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2)))
        h2 = h2 + scale * (rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2)))
    return ChannelRealization(h1=h1, h2=h2, noise_variance=noise_variance)


def solve_geometry_for_targets(alpha_db: float, rho: float,
                               gain_rx1: float = 1.0,
                               phase_rx1: float = 0.0,
                               phase_rx2: float = 0.0,
                               ripple_amplitude: float = 0.0) -> ChannelGeometry:
    """Invert the closed-form metric relations: gain ratio from alpha and the
    ULA angle from rho, with RX1 fixed at broadside."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    gain_rx2 = gain_rx1 * 10.0 ** (alpha_db / 20.0)
    # rho(theta) = 1 - cos^2(pi (sin t1 - sin t2) / 2) with theta1 = 0
    sin_t2 = 2.0 / np.pi * np.arccos(np.sqrt(1.0 - rho))
    angle_rx2 = float(np.arcsin(sin_t2))
    return ChannelGeometry(gain_rx1=gain_rx1, gain_rx2=gain_rx2,
                           angle_rx1=0.0, angle_rx2=angle_rx2,
                           phase_rx1=phase_rx1, phase_rx2=phase_rx2,
                           ripple_amplitude=ripple_amplitude)


def wideband_average(h: np.ndarray) -> WidebandCsi:
    """Average per-subcarrier 2-vectors into the wideband feedback vector."""
    h = np.asarray(h, dtype=np.complex128)
    if h.size == 0:
        raise ValueError("empty channel sequence")
    return WidebandCsi(h_hat=h.reshape(-1, 2).mean(axis=0))


def channel_metrics(h1_hat: WidebandCsi, h2_hat: WidebandCsi) -> ChannelMetrics:
    """Strength disparity and spatial correlation of a wideband CSI pair.

    alpha is the RX2/RX1 channel gain in dB (20 log10 of the norm ratio, so
    that solve_geometry_for_targets round-trips); rho uses the squared-norm
    normalization so that 0 means aligned and 1 means orthogonal.
    """
    v1, v2 = h1_hat.h_hat, h2_hat.h_hat
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("zero-norm CSI")
    alpha_db = 20.0 * np.log10(n2 / n1)
    rho = 1.0 - abs(np.vdot(v1, v2)) ** 2 / (n1 ** 2 * n2 ** 2)
    return ChannelMetrics(alpha_db=float(alpha_db), rho=float(min(max(rho, 0.0), 1.0)))


def ls_channel_estimate(received: np.ndarray, reference: np.ndarray,
                        params: OfdmParams) -> np.ndarray:
    """Least-squares per-subcarrier estimate: received / reference on the used
    subcarriers, zero on the guard band."""
    received = np.asarray(received, dtype=np.complex128)
    reference = np.asarray(reference, dtype=np.complex128)
    if received.shape != reference.shape:
        raise ValueError("shape mismatch")
    used = list(params.used_indices)
    if np.any(reference[used] == 0):
        raise ValueError("zero reference on a used subcarrier")
    est = np.zeros_like(received)
    est[used] = received[used] / reference[used]
    return est


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def _scaling_ratio(m_h: float) -> int:
    # 3-bit dB encoding of the max component; the floor keeps the residual
    # linear scaler in [1, 10^(1/20)).  Clamped at zero so the field stays in
    # its unsigned 3-bit range; below 1 the linear scaler then equals m_h.
    return int(min(7, max(0, np.floor(20.0 * np.log10(m_h)))))


def _quantize_components(parts: np.ndarray, n_bits: int) -> tuple[int, np.ndarray]:
    m_h = float(np.max(np.abs(parts)))
    if m_h == 0.0:
        raise ValueError("all-zero CSI cannot be quantized (scaling undefined)")
    m_big = _scaling_ratio(m_h)
    m_lin = m_h / 10.0 ** (m_big / 20.0)
    lim = 2 ** (n_bits - 1) - 1
    words = _round_half_away(parts / m_lin * lim)
    return m_big, np.clip(words, -lim, lim).astype(np.int64)


def quantize_csi(h_hat_1: WidebandCsi, h_hat_2: WidebandCsi, n_bits: int = 4) -> QuantizedCsi:
    """Quantize both receivers' wideband CSI with a single shared scaling
    ratio (35-bit total payload at n_bits=4)."""
    stack = np.stack([h_hat_1.h_hat, h_hat_2.h_hat])  # (2 rx, 2 ant)
    parts = np.stack([stack.real, stack.imag], axis=-1)  # (2, 2, 2)
    m_big, words = _quantize_components(parts, n_bits)
    return QuantizedCsi(scaling_ratio=m_big, n_bits=n_bits,
                        re=words[..., 0], im=words[..., 1])


def dequantize_csi(q: QuantizedCsi, mode: CsitMode = CsitMode.QUANTIZED_RESCALED) -> CsitEstimate:
    """Recover CSIT from the feedback words.

    Literal mode divides by 10^(M_h/20) only; rescaled mode additionally
    divides by the full-scale word so the vector's scale tracks the original
    up to the 3-bit scaling residual.
    """
    vecs = (q.re + 1j * q.im).astype(np.complex128)
    scale = 10.0 ** (q.scaling_ratio / 20.0)
    if mode == CsitMode.QUANTIZED_RESCALED:
        scale *= 2 ** (q.n_bits - 1) - 1
    elif mode != CsitMode.QUANTIZED_LITERAL:
        raise ValueError("dequantize mode must be a quantized mode")
    vecs = vecs / scale
    return CsitEstimate(h_tx_1=vecs[0], h_tx_2=vecs[1], mode=mode)


def quantize_user_csi(h_hat: WidebandCsi, n_bits: int = 4) -> UserQuantizedCsi:
    """Quantize one receiver's wideband CSI with its own scaling ratio.

    The words follow the same clamped-window rule as the joint packet (full
    word range whenever the max component is below the window), while the
    reported scale keeps the unclamped dB value of the max component.
    """
    parts = np.stack([h_hat.h_hat.real, h_hat.h_hat.imag], axis=-1)  # (2, 2)
    m_h = float(np.max(np.abs(parts)))
    if m_h == 0.0:
        raise ValueError("all-zero CSI cannot be quantized (scaling undefined)")
    m_report = int(max(-128, min(7, np.floor(20.0 * np.log10(m_h)))))
    m_word = max(m_report, 0)
    m_lin = m_h / 10.0 ** (m_word / 20.0)
    lim = 2 ** (n_bits - 1) - 1
    words = np.clip(_round_half_away(parts / m_lin * lim), -lim, lim).astype(np.int64)
    return UserQuantizedCsi(scaling_ratio=m_report, n_bits=n_bits,
                            re=words[..., 0], im=words[..., 1])


def dequantize_user_csi(q: UserQuantizedCsi,
                        mode: CsitMode = CsitMode.QUANTIZED_RESCALED) -> np.ndarray:
    """Recover one receiver's CSIT: rescaled mode tracks the true magnitude
    up to the one-dB scale residual plus word rounding."""
    vec = (q.re + 1j * q.im).astype(np.complex128)
    if mode == CsitMode.QUANTIZED_RESCALED:
        # words were scaled by m_h / 10^(max(M,0)/20); undoing with the
        # reported M leaves only the sub-dB floor residual on the magnitude
        return vec * 10.0 ** (min(q.scaling_ratio, 0) / 20.0) / (2 ** (q.n_bits - 1) - 1)
    if mode != CsitMode.QUANTIZED_LITERAL:
        raise ValueError("dequantize mode must be a quantized mode")
    return vec / 10.0 ** (max(q.scaling_ratio, 0) / 20.0)
