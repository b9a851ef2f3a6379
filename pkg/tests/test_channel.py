"""Channel synthesis, wideband metrics and CSI feedback quantization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsmalink.channel import (
    ChannelGeometry,
    CsitMode,
    OfdmParams,
    QuantizedCsi,
    WidebandCsi,
    channel_metrics,
    dequantize_csi,
    dequantize_user_csi,
    ls_channel_estimate,
    quantize_csi,
    quantize_user_csi,
    solve_geometry_for_targets,
    synthesize_channel_pair,
    wideband_average,
)

PARAMS = OfdmParams()


def test_ofdm_params_partition():
    used = set(PARAMS.data_indices) | set(PARAMS.pilot_indices) | set(PARAMS.guard_indices)
    assert used == set(range(64))
    assert len(PARAMS.data_indices) == 48
    assert len(PARAMS.pilot_indices) == 4
    assert len(PARAMS.guard_indices) == 12
    assert not set(PARAMS.data_indices) & set(PARAMS.pilot_indices)


class TestSynthesis:
    def test_aligned_identical_channels(self):
        geo = ChannelGeometry(gain_rx1=1.0, gain_rx2=1.0)
        ch = synthesize_channel_pair(geo, PARAMS, seed=0)
        assert np.allclose(ch.h1, np.ones((64, 2)))
        assert np.allclose(ch.h2, np.ones((64, 2)))

    def test_orthogonal_steering(self):
        geo = ChannelGeometry(gain_rx1=1.0, gain_rx2=1.0,
                              angle_rx1=0.0, angle_rx2=np.pi / 2)
        ch = synthesize_channel_pair(geo, PARAMS, seed=0)
        # sin(theta2)=1 -> steering [1, -1], orthogonal to [1, 1]
        assert np.allclose(ch.h2[0], [1.0, -1.0], atol=1e-12)
        assert abs(np.vdot(ch.h1[0], ch.h2[0])) < 1e-12

    def test_deterministic_given_seed(self):
        geo = ChannelGeometry(gain_rx1=1.0, gain_rx2=0.5, angle_rx2=0.3,
                              ripple_amplitude=0.05)
        a = synthesize_channel_pair(geo, PARAMS, seed=42)
        b = synthesize_channel_pair(geo, PARAMS, seed=42)
        assert np.array_equal(a.h1, b.h1) and np.array_equal(a.h2, b.h2)

    def test_no_ripple_is_frequency_flat(self):
        geo = solve_geometry_for_targets(-5.0, 0.3)
        ch = synthesize_channel_pair(geo, PARAMS, seed=1)
        assert np.allclose(wideband_average(ch.h1).h_hat, ch.h1[0])

    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            ChannelGeometry(gain_rx1=0.0, gain_rx2=1.0)
        with pytest.raises(ValueError):
            ChannelGeometry(gain_rx1=1.0, gain_rx2=np.nan)
        with pytest.raises(ValueError):
            ChannelGeometry(gain_rx1=1.0, gain_rx2=0.1, ripple_amplitude=0.05)


class TestMetrics:
    def test_aligned_is_rho_zero(self):
        csi = WidebandCsi(h_hat=[1 + 1j, 0.4])
        m = channel_metrics(csi, csi)
        assert m.alpha_db == pytest.approx(0.0)
        assert m.rho == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_is_rho_one(self):
        m = channel_metrics(WidebandCsi(h_hat=[1, 1]), WidebandCsi(h_hat=[1, -1]))
        assert m.rho == pytest.approx(1.0)

    def test_hand_example(self):
        # |<h1, h2>|^2 / (|h1|^2 |h2|^2) = 1/2, norm ratio sqrt(2)
        m = channel_metrics(WidebandCsi(h_hat=[1, 0]), WidebandCsi(h_hat=[1, 1]))
        assert m.rho == pytest.approx(0.5)
        assert m.alpha_db == pytest.approx(20 * np.log10(np.sqrt(2)))

    def test_common_scalar_invariance(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        m0 = channel_metrics(WidebandCsi(h_hat=a), WidebandCsi(h_hat=b))
        c = 0.3 - 1.7j
        m1 = channel_metrics(WidebandCsi(h_hat=c * a), WidebandCsi(h_hat=c * b))
        assert m1.alpha_db == pytest.approx(m0.alpha_db)
        assert m1.rho == pytest.approx(m0.rho)

    def test_per_rx_scaling_shifts_alpha_only(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        m0 = channel_metrics(WidebandCsi(h_hat=a), WidebandCsi(h_hat=b))
        m1 = channel_metrics(WidebandCsi(h_hat=a), WidebandCsi(h_hat=2.0 * b))
        assert m1.rho == pytest.approx(m0.rho)
        assert m1.alpha_db - m0.alpha_db == pytest.approx(20 * np.log10(2.0))

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError):
            channel_metrics(WidebandCsi(h_hat=[0, 0]), WidebandCsi(h_hat=[1, 0]))

    @pytest.mark.parametrize("alpha_db,rho", [(0.0, 0.0), (-7.6, 0.15),
                                              (-22.1, 0.85), (-23.6, 0.24),
    ])
    def test_geometry_solver_roundtrip(self, alpha_db, rho):
        geo = solve_geometry_for_targets(alpha_db, rho)
        ch = synthesize_channel_pair(geo, PARAMS, seed=3)
        m = channel_metrics(wideband_average(ch.h1), wideband_average(ch.h2))
        assert m.alpha_db == pytest.approx(alpha_db, abs=1e-9)
        assert m.rho == pytest.approx(rho, abs=1e-9)


class TestWidebandAverage:
    def test_constant_sequence(self):
        h = np.tile(np.array([1.0, 1.0j]), (64, 1))
        assert np.allclose(wideband_average(h).h_hat, [1.0, 1.0j])

    def test_two_element_mean(self):
        h = np.array([[2.0, 0.0], [0.0, 2.0]])
        assert np.allclose(wideband_average(h).h_hat, [1.0, 1.0])

    def test_matches_direct_mean(self):
        rng = np.random.default_rng(5)
        h = rng.standard_normal((64, 2)) + 1j * rng.standard_normal((64, 2))
        expect = h.sum(axis=0) / 64.0
        assert np.allclose(wideband_average(h).h_hat, expect, atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            wideband_average(np.zeros((0, 2)))


class TestLsEstimate:
    def test_identity_reference(self):
        rng = np.random.default_rng(7)
        truth = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        est = ls_channel_estimate(truth, np.ones(64), PARAMS)
        used = list(PARAMS.used_indices)
        assert np.allclose(est[used], truth[used])
        assert np.all(est[list(PARAMS.guard_indices)] == 0)

    def test_division_inverse(self):
        ref = np.full(64, 2.0 + 0.5j)
        truth = np.full(64, 0.3 - 0.1j)
        est = ls_channel_estimate(truth * ref, ref, PARAMS)
        used = list(PARAMS.used_indices)
        assert np.allclose(est[used], truth[used], atol=1e-12)

    def test_noise_scaling(self):
        # estimation error variance per subcarrier ~ sigma^2 / |ref|^2
        rng = np.random.default_rng(11)
        sigma2 = 0.04
        ref = np.full(64, 2.0)
        errs = []
        used = list(PARAMS.used_indices)
        for _ in range(2000):
            noise = (rng.standard_normal(64) + 1j * rng.standard_normal(64)) \
                * np.sqrt(sigma2 / 2)
            est = ls_channel_estimate(ref * 1.0 + noise, ref, PARAMS)
            errs.append(np.mean(np.abs(est[used] - 1.0) ** 2))
        assert np.mean(errs) == pytest.approx(sigma2 / 4.0, rel=0.1)

    def test_zero_reference_rejected(self):
        ref = np.ones(64)
        ref[PARAMS.data_indices[0]] = 0
        with pytest.raises(ValueError):
            ls_channel_estimate(np.ones(64), ref, PARAMS)


class TestQuantizer:
    def test_unit_components(self):
        h1 = WidebandCsi(h_hat=[1 + 1j, -1 - 1j])
        h2 = WidebandCsi(h_hat=[-1 + 1j, 1 - 1j])
        q = quantize_csi(h1, h2)
        assert q.scaling_ratio == 0
        assert set(np.abs(q.words())) == {7}
        assert q.payload_bits == 35

    def test_direct_word_value(self):
        # max component 1 -> linear scaler 1; 0.7 * 7 rounds to 5
        q = quantize_csi(WidebandCsi(h_hat=[0.7, 1.0]), WidebandCsi(h_hat=[0.1, 0.1]))
        assert q.scaling_ratio == 0
        assert q.re[0, 0] == 5

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            quantize_csi(WidebandCsi(h_hat=[0, 0]), WidebandCsi(h_hat=[0, 0]))

    def test_literal_and_rescaled_examples(self):
        h1 = WidebandCsi(h_hat=[1 + 1j, -1 - 1j])
        h2 = WidebandCsi(h_hat=[-1 + 1j, 1 - 1j])
        q = quantize_csi(h1, h2)
        lit = dequantize_csi(q, CsitMode.QUANTIZED_LITERAL)
        res = dequantize_csi(q, CsitMode.QUANTIZED_RESCALED)
        assert np.allclose(np.abs(lit.h_tx_1.real), 7)
        assert np.allclose(np.abs(res.h_tx_1.real), 1)
        # the two modes differ by exactly the full-scale word
        assert np.allclose(lit.h_tx_1, res.h_tx_1 * 7)
        assert np.allclose(lit.h_tx_2, res.h_tx_2 * 7)

    def test_rescaled_error_bound_sweep(self):
        # relative error of the normalized vector <= (10^(1/20)-1) + 1/7
        rng = np.random.default_rng(13)
        bound = (10 ** (1 / 20) - 1) + 1 / 7
        worst = 0.0
        for _ in range(10_000 // 10):
            v = rng.standard_normal(8)
            m = np.max(np.abs(v))
            target = rng.uniform(0.5, 2.0)
            v = v / m * target
            h1 = WidebandCsi(h_hat=v[:2] + 1j * v[2:4])
            h2 = WidebandCsi(h_hat=v[4:6] + 1j * v[6:])
            q = quantize_csi(h1, h2)
            rec = dequantize_csi(q, CsitMode.QUANTIZED_RESCALED)
            ref = np.concatenate([h1.h_hat, h2.h_hat]) / target
            got = np.concatenate([rec.h_tx_1, rec.h_tx_2])
            parts = np.concatenate([(got - ref).real, (got - ref).imag])
            worst = max(worst, np.max(np.abs(parts)))
        assert worst <= bound

    def test_roundtrip_idempotent_words(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            v = rng.standard_normal(8) * rng.uniform(0.3, 3.0)
            h1 = WidebandCsi(h_hat=v[:2] + 1j * v[2:4])
            h2 = WidebandCsi(h_hat=v[4:6] + 1j * v[6:])
            q1 = quantize_csi(h1, h2)
            for mode in (CsitMode.QUANTIZED_LITERAL, CsitMode.QUANTIZED_RESCALED):
                rec = dequantize_csi(q1, mode)
                q2 = quantize_csi(WidebandCsi(h_hat=rec.h_tx_1),
                                  WidebandCsi(h_hat=rec.h_tx_2))
                assert np.array_equal(q1.words(), q2.words()), mode

    def test_packed_layout_roundtrip(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            v = rng.standard_normal(8) * rng.uniform(0.2, 2.5)
            q = quantize_csi(WidebandCsi(h_hat=v[:2] + 1j * v[2:4]),
                             WidebandCsi(h_hat=v[4:6] + 1j * v[6:]))
            blob = q.to_bytes()
            assert len(blob) == 5
            back = QuantizedCsi.from_bytes(blob)
            assert back.scaling_ratio == q.scaling_ratio
            assert np.array_equal(back.words(), q.words())

    def test_packed_layout_is_big_endian_msb_first(self):
        # scaling 0, first word +7 -> first byte 0b000_01110_... = 0x0E...
        q = QuantizedCsi(scaling_ratio=0, n_bits=4,
                         re=[[7, 0], [0, 0]], im=[[0, 0], [0, 0]])
        blob = q.to_bytes()
        assert blob[0] == 0b00001110

    def test_user_packets_preserve_weak_magnitude(self):
        rng = np.random.default_rng(23)
        for scale in (0.05, 0.3, 1.0, 2.0):
            v = rng.standard_normal(4)
            v = v / np.max(np.abs(v)) * scale
            wb = WidebandCsi(h_hat=v[:2] + 1j * v[2:])
            q = quantize_user_csi(wb)
            rec = dequantize_user_csi(q, CsitMode.QUANTIZED_RESCALED)
            # max-magnitude component recovered within scale residual + rounding
            i = np.argmax(np.abs(np.concatenate([wb.h_hat.real, wb.h_hat.imag])))
            flat_t = np.concatenate([wb.h_hat.real, wb.h_hat.imag])
            flat_r = np.concatenate([rec.real, rec.imag])
            assert abs(flat_r[i] - flat_t[i]) <= 0.27 * abs(flat_t[i])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=-3, max_value=3), min_size=8, max_size=8))
def test_quantizer_hypothesis_roundtrip(vals):
    v = np.array(vals)
    if np.max(np.abs(v)) < 1e-3:
        return
    h1 = WidebandCsi(h_hat=v[:2] + 1j * v[2:4])
    h2 = WidebandCsi(h_hat=v[4:6] + 1j * v[6:])
    q = quantize_csi(h1, h2)
    lim = 2 ** (q.n_bits - 1) - 1
    assert np.all(np.abs(q.words()) <= lim)
    assert 0 <= q.scaling_ratio <= 7
    rec = dequantize_csi(q, CsitMode.QUANTIZED_LITERAL)
    res = dequantize_csi(q, CsitMode.QUANTIZED_RESCALED)
    # both modes are positive scalar multiples of each other
    assert np.allclose(np.concatenate([rec.h_tx_1, rec.h_tx_2]),
                       np.concatenate([res.h_tx_1, res.h_tx_2]) * lim)
