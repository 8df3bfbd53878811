"""RSC encoding, channels, BCJR vs brute-force MAP, and the turbo loop."""

import numpy as np
import pytest

from infoplay.entropy import LlrBlock
from infoplay.errors import ValidationError
from infoplay.turbo import (
    AWGN_BPSK,
    BSC,
    ChannelModel,
    Interleaver,
    RscCode,
    bcjr_decode,
    random_interleaver,
    rsc_encode,
    s_random_interleaver,
    simulate_turbo,
    trace_csv,
    transmit,
    turbo_decode,
    turbo_encode,
)

from oracles import brute_force_map, ref_encode_75

CODE75 = RscCode(feedback_poly=0o7, feedforward_poly=0o5, memory=2)


class TestRscEncode:
    def test_all_zero_input(self):
        sys_bits, par_bits = rsc_encode(np.zeros(16, dtype=int), CODE75)
        assert not sys_bits.any() and not par_bits.any()

    def test_impulse_response_matches_reference(self):
        u = np.zeros(12, dtype=int)
        u[0] = 1
        sys_bits, par_bits = rsc_encode(u, CODE75, terminate=False)
        ref_sys, ref_par = ref_encode_75(list(u), terminate=False)
        np.testing.assert_array_equal(sys_bits, ref_sys)
        np.testing.assert_array_equal(par_bits, ref_par)
        # recursive code: the impulse parity response is periodic, not finite
        np.testing.assert_array_equal(par_bits[:6], [1, 1, 1, 0, 1, 1])

    def test_random_inputs_match_reference(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            u = rng.integers(0, 2, rng.integers(1, 40))
            got = rsc_encode(u, CODE75)
            ref = ref_encode_75(list(u))
            np.testing.assert_array_equal(got[0], ref[0])
            np.testing.assert_array_equal(got[1], ref[1])

    def test_terminated_lengths(self):
        sys_bits, par_bits = rsc_encode(np.ones(10, dtype=int), CODE75)
        assert len(sys_bits) == 12 and len(par_bits) == 12

    def test_bad_code_rejected(self):
        with pytest.raises(ValidationError):
            RscCode(feedback_poly=0o3, feedforward_poly=0o5, memory=2)  # no constant term
        with pytest.raises(ValidationError):
            RscCode(feedback_poly=0o17, feedforward_poly=0o5, memory=2)  # degree > memory


class TestInterleaver:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        il = random_interleaver(64, seed=1)
        for _ in range(5):
            x = rng.normal(size=64)
            np.testing.assert_array_equal(il.deinterleave(il.interleave(x)), x)

    def test_s_random_spread(self):
        il = s_random_interleaver(128, seed=2)
        s = int(np.sqrt(128 / 2))
        perm = il.permutation
        for i in range(len(perm)):
            for j in range(max(0, i - s + 1), i):
                assert abs(int(perm[i]) - int(perm[j])) >= s

    def test_non_bijection_rejected(self):
        with pytest.raises(ValidationError):
            Interleaver(np.array([0, 0, 2]))


class TestTransmit:
    def test_high_snr_signs(self):
        bits = np.random.default_rng(3).integers(0, 2, 500)
        block = transmit(bits, ChannelModel(AWGN_BPSK, 40.0), seed=4)
        np.testing.assert_array_equal(np.sign(block.llrs), 1.0 - 2.0 * bits)

    def test_useless_bsc(self):
        bits = np.zeros(100, dtype=int)
        block = transmit(bits, ChannelModel(BSC, 0.5), seed=5)
        assert np.all(block.llrs == 0.0)

    def test_bsc_llr_magnitude(self):
        bits = np.random.default_rng(6).integers(0, 2, 1000)
        block = transmit(bits, ChannelModel(BSC, 0.1), seed=7)
        np.testing.assert_allclose(np.abs(block.llrs), np.log(9.0), atol=1e-12)

    def test_noiseless_bsc_clamped(self):
        block = transmit(np.array([0, 1]), ChannelModel(BSC, 0.0), seed=8)
        np.testing.assert_array_equal(block.llrs, [50.0, -50.0])

    def test_deterministic(self):
        bits = np.ones(64, dtype=int)
        a = transmit(bits, ChannelModel(AWGN_BPSK, 1.0, rate=0.5), seed=9)
        b = transmit(bits, ChannelModel(AWGN_BPSK, 1.0, rate=0.5), seed=9)
        np.testing.assert_array_equal(a.llrs, b.llrs)

    def test_invalid_channels(self):
        with pytest.raises(ValidationError):
            ChannelModel(BSC, 0.6)
        with pytest.raises(ValidationError):
            ChannelModel("laplace", 1.0)


def noisy_component_block(n_info, seed, ebn0_db=1.0):
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, n_info)
    sys_bits, par_bits = rsc_encode(bits, CODE75)
    channel = ChannelModel(AWGN_BPSK, ebn0_db, rate=0.5)
    rx_sys = transmit(sys_bits, channel, seed=rng.integers(2**32))
    rx_par = transmit(par_bits, channel, seed=rng.integers(2**32))
    apriori = LlrBlock(np.zeros(n_info), bits)
    return bits, rx_sys, rx_par, apriori


class TestBcjr:
    def test_near_noiseless_recovery(self):
        bits, rx_sys, rx_par, apriori = noisy_component_block(32, seed=1, ebn0_db=15.0)
        app, _ = bcjr_decode(rx_sys, rx_par, apriori, CODE75)
        np.testing.assert_array_equal((app.llrs < 0).astype(int), bits)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_brute_force_map(self, seed):
        _, rx_sys, rx_par, apriori = noisy_component_block(8, seed=seed, ebn0_db=0.0)
        la = np.random.default_rng(seed + 100).normal(0, 1, 8)
        apriori = LlrBlock(la, apriori.truth)
        app, _ = bcjr_decode(rx_sys, rx_par, apriori, CODE75)
        expected = brute_force_map(rx_sys.llrs, rx_par.llrs, apriori.llrs, 8)
        np.testing.assert_allclose(app.llrs, expected, atol=1e-6)

    @pytest.mark.parametrize("n_info", [2, 5, 10])
    def test_brute_force_property_various_lengths(self, n_info):
        for seed in range(3):
            _, rx_sys, rx_par, apriori = noisy_component_block(n_info, seed=37 + seed, ebn0_db=-1.0)
            app, _ = bcjr_decode(rx_sys, rx_par, apriori, CODE75)
            expected = brute_force_map(rx_sys.llrs, rx_par.llrs, apriori.llrs, n_info)
            np.testing.assert_allclose(app.llrs, expected, atol=1e-6)

    def test_apriori_saturation_forces_zero_decisions(self):
        for seed in range(5):
            bits, rx_sys, rx_par, _ = noisy_component_block(16, seed=seed, ebn0_db=-3.0)
            apriori = LlrBlock(np.full(16, 50.0), bits)
            app, _ = bcjr_decode(rx_sys, rx_par, apriori, CODE75)
            assert (app.llrs > 0).all()

    def test_llr_decomposition_identity(self):
        bits, rx_sys, rx_par, apriori = noisy_component_block(24, seed=11, ebn0_db=0.5)
        la = np.random.default_rng(12).normal(0, 2, 24)
        apriori = LlrBlock(la, bits)
        app, ext = bcjr_decode(rx_sys, rx_par, apriori, CODE75)
        recomposed = rx_sys.llrs[:24] + apriori.llrs + ext.llrs
        np.testing.assert_allclose(app.llrs, recomposed, atol=1e-9)

    def test_extrinsic_independent_of_own_apriori(self):
        bits, rx_sys, rx_par, apriori = noisy_component_block(16, seed=13, ebn0_db=0.5)
        la = np.random.default_rng(14).normal(0, 1, 16)
        _, ext_base = bcjr_decode(rx_sys, rx_par, LlrBlock(la, bits), CODE75)
        for n in (0, 7, 15):
            la_mod = la.copy()
            la_mod[n] += 3.0
            _, ext_mod = bcjr_decode(rx_sys, rx_par, LlrBlock(la_mod, bits), CODE75)
            assert abs(ext_mod.llrs[n] - ext_base.llrs[n]) <= 1e-9

    def test_length_mismatch_rejected(self):
        bits, rx_sys, rx_par, apriori = noisy_component_block(8, seed=15)
        bad = LlrBlock(np.zeros(5), np.zeros(5, dtype=int))
        with pytest.raises(ValidationError):
            bcjr_decode(rx_sys, rx_par, bad, CODE75)

    def test_max_log_approximation(self):
        # the pure-max variant decodes cleanly at high SNR but is not the
        # exact posterior
        bits, rx_sys, rx_par, apriori = noisy_component_block(32, seed=16, ebn0_db=12.0)
        app, _ = bcjr_decode(rx_sys, rx_par, apriori, CODE75, exact=False)
        np.testing.assert_array_equal((app.llrs < 0).astype(int), bits)
        _, rx_sys, rx_par, apriori = noisy_component_block(8, seed=17, ebn0_db=-1.0)
        approx, _ = bcjr_decode(rx_sys, rx_par, apriori, CODE75, exact=False)
        exact, _ = bcjr_decode(rx_sys, rx_par, apriori, CODE75, exact=True)
        assert np.abs(approx.llrs - exact.llrs).max() > 1e-6


def transmit_turbo_blocks(n_info, ebn0_db, n_blocks, seed):
    root = np.random.SeedSequence(seed)
    ss_perm, ss_data = root.spawn(2)
    interleaver = random_interleaver(n_info, ss_perm)
    channel = ChannelModel(AWGN_BPSK, ebn0_db, rate=1.0 / 3.0)
    rng = np.random.default_rng(ss_data)
    out = []
    for _ in range(n_blocks):
        bits = rng.integers(0, 2, n_info)
        cw = turbo_encode(bits, CODE75, interleaver)
        rx = transmit(cw.concatenated(), channel, seed=rng.integers(2**32))
        out.append(rx)
    return interleaver, out


class TestTurboDecode:
    def test_noiseless_zero_ber_first_iteration(self):
        interleaver, blocks = transmit_turbo_blocks(128, 40.0, 1, seed=21)
        trace, decoded = turbo_decode(blocks[0], interleaver, CODE75, max_iters=2)
        assert trace.ber_at(1) == 0.0
        np.testing.assert_array_equal(decoded, blocks[0].truth[:128])

    def test_iterations_reduce_ber_at_2db(self):
        traces = simulate_turbo(1024, 2.0, 20, max_iters=8, seed=22)
        first = np.mean([t.ber_at(1) for t in traces])
        last = np.mean([t.ber_at(8) for t in traces])
        assert last <= first
        assert last <= 1e-3

    def test_monotone_extrinsic_growth_in_waterfall(self):
        traces = simulate_turbo(1024, 2.0, 10, max_iters=8, seed=23)
        ie1 = np.array([[r.i_e_dec1 for r in t.records] for t in traces]).mean(axis=0)
        assert all(b >= a - 0.01 for a, b in zip(ie1, ie1[1:]))

    def test_pinched_regime_at_minus_5db(self):
        traces = simulate_turbo(1024, -5.0, 10, max_iters=8, seed=24)
        ie1 = np.array([[r.i_e_dec1 for r in t.records] for t in traces]).mean(axis=0)
        ber = np.mean([t.ber_at(8) for t in traces])
        assert ie1.max() < 0.5
        assert ber > 0.1

    def test_batch_matches_single_block_decode(self):
        traces = simulate_turbo(64, 1.0, 3, max_iters=4, seed=25)
        # re-derive the exact same blocks and decode them one at a time
        root = np.random.SeedSequence(25)
        ss_perm, ss_bits, ss_noise = root.spawn(3)
        interleaver = random_interleaver(64, ss_perm)
        channel = ChannelModel(AWGN_BPSK, 1.0, rate=1.0 / 3.0)
        bit_rng = np.random.default_rng(ss_bits)
        for b, ss in enumerate(ss_noise.spawn(3)):
            bits = bit_rng.integers(0, 2, 64)
            cw = turbo_encode(bits, CODE75, interleaver)
            rx = transmit(cw.concatenated(), channel, ss)
            trace, _ = turbo_decode(rx, interleaver, CODE75, max_iters=4)
            for got, ref in zip(traces[b].records, trace.records):
                assert got.ber == ref.ber
                assert got.i_e_dec1 == pytest.approx(ref.i_e_dec1, abs=1e-12)
                assert got.i_e_dec2 == pytest.approx(ref.i_e_dec2, abs=1e-12)

    def test_trace_csv_format(self):
        traces = simulate_turbo(32, 3.0, 2, max_iters=2, seed=26)
        text = trace_csv(traces, seed=26)
        lines = text.strip().split("\n")
        assert lines[0] == "# seed=26"
        assert lines[1] == "block,iteration,i_e_dec1,i_e_dec2,ber"
        assert len(lines) == 2 + 2 * 2
        assert lines[2].startswith("0,1,")

    def test_trace_matches_committed_digest(self):
        import hashlib
        import json
        from pathlib import Path

        fixture = json.loads(
            (Path(__file__).parent / "fixtures" / "turbo_trace.json").read_text()
        )
        expected = fixture.pop("sha256")
        traces = simulate_turbo(**fixture)
        text = trace_csv(traces, seed=fixture["seed"])
        assert hashlib.sha256(text.encode()).hexdigest() == expected
