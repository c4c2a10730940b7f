import math

import numpy as np
import pytest

from rlsc.analytic_nrlsc import analytic_terms
from rlsc.chain import build_chain, stationary_initial
from rlsc.channels import ChannelSpec, EmissionModel, sample_trace
from rlsc.debt import CodeParams, Mode, run_trajectory
from rlsc.errors import ContractError
from rlsc.sim import (analytic_pe, compare_debt_codec, estimate_pe,
                      renewal_stats, sweep)


@pytest.fixture(scope="module")
def small_setting():
    params = CodeParams(1, 2, 2, 1)
    channel = ChannelSpec.gilbert_elliott(
        0.1, 0.3, EmissionModel.packet(2, 0.85), EmissionModel.packet(2, 0.3),
        packet_mode=True)
    return params, channel


def test_full_delivery_pe_zero():
    channel = ChannelSpec.iid(EmissionModel.packet(2, 1.0), packet_mode=True)
    est = estimate_pe(channel, CodeParams(1, 2, 2, 1), 5000, 3, 1)
    assert est.pe_hat == 0.0


def test_seed_determinism(small_setting):
    params, channel = small_setting
    a = estimate_pe(channel, params, 20_000, 3, 7)
    b = estimate_pe(channel, params, 20_000, 3, 7)
    assert a.pe_hat == b.pe_hat
    assert a.round_pes == b.round_pes


def test_worker_count_invariance(small_setting):
    params, channel = small_setting
    serial = estimate_pe(channel, params, 10_000, 4, 7, threads=1)
    parallel = estimate_pe(channel, params, 10_000, 4, 7, threads=2)
    assert serial.pe_hat == parallel.pe_hat
    assert serial.round_pes == parallel.round_pes


def test_ratio_identity_exact(small_setting):
    params, channel = small_setting
    est = estimate_pe(channel, params, 30_000, 4, 3)
    assert est.pe_hat == pytest.approx(
        est.e_errors_per_cycle_hat / est.e_interval_hat, abs=1e-12)


def test_ci_shrinks_with_sample_size(small_setting):
    params, channel = small_setting
    small = estimate_pe(channel, params, 20_000, 10, 5)
    big = estimate_pe(channel, params, 80_000, 10, 5)
    width_small = small.ci95[1] - small.ci95[0]
    width_big = big.ci95[1] - big.ci95[0]
    # quadrupling T should halve the width, give or take sampling noise
    assert width_big < width_small / 1.3


def test_matches_closed_form(small_setting):
    params, channel = small_setting
    chain = build_chain(params, channel)
    pi0 = stationary_initial(chain)
    theory = analytic_pe(channel, params)
    est = estimate_pe(channel, params, 200_000, 6, 11)
    assert abs(est.pe_hat - theory) / theory < 0.05


def test_engine_validation():
    channel = ChannelSpec.iid(EmissionModel.binomial(6, 0.8))
    params = CodeParams(3, 6, 2, 1)
    with pytest.raises(ContractError):
        estimate_pe(channel, params, 1000, 2, 1, engine="baseline:swpec-k3n6")
    with pytest.raises(ContractError):
        estimate_pe(channel, CodeParams(3, 6, 2, 1, Mode.SYSTEMATIC_PEC),
                    1000, 2, 1)
    with pytest.raises(ContractError):
        estimate_pe(ChannelSpec.iid(EmissionModel.packet(6, 0.9), True),
                    params, 1000, 2, 1, engine="warp-drive")


def test_debt_vs_codec_engines_agree(small_setting):
    params, channel = small_setting
    agree, judged, _ = compare_debt_codec(channel, params, 3000, 13, q=16)
    assert agree >= 0.999
    debt = estimate_pe(channel, params, 3000, 2, 13, engine="debt")
    codec = estimate_pe(channel, params, 3000, 2, 13, engine="codec")
    assert codec.pe_hat == pytest.approx(debt.pe_hat, rel=0.1, abs=5e-3)


def test_renewal_stats_against_closed_forms(small_setting):
    params, channel = small_setting
    chain = build_chain(params, channel)
    pi0 = stationary_initial(chain)
    terms = analytic_terms(chain, pi0, params.delta, params.alpha)
    trajs = [run_trajectory(sample_trace(channel, 300_000, s), params)
             for s in (1, 2, 3)]
    rs = renewal_stats(trajs, params)
    assert rs.e_interval_hat == pytest.approx(terms.e_interval, rel=0.02)
    assert rs.e_lg_hat == pytest.approx(terms.e_lg, rel=0.15, abs=2e-4)
    assert rs.e_lb1_hat == pytest.approx(terms.e_lb1, rel=0.15, abs=2e-4)
    assert rs.e_lb2_hat == pytest.approx(terms.e_lb2, rel=0.25, abs=2e-4)


def test_renewal_stats_no_ceiling_channel():
    channel = ChannelSpec.iid(EmissionModel.packet(2, 0.9), packet_mode=True)
    params = CodeParams(1, 2, 12, 1)
    trajs = [run_trajectory(sample_trace(channel, 50_000, 1), params)]
    rs = renewal_stats(trajs, params)
    assert rs.e_lb1_hat == 0.0
    assert rs.e_lb2_hat == 0.0


def test_renewal_stats_large_delay_kills_lg(small_setting):
    params, channel = small_setting
    big_delta = CodeParams(params.k, params.n, params.alpha, 60)
    trajs = [run_trajectory(sample_trace(channel, 100_000, 2), big_delta)]
    rs = renewal_stats(trajs, big_delta)
    assert rs.e_lg_hat == 0.0


class TestSweep:
    def test_empty_values(self, small_setting):
        params, channel = small_setting
        assert sweep(channel, [("debt", "debt", params)], 1000, 2, 1,
                     "delta", []) == []

    def test_delta_monotone(self, small_setting):
        params, channel = small_setting
        rows = sweep(channel, [("debt", "debt", params)], 60_000, 3, 5,
                     "delta", [0, 1, 2, 4, 8])
        pes = [r["pe"] for r in rows]
        assert all(a >= b - 1e-9 for a, b in zip(pes, pes[1:]))

    def test_loss_monotone_within_noise(self):
        params = CodeParams(1, 2, 2, 1)
        channel = ChannelSpec.gilbert_elliott(
            0.05, 0.4, EmissionModel.packet(2, 0.9), EmissionModel.packet(2, 0.0),
            packet_mode=True)
        rows = sweep(channel, [("debt", "debt", params)], 60_000, 4, 9,
                     "loss_g", [0.1, 0.3, 0.5, 0.7])
        pes = [r["pe"] for r in rows]
        assert all(b > a for a, b in zip(pes, pes[1:]))

    def test_analytic_engine_rows(self, small_setting):
        params, channel = small_setting
        rows = sweep(channel, [("analytic", "analytic", params),
                               ("debt", "debt", params)],
                     50_000, 3, 5, "delta", [1, 2])
        analytic_rows = [r for r in rows if r["engine"] == "analytic"]
        sim_rows = [r for r in rows if r["engine"] == "debt"]
        for a, s in zip(analytic_rows, sim_rows):
            assert a["value"] == s["value"]
            assert abs(a["pe"] - s["pe"]) / a["pe"] < 0.25

    def test_unknown_axis(self, small_setting):
        params, channel = small_setting
        with pytest.raises(ContractError):
            sweep(channel, [("debt", "debt", params)], 1000, 2, 1,
                  "frequency", [1])


def test_analytic_pe_dispatch():
    channel = ChannelSpec.iid(EmissionModel.packet(2, 0.7), packet_mode=True)
    from rlsc.debt import INFINITE
    params = CodeParams(1, 2, INFINITE, 3, Mode.SYSTEMATIC_PEC)
    from rlsc.analytic_srlsc import pe_srlsc_infinite
    assert analytic_pe(channel, params) == pytest.approx(
        pe_srlsc_infinite(0.7, 3).pe, abs=1e-12)
    with pytest.raises(ContractError):
        analytic_pe(channel, CodeParams(1, 2, 3, 1, Mode.SYSTEMATIC_PEC))
    with pytest.raises(ContractError):
        analytic_pe(channel, CodeParams(1, 3, INFINITE, 1, Mode.SYSTEMATIC_PEC))
