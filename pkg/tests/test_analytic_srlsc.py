import math
import warnings

import numpy as np
import pytest

from rlsc.analytic_srlsc import (catalan, expected_errors,
                                 expected_interval_integral,
                                 expected_interval_truncated, nup_oracle,
                                 nup_recursion, nup_sum, nup_sum_piecewise,
                                 pe_srlsc_infinite)
from rlsc.errors import ContractError


def catalan_by_convolution(n):
    """Independent recurrence C_{m+1} = sum C_i C_{m-i}."""
    c = [1]
    for m in range(n):
        c.append(sum(c[i] * c[m - i] for i in range(m + 1)))
    return c[n]


class TestCatalan:
    def test_small_values(self):
        assert catalan(0) == 1
        assert catalan(4) == 14

    def test_against_convolution_recurrence(self):
        for n in range(0, 20):
            assert catalan(n) == catalan_by_convolution(n)

    def test_big_values_exact(self):
        # Python integers: exact far beyond 64 bits
        assert catalan(9) == 4862
        assert catalan(60) % 10 == catalan_by_convolution(60) % 10
        assert catalan(60) == catalan_by_convolution(60)

    def test_negative_rejected(self):
        with pytest.raises(ContractError):
            catalan(-1)


class TestIntervalDenominator:
    def test_perfect_delivery(self):
        assert expected_interval_integral(1.0) == pytest.approx(1.0, abs=1e-12)
        assert expected_interval_truncated(1.0, 500) == pytest.approx(1.0, abs=1e-12)

    def test_low_delivery_rejected(self):
        with pytest.raises(ContractError):
            expected_interval_integral(0.5)
        with pytest.raises(ContractError):
            expected_interval_truncated(0.4, 10)

    def test_integral_equals_generating_function_value(self):
        # independent series: E{T} = p + sum_l 2l C_{l-1} (p(1-p))^l,
        # which sums in closed form to p + 2p(1-p)/(2p-1)
        from rlsc.analytic_srlsc import _log_int
        for p in (0.6, 0.7, 0.8, 0.9, 0.99):
            u = p * (1 - p)
            log_u = math.log(u)
            series = p + sum(
                math.exp(math.log(2 * l) + l * log_u + _log_int(catalan(l - 1)))
                for l in range(1, 800))
            closed = p + 2 * u / (2 * p - 1)
            integral = expected_interval_integral(p)
            assert integral == pytest.approx(closed, abs=1e-9)
            assert integral == pytest.approx(series, abs=1e-6)
        # near the recurrence boundary only the closed form stays cheap
        assert expected_interval_integral(0.55) == pytest.approx(
            0.55 + 2 * 0.55 * 0.45 / 0.1, abs=1e-8)

    def test_truncated_single_term(self):
        # n_k = 1: single eigenvalue at cos(pi/2) = 0
        p = 0.7
        by_hand = p + 2 * p * (1 - p) / 2 * (1 + 1) * 1.0
        assert expected_interval_truncated(p, 1) == pytest.approx(by_hand, abs=1e-12)

    def test_truncated_converges_to_integral(self):
        for p in (0.6, 0.7, 0.8):
            integral = expected_interval_integral(p)
            gaps = [abs(expected_interval_truncated(p, n) - integral)
                    for n in (100, 1000, 10_000, 100_000)]
            # monotone until the quadrature precision floor
            assert all(a >= b or max(a, b) < 1e-10
                       for a, b in zip(gaps, gaps[1:]))
            assert gaps[-1] <= 1e-4


class TestUpwardStepCounts:
    def test_reference_counts_l5(self):
        assert [nup_oracle(5, j) for j in range(1, 11)] == \
            [14, 14, 9, 9, 7, 7, 5, 5, 0, 0]

    def test_total_paths_is_catalan(self):
        for l in range(1, 9):
            # the first step of every valid excursion is upward
            assert nup_oracle(l, 1) == catalan(l - 1)

    def test_recursion_matches_enumeration(self):
        for l in range(1, 10):
            assert nup_recursion(l) == [nup_oracle(l, j) for j in range(1, 2 * l + 1)]

    def test_sum_matches_enumeration(self):
        for l in range(1, 10):
            for delta in range(0, 2 * l):
                direct = sum(nup_oracle(l, j)
                             for j in range(1, max(2 * l - delta - 1, 0) + 1))
                assert nup_sum(l, delta) == direct

    def test_piecewise_equals_unified(self):
        for l in range(1, 13):
            for delta in range(0, 11):
                assert nup_sum(l, delta) == nup_sum_piecewise(l, delta)

    def test_boundary_single_step(self):
        # 2l = delta + 2: only the first (always upward) step is counted
        for l in range(1, 10):
            assert nup_sum(l, 2 * l - 2) == catalan(l - 1)

    def test_reference_sum(self):
        assert nup_sum(5, 3) == 60

    def test_out_of_range(self):
        assert nup_sum(2, 10) == 0
        with pytest.raises(ContractError):
            nup_oracle(13, 1)
        with pytest.raises(ContractError):
            nup_oracle(5, 11)


class TestExpectedErrors:
    def test_perfect_delivery_zero(self):
        assert expected_errors(1.0, 3).value == 0.0

    def test_delta_zero_renewal_identity(self):
        for p in (0.6, 0.7, 0.85):
            lhs = expected_errors(p, 0).value
            rhs = (1 - p) * expected_interval_integral(p)
            assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_tail_bound_matches_realized_truncation(self):
        p, delta = 0.7, 4
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            short = expected_errors(p, delta, l_max=40)
            long = expected_errors(p, delta, l_max=50)
        realized = abs(long.value - short.value)
        assert realized <= short.tail_bound * 1.5

    def test_truncation_warning(self):
        with pytest.warns(UserWarning):
            expected_errors(0.51, 2, l_max=12)


class TestPeSrlscInfinite:
    def test_perfect_delivery(self):
        assert pe_srlsc_infinite(1.0, 4).pe == 0.0

    def test_delta_zero_equals_erasure_rate(self):
        for p in (0.6, 0.7, 0.8, 0.9):
            assert pe_srlsc_infinite(p, 0).pe == pytest.approx(1 - p, abs=1e-6)

    def test_bounded_and_monotone_in_delta(self):
        for p in (0.6, 0.75):
            pes = [pe_srlsc_infinite(p, d).pe for d in range(0, 14)]
            assert all(0.0 <= v <= 1 - p + 1e-12 for v in pes)
            assert all(a >= b - 1e-12 for a, b in zip(pes, pes[1:]))

    def test_matches_simulation(self):
        from rlsc.channels import ChannelSpec, EmissionModel
        from rlsc.debt import INFINITE, CodeParams, Mode
        from rlsc.sim import estimate_pe
        p, delta = 0.7, 5
        theory = pe_srlsc_infinite(p, delta).pe
        channel = ChannelSpec.iid(EmissionModel.packet(2, p), packet_mode=True)
        params = CodeParams(1, 2, INFINITE, delta, Mode.SYSTEMATIC_PEC)
        est = estimate_pe(channel, params, 10 ** 6, 6, 515, engine="debt")
        assert abs(theory - est.pe_hat) / est.pe_hat < 0.05

    def test_cycle_statistics_k_invariant(self):
        # packet erasures scale the debt by K but not the cycle shape: the
        # denominator and the error count are K-independent
        from rlsc.channels import ChannelSpec, EmissionModel
        from rlsc.debt import INFINITE, CodeParams, Mode
        from rlsc.sim import estimate_pe
        p, delta = 0.7, 4
        estimates = []
        for k in (1, 5):
            channel = ChannelSpec.iid(EmissionModel.packet(2 * k, p),
                                      packet_mode=True)
            params = CodeParams(k, 2 * k, INFINITE, delta, Mode.SYSTEMATIC_PEC)
            est = estimate_pe(channel, params, 300_000, 4, 99, engine="debt")
            estimates.append(est)
        # identical seeds give identical erasure patterns, hence identical
        # per-slot error sets
        assert estimates[0].pe_hat == pytest.approx(estimates[1].pe_hat, abs=1e-12)
        assert estimates[0].e_interval_hat == pytest.approx(
            estimates[1].e_interval_hat, abs=1e-12)

    def test_mean_errors_per_cycle_matches_series(self):
        from rlsc.channels import ChannelSpec, EmissionModel
        from rlsc.debt import INFINITE, CodeParams, Mode
        from rlsc.sim import estimate_pe
        p, delta = 0.7, 5
        channel = ChannelSpec.iid(EmissionModel.packet(2, p), packet_mode=True)
        params = CodeParams(1, 2, INFINITE, delta, Mode.SYSTEMATIC_PEC)
        est = estimate_pe(channel, params, 10 ** 6, 6, 21, engine="debt")
        series = expected_errors(p, delta).value
        # across-round normal band (3 sigma) around the analytic value
        sd = np.std([pe * est.e_interval_hat for pe in est.round_pes], ddof=1)
        assert abs(est.e_errors_per_cycle_hat - series) <= 3 * sd / math.sqrt(6) + 1e-4
