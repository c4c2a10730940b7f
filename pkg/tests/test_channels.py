import numpy as np
import pytest

from rlsc.channels import (ChannelSpec, EmissionModel, build_emission,
                           sample_trace, stationary_distribution)
from rlsc.errors import ContractError


def test_binomial_emission_shape_and_mode():
    em = build_emission("binomial", n=10, p_success=0.7)
    assert em.pmf.shape == (11,)
    assert abs(em.pmf.sum() - 1.0) < 1e-12
    assert int(np.argmax(em.pmf)) == 7


def test_packet_emission_masses():
    em = build_emission("packet", n=10, p_delivery=0.7)
    assert em.pmf[10] == pytest.approx(0.7)
    assert em.pmf[0] == pytest.approx(0.3)
    assert np.all(em.pmf[1:10] == 0)
    assert em.is_packet


def test_table_emission_echo():
    em = build_emission("table", pmf=[0.3, 0.7])
    assert em.n_symbols == 1
    assert np.allclose(em.pmf, [0.3, 0.7])


def test_bad_emission_rejected():
    with pytest.raises(ContractError):
        EmissionModel(2, [0.5, 0.2, 0.2])
    with pytest.raises(ContractError):
        EmissionModel.binomial(4, 1.4)


def test_stationary_single_state():
    spec = ChannelSpec.iid(EmissionModel.packet(2, 0.5), packet_mode=True)
    assert np.allclose(stationary_distribution(spec), [1.0])


def test_stationary_two_state_closed_form():
    p, r = 1e-4, 0.5
    spec = ChannelSpec.gilbert_elliott(p, r, EmissionModel.packet(2, 1.0),
                                       EmissionModel.packet(2, 0.0),
                                       packet_mode=True)
    pi = stationary_distribution(spec)
    assert np.allclose(pi, [r / (p + r), p / (p + r)], atol=1e-12)


def test_stationary_doubly_stochastic_uniform():
    t1 = np.array([[0.2, 0.5, 0.3], [0.5, 0.3, 0.2], [0.3, 0.2, 0.5]])
    ems = tuple(EmissionModel.packet(1, 0.5) for _ in range(3))
    spec = ChannelSpec(t1, ems, packet_mode=True)
    assert np.allclose(stationary_distribution(spec), [1 / 3] * 3, atol=1e-10)


def test_non_ergodic_rejected():
    t1 = np.array([[1.0, 0.0], [0.0, 1.0]])
    ems = (EmissionModel.packet(1, 0.5), EmissionModel.packet(1, 0.5))
    with pytest.raises(ContractError):
        ChannelSpec(t1, ems, packet_mode=True)


def test_perfect_delivery_no_erasures():
    spec = ChannelSpec.iid(EmissionModel.packet(3, 1.0), packet_mode=True)
    trace = sample_trace(spec, 5000, 1)
    assert not trace.erased.any()


def test_packet_counts_all_or_nothing():
    spec = ChannelSpec.gilbert_elliott(0.3, 0.3, EmissionModel.packet(5, 0.6),
                                       EmissionModel.packet(5, 0.2),
                                       packet_mode=True)
    trace = sample_trace(spec, 20_000, 8)
    assert set(np.unique(trace.counts)) <= {0, 5}


def test_same_seed_bit_identical():
    spec = ChannelSpec.gilbert_elliott(0.1, 0.2, EmissionModel.binomial(4, 0.8),
                                       EmissionModel.binomial(4, 0.1))
    a = sample_trace(spec, 10_000, 42)
    b = sample_trace(spec, 10_000, 42)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.counts, b.counts)


def test_symmetric_switching_occupancy():
    # p = r = 0.5: stationary is (1/2, 1/2); binomial CI at 3 sigma
    spec = ChannelSpec.gilbert_elliott(0.5, 0.5, EmissionModel.packet(2, 1.0),
                                       EmissionModel.packet(2, 0.0),
                                       packet_mode=True)
    T = 10 ** 6
    trace = sample_trace(spec, T, 33)
    frac_good = float(np.mean(trace.states == 0))
    # consecutive states are independent here, so plain binomial std applies
    assert abs(frac_good - 0.5) <= 3 * 0.5 / np.sqrt(T)


def test_long_run_occupancy_matches_stationary():
    spec = ChannelSpec.gilbert_elliott(0.02, 0.08, EmissionModel.packet(2, 0.9),
                                       EmissionModel.packet(2, 0.1),
                                       packet_mode=True)
    pi = stationary_distribution(spec)
    T = 10 ** 6
    trace = sample_trace(spec, T, 4)
    occ = np.bincount(trace.states, minlength=2) / T
    # Markov-chain CLT: variance inflated by the mixing time ~ 1/(p+r)
    sigma = np.sqrt(pi * (1 - pi) / T) * np.sqrt(2 / (0.02 + 0.08))
    assert np.all(np.abs(occ - pi) <= 4 * sigma)


def test_emission_frequencies_match_pmf():
    em = EmissionModel.binomial(6, 0.55)
    spec = ChannelSpec.iid(em)
    trace = sample_trace(spec, 200_000, 17)
    freq = np.bincount(trace.counts, minlength=7) / len(trace)
    assert np.all(np.abs(freq - em.pmf) < 0.01)
