"""Fast invariant suite behind the `rlsc verify` subcommand.

Each check prints one pass/fail line; run_all returns the failure count.
These are reduced-scale versions of the invariants the test suite pins
down at full scale.
"""

from __future__ import annotations

import numpy as np

from .analytic_nrlsc import pe_nrlsc, pe_oracle_small
from .analytic_srlsc import (catalan, expected_interval_integral,
                             expected_interval_truncated, nup_oracle,
                             nup_recursion, nup_sum, pe_srlsc_infinite)
from .chain import (build_chain, interval_pmf, renewal_transition_matrices,
                    stationary_initial, trace_enumeration_oracle)
from .channels import ChannelSpec, EmissionModel, sample_trace, \
    stationary_distribution
from .debt import CodeParams, Mode, run_trajectory
from .sim import estimate_pe


def _packet_ge(loss_g: float, loss_b: float, p: float, r: float, n: int) -> ChannelSpec:
    return ChannelSpec.gilbert_elliott(
        p, r, EmissionModel.packet(n, 1 - loss_g), EmissionModel.packet(n, 1 - loss_b),
        packet_mode=True)


def run_all(verbose: bool = True) -> int:
    checks = []

    def check(name, ok, detail=""):
        checks.append(ok)
        if verbose:
            tag = "PASS" if ok else "FAIL"
            print(f"[{tag}] {name}" + (f"  ({detail})" if detail else ""))

    # chain row sums and partition reassembly
    params = CodeParams(1, 2, 2, 2, Mode.NONSYSTEMATIC)
    channel = _packet_ge(0.3, 0.8, 0.2, 0.5, 2)
    chain = build_chain(params, channel)
    row_sums = chain.gammas.sum(axis=2)
    check("debt transition rows stochastic", bool(np.allclose(row_sums, 1.0, atol=1e-12)))

    pi0 = stationary_initial(chain)
    t00, _, _ = renewal_transition_matrices(chain)
    resid = float(np.linalg.norm(pi0 @ t00 - pi0, np.inf))
    check("restart distribution fixed point", resid <= 1e-10, f"residual {resid:.2e}")

    worst = max(abs(interval_pmf(chain, pi0, k) - trace_enumeration_oracle(chain, pi0, k))
                for k in range(1, 9))
    check("interval pmf == trace enumeration (k <= 8)", worst <= 1e-12,
          f"max gap {worst:.2e}")

    pe_closed = pe_nrlsc(chain, pi0, params.delta, params.alpha)
    pe_brute = pe_oracle_small(chain, pi0, params.delta, params.alpha)
    check("closed-form pe == exhaustive cycle oracle", abs(pe_closed - pe_brute) <= 1e-4,
          f"{pe_closed:.8f} vs {pe_brute:.8f}")

    # debt bounds on a fuzz trace
    trace = sample_trace(channel, 100_000, 1234)
    traj = run_trajectory(trace, params)
    check("debt bounds (nonsystematic)",
          bool((traj.debt >= 0).all() and (traj.debt <= params.zeta).all()))
    sparams = CodeParams(1, 2, 2, 2, Mode.SYSTEMATIC_PEC)
    straj = run_trajectory(trace, sparams)
    check("debt bounds (systematic)",
          bool((straj.debt >= 0).all() and (straj.debt <= straj.zeta).all()
               and (straj.zeta >= 1).all()))

    # Catalan / lattice-path suite
    expected = [14, 14, 9, 9, 7, 7, 5, 5, 0, 0]
    got = [nup_oracle(5, j) for j in range(1, 11)]
    check("upward-step counts l=5", got == expected, f"{got}")
    rec_ok = all(nup_recursion(l) == [nup_oracle(l, j) for j in range(1, 2 * l + 1)]
                 for l in range(1, 8))
    check("upward-count recursion == enumeration (l <= 7)", rec_ok)
    sum_ok = all(nup_sum(l, d) == sum(nup_oracle(l, j)
                                      for j in range(1, max(2 * l - d - 1, 0) + 1))
                 for l in range(1, 8) for d in range(0, 2 * l - 1))
    check("unified step-count sum == enumeration", sum_ok)
    check("catalan sanity", catalan(0) == 1 and catalan(4) == 14 and catalan(9) == 4862)

    gap = abs(expected_interval_truncated(0.7, 10_000) - expected_interval_integral(0.7))
    check("toeplitz sum converges to integral", gap <= 1e-3, f"gap {gap:.2e}")

    ok_delta0 = all(abs(pe_srlsc_infinite(p, 0).pe - (1 - p)) <= 1e-6
                    for p in (0.6, 0.7, 0.8, 0.9))
    check("pe(delta=0) == erasure rate (unbounded memory)", ok_delta0)

    # channel stationarity
    pi = stationary_distribution(channel)
    occ = np.bincount(trace.states, minlength=2) / len(trace)
    check("empirical state occupancy near stationary",
          bool(np.all(np.abs(occ - pi) < 0.02)), f"{occ} vs {pi}")

    # simulation vs closed form at modest scale
    est = estimate_pe(channel, params, 200_000, 4, 99, engine="debt")
    rel = abs(est.pe_hat - pe_closed) / pe_closed
    check("Monte-Carlo near closed form (small run)", rel < 0.1,
          f"rel dev {rel:.3f}")

    failures = sum(1 for ok in checks if not ok)
    if verbose:
        print(f"{len(checks) - failures}/{len(checks)} invariant checks passed")
    return failures
