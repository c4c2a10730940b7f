"""Monte-Carlo estimation of slot error probabilities with renewal accounting.

Estimates are cycle-based: error slots and elapsed slots are counted over
complete debt-zero cycles only, the first cycle is dropped as burn-in
(the trace starts from the plain stationary state, not the debt-zero
restart distribution), and the trailing incomplete cycle is discarded.
Rounds use independently spawned seed streams, so results are identical
for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels, baseline as baseline_mod
from .channels import ChannelSpec, EmissionModel, sample_trace
from .codec import GeneratorSchedule, decodability_report
from .debt import CodeParams, Mode, error_flags_with_window, run_trajectory
from .errors import ContractError


@dataclass(frozen=True)
class PeEstimate:
    pe_hat: float
    ci95: tuple
    cycles: int
    e_interval_hat: float
    e_errors_per_cycle_hat: float
    rounds: int
    T: int
    seed: int
    engine: str
    round_pes: tuple


@dataclass(frozen=True)
class RenewalStats:
    e_interval_hat: float
    e_lg_hat: float
    e_lb1_hat: float
    e_lb2_hat: float
    cycles: int


def _round_counts(channel: ChannelSpec, params: CodeParams, T: int, engine: str,
                  q: int, round_ss) -> tuple:
    """(errors, slots, cycles) for one round; slots span the complete-cycle
    window with the first cycle dropped as burn-in."""
    trace = sample_trace(channel, T, round_ss)
    if engine.startswith("baseline:"):
        code = baseline_mod.get_code(engine.split(":", 1)[1])
        delta = params.delta
        judged_hi = T - delta
        if judged_hi < 1:
            return 0.0, 0.0, 0.0
        err = baseline_mod.baseline_error_slots(code, trace, delta)
        return float(np.count_nonzero(err <= judged_hi)), float(judged_hi), 0.0

    traj = run_trajectory(trace, params)
    flags, first, last = error_flags_with_window(traj, trace, params)
    hits = traj.t_hits
    # judged span: after the burn-in cycle, up to the last definitive
    # deadline T - delta (verdicts there never depend on unseen slots)
    start = int(hits[0]) if hits.size else 0
    end = T - params.delta
    if end <= start:
        return 0.0, 0.0, 0.0
    cycles = max(hits.size - 1, 0)
    if engine == "debt":
        errors = float(np.count_nonzero(flags[start:end]))
        return errors, float(end - start), float(cycles)
    if engine == "codec":
        schedule_seed = int(round_ss.generate_state(1)[0]) if hasattr(round_ss, "generate_state") \
            else int(round_ss)
        schedule = GeneratorSchedule(params, q=q, seed=schedule_seed)
        report = decodability_report(schedule, trace, params.delta)
        undec = ~report.decodable()
        errors = float(np.count_nonzero(undec[start:end]))
        return errors, float(end - start), float(cycles)
    raise ContractError(f"unknown engine {engine!r}")


def estimate_pe(channel: ChannelSpec, params: CodeParams, T: int, rounds: int,
                seed: int, engine: str = "debt", q: int = 16,
                threads: int = 1) -> PeEstimate:
    """Renewal-ratio Monte-Carlo estimate of the slot error probability."""
    if engine.startswith("baseline:") and not channel.packet_mode:
        raise ContractError("baseline engines need a packet-mode channel")
    if params.mode is Mode.SYSTEMATIC_PEC and not channel.packet_mode:
        raise ContractError("systematic codes need a packet-mode channel")
    seeds = np.random.SeedSequence(seed).spawn(rounds)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_round_counts,
                                    *zip(*[(channel, params, T, engine, q, ss)
                                           for ss in seeds])))
    else:
        results = [_round_counts(channel, params, T, engine, q, ss) for ss in seeds]
    err = np.array([r[0] for r in results])
    slots = np.array([r[1] for r in results])
    cyc = np.array([r[2] for r in results])
    total_err, total_slots, total_cycles = err.sum(), slots.sum(), cyc.sum()
    if total_slots == 0:
        raise ContractError("no complete cycles observed; increase T")
    pe_hat = total_err / total_slots
    round_pes = tuple(float(e / s) if s else 0.0 for e, s in zip(err, slots))
    if rounds > 1:
        sd = float(np.std(round_pes, ddof=1))
        half = 1.96 * sd / math.sqrt(rounds)
    else:
        half = math.inf
    e_interval = total_slots / total_cycles if total_cycles else math.nan
    e_errors = total_err / total_cycles if total_cycles else math.nan
    return PeEstimate(pe_hat=float(pe_hat),
                      ci95=(float(pe_hat - half), float(pe_hat + half)),
                      cycles=int(total_cycles), e_interval_hat=float(e_interval),
                      e_errors_per_cycle_hat=float(e_errors), rounds=rounds,
                      T=T, seed=seed, engine=engine, round_pes=round_pes)


def renewal_stats(trajectories, params: CodeParams) -> RenewalStats:
    """Empirical per-cycle renewal terms from non-systematic trajectories,
    for term-by-term comparison with the closed forms."""
    if params.mode is not Mode.NONSYSTEMATIC:
        raise ContractError("renewal stats are defined for NONSYSTEMATIC trajectories")
    n = sl = lg = lb1 = lb2 = 0.0
    for traj in trajectories:
        hits = traj.t_hits
        if hits.size < 2:
            continue
        debt = traj.debt[int(hits[0]):]  # drop the burn-in cycle
        res = _kernels.cycle_renewal_stats(debt, params.zeta, params.delta, params.alpha)
        n += res[0]
        sl += res[1]
        lg += res[2]
        lb1 += res[3]
        lb2 += res[4]
    if n == 0:
        raise ContractError("no complete cycles in the trajectory batch")
    return RenewalStats(e_interval_hat=sl / n, e_lg_hat=lg / n,
                        e_lb1_hat=lb1 / n, e_lb2_hat=lb2 / n, cycles=int(n))


def compare_debt_codec(channel: ChannelSpec, params: CodeParams, T: int,
                       seed: int, q: int = 16) -> tuple:
    """Slot-level agreement between the debt characterization and real
    finite-field rank decodability on one shared trace.

    Returns (agreement fraction, judged slots, disagreement count).
    """
    ss = np.random.SeedSequence(seed)
    trace = sample_trace(channel, T, ss)
    traj = run_trajectory(trace, params)
    flags, first, last = error_flags_with_window(traj, trace, params)
    schedule = GeneratorSchedule(params, q=q, seed=int(ss.generate_state(1)[0]))
    report = decodability_report(schedule, trace, params.delta)
    undec = ~report.decodable()
    start = int(traj.t_hits[0]) if traj.t_hits.size else 0
    end = T - params.delta
    n = end - start
    if n <= 0:
        raise ContractError("no judged slots; increase T")
    disagree = int(np.count_nonzero(flags[start:end] != undec[start:end]))
    return 1.0 - disagree / n, n, disagree


_SWEEP_AXES = ("loss_g", "delta", "T", "p_delivery", "alpha")


def _apply_axis(channel: ChannelSpec, params: CodeParams, T: int, axis: str, value):
    if axis == "loss_g":
        if not channel.packet_mode:
            raise ContractError("loss_g sweeps need a packet-mode channel")
        emissions = list(channel.emissions)
        emissions[0] = EmissionModel.packet(channel.n_symbols, 1.0 - float(value))
        channel = ChannelSpec(channel.transition, tuple(emissions), True)
    elif axis == "p_delivery":
        emissions = tuple(EmissionModel.packet(channel.n_symbols, float(value))
                          for _ in channel.emissions)
        channel = ChannelSpec(channel.transition, emissions, True)
    elif axis == "delta":
        params = CodeParams(params.k, params.n, params.alpha, int(value), params.mode)
    elif axis == "alpha":
        params = CodeParams(params.k, params.n, int(value), params.delta, params.mode)
    elif axis == "T":
        T = int(value)
    else:
        raise ContractError(f"unsupported sweep axis {axis!r}; one of {_SWEEP_AXES}")
    return channel, params, T


def analytic_pe(channel: ChannelSpec, params: CodeParams) -> float:
    """Closed-form p_e for the given channel/code (dispatches on mode/alpha)."""
    if params.mode is Mode.NONSYSTEMATIC:
        if params.alpha_infinite:
            raise ContractError("closed form needs finite alpha for NONSYSTEMATIC")
        from .analytic_nrlsc import pe_nrlsc
        from .chain import build_chain, stationary_initial
        chain = build_chain(params, channel)
        pi0 = stationary_initial(chain)
        return pe_nrlsc(chain, pi0, params.delta, params.alpha)
    if not params.alpha_infinite:
        raise ContractError("no closed form for SYSTEMATIC_PEC at finite alpha; "
                            "use the debt engine")
    if channel.n_states != 1 or not channel.packet_mode:
        raise ContractError("systematic closed form needs the i.i.d. packet channel")
    if 2 * params.k != params.n:
        raise ContractError("systematic closed form needs rate K/N = 1/2")
    from .analytic_srlsc import pe_srlsc_infinite
    p = float(channel.emissions[0].pmf[channel.n_symbols])
    return pe_srlsc_infinite(p, params.delta).pe


def sweep(channel: ChannelSpec, engine_specs, T: int, rounds: int,
          seed: int, axis: str, values, q: int = 16, threads: int = 1) -> list:
    """One row per (axis value, engine).

    engine_specs: sequence of (label, engine, params) where engine is one of
    "debt" | "codec" | "baseline:NAME" | "analytic"; the label distinguishes
    e.g. systematic from non-systematic runs of the same engine.  Seeds
    derive from (seed, value index, engine index), so adding engines or
    values never perturbs existing numbers.
    """
    rows = []
    for i, value in enumerate(values):
        for j, (label, engine, params) in enumerate(engine_specs):
            ch, pr, t_eff = _apply_axis(channel, params, T, axis, value)
            row = {"axis": axis, "value": value, "engine": label}
            if engine == "analytic":
                pe = analytic_pe(ch, pr)
                row.update(pe=pe, ci_lo=pe, ci_hi=pe, cycles=0,
                           e_interval_hat=math.nan, T=t_eff, rounds=0)
            else:
                sub_seed = int(np.random.SeedSequence(
                    seed, spawn_key=(i, j)).generate_state(1)[0])
                est = estimate_pe(ch, pr, t_eff, rounds, sub_seed, engine=engine,
                                  q=q, threads=threads)
                row.update(pe=est.pe_hat, ci_lo=est.ci95[0], ci_hi=est.ci95[1],
                           cycles=est.cycles, e_interval_hat=est.e_interval_hat,
                           T=t_eff, rounds=rounds)
            rows.append(row)
    return rows
