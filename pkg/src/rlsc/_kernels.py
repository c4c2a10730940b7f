"""Numba kernels for the per-slot recursions that cannot be vectorized.

All randomness is pre-drawn into numpy arrays by the callers; the kernels
are pure functions of their inputs, so results do not depend on numba
versions or thread counts.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_ALPHA_INF = -1  # sentinel for unbounded memory


@njit(cache=True)
def markov_state_path(cum_pi, cum_t1, u, u0):
    """Sample a hidden-state path: a_1 ~ pi, a_{t+1} ~ T1[a_t, :].

    cum_pi: cumulative stationary distribution (L,)
    cum_t1: row-wise cumulative transition matrix (L, L)
    u: one uniform per slot for the *next* state draw (u[0] is unused
       beyond slot 2's draw); u0: uniform for the initial state.
    """
    T = u.shape[0]
    L = cum_pi.shape[0]
    states = np.empty(T, dtype=np.int8)
    s = 0
    for j in range(L):
        if u0 <= cum_pi[j]:
            s = j
            break
    states[0] = s
    for t in range(1, T):
        x = u[t]
        row = cum_t1[s]
        s = L - 1
        for j in range(L):
            if x <= row[j]:
                s = j
                break
        states[t] = s
    return states


@njit(cache=True)
def nrlsc_debt_path(counts, k, alpha_k, zeta):
    """Information-debt recursion for non-systematic codes.

    I(t) = min(zeta, (k - C_t + min(I(t-1), alpha_k))^+), I(0) = 0.
    alpha_k < 0 means unbounded memory (no ceiling).
    Returns the per-slot debt I(1..T).
    """
    T = counts.shape[0]
    debt = np.empty(T, dtype=np.int64)
    prev = 0
    for t in range(T):
        if alpha_k >= 0:
            carried = prev if prev < alpha_k else alpha_k
        else:
            carried = prev
        d = k - counts[t] + carried
        if d < 0:
            d = 0
        if alpha_k >= 0 and d > zeta:
            d = zeta
        debt[t] = d
        prev = d
    return debt


@njit(cache=True)
def srlsc_debt_path(erased, k, n, alpha):
    """Debt and ceiling recursion for systematic codes in packet erasure mode.

    Implements, per slot:
      Ihat = (k - n*(1-e) + min(I_prev, zeta_prev - 1))^+
      zeta = (k*e - k*e_leaving + zeta_prev) if Ihat != 0 else 1
      I    = min(zeta, Ihat)
      t_c  = t if I == 0
    e_leaving is the erasure flag at slot max(t - alpha, t_c), which is 0
    whenever the boundary lands on t_c (asserted, not assumed).
    alpha < 0 means unbounded memory: the ceiling grows and is never hit.
    Returns (debt, zeta) arrays; zeta[t] is the per-slot ceiling.
    """
    T = erased.shape[0]
    debt = np.empty(T, dtype=np.int64)
    zeta_arr = np.empty(T, dtype=np.int64)
    prev_debt = 0
    prev_zeta = 1
    t_c = 0
    for i in range(T):
        t = i + 1
        e_t = 1 if erased[i] else 0
        ihat = k * e_t - (n - k) * (1 - e_t) + min(prev_debt, prev_zeta - 1)
        if ihat < 0:
            ihat = 0
        if ihat == 0:
            zeta = 1
        else:
            if alpha >= 0:
                boundary = t - alpha
                if boundary < t_c:
                    boundary = t_c
            else:
                boundary = t_c
            if boundary == t_c:
                e_leaving = 0  # zero-debt slots are never erasures; see assert below
            else:
                e_leaving = 1 if erased[boundary - 1] else 0
            zeta = k * e_t - k * e_leaving + prev_zeta
        d = ihat if ihat < zeta else zeta
        debt[i] = d
        zeta_arr[i] = zeta
        if d == 0:
            if erased[i]:
                raise AssertionError("zero-debt slot with an erasure; window bookkeeping broken")
            t_c = t
        prev_debt = d
        prev_zeta = zeta
    return debt, zeta_arr


@njit(cache=True)
def mark_error_slots(debt, zeta_arr, erased, delta, alpha, systematic):
    """Per-slot error flags from the hitting-time structure.

    For each complete cycle (t_i, t_{i+1}] (slots are 1-based, debt[i] is
    slot i+1): if the debt never hits the ceiling inside, the undecodable
    slots are (t_i, t_{i+1} - delta); otherwise, with tau* the last ceiling
    hit, they are (t_i, max(tau* - alpha + 1, t_{i+1} - delta)).  In
    systematic mode only erased slots in that range count (instant
    decodability); alpha < 0 (unbounded) never sees a ceiling hit.

    The trailing open excursion (debt never back at zero by the end of the
    trace) also gets its definitive verdicts: a slot whose deadline t+delta
    lies inside the trace with no zero return after t is an error no matter
    what arrives later, as is anything already de-correlated by the last
    ceiling hit.  Slots of the open excursion with deadlines beyond the
    trace stay unmarked (unknowable).

    zeta_arr is the per-slot ceiling for systematic trajectories and a
    one-element array holding the constant ceiling otherwise.

    Returns (errors bool array, first_hit, last_hit) where the hits are
    1-based slot numbers (0 if the debt never returns to zero).
    """
    T = debt.shape[0]
    errors = np.zeros(T, dtype=np.bool_)
    first_hit = 0
    last_hit = 0
    cycle_start = 0  # t_i, 1-based; 0 = trajectory origin
    tau_star = -1
    for i in range(T):
        t = i + 1
        hit_ceiling = False
        if alpha >= 0:
            if systematic:
                hit_ceiling = debt[i] == zeta_arr[i]
            else:
                hit_ceiling = debt[i] == zeta_arr[0]  # constant ceiling
        if debt[i] == 0:
            if first_hit == 0:
                first_hit = t
            last_hit = t
            # close the cycle (cycle_start, t]
            if tau_star >= 0:
                upper = tau_star - alpha + 1
                if t - delta > upper:
                    upper = t - delta
            else:
                upper = t - delta
            lo = cycle_start + 1
            hi = upper - 1  # inclusive slot range lo..hi
            if hi > t:
                hi = t
            for s in range(lo, hi + 1):
                if systematic:
                    if erased[s - 1]:
                        errors[s - 1] = True
                else:
                    errors[s - 1] = True
            cycle_start = t
            tau_star = -1
        elif hit_ceiling:
            tau_star = t
    # definitive verdicts in the trailing open excursion
    upper = T - delta + 1
    if tau_star >= 0 and tau_star - alpha + 1 > upper:
        upper = tau_star - alpha + 1
    for s in range(cycle_start + 1, min(upper - 1, T) + 1):
        if systematic:
            if erased[s - 1]:
                errors[s - 1] = True
        else:
            errors[s - 1] = True
    return errors, first_hit, last_hit


@njit(cache=True)
def cycle_renewal_stats(debt, zeta_const, delta, alpha):
    """Per-cycle renewal statistics for non-systematic trajectories.

    Over complete cycles, accumulates the cycle length, the no-ceiling-hit
    cycle overshoot L_G = (len - delta - 1)^+, and the ceiling-hit terms
    L_B1 = tau* - t_i and L_B2 = max(-alpha, t_{i+1} - delta - 1 - tau*).
    Returns (n_cycles, sum_len, sum_lg, sum_lb1, sum_lb2).
    """
    T = debt.shape[0]
    n_cycles = 0
    sum_len = 0.0
    sum_lg = 0.0
    sum_lb1 = 0.0
    sum_lb2 = 0.0
    cycle_start = 0
    tau_star = -1
    for i in range(T):
        t = i + 1
        if debt[i] == 0:
            length = t - cycle_start
            n_cycles += 1
            sum_len += length
            if tau_star >= 0:
                sum_lb1 += tau_star - cycle_start
                v = t - delta - 1 - tau_star
                if v < -alpha:
                    v = -alpha
                sum_lb2 += v
            else:
                v = length - delta - 1
                if v > 0:
                    sum_lg += v
            cycle_start = t
            tau_star = -1
        elif debt[i] == zeta_const:
            tau_star = t
    return n_cycles, sum_len, sum_lg, sum_lb1, sum_lb2


@njit(cache=True)
def count_window_erasures(erased, t_c_array, alpha):
    """Rolling recount of erasures in (max(t-alpha, t_c), t] for invariant checks."""
    T = erased.shape[0]
    out = np.zeros(T, dtype=np.int64)
    for i in range(T):
        t = i + 1
        lo = t - alpha if alpha >= 0 else 0
        if t_c_array[i] > lo:
            lo = t_c_array[i]
        c = 0
        for s in range(lo + 1, t + 1):
            if erased[s - 1]:
                c += 1
        out[i] = c
    return out
