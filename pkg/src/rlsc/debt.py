"""Information-debt dynamics and error-slot characterization.

The information debt I_d(t) is the running count of linear equations the
decoder still needs.  For non-systematic codes it is a clamped random walk
driven by the received-symbol counts; for systematic codes in packet
erasure mode both the debt and its ceiling zeta(t) evolve, because
instantly decoded packets are deducted from the unknowns.

Error slots follow from the hitting times of 0 and the ceiling: each
zero-to-zero cycle loses the slots older than the decoding delay, plus
everything de-correlated by a ceiling hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .channels import Trace
from .errors import ContractError

INFINITE = math.inf


class Mode(Enum):
    NONSYSTEMATIC = "nonsystematic"
    SYSTEMATIC_PEC = "systematic_pec"


@dataclass(frozen=True)
class CodeParams:
    """Streaming-code parameters: K source and N coded symbols per slot,
    memory alpha (slots, possibly INFINITE), decoding delay delta."""

    k: int
    n: int
    alpha: object  # int or INFINITE
    delta: int
    mode: Mode = Mode.NONSYSTEMATIC

    def __post_init__(self):
        if self.k < 1 or self.n <= self.k:
            raise ContractError(f"need 1 <= K < N, got K={self.k}, N={self.n}")
        if self.delta < 0:
            raise ContractError(f"delta must be >= 0, got {self.delta}")
        if self.alpha != INFINITE and (not isinstance(self.alpha, (int, np.integer))
                                       or self.alpha < 1):
            raise ContractError(f"alpha must be a positive integer or INFINITE, "
                                f"got {self.alpha!r}")

    @property
    def alpha_infinite(self) -> bool:
        return self.alpha == INFINITE

    @property
    def zeta(self) -> int:
        """Debt ceiling alpha*K + 1 (finite memory only)."""
        if self.alpha_infinite:
            raise ContractError("zeta is undefined for infinite memory")
        return self.alpha * self.k + 1

    @property
    def rate(self) -> float:
        return self.k / self.n


def step_nrlsc(prev_debt: int, c_t: int, params: CodeParams) -> int:
    """One slot of the non-systematic debt recursion."""
    alpha_k = None if params.alpha_infinite else params.alpha * params.k
    if prev_debt < 0 or (alpha_k is not None and prev_debt > alpha_k + 1):
        raise ContractError(f"prev_debt {prev_debt} out of [0, zeta]")
    if not 0 <= c_t <= params.n:
        raise ContractError(f"C_t {c_t} out of [0, N]")
    carried = prev_debt if alpha_k is None else min(prev_debt, alpha_k)
    ihat = max(0, params.k - c_t + carried)
    return ihat if alpha_k is None else min(alpha_k + 1, ihat)


def step_srlsc(prev_debt: int, prev_zeta: int, t: int, t_c: int,
               erasure_window, e_t: int, params: CodeParams):
    """One slot of the systematic-PEC debt recursion.

    erasure_window holds e(.) for the slots max(t-alpha, t_c) .. t-1 in
    order, so erasure_window[0] is the flag at the leaving boundary slot.
    Returns (new_debt, new_zeta, new_t_c).
    """
    if params.mode is not Mode.SYSTEMATIC_PEC:
        raise ContractError("step_srlsc requires SYSTEMATIC_PEC params")
    if e_t not in (0, 1):
        raise ContractError(f"e_t must be 0 or 1, got {e_t}")
    k, n = params.k, params.n
    ihat = max(0, k * e_t - (n - k) * (1 - e_t) + min(prev_debt, prev_zeta - 1))
    if ihat == 0:
        zeta = 1
    else:
        boundary = t_c if params.alpha_infinite else max(t - params.alpha, t_c)
        if boundary == t_c:
            e_leaving = 0
        else:
            e_leaving = 1 if erasure_window[0] else 0
        zeta = k * e_t - k * e_leaving + prev_zeta
    debt = min(zeta, ihat)
    new_t_c = t if debt == 0 else t_c
    return debt, zeta, new_t_c


@dataclass(frozen=True)
class DebtTrajectory:
    """Per-slot debt evolution plus the extracted hitting-time sequences.

    Slots are 1-based: debt[i] is I_d(i+1).  zeta is the per-slot ceiling
    for systematic trajectories, None when the memory is infinite, and a
    constant-filled view is unnecessary for non-systematic (use params.zeta).
    """

    debt: np.ndarray
    zeta: object            # np.ndarray (systematic, finite alpha) or None
    t_hits: np.ndarray      # slots where I_d = 0
    tau_hits: np.ndarray    # slots where I_d = ceiling
    params: CodeParams

    def __len__(self) -> int:
        return len(self.debt)


def run_trajectory(trace: Trace, params: CodeParams) -> DebtTrajectory:
    """Full debt/ceiling evolution from I_d(0) = 0 for a sampled trace."""
    if params.mode is Mode.SYSTEMATIC_PEC and not trace.packet_mode:
        raise ContractError("systematic-PEC debt requires a packet-mode trace")
    if params.mode is Mode.NONSYSTEMATIC:
        alpha_k = -1 if params.alpha_infinite else params.alpha * params.k
        zeta = 0 if params.alpha_infinite else params.zeta
        debt = _kernels.nrlsc_debt_path(trace.counts.astype(np.int64),
                                        params.k, alpha_k, zeta)
        zeta_arr = None
        if params.alpha_infinite:
            tau_hits = np.empty(0, dtype=np.int64)
        else:
            tau_hits = np.flatnonzero(debt == zeta) + 1
    else:
        alpha = -1 if params.alpha_infinite else params.alpha
        debt, zeta_arr = _kernels.srlsc_debt_path(
            np.ascontiguousarray(trace.erased), params.k, params.n, alpha)
        if params.alpha_infinite:
            tau_hits = np.empty(0, dtype=np.int64)
            zeta_arr = None
        else:
            tau_hits = np.flatnonzero(debt == zeta_arr) + 1
    t_hits = np.flatnonzero(debt == 0) + 1
    return DebtTrajectory(debt=debt, zeta=zeta_arr, t_hits=t_hits,
                          tau_hits=tau_hits, params=params)


def _error_flags(traj: DebtTrajectory, trace, systematic: bool):
    params = traj.params
    if systematic:
        zeta_arr = traj.zeta if traj.zeta is not None else np.ones(1, dtype=np.int64)
        erased = np.ascontiguousarray(trace.erased)
    else:
        zeta_arr = np.array([0 if params.alpha_infinite else params.zeta], dtype=np.int64)
        erased = np.zeros(1, dtype=bool)
    alpha = -1 if params.alpha_infinite else params.alpha
    return _kernels.mark_error_slots(traj.debt, zeta_arr, erased,
                                     params.delta, alpha, systematic)


def error_slots_nrlsc(traj: DebtTrajectory, params: CodeParams) -> np.ndarray:
    """Undecodable slots (1-based) over complete cycles, non-systematic rule."""
    if params.mode is not Mode.NONSYSTEMATIC:
        raise ContractError("error_slots_nrlsc requires a NONSYSTEMATIC trajectory")
    flags, _, _ = _error_flags(traj, None, systematic=False)
    return np.flatnonzero(flags) + 1


def error_slots_srlsc(traj: DebtTrajectory, trace: Trace, params: CodeParams) -> np.ndarray:
    """Undecodable slots, systematic rule: same intervals, erased slots only."""
    if params.mode is not Mode.SYSTEMATIC_PEC:
        raise ContractError("error_slots_srlsc requires a SYSTEMATIC_PEC trajectory")
    if params.alpha_infinite:
        return error_slots_srlsc_infinite(traj, trace, params)
    flags, _, _ = _error_flags(traj, trace, systematic=True)
    return np.flatnonzero(flags) + 1


def error_slots_srlsc_infinite(traj: DebtTrajectory, trace: Trace,
                               params: CodeParams) -> np.ndarray:
    """Unbounded memory: the ceiling is never hit, so each cycle loses
    exactly the erased slots older than the decoding delay."""
    if not params.alpha_infinite:
        raise ContractError("error_slots_srlsc_infinite requires alpha = INFINITE")
    flags, _, _ = _error_flags(traj, trace, systematic=True)
    return np.flatnonzero(flags) + 1


def error_flags_with_window(traj: DebtTrajectory, trace: Trace, params: CodeParams):
    """Error flags plus the (first_hit, last_hit] complete-cycle window,
    for renewal-ratio estimation."""
    systematic = params.mode is Mode.SYSTEMATIC_PEC
    return _error_flags(traj, trace if systematic else None, systematic)
