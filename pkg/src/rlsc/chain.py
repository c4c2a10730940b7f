"""Debt-level Markov machinery for hidden-Markov erasure channels.

Per hidden state s there is a (zeta+1)x(zeta+1) row-stochastic transition
matrix Gamma[s] of the information debt, obtained by pushing the state's
received-count pmf through the debt recursion.  Partitioning each Gamma by
the index sets {0}, phi = {1..zeta-1}, {zeta} and interleaving with the
hidden-state transition (applied as T_n = kron(T1, I_n) between debt
steps) yields closed forms for the zero-return interval distribution, the
renewal transition matrices between hitting times, and the stationary
state distribution at debt-zero instants.

Everything is generic over L >= 1 hidden states; L = 1 recovers the
i.i.d. channel and L = 2 the Gilbert-Elliott channel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channels import ChannelSpec, EmissionModel
from .debt import CodeParams, Mode, step_nrlsc
from .errors import ContractError, NumericalError

_ROW_SUM_TOL = 1e-12
_FIXED_POINT_TOL = 1e-10
_TRACE_ORACLE_LIMIT = 10 ** 6


def build_debt_transition(params: CodeParams, emission: EmissionModel) -> np.ndarray:
    """Debt transition matrix for one hidden state: row i is the pushforward
    of the received-count pmf through the one-slot debt update."""
    if params.alpha_infinite:
        raise ContractError("debt transition matrices need finite alpha")
    if emission.n_symbols != params.n:
        raise ContractError(f"emission N={emission.n_symbols} != code N={params.n}")
    zeta = params.zeta
    gamma = np.zeros((zeta + 1, zeta + 1))
    for i in range(zeta + 1):
        for c, mass in enumerate(emission.pmf):
            j = step_nrlsc(i, c, params)
            gamma[i, j] += mass
    return gamma


@dataclass(frozen=True)
class Blocks:
    """Named partition of the per-state Gamma matrices plus the stacked
    block forms used by the interval/renewal formulas."""

    g00: np.ndarray        # (L,)   Gamma_{0,0} per state
    g0p: list              # per state 1 x (zeta-1)
    g0z: np.ndarray        # (L,)
    gp0: list              # per state (zeta-1,)
    gpp: list              # per state (zeta-1) x (zeta-1)
    gpz: list              # per state (zeta-1,)
    gz0: np.ndarray        # (L,)
    gzp: list              # per state 1 x (zeta-1)
    gzz: np.ndarray        # (L,)
    big_gamma_s: np.ndarray    # L x L*zeta, blockdiag [g0p | g0z] rows
    big_gamma_e: np.ndarray    # L*zeta x L, blockdiag [gp0; gz0] columns
    big_q: np.ndarray          # L*zeta x L*zeta blockdiag of per-state Q
    gamma_e_stacked: np.ndarray  # (L*zeta,) column-stack of [gp0; gz0]
    big_g0p: np.ndarray        # L x L*(zeta-1) blockdiag
    big_gzp: np.ndarray        # L x L*(zeta-1) blockdiag
    big_gpp: np.ndarray        # L*(zeta-1) square blockdiag
    big_gpz: np.ndarray        # L*(zeta-1) x L blockdiag
    gp0_stacked: np.ndarray    # (L*(zeta-1),)
    gpz_stacked: np.ndarray    # (L*(zeta-1),)


@dataclass(frozen=True)
class DebtChain:
    """Per-state debt transition matrices coupled to an L-state hidden chain."""

    transition: np.ndarray   # L x L hidden-state matrix
    gammas: np.ndarray       # L x (zeta+1) x (zeta+1)
    zeta: int

    def __post_init__(self):
        t1 = np.asarray(self.transition, dtype=np.float64)
        gam = np.asarray(self.gammas, dtype=np.float64)
        object.__setattr__(self, "transition", t1)
        object.__setattr__(self, "gammas", gam)
        L = t1.shape[0]
        if gam.shape != (L, self.zeta + 1, self.zeta + 1):
            raise ContractError(f"gammas must be (L, zeta+1, zeta+1), got {gam.shape}")
        if np.any(np.abs(gam.sum(axis=2) - 1.0) > _ROW_SUM_TOL):
            raise ContractError("debt transition rows must sum to 1")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    def t_n(self, n: int) -> np.ndarray:
        """State transition lifted to n debt levels: kron(T1, I_n)."""
        return np.kron(self.transition, np.eye(n))


def build_chain(params: CodeParams, spec: ChannelSpec) -> DebtChain:
    gammas = np.stack([build_debt_transition(params, em) for em in spec.emissions])
    return DebtChain(transition=spec.transition, gammas=gammas, zeta=params.zeta)


def partition_blocks(chain: DebtChain) -> Blocks:
    L, zeta = chain.n_states, chain.zeta
    w = zeta - 1   # width of phi (may be 0)
    g = chain.gammas
    g00 = g[:, 0, 0].copy()
    g0z = g[:, 0, zeta].copy()
    gz0 = g[:, zeta, 0].copy()
    gzz = g[:, zeta, zeta].copy()
    g0p = [g[s, 0, 1:zeta].copy() for s in range(L)]
    gp0 = [g[s, 1:zeta, 0].copy() for s in range(L)]
    gpp = [g[s, 1:zeta, 1:zeta].copy() for s in range(L)]
    gpz = [g[s, 1:zeta, zeta].copy() for s in range(L)]
    gzp = [g[s, zeta, 1:zeta].copy() for s in range(L)]

    big_gamma_s = np.zeros((L, L * zeta))
    big_gamma_e = np.zeros((L * zeta, L))
    big_q = np.zeros((L * zeta, L * zeta))
    gamma_e_stacked = np.zeros(L * zeta)
    big_g0p = np.zeros((L, L * w))
    big_gzp = np.zeros((L, L * w))
    big_gpp = np.zeros((L * w, L * w))
    big_gpz = np.zeros((L * w, L))
    gp0_stacked = np.zeros(L * w)
    gpz_stacked = np.zeros(L * w)
    for s in range(L):
        a, b = s * zeta, (s + 1) * zeta
        big_gamma_s[s, a:b] = np.concatenate([g0p[s], [g0z[s]]])
        e_col = np.concatenate([gp0[s], [gz0[s]]])
        big_gamma_e[a:b, s] = e_col
        gamma_e_stacked[a:b] = e_col
        q = np.zeros((zeta, zeta))
        q[:w, :w] = gpp[s]
        q[:w, w] = gpz[s]
        q[w, :w] = gzp[s]
        q[w, w] = gzz[s]
        big_q[a:b, a:b] = q
        c, d = s * w, (s + 1) * w
        big_g0p[s, c:d] = g0p[s]
        big_gzp[s, c:d] = gzp[s]
        big_gpp[c:d, c:d] = gpp[s]
        big_gpz[c:d, s] = gpz[s]
        gp0_stacked[c:d] = gp0[s]
        gpz_stacked[c:d] = gpz[s]
    return Blocks(g00=g00, g0p=g0p, g0z=g0z, gp0=gp0, gpp=gpp, gpz=gpz,
                  gz0=gz0, gzp=gzp, gzz=gzz,
                  big_gamma_s=big_gamma_s, big_gamma_e=big_gamma_e, big_q=big_q,
                  gamma_e_stacked=gamma_e_stacked,
                  big_g0p=big_g0p, big_gzp=big_gzp, big_gpp=big_gpp,
                  big_gpz=big_gpz, gp0_stacked=gp0_stacked, gpz_stacked=gpz_stacked)


def _solve(a: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    """(I - M)^{-1}-style solve with a condition estimate surfaced on failure."""
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular system in {what}: {exc}") from exc
    cond = np.linalg.cond(a)
    if cond > 1e10:
        import warnings
        warnings.warn(f"ill-conditioned solve in {what}: cond={cond:.3e}")
    return x


def spectral_radius(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def tail_truncation_k(chain: DebtChain, tol: float = 1e-12, cap: int = 1 << 24) -> int:
    """Smallest k (power of two) with ||(T_zeta Q)^k||_inf <= tol."""
    blocks = partition_blocks(chain)
    m = chain.t_n(chain.zeta) @ blocks.big_q
    k = 1
    while k < cap:
        if np.linalg.norm(m, np.inf) <= tol:
            return k
        m = m @ m
        k *= 2
    raise NumericalError("tail truncation did not converge; spectral radius too close to 1")


def interval_pmf(chain: DebtChain, pi0: np.ndarray, k: int) -> float:
    """Pr(zero-return interval = k) under restart distribution pi0."""
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    blocks = partition_blocks(chain)
    if k == 1:
        return float(pi0 @ blocks.g00)
    tz = chain.t_n(chain.zeta)
    core = np.linalg.matrix_power(tz @ blocks.big_q, k - 2)
    return float(pi0 @ blocks.big_gamma_s @ core @ tz @ blocks.gamma_e_stacked)


class IntervalVariant(Enum):
    NO_ZETA_HIT = "no_zeta_hit"
    FIRST_ZETA_HIT = "first_zeta_hit"


def interval_pmf_conditional(chain: DebtChain, pi0: np.ndarray, k: int,
                             variant: IntervalVariant) -> float:
    """Joint probability of {interval = k, no ceiling hit inside} or of
    {first ceiling hit at k before any zero return}, per the variant."""
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    blocks = partition_blocks(chain)
    if k == 1:
        if variant is IntervalVariant.NO_ZETA_HIT:
            return float(pi0 @ blocks.g00)
        return float(pi0 @ blocks.g0z)
    tz = chain.t_n(chain.zeta - 1)
    core = np.linalg.matrix_power(tz @ blocks.big_gpp, k - 2)
    terminal = (blocks.gp0_stacked if variant is IntervalVariant.NO_ZETA_HIT
                else blocks.gpz_stacked)
    return float(pi0 @ blocks.big_g0p @ core @ tz @ terminal)


def renewal_transition_matrices(chain: DebtChain):
    """State-distribution transition matrices between hitting times:
    (T_{0->0}, T_{0->zeta}, T_{zeta->zeta}), each L x L."""
    blocks = partition_blocks(chain)
    L, zeta = chain.n_states, chain.zeta
    t1 = chain.transition
    tz = chain.t_n(zeta)
    tzq = tz @ blocks.big_q
    rho = spectral_radius(tzq)
    if rho >= 1.0:
        raise NumericalError(f"spectral radius of T_zeta Q is {rho:.6f} >= 1")
    inner = _solve(np.eye(L * zeta) - tzq, tz @ blocks.big_gamma_e, "T_0->0")
    t00 = (np.diag(blocks.g00) + blocks.big_gamma_s @ inner) @ t1

    w = zeta - 1
    tz1 = chain.t_n(w)
    m = _solve(np.eye(L * w) - tz1 @ blocks.big_gpp, np.eye(L * w), "M")
    t0z = (np.diag(blocks.g0z) + blocks.big_g0p @ m @ tz1 @ blocks.big_gpz) @ t1
    tzz = (np.diag(blocks.gzz) + blocks.big_gzp @ m @ tz1 @ blocks.big_gpz) @ t1
    return t00, t0z, tzz


def stationary_initial(chain: DebtChain) -> np.ndarray:
    """Stationary state distribution at debt-zero instants: the fixed point
    of T_{0->0}, solved by least squares (one equation is redundant)."""
    t00, _, _ = renewal_transition_matrices(chain)
    L = chain.n_states
    a = np.vstack([(t00 - np.eye(L)).T, np.ones(L)])
    b = np.zeros(L + 1)
    b[-1] = 1.0
    pi0, residuals, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < L:
        raise NumericalError(f"restart distribution system rank {rank} < L={L}")
    resid = np.linalg.norm(pi0 @ t00 - pi0, np.inf)
    if resid > _FIXED_POINT_TOL:
        raise NumericalError(f"restart distribution fixed-point residual {resid:.3e}")
    pi0 = np.clip(pi0, 0.0, None)
    return pi0 / pi0.sum()


def trace_enumeration_oracle(chain: DebtChain, pi0: np.ndarray, k: int) -> float:
    """Pr(interval = k) by explicit summation over all L^k state traces.

    Proof-device oracle: each trace contributes
    Pr(trace) * Gamma_s^{s_1} Q^{s_2} ... Q^{s_{k-1}} Gamma_e^{s_k},
    with Pr(trace) = pi0[s_1] * prod T1[s_j, s_{j+1}].
    """
    L = chain.n_states
    if k > 10 ** 4 or L ** k > _TRACE_ORACLE_LIMIT:
        raise ContractError(f"k={k}, L^k = {L ** k} exceeds enumeration limit")
    blocks = partition_blocks(chain)
    if k == 1:
        return float(sum(pi0[s] * blocks.g00[s] for s in range(L)))
    t1 = chain.transition
    zeta = chain.zeta
    gs = [np.concatenate([blocks.g0p[s], [blocks.g0z[s]]]) for s in range(L)]
    ge = [np.concatenate([blocks.gp0[s], [blocks.gz0[s]]]) for s in range(L)]
    qs = []
    for s in range(L):
        q = np.zeros((zeta, zeta))
        q[:zeta - 1, :zeta - 1] = blocks.gpp[s]
        q[:zeta - 1, zeta - 1] = blocks.gpz[s]
        q[zeta - 1, :zeta - 1] = blocks.gzp[s]
        q[zeta - 1, zeta - 1] = blocks.gzz[s]
        qs.append(q)
    total = 0.0
    for trace in itertools.product(range(L), repeat=k):
        prob = pi0[trace[0]]
        for a, b in zip(trace[:-1], trace[1:]):
            prob *= t1[a, b]
        if prob == 0.0:
            continue
        vec = gs[trace[0]]
        for s in trace[1:-1]:
            vec = vec @ qs[s]
        total += prob * float(vec @ ge[trace[-1]])
    return total
