"""Closed-form error probability of non-systematic streaming codes in
hidden-Markov symbol erasure channels.

The long-run slot error probability is a renewal-reward ratio: the
expected number of undecodable slots per debt-zero cycle over the expected
cycle length.  Four expectation terms assemble it: the mean cycle length,
the delay overshoot of cycles without a ceiling hit (L_G), and the two
ceiling-hit terms (L_B1, time to the last ceiling hit; L_B2, a
sign-indefinite tail correction clipped at -alpha).

A note on the overshoot term: the geometric series
sum_{k >= Delta+2} (k - Delta - 1) X^(k-2) equals M^2 X^Delta with
M = (I - X)^{-1}, i.e. the resolvent enters squared.  The exhaustive
cycle-enumeration oracle in this module pins that form down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import DebtChain, partition_blocks, renewal_transition_matrices, \
    spectral_radius, _solve
from .errors import ContractError, NumericalError

_RATIO_TOL = 1e-9


@dataclass(frozen=True)
class AnalyticTerms:
    e_interval: float
    e_lg: float
    e_lb1: float
    e_lb2: float

    @property
    def pe(self) -> float:
        return (self.e_lg + self.e_lb1 + self.e_lb2) / self.e_interval


def expected_interval(chain: DebtChain, pi0: np.ndarray) -> float:
    """Mean zero-return interval: 1 + pi0 Gamma_s (I - T_zeta Q)^{-1} 1."""
    blocks = partition_blocks(chain)
    L, zeta = chain.n_states, chain.zeta
    tzq = chain.t_n(zeta) @ blocks.big_q
    ones = np.ones(L * zeta)
    resolvent = _solve(np.eye(L * zeta) - tzq, ones, "expected_interval")
    return float(1.0 + pi0 @ blocks.big_gamma_s @ resolvent)


def _phi_pieces(chain: DebtChain):
    blocks = partition_blocks(chain)
    L, w = chain.n_states, chain.zeta - 1
    tz1 = chain.t_n(w)
    x = tz1 @ blocks.big_gpp
    m = _solve(np.eye(L * w) - x, np.eye(L * w), "phi resolvent")
    return blocks, tz1, x, m


def expected_lg(chain: DebtChain, pi0: np.ndarray, delta: int) -> float:
    """E{L_G} = pi0 Gamma_{0,phi} M^2 X^Delta T_{zeta-1} Gamma_{phi,0}."""
    if delta < 0:
        raise ContractError(f"delta must be >= 0, got {delta}")
    blocks, tz1, x, m = _phi_pieces(chain)
    xd = np.linalg.matrix_power(x, delta)
    return float(pi0 @ blocks.big_g0p @ m @ m @ xd @ tz1 @ blocks.gp0_stacked)


def _hit_vectors_mn(chain: DebtChain):
    """The m and n vectors of the ceiling-hit expectations (length L each)."""
    blocks, tz1, _, m = _phi_pieces(chain)
    i_plus_m = np.eye(m.shape[0]) + m
    to_z = tz1 @ blocks.gpz_stacked
    vec_m = blocks.gzz + blocks.big_gzp @ i_plus_m @ m @ to_z
    vec_n = blocks.g0z + blocks.big_g0p @ i_plus_m @ m @ to_z
    return vec_m, vec_n


def _hit_vector_b(chain: DebtChain, delta: int, alpha: int):
    """The b vector: clipped tail contribution max(-alpha, k - delta - 1)."""
    blocks, tz1, x, m = _phi_pieces(chain)
    to_0 = tz1 @ blocks.gp0_stacked
    psi = max(delta - alpha - 1, 0)
    xpsi = np.linalg.matrix_power(x, psi)
    return (-min(delta, alpha) * blocks.gz0
            - alpha * (blocks.big_gzp @ m @ to_0)
            + blocks.big_gzp @ (m @ m + (alpha + psi - delta) * m) @ xpsi @ to_0)


def expected_lb1(chain: DebtChain, pi0: np.ndarray) -> float:
    """E{L_B1}: expected offset of the last ceiling hit within a cycle."""
    _, t0z, tzz = renewal_transition_matrices(chain)
    rho = spectral_radius(tzz)
    if rho >= 1.0:
        raise NumericalError(f"spectral radius of T_zeta->zeta is {rho:.6f} >= 1")
    vec_m, vec_n = _hit_vectors_mn(chain)
    core = _solve(np.eye(chain.n_states) - tzz, vec_m, "E{L_B1}")
    return float(pi0 @ (t0z @ core + vec_n))


def expected_lb2(chain: DebtChain, pi0: np.ndarray, delta: int, alpha: int) -> float:
    """E{L_B2}: tail correction past the last ceiling hit, >= -alpha per cycle."""
    _, t0z, tzz = renewal_transition_matrices(chain)
    vec_b = _hit_vector_b(chain, delta, alpha)
    core = _solve(np.eye(chain.n_states) - tzz, vec_b, "E{L_B2}")
    return float(pi0 @ t0z @ core)


def analytic_terms(chain: DebtChain, pi0: np.ndarray, delta: int, alpha: int) -> AnalyticTerms:
    return AnalyticTerms(
        e_interval=expected_interval(chain, pi0),
        e_lg=expected_lg(chain, pi0, delta),
        e_lb1=expected_lb1(chain, pi0),
        e_lb2=expected_lb2(chain, pi0, delta, alpha),
    )


def pe_nrlsc(chain: DebtChain, pi0: np.ndarray, delta: int, alpha: int) -> float:
    """Exact long-run slot error probability, non-systematic codes."""
    terms = analytic_terms(chain, pi0, delta, alpha)
    pe = terms.pe
    if pe < -_RATIO_TOL or pe > 1.0 + _RATIO_TOL:
        raise NumericalError(
            f"p_e = {pe!r} outside [0,1]: E_interval={terms.e_interval!r} "
            f"E_LG={terms.e_lg!r} E_LB1={terms.e_lb1!r} E_LB2={terms.e_lb2!r}")
    return float(min(max(pe, 0.0), 1.0))


def pe_oracle_small(chain: DebtChain, pi0: np.ndarray, delta: int, alpha: int,
                    k_max: int = 4000, mass_tol: float = 1e-8) -> float:
    """Brute-force renewal ratio by exhaustive cycle-path expansion.

    Propagates the joint law of (debt level, hidden state, last ceiling-hit
    step) over paths that start at debt 0 and absorb on the first return,
    counting undecodable slots per cycle directly from the hitting-time
    rule.  Independent of every matrix identity used by the closed form;
    only feasible for small (zeta, L).
    """
    L, zeta = chain.n_states, chain.zeta
    t1 = chain.transition
    gammas = chain.gammas
    # mass[d, s, j]: debt d (1..zeta), state s, last ceiling hit at step j
    # (index 0 = no hit yet, j >= 1 = hit at step j)
    num = 0.0
    den = 0.0
    mass_closed = 0.0
    cur = np.zeros((zeta + 1, L, k_max + 2))
    for s in range(L):
        cur[0, s, 0] = pi0[s]
    for step in range(1, k_max + 1):
        nxt = np.zeros_like(cur)
        for d in range(zeta + 1):
            layer = cur[d]
            if not layer.any():
                continue
            for s in range(L):
                col = layer[s]
                if not col.any():
                    continue
                for d2 in range(zeta + 1):
                    p_step = gammas[s, d, d2]
                    if p_step == 0.0:
                        continue
                    if d2 == 0:
                        # cycle closes at length = step
                        closed = col * p_step
                        total = closed.sum()
                        mass_closed += total
                        den += total * step
                        # no ceiling hit: errors = (step - delta - 1)^+
                        num += closed[0] * max(step - delta - 1, 0)
                        for j in range(1, step):
                            if closed[j] == 0.0:
                                continue
                            upper = max(j - alpha + 1, step - delta)
                            num += closed[j] * max(upper - 1, 0)
                        continue
                    contrib = col * p_step
                    if d2 == zeta:
                        # hit: collapse the hit index to the current step
                        moved = np.zeros(k_max + 2)
                        moved[step] = contrib.sum()
                        contrib = moved
                    for s2 in range(L):
                        p_s = t1[s, s2]
                        if p_s:
                            nxt[d2, s2] += p_s * contrib
        cur = nxt
        if cur.sum() < mass_tol * 1e-3:
            break
    deficit = 1.0 - mass_closed
    if deficit > mass_tol:
        raise ContractError(
            f"open-path mass {deficit:.3e} above {mass_tol:.1e}; increase k_max")
    return num / den
