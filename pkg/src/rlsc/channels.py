"""Erasure channel models and trace sampling.

A channel is a hidden Markov chain: L hidden states with a row-stochastic
transition matrix, and per-state emission pmfs over the received-symbol
count C_t in {0..N}.  Covers the i.i.d. symbol erasure channel (L=1), the
Gilbert-Elliott symbol erasure channel (L=2), and their packet-mode
variants where C_t is restricted to {0, N}.

The hidden state at slot t draws C_t, then transitions at the end of the
slot.  Traces start from the stationary state distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import markov_state_path
from .errors import ContractError

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class EmissionModel:
    """Per-state pmf of the received-symbol count over {0..N}."""

    n_symbols: int
    pmf: np.ndarray

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=np.float64)
        object.__setattr__(self, "pmf", pmf)
        if pmf.shape != (self.n_symbols + 1,):
            raise ContractError(
                f"pmf must have length N+1={self.n_symbols + 1}, got {pmf.shape}")
        if np.any(pmf < 0) or abs(pmf.sum() - 1.0) > _PROB_TOL:
            raise ContractError("emission pmf entries must be >= 0 and sum to 1")

    @classmethod
    def binomial(cls, n: int, p_success: float) -> "EmissionModel":
        """C_t ~ Binomial(n, p_success): each symbol survives independently."""
        if not 0.0 <= p_success <= 1.0:
            raise ContractError(f"p_success must be in [0,1], got {p_success}")
        i = np.arange(n + 1)
        from scipy.stats import binom
        return cls(n, binom.pmf(i, n, p_success))

    @classmethod
    def packet(cls, n: int, p_delivery: float) -> "EmissionModel":
        """All-or-nothing slot: C_t = n w.p. p_delivery, else 0."""
        if not 0.0 <= p_delivery <= 1.0:
            raise ContractError(f"p_delivery must be in [0,1], got {p_delivery}")
        pmf = np.zeros(n + 1)
        pmf[0] = 1.0 - p_delivery
        pmf[n] = p_delivery
        return cls(n, pmf)

    @classmethod
    def table(cls, pmf) -> "EmissionModel":
        pmf = np.asarray(pmf, dtype=np.float64)
        return cls(len(pmf) - 1, pmf)

    @property
    def is_packet(self) -> bool:
        return bool(np.all(self.pmf[1:-1] == 0.0))


def build_emission(kind: str, **params) -> EmissionModel:
    """Constructor dispatch used by config files: binomial | packet | table."""
    if kind == "binomial":
        return EmissionModel.binomial(params["n"], params["p_success"])
    if kind == "packet":
        return EmissionModel.packet(params["n"], params["p_delivery"])
    if kind == "table":
        return EmissionModel.table(params["pmf"])
    raise ContractError(f"unknown emission kind {kind!r}")


@dataclass(frozen=True)
class ChannelSpec:
    """Hidden-Markov erasure channel: state transitions + per-state emissions."""

    transition: np.ndarray
    emissions: tuple
    packet_mode: bool = False

    def __post_init__(self):
        t1 = np.asarray(self.transition, dtype=np.float64)
        object.__setattr__(self, "transition", t1)
        object.__setattr__(self, "emissions", tuple(self.emissions))
        L = t1.shape[0]
        if t1.shape != (L, L) or L < 1:
            raise ContractError("transition matrix must be square, L >= 1")
        if np.any(t1 < -_PROB_TOL) or np.any(np.abs(t1.sum(axis=1) - 1.0) > _PROB_TOL):
            raise ContractError("transition matrix rows must be probabilities summing to 1")
        if len(self.emissions) != L:
            raise ContractError(f"need one emission model per state ({L}), "
                                f"got {len(self.emissions)}")
        ns = {em.n_symbols for em in self.emissions}
        if len(ns) != 1:
            raise ContractError("all emission models must share the same N")
        if self.packet_mode and not all(em.is_packet for em in self.emissions):
            raise ContractError("packet_mode requires all emissions supported on {0, N}")
        if not _single_recurrent_class(t1):
            raise ContractError("channel chain is not ergodic (multiple recurrent classes)")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.emissions[0].n_symbols

    @classmethod
    def gilbert_elliott(cls, p: float, r: float, good: EmissionModel,
                        bad: EmissionModel, packet_mode: bool = False) -> "ChannelSpec":
        """Two-state chain: G->B w.p. p, B->G w.p. r."""
        t1 = np.array([[1.0 - p, p], [r, 1.0 - r]])
        return cls(t1, (good, bad), packet_mode)

    @classmethod
    def iid(cls, emission: EmissionModel, packet_mode: bool = False) -> "ChannelSpec":
        return cls(np.array([[1.0]]), (emission,), packet_mode)


def _single_recurrent_class(t1: np.ndarray) -> bool:
    """Exactly one closed communicating class (transient states allowed)."""
    L = t1.shape[0]
    reach = (t1 > 0) | np.eye(L, dtype=bool)
    for _ in range(L):
        reach = reach @ reach
    # state i is recurrent iff everything it reaches reaches it back
    recurrent = [i for i in range(L) if all(reach[j, i] for j in np.nonzero(reach[i])[0])]
    if not recurrent:
        return False
    r0 = recurrent[0]
    return all(reach[r0, i] and reach[i, r0] for i in recurrent)


def stationary_distribution(spec: ChannelSpec) -> np.ndarray:
    """pi with pi @ T1 = pi, entries >= 0, summing to 1."""
    t1 = spec.transition
    L = spec.n_states
    a = np.vstack([(t1 - np.eye(L)).T, np.ones(L)])
    b = np.zeros(L + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


@dataclass(frozen=True)
class Trace:
    """One sampled channel realization: hidden states, counts, erasure flags."""

    states: np.ndarray        # int8, per-slot hidden state index (slots 1..T)
    counts: np.ndarray        # int32, received-symbol counts C_t
    n_symbols: int
    packet_mode: bool
    seed: object = field(default=None, compare=False)

    @property
    def erased(self) -> np.ndarray:
        """e(t) = 1{C_t < N}; in packet mode this is 1{C_t = 0}."""
        return self.counts < self.n_symbols

    def __len__(self) -> int:
        return len(self.counts)


def sample_trace(spec: ChannelSpec, T: int, seed) -> Trace:
    """Sample T slots; the initial state is stationary, so no burn-in is needed."""
    if T < 1:
        raise ContractError(f"T must be >= 1, got {T}")
    rng = np.random.default_rng(seed)
    pi = stationary_distribution(spec)
    L = spec.n_states
    cum_t1 = np.cumsum(spec.transition, axis=1)
    u = rng.random(T)
    u0 = rng.random()
    states = markov_state_path(np.cumsum(pi), cum_t1, u, u0)

    counts = np.empty(T, dtype=np.int32)
    u_emit = rng.random(T)
    for s in range(L):
        mask = states == s
        if not np.any(mask):
            continue
        cum = np.cumsum(spec.emissions[s].pmf)
        counts[mask] = np.searchsorted(cum, u_emit[mask], side="right")
    np.clip(counts, 0, spec.n_symbols, out=counts)
    return Trace(states=states, counts=counts, n_symbols=spec.n_symbols,
                 packet_mode=spec.packet_mode, seed=seed)
