"""Exact error probability of systematic streaming codes with unbounded
memory at rate 1/2 in the i.i.d. packet erasure channel.

With unbounded memory the debt never hits its ceiling, so each zero-return
cycle loses exactly the erased slots older than the decoding delay.  At
rate 1/2 a cycle of length 2l is a strictly-positive +-K excursion; there
are C_{l-1} of them (Catalan), each with probability p^l (1-p)^l.  The
numerator counts erasures among the first 2l-Delta-1 steps of every
excursion (erasures bunch early in a cycle, so this is not a flat
(1-p) fraction); the denominator is the mean cycle length, available both
as the n -> infinity limit of a tridiagonal-Toeplitz eigen-sum and as the
limiting integral.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import ContractError

_SERIES_TOL = 1e-10
_L_MAX_CAP = 2000


@lru_cache(maxsize=None)
def catalan(n: int) -> int:
    """Exact n-th Catalan number (Python integers never overflow)."""
    if n < 0:
        raise ContractError(f"Catalan numbers need n >= 0, got {n}")
    return math.comb(2 * n, n) // (n + 1)


def _log_int(n: int) -> float:
    """log of a (possibly huge) positive integer without float overflow."""
    if n <= 0:
        raise ContractError("log of non-positive integer")
    shift = max(n.bit_length() - 53, 0)
    return math.log(n >> shift) + shift * math.log(2.0)


def _check_p(p: float) -> None:
    if not 0.5 < p <= 1.0:
        raise ContractError(
            f"delivery probability must satisfy 1/2 < p <= 1 for positive "
            f"recurrence, got {p}")


def expected_interval_integral(p: float) -> float:
    """Mean zero-return interval: p + 2p(1-p) * integral_0^1 of
    (1 + 1/(1-2 sqrt(p(1-p)) cos(pi x))) sin^2(pi x)/(1-2 sqrt(p(1-p)) cos(pi x)) dx."""
    _check_p(p)
    if p == 1.0:
        return 1.0
    s = 2.0 * math.sqrt(p * (1.0 - p))

    def integrand(x: float) -> float:
        den = 1.0 - s * math.cos(math.pi * x)
        sin2 = math.sin(math.pi * x) ** 2
        return (1.0 + 1.0 / den) * sin2 / den

    val, err = quad(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    if err > 1e-9:
        warnings.warn(f"interval integral error estimate {err:.3e} above 1e-9")
    return p + 2.0 * p * (1.0 - p) * val


def expected_interval_truncated(p: float, n_k: int) -> float:
    """Finite-ceiling mean interval via the tridiagonal-Toeplitz eigen-sum;
    converges to the integral as the ceiling quotient n_k grows."""
    if n_k < 1:
        raise ContractError(f"n_k must be >= 1, got {n_k}")
    _check_p(p)
    if p == 1.0:
        return 1.0
    s = 2.0 * math.sqrt(p * (1.0 - p))
    j = np.arange(1, n_k + 1, dtype=np.float64)
    theta = j * math.pi / (n_k + 1)
    den = 1.0 - s * np.cos(theta)
    total = np.sum((1.0 + 1.0 / den) * np.sin(theta) ** 2 / den)
    return p + 2.0 * p * (1.0 - p) / (n_k + 1) * total


def nup_oracle(l: int, j: int) -> int:
    """Number of strictly-positive 2l-excursions whose j-th step is upward,
    by direct dynamic programming over path prefixes and suffixes."""
    if l < 1 or l > 12:
        raise ContractError(f"enumeration oracle supports 1 <= l <= 12, got {l}")
    if not 1 <= j <= 2 * l:
        raise ContractError(f"step index j must be in [1, 2l], got {j}")
    # prefix[t][h]: paths of length t from 0 to h, height >= 1 strictly inside
    n = 2 * l
    prefix = [[0] * (n + 2) for _ in range(n + 1)]
    prefix[0][0] = 1
    for t in range(1, n + 1):
        lo = 1 if t < n else 0
        for h in range(lo, n + 1):
            up = prefix[t - 1][h - 1] if h >= 1 else 0
            down = prefix[t - 1][h + 1] if h + 1 <= n + 1 else 0
            if t == 1:
                up = prefix[0][h - 1] if h == 1 else 0
                down = 0
            prefix[t][h] = up + down
    # suffix[t][h]: completions from height h after t steps down to 0 at step n
    suffix = [[0] * (n + 2) for _ in range(n + 1)]
    suffix[n][0] = 1
    for t in range(n - 1, -1, -1):
        for h in range(0, n + 2):
            if t > 0 and h == 0:
                continue  # interior heights are >= 1
            up = suffix[t + 1][h + 1] if h + 1 <= n + 1 else 0
            down = suffix[t + 1][h - 1] if h >= 1 else 0
            suffix[t][h] = up + down
    total = 0
    for h in range(0, n + 1):
        if prefix[j - 1][h]:
            total += prefix[j - 1][h] * suffix[j][h + 1]
    return total


def nup_recursion(l: int) -> list:
    """Per-step upward counts via the odd-step Catalan decrement recursion:
    N(1) = C_{l-1}; even j copies N(j-1); odd j >= 3 subtracts
    C_{(j-1)/2 - 1} * C_{(2l+1-j)/2 - 1}.

    The even-copies-odd pairing needs a length-4 excursion to exist; the
    degenerate l = 1 excursion "up, down" has N = [1, 0] directly.
    """
    if l < 1:
        raise ContractError(f"l must be >= 1, got {l}")
    if l == 1:
        return [1, 0]
    counts = [catalan(l - 1)]
    for j in range(2, 2 * l + 1):
        if j % 2 == 0:
            counts.append(counts[-1])
        else:
            counts.append(counts[-1]
                          - catalan((j - 1) // 2 - 1) * catalan((2 * l + 1 - j) // 2 - 1))
    return counts


def nup_sum(l: int, delta: int) -> int:
    """Sum of upward counts over the first 2l - delta - 1 steps, unified form:
    (2l-delta-1) C_{l-1} - sum_i C_i C_{l-2-i} (2l-delta-3-2i), the
    correction running while its coefficient stays positive (for even delta
    that is one index further than the odd-delta bound l - delta//2 - 3;
    truncating both parities at the odd bound breaks the delta = 0 renewal
    identity, as the enumeration oracle shows)."""
    if delta < 0:
        raise ContractError(f"delta must be >= 0, got {delta}")
    if 2 * l < delta + 2:
        return 0
    total = (2 * l - delta - 1) * catalan(l - 1)
    for i in range(0, (2 * l - delta - 2) // 2):
        total -= catalan(i) * catalan(l - 2 - i) * (2 * l - delta - 3 - 2 * i)
    return total


def nup_sum_piecewise(l: int, delta: int) -> int:
    """Same sum in the delta-parity split form (kept as a cross-check).

    Odd delta covers J step pairs exactly; even delta adds the unpaired
    step 2J+1, whose correction contributes the j = J-1 term with
    coefficient 1.
    """
    if 2 * l < delta + 2:
        return 0
    big_j = (2 * l - delta - 1) // 2
    if delta % 2 == 1:
        total = big_j * catalan(l - 1)
        for j in range(0, big_j - 1):
            total -= catalan(j) * catalan(l - 2 - j) * (big_j - 1 - j)
        return 2 * total
    total = (2 * big_j + 1) * catalan(l - 1)
    for j in range(0, big_j):
        total -= catalan(j) * catalan(l - 2 - j) * (2 * big_j - 1 - 2 * j)
    return total


@dataclass(frozen=True)
class SeriesResult:
    value: float
    l_max_used: int
    tail_bound: float
    truncated: bool = False


def expected_errors(p: float, delta: int, l_max: int = None,
                    tol: float = _SERIES_TOL) -> SeriesResult:
    """Mean undecodable erasures per cycle:
    sum_{l >= ceil(delta/2)+1} p^l (1-p)^l * nup_sum(l, delta).

    Terms combine exact integer counts with log-space scaling; truncation
    uses the ratio-test tail bound (the term ratio approaches 4p(1-p) < 1).
    """
    _check_p(p)
    if delta < 0:
        raise ContractError(f"delta must be >= 0, got {delta}")
    if p == 1.0:
        return SeriesResult(0.0, 0, 0.0)
    u = p * (1.0 - p)
    log_u = math.log(u)
    l0 = delta // 2 + 1 if delta % 2 == 0 else (delta + 1) // 2 + 1
    cap = l_max if l_max is not None else _L_MAX_CAP
    if cap < l0:
        raise ContractError(f"l_max {cap} below the first series index {l0}")
    asymptotic_ratio = 4.0 * u
    total = 0.0
    prev_term = None
    tail = math.inf
    l_used = l0
    for l in range(l0, cap + 1):
        s_l = nup_sum(l, delta)
        term = math.exp(l * log_u + _log_int(s_l)) if s_l > 0 else 0.0
        total += term
        l_used = l
        if prev_term and term > 0.0:
            ratio = max(term / prev_term, asymptotic_ratio)
            if ratio < 1.0:
                tail = term * ratio / (1.0 - ratio)
                if l_max is None and tail < tol * max(total, 1e-300):
                    break
        prev_term = term
    truncated = not tail < tol * max(total, 1e-300)
    if truncated:
        warnings.warn(f"series tail bound {tail:.3e} above requested tolerance "
                      f"at l_max={l_used}")
    return SeriesResult(total, l_used, tail, truncated)


@dataclass(frozen=True)
class SrlscResult:
    pe: float
    numerator: float
    denominator: float
    l_max_used: int
    tail_bound: float


def pe_srlsc_infinite(p: float, delta: int, l_max: int = None,
                      tol: float = _SERIES_TOL) -> SrlscResult:
    """Slot error probability for unbounded memory, rate 1/2, i.i.d. PEC."""
    num = expected_errors(p, delta, l_max, tol)
    den = expected_interval_integral(p)
    return SrlscResult(pe=num.value / den, numerator=num.value, denominator=den,
                       l_max_used=num.l_max_used, tail_bound=num.tail_bound)
