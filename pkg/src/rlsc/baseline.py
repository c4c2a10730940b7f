"""Deterministic sliding-window streaming codes used as comparison baselines.

Four published systematic convolutional codes, each optimal for a
(W, B, M)-sliding-window erasure channel: within any window of W slots
they correct one burst of length <= B or up to M arbitrary erasures,
with decoding delay Delta.  Parameters tie together as K = Delta - M + 1,
N = K + B, memory alpha = N - 1.

The printed K x N generator matrix is applied along diagonals: column
j <= K carries the uncoded symbol s_j(t); column j > K contributes
sum_k M[k, j] * s_k(t - (j - k)).  Entries are small integers; arithmetic
runs over the prime field GF(257), which preserves the designed rank
structure (validated by the recovery tests).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import Trace
from .codec import StreamDecoder, _UNDECODED
from .errors import ContractError

PRIME_Q = 257


class PrimeFieldOps:
    """Row operations mod a prime, for the incremental decoder."""

    def __init__(self, p: int = PRIME_Q):
        self.p = p

    def scale(self, s: int, vec: np.ndarray) -> np.ndarray:
        return (s * vec) % self.p

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a - b) % self.p

    def inv(self, s: int) -> int:
        return pow(int(s), self.p - 2, self.p)


@dataclass(frozen=True)
class BaselineCode:
    name: str
    k: int
    n: int
    delta: int
    matrix: np.ndarray
    q_b: int = PRIME_Q

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.int64)
        object.__setattr__(self, "matrix", m)
        if m.shape != (self.k, self.n):
            raise ContractError(f"matrix must be K x N = {self.k} x {self.n}")
        if np.any(m >= self.q_b) or np.any(m < 0):
            raise ContractError(f"entries must lie in [0, {self.q_b})")

    @property
    def alpha(self) -> int:
        return self.n - 1

    @property
    def burst_b(self) -> int:
        return self.n - self.k

    @property
    def arbitrary_m(self) -> int:
        return self.delta - self.k + 1

    @property
    def window_w(self) -> int:
        return self.delta + 1

    def slot_rows(self, t: int, n_cols: int):
        """The N receiver rows of slot t as (start, coeffs) segments over the
        global column space (K columns per slot)."""
        k = self.k
        rows = []
        for j in range(1, self.n + 1):
            if j <= k:
                col = (t - 1) * k + (j - 1)
                rows.append((col, np.ones(1, dtype=np.int64)))
                continue
            seg = {}
            for kk in range(1, k + 1):
                coeff = int(self.matrix[kk - 1, j - 1])
                if coeff == 0:
                    continue
                src_t = t - (j - kk)
                if src_t < 1:
                    continue
                seg[(src_t - 1) * k + (kk - 1)] = coeff
            if not seg:
                continue
            lo, hi = min(seg), max(seg)
            coeffs = np.zeros(hi - lo + 1, dtype=np.int64)
            for col, coeff in seg.items():
                coeffs[col - lo] = coeff
            rows.append((lo, coeffs))
        return rows


def builtin_codes() -> list:
    """The four published baseline instances, exact integer matrices."""
    return [
        BaselineCode("swpec-k3n6", 3, 6, 4, np.array([
            [1, 0, 0, 1, 1, 0],
            [0, 1, 0, 0, 1, 1],
            [0, 0, 1, 0, 1, 2],
        ])),
        BaselineCode("swpec-k4n7", 4, 7, 5, np.array([
            [1, 0, 0, 0, 1, 2, 0],
            [0, 1, 0, 0, 0, 1, 3],
            [0, 0, 1, 0, 0, 2, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ])),
        BaselineCode("swpec-k4n10", 4, 10, 7, np.array([
            [1, 0, 0, 0, 1, 4, 16, 64, 0, 0],
            [0, 1, 0, 0, 1, 3, 0, 27, 81, 0],
            [0, 0, 1, 0, 1, 2, 0, 0, 16, 32],
            [0, 0, 0, 1, 1, 1, 0, 0, 1, 1],
        ])),
        BaselineCode("swpec-k6n10", 6, 10, 7, np.array([
            [1, 0, 0, 0, 0, 0, 1, 6, 0, 0],
            [0, 1, 0, 0, 0, 0, 0, 5, 25, 0],
            [0, 0, 1, 0, 0, 0, 0, 0, 16, 64],
            [0, 0, 0, 1, 0, 0, 0, 0, 9, 27],
            [0, 0, 0, 0, 1, 0, 1, 2, 4, 8],
            [0, 0, 0, 0, 0, 1, 1, 1, 1, 1],
        ])),
    ]


def get_code(name: str) -> BaselineCode:
    for code in builtin_codes():
        if code.name == name:
            return code
    raise ContractError(f"unknown baseline code {name!r}; "
                        f"available: {[c.name for c in builtin_codes()]}")


def baseline_decode_times(code: BaselineCode, erased: np.ndarray) -> np.ndarray:
    """First decode slot for every source symbol under the given packet
    erasure pattern (True = erased), by incremental rank tracking.

    Fast path: after alpha consecutive deliveries with an empty active
    basis, every parity row references only already-decoded symbols and
    reduces to zero, so a delivered slot contributes exactly its K uncoded
    symbols; the decoder is only engaged around erasures.
    """
    T = len(erased)
    k = code.k
    decoder = StreamDecoder(PrimeFieldOps(code.q_b), T * k)
    decode_time = decoder.decode_time
    clean_run = 0
    for t in range(1, T + 1):
        if decoder.rows:
            decoder.purge_unreachable(max(t - code.alpha - 1, 0) * k)
        if erased[t - 1]:
            clean_run = 0
            continue
        if clean_run >= code.alpha and not decoder.rows:
            base = (t - 1) * k
            decode_time[base: base + k] = t
            clean_run += 1
            continue
        for start, coeffs in code.slot_rows(t, T * k):
            decoder.add_row(start, coeffs, t)
        clean_run += 1
    return decode_time


def baseline_error_slots(code: BaselineCode, trace: Trace, delta: int) -> np.ndarray:
    """Slots not decodable within the delay (1-based).  Only slots whose
    deadline t + delta falls inside the trace are judged."""
    if not trace.packet_mode:
        raise ContractError("baseline codes operate on packet-mode traces")
    erased = trace.erased
    T = len(erased)
    decode_time = baseline_decode_times(code, erased)
    slot_decoded_by = decode_time.reshape(T, code.k).max(axis=1)
    t = np.arange(1, T + 1)
    judged = t + delta <= T
    errors = (slot_decoded_by > t + delta) & judged
    return np.flatnonzero(errors) + 1
