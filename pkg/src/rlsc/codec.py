"""A working random linear streaming codec over GF(2^q) with rank-based
decodability, used as the ground-truth oracle for the debt-based error
characterizations.

Per slot t the encoder mixes the current K source symbols with the last
alpha slots' worth into N coded symbols via a per-slot generator matrix
(non-systematic: fully random nonzero; systematic: K uncoded symbols on
top of N-K random parity rows).  The decoder maintains an incremental
reduced basis of everything received; a source symbol is decoded the first
time its unit vector lies in the received row space, which in reduced form
is the moment its pivot row becomes a singleton.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Trace
from .debt import CodeParams, Mode
from .errors import ContractError
from .gf import Field

_UNDECODED = np.iinfo(np.int64).max


class GF2Ops:
    """Row-operation bundle for GF(2^q) (subtraction is XOR)."""

    def __init__(self, field: Field):
        self.field = field

    def scale(self, s: int, vec: np.ndarray) -> np.ndarray:
        return np.asarray(self.field.mul(s, vec))

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.bitwise_xor(a, b)

    def inv(self, s: int) -> int:
        return int(self.field.inv(s))


@dataclass(frozen=True)
class GeneratorSchedule:
    """Deterministic per-slot generator matrices; entry layout is fixed by
    (seed, t) so encoder and decoder agree without sharing state."""

    params: CodeParams
    q: int = 16
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "field", Field(self.q))

    def window(self, t: int) -> int:
        """Number of source symbols mixed into slot t."""
        if t < 1:
            raise ContractError(f"slots are 1-based, got {t}")
        if self.params.alpha_infinite:
            return t * self.params.k
        return min(t, self.params.alpha + 1) * self.params.k

    def matrix(self, t: int) -> np.ndarray:
        """N x window(t) generator for slot t (columns end at slot t's symbols)."""
        k, n = self.params.k, self.params.n
        w = self.window(t)
        rng = np.random.default_rng(np.random.SeedSequence((self.seed, t)))
        if self.params.mode is Mode.NONSYSTEMATIC:
            return self.field.random_nonzero((n, w), rng)
        g = np.zeros((n, w), dtype=np.int64)
        g[:k, w - k:] = np.eye(k, dtype=np.int64)
        g[k:, :] = self.field.random_nonzero((n - k, w), rng)
        return g


def make_generator(params: CodeParams, t: int, seed: int, q: int = 16) -> np.ndarray:
    return GeneratorSchedule(params, q, seed).matrix(t)


def encode_stream(sources: np.ndarray, schedule: GeneratorSchedule) -> np.ndarray:
    """Encode a source stream (length T*K) into per-slot packets (T x N)."""
    k, n = schedule.params.k, schedule.params.n
    sources = np.asarray(sources, dtype=np.int64)
    if sources.ndim != 1 or sources.size % k:
        raise ContractError("source stream length must be a multiple of K")
    T = sources.size // k
    f = schedule.field
    out = np.zeros((T, n), dtype=np.int64)
    for t in range(1, T + 1):
        g = schedule.matrix(t)
        w = g.shape[1]
        window = sources[t * k - w: t * k]
        prod = np.asarray(f.mul(g, window[None, :]))
        out[t - 1] = np.bitwise_xor.reduce(prod, axis=1)
    return out


def receiver_matrix(schedule: GeneratorSchedule, trace: Trace, t: int) -> np.ndarray:
    """Cumulative received matrix H^(t): rows are the delivered projections of
    each slot's generator, column-aligned over the first t*K source symbols."""
    if t > len(trace):
        raise ContractError(f"t={t} beyond trace length {len(trace)}")
    k = schedule.params.k
    rows = []
    for tau in range(1, t + 1):
        c = int(trace.counts[tau - 1])
        if c == 0:
            continue
        g = schedule.matrix(tau)[:c]
        w = g.shape[1]
        full = np.zeros((c, t * k), dtype=np.int64)
        full[:, tau * k - w: tau * k] = g
        rows.append(full)
    if not rows:
        return np.zeros((0, t * k), dtype=np.int64)
    return np.vstack(rows)


class StreamDecoder:
    """Incremental reduced basis over an unbounded column stream.

    Rows are stored as (start, coeffs) segments, monic at their leading
    column; full back-elimination keeps the basis reduced so that a source
    symbol is decodable exactly when its pivot row is a singleton.  With
    track_values=True, each row carries its observed right-hand side, so
    decoded symbol values come out alongside the decode times.
    """

    def __init__(self, ops, n_cols: int, track_values: bool = False):
        self.ops = ops
        self.rows: dict[int, list] = {}  # pivot col -> [start, coeffs, rhs]
        self.decode_time = np.full(n_cols, _UNDECODED, dtype=np.int64)
        self.track_values = track_values
        self.values = np.zeros(n_cols, dtype=np.int64) if track_values else None

    def _trim(self, start: int, coeffs: np.ndarray, rhs: int):
        nz = np.nonzero(coeffs)[0]
        if nz.size == 0:
            return None
        return [start + int(nz[0]), coeffs[nz[0]: int(nz[-1]) + 1], rhs]

    def _combine(self, row_a, factor, row_b):
        """a - factor * b over the union column range."""
        start_a, a, rhs_a = row_a
        start_b, b, rhs_b = row_b
        lo = min(start_a, start_b)
        hi = max(start_a + len(a), start_b + len(b))
        out = np.zeros(hi - lo, dtype=np.int64)
        out[start_a - lo: start_a - lo + len(a)] = a
        scaled = self.ops.scale(factor, b)
        seg = out[start_b - lo: start_b - lo + len(b)]
        out[start_b - lo: start_b - lo + len(b)] = self.ops.sub(seg, scaled)
        rhs = int(self.ops.sub(np.array([rhs_a]),
                               self.ops.scale(factor, np.array([rhs_b])))[0]) \
            if self.track_values else 0
        return [lo, out, rhs]

    def _mask_decoded(self, row):
        """Substitute already-decoded symbols out of an incoming row."""
        start, coeffs, _ = row
        span = self.decode_time[start: start + len(coeffs)]
        known = np.nonzero((span != _UNDECODED) & (coeffs != 0))[0]
        if known.size and self.track_values:
            for off in known:
                contrib = self.ops.scale(int(coeffs[off]),
                                         np.array([self.values[start + int(off)]]))
                row[2] = int(self.ops.sub(np.array([row[2]]), contrib)[0])
        coeffs[span != _UNDECODED] = 0

    def _reduce(self, row):
        """Eliminate every known pivot column; returns [lead, vec, rhs] or None.

        Pivot rows carry no other pivot columns, so each combine removes one
        pivot column for good and the loop terminates.
        """
        cur = self._trim(*row)
        while cur is not None:
            lead, vec, _ = cur
            pivot = self.rows.get(lead)
            if pivot is not None:
                cur = self._trim(*self._combine(cur, int(vec[0]), pivot))
                continue
            hit = None
            for off in np.nonzero(vec)[0][1:]:
                col = lead + int(off)
                if col in self.rows:
                    hit = (col, int(vec[off]))
                    break
            if hit is None:
                return cur
            col, factor = hit
            cur = self._trim(*self._combine(cur, factor, self.rows[col]))
        return None

    def add_row(self, start: int, coeffs: np.ndarray, t: int, rhs: int = 0):
        """Insert a received row (slot time t, for decode timestamps)."""
        row = [start, np.array(coeffs, dtype=np.int64), int(rhs)]
        self._mask_decoded(row)
        cur = self._reduce(row)
        if cur is None:
            return
        lead, vec, r = cur
        inv = self.ops.inv(int(vec[0]))
        vec = self.ops.scale(inv, vec)
        r = int(self.ops.scale(inv, np.array([r]))[0]) if self.track_values else 0
        new_row = [lead, vec, r]
        touched = [lead]
        for col, other in list(self.rows.items()):
            idx = lead - other[0]
            if 0 <= idx < len(other[1]) and other[1][idx]:
                trimmed = self._trim(*self._combine(other, int(other[1][idx]),
                                                    new_row))
                if trimmed is None:
                    raise AssertionError("basis row vanished; reduction invariant broken")
                self.rows[col] = trimmed
                touched.append(col)
        self.rows[lead] = new_row
        for col in touched:
            entry = self.rows.get(col)
            if entry is None:
                continue
            if np.count_nonzero(entry[1]) == 1:
                self.decode_time[col] = min(int(self.decode_time[col]), t)
                if self.track_values:
                    self.values[col] = entry[2]
                del self.rows[col]

    def purge_unreachable(self, cutoff_col: int) -> None:
        """Retire rows whose whole span lies left of cutoff_col.

        Future received rows only touch columns >= cutoff_col (their own
        supports start there, and combining or back-elimination never
        extends a row left of its pivot), so such rows can never become
        singletons: their symbols are permanently lost and the rows are
        dead weight in the active set.
        """
        dead = [col for col, entry in self.rows.items()
                if entry[0] + len(entry[1]) <= cutoff_col]
        for col in dead:
            del self.rows[col]

    @property
    def rank_active(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class DecodabilityReport:
    """First decode times and deadline verdicts for each slot."""

    decode_time: np.ndarray   # per source symbol, _UNDECODED if never in-trace
    slot_decoded_by: np.ndarray  # per slot, max over its K symbols
    delta: int

    def decodable(self) -> np.ndarray:
        """Per-slot flag: every symbol of s(t) decoded by slot t + delta.
        Only trustworthy for slots with t + delta inside the trace."""
        T = self.slot_decoded_by.shape[0]
        deadline = np.arange(1, T + 1) + self.delta
        return self.slot_decoded_by <= deadline

    def undecodable_slots(self) -> np.ndarray:
        return np.flatnonzero(~self.decodable()) + 1


def decodability_report(schedule: GeneratorSchedule, trace: Trace,
                        delta: int) -> DecodabilityReport:
    """Run the incremental decoder over the whole trace."""
    params = schedule.params
    k = params.k
    T = len(trace)
    decoder = StreamDecoder(GF2Ops(schedule.field), T * k)
    for t in range(1, T + 1):
        if not params.alpha_infinite and decoder.rows:
            decoder.purge_unreachable(max(t - params.alpha - 1, 0) * k)
        c = int(trace.counts[t - 1])
        if c == 0:
            continue
        g = schedule.matrix(t)
        w = g.shape[1]
        start = t * k - w
        for r in range(c):
            decoder.add_row(start, g[r], t)
    decode_time = decoder.decode_time
    slot_decoded_by = decode_time.reshape(T, k).max(axis=1)
    return DecodabilityReport(decode_time=decode_time,
                              slot_decoded_by=slot_decoded_by, delta=delta)


def decode_stream_values(schedule: GeneratorSchedule, trace: Trace,
                         packets: np.ndarray):
    """Recover source symbol values from received packets.

    Returns (values, decode_time) per source symbol; positions that never
    decode within the trace keep decode_time = max int and value 0.
    """
    params = schedule.params
    k = params.k
    T = len(trace)
    decoder = StreamDecoder(GF2Ops(schedule.field), T * k, track_values=True)
    for t in range(1, T + 1):
        c = int(trace.counts[t - 1])
        if c == 0:
            continue
        g = schedule.matrix(t)
        start = t * k - g.shape[1]
        for r in range(c):
            decoder.add_row(start, g[r], t, rhs=int(packets[t - 1, r]))
    return decoder.values.copy(), decoder.decode_time.copy()


def gmds_spot_check(schedule: GeneratorSchedule, trials: int, seed: int,
                    t_max: int = 6, size_max: int = 16) -> int:
    """Count singular validly-induced submatrices of the cumulative generator.

    Random matrices satisfy the generalized MDS condition only with high
    probability at finite q; this measures the gap (roughly trials * 2^-q
    by a determinant union bound).
    """
    if trials < 1:
        raise ContractError(f"trials must be >= 1, got {trials}")
    from .gf import matrix_rank
    params = schedule.params
    rng = np.random.default_rng(seed)
    k, n = params.k, params.n
    failures = 0
    for _ in range(trials):
        t = int(rng.integers(1, t_max + 1))
        cum = np.zeros((t * n, t * k), dtype=np.int64)
        for tau in range(1, t + 1):
            g = schedule.matrix(tau)
            w = g.shape[1]
            cum[(tau - 1) * n: tau * n, tau * k - w: tau * k] = g
        m = int(rng.integers(1, min(size_max, t * k, t * n) + 1))
        rows = rng.choice(t * n, size=m, replace=False)
        used = set()
        cols = []
        ok = True
        for i in rng.permutation(rows):
            avail = [j for j in np.nonzero(cum[i])[0] if j not in used]
            if not avail:
                ok = False
                break
            j = int(avail[rng.integers(0, len(avail))])
            used.add(j)
            cols.append((i, j))
        if not ok:
            continue
        sub = cum[np.ix_([i for i, _ in cols], [j for _, j in cols])]
        if matrix_rank(schedule.field, sub) < m:
            failures += 1
    return failures
