import numpy as np
import pytest
from fractions import Fraction

from rlsc.baseline import (BaselineCode, PrimeFieldOps, baseline_decode_times,
                           baseline_error_slots, builtin_codes, get_code)
from rlsc.channels import Trace
from rlsc.errors import ContractError


def packet_trace(erased, n):
    erased = np.asarray(erased, dtype=bool)
    counts = np.where(erased, 0, n).astype(np.int32)
    return Trace(states=np.zeros(len(erased), np.int8), counts=counts,
                 n_symbols=n, packet_mode=True)


def undecodable(code, erased):
    T = len(erased)
    dt = baseline_decode_times(code, np.asarray(erased, dtype=bool))
    slot_by = dt.reshape(T, code.k).max(axis=1)
    t = np.arange(1, T + 1)
    judged = t + code.delta <= T
    return list(np.flatnonzero((slot_by > t + code.delta) & judged) + 1)


class TestBuiltins:
    def test_four_codes_with_exact_shapes(self):
        codes = builtin_codes()
        assert [(c.k, c.n) for c in codes] == [(3, 6), (4, 7), (4, 10), (6, 10)]
        assert [c.delta for c in codes] == [4, 5, 7, 7]
        assert all(c.alpha == c.n - 1 for c in codes)

    def test_first_code_first_row(self):
        code = get_code("swpec-k3n6")
        assert list(code.matrix[0]) == [1, 0, 0, 1, 1, 0]

    def test_identity_left_blocks(self):
        for code in builtin_codes():
            assert np.array_equal(code.matrix[:, :code.k],
                                  np.eye(code.k, dtype=np.int64))

    def test_k6n10_left_identity(self):
        code = get_code("swpec-k6n10")
        assert np.array_equal(code.matrix[:, :6], np.eye(6, dtype=np.int64))

    def test_unknown_name(self):
        with pytest.raises(ContractError):
            get_code("nope")


class TestPrimeOps:
    def test_inverse(self):
        ops = PrimeFieldOps(257)
        for a in (1, 2, 100, 256):
            assert (a * ops.inv(a)) % 257 == 1

    def test_row_ops(self):
        ops = PrimeFieldOps(257)
        v = np.array([5, 250, 0, 30])
        assert np.all(ops.sub(v, v) == 0)
        assert np.all(ops.scale(2, v) == (2 * v) % 257)


class TestRecovery:
    def test_zero_erasure_trace_clean(self):
        code = get_code("swpec-k3n6")
        assert undecodable(code, [0] * 20) == []

    def test_single_isolated_erasure_recovered(self):
        for code in builtin_codes():
            e = np.zeros(30, bool)
            e[14] = True
            assert undecodable(code, e) == []

    @pytest.mark.parametrize("name", ["swpec-k3n6", "swpec-k4n7", "swpec-k4n10"])
    def test_designed_burst_recovered(self, name):
        code = get_code(name)
        for blen in range(1, code.burst_b + 1):
            e = np.zeros(40, bool)
            e[14:14 + blen] = True
            assert undecodable(code, e) == []

    @pytest.mark.parametrize("name", ["swpec-k3n6", "swpec-k4n7", "swpec-k4n10",
                                      "swpec-k6n10"])
    def test_designed_isolated_recovered(self, name):
        code = get_code(name)
        m, w = code.arbitrary_m, code.window_w
        e = np.zeros(44, bool)
        step = max(1, (w - 2) // max(m - 1, 1))
        for i in range(m):
            e[9 + i * step] = True
        assert undecodable(code, e) == []

    def test_overlong_burst_loses_symbols(self):
        for code in builtin_codes():
            e = np.zeros(44, bool)
            e[14:14 + code.burst_b + 1] = True
            assert undecodable(code, e) != []

    def test_k6n10_printed_matrix_burst_deficiency(self):
        # erasing codeword positions {4..7} leaves the parity submatrix
        # rows {4,5,6} x cols {8,9,10} singular over the rationals, so the
        # printed matrix cannot correct its nominal burst length in any
        # field; bursts up to 3 still recover
        code = get_code("swpec-k6n10")
        sub = [[Fraction(int(code.matrix[i, j])) for j in (7, 8, 9)]
               for i in (3, 4, 5)]
        det = (sub[0][0] * (sub[1][1] * sub[2][2] - sub[1][2] * sub[2][1])
               - sub[0][1] * (sub[1][0] * sub[2][2] - sub[1][2] * sub[2][0])
               + sub[0][2] * (sub[1][0] * sub[2][1] - sub[1][1] * sub[2][0]))
        assert det == 0
        for blen in range(1, 4):
            e = np.zeros(40, bool)
            e[14:14 + blen] = True
            assert undecodable(code, e) == []
        e = np.zeros(40, bool)
        e[14:18] = True
        assert undecodable(code, e) == [15, 16, 17]


class TestErrorSlots:
    def test_zero_erasure_empty(self):
        code = get_code("swpec-k3n6")
        trace = packet_trace([0] * 20, 6)
        assert baseline_error_slots(code, trace, 4).size == 0

    def test_requires_packet_mode(self):
        code = get_code("swpec-k3n6")
        trace = Trace(states=np.zeros(4, np.int8),
                      counts=np.array([3, 6, 6, 6], dtype=np.int32),
                      n_symbols=6, packet_mode=False)
        with pytest.raises(ContractError):
            baseline_error_slots(code, trace, 4)

    def test_burst_beyond_design_shows_errors(self):
        code = get_code("swpec-k3n6")
        erased = np.zeros(30, bool)
        erased[9:14] = True  # burst of 5 > B = 3
        trace = packet_trace(erased, 6)
        assert baseline_error_slots(code, trace, 4).size > 0
