"""Boolean satisfaction, robustness, and time robustness of STL."""

import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resilmon.errors import EvaluationError, ExtensionWarning
from resilmon.formula import parse_stl
from resilmon.oracle import naive_sat, random_signal
from resilmon.stl_semantics import rho, sat, theta_plus
from resilmon.trace import Signal, extend


def sig(values, channels=("x",), dt=1.0):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return Signal(channels=channels, samples=arr, dt=dt)


def bool_sig(pattern: str) -> Signal:
    return sig([1.0 if c == "T" else -1.0 for c in pattern])


P = "x >= 0"


class TestSatBasics:
    def test_atom(self):
        s = sig([1.0, -1.0, 0.0])
        assert sat(parse_stl(P), s, 0)
        assert not sat(parse_stl(P), s, 1)
        assert sat(parse_stl(P), s, 2)

    def test_affine_atom(self):
        s = Signal(("x", "y"), np.array([[1.0, 2.0], [3.0, 1.0]]))
        assert sat(parse_stl("2*x - y >= 0"), s, 0)
        assert sat(parse_stl("2*x - y >= 5"), s, 1)

    def test_boolean_connectives(self):
        s = sig([1.0, -1.0])
        assert sat(parse_stl(f"not ({P})"), s, 1)
        assert not sat(parse_stl(f"{P} and not {P}"), s, 0)
        assert sat(parse_stl(f"{P} or not {P}"), s, 1)

    def test_always_closed(self):
        s = bool_sig("TTTF")
        assert sat(parse_stl(f"G[0,2] {P}"), s, 0)
        assert not sat(parse_stl(f"G[0,3] {P}"), s, 0)
        assert not sat(parse_stl(f"G[1,2] {P}"), s, 1)

    def test_always_half_open(self):
        s = bool_sig("TTTF")
        assert sat(parse_stl(f"G[0,3) {P}"), s, 0)
        assert not sat(parse_stl(f"G[0,4) {P}"), s, 0)
        # empty window is vacuously true
        assert sat(parse_stl(f"G[0,1) {P}"), bool_sig("FF"), 1) is False
        assert sat(parse_stl(f"G[1,1) {P}"), bool_sig("FF"), 0)

    def test_eventually(self):
        s = bool_sig("FFTF")
        assert sat(parse_stl(f"F[0,2] {P}"), s, 0)
        assert not sat(parse_stl(f"F[0,1] {P}"), s, 0)
        assert sat(parse_stl(f"F[1,2] {P}"), s, 1)

    def test_until(self):
        s = bool_sig("TTFF")
        # x holds until it fails at step 2, so "P until not-P" succeeds
        assert sat(parse_stl(f"{P} U[0,3] not {P}"), s, 0)
        # strict prefix only: the witness at d=0 needs no prefix at all
        assert sat(parse_stl(f"not {P} U[0,2] {P}"), s, 0)
        assert not sat(parse_stl(f"{P} U[1,1] {P}"), bool_sig("FTF"), 0)

    def test_time_domain_checked(self):
        s = bool_sig("TT")
        with pytest.raises(EvaluationError, match="outside"):
            sat(parse_stl(P), s, 2)
        with pytest.raises(EvaluationError):
            sat(parse_stl(P), s, -1)

    def test_unknown_channel(self):
        with pytest.raises(EvaluationError, match="unknown channel"):
            sat(parse_stl("z >= 0"), bool_sig("TT"), 0)


class TestExtensionPolicy:
    def test_reading_past_end_warns(self):
        s = bool_sig("TT")
        with pytest.warns(ExtensionWarning, match="terminal sample"):
            assert sat(parse_stl(f"G[0,5] {P}"), s, 0)

    def test_no_extend_raises(self):
        s = bool_sig("TT")
        with pytest.raises(EvaluationError, match="signal too short"):
            sat(parse_stl(f"G[0,5] {P}"), s, 0, auto_extend=False)

    def test_within_horizon_is_silent(self):
        s = bool_sig("TTT")
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert sat(parse_stl(f"G[0,2] {P}"), s, 0)

    @pytest.mark.parametrize("text", [f"G[0,4] {P}", f"F[2,6] {P}",
                                      f"{P} U[0,5] not {P}"])
    @pytest.mark.parametrize("pattern", ["TFT", "FFT", "TTF", "FTF"])
    def test_virtual_equals_physical_extension(self, text, pattern):
        phi = parse_stl(text)
        s = bool_sig(pattern)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            virtual = sat(phi, s, 0)
        physical = sat(phi, extend(s, 12), 0)
        assert virtual == physical

    @given(st.lists(st.sampled_from([1.0, -1.0]), min_size=4, max_size=9),
           st.integers(0, 8))
    def test_sat_invariant_under_extension_beyond_horizon(self, values, extra):
        phi = parse_stl(f"G[0,1] {P} U[0,2] not {P}")
        s = sig(values)
        base = extend(s, s.length + 3)  # covers horizon 3 at t=0
        assert sat(phi, base, 0) == sat(phi, extend(base, base.length + extra), 0)


def _basis_formulas():
    texts = [
        P,
        f"not {P}",
        f"{P} and y >= 0",
        f"{P} or y >= 0",
        f"G[0,2] {P}",
        f"G[1,3] {P}",
        f"G[0,2) {P}",
        f"G[0,1) {P}",
        f"F[0,2] {P}",
        f"F[1,2] {P}",
        f"{P} U[0,2] y >= 0",
        f"{P} U[1,3] y >= 0",
        f"not (G[0,1] {P}) and F[0,2] y >= 0",
        f"(not {P}) U[0,2] G[0,2) y >= 0",
        f"F[0,1] ({P} U[0,1] y >= 0)",
        f"G[0,1] F[0,2] {P}",
    ]
    return [parse_stl(t) for t in texts]


class TestSatMatchesOracle:
    @pytest.mark.parametrize("phi", _basis_formulas(), ids=str)
    def test_exhaustive_small_scope(self, phi):
        # all two-channel Boolean signals with up to 5 rows, all times
        for rows in range(2, 6):
            for bits in itertools.product([1.0, -1.0], repeat=2 * rows):
                arr = np.array(bits).reshape(rows, 2)
                s = Signal(("x", "y"), arr)
                for t in range(rows):
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        assert sat(phi, s, t) == naive_sat(phi, s, t), (
                            phi, arr, t,
                        )

    @pytest.mark.parametrize("seed", range(25))
    def test_random_signals(self, seed):
        from resilmon.oracle import _random_stl

        rng = np.random.default_rng(seed)
        s = random_signal(length=18, seed=seed + 1000)
        phi = _random_stl(rng, depth=3, channels=("x", "y"))
        for t in range(0, s.length + 1, 3):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                assert sat(phi, s, t) == naive_sat(phi, s, t)


class TestRobustness:
    def test_atom_margin(self):
        s = sig([3.0, -1.5])
        assert rho(parse_stl("x >= 1"), s, 0) == 2.0
        assert rho(parse_stl("x >= 1"), s, 1) == -2.5
        assert rho(parse_stl("x <= 1"), s, 0) == -2.0

    def test_min_max_recursion(self):
        s = sig([3.0, -1.0, 2.0])
        assert rho(parse_stl("G[0,2] x >= 0"), s, 0) == -1.0
        assert rho(parse_stl("F[0,2] x >= 0"), s, 0) == 3.0
        assert rho(parse_stl("not x >= 0"), s, 1) == 1.0
        assert rho(parse_stl("x >= 0 and x <= 1"), s, 2) == -1.0

    def test_until_robustness(self):
        s = sig([2.0, 1.0, -3.0])
        # best witness is d=0: min over empty prefix is +inf, capped by rhs
        got = rho(parse_stl("x >= 0 U[0,2] x <= 0"), s, 0)
        # d=2: rhs 3.0, prefix min(2,1) = 1 -> 1; d=0: rhs -2; d=1: rhs -1
        assert got == 1.0

    def test_sign_agrees_with_sat_when_nonzero(self):
        from resilmon.oracle import _random_stl

        for seed in range(120):
            rng = np.random.default_rng([41, seed])
            s = random_signal(length=12, seed=seed)
            phi = _random_stl(rng, depth=2, channels=("x", "y"))
            t = int(rng.integers(0, s.length + 1))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                r = rho(phi, s, t)
                b = sat(phi, s, t)
            if r > 0:
                assert b
            elif r < 0:
                assert not b


class TestThetaPlus:
    def test_persistence_counts(self):
        s = bool_sig("TTTFF")
        assert theta_plus(parse_stl(P), s, 0) == 2
        assert theta_plus(parse_stl(P), s, 2) == 0
        assert theta_plus(parse_stl(P), s, 3) == -1

    def test_negated_atom_flips_reference(self):
        s = bool_sig("FFT")
        assert theta_plus(parse_stl(f"not {P}"), s, 0) == 1
        assert theta_plus(parse_stl(P), s, 0) == -1

    def test_only_literals(self):
        with pytest.raises(ValueError, match="atom or a negated atom"):
            theta_plus(parse_stl(f"G[0,1] {P}"), bool_sig("TT"), 0)

    def test_end_of_trace_yields_zero(self):
        s = bool_sig("TT")
        assert theta_plus(parse_stl(P), s, 1) == 0

    def test_cannot_distinguish_flip_directions(self):
        # the corner case that motivates t_rec: both signals score 0 at 0
        xi1 = bool_sig("TF")
        xi2 = bool_sig("FT")
        p = parse_stl(P)
        assert theta_plus(p, xi1, 0) == 0
        assert theta_plus(p, xi2, 0) == 0
