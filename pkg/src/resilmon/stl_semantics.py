"""Boolean satisfaction, robustness, and time robustness for STL.

Evaluation works on whole signals at once.  For each subformula the
engine computes a Boolean vector over every step 0..N of the signal;
temporal operators then reduce to index arithmetic on "next true" /
"next false" lookups, so a single pass is linear in the signal length
per subformula.

Reads past the end of the signal follow the terminal-value convention:
the signal is treated as if it kept its last sample forever.  Because
the virtual tail is constant, satisfaction of any formula is constant
from step N on, which is why clamping an index to N is exact.  Whether
such reads are allowed is decided once per evaluation from the formula
horizon (`auto_extend`); the engine itself never needs a physically
extended signal.
"""

from __future__ import annotations

import operator
import warnings
from typing import Optional, Union

import numpy as np

from .errors import EvaluationError, ExtensionWarning
from .formula import (
    Always,
    And,
    Atom,
    Eventually,
    Not,
    Or,
    StlFormula,
    Until,
    horizon,
)
from .trace import Signal

# Sentinel index meaning "never": larger than any reachable step.
_NEVER = np.int64(2**62)


def _check_time(signal: Signal, t) -> int:
    try:
        t = operator.index(t)
    except TypeError:
        raise EvaluationError(f"time must be an integer step, got {t!r}") from None
    if not 0 <= t <= signal.length:
        raise EvaluationError(
            f"time {t} outside signal domain 0..{signal.length}"
        )
    return t


def check_reach(formula, signal: Signal, t: int, auto_extend: bool,
                need: Optional[int] = None):
    """Warn or fail when evaluating `formula` at t can read past the signal.

    `need` overrides the default requirement t + horizon for semantics
    that must measure slightly past the Boolean horizon."""
    if need is None:
        need = t + horizon(formula)
    if need <= signal.length:
        return
    if not auto_extend:
        raise EvaluationError(
            f"signal too short: evaluation at t={t} can reach step {need} "
            f"but the signal ends at {signal.length} (auto-extension disabled)"
        )
    warnings.warn(
        ExtensionWarning(
            f"evaluation at t={t} can reach step {need} beyond the end of the "
            f"signal ({signal.length}); the terminal sample is repeated, which "
            "may overestimate resilience"
        ),
        stacklevel=3,
    )


class SatTable:
    """Per-signal cache of satisfaction vectors for STL subformulas.

    `vector(phi)[u]` is sat(phi, signal, u) for 0 <= u <= N under the
    terminal-value convention.  `next_true`/`next_false` give, for each
    u, the first step >= u at which phi is true/false (virtually never:
    a value >= _NEVER//2 means never, even on the infinite tail).
    """

    def __init__(self, signal: Signal):
        self.signal = signal
        self.n = signal.length
        self._vectors: dict[StlFormula, np.ndarray] = {}
        self._next: dict[tuple[StlFormula, bool], np.ndarray] = {}
        self._steps = np.arange(self.n + 1, dtype=np.int64)

    def vector(self, phi: StlFormula) -> np.ndarray:
        vec = self._vectors.get(phi)
        if vec is None:
            vec = self._compute(phi)
            vec.setflags(write=False)
            self._vectors[phi] = vec
        return vec

    def value(self, phi: StlFormula, u: int) -> bool:
        return bool(self.vector(phi)[min(u, self.n)])

    def next_index(self, phi: StlFormula, want: bool) -> np.ndarray:
        key = (phi, want)
        arr = self._next.get(key)
        if arr is None:
            vec = self.vector(phi)
            pos = np.where(vec == want, self._steps, _NEVER)
            arr = np.minimum.accumulate(pos[::-1])[::-1]
            arr.setflags(write=False)
            self._next[key] = arr
        return arr

    def next_true(self, phi: StlFormula) -> np.ndarray:
        return self.next_index(phi, True)

    def next_false(self, phi: StlFormula) -> np.ndarray:
        return self.next_index(phi, False)

    # -- helpers over the virtual (terminal-value) extension

    def _first_at_or_after(self, phi: StlFormula, start: np.ndarray, want: bool):
        """First step >= start[i] where phi has the wanted value, reading
        the constant virtual tail past N.  `start` may exceed N."""
        nxt = self.next_index(phi, want)
        tail_matches = self.vector(phi)[self.n] == want
        beyond = start if tail_matches else np.full_like(start, _NEVER)
        return np.where(start <= self.n, nxt[np.minimum(start, self.n)], beyond)

    def _compute(self, phi: StlFormula) -> np.ndarray:
        n = self.n
        if isinstance(phi, Atom):
            value = np.full(n + 1, phi.expr.constant, dtype=float)
            for coef, name in phi.expr.terms:
                try:
                    value = value + coef * self.signal.column(name)
                except KeyError:
                    raise EvaluationError(
                        f"unknown channel {name!r}; trace has "
                        f"{', '.join(self.signal.channels)}"
                    ) from None
            if phi.op == ">=":
                return value >= phi.const
            return value <= phi.const
        if isinstance(phi, Not):
            return ~self.vector(phi.child)
        if isinstance(phi, And):
            return self.vector(phi.left) & self.vector(phi.right)
        if isinstance(phi, Or):
            return self.vector(phi.left) | self.vector(phi.right)
        if isinstance(phi, Always):
            hi = phi.interval.hi if phi.closed else phi.interval.hi - 1
            lo = phi.interval.lo
            if hi < lo:
                return np.ones(n + 1, dtype=bool)
            first_false = self._first_at_or_after(phi.child, self._steps + lo, False)
            return first_false > self._steps + hi
        if isinstance(phi, Eventually):
            lo, hi = phi.interval.lo, phi.interval.hi
            first_true = self._first_at_or_after(phi.child, self._steps + lo, True)
            return first_true <= self._steps + hi
        if isinstance(phi, Until):
            lo, hi = phi.interval.lo, phi.interval.hi
            # Longest stretch of the left operand starting at each step,
            # capped at hi (the largest useful witness offset).
            run = np.minimum(self.next_false(phi.left) - self._steps, hi)
            first_right = self._first_at_or_after(phi.right, self._steps + lo, True)
            return first_right <= self._steps + run
        raise EvaluationError(f"cannot evaluate non-STL node {phi!r}")


def sat(phi: StlFormula, signal: Signal, t: int, *, auto_extend: bool = True) -> bool:
    """Boolean satisfaction of phi at step t.

    When t + horizon(phi) runs past the end of the signal the terminal
    sample is repeated (with an ExtensionWarning); pass auto_extend=False
    to make that an error instead.
    """
    t = _check_time(signal, t)
    check_reach(phi, signal, t, auto_extend)
    return bool(SatTable(signal).vector(phi)[t])


def _rho_vector(phi: StlFormula, signal: Signal, cache: dict) -> np.ndarray:
    got = cache.get(phi)
    if got is not None:
        return got
    n = signal.length
    if isinstance(phi, Atom):
        value = np.full(n + 1, phi.expr.constant, dtype=float)
        for coef, name in phi.expr.terms:
            try:
                value = value + coef * signal.column(name)
            except KeyError:
                raise EvaluationError(
                    f"unknown channel {name!r}; trace has "
                    f"{', '.join(signal.channels)}"
                ) from None
        out = value - phi.const if phi.op == ">=" else phi.const - value
    elif isinstance(phi, Not):
        out = -_rho_vector(phi.child, signal, cache)
    elif isinstance(phi, And):
        out = np.minimum(
            _rho_vector(phi.left, signal, cache), _rho_vector(phi.right, signal, cache)
        )
    elif isinstance(phi, Or):
        out = np.maximum(
            _rho_vector(phi.left, signal, cache), _rho_vector(phi.right, signal, cache)
        )
    elif isinstance(phi, (Always, Eventually)):
        minimize = isinstance(phi, Always)
        hi = phi.interval.hi if (not minimize or phi.closed) else phi.interval.hi - 1
        lo = phi.interval.lo
        if hi < lo:
            out = np.full(n + 1, np.inf if minimize else -np.inf)
        else:
            child = _rho_vector(phi.child, signal, cache)
            ext = np.concatenate([child, np.full(hi, child[n])])
            win = np.lib.stride_tricks.sliding_window_view(ext, hi - lo + 1)
            agg = win.min(axis=1) if minimize else win.max(axis=1)
            out = agg[lo:lo + n + 1].copy()
    elif isinstance(phi, Until):
        lo, hi = phi.interval.lo, phi.interval.hi
        left = _rho_vector(phi.left, signal, cache)
        right = _rho_vector(phi.right, signal, cache)
        ext_l = np.concatenate([left, np.full(hi, left[n])])
        ext_r = np.concatenate([right, np.full(hi, right[n])])
        out = np.empty(n + 1)
        for t in range(n + 1):
            best = -np.inf
            prefix = np.inf
            for d in range(hi + 1):
                if d >= 1:
                    prefix = min(prefix, ext_l[t + d - 1])
                if d >= lo:
                    best = max(best, min(ext_r[t + d], prefix))
            out[t] = best
    else:
        raise EvaluationError(f"cannot evaluate non-STL node {phi!r}")
    cache[phi] = out
    return out


def rho(phi: StlFormula, signal: Signal, t: int, *, auto_extend: bool = True) -> float:
    """Robustness degree of phi at step t: how far (in signal units) the
    signal is from flipping the verdict.  Positive implies satisfaction."""
    t = _check_time(signal, t)
    check_reach(phi, signal, t, auto_extend)
    return float(_rho_vector(phi, signal, {})[t])


def _is_literal(phi) -> bool:
    return isinstance(phi, Atom) or (isinstance(phi, Not) and isinstance(phi.child, Atom))


def theta_plus(literal: Union[Atom, Not], signal: Signal, t: int) -> int:
    """Right time robustness of an atomic predicate.

    Signed number of additional steps (bounded by the end of the trace)
    over which the truth value at t persists: positive when the literal
    holds at t, negative when it does not.  Note the magnitude is 0 both
    when the value flips at t+1 and when t is the last step, so this
    measure cannot distinguish imminent recovery from imminent failure.
    """
    if not _is_literal(literal):
        raise ValueError(
            "theta_plus is defined for an atom or a negated atom, "
            f"got {type(literal).__name__}"
        )
    t = _check_time(signal, t)
    vec = SatTable(signal).vector(literal)
    d = 0
    while t + d + 1 <= signal.length and vec[t + d + 1] == vec[t]:
        d += 1
    return d if vec[t] else -d
