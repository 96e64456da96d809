"""Independent reference implementations and randomized self-checks.

Everything in this module is deliberately naive: direct recursion over
the definitions with no memoization, no incremental pruning, and its own
literal dominance test.  The test suite uses it to cross-check the
optimized engine; if the two routes ever disagree, one of them is wrong
in a way golden examples alone would not catch.
"""

from __future__ import annotations

import time
import warnings

import numpy as np

from .errors import ResilmonWarning
from .formula import (
    AffineExpr,
    Always,
    And,
    Atom,
    Eventually,
    Interval,
    Not,
    Or,
    RAtom,
    SrsAlways,
    SrsAnd,
    SrsEventually,
    SrsFormula,
    SrsNot,
    SrsOr,
    SrsUntil,
    StlFormula,
    Until,
    horizon,
    srs_to_stl,
    srs_to_text,
)
from .resilience import ResPair, ResSet, Verdict, classify, resv
from .stl_semantics import sat
from .trace import Signal, extend


# ---------------------------------------------------------------------------
# Naive Boolean evaluation (terminal-value reads past the end)


def _sample(signal: Signal, u: int) -> np.ndarray:
    return signal.samples[min(u, signal.length)]


def naive_sat(phi: StlFormula, signal: Signal, t: int) -> bool:
    """Textbook recursive satisfaction; quadratic and proud of it."""
    if isinstance(phi, Atom):
        row = _sample(signal, t)
        value = phi.expr.constant
        for coef, name in phi.expr.terms:
            value += coef * row[signal.channels.index(name)]
        return value >= phi.const if phi.op == ">=" else value <= phi.const
    if isinstance(phi, Not):
        return not naive_sat(phi.child, signal, t)
    if isinstance(phi, And):
        return naive_sat(phi.left, signal, t) and naive_sat(phi.right, signal, t)
    if isinstance(phi, Or):
        return naive_sat(phi.left, signal, t) or naive_sat(phi.right, signal, t)
    if isinstance(phi, Always):
        hi = phi.interval.hi if phi.closed else phi.interval.hi - 1
        return all(
            naive_sat(phi.child, signal, t + d) for d in range(phi.interval.lo, hi + 1)
        )
    if isinstance(phi, Eventually):
        return any(
            naive_sat(phi.child, signal, t + d) for d in phi.interval.offsets()
        )
    if isinstance(phi, Until):
        return any(
            naive_sat(phi.right, signal, t + d)
            and all(naive_sat(phi.left, signal, t + k) for k in range(d))
            for d in phi.interval.offsets()
        )
    raise TypeError(f"not an STL formula: {phi!r}")


def naive_t_rec(phi: StlFormula, signal: Signal, t: int) -> int:
    for d in range(signal.length - t + 1):
        if naive_sat(phi, signal, t + d):
            return d
    return signal.length - t


def naive_t_dur(phi: StlFormula, signal: Signal, t: int) -> int:
    t_prime = t + naive_t_rec(phi, signal, t)
    for d in range(signal.length - t_prime + 1):
        if not naive_sat(phi, signal, t_prime + d):
            return d
    return signal.length - t_prime


# ---------------------------------------------------------------------------
# Naive dominance and fronts (independent of resilience.compare)


def _naive_succ(x: ResPair, y: ResPair) -> bool:
    sx = (x.rec > 0) - (x.rec < 0) + (x.dur > 0) - (x.dur < 0)
    sy = (y.rec > 0) - (y.rec < 0) + (y.dur > 0) - (y.dur < 0)
    if sx != sy:
        return sx > sy
    return x.rec >= y.rec and x.dur >= y.dur and x != y


def naive_max_front(pairs) -> list[ResPair]:
    uniq = sorted(set(pairs))
    return [x for x in uniq if not any(_naive_succ(y, x) for y in uniq)]


def naive_min_front(pairs) -> list[ResPair]:
    uniq = sorted(set(pairs))
    return [x for x in uniq if not any(_naive_succ(x, y) for y in uniq)]


def _naive_resv(psi: SrsFormula, signal: Signal, t: int) -> list[ResPair]:
    if isinstance(psi, RAtom):
        rec = naive_t_rec(psi.body, signal, t)
        dur = naive_t_dur(psi.body, signal, t)
        return [ResPair(psi.alpha - rec, dur - psi.beta)]
    if isinstance(psi, SrsNot):
        return [ResPair(-p.rec, -p.dur) for p in _naive_resv(psi.child, signal, t)]
    if isinstance(psi, SrsAnd):
        union = _naive_resv(psi.left, signal, t) + _naive_resv(psi.right, signal, t)
        return naive_min_front(union)
    if isinstance(psi, SrsOr):
        union = _naive_resv(psi.left, signal, t) + _naive_resv(psi.right, signal, t)
        return naive_max_front(union)
    if isinstance(psi, SrsAlways):
        union: list[ResPair] = []
        for d in psi.interval.offsets():
            union.extend(_naive_resv(psi.child, signal, t + d))
        return naive_min_front(union)
    if isinstance(psi, SrsEventually):
        union = []
        for d in psi.interval.offsets():
            union.extend(_naive_resv(psi.child, signal, t + d))
        return naive_max_front(union)
    if isinstance(psi, SrsUntil):
        terms: list[ResPair] = []
        for d in psi.interval.offsets():
            parts = list(_naive_resv(psi.right, signal, t + d))
            if d > 0:
                inner: list[ResPair] = []
                for k in range(d):
                    inner.extend(_naive_resv(psi.left, signal, t + k))
                parts.extend(naive_min_front(inner))
            terms.extend(naive_min_front(parts))
        return naive_max_front(terms)
    raise TypeError(f"not a resiliency formula: {psi!r}")


def _naive_required(psi: SrsFormula) -> int:
    """Steps past t the measurements can touch, derived afresh from the
    definitions: an atom reads phi up to alpha + (beta-1) + horizon(phi)
    steps out, and its durability cap compares against index
    t + alpha + beta; temporal operators shift by their upper bound."""
    if isinstance(psi, RAtom):
        reads = psi.alpha + (psi.beta - 1) + horizon(psi.body)
        cap = psi.alpha + psi.beta
        return max(reads, cap)
    if isinstance(psi, SrsNot):
        return _naive_required(psi.child)
    if isinstance(psi, (SrsAnd, SrsOr)):
        return max(_naive_required(psi.left), _naive_required(psi.right))
    if isinstance(psi, SrsUntil):
        return psi.interval.hi + max(
            _naive_required(psi.left), _naive_required(psi.right)
        )
    return psi.interval.hi + _naive_required(psi.child)


def naive_resv(psi: SrsFormula, signal: Signal, t: int) -> ResSet:
    """Reference ReSV: full unions, one front per node, no memoization."""
    if not 0 <= t <= signal.length:
        raise ValueError(f"time {t} outside signal domain 0..{signal.length}")
    need = t + _naive_required(psi)
    if need > signal.length:
        signal = extend(signal, need)
    return ResSet(_naive_resv(psi, signal, t))


# ---------------------------------------------------------------------------
# Golden fixture


# Truth pattern of x > 0 per step 0..25.  Chosen so the minimum front of
# the R[1,2] atom over evaluation times 0..20 is exactly
# {(-1,2), (1,-1), (-2,3)}, first reached at times 0, 5, 13.
_GOLDEN_PATTERN = "FFTTTTFTTTTTTFFFTTTTTFFFFF"


def golden_recovery_signal() -> Signal:
    """Length-25 single-channel trace with three distinct recovery episodes."""
    values = [[1.0 if c == "T" else -1.0] for c in _GOLDEN_PATTERN]
    return Signal(("x",), np.array(values), dt=1.0)


def golden_atom_body() -> Atom:
    """The predicate the golden trace toggles: x >= 0 (x is never 0)."""
    return Atom(AffineExpr(((1.0, "x"),)), ">=", 0.0)


# ---------------------------------------------------------------------------
# Random instance generators


def _random_signal(rng: np.random.Generator, length: int, channels) -> Signal:
    rows = length + 1
    data = np.empty((rows, len(channels)))
    for j in range(len(channels)):
        if rng.random() < 0.5:
            # Integer-valued channels make ties with thresholds common,
            # which is where boundary verdicts live.
            data[:, j] = rng.integers(-2, 3, size=rows).astype(float)
        else:
            data[:, j] = np.round(rng.uniform(-2.5, 2.5, size=rows), 2)
    return Signal(tuple(channels), data)


def random_signal(length: int, channels=("x", "y"), seed: int = 0) -> Signal:
    """Reproducible random signal with the given length (steps)."""
    if length < 1:
        raise ValueError("length must be at least 1")
    return _random_signal(np.random.default_rng(seed), length, channels)


def _random_interval(rng: np.random.Generator) -> Interval:
    lo = int(rng.integers(0, 3))
    return Interval(lo, lo + int(rng.integers(0, 3)))


def _random_atom(rng: np.random.Generator, channels) -> Atom:
    name = channels[int(rng.integers(len(channels)))]
    op = ">=" if rng.random() < 0.5 else "<="
    if rng.random() < 0.7:
        const = float(rng.integers(-2, 3))
    else:
        const = round(float(rng.uniform(-2.0, 2.0)), 1)
    return Atom(AffineExpr(((1.0, name),)), op, const)


def _random_stl(rng: np.random.Generator, depth: int, channels) -> StlFormula:
    if depth <= 1 or rng.random() < 0.3:
        return _random_atom(rng, channels)
    kind = rng.choice(["not", "and", "or", "G", "Ghalf", "F", "U"])
    if kind == "not":
        return Not(_random_stl(rng, depth - 1, channels))
    if kind == "and":
        return And(_random_stl(rng, depth - 1, channels),
                   _random_stl(rng, depth - 1, channels))
    if kind == "or":
        return Or(_random_stl(rng, depth - 1, channels),
                  _random_stl(rng, depth - 1, channels))
    if kind == "G":
        return Always(_random_interval(rng), _random_stl(rng, depth - 1, channels))
    if kind == "Ghalf":
        ival = _random_interval(rng)
        if ival.lo == ival.hi:
            ival = Interval(ival.lo, ival.hi + 1)
        return Always(ival, _random_stl(rng, depth - 1, channels), closed=False)
    if kind == "F":
        return Eventually(_random_interval(rng), _random_stl(rng, depth - 1, channels))
    return Until(_random_interval(rng),
                 _random_stl(rng, depth - 1, channels),
                 _random_stl(rng, depth - 1, channels))


def _random_srs(rng: np.random.Generator, depth: int, channels) -> SrsFormula:
    if depth <= 1 or rng.random() < 0.35:
        alpha = int(rng.integers(0, 5))
        beta = int(rng.integers(1, 5))
        body = _random_stl(rng, int(rng.integers(1, 3)), channels)
        return RAtom(alpha, beta, body)
    kind = rng.choice(["not", "and", "or", "G", "F", "U"])
    if kind == "not":
        return SrsNot(_random_srs(rng, depth - 1, channels))
    if kind == "and":
        return SrsAnd(_random_srs(rng, depth - 1, channels),
                      _random_srs(rng, depth - 1, channels))
    if kind == "or":
        return SrsOr(_random_srs(rng, depth - 1, channels),
                     _random_srs(rng, depth - 1, channels))
    if kind == "G":
        return SrsAlways(_random_interval(rng), _random_srs(rng, depth - 1, channels))
    if kind == "F":
        return SrsEventually(_random_interval(rng),
                             _random_srs(rng, depth - 1, channels))
    return SrsUntil(_random_interval(rng),
                    _random_srs(rng, depth - 1, channels),
                    _random_srs(rng, depth - 1, channels))


def random_srs(depth: int, seed: int = 0, channels=("x", "y")) -> SrsFormula:
    """Reproducible random resiliency formula of at most the given depth."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    return _random_srs(np.random.default_rng(seed), depth, channels)


def random_instance(
    seed: int, index: int, *, max_depth: int = 3, max_length: int = 30,
    channels=("x", "y"),
) -> tuple[SrsFormula, Signal, int]:
    """One (formula, signal, time) instance of the randomized corpus."""
    rng = np.random.default_rng([seed, index])
    depth = int(rng.integers(1, max_depth + 1))
    psi = _random_srs(rng, depth, channels)
    length = int(rng.integers(1, max_length + 1))
    sig = _random_signal(rng, length, channels)
    t = int(rng.integers(0, length + 1))
    return psi, sig, t


# ---------------------------------------------------------------------------
# Verdict-vs-satisfaction consistency suite


def _consistency_case(psi: SrsFormula, sig: Signal, t: int) -> tuple[Verdict, bool, bool]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResilmonWarning)
        verdict = classify(resv(psi, sig, t))
        satisfied = sat(srs_to_stl(psi), sig, t)
    consistent = not (
        (verdict is Verdict.POSITIVE and not satisfied)
        or (verdict is Verdict.NEGATIVE and satisfied)
    )
    return verdict, satisfied, consistent


def verdict_consistency_suite(n_cases: int = 1000, seed: int = 0) -> dict:
    """Check on random instances that the sign of the resilience set never
    contradicts Boolean satisfaction of the compiled formula.

    A Positive verdict must coincide with satisfaction and a Negative one
    with violation; Boundary constrains nothing.  Any violation in the
    returned report is an implementation bug, not a property of the
    instance.  Two fixed golden cases are always appended.
    """
    if n_cases < 1:
        raise ValueError("n_cases must be at least 1")
    started = time.perf_counter()
    violations: list[dict] = []
    histogram = {v.value: 0 for v in Verdict}
    satisfied_count = 0
    for i in range(n_cases):
        psi, sig, t = random_instance(seed, i)
        verdict, satisfied, consistent = _consistency_case(psi, sig, t)
        histogram[verdict.value] += 1
        satisfied_count += satisfied
        if not consistent:
            violations.append({
                "case": i,
                "formula": srs_to_text(psi),
                "signal_length": sig.length,
                "time": t,
                "verdict": verdict.value,
                "satisfied": satisfied,
            })

    golden = []
    body = golden_atom_body()
    fixed = [
        ("window-of-recoveries", SrsAlways(Interval(0, 20), RAtom(1, 2, body))),
        ("recovery-of-window", RAtom(1, 2, Always(Interval(0, 20), body))),
    ]
    for name, psi in fixed:
        verdict, satisfied, consistent = _consistency_case(
            psi, golden_recovery_signal(), 0
        )
        golden.append({
            "name": name,
            "formula": srs_to_text(psi),
            "verdict": verdict.value,
            "satisfied": satisfied,
            "consistent": consistent,
        })
        if not consistent:
            violations.append({
                "case": name,
                "formula": srs_to_text(psi),
                "signal_length": 25,
                "time": 0,
                "verdict": verdict.value,
                "satisfied": satisfied,
            })

    return {
        "cases": n_cases,
        "seed": seed,
        "violations": violations,
        "histogram": histogram,
        "satisfied_cases": satisfied_count,
        "golden": golden,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
    }
