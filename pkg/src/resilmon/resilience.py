"""Set-valued resilience semantics over resiliency formulas.

A resiliency atom R[alpha,beta](phi) evaluated at time t yields one
integer pair: (alpha - t_rec, t_dur - beta), where t_rec is how long phi
takes to become true from t and t_dur is how long it then stays true.
The first component is the margin on recovering in time, the second the
margin on staying recovered long enough.

Composite formulas yield *sets* of pairs, because recoverability and
durability pull in different directions and a single scalar cannot rank,
say, (2,5) against (3,3).  Pairs are compared by resilience dominance:
first on the sum of their component signs (a pair that wins on both
margins beats any mixed pair, which beats any pair losing on both), and
inside an equal sign tier by Pareto dominance.  Conjunction and Always
keep the worst non-dominated front of the operand union, disjunction and
Eventually the best, Until combines both per witness offset.  Every
result is a non-empty mutually non-dominated set, and the sign of its
members decides Boolean satisfaction whenever it is not mixed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Optional

from .errors import EvaluationError
from .formula import (
    RAtom,
    SrsAlways,
    SrsAnd,
    SrsEventually,
    SrsFormula,
    SrsNot,
    SrsOr,
    SrsUntil,
    StlFormula,
    horizon,
)
from .stl_semantics import SatTable, _check_time, check_reach
from .trace import Signal, extend


class ResPair(NamedTuple):
    """One (recoverability margin, durability margin) outcome, in steps."""

    rec: int
    dur: int

    def negated(self) -> "ResPair":
        return ResPair(-self.rec, -self.dur)


class DomRelation(Enum):
    SUCC = "succ"
    PREC = "prec"
    NON_DOMINATED = "non_dominated"


class Verdict(Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    BOUNDARY = "Boundary"


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def sign_level(pair: ResPair) -> int:
    """Sum of component signs: the coarse tier compared before Pareto."""
    return _sign(pair.rec) + _sign(pair.dur)


def pareto_dominates(x: ResPair, y: ResPair) -> bool:
    """Componentwise >= with at least one component strictly greater."""
    return x.rec >= y.rec and x.dur >= y.dur and x != y


def compare(x: ResPair, y: ResPair) -> DomRelation:
    """Resilience dominance: sign tiers first, Pareto inside a tier.

    Exactly one of SUCC (x strictly more resilient), PREC, NON_DOMINATED
    holds; comparing a pair with itself gives NON_DOMINATED.
    """
    sx, sy = sign_level(x), sign_level(y)
    if sx != sy:
        return DomRelation.SUCC if sx > sy else DomRelation.PREC
    if pareto_dominates(x, y):
        return DomRelation.SUCC
    if pareto_dominates(y, x):
        return DomRelation.PREC
    return DomRelation.NON_DOMINATED


def _as_pair(p) -> ResPair:
    return ResPair(int(p[0]), int(p[1]))


class ResSet:
    """Non-empty set of mutually non-dominated resilience pairs."""

    __slots__ = ("_pairs",)

    def __init__(self, pairs: Iterable):
        items = frozenset(_as_pair(p) for p in pairs)
        if not items:
            raise ValueError("a resilience set cannot be empty")
        ordered = sorted(items)
        for i, x in enumerate(ordered):
            for y in ordered[i + 1:]:
                if compare(x, y) is not DomRelation.NON_DOMINATED:
                    raise ValueError(
                        f"pairs {tuple(x)} and {tuple(y)} are not mutually "
                        "non-dominated"
                    )
        self._pairs = items

    @property
    def pairs(self) -> frozenset:
        return self._pairs

    def sorted(self) -> list[ResPair]:
        return sorted(self._pairs)

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self._pairs)

    def __contains__(self, item) -> bool:
        try:
            return _as_pair(item) in self._pairs
        except (TypeError, IndexError, ValueError):
            return False

    def __eq__(self, other) -> bool:
        if isinstance(other, ResSet):
            return self._pairs == other._pairs
        if isinstance(other, (set, frozenset)):
            return self._pairs == {_as_pair(p) for p in other}
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._pairs)

    def __repr__(self) -> str:
        inner = ", ".join(f"({p.rec},{p.dur})" for p in self.sorted())
        return f"ResSet({{{inner}}})"


def _front_pairs(pairs: Iterable[ResPair], maximize: bool) -> list[ResPair]:
    """Non-dominated subset of `pairs` (deduplicated).

    Only the best (worst) sign tier can survive; inside the tier a single
    sorted sweep keeps the Pareto front.
    """
    pool = set(pairs)
    if not pool:
        raise ValueError("cannot take the front of an empty pair set")
    if maximize:
        tier_level = max(map(sign_level, pool))
        tier = sorted(
            (p for p in pool if sign_level(p) == tier_level),
            key=lambda p: (-p.rec, -p.dur),
        )
        front = []
        best = None
        for p in tier:
            if best is None or p.dur > best:
                front.append(p)
                best = p.dur
        return front
    flipped = _front_pairs((p.negated() for p in pool), maximize=True)
    return [p.negated() for p in flipped]


def max_re(pairs: Iterable) -> ResSet:
    """Most-resilient subset: the pairs no other pair strictly beats."""
    return ResSet(_front_pairs([_as_pair(p) for p in pairs], maximize=True))


def min_re(pairs: Iterable) -> ResSet:
    """Least-resilient subset: the pairs that strictly beat no other pair."""
    return ResSet(_front_pairs([_as_pair(p) for p in pairs], maximize=False))


# ---------------------------------------------------------------------------
# Recovery and durability times


def _t_rec(table: SatTable, phi: StlFormula, t: int) -> int:
    n = table.signal.length
    first = table.next_true(phi)[t]
    return int(min(first - t, n - t))


def _t_dur(table: SatTable, phi: StlFormula, t_prime: int) -> int:
    n = table.signal.length
    first = table.next_false(phi)[t_prime]
    return int(min(first - t_prime, n - t_prime))


def t_rec(phi: StlFormula, signal: Signal, t: int) -> int:
    """Steps from t until phi first holds, capped at the end of the trace.

    The cap means a formula that never recovers scores the remaining
    trace length, and evaluation at the very last step scores 0 no
    matter what; steps past the end read the terminal sample.
    """
    t = _check_time(signal, t)
    return _t_rec(SatTable(signal), phi, t)


def t_dur(phi: StlFormula, signal: Signal, t: int) -> int:
    """Steps phi stays true from its first recovery at or after t, capped
    at the end of the trace."""
    t = _check_time(signal, t)
    table = SatTable(signal)
    t_prime = t + _t_rec(table, phi, t)
    return _t_dur(table, phi, t_prime)


def resilience_horizon(psi: SrsFormula) -> int:
    """Steps past t the signal must cover for an exact set-valued result.

    This can exceed the Boolean horizon by one: an atom whose body is
    propositional decides satisfaction from the recovery window alone,
    but measuring durability *through* the window's last step needs the
    step after it in the domain, or the end-of-trace cap floors t_dur at
    0 and can flip a satisfied atom's verdict to Negative.
    """
    if isinstance(psi, RAtom):
        return psi.alpha + (psi.beta - 1) + max(1, horizon(psi.body))
    if isinstance(psi, SrsNot):
        return resilience_horizon(psi.child)
    if isinstance(psi, (SrsAnd, SrsOr)):
        return max(resilience_horizon(psi.left), resilience_horizon(psi.right))
    if isinstance(psi, SrsUntil):
        return psi.interval.hi + max(
            resilience_horizon(psi.left), resilience_horizon(psi.right)
        )
    if isinstance(psi, (SrsAlways, SrsEventually)):
        return psi.interval.hi + resilience_horizon(psi.child)
    raise EvaluationError(f"cannot evaluate non-resiliency node {psi!r}")


# ---------------------------------------------------------------------------
# Set-valued evaluation


@dataclass(frozen=True)
class Episode:
    """Provenance of one reported pair: which resiliency atom produced it,
    at which evaluation time, and whether it passed an odd number of
    negations on the way up (in which case the reported pair is the
    negation of the atom's own pair)."""

    pair: ResPair
    atom: RAtom
    time: int
    negated: bool


@dataclass(frozen=True)
class Evaluation:
    """Result of evaluating a resiliency formula at one time."""

    value: ResSet
    verdict: Verdict
    episodes: tuple[Episode, ...]
    extended_from: Optional[int]
    signal_length: int


# Internally each candidate pair carries its origin: (atom, time, negated).
_Origin = tuple[RAtom, int, bool]


def _merge(into: dict[ResPair, _Origin], src: dict[ResPair, _Origin]):
    # Duplicate pairs keep the origin with the earliest atom time.
    for pair, origin in src.items():
        cur = into.get(pair)
        if cur is None or origin[1] < cur[1]:
            into[pair] = origin


def _front(entries: dict[ResPair, _Origin], maximize: bool) -> dict[ResPair, _Origin]:
    if len(entries) <= 1:
        return entries
    keep = _front_pairs(entries.keys(), maximize)
    if len(keep) == len(entries):
        return entries
    return {p: entries[p] for p in keep}


class _Evaluator:
    """Bottom-up ReSV computation with per-(subformula, time) memoization.

    Union-then-front steps are interleaved: merging each contribution and
    immediately re-taking the front is equivalent to fronting the full
    union once, because a pair outside the running front is dominated by
    a member that either survives to the end or is replaced by something
    dominating it too.
    """

    def __init__(self, table: SatTable):
        self.table = table
        self.memo: dict[tuple[SrsFormula, int], dict[ResPair, _Origin]] = {}

    def eval(self, psi: SrsFormula, t: int) -> dict[ResPair, _Origin]:
        key = (psi, t)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        result = self._compute(psi, t)
        self.memo[key] = result
        return result

    def _compute(self, psi: SrsFormula, t: int) -> dict[ResPair, _Origin]:
        if isinstance(psi, RAtom):
            rec = _t_rec(self.table, psi.body, t)
            dur = _t_dur(self.table, psi.body, t + rec)
            pair = ResPair(psi.alpha - rec, dur - psi.beta)
            return {pair: (psi, t, False)}
        if isinstance(psi, SrsNot):
            return {
                pair.negated(): (atom, time, not neg)
                for pair, (atom, time, neg) in self.eval(psi.child, t).items()
            }
        if isinstance(psi, (SrsAnd, SrsOr)):
            merged = dict(self.eval(psi.left, t))
            _merge(merged, self.eval(psi.right, t))
            return _front(merged, maximize=isinstance(psi, SrsOr))
        if isinstance(psi, (SrsAlways, SrsEventually)):
            maximize = isinstance(psi, SrsEventually)
            acc: dict[ResPair, _Origin] = {}
            for u in range(t + psi.interval.lo, t + psi.interval.hi + 1):
                _merge(acc, self.eval(psi.child, u))
                acc = _front(acc, maximize)
            return acc
        if isinstance(psi, SrsUntil):
            lo, hi = psi.interval.lo, psi.interval.hi
            terms: dict[ResPair, _Origin] = {}
            prefix: dict[ResPair, _Origin] = {}
            for d in range(hi + 1):
                if d >= lo:
                    # Witness at offset d: the right operand there, the
                    # worst of the left operand on the way (none at d=0).
                    entry = dict(self.eval(psi.right, t + d))
                    _merge(entry, prefix)
                    entry = _front(entry, maximize=False)
                    _merge(terms, entry)
                    terms = _front(terms, maximize=True)
                if d < hi:
                    _merge(prefix, self.eval(psi.left, t + d))
                    prefix = _front(prefix, maximize=False)
            return terms
        raise EvaluationError(f"cannot evaluate non-resiliency node {psi!r}")


def evaluate(
    psi: SrsFormula, signal: Signal, t: int, *, auto_extend: bool = True
) -> Evaluation:
    """Evaluate a resiliency formula and report value, verdict, and the
    atom episodes behind each reported pair.

    When the required length (resilience_horizon past t) runs past the
    end of the trace the signal is physically extended with its terminal
    sample first (warning), so every recovery/durability cap is measured
    on the extended length.
    """
    t = _check_time(signal, t)
    need = t + resilience_horizon(psi)
    check_reach(psi, signal, t, auto_extend, need=need)
    extended_from: Optional[int] = None
    work = signal
    if need > signal.length:
        extended_from = signal.length
        work = extend(signal, need)
    entries = _Evaluator(SatTable(work)).eval(psi, t)
    value = ResSet(entries.keys())
    episodes = tuple(Episode(p, *entries[p]) for p in value.sorted())
    return Evaluation(
        value=value,
        verdict=classify(value),
        episodes=episodes,
        extended_from=extended_from,
        signal_length=work.length,
    )


def resv(psi: SrsFormula, signal: Signal, t: int, *, auto_extend: bool = True) -> ResSet:
    """The resilience satisfaction value of psi at step t."""
    return evaluate(psi, signal, t, auto_extend=auto_extend).value


def classify(pairs: ResSet) -> Verdict:
    """Boolean verdict read off a resilience set by comparing to (0,0).

    All members of a valid set share one sign tier, so the verdict is
    consistent: Positive (every member strictly beats the zero pair)
    certifies satisfaction, Negative certifies violation, Boundary
    (mixed-sign or zero pairs) leaves the Boolean verdict open.
    """
    zero = ResPair(0, 0)
    rels = {compare(p, zero) for p in pairs}
    if len(rels) != 1:
        raise ValueError(f"inconsistent verdicts {rels} in {pairs!r}")
    rel = rels.pop()
    if rel is DomRelation.SUCC:
        return Verdict.POSITIVE
    if rel is DomRelation.PREC:
        return Verdict.NEGATIVE
    return Verdict.BOUNDARY


def atom_series(
    ratom: RAtom,
    signal: Signal,
    window: tuple[int, int],
    *,
    auto_extend: bool = True,
) -> list[tuple[int, ResPair]]:
    """Pairs of one resiliency atom at every evaluation time in `window`.

    All times are evaluated on one shared signal, extended once for the
    window end, exactly as a temporal operator spanning the window would
    see them.
    """
    lo, hi = window
    if not (isinstance(lo, int) and isinstance(hi, int)) or lo < 0 or lo > hi:
        raise ValueError(f"window must be integers 0 <= lo <= hi, got {window}")
    if not isinstance(ratom, RAtom):
        raise ValueError("atom_series needs a resiliency atom R[alpha,beta](phi)")
    need = hi + resilience_horizon(ratom)
    check_reach(ratom, signal, hi, auto_extend, need=need)
    work = signal
    if need > signal.length:
        work = extend(signal, need)
    evaluator = _Evaluator(SatTable(work))
    out: list[tuple[int, ResPair]] = []
    for u in range(lo, hi + 1):
        (pair,) = evaluator.eval(ratom, u).keys()
        out.append((u, pair))
    return out
