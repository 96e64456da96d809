"""HTTP service wrapping the monitoring toolkit.

The real work happens in plain handler functions (`run_monitor`,
`run_pareto`, `run_verify`, `run_flock`) that take and return pydantic
models and raise the package's own errors.  The FastAPI application is
a thin shell that maps those errors onto HTTP responses, so the command
line can call the handlers in process by default and get byte-identical
payloads when pointed at a remote server instead.
"""

from __future__ import annotations

import math
import time
import warnings
from typing import Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .errors import (
    EvaluationError,
    ParseError,
    ResilmonError,
    ResilmonWarning,
    TraceError,
)
from .flockgen import DisturbanceSpec, FlockParams, simulate
from .formula import RAtom, parse_srs, srs_to_text
from .oracle import verdict_consistency_suite
from .resilience import atom_series, evaluate, min_re
from .trace import load_trace, to_csv


def _as_steps(value: float, dt: float, seconds: bool, what: str) -> int:
    """Convert a user-supplied time quantity to an integer step count.

    In seconds mode the value is divided by dt; either way the result
    must land on a whole step, because the semantics is discrete and
    silent rounding would change verdicts.
    """
    scaled = value / dt if seconds else value
    snapped = round(scaled)
    if not math.isclose(scaled, snapped, rel_tol=1e-9, abs_tol=1e-9):
        if seconds:
            raise ParseError(
                f"{what} {value} is not a whole number of steps at dt={dt}"
            )
        raise ParseError(f"{what} must be a whole number of steps, got {value}")
    return int(snapped)


# ---------------------------------------------------------------------------
# Monitor


class MonitorRequest(BaseModel):
    trace_csv: str
    formula: str
    time: float = 0.0
    dt: float = Field(default=1.0, gt=0)
    auto_extend: bool = True
    seconds: bool = False


class PairReport(BaseModel):
    """One reported (recoverability, durability) pair with provenance."""

    rec: int
    dur: int
    rec_seconds: float
    dur_seconds: float
    atom: str
    atom_time: int
    atom_time_seconds: float
    negated: bool


class MonitorReport(BaseModel):
    formula: str
    time: int
    time_seconds: float
    dt: float
    verdict: str
    pairs: list[PairReport]
    extended_from: Optional[int]
    signal_length: int
    warnings: list[str]
    runtime_seconds: float


def run_monitor(req: MonitorRequest) -> MonitorReport:
    started = time.perf_counter()
    t = _as_steps(req.time, req.dt, req.seconds, "evaluation time")
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        signal = load_trace(req.trace_csv.encode("utf-8"), dt=req.dt)
        psi = parse_srs(req.formula, seconds_dt=req.dt if req.seconds else None)
        result = evaluate(psi, signal, t, auto_extend=req.auto_extend)
    notes = [
        str(w.message) for w in caught if issubclass(w.category, ResilmonWarning)
    ]
    pairs = [
        PairReport(
            rec=ep.pair.rec,
            dur=ep.pair.dur,
            rec_seconds=ep.pair.rec * req.dt,
            dur_seconds=ep.pair.dur * req.dt,
            atom=srs_to_text(ep.atom),
            atom_time=ep.time,
            atom_time_seconds=ep.time * req.dt,
            negated=ep.negated,
        )
        for ep in result.episodes
    ]
    return MonitorReport(
        formula=srs_to_text(psi),
        time=t,
        time_seconds=t * req.dt,
        dt=req.dt,
        verdict=result.verdict.value,
        pairs=pairs,
        extended_from=result.extended_from,
        signal_length=result.signal_length,
        warnings=notes,
        runtime_seconds=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Pareto series


class ParetoRequest(BaseModel):
    trace_csv: str
    atom: str
    window: tuple[float, float]
    dt: float = Field(default=1.0, gt=0)
    auto_extend: bool = True
    seconds: bool = False


class ParetoRow(BaseModel):
    time: int
    time_seconds: float
    rec: int
    dur: int
    on_front: bool


class ParetoReport(BaseModel):
    atom: str
    window: tuple[int, int]
    dt: float
    rows: list[ParetoRow]
    runtime_seconds: float


def run_pareto(req: ParetoRequest) -> ParetoReport:
    """Evaluate one resiliency atom across a time window and flag the
    minimum-resilience front.

    Each front pair is flagged at the earliest time that achieves it, so
    the flagged rows list each front member exactly once.
    """
    started = time.perf_counter()
    lo = _as_steps(req.window[0], req.dt, req.seconds, "window start")
    hi = _as_steps(req.window[1], req.dt, req.seconds, "window end")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResilmonWarning)
        signal = load_trace(req.trace_csv.encode("utf-8"), dt=req.dt)
        psi = parse_srs(req.atom, seconds_dt=req.dt if req.seconds else None)
        if not isinstance(psi, RAtom):
            raise ParseError(
                "pareto needs a bare resiliency atom R[a,b](...), got "
                f"'{srs_to_text(psi)}'"
            )
        series = atom_series(psi, signal, (lo, hi), auto_extend=req.auto_extend)
    front = set(min_re(pair for _, pair in series))
    rows: list[ParetoRow] = []
    seen: set = set()
    for u, pair in series:
        flag = pair in front and pair not in seen
        if flag:
            seen.add(pair)
        rows.append(
            ParetoRow(
                time=u,
                time_seconds=u * req.dt,
                rec=pair.rec,
                dur=pair.dur,
                on_front=flag,
            )
        )
    return ParetoReport(
        atom=srs_to_text(psi),
        window=(lo, hi),
        dt=req.dt,
        rows=rows,
        runtime_seconds=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Verification suite


class VerifyRequest(BaseModel):
    cases: int = Field(default=1000, ge=1)
    seed: int = 0


class VerifyViolation(BaseModel):
    case: int | str
    formula: str
    signal_length: int
    time: int
    verdict: str
    satisfied: bool


class GoldenCase(BaseModel):
    name: str
    formula: str
    verdict: str
    satisfied: bool
    consistent: bool


class VerifyReport(BaseModel):
    cases: int
    seed: int
    ok: bool
    violations: list[VerifyViolation]
    histogram: dict[str, int]
    satisfied_cases: int
    golden: list[GoldenCase]
    elapsed_seconds: float


def run_verify(req: VerifyRequest) -> VerifyReport:
    report = verdict_consistency_suite(n_cases=req.cases, seed=req.seed)
    return VerifyReport(ok=not report["violations"], **report)


# ---------------------------------------------------------------------------
# Flock trace generation


class DisturbanceRequest(BaseModel):
    """Disturbance schedule; the default mirrors the stock scenario of
    three 50-second windows pushing 20 boids."""

    magnitude_max: float = Field(default=20.0, ge=0)
    windows: list[tuple[float, float]] = [(100.0, 150.0), (250.0, 300.0), (400.0, 450.0)]
    affected: int = Field(default=20, ge=0)
    resample_each_step: bool = False


class FlockRequest(BaseModel):
    n: int = 30
    dims: int = 2
    dt: float = Field(default=0.1, gt=0)
    duration_seconds: float = Field(default=500.0, gt=0)
    r_c: float = 25.0
    omega: float = 0.01
    delta: float = 500.0
    cohesion_gain: float = 0.2
    alignment_gain: float = 0.8
    separation_gain: float = 10.0
    perception_radius: Optional[float] = None
    max_speed: float = 15.0
    disturbance: DisturbanceRequest = Field(default_factory=DisturbanceRequest)
    include_positions: bool = False
    seed: int = 0


class FlockReport(BaseModel):
    trace_csv: str
    rows: int
    channels: list[str]
    dt: float
    runtime_seconds: float


def run_flock(req: FlockRequest) -> FlockReport:
    started = time.perf_counter()
    spec = DisturbanceSpec(
        magnitude_max=req.disturbance.magnitude_max,
        windows=tuple(tuple(w) for w in req.disturbance.windows),
        affected=req.disturbance.affected,
        resample_each_step=req.disturbance.resample_each_step,
    )
    params = FlockParams(
        n=req.n,
        dims=req.dims,
        dt=req.dt,
        r_c=req.r_c,
        omega=req.omega,
        delta=req.delta,
        cohesion_gain=req.cohesion_gain,
        alignment_gain=req.alignment_gain,
        separation_gain=req.separation_gain,
        perception_radius=req.perception_radius,
        max_speed=req.max_speed,
        disturbance=spec,
        seed=req.seed,
    )
    signal = simulate(
        params, req.duration_seconds, include_positions=req.include_positions
    )
    return FlockReport(
        trace_csv=to_csv(signal),
        rows=signal.length + 1,
        channels=list(signal.channels),
        dt=signal.dt,
        runtime_seconds=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# FastAPI shell


def create_app() -> FastAPI:
    app = FastAPI(title="resilmon", version=__version__)

    @app.exception_handler(ResilmonError)
    async def _domain_error(_, exc: ResilmonError):
        if isinstance(exc, ParseError):
            body = {
                "kind": "parse",
                "message": exc.message,
                "line": exc.line,
                "col": exc.col,
            }
        elif isinstance(exc, TraceError):
            body = {"kind": "trace", "message": str(exc)}
        elif isinstance(exc, EvaluationError):
            body = {"kind": "evaluation", "message": str(exc)}
        else:
            body = {"kind": "error", "message": str(exc)}
        return JSONResponse(status_code=400, content=body)

    @app.exception_handler(ValueError)
    async def _value_error(_, exc: ValueError):
        return JSONResponse(
            status_code=400, content={"kind": "value", "message": str(exc)}
        )

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/monitor", response_model=MonitorReport)
    async def monitor(req: MonitorRequest) -> MonitorReport:
        return run_monitor(req)

    @app.post("/pareto", response_model=ParetoReport)
    async def pareto(req: ParetoRequest) -> ParetoReport:
        return run_pareto(req)

    @app.post("/verify", response_model=VerifyReport)
    async def verify(req: VerifyRequest) -> VerifyReport:
        return run_verify(req)

    @app.post("/flock", response_model=FlockReport)
    async def flock(req: FlockRequest) -> FlockReport:
        return run_flock(req)

    return app


app = create_app()
