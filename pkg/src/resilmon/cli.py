"""Command-line front end.

Each subcommand builds a request model, obtains a response either by
calling the in-process handler (default) or by POSTing to a running
service (`--server URL`), and renders the result.  Exit codes: 0
success, 2 parse/usage error, 3 trace error, 4 evaluation error, 5
verification violation.
"""

from __future__ import annotations

import csv
import io
import os
import sys
from typing import IO, Optional, Union

import click
import httpx

from .errors import EvaluationError, ParseError, TraceError
from .service import (
    DisturbanceRequest,
    FlockReport,
    FlockRequest,
    MonitorReport,
    MonitorRequest,
    ParetoReport,
    ParetoRequest,
    VerifyReport,
    VerifyRequest,
    create_app,
    run_flock,
    run_monitor,
    run_pareto,
    run_verify,
)
from .trace import Signal, to_csv

_HANDLERS = {
    "monitor": (run_monitor, MonitorReport),
    "pareto": (run_pareto, ParetoReport),
    "verify": (run_verify, VerifyReport),
    "flock": (run_flock, FlockReport),
}


def emit_trace(signal: Signal, sink: Union[str, os.PathLike, IO, None] = None) -> bytes:
    """Serialize a signal to CSV bytes, optionally writing them to a
    path or an open file.  Inverse of load_trace."""
    data = to_csv(signal).encode("utf-8")
    if sink is None:
        return data
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
        return data
    if hasattr(sink, "write"):
        try:
            sink.write(data)
        except TypeError:
            # Text-mode sink.
            sink.write(data.decode("utf-8"))
        return data
    raise TraceError(f"unsupported trace sink {type(sink).__name__}")


def _dispatch(endpoint: str, request, server: Optional[str]):
    handler, model = _HANDLERS[endpoint]
    if server is None:
        return handler(request)
    url = f"{server.rstrip('/')}/{endpoint}"
    resp = httpx.post(url, json=request.model_dump(mode="json"), timeout=600.0)
    if resp.status_code == 400:
        body = resp.json()
        kind = body.get("kind")
        message = body.get("message", "server rejected the request")
        if kind == "parse":
            raise ParseError(message, body.get("line", 1), body.get("col", 1))
        if kind == "trace":
            raise TraceError(message)
        if kind == "evaluation":
            raise EvaluationError(message)
        raise ValueError(message)
    if resp.status_code == 422:
        raise ValueError(f"invalid request: {resp.text}")
    resp.raise_for_status()
    return model.model_validate(resp.json())


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _execute(action):
    """Run a command body, mapping domain errors to the exit-code
    contract."""
    try:
        return action()
    except ParseError as exc:
        _fail(str(exc), 2)
    except TraceError as exc:
        _fail(str(exc), 3)
    except EvaluationError as exc:
        _fail(str(exc), 4)
    except ValueError as exc:
        _fail(str(exc), 2)
    except httpx.HTTPError as exc:
        _fail(f"server request failed: {exc}", 1)


def _read_trace(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise TraceError(f"cannot read trace '{path}': {exc.strerror or exc}") from None


def _read_formula(formula: Optional[str], formula_file: Optional[str]) -> str:
    if (formula is None) == (formula_file is None):
        raise ValueError("give exactly one of --formula or --formula-file")
    if formula is not None:
        return formula
    try:
        with open(formula_file, "r", encoding="utf-8") as fh:
            return fh.read().strip()
    except OSError as exc:
        raise ParseError(
            f"cannot read formula file '{formula_file}': {exc.strerror or exc}"
        ) from None


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"window must be LO,HI, got '{text}'")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ValueError(f"window bounds must be numbers, got '{text}'") from None


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# ---------------------------------------------------------------------------
# Renderers


def _pair_label(p) -> str:
    tag = f"atom={p.atom}  t'={p.atom_time} ({p.atom_time_seconds:g} s)"
    if p.negated:
        tag += "  (negated)"
    return (
        f"  ({p.rec}, {p.dur})  seconds=({p.rec_seconds:g}, {p.dur_seconds:g})  {tag}"
    )


def _render_monitor_text(report: MonitorReport) -> str:
    lines = [
        f"formula: {report.formula}",
        f"time: {report.time} ({report.time_seconds:g} s, dt={report.dt:g})",
        f"verdict: {report.verdict}",
        f"pairs ({len(report.pairs)}):",
    ]
    lines.extend(_pair_label(p) for p in report.pairs)
    if report.extended_from is not None:
        lines.append(
            f"signal: length {report.signal_length} "
            f"(extended from {report.extended_from})"
        )
    else:
        lines.append(f"signal: length {report.signal_length}")
    for note in report.warnings:
        lines.append(f"warning: {note}")
    lines.append(f"runtime_seconds: {report.runtime_seconds:.6f}")
    return "\n".join(lines)


def _render_monitor_csv(report: MonitorReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "rec",
            "dur",
            "rec_seconds",
            "dur_seconds",
            "verdict",
            "atom",
            "atom_time",
            "atom_time_seconds",
            "negated",
        ]
    )
    for p in report.pairs:
        writer.writerow(
            [
                p.rec,
                p.dur,
                p.rec_seconds,
                p.dur_seconds,
                report.verdict,
                p.atom,
                p.atom_time,
                p.atom_time_seconds,
                int(p.negated),
            ]
        )
    return buf.getvalue().rstrip("\n")


def _render_pareto_csv(report: ParetoReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "rec", "dur", "on_front"])
    for row in report.rows:
        writer.writerow([row.time, row.rec, row.dur, int(row.on_front)])
    return buf.getvalue().rstrip("\n")


def _render_verify_text(report: VerifyReport) -> str:
    hist = ", ".join(f"{k}={v}" for k, v in sorted(report.histogram.items()))
    lines = [
        f"cases: {report.cases} (seed {report.seed})",
        f"verdicts: {hist}",
        f"satisfied: {report.satisfied_cases}/{report.cases}",
    ]
    for g in report.golden:
        ok = "ok" if g.consistent else "VIOLATION"
        lines.append(
            f"golden {g.name}: verdict={g.verdict} satisfied={g.satisfied} {ok}"
        )
    lines.append(f"violations: {len(report.violations)}")
    for v in report.violations:
        lines.append(
            f"  case {v.case}: {v.formula} at t={v.time} "
            f"verdict={v.verdict} satisfied={v.satisfied}"
        )
    lines.append(f"elapsed_seconds: {report.elapsed_seconds}")
    lines.append("result: " + ("PASS" if report.ok else "FAIL"))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Commands


@click.group(name="resilmon")
@click.version_option(package_name="resilmon", prog_name="resilmon")
def main():
    """Offline resiliency monitoring for discrete-time signals."""


_server_option = click.option(
    "--server",
    default=None,
    metavar="URL",
    help="Send the request to a running service instead of evaluating in process.",
)


@main.command()
@click.option("--trace", "trace_path", required=True, metavar="PATH",
              help="Trace CSV file ('-' for stdin).")
@click.option("--formula", default=None, help="Resiliency formula text.")
@click.option("--formula-file", default=None, metavar="PATH",
              help="Read the formula from a file instead.")
@click.option("--time", "time_", default=0.0, show_default=True,
              help="Evaluation time (steps, or seconds with --seconds).")
@click.option("--dt", default=1.0, show_default=True,
              help="Step duration of the trace in seconds.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]),
              default="text", show_default=True)
@click.option("--no-extend", is_flag=True,
              help="Fail instead of extending a too-short trace.")
@click.option("--seconds", is_flag=True,
              help="Interpret formula bounds and --time in seconds (dt units).")
@_server_option
def monitor(trace_path, formula, formula_file, time_, dt, fmt, no_extend,
            seconds, server):
    """Evaluate a resiliency formula on a trace and print the verdict."""

    def action():
        request = MonitorRequest(
            trace_csv=_read_trace(trace_path),
            formula=_read_formula(formula, formula_file),
            time=time_,
            dt=dt,
            auto_extend=not no_extend,
            seconds=seconds,
        )
        report = _dispatch("monitor", request, server)
        if fmt == "json":
            click.echo(report.model_dump_json(indent=2))
        elif fmt == "csv":
            click.echo(_render_monitor_csv(report))
        else:
            click.echo(_render_monitor_text(report))

    _execute(action)


@main.command()
@click.option("--trace", "trace_path", required=True, metavar="PATH",
              help="Trace CSV file ('-' for stdin).")
@click.option("--atom", required=True,
              help="Resiliency atom R[a,b](...) to sweep over the window.")
@click.option("--window", required=True, metavar="LO,HI",
              help="Evaluation times (steps, or seconds with --seconds).")
@click.option("--dt", default=1.0, show_default=True)
@click.option("--seconds", is_flag=True,
              help="Interpret atom bounds and the window in seconds.")
@click.option("--no-extend", is_flag=True)
@click.option("--out", default=None, metavar="PATH",
              help="Write the CSV here instead of stdout.")
@_server_option
def pareto(trace_path, atom, window, dt, seconds, no_extend, out, server):
    """Sweep one atom over a window and flag the minimum-resilience
    front (earliest time per front pair)."""

    def action():
        request = ParetoRequest(
            trace_csv=_read_trace(trace_path),
            atom=atom,
            window=_parse_window(window),
            dt=dt,
            auto_extend=not no_extend,
            seconds=seconds,
        )
        report = _dispatch("pareto", request, server)
        sink, close = _open_out(out)
        try:
            sink.write(_render_pareto_csv(report) + "\n")
        finally:
            if close:
                sink.close()

    _execute(action)


@main.command()
@click.option("--cases", default=1000, show_default=True,
              help="Number of random instances.")
@click.option("--seed", default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "text"]),
              default="text", show_default=True)
@_server_option
def verify(cases, seed, fmt, server):
    """Check verdict-vs-satisfaction consistency on random instances.

    Exits 5 if any violation is found."""

    def action():
        report = _dispatch("verify", VerifyRequest(cases=cases, seed=seed), server)
        if fmt == "json":
            click.echo(report.model_dump_json(indent=2))
        else:
            click.echo(_render_verify_text(report))
        if not report.ok:
            sys.exit(5)

    _execute(action)


@main.command()
@click.option("--n", default=30, show_default=True, help="Number of boids.")
@click.option("--dims", default=2, show_default=True)
@click.option("--dt", default=0.1, show_default=True)
@click.option("--duration", default=500.0, show_default=True,
              help="Simulated time in seconds.")
@click.option("--r-c", default=25.0, show_default=True,
              help="Interaction radius.")
@click.option("--omega", default=0.01, show_default=True)
@click.option("--delta", default=500.0, show_default=True,
              help="Formation threshold (recorded only).")
@click.option("--cohesion-gain", default=0.2, show_default=True)
@click.option("--alignment-gain", default=0.8, show_default=True)
@click.option("--separation-gain", default=10.0, show_default=True)
@click.option("--perception-radius", default=None, type=float,
              help="Cohesion/alignment range (default: unlimited).")
@click.option("--max-speed", default=15.0, show_default=True)
@click.option("--magnitude", default=20.0, show_default=True,
              help="Max disturbance displacement per step.")
@click.option("--affected", default=20, show_default=True,
              help="Boids displaced during disturbance windows.")
@click.option("--window", "windows", multiple=True, metavar="START,END",
              help="Disturbance window in seconds (repeatable; default: "
                   "100,150 250,300 400,450).")
@click.option("--no-disturbance", is_flag=True)
@click.option("--resample-each-step", is_flag=True,
              help="Pick a fresh affected subset every step.")
@click.option("--include-positions", is_flag=True,
              help="Also record per-boid position channels.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, metavar="PATH",
              help="Write the trace CSV here instead of stdout.")
@_server_option
def flock(n, dims, dt, duration, r_c, omega, delta, cohesion_gain,
          alignment_gain, separation_gain, perception_radius, max_speed,
          magnitude, affected, windows, no_disturbance, resample_each_step,
          include_positions, seed, out, server):
    """Simulate a disturbed flock and emit its J/CC trace as CSV."""

    def action():
        if no_disturbance:
            disturbance = DisturbanceRequest(
                magnitude_max=magnitude, windows=[], affected=0,
                resample_each_step=resample_each_step,
            )
        elif windows:
            disturbance = DisturbanceRequest(
                magnitude_max=magnitude,
                windows=[_parse_window(w) for w in windows],
                affected=affected,
                resample_each_step=resample_each_step,
            )
        else:
            disturbance = DisturbanceRequest(
                magnitude_max=magnitude, affected=affected,
                resample_each_step=resample_each_step,
            )
        request = FlockRequest(
            n=n, dims=dims, dt=dt, duration_seconds=duration, r_c=r_c,
            omega=omega, delta=delta, cohesion_gain=cohesion_gain,
            alignment_gain=alignment_gain, separation_gain=separation_gain,
            perception_radius=perception_radius, max_speed=max_speed,
            disturbance=disturbance, include_positions=include_positions,
            seed=seed,
        )
        report = _dispatch("flock", request, server)
        sink, close = _open_out(out)
        try:
            sink.write(report.trace_csv)
        finally:
            if close:
                sink.close()

    _execute(action)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
