"""Discrete-time multi-channel signals and CSV trace I/O.

A trace is a finite sequence of samples taken at a fixed step.  Row k of
the sample matrix is the signal value at time index k, so a signal with
N+1 rows has length N and its time domain is the integer range 0..N
inclusive.  The step duration `dt` is carried as metadata; the core
semantics work purely on integer step indices and `dt` only matters when
converting bounds written in seconds.

The on-disk format is CSV with a header `t,<channel>,...` where the first
column is a contiguous integer index starting at 0.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import IO, Union

import numpy as np

from .errors import TraceError

TraceSource = Union[str, os.PathLike, bytes, IO[str], IO[bytes]]


@dataclass(frozen=True, eq=False)
class Signal:
    """Immutable sampled signal: named channels over step indices 0..length."""

    channels: tuple[str, ...]
    samples: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        channels = tuple(str(c) for c in self.channels)
        for i, name in enumerate(channels):
            if not name:
                raise TraceError("channel names must be non-empty")
            if name in channels[:i]:
                raise TraceError(f"duplicate channel name {name!r}")
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 2:
            raise TraceError(f"samples must be a 2-D array, got {samples.ndim} dimension(s)")
        if samples.shape[0] < 2:
            raise TraceError(f"a signal needs at least 2 rows, got {samples.shape[0]}")
        if samples.shape[1] != len(channels):
            raise TraceError(
                f"sample matrix has {samples.shape[1]} columns "
                f"but {len(channels)} channel names were given"
            )
        if not np.isfinite(samples).all():
            bad = np.argwhere(~np.isfinite(samples))[0]
            raise TraceError(
                f"non-finite value {samples[bad[0], bad[1]]} in channel "
                f"{channels[bad[1]]!r} at step {bad[0]}"
            )
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise TraceError(f"dt must be a positive finite number, got {self.dt}")
        samples.setflags(write=False)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(channels)})

    @property
    def length(self) -> int:
        """Final time index N; the signal has length+1 rows."""
        return self.samples.shape[0] - 1

    def column(self, channel: str) -> np.ndarray:
        """All samples of one channel, ordered by step index."""
        try:
            return self.samples[:, self._index[channel]]
        except KeyError:
            raise KeyError(f"unknown channel {channel!r}") from None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signal):
            return NotImplemented
        return (
            self.channels == other.channels
            and self.dt == other.dt
            and np.array_equal(self.samples, other.samples)
        )

    def __repr__(self) -> str:
        return (
            f"Signal(channels={self.channels!r}, length={self.length}, dt={self.dt})"
        )


def value_at(signal: Signal, channel: str, t: int) -> float:
    """Value of one channel at step t.

    Raises KeyError for an unknown channel and IndexError when t is
    outside 0..signal.length; this accessor never extends the signal.
    """
    if not 0 <= t <= signal.length:
        raise IndexError(f"step {t} outside signal domain 0..{signal.length}")
    return float(signal.column(channel)[t])


def extend(signal: Signal, new_length: int) -> Signal:
    """Extend a signal to `new_length` by repeating its terminal sample.

    This is the conventional way to evaluate a formula whose horizon
    sticks out past the end of the trace: pretend the world froze at the
    last observed state.  Returns the signal unchanged when new_length
    equals the current length.
    """
    if new_length < signal.length:
        raise ValueError(
            f"cannot extend to length {new_length}: signal already has "
            f"length {signal.length}"
        )
    if new_length == signal.length:
        return signal
    tail = np.repeat(signal.samples[-1:], new_length - signal.length, axis=0)
    return Signal(
        channels=signal.channels,
        samples=np.vstack([signal.samples, tail]),
        dt=signal.dt,
    )


def _open_source(source: TraceSource) -> IO[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", newline="")
    if hasattr(source, "read"):
        probe = source.read(0)
        if isinstance(probe, bytes):
            return io.TextIOWrapper(source, encoding="utf-8")
        return source
    raise TraceError(f"unsupported trace source {type(source).__name__}")


def load_trace(source: TraceSource, dt: float = 1.0) -> Signal:
    """Parse a CSV trace into a Signal.

    `source` may be a file path, bytes, or an open file object.  The
    header must be `t,<channel>,...`; the index column must count
    0,1,2,... without gaps.  Diagnostics name the offending line and
    column.
    """
    stream = _open_source(source)
    should_close = isinstance(source, (str, os.PathLike, bytes))
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceError("trace is empty") from None
        header = [cell.strip() for cell in header]
        if not header or header[0] != "t":
            found = header[0] if header else ""
            raise TraceError(f"line 1: first header column must be 't', found {found!r}")
        channels = header[1:]
        if not channels:
            raise TraceError("line 1: header declares no data channels")
        for i, name in enumerate(channels):
            if not name:
                raise TraceError(f"line 1: empty channel name in column {i + 2}")
            if name in channels[:i]:
                raise TraceError(f"line 1: duplicate channel name {name!r}")

        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            cells = [cell.strip() for cell in row]
            if len(cells) != len(header):
                raise TraceError(
                    f"line {line_no}: expected {len(header)} fields, found {len(cells)}"
                )
            try:
                index = int(cells[0])
            except ValueError:
                raise TraceError(
                    f"line {line_no}: index {cells[0]!r} is not an integer"
                ) from None
            if index != len(rows):
                raise TraceError(
                    f"line {line_no}: expected index {len(rows)}, found {index}"
                )
            values = []
            for name, cell in zip(channels, cells[1:]):
                try:
                    value = float(cell)
                except ValueError:
                    raise TraceError(
                        f"line {line_no}, column {name!r}: could not parse "
                        f"{cell!r} as a number"
                    ) from None
                if not math.isfinite(value):
                    raise TraceError(
                        f"line {line_no}, column {name!r}: non-finite value {cell!r}"
                    )
                values.append(value)
            rows.append(values)
        if len(rows) < 2:
            raise TraceError(f"trace must have at least 2 rows, got {len(rows)}")
        return Signal(channels=tuple(channels), samples=np.array(rows), dt=dt)
    finally:
        if should_close:
            stream.close()


def to_csv(signal: Signal) -> str:
    """Render a signal in the same CSV format load_trace accepts."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t", *signal.channels])
    for k in range(signal.length + 1):
        writer.writerow([k, *(repr(float(v)) for v in signal.samples[k])])
    return out.getvalue()
