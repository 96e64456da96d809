"""Boid flocking trace generator.

Produces the kind of trace the resilience monitor is meant to inspect: a
swarm that settles into a flock, gets scattered by injected position
disturbances, and regroups.  Each step records two summary channels:

* ``J``  - flock-formation cost: mean squared pairwise distance plus a
  weighted sum of inverse squared distances of pairs inside the
  interaction radius.  Low J means compact but not colliding; formation
  is conventionally J <= delta.
* ``CC`` - number of connected components of the proximity graph (edges
  between pairs closer than the interaction radius).  1 means one flock.

Dynamics are explicit Euler: positions advance by dt times velocity plus
an optional random displacement (the disturbance), velocities by dt
times an acceleration combining the three classic steering rules:
cohesion toward the perceived centroid, alignment to the perceived mean
velocity, and inverse-square separation from boids inside the
interaction radius.  Cohesion and alignment see out to a configurable
perception radius (unlimited by default, so a scattered swarm always
regroups); separation and the recorded channels use the interaction
radius.  The rule gains are configurable; the defaults are tuned so a
30-boid swarm at the default parameters forms a flock within roughly
100 simulated seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EvaluationError
from .trace import Signal


@dataclass(frozen=True)
class DisturbanceSpec:
    """Position-noise injection: during each window (in seconds), a
    sampled subset of boids gets a random displacement each step with
    magnitude uniform in [0, magnitude_max].  The subset is drawn on
    window entry, or every step with resample_each_step."""

    magnitude_max: float = 20.0
    windows: tuple[tuple[float, float], ...] = ()
    affected: int = 0
    resample_each_step: bool = False

    def __post_init__(self):
        if self.magnitude_max < 0:
            raise ValueError("disturbance magnitude must be non-negative")
        if self.affected < 0:
            raise ValueError("affected count must be non-negative")
        windows = tuple((float(s), float(e)) for s, e in self.windows)
        for s, e in windows:
            if not (math.isfinite(s) and math.isfinite(e) and 0 <= s < e):
                raise ValueError(f"bad disturbance window [{s},{e}]")
        for (s1, e1), (s2, e2) in zip(sorted(windows), sorted(windows)[1:]):
            if e1 > s2:
                raise ValueError(
                    f"disturbance windows [{s1},{e1}] and [{s2},{e2}] overlap"
                )
        object.__setattr__(self, "windows", windows)


def _paper_disturbance() -> DisturbanceSpec:
    return DisturbanceSpec(
        magnitude_max=20.0,
        windows=((100.0, 150.0), (250.0, 300.0), (400.0, 450.0)),
        affected=20,
    )


@dataclass(frozen=True)
class FlockParams:
    """Simulation parameters.  `delta` is the formation threshold used in
    monitor formulas over the J channel; the simulation itself only
    records J and never compares it."""

    n: int = 30
    dims: int = 2
    dt: float = 0.1
    r_c: float = 25.0
    omega: float = 0.01
    delta: float = 500.0
    cohesion_gain: float = 0.2
    alignment_gain: float = 0.8
    separation_gain: float = 10.0
    perception_radius: Optional[float] = None
    max_speed: float = 15.0
    position_bounds: tuple[float, float] = (0.0, 200.0)
    velocity_bounds: tuple[float, float] = (-5.0, 5.0)
    disturbance: DisturbanceSpec = field(default_factory=_paper_disturbance)
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 boids")
        if self.dims < 1:
            raise ValueError("dims must be at least 1")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be positive")
        if not (math.isfinite(self.r_c) and self.r_c > 0):
            raise ValueError("interaction radius must be positive")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")
        for name in ("cohesion_gain", "alignment_gain", "separation_gain"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.perception_radius is not None and self.perception_radius <= 0:
            raise ValueError("perception_radius must be positive (or None for unlimited)")
        if self.max_speed <= 0:
            raise ValueError("max_speed must be positive")
        if self.position_bounds[0] >= self.position_bounds[1]:
            raise ValueError("position_bounds must be an increasing pair")
        if self.velocity_bounds[0] >= self.velocity_bounds[1]:
            raise ValueError("velocity_bounds must be an increasing pair")
        if self.disturbance.affected > self.n:
            raise ValueError(
                f"disturbance affects {self.disturbance.affected} boids "
                f"but only {self.n} exist"
            )


@dataclass
class FlockState:
    """Positions and velocities of all boids at one step."""

    positions: np.ndarray
    velocities: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        if self.positions.shape != self.velocities.shape or self.positions.ndim != 2:
            raise ValueError("positions and velocities must be matching (n, dims) arrays")
        if not (np.isfinite(self.positions).all() and np.isfinite(self.velocities).all()):
            raise ValueError("boid state must be finite")


def initial_state(params: FlockParams, rng: Optional[np.random.Generator] = None) -> FlockState:
    """Positions and velocities sampled uniformly from the configured boxes."""
    rng = np.random.default_rng(params.seed) if rng is None else rng
    lo, hi = params.position_bounds
    vlo, vhi = params.velocity_bounds
    return FlockState(
        positions=rng.uniform(lo, hi, size=(params.n, params.dims)),
        velocities=rng.uniform(vlo, vhi, size=(params.n, params.dims)),
        step_index=0,
    )


def accelerations(state: FlockState, params: FlockParams) -> np.ndarray:
    """Steering accelerations from the three rules.

    Separation repels from boids inside the interaction radius; cohesion
    and alignment average over boids inside the perception radius
    (everyone, when unlimited).  A boid that perceives nobody coasts.
    """
    pos, vel = state.positions, state.velocities
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = (diff ** 2).sum(axis=2)
    close = d2 < params.r_c ** 2
    np.fill_diagonal(close, False)
    if params.perception_radius is None:
        seen = np.ones_like(close)
    else:
        seen = d2 < params.perception_radius ** 2
    np.fill_diagonal(seen, False)
    counts = seen.sum(axis=1)
    has = counts > 0
    acc = np.zeros_like(pos)
    if params.cohesion_gain and has.any():
        centroid = (seen[:, :, None] * pos[None, :, :]).sum(axis=1)
        centroid[has] /= counts[has, None]
        acc[has] += params.cohesion_gain * (centroid[has] - pos[has])
    if params.alignment_gain and has.any():
        mean_v = (seen[:, :, None] * vel[None, :, :]).sum(axis=1)
        mean_v[has] /= counts[has, None]
        acc[has] += params.alignment_gain * (mean_v[has] - vel[has])
    if params.separation_gain:
        weight = np.where(close & (d2 > 0), 1.0 / np.where(d2 > 0, d2, 1.0), 0.0)
        acc += params.separation_gain * (diff * weight[:, :, None]).sum(axis=1)
    return acc


def _random_displacements(
    rng: np.random.Generator, count: int, dims: int, magnitude_max: float
) -> np.ndarray:
    magnitude = rng.uniform(0.0, magnitude_max, size=count)
    if dims == 2:
        angle = rng.uniform(0.0, 2.0 * math.pi, size=count)
        direction = np.stack([np.cos(angle), np.sin(angle)], axis=1)
    else:
        raw = rng.standard_normal((count, dims))
        norm = np.linalg.norm(raw, axis=1, keepdims=True)
        norm[norm == 0] = 1.0
        direction = raw / norm
    return magnitude[:, None] * direction


def step(
    state: FlockState,
    params: FlockParams,
    rng: np.random.Generator,
    affected: Sequence[int] = (),
) -> FlockState:
    """One Euler step.  `affected` lists the boids that receive a random
    displacement this step (empty outside disturbance windows)."""
    acc = accelerations(state, params)
    displacement = np.zeros_like(state.positions)
    if len(affected) and params.disturbance.magnitude_max > 0:
        idx = np.asarray(affected, dtype=int)
        displacement[idx] = _random_displacements(
            rng, len(idx), params.dims, params.disturbance.magnitude_max
        )
    new_pos = state.positions + params.dt * state.velocities + displacement
    new_vel = state.velocities + params.dt * acc
    speed = np.linalg.norm(new_vel, axis=1)
    fast = speed > params.max_speed
    if fast.any():
        new_vel[fast] *= (params.max_speed / speed[fast])[:, None]
    return FlockState(new_pos, new_vel, state.step_index + 1)


def cost_J(positions, params: FlockParams) -> float:
    """Flock-formation cost: mean squared pairwise distance plus the
    omega-weighted sum of inverse squared distances of pairs inside the
    interaction radius.  Coincident boids make the second term singular
    and are reported as an error."""
    pos = np.asarray(positions, dtype=float)
    n = pos.shape[0]
    if n < 2:
        raise ValueError("cost needs at least 2 boids")
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = (diff ** 2).sum(axis=2)[np.triu_indices(n, k=1)]
    cohesion = d2.sum() / (n * (n - 1))
    close = d2 < params.r_c ** 2
    if bool((d2[close] == 0).any()):
        raise EvaluationError(
            "coincident boids inside the interaction radius make the "
            "separation cost singular"
        )
    separation = params.omega * (1.0 / d2[close]).sum() if close.any() else 0.0
    return float(cohesion + separation)


def connected_components(positions, params: FlockParams) -> int:
    """Component count of the proximity graph (pairwise distance < r_c)."""
    pos = np.asarray(positions, dtype=float)
    n = pos.shape[0]
    if n < 1:
        raise ValueError("need at least one boid")
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    diff = pos[:, None, :] - pos[None, :, :]
    d2 = (diff ** 2).sum(axis=2)
    rows, cols = np.nonzero(np.triu(d2 < params.r_c ** 2, k=1))
    for i, j in zip(rows.tolist(), cols.tolist()):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    return len({find(i) for i in range(n)})


def _to_step(seconds: float, dt: float) -> int:
    exact = seconds / dt
    rounded = round(exact)
    if abs(exact - rounded) < 1e-6:
        return int(rounded)
    return math.ceil(exact)


def simulate(
    params: FlockParams, duration_seconds: float, *, include_positions: bool = False
) -> Signal:
    """Run the flock for the given duration and record one row per step.

    The returned signal has channels J and CC (plus per-boid positions
    when requested), carries the simulation dt, and is bit-reproducible
    for a fixed seed.  Disturbance windows are applied to the transition
    steps k with start <= k*dt < end.
    """
    exact = duration_seconds / params.dt
    steps = round(exact)
    if steps < 1 or abs(exact - steps) > 1e-9 * max(1.0, abs(steps)):
        raise ValueError(
            f"duration {duration_seconds}s is not a positive whole number of "
            f"steps at dt={params.dt}"
        )
    rng = np.random.default_rng(params.seed)
    state = initial_state(params, rng)
    windows = [
        (_to_step(s, params.dt), _to_step(e, params.dt))
        for s, e in params.disturbance.windows
    ]

    j_col: list[float] = []
    cc_col: list[int] = []
    pos_rows: list[np.ndarray] = []

    def record(st: FlockState):
        j_col.append(cost_J(st.positions, params))
        cc_col.append(connected_components(st.positions, params))
        if include_positions:
            pos_rows.append(st.positions.ravel().copy())

    record(state)
    current_window: Optional[int] = None
    subset: np.ndarray = np.empty(0, dtype=int)
    for k in range(steps):
        window = next(
            (w for w, (klo, khi) in enumerate(windows) if klo <= k < khi), None
        )
        if window is None or params.disturbance.affected == 0:
            current_window = None
            active: Sequence[int] = ()
        else:
            if window != current_window or params.disturbance.resample_each_step:
                subset = rng.choice(
                    params.n, size=params.disturbance.affected, replace=False
                )
                current_window = window
            active = subset
        state = step(state, params, rng, affected=active)
        record(state)

    channels: list[str] = ["J", "CC"]
    columns = [np.array(j_col), np.array(cc_col, dtype=float)]
    if include_positions:
        axes = "xyz"
        for i in range(params.n):
            for d in range(params.dims):
                suffix = axes[d] if params.dims <= 3 else f"d{d}"
                channels.append(f"{suffix}{i}" if params.dims <= 3 else f"p{i}_{suffix}")
        columns.append(np.vstack(pos_rows))
    samples = np.column_stack(columns)
    return Signal(tuple(channels), samples, dt=params.dt)
