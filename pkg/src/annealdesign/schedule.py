"""Annealing schedules built from a low-order sine series on a discrete grid.

A schedule is the interpolation fraction s(t) steering the Hamiltonian from
the transverse-field driver (s=0) to the diagonal problem term (s=1) over a
total time T:

    s(t) = t/T + sum_{i=1..M} x_i * sin(i * pi * t / T)

The sine basis vanishes at both endpoints, so every schedule starts at s=0
and ends at s=1 regardless of the coefficients. Each coefficient x_i lives
on a symmetric grid {-l, -l+delta, ..., +l}; with the defaults (M=5, l=0.2,
delta=0.01) that is 41 values per coefficient and 41^5 = 115,856,201 distinct
schedules. The search modules operate on this finite grid; this module owns
the coefficient/index bijections and the s(t) evaluation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import OffGridError


@dataclass(frozen=True)
class ScheduleGrid:
    """The discrete coefficient lattice: M sine modes, each on {-l, ..., +l} step delta."""

    num_modes: int = 5
    bound: float = 0.2
    step: float = 0.01

    def __post_init__(self):
        if self.num_modes < 1:
            raise ValueError("need at least one sine mode")
        if self.bound <= 0 or self.step <= 0:
            raise ValueError("bound and step must be positive")
        ratio = self.bound / self.step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("bound must be an integer multiple of step")

    @property
    def levels_per_mode(self) -> int:
        return 2 * round(self.bound / self.step) + 1

    @property
    def total_schedules(self) -> int:
        return self.levels_per_mode ** self.num_modes

    def level_values(self) -> np.ndarray:
        """All grid values for one coefficient, ascending (-l first)."""
        k = round(self.bound / self.step)
        return (np.arange(2 * k + 1) - k) * self.step

    def coeff_to_index(self, x: float) -> int:
        """Grid index of one coefficient value; 0 maps -l, the top index maps +l."""
        idx = (x + self.bound) / self.step
        nearest = round(idx)
        if abs(idx - nearest) > 1e-6 or not 0 <= nearest < self.levels_per_mode:
            raise OffGridError(f"coefficient {x} is not on the grid (l={self.bound}, step={self.step})")
        return int(nearest)

    def index_to_coeff(self, idx: int) -> float:
        if not 0 <= idx < self.levels_per_mode:
            raise OffGridError(f"index {idx} outside [0, {self.levels_per_mode})")
        return idx * self.step - self.bound

    def snap(self, x: float) -> float:
        """Round a value to the nearest grid point, clipping to [-l, +l]."""
        k = round(self.bound / self.step)
        idx = min(max(round((x + self.bound) / self.step), 0), 2 * k)
        return idx * self.step - self.bound


DEFAULT_GRID = ScheduleGrid()


@dataclass(frozen=True)
class Schedule:
    """A concrete schedule: grid + coefficient vector + total time + clamping flag.

    With clamp=True (the default) the evaluated s is clipped into [0, 1], so
    large coefficients saturate rather than steering the interpolation outside
    its meaningful range.
    """

    coeffs: tuple[float, ...]
    total_time: float
    grid: ScheduleGrid = DEFAULT_GRID
    clamp: bool = True

    def __post_init__(self):
        if len(self.coeffs) != self.grid.num_modes:
            raise ValueError(
                f"got {len(self.coeffs)} coefficients for a {self.grid.num_modes}-mode grid"
            )
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")
        for x in self.coeffs:
            self.grid.coeff_to_index(x)  # raises OffGridError if off-lattice

    def eval_s(self, t) -> np.ndarray | float:
        """Interpolation fraction at time(s) t in [0, T]."""
        t_arr = np.asarray(t, dtype=np.float64)
        frac = t_arr / self.total_time
        s = frac.copy()
        for i, x in enumerate(self.coeffs, start=1):
            if x != 0.0:
                s = s + x * np.sin(i * np.pi * frac)
        if self.clamp:
            s = np.clip(s, 0.0, 1.0)
        return float(s) if np.isscalar(t) or t_arr.ndim == 0 else s

    def index_vector(self) -> tuple[int, ...]:
        return tuple(self.grid.coeff_to_index(x) for x in self.coeffs)

    def with_coeff(self, mode: int, value: float) -> "Schedule":
        coeffs = list(self.coeffs)
        coeffs[mode] = value
        return Schedule(tuple(coeffs), self.total_time, self.grid, self.clamp)

    def content_hash(self) -> str:
        payload = json.dumps(
            {
                "coeffs": list(self.coeffs),
                "T": self.total_time,
                "M": self.grid.num_modes,
                "l": self.grid.bound,
                "delta": self.grid.step,
                "clamp": self.clamp,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def linear_schedule(total_time: float, grid: ScheduleGrid = DEFAULT_GRID) -> Schedule:
    """The all-zero-coefficient schedule: s(t) = t/T."""
    return Schedule((0.0,) * grid.num_modes, total_time, grid)


def schedule_from_indices(
    indices: tuple[int, ...] | list[int],
    total_time: float,
    grid: ScheduleGrid = DEFAULT_GRID,
    clamp: bool = True,
) -> Schedule:
    coeffs = tuple(grid.index_to_coeff(int(i)) for i in indices)
    return Schedule(coeffs, total_time, grid, clamp)


def schedule_to_json(sched: Schedule) -> str:
    return json.dumps(
        {
            "T": sched.total_time,
            "M": sched.grid.num_modes,
            "l": sched.grid.bound,
            "delta": sched.grid.step,
            "x": list(sched.coeffs),
            "clamp": sched.clamp,
        },
        indent=1,
    )


def schedule_from_json(text: str) -> Schedule:
    doc = json.loads(text)
    grid = ScheduleGrid(num_modes=int(doc["M"]), bound=float(doc["l"]), step=float(doc["delta"]))
    return Schedule(
        coeffs=tuple(float(x) for x in doc["x"]),
        total_time=float(doc["T"]),
        grid=grid,
        clamp=bool(doc.get("clamp", True)),
    )


def sampled_curve_csv(sched: Schedule, num_samples: int = 201) -> str:
    """CSV with header 't,s' sampling the schedule uniformly on [0, T]."""
    ts = np.linspace(0.0, sched.total_time, num_samples)
    ss = sched.eval_s(ts)
    lines = ["t,s"]
    lines.extend(f"{t:.10g},{s:.10g}" for t, s in zip(ts, ss))
    return "\n".join(lines) + "\n"
