"""Slice a continuous schedule into alternating fixed-angle pulses.

A K-slice digitization samples s at each slice midpoint and replaces the
continuous evolution with the time-ordered product of exact pulse pairs

    U_j = exp(-i * beta_j * H_init) * exp(-i * gamma_j * H_prob)

with gamma_j = s_j * dt_j and beta_j = (1 - s_j) * dt_j. This is the
lowest-order splitting, and the (gamma, beta) lists are exactly the angle
parameters of a depth-K QAOA circuit, which is why this module exports them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels, dynamics
from .sat_core import DiagonalHamiltonian
from .schedule import Schedule


@dataclass(frozen=True)
class DigitizedSchedule:
    """K slices with per-slice interpolation values and pulse angles."""

    s_values: np.ndarray  # shape (K,)
    slice_durations: np.ndarray  # shape (K,), sums to total_time
    total_time: float
    source_hash: str = ""

    def __post_init__(self):
        s = np.asarray(self.s_values, dtype=np.float64)
        d = np.asarray(self.slice_durations, dtype=np.float64)
        if s.shape != d.shape or s.ndim != 1 or s.shape[0] < 1:
            raise ValueError("need matching 1-D s_values and slice_durations, K >= 1")
        if abs(d.sum() - self.total_time) > 1e-9:
            raise ValueError("slice durations must sum to the total time")
        for arr in (s, d):
            arr.setflags(write=False)
        object.__setattr__(self, "s_values", s)
        object.__setattr__(self, "slice_durations", d)

    @property
    def num_slices(self) -> int:
        return self.s_values.shape[0]

    @property
    def gammas(self) -> np.ndarray:
        """Problem-phase angles, one per slice."""
        return self.s_values * self.slice_durations

    @property
    def betas(self) -> np.ndarray:
        """Driver-rotation angles, one per slice."""
        return (1.0 - self.s_values) * self.slice_durations


def digitize(schedule: Schedule, num_slices: int) -> DigitizedSchedule:
    """Uniform slices of width T/K, s sampled at each slice midpoint."""
    if num_slices < 1:
        raise ValueError("need at least one slice")
    dt = schedule.total_time / num_slices
    midpoints = (np.arange(num_slices) + 0.5) * dt
    s_vals = np.asarray(schedule.eval_s(midpoints), dtype=np.float64)
    return DigitizedSchedule(
        s_values=s_vals,
        slice_durations=np.full(num_slices, dt),
        total_time=schedule.total_time,
        source_hash=schedule.content_hash(),
    )


def apply_digitized(
    dig: DigitizedSchedule, ham: DiagonalHamiltonian, psi0: np.ndarray | None = None
) -> np.ndarray:
    """Run the pulse sequence on a state (default: uniform superposition)."""
    psi = dynamics.initial_state(ham.n) if psi0 is None else np.asarray(psi0, np.complex128)
    re = np.ascontiguousarray(psi.real)
    im = np.ascontiguousarray(psi.imag)
    _kernels.digitized_evolve(
        re, im, ham.violations.astype(np.float64), dig.gammas, dig.betas, ham.n
    )
    return re + 1j * im


def digitization_error(
    schedule: Schedule,
    ham: DiagonalHamiltonian,
    num_slices: int,
    reference_dt: float = 0.005,
) -> float:
    """|final energy(digitized, K) - final energy(continuous)|.

    The continuous reference is the split-step integrator at a step size far
    below any slice width of interest.
    """
    digitized = apply_digitized(digitize(schedule, num_slices), ham)
    continuous = dynamics.evolve(dynamics.AnnealSpec(schedule, ham, dt=reference_dt))
    e_dig = dynamics.problem_energy(digitized, ham)
    return abs(e_dig - continuous.energy)


def export_qaoa(dig: DigitizedSchedule) -> str:
    """Angle-parameter JSON for a depth-P circuit of alternating pulse pairs."""
    return json.dumps(
        {
            "P": dig.num_slices,
            "gamma": dig.gammas.tolist(),
            "beta": dig.betas.tolist(),
            "T": dig.total_time,
            "source": dig.source_hash,
        },
        indent=1,
    )


def import_qaoa(text: str) -> DigitizedSchedule:
    """Inverse of export_qaoa; recovers s_j and dt_j from the angle pairs."""
    doc = json.loads(text)
    gam = np.asarray(doc["gamma"], dtype=np.float64)
    bet = np.asarray(doc["beta"], dtype=np.float64)
    if gam.shape != bet.shape or len(gam) != int(doc["P"]):
        raise ValueError("gamma/beta lists must both have length P")
    durations = gam + bet
    with np.errstate(invalid="ignore"):
        s_vals = np.where(durations != 0, gam / durations, 0.0)
    return DigitizedSchedule(
        s_values=s_vals,
        slice_durations=durations,
        total_time=float(doc["T"]),
        source_hash=str(doc.get("source", "")),
    )
