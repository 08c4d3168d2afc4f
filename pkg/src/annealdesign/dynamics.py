"""Exact Schrodinger evolution of the interpolating Hamiltonian.

The system Hamiltonian at interpolation fraction s is

    H(s) = (1 - s) * H_init + s * H_prob

where H_init = sum_i (I - X_i)/2 (ground state: uniform superposition, energy
0) and H_prob is the diagonal clause-violation operator from sat_core. Time
evolution uses a second-order symmetric split propagator with the schedule
sampled at step midpoints; each step is unitary by construction, so norm is
preserved to rounding error regardless of step size. hbar = 1 throughout and
time is dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import SizeLimitError
from .sat_core import DiagonalHamiltonian
from .schedule import Schedule

# A full state vector for n qubits needs 2^n complex amplitudes; keep well
# under memory limits and keep dense spectral scans tractable.
MAX_QUBITS = 20


def initial_state(n: int) -> np.ndarray:
    """Uniform superposition over all 2^n basis states (H_init ground state)."""
    if n > MAX_QUBITS:
        raise SizeLimitError(f"state vectors limited to n <= {MAX_QUBITS}, got n={n}")
    size = 1 << n
    return np.full(size, size ** -0.5, dtype=np.complex128)


@dataclass(frozen=True)
class AnnealSpec:
    """One evolution to run: which schedule, which instance, which step size."""

    schedule: Schedule
    hamiltonian: DiagonalHamiltonian
    dt: float = 0.05

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def num_steps(self) -> int:
        return max(1, round(self.schedule.total_time / self.dt))


@dataclass
class EvolutionTrace:
    """Sparse samples along one evolution, recorded at step boundaries."""

    times: np.ndarray
    s_values: np.ndarray
    energies: np.ndarray  # <psi| H_prob |psi>
    driver_energies: np.ndarray  # <psi| H_init |psi>
    norms: np.ndarray

    def instantaneous_energies(self) -> np.ndarray:
        """<psi(t)| H(s(t)) |psi(t)> along the recorded samples."""
        return (1.0 - self.s_values) * self.driver_energies + self.s_values * self.energies

    def to_csv(self) -> str:
        lines = ["t,s,energy,driver_energy,norm"]
        for t, s, e, d, nrm in zip(
            self.times, self.s_values, self.energies, self.driver_energies, self.norms
        ):
            lines.append(f"{t:.10g},{s:.10g},{e:.12g},{d:.12g},{nrm:.15g}")
        return "\n".join(lines) + "\n"


@dataclass
class EvolutionResult:
    state: np.ndarray
    spec: AnnealSpec
    trace: EvolutionTrace | None = None

    @property
    def energy(self) -> float:
        return problem_energy(self.state, self.spec.hamiltonian)

    @property
    def success_probability(self) -> float:
        return success_probability(self.state, self.spec.hamiltonian)


def _step_angles(schedule: Schedule, num_steps: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-step driver/problem rotation angles with midpoint-sampled s."""
    h = schedule.total_time / num_steps
    midpoints = (np.arange(num_steps) + 0.5) * h
    s_mid = np.asarray(schedule.eval_s(midpoints), dtype=np.float64)
    thetas = (1.0 - s_mid) * h
    phis = s_mid * h
    return thetas, phis, h


def evolve(
    spec: AnnealSpec,
    initial: np.ndarray | None = None,
    trace_samples: int = 0,
) -> EvolutionResult:
    """Run one annealing evolution; optionally record `trace_samples` interior samples."""
    ham = spec.hamiltonian
    psi = initial_state(ham.n) if initial is None else np.array(initial, dtype=np.complex128)
    re = np.ascontiguousarray(psi.real)
    im = np.ascontiguousarray(psi.imag)
    viol = ham.violations.astype(np.float64)
    steps = spec.num_steps
    thetas, phis, h = _step_angles(spec.schedule, steps)

    if trace_samples <= 0:
        _kernels.strang_segment(re, im, viol, thetas, phis, ham.n)
        return EvolutionResult(state=re + 1j * im, spec=spec)

    # Segment boundaries at (roughly) uniform step counts. Splitting the run is
    # exact: merged half-steps inside a segment equal the unsplit product.
    bounds = np.unique(np.round(np.linspace(0, steps, trace_samples + 1)).astype(np.int64))
    times = [0.0]
    s_vals = [float(spec.schedule.eval_s(0.0))]
    energies = [problem_energy(re + 1j * im, ham)]
    driver_energies = [driver_energy(re + 1j * im, ham.n)]
    norms = [float(np.sqrt(np.sum(re * re + im * im)))]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        _kernels.strang_segment(re, im, viol, thetas[lo:hi], phis[lo:hi], ham.n)
        t = hi * h
        psi_now = re + 1j * im
        times.append(float(t))
        s_vals.append(float(spec.schedule.eval_s(t)))
        energies.append(problem_energy(psi_now, ham))
        driver_energies.append(driver_energy(psi_now, ham.n))
        norms.append(float(np.linalg.norm(psi_now)))
    trace = EvolutionTrace(
        times=np.array(times),
        s_values=np.array(s_vals),
        energies=np.array(energies),
        driver_energies=np.array(driver_energies),
        norms=np.array(norms),
    )
    return EvolutionResult(state=re + 1j * im, spec=spec, trace=trace)


def evolve_many(specs: list[AnnealSpec]) -> list[EvolutionResult]:
    """Evolve a batch, grouping rows with matching (n, step count) into one kernel call."""
    groups: dict[tuple[int, int], list[int]] = {}
    for i, spec in enumerate(specs):
        groups.setdefault((spec.hamiltonian.n, spec.num_steps), []).append(i)
    results: list[EvolutionResult | None] = [None] * len(specs)
    for (n, steps), idxs in groups.items():
        batch = len(idxs)
        size = 1 << n
        re = np.full((batch, size), size ** -0.5, dtype=np.float64)
        im = np.zeros((batch, size), dtype=np.float64)
        viol = np.empty((batch, size), dtype=np.float64)
        thetas = np.empty((batch, steps), dtype=np.float64)
        phis = np.empty((batch, steps), dtype=np.float64)
        for row, i in enumerate(idxs):
            viol[row] = specs[i].hamiltonian.violations
            thetas[row], phis[row], _ = _step_angles(specs[i].schedule, steps)
        _kernels.strang_segment_batch(re, im, viol, thetas, phis, n)
        for row, i in enumerate(idxs):
            results[i] = EvolutionResult(state=re[row] + 1j * im[row], spec=specs[i])
    return results  # type: ignore[return-value]


def problem_energy(psi: np.ndarray, ham: DiagonalHamiltonian) -> float:
    probs = psi.real**2 + psi.imag**2
    return float(probs @ ham.violations)


def success_probability(psi: np.ndarray, ham: DiagonalHamiltonian) -> float:
    """Total probability on the minimum-violation (ground) subspace."""
    probs = psi.real**2 + psi.imag**2
    return float(probs[ham.violations == ham.ground_energy].sum())


def driver_energy(psi: np.ndarray, n: int) -> float:
    """<psi| sum_i (I - X_i)/2 |psi>; zero exactly on the uniform superposition."""
    cube = psi.reshape((2,) * n)
    acc = 0.0
    for axis in range(n):
        acc += float(np.real(np.vdot(cube, np.flip(cube, axis=axis))))
    return 0.5 * n - 0.5 * acc


# ---------------------------------------------------------------------------
# Dense-matrix routes: independent references for tests and spectral scans.


def dense_driver(n: int) -> np.ndarray:
    size = 1 << n
    h = np.zeros((size, size))
    np.fill_diagonal(h, 0.5 * n)
    for q in range(n):
        stride = 1 << (n - 1 - q)
        for a in range(size):
            if not a & stride:
                h[a, a + stride] -= 0.5
                h[a + stride, a] -= 0.5
    return h


def dense_hamiltonian(ham: DiagonalHamiltonian, s: float) -> np.ndarray:
    h = (1.0 - s) * dense_driver(ham.n)
    h[np.diag_indices_from(h)] += s * ham.violations
    return h


def exact_frozen_evolve(
    ham: DiagonalHamiltonian, s: float, total_time: float, psi: np.ndarray
) -> np.ndarray:
    """Evolve under the fixed H(s) by full eigendecomposition (test oracle)."""
    evals, evecs = scipy.linalg.eigh(dense_hamiltonian(ham, s))
    return evecs @ (np.exp(-1j * evals * total_time) * (evecs.conj().T @ psi))


def frozen_evolve(
    ham: DiagonalHamiltonian,
    s: float,
    total_time: float,
    dt: float,
    psi: np.ndarray,
) -> np.ndarray:
    """Split-step evolution under the fixed H(s) (for comparison against the oracle)."""
    steps = max(1, round(total_time / dt))
    h = total_time / steps
    thetas = np.full(steps, (1.0 - s) * h)
    phis = np.full(steps, s * h)
    re = np.ascontiguousarray(np.real(psi), dtype=np.float64)
    im = np.ascontiguousarray(np.imag(psi), dtype=np.float64)
    _kernels.strang_segment(re, im, ham.violations.astype(np.float64), thetas, phis, ham.n)
    return re + 1j * im


@dataclass
class SpectrumScan:
    s_values: np.ndarray
    e0: np.ndarray
    e1: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return self.e1 - self.e0

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min())

    @property
    def min_gap_location(self) -> float:
        return float(self.s_values[int(np.argmin(self.gaps))])

    def to_csv(self) -> str:
        lines = ["s,e0,e1,gap"]
        for s, a, b in zip(self.s_values, self.e0, self.e1):
            lines.append(f"{s:.10g},{a:.12g},{b:.12g},{b - a:.12g}")
        return "\n".join(lines) + "\n"


def spectrum_scan(ham: DiagonalHamiltonian, s_values=None) -> SpectrumScan:
    """Lowest two eigenvalues of H(s) on a grid of s (dense, so small n only)."""
    if ham.n > 12:
        raise SizeLimitError(f"dense spectrum scan limited to n <= 12, got n={ham.n}")
    if s_values is None:
        s_values = np.linspace(0.0, 1.0, 101)
    s_values = np.asarray(s_values, dtype=np.float64)
    driver = dense_driver(ham.n)
    e0 = np.empty(len(s_values))
    e1 = np.empty(len(s_values))
    for i, s in enumerate(s_values):
        h = (1.0 - s) * driver
        h[np.diag_indices_from(h)] += s * ham.violations
        w = scipy.linalg.eigh(h, eigvals_only=True, subset_by_index=(0, 1))
        e0[i], e1[i] = w
    return SpectrumScan(s_values=s_values, e0=e0, e1=e1)


def convergence_ratio(spec: AnnealSpec, refinement: int = 32) -> float:
    """Error ratio err(dt) / err(dt/2) against a dt/refinement reference.

    A second-order integrator gives ~4 (the reference bias shifts it slightly
    above 4 by a factor (1 - 1/r^2) / (1/4 - 1/r^2)).
    """
    base_steps = spec.num_steps

    def run(multiplier: int) -> np.ndarray:
        steps = base_steps * multiplier
        thetas, phis, _ = _step_angles(spec.schedule, steps)
        re = np.ascontiguousarray(initial_state(spec.hamiltonian.n).real)
        im = np.zeros_like(re)
        _kernels.strang_segment(
            re, im, spec.hamiltonian.violations.astype(np.float64), thetas, phis, spec.hamiltonian.n
        )
        return re + 1j * im

    ref = run(refinement)
    err_coarse = np.linalg.norm(run(1) - ref)
    err_fine = np.linalg.norm(run(2) - ref)
    return float(err_coarse / err_fine)


def state_to_bytes(psi: np.ndarray) -> bytes:
    """Interleaved (re, im) float64 little-endian pairs."""
    flat = np.empty(2 * psi.shape[0], dtype="<f8")
    flat[0::2] = psi.real
    flat[1::2] = psi.imag
    return flat.tobytes()


def state_from_bytes(raw: bytes) -> np.ndarray:
    flat = np.frombuffer(raw, dtype="<f8")
    return flat[0::2] + 1j * flat[1::2]
