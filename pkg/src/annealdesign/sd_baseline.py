"""Stochastic descent over the coefficient grid, the baseline optimizer.

Each restart starts from a uniformly random grid point and repeatedly probes
single-coordinate moves of one grid step (up or down, within bounds), taking
the first strictly better neighbor it finds, until a full sweep over all
neighbors fails to improve. Every neighbor evaluation is one annealer query;
the comparison against tree search is made at equal total query counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError
from .mcts import QueryLedger
from .schedule import ScheduleGrid


@dataclass
class SdConfig:
    restarts: int = 10
    max_sweeps: int = 100  # neighbor passes per restart before giving up
    neighbor_order: str = "random"  # or "sequential"
    acceptance: str = "first"  # move at the first improvement, or "best" of the sweep
    seed: int = 0
    query_budget: int | None = None  # hard cap across all restarts, truncates mid-sweep

    def __post_init__(self):
        if self.max_sweeps < 1 or self.restarts < 1:
            raise ValueError("restarts and max_sweeps must be at least 1")
        if self.neighbor_order not in ("random", "sequential"):
            raise ValueError(f"unknown neighbor order {self.neighbor_order!r}")
        if self.acceptance not in ("first", "best"):
            raise ValueError(f"unknown acceptance rule {self.acceptance!r}")


@dataclass
class RestartLog:
    start_indices: list[int]
    end_indices: list[int]
    end_energy: float
    queries: int
    sweeps: int
    reached_local_min: bool


@dataclass
class SdResult:
    best_coeffs: tuple[float, ...]
    best_energy: float
    ledger: QueryLedger
    restart_logs: list[RestartLog]
    truncated: bool = False  # query budget ran out mid-descent

    def to_json(self, success_probability: float | None = None) -> str:
        doc: dict = {
            "x": list(self.best_coeffs),
            "energy": self.best_energy,
            "queries": self.ledger.total,
        }
        if success_probability is not None:
            doc["success_probability"] = success_probability
        return json.dumps(doc, indent=1)

    def log_lines(self) -> str:
        out = []
        queries = 0
        for i, r in enumerate(self.restart_logs):
            queries += r.queries
            out.append(
                json.dumps(
                    {
                        "episode": i,
                        "best_energy_so_far": min(x.end_energy for x in self.restart_logs[: i + 1]),
                        "queries_cumulative": queries,
                        "selected_path": r.end_indices,
                    }
                )
            )
        return "\n".join(out) + "\n"


def _neighbors(indices: np.ndarray, levels: int) -> list[np.ndarray]:
    out = []
    for mode in range(indices.shape[0]):
        for delta in (-1, +1):
            j = indices[mode] + delta
            if 0 <= j < levels:
                cand = indices.copy()
                cand[mode] = j
                out.append(cand)
    return out


def sd_search(env, grid: ScheduleGrid, config: SdConfig) -> SdResult:
    """Greedy local search with restarts; returns the best point seen anywhere.

    Restart r draws its randomness from a (seed, r) substream, so logs do not
    depend on restart execution order (budget truncation excepted).
    """
    levels = grid.levels_per_mode
    ledger = QueryLedger()
    logs: list[RestartLog] = []
    best_energy = np.inf
    best_indices: np.ndarray | None = None
    truncated = False

    def evaluate(indices: np.ndarray) -> float:
        coeffs = tuple(grid.index_to_coeff(int(i)) for i in indices)
        try:
            return float(env(coeffs))
        except Exception as exc:
            raise EvaluationError(f"schedule evaluation failed: {exc}") from exc

    def out_of_budget() -> bool:
        return config.query_budget is not None and ledger.total >= config.query_budget

    for restart in range(config.restarts):
        if out_of_budget():
            truncated = True
            break
        rng = np.random.default_rng([config.seed, restart])
        current = rng.integers(0, levels, size=grid.num_modes)
        ledger.open_episode()
        current_energy = evaluate(current)
        ledger.charge()
        start = current.copy()
        if current_energy < best_energy:
            best_energy, best_indices = current_energy, current.copy()

        sweeps = 0
        settled = False
        while sweeps < config.max_sweeps and not settled and not truncated:
            sweeps += 1
            cands = _neighbors(current, levels)
            if config.neighbor_order == "random":
                cands = [cands[i] for i in rng.permutation(len(cands))]
            improved = False
            best_move = None
            for cand in cands:
                if out_of_budget():
                    truncated = True
                    break
                energy = evaluate(cand)
                ledger.charge()
                if energy < best_energy:
                    best_energy, best_indices = energy, cand.copy()
                if energy < current_energy:
                    if config.acceptance == "first":
                        current, current_energy = cand, energy
                        improved = True
                        break
                    if best_move is None or energy < best_move[1]:
                        best_move = (cand, energy)
            if config.acceptance == "best" and best_move is not None and not truncated:
                current, current_energy = best_move
                improved = True
            if not improved and not truncated:
                settled = True

        logs.append(
            RestartLog(
                start_indices=[int(i) for i in start],
                end_indices=[int(i) for i in current],
                end_energy=current_energy,
                queries=ledger.per_episode[-1],
                sweeps=sweeps,
                reached_local_min=settled,
            )
        )

    assert best_indices is not None, "no restart ran; check restarts/query_budget"
    return SdResult(
        best_coeffs=tuple(grid.index_to_coeff(int(i)) for i in best_indices),
        best_energy=float(best_energy),
        ledger=ledger,
        restart_logs=logs,
        truncated=truncated,
    )
