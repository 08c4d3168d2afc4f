"""Monte Carlo tree search over the schedule-coefficient tree.

Level k of the tree fixes the k-th sine coefficient; a path from the root to
level M is a complete schedule. Each search episode runs the usual four
stages: descend by UCB through fully expanded nodes, expand a batch of
children at the first node that still has untried coefficient values, run a
fixed number of uniform random playouts per new child (each playout completes
the path and costs one annealer query), and backpropagate the playout merits
to the root.

Query accounting is strict: the ledger counts every evaluation of a complete
schedule, and nothing else. The returned solution is the best complete
schedule ever evaluated, which the tree statistics do not have to agree with.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError
from .schedule import ScheduleGrid


@dataclass
class QueryLedger:
    """Count of schedule evaluations, with a per-episode breakdown."""

    total: int = 0
    per_episode: list[int] = field(default_factory=list)

    def open_episode(self):
        self.per_episode.append(0)

    def charge(self, count: int = 1):
        self.total += count
        if self.per_episode:
            self.per_episode[-1] += count


@dataclass
class MctsConfig:
    exploration_weight: float = 2.0
    children_per_expansion: int = 10
    rollouts_per_child: int = 5
    episodes: int = 80  # at 50 queries each this matches 40 default-length descent runs
    merit: str = "energy"  # or "success" (env must report success probabilities)
    merit_scale: float | None = None  # energy that maps to merit 0; env.num_clauses if unset
    seed: int = 0
    max_queries: int | None = None  # stop before any episode that would exceed this

    def __post_init__(self):
        if self.exploration_weight <= 0:
            raise ValueError("exploration_weight must be positive")
        if self.children_per_expansion < 1 or self.rollouts_per_child < 1:
            raise ValueError("expansion and rollout counts must be at least 1")
        if self.merit not in ("energy", "success"):
            raise ValueError(f"unknown merit mode {self.merit!r}")


class SearchNode:
    """One tree node: the choice of one coefficient value at one level."""

    __slots__ = ("level", "coeff_index", "visits", "merit_sum", "direct_merit", "children", "untried")

    def __init__(self, level: int, coeff_index: int | None, num_candidates: int):
        self.level = level
        self.coeff_index = coeff_index
        self.visits = 0
        self.merit_sum = 0.0
        # Slot reserved alongside visits/merit_sum at expansion time; nothing
        # reads it back, it exists so node state is explicit and inspectable.
        self.direct_merit = 0.0
        self.children: list[SearchNode] = []
        self.untried: list[int] = list(range(num_candidates))

    @property
    def fully_expanded(self) -> bool:
        return not self.untried


def ucb_score(node: SearchNode, parent_visits: float, exploration_weight: float) -> float:
    """Mean merit plus the visit-count exploration bonus; unvisited scores +inf."""
    if node.visits == 0:
        return math.inf
    exploit = node.merit_sum / node.visits
    explore = exploration_weight * math.sqrt(2.0 * math.log(parent_visits) / node.visits)
    return exploit + explore


def merit_of(energy: float, scale: float) -> float:
    """Map an energy in [0, scale] to a merit in [0, 1], higher is better."""
    return max(0.0, 1.0 - energy / scale)


@dataclass
class EpisodeStats:
    episode: int
    expanded_path: list[int]  # coefficient indices from root to the expanded node
    children_added: int
    queries: int
    best_energy_so_far: float


@dataclass
class MctsResult:
    best_coeffs: tuple[float, ...]
    best_energy: float
    ledger: QueryLedger
    episode_log: list[EpisodeStats]
    root: SearchNode

    def log_lines(self) -> str:
        """Episode log as JSON-lines."""
        out = []
        queries = 0
        for ep in self.episode_log:
            queries += ep.queries
            out.append(
                json.dumps(
                    {
                        "episode": ep.episode,
                        "best_energy_so_far": ep.best_energy_so_far,
                        "queries_cumulative": queries,
                        "selected_path": ep.expanded_path,
                    }
                )
            )
        return "\n".join(out) + "\n"

    def to_json(self, success_probability: float | None = None) -> str:
        doc: dict = {
            "x": list(self.best_coeffs),
            "energy": self.best_energy,
            "queries": self.ledger.total,
        }
        if success_probability is not None:
            doc["success_probability"] = success_probability
        return json.dumps(doc, indent=1)


def _evaluate_batch(env, coeff_batch: list[tuple[float, ...]], want_success: bool):
    """Evaluate complete schedules; returns (energies, merit_bases).

    merit_bases is success probabilities in "success" mode, else the energies.
    Uses the env's batch hooks when present so all playouts of one expansion
    share a single simulator call.
    """
    try:
        if want_success:
            if not hasattr(env, "evaluate_many_with_success"):
                raise EvaluationError("merit='success' needs env.evaluate_many_with_success")
            energies, successes = env.evaluate_many_with_success(coeff_batch)
            return list(energies), list(successes)
        if hasattr(env, "evaluate_many"):
            energies = list(env.evaluate_many(coeff_batch))
        else:
            energies = [float(env(x)) for x in coeff_batch]
        return energies, energies
    except EvaluationError:
        raise
    except Exception as exc:
        raise EvaluationError(f"schedule evaluation failed: {exc}") from exc


def run_search(env, grid: ScheduleGrid, config: MctsConfig) -> MctsResult:
    """Run the configured number of episodes and return the best schedule found.

    `env` maps a coefficient tuple to its final problem energy; it may also
    provide evaluate_many / evaluate_many_with_success batch hooks and a
    num_clauses attribute (used as the default merit scale).
    """
    rng = np.random.default_rng(config.seed)
    levels = grid.levels_per_mode
    num_modes = grid.num_modes
    scale = config.merit_scale
    if scale is None:
        scale = float(getattr(env, "num_clauses", 1.0))
    want_success = config.merit == "success"

    root = SearchNode(level=0, coeff_index=None, num_candidates=levels)
    ledger = QueryLedger()
    log: list[EpisodeStats] = []
    best_coeffs: tuple[float, ...] | None = None
    best_energy = math.inf

    for episode in range(config.episodes):
        if config.max_queries is not None and ledger.total >= config.max_queries:
            break
        ledger.open_episode()

        # Selection: descend while the node is fully expanded and not terminal.
        path = [root]
        node = root
        while node.fully_expanded and node.children and node.level < num_modes:
            node = max(
                node.children,
                key=lambda c: (ucb_score(c, node.visits, config.exploration_weight), -c.coeff_index),
            )
            path.append(node)
        prefix = [p.coeff_index for p in path[1:]]

        # Expansion. A terminal node (complete path) is re-evaluated in place,
        # counted as one expanded "child" so the per-episode ledger arithmetic
        # (children x rollouts) stays exact.
        if node.level == num_modes:
            new_children = [node]
        else:
            take = min(config.children_per_expansion, len(node.untried))
            picks = rng.choice(len(node.untried), size=take, replace=False)
            chosen = sorted(node.untried[i] for i in picks)
            for idx in chosen:
                node.untried.remove(idx)
            new_children = []
            for idx in chosen:
                child_candidates = levels if node.level + 1 < num_modes else 0
                child = SearchNode(node.level + 1, idx, num_candidates=child_candidates)
                node.children.append(child)
                new_children.append(child)

        # Simulation: playouts complete each new child's path uniformly.
        playout_owner: list[SearchNode] = []
        batch: list[tuple[float, ...]] = []
        for child in new_children:
            child_prefix = prefix + [child.coeff_index] if child is not node else prefix
            remaining = num_modes - len(child_prefix)
            for _ in range(config.rollouts_per_child):
                tail = rng.integers(0, levels, size=remaining) if remaining else []
                indices = list(child_prefix) + [int(i) for i in tail]
                batch.append(tuple(grid.index_to_coeff(i) for i in indices))
                playout_owner.append(child)
        energies, merit_bases = _evaluate_batch(env, batch, want_success)
        ledger.charge(len(batch))

        # Backpropagation: each playout bumps visits/merit from its child to the root.
        for child, coeffs, energy, basis in zip(playout_owner, batch, energies, merit_bases):
            merit = float(basis) if want_success else merit_of(float(energy), scale)
            if child is not node:
                child.visits += 1
                child.merit_sum += merit
                child.direct_merit = merit
            for ancestor in path:
                ancestor.visits += 1
                ancestor.merit_sum += merit
            if energy < best_energy:
                best_energy = float(energy)
                best_coeffs = coeffs

        log.append(
            EpisodeStats(
                episode=episode,
                expanded_path=prefix,
                children_added=len(new_children),
                queries=len(batch),
                best_energy_so_far=best_energy,
            )
        )

    assert best_coeffs is not None, "no episodes ran; check episodes/max_queries"
    return MctsResult(
        best_coeffs=best_coeffs,
        best_energy=best_energy,
        ledger=ledger,
        episode_log=log,
        root=root,
    )
