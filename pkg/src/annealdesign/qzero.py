"""Self-play tree search guided by policy/value networks.

One episode builds a complete schedule coefficient-by-coefficient. For each
of the M actual moves the searcher runs a fixed number of guided simulations
from the current root: descend by the prior-weighted upper-confidence rule to
an unexpanded node, expand it with network priors (or, at a complete
schedule, score it +1/-1 by whether the annealed energy lands within the win
margin of the ground energy), and add that leaf value onto every edge of the
simulation path. The move itself is sampled from the root visit frequencies,
which together with the final win/loss outcome become training targets for
the networks.

Queries are counted exactly as in the plain tree search: one per distinct
complete schedule evaluated. Terminal energies are cached per node, so
re-visiting a leaf costs nothing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError
from .mcts import QueryLedger
from .nets import NetsConfig, PolicyValueNets
from .sat_core import SatInstance, build_h_info
from .schedule import ScheduleGrid


@dataclass(frozen=True)
class QzState:
    """A partial schedule as the networks see it.

    prefix always has length M with zeros past the chosen levels; since a
    chosen coefficient can itself be 0, the level is kept explicitly and is
    what drives the policy mask (the network input does not disambiguate).
    """

    prefix: tuple[float, ...]
    level: int
    h_info_vec: np.ndarray

    def input_vector(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.prefix, dtype=np.float64), self.h_info_vec])


def state_for(instance: SatInstance, grid: ScheduleGrid, indices: tuple[int, ...]) -> QzState:
    """Build the network-facing state for a chosen index prefix."""
    coeffs = [grid.index_to_coeff(i) for i in indices]
    coeffs += [0.0] * (grid.num_modes - len(indices))
    return QzState(tuple(coeffs), len(indices), build_h_info(instance).vectorized())


def nets_for(instance: SatInstance, grid: ScheduleGrid, seed: int = 0, **overrides) -> PolicyValueNets:
    """Networks shaped for one instance family (fixed clause and variable counts)."""
    return PolicyValueNets(
        NetsConfig(
            input_dim=grid.num_modes + instance.m * instance.n,
            num_levels=grid.levels_per_mode,
            num_modes=grid.num_modes,
            seed=seed,
            **overrides,
        )
    )


def padded_h_info_vec(instance: SatInstance, trained_m: int, trained_n: int) -> np.ndarray:
    """Reshape a smaller instance's clause matrix to a network trained on a
    larger (m, n) family by zero-padding the missing rows/columns; a zero
    entry means "variable absent from clause", so padding is semantically
    inert. Larger instances cannot be shrunk to fit."""
    if instance.m > trained_m or instance.n > trained_n:
        raise ValueError(
            f"instance ({instance.m}, {instance.n}) exceeds the trained "
            f"shape ({trained_m}, {trained_n})"
        )
    padded = np.zeros((trained_m, trained_n))
    padded[: instance.m, : instance.n] = build_h_info(instance).entries
    return padded.ravel()


@dataclass
class QzConfig:
    sims_per_move: int = 6
    exploration_start: float = 3.0  # decays linearly across the episode budget
    exploration_end: float = 0.5
    win_margin: float = 0.01  # win when energy - ground energy < this
    max_episodes: int = 200
    episodes_per_round: int = 5
    epochs_per_round: int = 5
    batch_size: int = 32
    lr_start: float = 0.008  # geometric decay to lr_end across rounds
    lr_end: float = 0.0008
    seed: int = 0
    max_queries: int | None = None

    def __post_init__(self):
        if self.sims_per_move < 1:
            raise ValueError("need at least one simulation per move")
        if self.win_margin <= 0:
            raise ValueError("win_margin must be positive")
        if self.max_episodes < 1 or self.episodes_per_round < 1:
            raise ValueError("episode counts must be at least 1")

    def exploration_at(self, episode: int) -> float:
        if self.max_episodes == 1:
            return self.exploration_start
        frac = min(episode, self.max_episodes - 1) / (self.max_episodes - 1)
        return self.exploration_start + frac * (self.exploration_end - self.exploration_start)

    def lr_at(self, round_index: int) -> float:
        total_rounds = max(1, math.ceil(self.max_episodes / self.episodes_per_round))
        if total_rounds == 1:
            return self.lr_start
        frac = min(round_index, total_rounds - 1) / (total_rounds - 1)
        return self.lr_start * (self.lr_end / self.lr_start) ** frac


class PuctNode:
    """Edge statistics for the 41 candidate actions out of one state."""

    __slots__ = ("priors", "visit_counts", "merit_sums", "children", "expanded")

    def __init__(self, num_actions: int):
        self.priors = np.zeros(num_actions)
        self.visit_counts = np.zeros(num_actions, dtype=np.int64)
        self.merit_sums = np.zeros(num_actions)
        self.children: dict[int, PuctNode] = {}
        self.expanded = False


def puct_score(node: PuctNode, action: int, exploration: float) -> float:
    """Prior-weighted UCB for one edge; an unvisited edge has no exploit term."""
    n = node.visit_counts[action]
    exploit = node.merit_sums[action] / n if n > 0 else 0.0
    total = node.visit_counts.sum()
    return exploit + exploration * node.priors[action] * math.sqrt(total) / (1 + n)


def evaluate_networks(nets: PolicyValueNets, state: QzState):
    """Masked priors over the current level's actions plus the value estimate."""
    if state.level >= nets.config.num_modes:
        raise ValueError("terminal states are scored by the annealer, not the networks")
    return nets.evaluate(state.input_vector(), state.level)


@dataclass
class EpisodeStep:
    state: QzState
    visit_policy: np.ndarray  # over the level's actions, sums to 1
    outcome: float = 0.0  # +1/-1, filled in after the episode ends


@dataclass
class EpisodeRecord:
    steps: list[EpisodeStep]
    final_indices: tuple[int, ...]
    final_energy: float
    win: bool
    queries: int


class _Searcher:
    """Owns the tree, the terminal-energy cache, and the query ledger."""

    def __init__(self, nets, env, instance, grid, config, h_info_vec=None):
        self.nets = nets
        self.env = env
        self.instance = instance
        self.grid = grid
        self.config = config
        self.ledger = QueryLedger()
        self.energy_cache: dict[tuple[int, ...], float] = {}
        self.h_info_vec = (
            build_h_info(instance).vectorized() if h_info_vec is None else h_info_vec
        )
        self.ground_energy = float(getattr(env, "ground_energy", 0.0))
        self.best_energy = math.inf
        self.best_indices: tuple[int, ...] | None = None
        self.first_win_queries: int | None = None

    def terminal_energy(self, indices: tuple[int, ...]) -> float:
        if indices in self.energy_cache:
            return self.energy_cache[indices]
        coeffs = tuple(self.grid.index_to_coeff(i) for i in indices)
        try:
            energy = float(self.env(coeffs))
        except Exception as exc:
            raise EvaluationError(f"schedule evaluation failed: {exc}") from exc
        self.ledger.charge()
        self.energy_cache[indices] = energy
        if energy < self.best_energy:
            self.best_energy = energy
            self.best_indices = indices
        if self.first_win_queries is None and energy - self.ground_energy < self.config.win_margin:
            self.first_win_queries = self.ledger.total
        return energy

    def _state(self, indices: tuple[int, ...]) -> QzState:
        coeffs = [self.grid.index_to_coeff(i) for i in indices]
        coeffs += [0.0] * (self.grid.num_modes - len(indices))
        return QzState(tuple(coeffs), len(indices), self.h_info_vec)

    def _expand(self, node: PuctNode, indices: tuple[int, ...]) -> float:
        priors, value = self.nets.evaluate(self._state(indices).input_vector(), len(indices))
        node.priors = priors
        node.expanded = True
        return value

    def _simulate(self, root: PuctNode, root_indices: tuple[int, ...], exploration: float):
        """One guided descent; returns the leaf value backed up along the path."""
        node = root
        indices = root_indices
        path: list[tuple[PuctNode, int]] = []
        num_modes = self.grid.num_modes
        while True:
            if len(indices) == num_modes:
                energy = self.terminal_energy(indices)
                leaf_value = 1.0 if energy - self.ground_energy < self.config.win_margin else -1.0
                break
            if not node.expanded:
                leaf_value = self._expand(node, indices)
                break
            scores = [puct_score(node, a, exploration) for a in range(self.grid.levels_per_mode)]
            action = int(np.argmax(scores))  # argmax takes the lowest index on ties
            if action not in node.children:
                node.children[action] = PuctNode(self.grid.levels_per_mode)
            path.append((node, action))
            node = node.children[action]
            indices = indices + (action,)
        for parent, action in path:
            parent.visit_counts[action] += 1
            parent.merit_sums[action] += leaf_value
        return leaf_value

    def play_episode(self, rng: np.random.Generator, exploration: float) -> EpisodeRecord:
        self.ledger.open_episode()
        queries_before = self.ledger.total
        root = PuctNode(self.grid.levels_per_mode)
        indices: tuple[int, ...] = ()
        steps: list[EpisodeStep] = []
        for _ in range(self.grid.num_modes):
            if not root.expanded:
                self._expand(root, indices)
            for _ in range(self.config.sims_per_move):
                self._simulate(root, indices, exploration)
            visits = root.visit_counts.astype(np.float64)
            pi = visits / visits.sum()
            steps.append(EpisodeStep(state=self._state(indices), visit_policy=pi))
            action = int(rng.choice(len(pi), p=pi))
            if action not in root.children:
                root.children[action] = PuctNode(self.grid.levels_per_mode)
            root = root.children[action]  # keep the chosen subtree for the next move
            indices = indices + (action,)
        final_energy = self.terminal_energy(indices)
        win = final_energy - self.ground_energy < self.config.win_margin
        outcome = 1.0 if win else -1.0
        for step in steps:
            step.outcome = outcome
        return EpisodeRecord(
            steps=steps,
            final_indices=indices,
            final_energy=final_energy,
            win=win,
            queries=self.ledger.total - queries_before,
        )


def self_play_episode(nets, env, instance, grid, config, rng=None, exploration=None) -> EpisodeRecord:
    """Run a single standalone episode (fresh tree and cache)."""
    searcher = _Searcher(nets, env, instance, grid, config)
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    c = exploration if exploration is not None else config.exploration_start
    return searcher.play_episode(rng, c)


def _batch_arrays(nets, steps: list[EpisodeStep]):
    inputs = np.stack([s.state.input_vector() for s in steps])
    levels = np.array([s.state.level for s in steps], dtype=np.int64)
    policy = np.stack([s.visit_policy for s in steps])
    values = np.array([s.outcome for s in steps])
    return inputs, levels, policy, values


def train_step(nets: PolicyValueNets, batch, lr: float) -> float:
    """One gradient-descent update on (inputs, levels, policy_targets, value_targets)."""
    loss, grads = nets.loss_and_grads(*batch)
    nets.apply_grads(grads, lr)
    return loss


@dataclass
class TrainingRound:
    round_index: int
    episodes: int
    mean_loss: float
    wins: int
    queries: int

    @staticmethod
    def csv_header() -> str:
        return "round,episodes,mean_loss,wins,queries"

    def csv_row(self) -> str:
        return f"{self.round_index},{self.episodes},{self.mean_loss:.6g},{self.wins},{self.queries}"


@dataclass
class QzResult:
    best_coeffs: tuple[float, ...]
    best_energy: float
    won: bool
    first_win_queries: int | None
    ledger: QueryLedger
    episodes: int
    episode_records: list[EpisodeRecord]
    training_log: list[TrainingRound]
    converged: bool  # False when the budget ran out without a win

    def to_json(self, success_probability: float | None = None) -> str:
        doc: dict = {
            "x": list(self.best_coeffs),
            "energy": self.best_energy,
            "queries": self.ledger.total,
            "won": self.won,
            "first_win_queries": self.first_win_queries,
        }
        if success_probability is not None:
            doc["success_probability"] = success_probability
        return json.dumps(doc, indent=1)


def solve_instance(
    nets: PolicyValueNets,
    env,
    instance: SatInstance,
    grid: ScheduleGrid,
    config: QzConfig,
    fine_tune: bool = True,
    h_info_vec: np.ndarray | None = None,
) -> QzResult:
    """Alternate self-play rounds and training epochs until a win or the budget.

    The networks are updated in place when fine_tune is on; pass
    nets.clone() to keep a pre-trained checkpoint pristine. `h_info_vec`
    overrides the instance encoding, e.g. padded_h_info_vec when reusing
    networks trained on a larger (m, n) family.
    """
    searcher = _Searcher(nets, env, instance, grid, config, h_info_vec=h_info_vec)
    rng = np.random.default_rng(config.seed)
    records: list[EpisodeRecord] = []
    training_log: list[TrainingRound] = []
    episodes_done = 0
    round_index = 0
    while episodes_done < config.max_episodes:
        if config.max_queries is not None and searcher.ledger.total >= config.max_queries:
            break
        round_records = []
        for _ in range(config.episodes_per_round):
            if episodes_done >= config.max_episodes:
                break
            record = searcher.play_episode(rng, config.exploration_at(episodes_done))
            episodes_done += 1
            round_records.append(record)
            records.append(record)
            if searcher.first_win_queries is not None:
                break
        mean_loss = math.nan
        if fine_tune and records:
            steps = [s for r in records for s in r.steps]
            losses = []
            lr = config.lr_at(round_index)
            for _ in range(config.epochs_per_round):
                order = rng.permutation(len(steps))
                for lo in range(0, len(steps), config.batch_size):
                    chunk = [steps[i] for i in order[lo : lo + config.batch_size]]
                    losses.append(train_step(nets, _batch_arrays(nets, chunk), lr))
            mean_loss = float(np.mean(losses))
        training_log.append(
            TrainingRound(
                round_index=round_index,
                episodes=len(round_records),
                mean_loss=mean_loss,
                wins=sum(r.win for r in round_records),
                queries=searcher.ledger.total,
            )
        )
        round_index += 1
        if searcher.first_win_queries is not None:
            break
    assert searcher.best_indices is not None
    return QzResult(
        best_coeffs=tuple(grid.index_to_coeff(i) for i in searcher.best_indices),
        best_energy=searcher.best_energy,
        won=searcher.first_win_queries is not None,
        first_win_queries=searcher.first_win_queries,
        ledger=searcher.ledger,
        episodes=episodes_done,
        episode_records=records,
        training_log=training_log,
        converged=searcher.first_win_queries is not None,
    )


# ---------------------------------------------------------------------------
# Imitation pre-training from already-solved instances


@dataclass(frozen=True)
class PretrainSample:
    input_vec: np.ndarray
    level: int
    onehot_index: int  # position in the full M x levels policy vector
    value_label: float = 1.0


def build_pretrain_dataset(
    solved: list[tuple[SatInstance, tuple[float, ...]]], grid: ScheduleGrid
) -> list[PretrainSample]:
    """M samples per solved instance: each prefix of the solution labels its next move."""
    levels = grid.levels_per_mode
    samples = []
    for instance, coeffs in solved:
        indices = tuple(grid.coeff_to_index(x) for x in coeffs)  # validates on-grid
        h_vec = build_h_info(instance).vectorized()
        for level in range(grid.num_modes):
            prefix = [grid.index_to_coeff(i) for i in indices[:level]]
            prefix += [0.0] * (grid.num_modes - level)
            state = QzState(tuple(prefix), level, h_vec)
            samples.append(
                PretrainSample(
                    input_vec=state.input_vector(),
                    level=level,
                    onehot_index=indices[level] + levels * level,
                )
            )
    return samples


def pretrain_batch_arrays(nets: PolicyValueNets, samples: list[PretrainSample]):
    levels_per_mode = nets.config.num_levels
    inputs = np.stack([s.input_vec for s in samples])
    levels = np.array([s.level for s in samples], dtype=np.int64)
    policy = np.zeros((len(samples), levels_per_mode))
    for row, s in enumerate(samples):
        policy[row, s.onehot_index - s.level * levels_per_mode] = 1.0
    values = np.array([s.value_label for s in samples])
    return inputs, levels, policy, values


def pretrain(
    nets: PolicyValueNets,
    dataset: list[PretrainSample],
    epochs: int = 50,
    lr: float = 0.008,
    batch_size: int = 32,
    seed: int = 0,
) -> list[float]:
    """Gradient descent over the imitation dataset; returns per-epoch mean losses."""
    rng = np.random.default_rng(seed)
    history = []
    for _ in range(epochs):
        order = rng.permutation(len(dataset))
        losses = []
        for lo in range(0, len(dataset), batch_size):
            chunk = [dataset[i] for i in order[lo : lo + batch_size]]
            losses.append(train_step(nets, pretrain_batch_arrays(nets, chunk), lr))
        history.append(float(np.mean(losses)))
    return history


def dataset_to_jsonl(dataset: list[PretrainSample]) -> str:
    lines = [
        json.dumps(
            {
                "s_vec": s.input_vec.tolist(),
                "level": s.level,
                "p_onehot_index": s.onehot_index,
                "v": s.value_label,
            }
        )
        for s in dataset
    ]
    return "\n".join(lines) + "\n"


def dataset_from_jsonl(text: str) -> list[PretrainSample]:
    out = []
    for line in text.strip().splitlines():
        doc = json.loads(line)
        out.append(
            PretrainSample(
                input_vec=np.asarray(doc["s_vec"], dtype=np.float64),
                level=int(doc["level"]),
                onehot_index=int(doc["p_onehot_index"]),
                value_label=float(doc["v"]),
            )
        )
    return out


def mean_loss(nets: PolicyValueNets, batches) -> float:
    """Evaluate the loss without updating (for before/after comparisons)."""
    losses = [nets.loss_and_grads(*batch)[0] for batch in batches]
    return float(np.mean(losses))
