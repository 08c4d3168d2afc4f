import numpy as np
import pytest

from annealdesign import sd_baseline as sd
from annealdesign.schedule import ScheduleGrid

GRID_3 = ScheduleGrid(num_modes=3, bound=0.05, step=0.01)  # 11 levels per mode


class CountingEnv:
    def __init__(self, grid, fn):
        self.grid = grid
        self.fn = fn
        self.calls = 0

    def __call__(self, coeffs):
        self.calls += 1
        return float(self.fn(np.asarray(coeffs)))


def test_convex_landscape_reaches_center_from_any_start():
    env = CountingEnv(GRID_3, lambda x: float(np.sum(x * x)))
    cfg = sd.SdConfig(restarts=6, seed=0)
    res = sd.sd_search(env, GRID_3, cfg)
    assert res.best_coeffs == pytest.approx((0.0, 0.0, 0.0))
    for log in res.restart_logs:
        assert log.reached_local_min
        assert log.end_indices == [5, 5, 5]


def test_two_basin_landscape_traps_in_shallow_basin():
    # 1-D landscape over 11 points: deep basin near index 1, shallow near 9,
    # separated by a wall at index 5
    grid = ScheduleGrid(num_modes=1, bound=0.05, step=0.01)
    values = np.array([5.0, 0.0, 2.0, 3.0, 4.0, 9.0, 4.0, 3.5, 3.0, 2.5, 6.0])
    env = CountingEnv(grid, lambda x: float(values[grid.coeff_to_index(float(x[0]))]))

    # exhaustive oracle for the basin structure this test relies on
    def descend(i):
        while True:
            opts = [j for j in (i - 1, i + 1) if 0 <= j < 11 and values[j] < values[i]]
            if not opts:
                return i
            i = min(opts, key=lambda j: values[j])

    assert descend(8) == 9 and descend(2) == 1  # two distinct attractors

    cfg = sd.SdConfig(restarts=1, seed=1, neighbor_order="sequential")
    res = sd.sd_search(env, grid, cfg)
    start = res.restart_logs[0].start_indices[0]
    end = res.restart_logs[0].end_indices[0]
    if start > 5:
        assert end == 9  # trapped: never sees the global minimum at index 1
        assert res.best_energy == pytest.approx(2.5)
    else:
        assert end == 1


def test_accepted_energies_strictly_decrease_within_restart():
    rng = np.random.default_rng(3)
    table = rng.uniform(size=(11, 11, 11))
    env = CountingEnv(GRID_3, lambda x: None)  # replaced below

    trail = []

    def fn(x):
        idx = tuple(GRID_3.coeff_to_index(float(v)) for v in x)
        return float(table[idx])

    class TrackingEnv(CountingEnv):
        def __call__(self, coeffs):
            self.calls += 1
            return fn(coeffs)

    env = TrackingEnv(GRID_3, fn)
    res = sd.sd_search(env, GRID_3, sd.SdConfig(restarts=4, seed=5))
    for log in res.restart_logs:
        # reconstruct the accepted chain by replaying moves is overkill; the
        # invariant end <= start follows from strict descent
        start_e = fn(np.array([GRID_3.index_to_coeff(i) for i in log.start_indices]))
        assert log.end_energy <= start_e
    assert env.calls == res.ledger.total


def test_local_optimality_on_termination():
    rng = np.random.default_rng(11)
    table = rng.uniform(size=(11, 11, 11))

    def fn(x):
        return float(table[tuple(GRID_3.coeff_to_index(float(v)) for v in x)])

    env = CountingEnv(GRID_3, fn)
    res = sd.sd_search(env, GRID_3, sd.SdConfig(restarts=3, seed=2))
    for log in res.restart_logs:
        assert log.reached_local_min
        idx = np.array(log.end_indices)
        here = table[tuple(idx)]
        for mode in range(3):
            for delta in (-1, 1):
                j = idx[mode] + delta
                if 0 <= j < 11:
                    other = idx.copy()
                    other[mode] = j
                    assert table[tuple(other)] >= here


def test_determinism_and_seed_sensitivity():
    def run(seed):
        rng = np.random.default_rng(7)
        table = rng.uniform(size=(11, 11, 11))
        env = CountingEnv(
            GRID_3, lambda x: float(table[tuple(GRID_3.coeff_to_index(float(v)) for v in x)])
        )
        return sd.sd_search(env, GRID_3, sd.SdConfig(restarts=5, seed=seed))

    a, b, c = run(1), run(1), run(2)
    assert a.best_coeffs == b.best_coeffs
    assert a.ledger.per_episode == b.ledger.per_episode
    assert [l.start_indices for l in a.restart_logs] != [l.start_indices for l in c.restart_logs]


def test_query_budget_truncates_exactly():
    rng = np.random.default_rng(0)
    table = rng.uniform(size=(11, 11, 11))
    env = CountingEnv(
        GRID_3, lambda x: float(table[tuple(GRID_3.coeff_to_index(float(v)) for v in x)])
    )
    res = sd.sd_search(env, GRID_3, sd.SdConfig(restarts=100, seed=0, query_budget=137))
    assert res.ledger.total == 137
    assert res.truncated


def test_best_improvement_variant_picks_steepest():
    grid = ScheduleGrid(num_modes=1, bound=0.02, step=0.01)  # 5 points
    values = np.array([3.0, 1.0, 2.0, 0.5, 3.0])
    env = CountingEnv(grid, lambda x: float(values[grid.coeff_to_index(float(x[0]))]))
    # force the start at index 2 by trying seeds until one lands there
    for seed in range(50):
        if np.random.default_rng([seed, 0]).integers(0, 5, size=1)[0] == 2:
            break
    else:
        pytest.skip("no seed landed on the middle start")
    res = sd.sd_search(env, grid, sd.SdConfig(restarts=1, seed=seed, acceptance="best"))
    assert res.restart_logs[0].end_indices == [3]
    assert res.best_energy == pytest.approx(0.5)


def test_sequential_order_probes_low_mode_first():
    env = CountingEnv(GRID_3, lambda x: float(np.sum(x * x)))
    res = sd.sd_search(env, GRID_3, sd.SdConfig(restarts=1, seed=4, neighbor_order="sequential"))
    assert res.restart_logs[0].reached_local_min


def test_every_restart_terminates_and_logs():
    rng = np.random.default_rng(1)
    table = rng.uniform(size=(11, 11, 11))
    env = CountingEnv(
        GRID_3, lambda x: float(table[tuple(GRID_3.coeff_to_index(float(v)) for v in x)])
    )
    res = sd.sd_search(env, GRID_3, sd.SdConfig(restarts=8, seed=9))
    assert len(res.restart_logs) == 8
    assert res.ledger.total == sum(l.queries for l in res.restart_logs)
    assert min(l.end_energy for l in res.restart_logs) == pytest.approx(res.best_energy)
    lines = res.log_lines().strip().splitlines()
    assert len(lines) == 8


def test_config_validation():
    with pytest.raises(ValueError):
        sd.SdConfig(restarts=0)
    with pytest.raises(ValueError):
        sd.SdConfig(neighbor_order="spiral")
    with pytest.raises(ValueError):
        sd.SdConfig(acceptance="metropolis")
