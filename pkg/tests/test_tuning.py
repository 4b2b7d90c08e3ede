import numpy as np
import pytest

from robustmix import ConfigSpace, baseline_grid, gen_synthetic, sample_st_pairs, tune
from robustmix.evaluation import split_scenarios
from robustmix.tuning import (
    baseline_lambdas,
    perturb_config,
    sample_config,
)
from robustmix.uncertainty import LAMBDA_RANGES, ScenarioMatrix


@pytest.fixture(scope="module")
def small_problem():
    graph, data = gen_synthetic(3, 3, 12, seed=4)
    pairs = sample_st_pairs(graph, 3, min_hops=2, seed=4)
    split = split_scenarios(data.K, 0.75, seed=4)
    return graph, data, pairs, split


class TestSampleConfig:
    def test_singleton_space(self, rng):
        space = ConfigSpace(max_parents=1, allowed_types=("interval",))
        for _ in range(10):
            cfg = sample_config(space, rng)
            assert len(cfg.parents) == 1
            assert cfg.parents[0].set_type == "interval"

    def test_degenerate_lambda_range(self, rng):
        space = ConfigSpace(
            max_parents=1,
            allowed_types=("interval",),
            lambda_ranges={"interval": (0.3, 0.3)},
        )
        cfg = sample_config(space, rng)
        assert cfg.parents[0].lam == 0.3

    def test_draws_mostly_distinct(self, rng):
        space = ConfigSpace()
        configs = [sample_config(space, rng) for _ in range(100)]
        assert len(set(configs)) >= 99

    def test_lambdas_in_range(self, rng):
        space = ConfigSpace()
        for _ in range(50):
            for parent in sample_config(space, rng).parents:
                lo, hi = LAMBDA_RANGES[parent.set_type]
                assert lo <= parent.lam <= hi
                assert 0.0 <= parent.weight <= 1.0

    def test_perturb_stays_in_range(self, rng):
        space = ConfigSpace()
        cfg = sample_config(space, rng)
        for _ in range(50):
            cfg = perturb_config(cfg, space, rng)
            for parent in cfg.parents:
                lo, hi = LAMBDA_RANGES[parent.set_type]
                assert lo <= parent.lam <= hi
                assert 0.0 <= parent.weight <= 1.0

    def test_space_validation(self):
        with pytest.raises(ValueError):
            ConfigSpace(budget=0)
        with pytest.raises(ValueError):
            ConfigSpace(max_parents=0)
        with pytest.raises(ValueError):
            ConfigSpace(allowed_types=())


class TestTune:
    def test_budget_one(self, small_problem):
        graph, data, pairs, split = small_problem
        result = tune(
            ConfigSpace(budget=1), graph, pairs, data, split, (0.4, 0.3, 0.3), seed=2
        )
        assert result.evaluations == 1
        assert not result.completed_full_eval
        assert len(result.best.parents) >= 1

    def test_deterministic(self, small_problem):
        graph, data, pairs, split = small_problem
        kwargs = dict(w=(0.4, 0.3, 0.3), seed=7)
        a = tune(ConfigSpace(budget=120), graph, pairs, data, split, **kwargs)
        b = tune(ConfigSpace(budget=120), graph, pairs, data, split, **kwargs)
        assert a.best == b.best
        assert a.best_cost == b.best_cost
        assert [e.cost for e in a.trace] == [e.cost for e in b.trace]

    def test_budget_respected_and_best_of_trace(self, small_problem):
        graph, data, pairs, split = small_problem
        result = tune(
            ConfigSpace(budget=200), graph, pairs, data, split, (0.4, 0.3, 0.3), seed=3
        )
        assert result.evaluations <= 200
        assert result.completed_full_eval
        full = [e for e in result.trace if e.pairs_used == len(pairs)]
        assert result.best_cost <= min(e.cost for e in full) + 1e-12

    def test_flat_landscape_returns_nominal_cost(self):
        graph, _ = gen_synthetic(3, 3, 4, seed=0)
        data = ScenarioMatrix(np.tile(np.arange(1.0, graph.n + 1.0), (4, 1)))
        pairs = [(0, graph.num_nodes - 1)]
        split = split_scenarios(4, 0.5, seed=0)
        space = ConfigSpace(
            max_parents=1, allowed_types=("interval",), budget=30
        )
        result = tune(space, graph, pairs, data, split, (1.0, 0.0, 0.0), seed=0)
        from robustmix.instances import Instance, nominal_solve

        inst = Instance.spath(graph, pairs[0][0], pairs[0][1])
        nominal = nominal_solve(inst, data.costs[0])
        assert result.best_cost == pytest.approx(nominal.value, abs=1e-9)

    def test_empty_pairs_rejected(self, small_problem):
        graph, data, _, split = small_problem
        with pytest.raises(ValueError, match="empty pair"):
            tune(ConfigSpace(budget=5), graph, [], data, split, (1, 0, 0))


class TestBaselines:
    def test_grid_values(self):
        ell = baseline_lambdas("ellipsoid")
        assert len(ell) == 41
        assert ell[0] == 0.0 and ell[1] == 0.5 and ell[-1] == 20.0
        iv = baseline_lambdas("interval")
        assert len(iv) == 41
        assert iv[1] == 0.025 and iv[-1] == 1.0
        assert baseline_lambdas("hull") == iv

    def test_lambda_zero_rows_agree_across_types(self, small_problem):
        """At lambda=0 every family degenerates to the scenario mean, so
        all three grids start from identical metrics."""
        graph, data, pairs, split = small_problem
        first = {}
        for set_type in ("interval", "hull", "ellipsoid"):
            grid = baseline_grid(set_type, graph, pairs, data, split)
            assert len(grid) == 41
            lam, m_in, m_out = grid[0]
            assert lam == 0.0
            first[set_type] = (m_in, m_out)
        base = first["interval"][0].as_tuple()
        assert first["hull"][0].as_tuple() == pytest.approx(base, abs=1e-9)
        assert first["ellipsoid"][0].as_tuple() == pytest.approx(base, abs=1e-9)
