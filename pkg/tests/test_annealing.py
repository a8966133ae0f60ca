import math
import random

import numpy as np
import pytest
from sklearn.base import clone

from upmsp.annealing import (AdaptivePolicy, AnnealingScheduler, SearchState,
                             UniformPolicy, adaptive_probabilities, auto_temperature,
                             initial_solution, sa_step, select_neighbourhood)
from upmsp.core import Instance, Solution
from upmsp.exceptions import ConfigurationError
from upmsp.exhaustive import optimal_makespan
from upmsp.instances import GeneratorSpec, generate
from upmsp.neighbourhoods import NEIGHBOURHOODS, Neighbourhood
from upmsp.regression import UtilityRegressor


def test_single_machine_keeps_insertion_order():
    inst = generate(GeneratorSpec(1, 6, 9, seed=2))
    rng = random.Random(3)
    order = list(range(6))
    random.Random(3).shuffle(order)
    sol = initial_solution(inst, rng)
    assert sol.sequences == [order]


def test_machine_favoured_jobs_land_alone():
    n = 4
    proc = np.full((n, n), 90)
    np.fill_diagonal(proc, 5)
    inst = Instance(proc, np.full((n, n, n), 3))
    sol = initial_solution(inst, random.Random(0))
    assert sol.sequences == [[0], [1], [2], [3]]
    assert sol.cmax == optimal_makespan(inst)[0] == 5


def test_initial_solution_is_partition():
    inst = generate(GeneratorSpec(3, 15, 49, seed=1))
    initial_solution(inst, random.Random(9)).check()


def test_uniform_weights_give_exact_sixths():
    for p_max in (1 / 6, 0.3, 0.5, 0.9):
        assert adaptive_probabilities([1 / 6] * 6, p_max) == [1 / 6] * 6


def test_one_hot_weights_example():
    assert adaptive_probabilities([1, 0, 0, 0, 0, 0], 0.5) == [0.5, 0.1, 0.1, 0.1, 0.1, 0.1]


def test_simplex_properties_on_random_weights():
    rng = np.random.default_rng(0)
    for p_max in (1 / 6, 0.3, 0.5, 0.9):
        floor = (1 - p_max) / 5
        for w in rng.dirichlet(np.ones(6), size=2000):
            p = adaptive_probabilities(w, p_max)
            assert abs(math.fsum(p) - 1) < 1e-12
            assert all(floor - 1e-15 <= x <= p_max + 1e-15 for x in p)


def test_adaptive_probabilities_need_two_options():
    with pytest.raises(ConfigurationError):
        adaptive_probabilities([1.0], 0.5)


def _flat_models(beta0_by_nb):
    models = {}
    for nb in NEIGHBOURHOODS:
        m = UtilityRegressor(neighbourhood=nb)
        m.coef_ = np.zeros(16)
        m.coef_[0] = beta0_by_nb.get(nb, 0.0)
        models[nb] = m
    return models


def test_adaptive_policy_prefers_high_utility():
    models = _flat_models({Neighbourhood.SWAP: 3.0})
    inst = generate(GeneratorSpec(2, 8, 9, seed=0))
    policy = AdaptivePolicy(models, p_max=0.5).bind(inst)
    p = policy.probabilities(0.5, 100)
    assert p[Neighbourhood.SWAP - 1] == max(p)
    assert abs(sum(p) - 1) < 1e-12 and max(p) <= 0.5
    flat = AdaptivePolicy(_flat_models({}), p_max=0.5).bind(inst)
    assert flat.probabilities(0.5, 100) == [1 / 6] * 6


def test_adaptive_policy_requires_models():
    with pytest.raises(ConfigurationError):
        AdaptivePolicy(None)
    partial = _flat_models({})
    partial.pop(Neighbourhood.SHIFT)
    with pytest.raises(ConfigurationError, match="shift"):
        AdaptivePolicy(partial)
    with pytest.raises(ConfigurationError):
        AnnealingScheduler(policy="adaptive", max_iters=10).fit(
            generate(GeneratorSpec(2, 4, 9, seed=0)))


def test_uniform_selection_frequencies():
    inst = generate(GeneratorSpec(3, 12, 9, seed=0))
    sol = initial_solution(inst, random.Random(0))
    state = SearchState(sol, sol, 1.0)
    rng = random.Random(11)
    draws = 60_000
    counts = [0] * 6
    for _ in range(draws):
        counts[select_neighbourhood(UniformPolicy(), state, rng) - 1] += 1
    se = math.sqrt((1 / 6) * (5 / 6) / draws)
    assert all(abs(c / draws - 1 / 6) < 3 * se for c in counts)


def test_empty_neighbourhoods_are_skipped():
    # one machine: only shift and switch exist
    inst = generate(GeneratorSpec(1, 5, 9, seed=0))
    sol = initial_solution(inst, random.Random(0))
    state = SearchState(sol, sol, 1.0)
    rng = random.Random(2)
    drawn = {select_neighbourhood(UniformPolicy(), state, rng) for _ in range(500)}
    assert drawn == {Neighbourhood.SHIFT, Neighbourhood.SWITCH}
    single = Solution.from_sequences(generate(GeneratorSpec(1, 1, 9, seed=0)), [[0]])
    assert select_neighbourhood(UniformPolicy(), SearchState(single, single, 1.0), rng) is None


def test_zero_temperature_rejects_worsening_and_accepts_ties():
    inst = generate(GeneratorSpec(2, 10, 49, seed=6))
    rng = random.Random(6)
    sol = initial_solution(inst, rng)
    state = SearchState(sol, sol.copy(), 0.0)
    for _ in range(3000):
        before = state.incumbent.cmax
        sa_step(state, UniformPolicy(), rng)
        assert state.incumbent.cmax <= before
    # equal-makespan neighbours are always accepted: all-equal processing
    flat = Instance(np.full((4, 1), 5), np.full((1, 4, 4), 2))
    fsol = Solution.from_sequences(flat, [[0, 1, 2, 3]])
    fstate = SearchState(fsol, fsol.copy(), 0.0)
    assert all(sa_step(fstate, UniformPolicy(), rng) for _ in range(100))


def test_auto_temperature_calibration():
    inst = generate(GeneratorSpec(2, 12, 49, seed=4))
    sol = initial_solution(inst, random.Random(4))
    T0 = auto_temperature(sol, random.Random(7))
    assert T0 > 0
    # no worsening neighbour to calibrate on
    single = Solution.from_sequences(generate(GeneratorSpec(1, 1, 9, seed=0)), [[0]])
    assert auto_temperature(single, random.Random(0)) == 1.0


def test_deterministic_with_iteration_budget():
    inst = generate(GeneratorSpec(2, 10, 9, seed=3))
    a = AnnealingScheduler(budget_ms=None, max_iters=5000, random_state=9).fit(inst)
    b = AnnealingScheduler(budget_ms=None, max_iters=5000, random_state=9).fit(inst)
    assert a.best_ == b.best_ and a.final_ == b.final_
    assert a.selection_counts_ == b.selection_counts_ and a.n_iter_ == 5000
    assert a.best_cmax_ <= a.final_.cmax


def test_best_so_far_is_monotone():
    inst = generate(GeneratorSpec(2, 10, 49, seed=3))
    rng = random.Random(1)
    sol = initial_solution(inst, rng)
    state = SearchState(sol, sol.copy(), auto_temperature(sol, rng))
    history = []
    for _ in range(5000):
        sa_step(state, UniformPolicy(), rng)
        state.temperature *= 0.999
        history.append(state.best.cmax)
        assert state.best.cmax <= state.incumbent.cmax
    assert all(a >= b for a, b in zip(history, history[1:]))


def test_budget_plateaus_reach_final_temperature():
    inst = generate(GeneratorSpec(2, 10, 9, seed=3))
    est = AnnealingScheduler(initial_temperature=10.0, plateau_length="budget",
                             final_temperature=0.5, budget_ms=None, max_iters=20000,
                             random_state=0).fit(inst)
    levels = math.ceil(math.log(0.5 / 10.0) / math.log(0.96))
    assert est.final_temperature_ == pytest.approx(10.0 * 0.96 ** (levels - 1))
    assert est.final_temperature_ >= 0.5


@pytest.mark.parametrize("params", [
    dict(cooling_rate=1.0), dict(cooling_rate=0), dict(plateau_length=0),
    dict(plateau_length="weekly"), dict(budget_ms=None, max_iters=None),
    dict(initial_temperature=-1), dict(initial_temperature="hot"), dict(p_max=1.0),
    dict(policy="greedy"),
])
def test_invalid_configuration(params):
    inst = generate(GeneratorSpec(2, 4, 9, seed=0))
    params = {"max_iters": 10, **params}
    if "p_max" in params:
        params.update(policy="adaptive", models=_flat_models({}))
    with pytest.raises(ConfigurationError):
        AnnealingScheduler(**params).fit(inst)


def test_estimator_params_and_clone():
    est = AnnealingScheduler(cooling_rate=0.9, random_state=4)
    assert est.get_params()["cooling_rate"] == 0.9
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert not hasattr(twin, "best_")


def test_small_instances_reach_optimum():
    hits = 0
    for seed in range(12):
        inst = generate(GeneratorSpec(2, 6, 49, seed=seed))
        best = AnnealingScheduler(budget_ms=None, max_iters=20000,
                                  random_state=seed).fit(inst).best_cmax_
        opt = optimal_makespan(inst)[0]
        assert best >= opt
        hits += best == opt
    assert hits >= 11
