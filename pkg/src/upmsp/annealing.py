"""Simulated Annealing with pluggable neighbourhood selection.

Each iteration picks a neighbourhood (uniformly, or biased by predicted
utility), samples one of its moves uniformly and applies the Metropolis
rule. Temperature is multiplied by `cooling_rate` every
`plateau_length` iterations.

Normalized time ``t`` is the larger of ``iteration / max_iters`` and
``search time / budget``. Search time excludes time spent inside the
telemetry census, so instrumenting a run does not shorten its search.
With only an iteration budget a run is fully deterministic.
"""

import math
import random
import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .core import Solution
from .exceptions import ConfigurationError
from .neighbourhoods import (NEIGHBOURHOODS, apply_move, cardinality,
                             evaluate_move, sample_uniform)
from .regression import T_MIN
from .validation import check_open_unit, check_p_max, check_positive_int

N_NEIGHBOURHOODS = len(NEIGHBOURHOODS)


def initial_solution(instance, rng):
    """Greedy construction: jobs in random order, each appended to the
    machine whose completion time grows least (smallest index on ties)."""
    jobs = list(range(instance.n_jobs))
    rng.shuffle(jobs)
    m = instance.n_machines
    seqs = [[] for _ in range(m)]
    completion = [0] * m
    for j in jobs:
        best_k, best_c = 0, None
        for k in range(m):
            c = completion[k] + instance.p[k][j]
            if seqs[k]:
                c += instance.s[k][seqs[k][-1]][j]
            if best_c is None or c < best_c:
                best_k, best_c = k, c
        seqs[best_k].append(j)
        completion[best_k] = best_c
    return Solution.from_sequences(instance, seqs)


def adaptive_probabilities(weights, p_max):
    """Selection probabilities from normalized utility weights.

    ``p_i = (1 - p_max + w_i (H p_max - 1)) / (H - 1)``, evaluated in the
    equivalent convex form ``(1 - w_i) * floor + w_i * p_max`` with
    ``floor = (1 - p_max) / (H - 1)``, which hits the cap exactly for a
    one-hot weight vector. Uniform weights give exactly ``1 / H``.
    """
    H = len(weights)
    if H < 2:
        raise ConfigurationError("need at least two neighbourhoods")
    w = [float(x) for x in weights]
    if all(x == w[0] for x in w):
        return [1.0 / H] * H
    floor = (1.0 - p_max) / (H - 1)
    return [(1.0 - x) * floor + x * p_max for x in w]


class UniformPolicy:
    """Every neighbourhood with probability 1/6."""

    name = "uniform"

    def bind(self, instance):
        return self

    def probabilities(self, t, spt):
        return [1.0 / N_NEIGHBOURHOODS] * N_NEIGHBOURHOODS


class AdaptivePolicy:
    """Utility-biased selection driven by one fitted model per neighbourhood.

    Parameters
    ----------
    models : mapping Neighbourhood -> UtilityRegressor
    p_max : float
        Cap on any single selection probability, in ``[1/6, 1)``.
    """

    name = "adaptive"

    def __init__(self, models, p_max=0.5, t_min=T_MIN):
        if models is None:
            raise ConfigurationError("adaptive policy requires fitted models")
        missing = [nb.label for nb in NEIGHBOURHOODS if nb not in models]
        if missing:
            raise ConfigurationError(f"no model for neighbourhoods {missing}")
        self.models = models
        self.p_max = check_p_max(p_max, N_NEIGHBOURHOODS)
        self.t_min = t_min
        self._coef = None
        self.last_probabilities = None

    def bind(self, instance):
        self._coef = [self.models[nb].bind(instance.n_machines, instance.n_jobs,
                                           instance.max_setup)
                      for nb in NEIGHBOURHOODS]
        return self

    def predicted_log_utilities(self, t, spt):
        tp = math.log10(min(max(t, self.t_min), 1.0))
        sxp = math.log10(spt)
        return [c0 + ct * tp + ctt * tp * tp + cs * sxp + css * sxp * sxp
                for c0, ct, ctt, cs, css in self._coef]

    def probabilities(self, t, spt):
        logs = self.predicted_log_utilities(t, spt)
        top = max(logs)
        # shifting by the max leaves the normalized weights unchanged
        utilities = [10.0 ** (v - top) for v in logs]
        total = sum(utilities)
        probs = adaptive_probabilities([u / total for u in utilities], self.p_max)
        self.last_probabilities = probs
        return probs


def make_policy(policy, models=None, p_max=0.5):
    if isinstance(policy, (UniformPolicy, AdaptivePolicy)):
        return policy
    if policy == "uniform":
        return UniformPolicy()
    if policy == "adaptive":
        return AdaptivePolicy(models, p_max)
    raise ConfigurationError(f"unknown policy {policy!r}")


def select_neighbourhood(policy, state, rng):
    """Draw a neighbourhood for `state.incumbent`; None if all are empty.

    Empty neighbourhoods are excluded and the remaining probabilities
    renormalized.
    """
    sol = state.incumbent
    probs = policy.probabilities(state.t, sol.spt)
    live = [(nb, p) for nb, p in zip(NEIGHBOURHOODS, probs)
            if cardinality(nb, sol) > 0]
    if not live:
        return None
    total = sum(p for _, p in live)
    u = rng.random() * total
    acc = 0.0
    for nb, p in live:
        acc += p
        if u < acc:
            return nb
    return live[-1][0]


@dataclass
class SearchState:
    incumbent: Solution
    best: Solution
    temperature: float
    iteration: int = 0
    elapsed_ms: float = 0.0
    t: float = 0.0


def sa_step(state, policy, rng, counts=None):
    """One annealing iteration; returns True when the incumbent changed.

    The caller advances `state.iteration`, the clock and the temperature.
    """
    nb = select_neighbourhood(policy, state, rng)
    if nb is None:
        return False
    if counts is not None:
        counts[nb - 1] += 1
    sol = state.incumbent
    move = sample_uniform(nb, sol, rng)
    delta = evaluate_move(sol, move) - sol.cmax
    if delta > 0:
        T = state.temperature
        if T <= 0 or rng.random() >= math.exp(-delta / T):
            return False
    apply_move(sol, move, inplace=True)
    if sol.cmax < state.best.cmax:
        state.best = sol.copy()
    return True


def auto_temperature(solution, rng, samples=100):
    """Temperature at which the mean worsening of random neighbours is
    accepted with probability 1/2."""
    policy = UniformPolicy()
    state = SearchState(solution, solution, 1.0)
    worse = []
    for _ in range(samples):
        nb = select_neighbourhood(policy, state, rng)
        if nb is None:
            break
        delta = evaluate_move(solution, sample_uniform(nb, solution, rng)) - solution.cmax
        if delta > 0:
            worse.append(delta)
    if not worse:
        return 1.0
    return (sum(worse) / len(worse)) / math.log(2)


class AnnealingScheduler(BaseEstimator):
    """Simulated Annealing solver for one instance.

    Parameters
    ----------
    initial_temperature : float or "auto", default="auto"
    cooling_rate : float, default=0.96
    plateau_length : int, None or "budget", default=None
        Iterations per temperature level; None means ``n_jobs * n_machines``.
        ``"budget"`` spreads the plateaus over the whole budget: the
        temperature drops by `cooling_rate` each time normalized time
        advances by 1/P, with P chosen so that the last plateau sits at
        `final_temperature`.
    final_temperature : float, default=0.01
        Only used with ``plateau_length="budget"``.
    budget_ms : float or None, default=30000
        Search-time budget in milliseconds (census time excluded).
    max_iters : int or None, default=1_000_000
    policy : {"uniform", "adaptive"} or policy object, default="uniform"
    models : mapping, optional
        Fitted utility models, required by the adaptive policy.
    p_max : float, default=0.5
    random_state : int or None

    Attributes
    ----------
    best_ : Solution
    best_cmax_ : int
    n_iter_ : int
    initial_temperature_ : float
    selection_counts_ : list of int
        How often each neighbourhood was drawn.
    n_changes_ : int
        Number of incumbent changes.
    search_ms_ : float
    """

    def __init__(self, initial_temperature="auto", cooling_rate=0.96,
                 plateau_length=None, final_temperature=0.01, budget_ms=30000,
                 max_iters=1_000_000, policy="uniform", models=None, p_max=0.5,
                 random_state=None):
        self.initial_temperature = initial_temperature
        self.cooling_rate = cooling_rate
        self.plateau_length = plateau_length
        self.final_temperature = final_temperature
        self.budget_ms = budget_ms
        self.max_iters = max_iters
        self.policy = policy
        self.models = models
        self.p_max = p_max
        self.random_state = random_state

    def _validate(self, instance):
        alpha = check_open_unit(self.cooling_rate, "cooling_rate")
        L = self.plateau_length
        if L is None:
            L = instance.n_jobs * instance.n_machines
        elif L != "budget":
            L = check_positive_int(L, "plateau_length")
        elif not (isinstance(self.final_temperature, (int, float))
                  and self.final_temperature > 0):
            raise ConfigurationError("final_temperature must be positive")
        if not self.budget_ms and not self.max_iters:
            raise ConfigurationError("need a time budget or an iteration cap")
        if self.budget_ms is not None and self.budget_ms < 0:
            raise ConfigurationError("budget_ms must be positive")
        if self.max_iters:
            check_positive_int(self.max_iters, "max_iters")
        T0 = self.initial_temperature
        if T0 != "auto" and not (isinstance(T0, (int, float)) and T0 > 0):
            raise ConfigurationError("initial_temperature must be positive or 'auto'")
        policy = make_policy(self.policy, self.models, self.p_max).bind(instance)
        return alpha, L, policy

    def fit(self, instance, recorder=None):
        """Run the search on `instance`.

        Parameters
        ----------
        instance : Instance
        recorder : telemetry.Recorder, optional
            Notified on every incumbent change.
        """
        alpha, L, policy = self._validate(instance)
        seed = self.random_state
        if isinstance(seed, np.random.SeedSequence):
            seed = int(seed.generate_state(1, dtype=np.uint64)[0])
        rng = random.Random(seed)

        sol = initial_solution(instance, rng)
        T0 = auto_temperature(sol, rng) if self.initial_temperature == "auto" \
            else float(self.initial_temperature)
        state = SearchState(sol, sol.copy(), T0)
        by_budget = L == "budget"
        if by_budget:
            n_levels = max(1, math.ceil(math.log(self.final_temperature / T0)
                                        / math.log(alpha))) if T0 > self.final_temperature else 1
            level = 0
        counts = [0] * N_NEIGHBOURHOODS
        max_iters = self.max_iters or 0
        budget = float(self.budget_ms or 0.0)

        paused = 0.0
        start = time.perf_counter()
        changes = 0
        while True:
            now_ms = (time.perf_counter() - start) * 1000.0 - paused
            frac_it = state.iteration / max_iters if max_iters else 0.0
            frac_t = now_ms / budget if budget else 0.0
            state.elapsed_ms = now_ms
            state.t = max(frac_it, frac_t)
            if state.t >= 1.0:
                break
            changed = sa_step(state, policy, rng, counts)
            state.iteration += 1
            if by_budget:
                while level < n_levels - 1 and state.t * n_levels >= level + 1:
                    level += 1
                    state.temperature *= alpha
            elif state.iteration % L == 0:
                state.temperature *= alpha
            if changed:
                changes += 1
                if recorder is not None:
                    c0 = time.perf_counter()
                    now_ms = (c0 - start) * 1000.0 - paused
                    t_after = max(state.iteration / max_iters if max_iters else 0.0,
                                  now_ms / budget if budget else 0.0)
                    recorder.incumbent_changed(sol, state.iteration, now_ms,
                                               min(max(t_after, 1e-12), 1.0))
                    paused += (time.perf_counter() - c0) * 1000.0

        self.best_ = state.best
        self.best_cmax_ = state.best.cmax
        self.final_ = state.incumbent
        self.n_iter_ = state.iteration
        self.initial_temperature_ = T0
        self.final_temperature_ = state.temperature
        self.selection_counts_ = counts
        self.n_changes_ = changes
        self.search_ms_ = state.elapsed_ms
        return self
