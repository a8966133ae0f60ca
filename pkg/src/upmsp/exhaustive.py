"""Brute-force optimum for tiny instances.

Deliberately independent of :mod:`upmsp.core`: completion times are
recomputed here from the raw arrays.
"""

import itertools

MAX_JOBS = 8


def _sequence_time(processing, setup, machine, order):
    total = 0
    prev = None
    for j in order:
        total += int(processing[j, machine])
        if prev is not None:
            total += int(setup[machine, prev, j])
        prev = j
    return total


def optimal_makespan(instance, max_jobs=MAX_JOBS):
    """Exact minimum makespan over all assignments and orderings.

    Returns ``(cmax, sequences)``. Refuses instances with more than
    `max_jobs` jobs.
    """
    n, m = instance.n_jobs, instance.n_machines
    if n > max_jobs:
        raise ValueError(f"exhaustive search is limited to {max_jobs} jobs, got {n}")
    proc, setup = instance.processing, instance.setup

    # best ordering of every job subset on every machine
    best = [{} for _ in range(m)]
    for k in range(m):
        for mask in range(1 << n):
            jobs = [j for j in range(n) if mask >> j & 1]
            top = None
            for order in itertools.permutations(jobs):
                c = _sequence_time(proc, setup, k, order)
                if top is None or c < top[0]:
                    top = (c, list(order))
            best[k][mask] = top if top is not None else (0, [])

    opt = None
    for assign in itertools.product(range(m), repeat=n):
        masks = [0] * m
        for j, k in enumerate(assign):
            masks[k] |= 1 << j
        cmax = max(best[k][masks[k]][0] for k in range(m))
        if opt is None or cmax < opt[0]:
            opt = (cmax, [best[k][masks[k]][1] for k in range(m)])
    return opt
