"""Problem and solution representation for R|s_ijk|Cmax.

Jobs and machines are 0-based throughout. Times are Python ints, so
cached and recomputed makespans can be compared with ``==``.
"""

import numpy as np

from .exceptions import RepresentationError
from .validation import check_positive_int, check_time_matrix


class Instance:
    """An unrelated parallel machine instance with sequence-dependent setups.

    Parameters
    ----------
    processing : array-like of shape (n_jobs, n_machines)
        ``processing[j, k]`` is the time machine ``k`` needs for job ``j``.
    setup : array-like of shape (n_machines, n_jobs, n_jobs)
        ``setup[k, i, j]`` is the time to prepare machine ``k`` for job
        ``j`` when it immediately follows job ``i``. The diagonal is
        stored but never read.
    max_setup : int, optional
        Upper bound ``S`` of the setup distribution. Defaults to the
        largest off-diagonal setup.
    """

    def __init__(self, processing, setup, max_setup=None):
        proc = np.asarray(processing)
        if proc.ndim != 2:
            raise RepresentationError("processing must be a 2-D matrix")
        n, m = proc.shape
        check_positive_int(n, "number of jobs")
        check_positive_int(m, "number of machines")
        self.processing = check_time_matrix(proc, (n, m), "processing")
        self.setup = check_time_matrix(
            setup, (m, n, n), "setup", allow_zero_diagonal=True
        )
        if max_setup is None:
            off = ~np.eye(n, dtype=bool)
            max_setup = int(self.setup[:, off].max()) if n > 1 else 1
        self.max_setup = check_positive_int(max_setup, "max_setup")
        # plain nested lists: indexing numpy scalars in hot loops is slow
        self.p = self.processing.T.tolist()      # p[k][j]
        self.s = self.setup.tolist()             # s[k][i][j]

    @property
    def n_jobs(self):
        return self.processing.shape[0]

    @property
    def n_machines(self):
        return self.processing.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        if self.processing.shape != other.processing.shape:
            return False
        off = ~np.eye(self.n_jobs, dtype=bool)
        return (
            self.max_setup == other.max_setup
            and np.array_equal(self.processing, other.processing)
            and np.array_equal(self.setup[:, off], other.setup[:, off])
        )

    def __repr__(self):
        return (f"Instance(n_jobs={self.n_jobs}, n_machines={self.n_machines}, "
                f"max_setup={self.max_setup})")


def evaluate_machine(instance, sequence, machine):
    """Completion time of `machine` when it processes `sequence` in order.

    The first job on a machine incurs no setup.

    Raises
    ------
    RepresentationError
        If a job id is out of range or repeated.
    """
    n = instance.n_jobs
    if not 0 <= machine < instance.n_machines:
        raise RepresentationError(f"machine {machine} out of range")
    seen = set()
    for job in sequence:
        if not (isinstance(job, (int, np.integer)) and 0 <= job < n):
            raise RepresentationError(f"invalid job id {job!r}")
        if job in seen:
            raise RepresentationError(f"job {job} appears twice")
        seen.add(job)
    return _completion(instance.p[machine], instance.s[machine], sequence)


def _completion(pk, sk, seq):
    total = 0
    prev = -1
    for job in seq:
        total += pk[job]
        if prev >= 0:
            total += sk[prev][job]
        prev = job
    return total


def _check_partition(instance, sequences):
    if len(sequences) != instance.n_machines:
        raise RepresentationError(
            f"expected {instance.n_machines} machine sequences, "
            f"got {len(sequences)}"
        )
    n = instance.n_jobs
    seen = [False] * n
    for seq in sequences:
        for job in seq:
            if not (isinstance(job, (int, np.integer)) and 0 <= job < n):
                raise RepresentationError(f"invalid job id {job!r}")
            if seen[job]:
                raise RepresentationError(f"job {job} assigned twice")
            seen[job] = True
    if not all(seen):
        missing = [j for j, flag in enumerate(seen) if not flag]
        raise RepresentationError(f"jobs not assigned: {missing}")


def evaluate_full(instance, sequences):
    """Recompute everything from scratch.

    Returns
    -------
    cmax : int
    spt : int
        Sum of processing times of each job on its assigned machine.
    makespan_machine : int
        Smallest machine index attaining `cmax`.
    completion : list of int
    """
    _check_partition(instance, sequences)
    completion = [
        _completion(instance.p[k], instance.s[k], seq)
        for k, seq in enumerate(sequences)
    ]
    spt = sum(instance.p[k][j] for k, seq in enumerate(sequences) for j in seq)
    cmax = max(completion)
    return cmax, spt, completion.index(cmax), completion


class Solution:
    """Per-machine job sequences with cached objective values.

    Build one with :meth:`from_sequences`. The caches (`completion`,
    `proc_sum`, `cmax`, `spt`, `makespan_machine`) are kept in sync by
    :meth:`refresh`, which re-evaluates only the machines it is given.
    """

    __slots__ = ("instance", "sequences", "completion", "proc_sum",
                 "cmax", "spt", "makespan_machine")

    def __init__(self, instance, sequences, completion, proc_sum):
        self.instance = instance
        self.sequences = sequences
        self.completion = completion
        self.proc_sum = proc_sum
        self._update_aggregates()

    @classmethod
    def from_sequences(cls, instance, sequences):
        seqs = [[int(j) for j in seq] for seq in sequences]
        _check_partition(instance, seqs)
        completion = [
            _completion(instance.p[k], instance.s[k], seq)
            for k, seq in enumerate(seqs)
        ]
        proc_sum = [sum(instance.p[k][j] for j in seq)
                    for k, seq in enumerate(seqs)]
        return cls(instance, seqs, completion, proc_sum)

    def _update_aggregates(self):
        self.cmax = max(self.completion)
        self.makespan_machine = self.completion.index(self.cmax)
        self.spt = sum(self.proc_sum)

    def refresh(self, machines):
        """Re-evaluate the given machines and the aggregates."""
        inst = self.instance
        for k in machines:
            seq = self.sequences[k]
            pk = inst.p[k]
            self.completion[k] = _completion(pk, inst.s[k], seq)
            self.proc_sum[k] = sum(pk[j] for j in seq)
        self._update_aggregates()

    def copy(self):
        new = object.__new__(Solution)
        new.instance = self.instance
        new.sequences = [list(seq) for seq in self.sequences]
        new.completion = list(self.completion)
        new.proc_sum = list(self.proc_sum)
        new.cmax = self.cmax
        new.spt = self.spt
        new.makespan_machine = self.makespan_machine
        return new

    @property
    def sum_completion(self):
        return sum(self.completion)

    def assignment(self):
        """Machine index of every job, as a list indexed by job."""
        out = [0] * self.instance.n_jobs
        for k, seq in enumerate(self.sequences):
            for j in seq:
                out[j] = k
        return out

    def check(self):
        """Assert the caches equal a full recomputation."""
        cmax, spt, kstar, completion = evaluate_full(self.instance, self.sequences)
        if (cmax, spt, kstar, completion) != (
                self.cmax, self.spt, self.makespan_machine, self.completion):
            raise RepresentationError("cached values diverge from recomputation")

    def key(self):
        return tuple(tuple(seq) for seq in self.sequences)

    def __eq__(self, other):
        if not isinstance(other, Solution):
            return NotImplemented
        return self.instance is other.instance and self.key() == other.key()

    def __repr__(self):
        return f"Solution(cmax={self.cmax}, sequences={self.sequences})"


def improvement(f_incumbent, f_neighbour):
    """Relative makespan improvement of a neighbour; positive is better."""
    return (f_incumbent - f_neighbour) / f_incumbent
