"""Instance generation and the canonical text format.

Random draws come from numpy's PCG64 seeded through ``SeedSequence``.
Each block of the instance (processing matrix, setup matrix of machine
``k``) gets its own child stream keyed by ``(seed, block)``, so a block
does not depend on how many numbers other blocks consumed.

File layout (UTF-8, LF)::

    n m S
    <n rows of m processing times>
    <blank line, then n rows of n setup times>   repeated for each machine

Setup diagonals are written as 0.
"""

import io
import os
from dataclasses import dataclass

import numpy as np

from .core import Instance
from .exceptions import ConfigurationError, ParseError, RepresentationError
from .validation import check_positive_int

PROCESSING_STREAM = 0


@dataclass(frozen=True)
class GeneratorSpec:
    machines: int
    jobs: int
    max_setup: int
    processing_low: int = 1
    processing_high: int = 99
    seed: int = 0

    def __post_init__(self):
        check_positive_int(self.machines, "machines")
        check_positive_int(self.jobs, "jobs")
        check_positive_int(self.max_setup, "max_setup")
        check_positive_int(self.processing_low, "processing_low")
        check_positive_int(self.processing_high, "processing_high")
        if self.processing_low > self.processing_high:
            raise ConfigurationError("processing_low must be <= processing_high")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be an integer in [0, 2**64)")


def _stream(seed, block):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.PCG64(ss))


def generate(spec):
    """Draw an instance from `spec`; identical specs give identical instances."""
    n, m, S = spec.jobs, spec.machines, spec.max_setup
    rng = _stream(spec.seed, PROCESSING_STREAM)
    proc = rng.integers(spec.processing_low, spec.processing_high + 1,
                        size=(n, m), dtype=np.int64)
    setup = np.empty((m, n, n), dtype=np.int64)
    for k in range(m):
        setup[k] = _stream(spec.seed, 1 + k).integers(1, S + 1, size=(n, n),
                                                      dtype=np.int64)
        np.fill_diagonal(setup[k], 0)
    return Instance(proc, setup, max_setup=S)


def instance_filename(machines, jobs, max_setup, seed):
    return f"inst_M{machines}_J{jobs}_S{max_setup}_s{seed}.txt"


def dumps_instance(instance):
    n, m = instance.n_jobs, instance.n_machines
    out = [f"{n} {m} {instance.max_setup}"]
    out.extend(" ".join(map(str, row)) for row in instance.processing.tolist())
    for k in range(m):
        block = instance.setup[k].copy()
        np.fill_diagonal(block, 0)
        out.append("")
        out.extend(" ".join(map(str, row)) for row in block.tolist())
    return "\n".join(out) + "\n"


def write_instance(instance, destination):
    """Write `instance` to a path or text stream and return the document."""
    text = dumps_instance(instance)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        destination.write(text)
    return text


def _ints(line, lineno, count, what):
    fields = line.split()
    if len(fields) != count:
        raise ParseError(f"{what}: expected {count} integers, got {len(fields)}",
                         lineno)
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise ParseError(f"{what}: expected integers, got {line.strip()!r}",
                         lineno) from None


def loads_instance(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty document; expected header 'n m S'", 1)
    n, m, S = _ints(lines[0], 1, 3, "header 'n m S'")
    if n < 1 or m < 1 or S < 1:
        raise ParseError("header values must be positive", 1)

    pos = 1
    proc = []
    for i in range(n):
        if pos >= len(lines):
            raise ParseError(f"truncated processing block: expected {n} rows, "
                             f"found {i}", pos + 1)
        row = _ints(lines[pos], pos + 1, m, f"processing row {i + 1}")
        if min(row) < 1:
            raise ParseError(f"processing row {i + 1}: times must be positive",
                             pos + 1)
        proc.append(row)
        pos += 1

    setup = []
    for k in range(m):
        if pos >= len(lines):
            raise ParseError(f"truncated setup block for machine {k + 1}: "
                             "expected a blank separator line", pos + 1)
        if lines[pos].strip():
            raise ParseError(f"setup block for machine {k + 1}: expected a blank "
                             "separator line", pos + 1)
        pos += 1
        block = []
        for i in range(n):
            if pos >= len(lines):
                raise ParseError(f"truncated setup block for machine {k + 1}: "
                                 f"expected {n} rows, found {i}", pos + 1)
            row = _ints(lines[pos], pos + 1, n,
                        f"setup block for machine {k + 1}, row {i + 1}")
            if any(v < 1 for j, v in enumerate(row) if j != i):
                raise ParseError(f"setup block for machine {k + 1}, row {i + 1}: "
                                 "off-diagonal times must be positive", pos + 1)
            block.append(row)
            pos += 1
        setup.append(block)

    if pos != len(lines):
        raise ParseError("unexpected trailing content after the last setup block",
                         pos + 1)
    try:
        return Instance(np.array(proc, dtype=np.int64),
                        np.array(setup, dtype=np.int64).reshape(m, n, n),
                        max_setup=S)
    except RepresentationError as exc:
        raise ParseError(str(exc)) from exc


def read_instance(source):
    """Parse an instance from a path or a text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        text = source.read()
    else:
        raise TypeError("source must be a path or a readable text stream")
    return loads_instance(text)
