"""Neighbourhood census and the JSON Lines telemetry format.

A census enumerates all six neighbourhoods of an incumbent and
summarises the relative makespan improvement ``delta = (f - f') / f`` of
every neighbour. From the improving subset it derives the improvement
ratio ``pi``, the conditional mean improvement and the expected utility
of one uniformly sampled move,

    expected_utility = pi * expected_improvement
                     = sum(improving deltas) / size.

All ratios are formed as one division of exact integers, so each is
correctly rounded and the two forms above agree to a few ulps.
"""

import json
import os
from dataclasses import dataclass, field

import jsonschema

from .exceptions import ParseError
from .neighbourhoods import NEIGHBOURHOODS, Neighbourhood, neighbour_makespans

EVENT_KEYS = ("run_id", "M", "J", "S", "iteration", "elapsed_ms", "t", "cmax",
              "spt", "sum_completion", "stats")
STATS_KEYS = ("id", "size", "improving", "pi", "delta_best", "delta_mean",
              "delta_worst", "expected_improvement", "expected_utility")

_NUM_OR_NULL = {"type": ["number", "null"]}

STATS_SCHEMA = {
    "type": "object",
    "required": list(STATS_KEYS),
    "additionalProperties": False,
    "properties": {
        "id": {"enum": [nb.label for nb in NEIGHBOURHOODS]},
        "size": {"type": "integer", "minimum": 0},
        "improving": {"type": "integer", "minimum": 0},
        "pi": {"type": "number", "minimum": 0, "maximum": 1},
        "delta_best": _NUM_OR_NULL,
        "delta_mean": _NUM_OR_NULL,
        "delta_worst": _NUM_OR_NULL,
        "expected_improvement": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "expected_utility": {"type": "number", "minimum": 0},
    },
}

EVENT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": list(EVENT_KEYS),
    "additionalProperties": False,
    "properties": {
        "run_id": {"type": "string"},
        "M": {"type": "integer", "minimum": 1},
        "J": {"type": "integer", "minimum": 1},
        "S": {"type": "integer", "minimum": 1},
        "iteration": {"type": "integer", "minimum": 0},
        "elapsed_ms": {"type": "number", "minimum": 0},
        "t": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "cmax": {"type": "integer", "minimum": 1},
        "spt": {"type": "integer", "minimum": 1},
        "sum_completion": {"type": "integer", "minimum": 1},
        "stats": {"type": "array", "minItems": 6, "maxItems": 6,
                  "items": STATS_SCHEMA},
    },
}

_validator = jsonschema.Draft202012Validator(EVENT_SCHEMA)


@dataclass(frozen=True)
class NeighbourhoodStats:
    """Census summary of one neighbourhood.

    `expected_improvement` is None when nothing improves; the three
    delta statistics are None for an empty neighbourhood.
    """

    id: Neighbourhood
    size: int
    improving: int
    pi: float
    delta_best: float | None
    delta_mean: float | None
    delta_worst: float | None
    expected_improvement: float | None
    expected_utility: float

    def to_dict(self):
        out = {key: getattr(self, key) for key in STATS_KEYS}
        out["id"] = self.id.label
        return out

    @classmethod
    def from_dict(cls, data):
        kwargs = {key: data[key] for key in STATS_KEYS}
        kwargs["id"] = Neighbourhood.from_label(data["id"])
        return cls(**kwargs)


def neighbourhood_stats(neighbourhood, incumbent, makespans):
    """Summarise neighbour makespans against the incumbent makespan."""
    nb = Neighbourhood(neighbourhood)
    size = len(makespans)
    if size == 0:
        return NeighbourhoodStats(nb, 0, 0, 0.0, None, None, None, None, 0.0)
    f = incumbent
    gain = 0
    improving = 0
    for g in makespans:
        if g < f:
            improving += 1
            gain += f - g
    return NeighbourhoodStats(
        id=nb,
        size=size,
        improving=improving,
        pi=improving / size,
        delta_best=(f - min(makespans)) / f,
        delta_mean=(f * size - sum(makespans)) / (f * size),
        delta_worst=(f - max(makespans)) / f,
        expected_improvement=gain / (f * improving) if improving else None,
        expected_utility=gain / (f * size),
    )


def census(instance, solution):
    """Enumerate every neighbourhood of `solution` and summarise each.

    The solution is only read. Returns six :class:`NeighbourhoodStats`
    in neighbourhood order.
    """
    if solution.instance is not instance:
        raise ValueError("solution belongs to a different instance")
    return [neighbourhood_stats(nb, solution.cmax, neighbour_makespans(nb, solution))
            for nb in NEIGHBOURHOODS]


@dataclass
class EnumerationEvent:
    run_id: str
    M: int
    J: int
    S: int
    iteration: int
    elapsed_ms: float
    t: float
    cmax: int
    spt: int
    sum_completion: int
    stats: list = field(default_factory=list)

    def to_dict(self):
        out = {key: getattr(self, key) for key in EVENT_KEYS}
        out["stats"] = [s.to_dict() for s in self.stats]
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"), allow_nan=False)

    @classmethod
    def from_dict(cls, data):
        kwargs = {key: data[key] for key in EVENT_KEYS}
        kwargs["stats"] = [NeighbourhoodStats.from_dict(s) for s in data["stats"]]
        return cls(**kwargs)

    def stats_for(self, neighbourhood):
        return self.stats[Neighbourhood(neighbourhood) - 1]


def validate_event(data):
    """Raise ParseError unless `data` (a decoded line) matches the schema,
    including key order."""
    errors = sorted(_validator.iter_errors(data), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = "/".join(map(str, err.path)) or "<root>"
        raise ParseError(f"schema violation at {where}: {err.message}")
    if tuple(data) != EVENT_KEYS:
        raise ParseError("event keys out of order")
    for idx, stats in enumerate(data["stats"]):
        if tuple(stats) != STATS_KEYS:
            raise ParseError(f"stats[{idx}] keys out of order")
        if stats["id"] != NEIGHBOURHOODS[idx].label:
            raise ParseError(f"stats[{idx}] should describe "
                             f"{NEIGHBOURHOODS[idx].label}")


def record(event, sink):
    """Append one event as a JSON line to the text stream `sink`."""
    sink.write(event.to_json() + "\n")
    sink.flush()


def iter_events(source, validate=True):
    """Yield the events of a JSON Lines file (path or text stream)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            yield from iter_events(fh, validate=validate)
        return
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", lineno) from None
        if validate:
            try:
                validate_event(data)
            except ParseError as exc:
                raise ParseError(str(exc), lineno) from None
        yield EnumerationEvent.from_dict(data)


def read_events(sources, validate=True):
    """Load all events from one or more telemetry files."""
    if isinstance(sources, (str, os.PathLike)):
        sources = [sources]
    return [ev for src in sources for ev in iter_events(src, validate=validate)]


class Recorder:
    """Runs a census on incumbent changes and writes the events.

    Parameters
    ----------
    sink : text stream
        Destination of the JSON lines.
    run_id : str
    record_every : int, default=1
        Census only every k-th incumbent change. Recorded values do not
        depend on this setting, only which changes are recorded.
    """

    def __init__(self, sink, run_id, record_every=1):
        if record_every < 1:
            raise ValueError("record_every must be >= 1")
        self.sink = sink
        self.run_id = run_id
        self.record_every = record_every
        self.changes = 0
        self.recorded = 0

    def incumbent_changed(self, solution, iteration, elapsed_ms, t):
        self.changes += 1
        if self.changes % self.record_every:
            return None
        inst = solution.instance
        event = EnumerationEvent(
            run_id=self.run_id,
            M=inst.n_machines,
            J=inst.n_jobs,
            S=inst.max_setup,
            iteration=iteration,
            elapsed_ms=round(elapsed_ms, 3),
            t=t,
            cmax=solution.cmax,
            spt=solution.spt,
            sum_completion=solution.sum_completion,
            stats=census(inst, solution),
        )
        record(event, self.sink)
        self.recorded += 1
        return event
