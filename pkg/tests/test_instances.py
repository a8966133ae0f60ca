import io
import math

import numpy as np
import pytest

from upmsp.core import Instance, evaluate_machine
from upmsp.exceptions import ConfigurationError, ParseError
from upmsp.instances import (GeneratorSpec, dumps_instance, generate, instance_filename,
                             loads_instance, read_instance, write_instance)


def test_unit_setup_range_gives_all_ones():
    inst = generate(GeneratorSpec(3, 6, 1, seed=5))
    off = ~np.eye(6, dtype=bool)
    assert (inst.setup[:, off] == 1).all()


def test_same_seed_same_instance():
    spec = GeneratorSpec(4, 12, 49, seed=77)
    a, b = generate(spec), generate(spec)
    assert a == b
    assert dumps_instance(a) == dumps_instance(b)
    assert generate(GeneratorSpec(4, 12, 49, seed=78)) != a


def test_setup_mean_within_three_standard_errors():
    S = 9
    inst = generate(GeneratorSpec(10, 50, S, seed=42))
    off = ~np.eye(50, dtype=bool)
    draws = inst.setup[:, off].astype(float)
    assert draws.size == 10 * 50 * 49
    # discrete uniform on 1..S has variance (S^2 - 1) / 12
    se = math.sqrt((S * S - 1) / 12 / draws.size)
    assert abs(draws.mean() - (1 + S) / 2) < 3 * se


def test_processing_range_respected():
    inst = generate(GeneratorSpec(3, 30, 9, processing_low=5, processing_high=7, seed=1))
    assert inst.processing.min() >= 5 and inst.processing.max() <= 7


def test_machine_blocks_do_not_depend_on_machine_count():
    # each setup block has its own stream, so adding machines leaves the
    # earlier blocks unchanged
    small = generate(GeneratorSpec(2, 8, 99, seed=9))
    large = generate(GeneratorSpec(5, 8, 99, seed=9))
    assert (small.setup == large.setup[:2]).all()


@pytest.mark.parametrize("kwargs", [
    dict(machines=0, jobs=3, max_setup=9),
    dict(machines=2, jobs=3, max_setup=0),
    dict(machines=2, jobs=3, max_setup=9, processing_low=10, processing_high=5),
    dict(machines=2, jobs=3, max_setup=9, seed=-1),
])
def test_spec_validation(kwargs):
    with pytest.raises(ConfigurationError):
        GeneratorSpec(**kwargs)


def test_round_trip(tmp_path):
    inst = generate(GeneratorSpec(3, 5, 9, seed=2))
    path = tmp_path / instance_filename(3, 5, 9, 2)
    text = write_instance(inst, path)
    assert path.name == "inst_M3_J5_S9_s2.txt"
    assert path.read_text(encoding="utf-8") == text
    assert read_instance(path) == inst
    buf = io.StringIO()
    write_instance(inst, buf)
    buf.seek(0)
    assert read_instance(buf) == inst


def test_truncated_setup_block_is_reported():
    text = dumps_instance(generate(GeneratorSpec(2, 4, 9, seed=0)))
    lines = text.splitlines()
    with pytest.raises(ParseError, match="setup block for machine 2"):
        loads_instance("\n".join(lines[:-2]) + "\n")


@pytest.mark.parametrize("text, fragment", [
    ("", "header"),
    ("2 1\n", "header"),
    ("2 1 5\n3\n", "truncated processing"),
    ("2 1 5\n3\n0\n\n0 2\n5 0\n", "positive"),
    ("2 1 5\n3\n4\n\n0 0\n5 0\n", "positive"),
    ("2 1 5\n3\n4\n0 2\n5 0\n", "blank separator"),
    ("2 1 5\n3\n4\n\n0 2\n5 0\n7\n", "trailing"),
    ("2 1 5\n3 x\n4\n\n0 2\n5 0\n", "processing row 1"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        loads_instance(text)


def test_hand_file_matches_hand_example(hand_instance):
    text = "2 1 5\n3\n4\n\n0 2\n5 0\n"
    inst = loads_instance(text)
    assert inst == hand_instance
    assert evaluate_machine(inst, [0, 1], 0) == 9
    assert evaluate_machine(inst, [1, 0], 0) == 12


def test_parse_error_carries_line_number():
    with pytest.raises(ParseError) as info:
        loads_instance("2 1 5\n3\n4\n\n0 2\n-1 0\n")
    assert info.value.line == 6
    assert str(info.value).startswith("line 6:")


def test_diagonal_is_ignored_in_equality():
    proc = np.array([[3], [4]])
    a = Instance(proc, np.array([[[0, 2], [5, 0]]]))
    b = Instance(proc, np.array([[[8, 2], [5, 9]]]))
    assert a == b
