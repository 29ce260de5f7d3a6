import numpy as np
import pytest
from frozendict import frozendict

from tilekit.utilities.freezing import freeze_recursively, unfreeze_recursively
from tilekit.utilities.testing import assert_call


@pytest.mark.parametrize(
    "input, expected",
    [
        ({}, frozendict()),
        ({"A": "B"}, frozendict(A="B")),
        ({"A": {"B": 1}}, frozendict(A=frozendict(B=1))),
        ({"A": list(range(3))}, frozendict(A=tuple(range(3)))),
        ({"alpha": np.array([1, 2])}, frozendict(alpha=(1, 2))),
        ({"d": np.int64(2)}, frozendict(d=2)),
    ],
)
def test_freeze_recursively(input, expected):
    assert_call(freeze_recursively, expected, input)


@pytest.mark.parametrize(
    "input, expected",
    [
        (frozendict(), {}),
        (frozendict(A=frozendict(B=(1, 2))), {"A": {"B": [1, 2]}}),
        ((1, (2, 3)), [1, [2, 3]]),
        (4, 4),
    ],
)
def test_unfreeze_recursively(input, expected):
    value = unfreeze_recursively(input)
    assert value == expected
    assert type(value) == type(expected)


def test_freezing_is_hashable():
    frozen = freeze_recursively({"toy": {"d": 2, "j": [0, -1]}})
    assert hash(frozen) == hash(freeze_recursively({"toy": {"d": 2, "j": [0, -1]}}))
