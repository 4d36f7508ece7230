import json

import pytest

from semiforms.polyring import DiffForm
from semiforms.reflgroup import fixture_path, load_fixture

SHIPPED = ("g26", "b2", "s2", "cyclic_m")
_GROUPS = {}


def group(name):
    if name not in _GROUPS:
        _GROUPS[name] = load_fixture(name)
    return _GROUPS[name]


def reference_forms():
    with open(fixture_path("g26_det3_forms.json")) as fh:
        return [DiffForm.from_json(f) for f in json.load(fh)["forms"]]


@pytest.fixture(scope="session")
def g26():
    return group("g26")


@pytest.fixture(scope="session")
def b2():
    return group("b2")
