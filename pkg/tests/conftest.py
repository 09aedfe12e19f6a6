import json

import pytest

from qserre.model import Model, bundled_path, load_bundled


@pytest.fixture(scope="session")
def cp1():
    return load_bundled("cp1")


@pytest.fixture(scope="session")
def cp2():
    return load_bundled("cp2")


def bundled_doc(name):
    return json.loads(bundled_path(name).read_text(encoding="utf-8"))


def model_from(doc):
    return Model(doc)
