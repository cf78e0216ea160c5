import pytest

import critbubble.conf
from critbubble.quad import QuadSpec


@pytest.fixture(autouse=True)
def no_output_dir_override(monkeypatch):
    monkeypatch.delenv(critbubble.conf.OUTPUT_DIR_ENV, raising=False)


@pytest.fixture(autouse=True)
def pristine_config():
    data = critbubble.conf.config._data.maps[0]
    saved = dict(data)
    yield
    data.clear()
    data.update(saved)


@pytest.fixture
def spec():
    return QuadSpec()


@pytest.fixture
def loose_spec():
    return QuadSpec(rel_tol=1e-6, abs_tol=1e-10)


@pytest.fixture
def output_dir(tmpdir):
    return str(tmpdir.join("results"))
