import pytest

from fluxtalk.config import load_device


@pytest.fixture(scope="session")
def device():
    return load_device()
