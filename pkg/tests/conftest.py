import functools

import pytest

from cfk.store import enumerate_complex
from cfk.tropical import preset


@functools.lru_cache(maxsize=None)
def store_for(name, max_clusters=None):
    return enumerate_complex(preset(name), max_clusters)


@pytest.fixture
def stores():
    return store_for
