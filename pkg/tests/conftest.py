import pytest

from wandset import universe, wandspec


_FRAGMENTS = {}


def built(name: str, depth: int, **kw):
    """Shared fragment builds; most tests read fragments without mutating."""
    key = (name, depth, tuple(sorted(kw.items())))
    if key not in _FRAGMENTS:
        _FRAGMENTS[key] = universe.build(wandspec.get_spec(name), depth, **kw)
    return _FRAGMENTS[key]


@pytest.fixture(scope="session")
def church3():
    return built("church:2", 3)


@pytest.fixture(scope="session")
def pure4():
    return built("pure", 4)


@pytest.fixture(scope="session")
def conway4():
    return built("conway", 4)
