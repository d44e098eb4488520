import pytest
from hypothesis import HealthCheck, settings

from heyting.duality import boolean_algebra, chain_algebra, corpus_algebras, two_element
from heyting.poset import FinitePoset

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def two():
    return two_element()


@pytest.fixture(scope="session")
def chain3():
    """0 < m < 1 on the 2-chain dual (points 0 <= 1); m is the up-set {1}."""
    return chain_algebra(3)


@pytest.fixture(scope="session")
def bool4():
    return boolean_algebra(2)


@pytest.fixture(scope="session")
def corpus():
    return corpus_algebras(32)


@pytest.fixture(scope="session")
def small_corpus():
    return [A for A in corpus_algebras(8) if not A.is_trivial]


def vee():
    """Points x <= y, x <= z: the V shape opening upwards."""
    return FinitePoset.from_pairs(3, [(0, 1), (0, 2)])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
