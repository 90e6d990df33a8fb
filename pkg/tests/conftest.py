import pytest

from blenderlab.examples import polynomial_example
from blenderlab.flatpoint import construct_one_flat, identity_window
from blenderlab.invariants import repeller_attractor_pairs


def pick_pair(pairs, q):
    return next(pr for pr in pairs if abs(pr.q - q) < 1e-6)


@pytest.fixture(scope="session")
def rho():
    return polynomial_example()


@pytest.fixture(scope="session")
def pairs(rho):
    return repeller_attractor_pairs(rho[0])


@pytest.fixture(scope="session")
def pair_low(pairs):
    return pick_pair(pairs, 0.1)


@pytest.fixture(scope="session")
def pair_high(pairs):
    return pick_pair(pairs, 0.9)


@pytest.fixture(scope="session")
def cert(rho, pair_low):
    return construct_one_flat(rho, pair_low, 0.3)


@pytest.fixture(scope="session")
def cert_high(rho, pair_high):
    return construct_one_flat(rho, pair_high, 0.7, target_log=5.0)


@pytest.fixture(scope="session")
def window(cert):
    return identity_window(cert)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for the running criterion test."""
    rec = {"detail": ""}
    yield rec
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    line = f"criterion {rec['number']}: {'PASS' if ok else 'FAIL'} {rec['title']} ({rec['detail']})"
    print(line)
    request.config.stash[ACCEPTANCE_KEY].append(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
