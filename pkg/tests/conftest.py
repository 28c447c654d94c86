import numpy as np
import pytest

from logmoser.constants import make_dimension_context


@pytest.fixture(scope="session")
def ctx2():
    return make_dimension_context(2)


@pytest.fixture(scope="session")
def ctx3():
    return make_dimension_context(3)


def random_log_profile(rng, N, r_low=0.02, k_max=12, energy_scale=(0.3, 1.0)):
    """Random admissible profile, linear in log r between nodes."""
    from logmoser.profiles import RadialProfile, dirichlet_radial

    k = int(rng.integers(3, k_max))
    r = np.sort(rng.uniform(r_low, 1.0, k))
    r = np.append(r[r < 1.0], 1.0)
    u = np.sort(rng.uniform(0.0, 1.0, r.size))[::-1]
    u[-1] = 0.0
    p = RadialProfile(r, u, N, "log")
    return p.scaled(dirichlet_radial(p) ** (-1.0 / N) * rng.uniform(*energy_scale))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
