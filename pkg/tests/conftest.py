import numpy as np
import pytest

from hypcert.pde import conserved_from_primitive, make_system


def random_valid_states(sys, n, rng):
    """Random physical states with shape (m, n)."""
    if sys.is_scalar:
        return rng.uniform(-3.0, 3.0, size=(1, n))
    rho = rng.uniform(0.1, 3.0, n)
    p = rng.uniform(0.1, 3.0, n)
    vel = [rng.uniform(-2.0, 2.0, n) for _ in range(sys.dim)]
    return conserved_from_primitive(sys, (rho, *vel, p))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["advection1d", "advection2d", "burgers1d", "burgers2d", "euler1d", "euler2d"])
def any_system(request):
    return make_system(request.param)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for key in ("passed", "failed", "xfailed", "xpassed"):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when not in ("call", "setup"):
                continue
            if rep.when == "setup" and rep.passed:
                continue
            name = nodeid.split("::test_criterion_")[1]
            verdict = "PASS" if key in ("passed", "xpassed") else "FAIL"
            detail = dict(rep.user_properties).get("detail", "")
            lines.append(f"criterion {name}: {verdict}  {detail}".rstrip())
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
