import pytest

from selflink import geometry as geo
from selflink.framing import add_twists, frenet_framing, projection_framing

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {criterion:>2}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def hopf_pair():
    c0 = geo.circle()
    c1 = geo.circle(cx=1.0, ux=1.0, uy=0.0, uz=0.0, vx=0.0, vy=0.0, vz=1.0)
    return c0, c1


@pytest.fixture(scope="session")
def unit_circle():
    return geo.circle()


@pytest.fixture(scope="session")
def trefoil():
    return geo.torus_knot(2, 3, 2.0, 0.5)


@pytest.fixture(scope="session")
def torus32():
    return geo.torus_knot(3, 2, 2.0, 0.5)


@pytest.fixture(scope="session")
def hopf():
    return hopf_pair()


def framed_fixtures():
    """Named (curve, framing) pairs shared by the invariant and acceptance tests."""
    c = geo.circle()
    const = projection_framing(c, (0, 0, 1))
    k23 = geo.torus_knot(2, 3, 2.0, 0.5)
    k32 = geo.torus_knot(3, 2, 2.0, 0.5)
    return {
        "circle_twist0": (c, const),
        "circle_twist1": (c, add_twists(const, 1)),
        "circle_twist3": (c, add_twists(const, 3)),
        "trefoil_frenet": (k23, frenet_framing(k23)),
        "trefoil_blackboard": (k23, projection_framing(k23, (0, 0, 1))),
        "torus32_frenet": (k32, frenet_framing(k32)),
    }
