import numpy as np
import pytest

from zakharov_lab.grid import make_grid
from zakharov_lab.ground_state import solve_ground_state

# Ground-state constants on the reference grid, frozen from the shooting
# solver and confirmed by the independent fixed-point iteration.
Q0_REF = 4.337387679977029
MASS_REF = 9.448625651283765


@pytest.fixture(scope="session")
def ref_grid():
    return make_grid(2047, 48.0)


@pytest.fixture(scope="session")
def gs(ref_grid):
    return solve_ground_state(ref_grid)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(255, 24.0)


def gaussian(grid, amp=1.0, sigma=1.0):
    return grid.field(amp * np.exp(-0.5 * (grid.r / sigma) ** 2))


# One line per acceptance criterion, echoed at the end of the session.
ACCEPTANCE_LINES = []


def report(number: int, ok: bool, detail: str):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
