import numpy as np
import pytest


def random_spd(rng: np.random.Generator, d: int, ridge: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(d, d))
    return a @ a.T + ridge * np.eye(d)


def unit_rows(rng: np.random.Generator, k: int, d: int) -> np.ndarray:
    v = rng.normal(size=(k, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


# Acceptance verdict lines, echoed at the end of the terminal report.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
