import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def contractive(rng, n, sigma=0.9, signed=True):
    """Random dense n x n matrix rescaled to max singular value ``sigma``."""
    A = rng.normal(size=(n, n)) if signed else rng.uniform(size=(n, n))
    return A * (sigma / np.linalg.norm(A, 2))


def iterate_to_fixed_point(A, z, tol=1e-15, max_iter=100_000):
    """Independent oracle: run y <- A y + z until it stops moving."""
    A, z = np.asarray(A, float), np.asarray(z, float)
    y = np.zeros_like(z)
    for _ in range(max_iter):
        y_new = A @ y + z
        if np.max(np.abs(y_new - y)) <= tol * max(1.0, np.max(np.abs(y_new))):
            return y_new
        y = y_new
    raise AssertionError("oracle iteration did not converge")


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per criterion; echoed at the end of the run."""

    def report(criterion: str, ok: bool, detail: str) -> bool:
        line = f"ACCEPTANCE {criterion:<4} {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
