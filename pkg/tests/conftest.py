import numpy as np
import pytest

from accumsel import Dataset, FeatureMask


def width_dataset(n: int) -> Dataset:
    """Tiny valid dataset whose only job is to carry a feature count."""
    values = np.arange(4 * n, dtype=float).reshape(4, n)
    return Dataset(values, ["A", "A", "B", "B"], [f"f{j}" for j in range(n)])


def toy_score(mask: FeatureMask) -> float:
    """|X & {f0,f1}|/2 - 0.1*[f2 in X]."""
    return len({0, 1} & set(mask)) / 2 - 0.1 * (2 in mask)


def random_table(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(0, 1, size=1 << n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
