import numpy as np
import pytest

from fairtrees.data import Dataset

_acceptance_results = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_results[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name in sorted(_acceptance_results):
        outcome = _acceptance_results[name].upper()
        terminalreporter.write_line(f"  {outcome:7s} {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def binary_dataset(X, y, s):
    """Dataset from small binary matrices (test fixtures)."""
    X = np.asarray(X, dtype=np.float64)
    return Dataset(
        feature_names=tuple(f"a{i}" for i in range(X.shape[1])),
        feature_kinds=np.zeros(X.shape[1], dtype=np.uint8),
        X=np.ascontiguousarray(X),
        y=np.asarray(y, dtype=np.uint8),
        s=np.asarray(s, dtype=np.uint8),
    )


def array_dataset(X, y, s, kinds, names=None):
    X = np.asarray(X, dtype=np.float64)
    return Dataset(
        feature_names=tuple(names) if names else tuple(f"f{i}" for i in range(X.shape[1])),
        feature_kinds=np.asarray(kinds, dtype=np.uint8),
        X=np.ascontiguousarray(X),
        y=np.asarray(y, dtype=np.uint8),
        s=np.asarray(s, dtype=np.uint8),
    )


# Hand-built witness: the best feasible root split (a2) cannot head a fair
# subtree, the second-best (a1) can; backtracking must go strictly deeper
# than the greedy constrained grower. gamma = 0.1, max_depth = 3.
WITNESS_X = [
    [1, 0, 1], [0, 1, 1], [0, 1, 1], [1, 0, 0], [0, 0, 1], [1, 1, 0],
    [0, 0, 1], [0, 1, 0], [1, 0, 0], [0, 1, 1], [0, 0, 0], [0, 1, 1],
]
WITNESS_Y = [1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1]
WITNESS_S = [0, 0, 1, 1, 0, 1, 1, 1, 1, 1, 0, 1]
WITNESS_GAMMA = 0.1


@pytest.fixture
def witness_dataset():
    return binary_dataset(WITNESS_X, WITNESS_Y, WITNESS_S)
