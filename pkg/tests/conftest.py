import pytest

from qkga.config import ExperimentConfig

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, passed: bool, detail: str) -> None:
    line = f"AC{criterion:02d} {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def tiny_config():
    return ExperimentConfig(
        train_count=20, test_count=10, validation_count=20,
        qubits=2, layers=2, population_size=6, offspring_per_generation=4,
        generations=3, refine_budget=5, refine_top_k=2, grid_resolution=10,
        approaches=["1", "2", "3"],
    )
