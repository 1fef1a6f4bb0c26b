import pytest

from sociorepr.experiments import ExperimentConfig

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def small_cfg():
    return ExperimentConfig(
        grid_width=4, grid_height=4, trials=20, repetitions=3, patch_sizes=(1, 2, 4),
        n_groups=2, m_per_group=3, rho_grid=(0.1, 1.0), lambda_grid=(0.0, 0.5, 1.0),
        fig1_agents=20, fig1_betas=(0.1, 1.0), n_agents=6,
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
