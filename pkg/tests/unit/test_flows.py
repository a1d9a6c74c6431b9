"""Unit tests for the Prefect flows."""

import pytest

from qkpc.flows.sweep_flow import (
    capacity_sweep_flow,
    optimize_cell_task,
    run_transmission_task,
    transmission_campaign_flow,
)
from qkpc.models.capacity import Scheme, SweepGrid
from qkpc.models.channel import LinkEnvironment, OokParams
from qkpc.models.protocol import Encoding, TransmissionConfig


@pytest.fixture
def small_grid():
    """Fixture providing a 2 x 2 k = 1 OOK grid."""
    return SweepGrid(
        delta_values=[0.01, 0.1],
        gamma_values=[0.1, 0.5],
        scheme=Scheme.OOK_THRESHOLD1,
    )


@pytest.fixture
def configs():
    """Fixture providing two short OOK campaigns."""
    env = LinkEnvironment(delta=0.03, gamma=0.1)
    return [
        TransmissionConfig(
            encoding=Encoding.OOK,
            params=OokParams(mean_photons=mean),
            env=env,
            n_pulses=2_000,
            repetitions=2,
            seed=seed,
        )
        for seed, mean in enumerate((0.5, 3.0))
    ]


@pytest.fixture(scope="module")
def prefect_harness():
    """Fixture providing a temporary Prefect backend."""
    from prefect.testing.utilities import prefect_test_harness

    with prefect_test_harness():
        yield


class TestTasks:
    """Tests for the task bodies."""

    def test_optimize_cell(self, small_grid):
        """Test that the task optimizes the requested cell."""
        cell = optimize_cell_task.fn(3, 0.5, 0.1, small_grid, True)
        assert cell.index == 3
        assert not cell.failed
        assert cell.result.scheme is Scheme.OOK_THRESHOLD1

    def test_run_transmission(self, configs):
        """Test that the task returns a report for the config."""
        report = run_transmission_task.fn(configs[0])
        assert report.n_pulses == 2_000
        assert len(report.per_repetition) == 2


@pytest.mark.slow
class TestFlows:
    """Tests for the flows against a temporary Prefect backend."""

    def test_capacity_sweep_flow(self, prefect_harness, small_grid):
        """Test that cells come back complete and in index order."""
        cells = capacity_sweep_flow(small_grid)
        assert [cell.index for cell in cells] == [0, 1, 2, 3]
        assert [(cell.gamma, cell.delta) for cell in cells] == small_grid.cells()

    def test_transmission_campaign_flow(self, prefect_harness, configs):
        """Test that reports follow the input order."""
        reports = transmission_campaign_flow(configs)
        assert len(reports) == 2
        assert reports[0].mean_clicks_bit_one < reports[1].mean_clicks_bit_one
