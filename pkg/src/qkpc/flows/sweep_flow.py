"""Prefect flows for capacity sweeps and Monte Carlo campaigns."""

from prefect import flow, get_run_logger, task

from qkpc.config import get_settings
from qkpc.models.capacity import SweepCell, SweepGrid
from qkpc.models.protocol import TransmissionConfig, TransmissionReport
from qkpc.services.capacity_service import evaluate_sweep_cell
from qkpc.services.protocol_service import TransmissionService


@task(name="optimize-sweep-cell")
def optimize_cell_task(
    index: int,
    gamma: float,
    delta: float,
    grid: SweepGrid,
    eve_includes_receiver_efficiency: bool,
) -> SweepCell:
    """Optimize one (gamma, delta) cell of a sweep."""
    return evaluate_sweep_cell(
        index,
        gamma,
        delta,
        grid.scheme,
        grid.eta,
        grid.constraints,
        eve_includes_receiver_efficiency,
    )


@task(name="run-transmission")
def run_transmission_task(cfg: TransmissionConfig) -> TransmissionReport:
    """Run one seeded transmission campaign."""
    return TransmissionService().run_transmission(cfg)


@flow(name="capacity-sweep")
def capacity_sweep_flow(grid: SweepGrid) -> list[SweepCell]:
    """Optimize every cell of ``grid`` as concurrent tasks, gathered by cell index."""
    logger = get_run_logger()
    eve_includes = get_settings().eve_includes_receiver_efficiency
    futures = [
        optimize_cell_task.submit(index, gamma, delta, grid, eve_includes)
        for index, (gamma, delta) in enumerate(grid.cells())
    ]
    cells = sorted((future.result() for future in futures), key=lambda cell: cell.index)
    failed = sum(cell.failed for cell in cells)
    logger.info(f"Sweep of {grid.scheme}: {len(cells)} cells, {failed} failed")
    return cells


@flow(name="transmission-campaign")
def transmission_campaign_flow(
    configs: list[TransmissionConfig],
) -> list[TransmissionReport]:
    """Run several transmission configs as tasks; reports follow the input order."""
    logger = get_run_logger()
    futures = [run_transmission_task.submit(cfg) for cfg in configs]
    reports = [future.result() for future in futures]
    logger.info(f"Transmission campaign complete: {len(reports)} configs")
    return reports
