"""Prefect flows for orchestrated sweeps and Monte Carlo campaigns."""
