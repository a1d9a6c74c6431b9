"""Unit tests for the command-line interface."""

import csv
import io
import json
import math
from unittest.mock import patch

import pytest

from qkpc.cli import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    load_constraints,
    main,
    parse_list,
    parse_range,
)
from qkpc.config import get_settings
from qkpc.exceptions import InfeasibleError, UsageError
from qkpc.models.capacity import Scheme
from qkpc.models.channel import LinkEnvironment, OokParams
from qkpc.physics.channels import ook_channel
from qkpc.services.protocol_service import error_probability


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Fixture running each command in an empty directory with fresh settings."""
    monkeypatch.chdir(tmp_path)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def run_csv(capsys, *argv: str) -> list[dict[str, str]]:
    assert main(list(argv)) == EXIT_OK
    return list(csv.DictReader(io.StringIO(capsys.readouterr().out)))


class TestParsing:
    """Tests for argument helpers."""

    def test_range(self):
        """Test evenly spaced ranges."""
        assert parse_range("0:1:3") == [0.0, 0.5, 1.0]

    def test_degenerate_range(self):
        """Test that equal bounds give one point."""
        assert parse_range("0:0") == [0.0]

    def test_log_range(self):
        """Test log-spaced ranges and their positivity check."""
        assert parse_range("1:100:3", log=True) == pytest.approx([1.0, 10.0, 100.0])
        with pytest.raises(UsageError):
            parse_range("0:100:3", log=True)

    @pytest.mark.parametrize("text", ["1", "a:b", "0:1:0", "0:1:2:3"])
    def test_malformed_range(self, text):
        """Test that malformed ranges raise a usage error."""
        with pytest.raises(UsageError):
            parse_range(text)

    def test_list(self):
        """Test comma-separated lists."""
        assert parse_list("1,2,3", int) == [1, 2, 3]
        assert parse_list("") == []
        with pytest.raises(UsageError):
            parse_list("1,x")

    def test_constraints_file(self, tmp_path):
        """Test that a constraints file overrides scheme defaults, angles in degrees."""
        path = tmp_path / "bounds.env"
        path.write_text("max_mean_photons=5\nmax_theta_deg=30\n")
        constraints = load_constraints(path, Scheme.PM_CONSTRAINED)
        assert constraints.max_mean_photons == 5.0
        assert constraints.max_theta == pytest.approx(math.radians(30.0))

    def test_constraints_defaults(self):
        """Test scheme defaults without a file."""
        assert load_constraints(None, Scheme.PM_CONSTRAINED).max_mean_photons == 20.0


class TestExitCodes:
    """Tests for exit codes."""

    def test_unknown_scheme(self):
        """Test that an unknown scheme is a usage error."""
        assert main(["capacity", "--scheme", "bogus"]) == EXIT_USAGE

    def test_k_list_with_pm(self):
        """Test that OOK thresholds cannot be combined with the PM scheme."""
        assert main(["qber-curve", "--scheme", "pm", "--k-list", "1,2"]) == EXIT_USAGE

    def test_theta_list_with_ook(self):
        """Test that PM angles cannot be combined with the OOK scheme."""
        argv = ["qber-curve", "--scheme", "ook", "--theta-list", "45"]
        assert main(argv) == EXIT_USAGE

    def test_unknown_constraint_key(self, tmp_path):
        """Test that unknown constraint keys are rejected."""
        path = tmp_path / "bounds.env"
        path.write_text("max_photons=5\n")
        assert main(["capacity", "--constraints", str(path)]) == EXIT_USAGE

    def test_inconsistent_constraints(self, tmp_path):
        """Test that crossed bounds are a usage error."""
        path = tmp_path / "bounds.env"
        path.write_text("max_mean_photons=1e-4\n")
        assert main(["capacity", "--constraints", str(path)]) == EXIT_USAGE

    def test_negative_noise(self):
        """Test that a negative Delta is rejected."""
        assert main(["capacity", "--delta", "-1"]) == EXIT_USAGE

    def test_numerical_failure(self):
        """Test that an infeasible optimization exits with the numerical code."""
        with patch(
            "qkpc.cli.CapacityService.optimize_private_capacity",
            side_effect=InfeasibleError("nothing to evaluate"),
        ):
            assert main(["capacity", "--scheme", "ook-k1"]) == EXIT_NUMERICAL

    def test_non_positive_pulses(self):
        """Test that argparse rejects zero pulses."""
        assert main(["simulate", "--alpha2", "1", "--pulses", "0"]) == EXIT_USAGE


class TestCommands:
    """Tests for the subcommands."""

    def test_background_sky_conditions(self, capsys):
        """Test that the sky table reproduces all six rows."""
        rows = run_csv(capsys, "background", "--preset", "table1")
        assert len(rows) == 6
        for row in rows:
            assert float(row["photons_per_pulse"]) == pytest.approx(
                float(row["tabulated"]), rel=1e-6
            )

    def test_background_daylight_experiments(self, capsys):
        """Test the per-pulse noise of the daylight experiments."""
        rows = run_csv(capsys, "background", "--preset", "table2")
        deltas = [float(r["delta"]) for r in rows]
        assert deltas == pytest.approx([0.03, 4.8e-6, 5.78e-3])

    def test_detector_loss_monotone(self, capsys):
        """Test that the lost-photon column increases with |alpha|^2."""
        rows = run_csv(
            capsys, "detector-loss", "--n", "250", "--alpha2-range", "0:50:26"
        )
        losses = [float(r["lost_photons"]) for r in rows]
        assert len(losses) == 26
        assert all(b > a for a, b in zip(losses, losses[1:]))

    def test_degenerate_range_single_row(self, capsys):
        """Test that a zero-width range gives one row."""
        rows = run_csv(capsys, "detector-loss", "--alpha2-range", "0:0")
        assert len(rows) == 1
        assert float(rows[0]["lost_photons"]) == 0.0

    def test_capacity_reference_experiment(self, capsys):
        """Test k = 1 OOK at the 145 m link noise level."""
        assert (
            main(
                [
                    "capacity",
                    "--scheme",
                    "ook-k1",
                    "--gamma",
                    "0.1",
                    "--delta",
                    "4.8e-6",
                    "--source-frequency",
                    "50e6",
                    "--format",
                    "json",
                ]
            )
            == EXIT_OK
        )
        (record,) = json.loads(capsys.readouterr().out)
        assert record["c_p"] == pytest.approx(0.66, abs=0.05)
        expected_rate = record["c_p"] * 50e6
        assert record["secure_rate_bps"] == pytest.approx(expected_rate, rel=1e-8)

    def test_simulate(self, capsys):
        """Test that a simulation reports both empirical and analytic QBER."""
        rows = run_csv(
            capsys,
            "simulate",
            "--alpha2",
            "1",
            "--pulses",
            "20000",
            "--repetitions",
            "2",
            "--seed",
            "3",
        )
        (row,) = rows
        assert row["counting"] == "dead-time"
        assert float(row["qber_mean"]) == pytest.approx(
            float(row["analytic_qber"]), abs=0.02
        )
        assert float(row["analytic_gap"]) == pytest.approx(
            float(row["qber_mean"]) - float(row["analytic_qber"]), abs=1e-8
        )

    def test_simulate_ideal_counting(self, capsys):
        """Test that the counting flag selects Poisson sampling."""
        (row,) = run_csv(
            capsys,
            "simulate",
            "--alpha2",
            "1",
            "--pulses",
            "2000",
            "--repetitions",
            "1",
            "--counting",
            "ideal",
        )
        assert row["counting"] == "ideal"

    def test_simulate_background_photons(self, capsys):
        """Test that background photons and dark counts set the noise per pulse."""
        (row,) = run_csv(
            capsys,
            "simulate",
            "--alpha2",
            "1",
            "--pulses",
            "2000",
            "--repetitions",
            "1",
            "--background-photons",
            "0.02",
        )
        # 0.5 x 0.02 detected plus 70 Hz x 10 us dark counts
        assert float(row["delta"]) == pytest.approx(0.0107, rel=1e-8)
        env = LinkEnvironment(delta=0.0107, gamma=0.1)
        analytic = error_probability(ook_channel(OokParams(mean_photons=1.0), env), 0.5)
        assert float(row["analytic_qber"]) == pytest.approx(analytic, rel=1e-8)

    def test_qber_curve_background_photons(self, capsys):
        """Test that the curve uses the detector-derived noise instead of --delta."""
        rows = run_csv(
            capsys,
            "qber-curve",
            "--alpha2-range",
            "2:2",
            "--background-photons",
            "1",
            "--detector",
            "paper-appendix",
        )
        (row,) = rows
        env = LinkEnvironment(delta=0.5007, gamma=0.1)
        analytic = error_probability(ook_channel(OokParams(mean_photons=2.0), env), 0.5)
        assert float(row["qber"]) == pytest.approx(analytic, rel=1e-8)

    def test_usd_zero_signal(self, capsys):
        """Test the zero-photon USD point for both receivers."""
        rows = run_csv(capsys, "usd", "--alpha2-range", "0:0")
        assert [r["scheme"] for r in rows] == ["usd-pm", "pm"]
        assert all(float(r["c_p"]) == 0.0 for r in rows)

    def test_monte_carlo_output_reproducible(self, tmp_path):
        """Test byte-identical tables for a fixed seed."""
        outputs = []
        for name in ("first.csv", "second.csv"):
            path = tmp_path / name
            argv = [
                "qber-curve",
                "--alpha2-range",
                "0.5:2:3",
                "--monte-carlo",
                "--seed",
                "7",
                "--pulses",
                "2000",
                "--repetitions",
                "2",
                "--out",
                str(path),
            ]
            assert main(argv) == EXIT_OK
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]
        manifest = json.loads((tmp_path / "first.csv.manifest.json").read_text())
        assert manifest["command"] == "qber-curve"
        assert manifest["seed"] == 7

    def test_heatmap_cells(self, capsys):
        """Test one row per (scheme, gamma, delta) cell."""
        rows = run_csv(
            capsys,
            "heatmap",
            "--scheme",
            "ook-k1",
            "--gamma-list",
            "0.1,1",
            "--delta-range",
            "0.01:1:2",
        )
        assert len(rows) == 4
        assert all(r["error"] == "" for r in rows)
        full_tap = [float(r["c_p"]) for r in rows if float(r["gamma"]) == 1.0]
        assert full_tap == [0.0, 0.0]
