"""Unit tests for the induced channels and Eve's Helstrom error."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from qkpc.models.channel import (
    BinaryChannel,
    LinkEnvironment,
    OokParams,
    PmParams,
    TieRule,
)
from qkpc.physics.channels import (
    eve_error,
    eve_error_ook,
    eve_error_pm,
    helstrom_error,
    ook_channel,
    pm_channel,
    pm_detector_rates,
    pm_tie_probabilities,
)
from qkpc.physics.information import mutual_info_bob


@pytest.fixture
def noisy_env():
    """Fixture providing a link with Delta = 0.03 and gamma = 0.1."""
    return LinkEnvironment(eta=1.0, delta=0.03, gamma=0.1)


class TestModels:
    """Tests for channel-level Pydantic models."""

    def test_channel_rows_must_sum_to_one(self):
        """Test that an unnormalized channel is rejected."""
        with pytest.raises(ValidationError):
            BinaryChannel(eps00=0.9, eps01=0.2, eps10=0.1, eps11=0.9)

    def test_from_correct_and_qber(self):
        """Test that complements and the uniform-prior QBER are filled in."""
        channel = BinaryChannel.from_correct(0.9, 0.2)
        assert channel.eps01 == pytest.approx(0.1)
        assert channel.eps11 == pytest.approx(0.8)
        assert channel.qber == pytest.approx(0.15)

    def test_gamma_required_in_unit_interval(self):
        """Test that gamma must lie in (0, 1]."""
        with pytest.raises(ValidationError):
            LinkEnvironment(gamma=0.0)
        with pytest.raises(ValidationError):
            LinkEnvironment(gamma=1.5)

    def test_eve_efficiency(self):
        """Test both Eve efficiency conventions."""
        assert LinkEnvironment(eta=0.5, gamma=0.2).eve_efficiency == pytest.approx(0.1)
        env = LinkEnvironment(
            eta=0.5, gamma=0.2, eve_includes_receiver_efficiency=False
        )
        assert env.eve_efficiency == pytest.approx(0.2)

    def test_theta_bounds(self):
        """Test that angles outside [0, pi] are rejected."""
        with pytest.raises(ValidationError):
            PmParams(mean_photons=1.0, theta=4.0)


class TestOokChannel:
    """Tests for the OOK threshold receiver."""

    def test_threshold_example(self):
        """Test P(0|1) at eta|alpha|^2 = 10, k = 3, Delta = 0.8."""
        env = LinkEnvironment(delta=0.8, gamma=0.1)
        channel = ook_channel(OokParams(mean_photons=10.0, threshold_k=3), env)
        assert channel.eps10 == pytest.approx(0.001430, abs=1e-6)

    def test_k1_vacuum_probabilities(self, noisy_env):
        """Test that k = 1 decodes 0 exactly when nothing clicks."""
        channel = ook_channel(OokParams(mean_photons=2.0), noisy_env)
        assert channel.eps00 == pytest.approx(math.exp(-0.03))
        assert channel.eps10 == pytest.approx(math.exp(-2.03))

    def test_no_signal_is_useless(self, noisy_env):
        """Test that |alpha|^2 = 0 makes both rows identical."""
        channel = ook_channel(OokParams(mean_photons=0.0, threshold_k=2), noisy_env)
        assert channel.eps00 == pytest.approx(channel.eps10)

    def test_eta_scales_signal(self):
        """Test that eta enters only through eta |alpha|^2."""
        half = ook_channel(
            OokParams(mean_photons=4.0), LinkEnvironment(eta=0.5, delta=0.1, gamma=0.1)
        )
        full = ook_channel(
            OokParams(mean_photons=2.0), LinkEnvironment(delta=0.1, gamma=0.1)
        )
        assert half.eps10 == pytest.approx(full.eps10, rel=1e-12)


class TestPmChannel:
    """Tests for the majority-click receiver."""

    def test_orthogonal_rates(self, noisy_env):
        """Test that theta = 90 deg sends each state to its own detector."""
        rates = pm_detector_rates(5.0, math.pi / 2, 1.0, noisy_env)
        (lam0, lam1), (lam0p, lam1p) = rates
        assert lam0 == pytest.approx(5.03)
        assert lam1 == pytest.approx(0.03)
        assert lam0p == pytest.approx(0.03)
        assert lam1p == pytest.approx(5.03)

    def test_rates_conserve_photons(self, noisy_env):
        """Test that the rotation splits, but does not lose, the signal."""
        rates_zero, rates_one = pm_detector_rates(3.0, 0.7, 0.4, noisy_env)
        assert sum(rates_zero) == pytest.approx(3.0 + 0.06)
        assert sum(rates_one) == pytest.approx(0.4 * 3.0 + 0.06)

    def test_rows_normalized(self, noisy_env):
        """Test that every tie rule gives a valid channel."""
        for rule in TieRule:
            channel = pm_channel(
                PmParams(mean_photons=4.0, theta=math.pi / 4, tie_rule=rule), noisy_env
            )
            assert channel.eps00 + channel.eps01 == pytest.approx(1.0, abs=1e-9)

    def test_large_signal_is_error_free(self):
        """Test that orthogonal states with many photons are decoded perfectly."""
        env = LinkEnvironment(delta=0.0, gamma=0.1)
        channel = pm_channel(PmParams(mean_photons=60.0, theta=math.pi / 2), env)
        assert channel.qber < 1e-12

    def test_tie_rule_optimality(self):
        """Test that ties are likelier under input 1 and AlwaysOne minimizes QBER."""
        rng = np.random.default_rng(2024)
        for _ in range(200):
            env = LinkEnvironment(delta=rng.uniform(0.0, 2.0), gamma=0.1)
            base = {
                "mean_photons": rng.uniform(0.01, 20.0),
                "theta": rng.uniform(0.0, math.pi / 2),
                "kappa": rng.uniform(0.0, 1.0),
            }
            tie0, tie1 = pm_tie_probabilities(PmParams(**base), env)
            assert tie1 >= tie0 - 1e-12
            qbers = {
                rule: pm_channel(PmParams(**base, tie_rule=rule), env).qber
                for rule in TieRule
            }
            assert qbers[TieRule.ALWAYS_ONE] <= qbers[TieRule.ALWAYS_ZERO] + 1e-12
            assert qbers[TieRule.ALWAYS_ONE] <= qbers[TieRule.RANDOM] + 1e-12

    @pytest.mark.parametrize("received", [0.1, 0.5, 1.0, 2.0, 5.0])
    def test_kappa_zero_matches_single_threshold_ook(self, received):
        """Test that PM with a vacuum bit-1 state gives Bob the k = 1 OOK info."""
        env = LinkEnvironment(eta=0.8, delta=0.0, gamma=0.1)
        mean = received / env.eta
        pm = pm_channel(PmParams(mean_photons=mean, theta=math.pi / 2, kappa=0.0), env)
        ook = ook_channel(OokParams(mean_photons=mean), env)
        assert mutual_info_bob(pm) == pytest.approx(mutual_info_bob(ook), abs=1e-6)
        assert pm.eps01 == pytest.approx(ook.eps10, abs=1e-9)
        assert pm.eps10 == pytest.approx(ook.eps01, abs=1e-9)


class TestEveError:
    """Tests for Eve's minimum-error discrimination."""

    def test_helstrom_limits(self):
        """Test identical states (1/2) and well-separated states (0)."""
        assert helstrom_error(0.0) == pytest.approx(0.5)
        assert helstrom_error(60.0) == pytest.approx(0.0, abs=1e-12)

    def test_pm_example(self):
        """Test the PM error at theta = 90 deg and unit intercepted flux."""
        error = eve_error_pm(1.0, 1.0, 1.0, math.pi / 2)
        assert error == pytest.approx(0.035063, abs=1e-6)

    def test_pm_kappa_zero_is_ook(self):
        """Test that a vacuum bit-1 state reduces PM to OOK."""
        assert eve_error_pm(0.3, 0.8, 2.0, 1.1, kappa=0.0) == pytest.approx(
            eve_error_ook(0.3, 0.8, 2.0), rel=1e-12
        )

    def test_receiver_efficiency_convention(self):
        """Test that excluding eta gives Eve more flux."""
        excluded = eve_error_ook(0.1, 0.5, 4.0, include_eta=False)
        assert excluded < eve_error_ook(0.1, 0.5, 4.0)

    def test_dispatch(self, noisy_env):
        """Test that eve_error picks the bound matching the parameters."""
        assert eve_error(OokParams(mean_photons=2.0), noisy_env) == pytest.approx(
            eve_error_ook(0.1, 1.0, 2.0)
        )
        pm = PmParams(mean_photons=2.0, theta=0.5)
        assert eve_error(pm, noisy_env) == pytest.approx(
            eve_error_pm(0.1, 1.0, 2.0, 0.5)
        )

    def test_eve_below_bob_at_full_tap(self):
        """Test that with gamma = 1 Eve's error never exceeds Bob's k = 1 QBER."""
        env = LinkEnvironment(delta=0.03, gamma=1.0)
        for x in np.linspace(0.1, 20.0, 25):
            bob = ook_channel(OokParams(mean_photons=x), env).qber
            assert eve_error(OokParams(mean_photons=x), env) <= bob
