"""Service for Monte Carlo transmissions and QBER curves."""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from qkpc.config import Settings, get_settings
from qkpc.models.channel import (
    BinaryChannel,
    LinkEnvironment,
    OokParams,
    PmParams,
    TieRule,
)
from qkpc.models.detector import DEFAULT_DETECTOR, DetectorModel
from qkpc.models.protocol import (
    CurvePoint,
    Encoding,
    TransmissionConfig,
    TransmissionReport,
)
from qkpc.physics.channels import (
    eve_error_ook,
    eve_error_pm,
    ook_channel,
    pm_channel,
    pm_detector_rates,
)
from qkpc.physics.detector import sample_pulse_clicks

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _RepetitionTally:
    errors: int
    counts: np.ndarray  # 2 x 2, counts[x, y]
    clicks: int
    clicks_bit_one: int
    ties: int


def message_bits(message: str, n_pulses: int) -> np.ndarray:
    """UTF-8 bits of ``message``, most significant first, cycled to ``n_pulses``."""
    bits = np.unpackbits(np.frombuffer(message.encode("utf-8"), dtype=np.uint8))
    return np.resize(bits, n_pulses).astype(np.int8)


def error_probability(channel: BinaryChannel, q0: float) -> float:
    """Analytic QBER of ``channel`` under input prior ``q0``."""
    return q0 * channel.eps01 + (1.0 - q0) * channel.eps10


def _draw_bits(cfg: TransmissionConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.message is not None:
        return message_bits(cfg.message, cfg.n_pulses)
    return (rng.random(cfg.n_pulses) >= cfg.params.q0).astype(np.int8)


def _decide_ook(
    cfg: TransmissionConfig, bits: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, int]:
    params: OokParams = cfg.params
    rates = cfg.env.eta * params.mean_photons * bits + cfg.env.delta
    clicks = np.asarray(sample_pulse_clicks(rng, cfg.detector, rates))
    return (clicks >= params.threshold_k).astype(np.int8), clicks, 0


def _decide_pm(
    cfg: TransmissionConfig, bits: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, int]:
    params: PmParams = cfg.params
    rates_zero, rates_one = pm_detector_rates(
        params.mean_photons, params.theta, params.kappa, cfg.env
    )
    first = np.where(bits == 0, rates_zero[0], rates_one[0])
    second = np.where(bits == 0, rates_zero[1], rates_one[1])
    clicks_first = np.asarray(sample_pulse_clicks(rng, cfg.detector, first))
    clicks_second = np.asarray(sample_pulse_clicks(rng, cfg.detector, second))
    difference = clicks_first - clicks_second
    tie = difference == 0
    decided = np.where(difference > 0, 0, 1).astype(np.int8)
    match params.tie_rule:
        case TieRule.ALWAYS_ZERO:
            decided[tie] = 0
        case TieRule.ALWAYS_ONE:
            decided[tie] = 1
        case TieRule.RANDOM:
            decided[tie] = (rng.random(int(tie.sum())) >= params.q0).astype(np.int8)
    return decided, clicks_first + clicks_second, int(tie.sum())


def _run_repetition(
    cfg: TransmissionConfig, seed: np.random.SeedSequence
) -> _RepetitionTally:
    rng = np.random.default_rng(seed)
    bits = _draw_bits(cfg, rng)
    decide = _decide_ook if cfg.encoding is Encoding.OOK else _decide_pm
    decided, clicks, ties = decide(cfg, bits, rng)
    counts = np.zeros((2, 2), dtype=np.int64)
    np.add.at(counts, (bits, decided), 1)
    return _RepetitionTally(
        errors=int(np.count_nonzero(decided != bits)),
        counts=counts,
        clicks=int(clicks.sum()),
        clicks_bit_one=int(clicks[bits == 1].sum()),
        ties=ties,
    )


def _empirical_channel(counts: np.ndarray) -> BinaryChannel:
    rows = []
    for x in (0, 1):
        sent = counts[x].sum()
        # an input that was never sent gets an uninformative row
        rows.append(counts[x, 0] / sent if sent else 0.5)
    return BinaryChannel.from_correct(*rows)


class TransmissionService:
    """
    High-level service for simulated transmissions.

    Draws bits, detector clicks and decisions with numpy generators seeded
    from a master seed, and compares them with the analytic channels.
    """

    def __init__(self, settings: Settings | None = None):
        """
        Initialize transmission service.

        Args:
            settings: Runtime settings; the process-wide settings if omitted
        """
        self.settings = settings or get_settings()
        logger.info("Initialized transmission service")

    def run_transmission(self, cfg: TransmissionConfig) -> TransmissionReport:
        """
        Simulate ``cfg.repetitions`` independent runs of ``cfg.n_pulses`` pulses.

        Each repetition gets its own stream spawned from ``cfg.seed``, so the
        report is identical for identical configs whatever the thread timing.

        Args:
            cfg: Transmission configuration

        Returns:
            Validated TransmissionReport
        """
        logger.info(
            f"Running {cfg.repetitions} x {cfg.n_pulses} {cfg.encoding} pulses "
            f"(seed={cfg.seed}, counting={cfg.detector.counting})"
        )
        streams = np.random.SeedSequence(cfg.seed).spawn(cfg.repetitions)
        workers = min(self.settings.workers, cfg.repetitions)
        with ThreadPoolExecutor(max_workers=workers) as executor:
            tallies = list(executor.map(lambda s: _run_repetition(cfg, s), streams))

        per_repetition = [t.errors / cfg.n_pulses for t in tallies]
        counts = sum(t.counts for t in tallies)
        pulses = cfg.n_pulses * cfg.repetitions
        ones_sent = int(counts[1].sum())
        clicks_bit_one = sum(t.clicks_bit_one for t in tallies)
        spread = np.std(per_repetition, ddof=1) if len(tallies) > 1 else 0.0
        report = TransmissionReport(
            qber_mean=float(np.mean(per_repetition)),
            qber_stddev=float(spread),
            mean_clicks_per_pulse=sum(t.clicks for t in tallies) / pulses,
            mean_clicks_bit_one=clicks_bit_one / ones_sent if ones_sent else None,
            tie_fraction=sum(t.ties for t in tallies) / pulses,
            confusion=_empirical_channel(counts),
            per_repetition=per_repetition,
            n_pulses=cfg.n_pulses,
        )
        logger.info(
            f"Transmission complete: qber={report.qber_mean:.6f} "
            f"+/- {report.qber_stddev:.6f}"
        )
        return report

    def qber_curve(
        self,
        encoding: Encoding,
        eta_alpha2_values: Sequence[float],
        env: LinkEnvironment,
        thresholds: Sequence[int] = (1,),
        thetas: Sequence[float] = (math.pi / 2,),
        gammas: Sequence[float] = (),
        monte_carlo: bool = False,
        seed: int = 0,
        n_pulses: int = 100_000,
        repetitions: int = 10,
        detector: DetectorModel = DEFAULT_DETECTOR,
    ) -> list[CurvePoint]:
        """
        QBER against received photon number for Bob's receivers and for Eve.

        Bob gets one series per threshold ``k`` (OOK) or angle ``theta`` (PM,
        radians); Eve gets one Helstrom series per ``gamma`` (and per angle for
        PM). With ``monte_carlo`` each of Bob's points is also simulated,
        seeded from ``seed`` and the (series, point) indices.

        Args:
            encoding: OOK or PM
            eta_alpha2_values: Received mean photon numbers (x axis)
            env: Link environment; its ``gamma`` is unused
            thresholds: OOK thresholds
            thetas: PM angles in radians
            gammas: Eve fractions for the Helstrom series
            monte_carlo: Also simulate Bob's points
            seed: Master seed of the simulations
            n_pulses: Pulses per repetition
            repetitions: Repetitions per point
            detector: Counting model for the simulations

        Returns:
            CurvePoints ordered by series, then by x
        """
        logger.info(
            f"Computing {encoding} QBER curve over {len(eta_alpha2_values)} points"
        )
        if encoding is Encoding.OOK:
            bob_series = [
                (
                    f"bob-k{k}",
                    lambda mean, k=k: OokParams(mean_photons=mean, threshold_k=k),
                )
                for k in thresholds
            ]
        else:
            bob_series = [
                (
                    f"bob-theta{math.degrees(theta):g}",
                    lambda mean, theta=theta: PmParams(mean_photons=mean, theta=theta),
                )
                for theta in thetas
            ]

        points: list[CurvePoint] = []
        for series_index, (name, make_params) in enumerate(bob_series):
            for x in eta_alpha2_values:
                params = make_params(x / env.eta)
                channel = (
                    ook_channel(params, env)
                    if encoding is Encoding.OOK
                    else pm_channel(params, env)
                )
                points.append(
                    CurvePoint(
                        series=name,
                        eta_alpha2=x,
                        qber=error_probability(channel, params.q0),
                    )
                )
            if monte_carlo:
                for point_index, x in enumerate(eta_alpha2_values):
                    stream = np.random.SeedSequence(
                        seed, spawn_key=(series_index, point_index)
                    )
                    cfg = TransmissionConfig(
                        encoding=encoding,
                        params=make_params(x / env.eta),
                        env=env,
                        detector=detector,
                        n_pulses=n_pulses,
                        repetitions=repetitions,
                        seed=int(stream.generate_state(1, np.uint64)[0]),
                    )
                    report = self.run_transmission(cfg)
                    points.append(
                        CurvePoint(
                            series=f"{name}-mc",
                            eta_alpha2=x,
                            qber=report.qber_mean,
                            qber_stddev=report.qber_stddev,
                        )
                    )

        include_eta = env.eve_includes_receiver_efficiency
        for gamma in gammas:
            if encoding is Encoding.OOK:
                points.extend(
                    CurvePoint(
                        series=f"eve-gamma{gamma:g}",
                        eta_alpha2=x,
                        qber=eve_error_ook(gamma, env.eta, x / env.eta, include_eta),
                    )
                    for x in eta_alpha2_values
                )
                continue
            for theta in thetas:
                points.extend(
                    CurvePoint(
                        series=f"eve-gamma{gamma:g}-theta{math.degrees(theta):g}",
                        eta_alpha2=x,
                        qber=eve_error_pm(
                            gamma, env.eta, x / env.eta, theta, include_eta=include_eta
                        ),
                    )
                    for x in eta_alpha2_values
                )
        logger.info(f"QBER curve complete: {len(points)} points")
        return points
