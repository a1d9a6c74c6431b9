"""Command-line interface: every analysis as a scriptable, reproducible command."""

import argparse
import logging
import math
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from dotenv import dotenv_values
from pydantic import ValidationError

from qkpc import __version__
from qkpc.config import Settings, configure_logging, get_settings
from qkpc.exceptions import ConsistencyError, InfeasibleError, QkpcError, UsageError
from qkpc.models.capacity import Constraints, Scheme, SweepGrid
from qkpc.models.channel import LinkEnvironment, OokParams, PmParams, TieRule
from qkpc.models.detector import DETECTOR_PRESETS, CountingMode, DetectorModel
from qkpc.models.manifest import RunManifest
from qkpc.models.protocol import Encoding, TransmissionConfig
from qkpc.models.sky import DAYLIGHT_EXPERIMENTS, SKY_CONDITIONS
from qkpc.output import OutputFormat, write_table
from qkpc.physics.channels import ook_channel, pm_channel
from qkpc.physics.detector import (
    binomial_poisson_distance,
    expected_lost_photons,
    expected_lost_photons_truncated,
    simulate_lost_photons,
)
from qkpc.physics.sky import (
    noise_per_pulse,
    photons_per_pulse,
    reference_aperture,
    reference_scene,
)
from qkpc.services.capacity_service import (
    CapacityService,
    first_drop_delta,
    secure_message_rate,
)
from qkpc.services.protocol_service import TransmissionService, error_probability

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

CONSTRAINT_KEYS: dict[str, Callable[[str], float | int]] = {
    "min_mean_photons": float,
    "max_mean_photons": float,
    "min_theta_deg": float,
    "max_theta_deg": float,
    "max_threshold_k": int,
}

Records = list[dict[str, Any]]

RESULT_COLUMNS = ("c_p", "i_bob", "i_eve", "alpha2", "k", "theta_deg", "kappa", "q0")


def parse_range(text: str, default_count: int = 50, log: bool = False) -> list[float]:
    """
    Parse ``start:stop[:count]`` into evenly spaced values.

    ``start == stop`` gives a single point whatever the count.

    Raises:
        UsageError: If the text is malformed
    """
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"Range must be start:stop[:count], got '{text}'")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2]) if len(parts) == 3 else default_count
    except ValueError as exc:
        raise UsageError(f"Invalid range '{text}': {exc}") from exc
    if count < 1:
        raise UsageError(f"Range count must be positive, got {count}")
    if start == stop:
        return [start]
    if log:
        if start <= 0 or stop <= 0:
            raise UsageError(f"Log-spaced range needs positive bounds, got '{text}'")
        return np.geomspace(start, stop, count).tolist()
    return np.linspace(start, stop, count).tolist()


def positive_int(text: str) -> int:
    """argparse type for strictly positive integers."""
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def parse_list(text: str, cast: Callable[[str], Any] = float) -> list[Any]:
    """Parse a comma-separated list."""
    try:
        return [cast(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise UsageError(f"Invalid list '{text}': {exc}") from exc


def load_constraints(path: Path | None, scheme: Scheme) -> Constraints:
    """
    Scheme defaults overridden by a flat ``key=value`` constraints file.

    Angles in the file are in degrees.
    """
    if path is None:
        return Constraints.for_scheme(scheme)
    if not path.is_file():
        raise UsageError(f"Constraints file not found: {path}")
    values = dotenv_values(path)
    unknown = sorted(set(values) - set(CONSTRAINT_KEYS))
    if unknown:
        raise UsageError(f"Unknown constraint keys: {', '.join(unknown)}")
    overrides: dict[str, float | int] = {}
    for key, raw in values.items():
        try:
            value = CONSTRAINT_KEYS[key](raw or "")
        except ValueError as exc:
            raise UsageError(f"Invalid value for {key}: '{raw}'") from exc
        if key.endswith("_deg"):
            overrides[key.removesuffix("_deg")] = math.radians(value)
        else:
            overrides[key] = value
    logger.debug(f"Constraint overrides from {path}: {overrides}")
    return Constraints.for_scheme(scheme, **overrides)


def _detector(args: argparse.Namespace) -> DetectorModel:
    return DETECTOR_PRESETS[args.detector].model_copy(
        update={"counting": CountingMode(args.counting)}
    )


def _noise(args: argparse.Namespace) -> float:
    background = getattr(args, "background_photons", None)
    if background is None:
        return args.delta
    delta = _detector(args).noise_clicks_per_pulse(background)
    logger.info(
        f"Delta from {background:g} background photons plus dark counts: {delta:.6g}"
    )
    return delta


def _environment(args: argparse.Namespace, settings: Settings) -> LinkEnvironment:
    return LinkEnvironment(
        eta=args.eta,
        delta=_noise(args),
        gamma=args.gamma,
        eve_includes_receiver_efficiency=settings.eve_includes_receiver_efficiency,
    )


def cmd_qber_curve(args: argparse.Namespace, settings: Settings) -> Records:
    encoding = Encoding(args.scheme)
    if encoding is Encoding.OOK and args.theta_list is not None:
        raise UsageError("--theta-list applies to the pm scheme only")
    if encoding is Encoding.PM and args.k_list is not None:
        raise UsageError("--k-list applies to the ook scheme only")
    env = _environment(args, settings)
    points = TransmissionService(settings).qber_curve(
        encoding,
        parse_range(args.alpha2_range, default_count=100),
        env,
        thresholds=parse_list(args.k_list or "1", int),
        thetas=[math.radians(t) for t in parse_list(args.theta_list or "90")],
        gammas=parse_list(args.gamma_list or ""),
        monte_carlo=args.monte_carlo,
        seed=args.seed,
        n_pulses=args.pulses,
        repetitions=args.repetitions,
        detector=_detector(args),
    )
    return [
        {
            "series": point.series,
            "eta_alpha2": point.eta_alpha2,
            "qber": point.qber,
            "qber_stddev": point.qber_stddev,
        }
        for point in points
    ]


def cmd_capacity(args: argparse.Namespace, settings: Settings) -> Records:
    scheme = Scheme(args.scheme)
    constraints = load_constraints(args.constraints, scheme)
    result = CapacityService(settings).optimize_private_capacity(
        scheme, _environment(args, settings), constraints
    )
    record: dict[str, Any] = result.record(args.gamma, args.delta)
    if args.source_frequency is not None:
        record["secure_rate_bps"] = secure_message_rate(
            result.c_p, args.source_frequency
        )
    return [record]


def cmd_heatmap(args: argparse.Namespace, settings: Settings) -> Records:
    schemes = [Scheme(s) for s in (args.scheme or [Scheme.OOK_PNR.value])]
    if args.gamma_list is not None:
        gammas = parse_list(args.gamma_list)
    else:
        gammas = parse_range(args.gamma_range, default_count=10)
    deltas = parse_range(
        args.delta_range, default_count=9, log=args.delta_scale == "log"
    )
    service = CapacityService(settings)

    records: Records = []
    failed = 0
    for scheme in schemes:
        grid = SweepGrid(
            delta_values=deltas,
            gamma_values=gammas,
            scheme=scheme,
            eta=args.eta,
            constraints=load_constraints(args.constraints, scheme),
        )
        cells = service.capacity_sweep(grid, workers=args.workers)
        for cell in cells:
            if cell.failed:
                failed += 1
                records.append(
                    {"gamma": cell.gamma, "delta": cell.delta, "scheme": scheme.value}
                    | dict.fromkeys(RESULT_COLUMNS)
                    | {"error": cell.error}
                )
                continue
            records.append(cell.result.record(cell.gamma, cell.delta) | {"error": None})
        for gamma in gammas:
            row = [c for c in cells if c.gamma == gamma]
            drop = first_drop_delta(
                [c.delta for c in row], [c.result.c_p if c.result else 0.0 for c in row]
            )
            logger.info(
                f"{scheme} at gamma={gamma}: capacity first below 1e-3 at delta={drop}"
            )
    if failed:
        logger.warning(f"{failed} sweep cell(s) failed; see the error column")
    return records


def cmd_usd(args: argparse.Namespace, settings: Settings) -> Records:
    service = CapacityService(settings)
    base = load_constraints(args.constraints, Scheme.USD_PM)
    xs: list[float | None] = [None]
    if args.alpha2_range:
        xs = parse_range(args.alpha2_range, default_count=20)

    records: Records = []
    for x in xs:
        for scheme in (Scheme.USD_PM, Scheme.PM):
            env = _environment(args, settings)
            if x == 0.0:
                result = service.private_capacity_point(
                    scheme, PmParams(mean_photons=0.0, theta=base.max_theta), env
                )
            else:
                constraints = base
                if x is not None:
                    mean = x / args.eta
                    constraints = Constraints(
                        **base.model_dump()
                        | {"min_mean_photons": mean, "max_mean_photons": mean}
                    )
                result = service.optimize_private_capacity(scheme, env, constraints)
            record = result.record(args.gamma, args.delta)
            record["eta_alpha2"] = args.eta * record["alpha2"]
            records.append(record)
    return records


def cmd_detector_loss(args: argparse.Namespace, settings: Settings) -> Records:
    n = args.n or DETECTOR_PRESETS[args.detector].intervals_n
    rng = np.random.default_rng(args.seed)
    records: Records = []
    for mean in parse_range(args.alpha2_range, default_count=51):
        record: dict[str, Any] = {
            "alpha2": mean,
            "n": n,
            "lost_photons": expected_lost_photons(mean, n),
            "lost_photons_truncated": expected_lost_photons_truncated(mean, n),
            "tv_poisson": binomial_poisson_distance(mean, n),
            "tv_matched_poisson": binomial_poisson_distance(mean, n, matched_mean=True),
        }
        if args.monte_carlo:
            record["lost_photons_mc"] = simulate_lost_photons(rng, mean, n, args.trials)
        records.append(record)
    return records


def cmd_background(args: argparse.Namespace, settings: Settings) -> Records:
    if args.preset == "table1":
        aperture = reference_aperture()
        logger.info(f"Table aperture inferred from the cloudy row: {aperture:.6g} m^2")
        return [
            {
                "condition": condition.name,
                "relative_brightness": condition.relative_brightness,
                "brightness": condition.brightness,
                "aperture_area": aperture,
                "photons_per_pulse": photons_per_pulse(
                    reference_scene(condition, aperture)
                ),
                "tabulated": condition.expected_photons,
            }
            for condition in SKY_CONDITIONS
        ]

    service = CapacityService(settings) if args.with_capacity else None
    records: Records = []
    for experiment in DAYLIGHT_EXPERIMENTS:
        delta = noise_per_pulse(experiment.noise_rate, experiment.source_frequency)
        record: dict[str, Any] = {
            "experiment": experiment.name,
            "source_frequency": experiment.source_frequency,
            "noise_rate": experiment.noise_rate,
            "delta": delta,
        }
        if service is not None:
            scheme = Scheme(args.scheme)
            result = service.optimize_private_capacity(
                scheme,
                service.environment(args.gamma, delta, eta=args.eta),
                load_constraints(args.constraints, scheme),
            )
            record["c_p"] = result.c_p
            record["secure_rate_bps"] = secure_message_rate(
                result.c_p, experiment.source_frequency
            )
        records.append(record)
    return records


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> Records:
    encoding = Encoding(args.scheme)
    if encoding is Encoding.OOK:
        params: OokParams | PmParams = OokParams(
            mean_photons=args.alpha2, threshold_k=args.k, q0=args.q0
        )
    else:
        params = PmParams(
            mean_photons=args.alpha2,
            theta=math.radians(args.theta),
            kappa=args.kappa,
            q0=args.q0,
            tie_rule=TieRule(args.tie_rule),
        )
    env = _environment(args, settings)
    cfg = TransmissionConfig(
        encoding=encoding,
        params=params,
        env=env,
        detector=_detector(args),
        n_pulses=args.pulses,
        repetitions=args.repetitions,
        seed=args.seed,
        message=args.message,
    )
    report = TransmissionService(settings).run_transmission(cfg)
    if encoding is Encoding.OOK:
        channel = ook_channel(params, env)
    else:
        channel = pm_channel(params, env)
    analytic = error_probability(channel, params.q0)
    return [
        report.record()
        | {
            "delta": env.delta,
            "counting": cfg.detector.counting.value,
            "analytic_qber": analytic,
            "analytic_gap": report.qber_mean - analytic,
        }
    ]


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out", type=Path, default=None, help="Output file (stdout if omitted)"
    )
    parser.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.CSV.value,
    )


def _add_link_flags(parser: argparse.ArgumentParser, delta: float = 0.0) -> None:
    parser.add_argument("--gamma", type=float, default=0.1, help="Eve's flux fraction")
    parser.add_argument(
        "--delta", type=float, default=delta, help="Noise clicks per pulse"
    )
    parser.add_argument(
        "--eta", type=float, default=1.0, help="Bob's end-to-end efficiency"
    )


def _add_detector_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--detector", choices=sorted(DETECTOR_PRESETS), default="default"
    )
    parser.add_argument(
        "--counting",
        choices=[m.value for m in CountingMode],
        default=CountingMode.DEAD_TIME.value,
    )
    parser.add_argument(
        "--background-photons",
        type=float,
        default=None,
        help="Background photons per pulse at the detector; replaces --delta with "
        "the detected background plus the detector's dark counts",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkpc",
        description="Private capacity of keyless quantum private communication",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument("--log-level", default=None, help="Overrides QKPC_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)
    schemes = [s.value for s in Scheme]
    encodings = [e.value for e in Encoding]

    p = sub.add_parser("qber-curve", help="QBER against received photon number")
    p.add_argument("--scheme", choices=encodings, default=Encoding.OOK.value)
    _add_link_flags(p, delta=0.03)
    p.add_argument(
        "--alpha2-range", default="0.1:20:100", help="eta|alpha|^2 start:stop[:count]"
    )
    p.add_argument("--k-list", default=None, help="OOK thresholds, e.g. 1,2,3")
    p.add_argument("--theta-list", default=None, help="PM angles in degrees")
    p.add_argument("--gamma-list", default=None, help="Eve curves, e.g. 0.1,1")
    p.add_argument("--monte-carlo", action="store_true")
    p.add_argument("--pulses", type=positive_int, default=100_000)
    p.add_argument("--repetitions", type=positive_int, default=10)
    p.add_argument("--seed", type=int, default=0)
    _add_detector_flags(p)
    _add_output_flags(p)
    p.set_defaults(handler=cmd_qber_curve)

    p = sub.add_parser("capacity", help="Optimized private capacity at (gamma, delta)")
    p.add_argument("--scheme", choices=schemes, default=Scheme.OOK_PNR.value)
    _add_link_flags(p)
    p.add_argument(
        "--constraints", type=Path, default=None, help="key=value bounds file"
    )
    p.add_argument(
        "--source-frequency", type=float, default=None, help="Pulse rate in Hz"
    )
    _add_output_flags(p)
    p.set_defaults(handler=cmd_capacity)

    p = sub.add_parser("heatmap", help="Capacity over a (gamma, delta) grid")
    p.add_argument("--scheme", choices=schemes, action="append", help="Repeatable")
    p.add_argument("--gamma-range", default="0.1:1:10")
    p.add_argument("--gamma-list", default=None, help="Overrides --gamma-range")
    p.add_argument("--delta-range", default="1e-6:100:9")
    p.add_argument("--delta-scale", choices=["log", "linear"], default="log")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--constraints", type=Path, default=None)
    p.add_argument("--workers", type=positive_int, default=None)
    _add_output_flags(p)
    p.set_defaults(handler=cmd_heatmap)

    p = sub.add_parser("usd", help="Unambiguous discrimination against minimum error")
    _add_link_flags(p)
    p.add_argument("--alpha2-range", default=None, help="Fixed eta|alpha|^2 points")
    p.add_argument("--constraints", type=Path, default=None)
    _add_output_flags(p)
    p.set_defaults(handler=cmd_usd)

    p = sub.add_parser("detector-loss", help="Photons lost to time multiplexing")
    p.add_argument(
        "--n", type=positive_int, default=None, help="Dead-time intervals per pulse"
    )
    p.add_argument("--detector", choices=sorted(DETECTOR_PRESETS), default="default")
    p.add_argument("--alpha2-range", default="0:50:51")
    p.add_argument("--monte-carlo", action="store_true")
    p.add_argument("--trials", type=positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_output_flags(p)
    p.set_defaults(handler=cmd_detector_loss)

    p = sub.add_parser("background", help="Sky background and daylight experiments")
    p.add_argument("--preset", choices=["table1", "table2"], required=True)
    p.add_argument(
        "--with-capacity", action="store_true", help="table2: add c_p and rate"
    )
    p.add_argument("--scheme", choices=schemes, default=Scheme.OOK_PNR.value)
    _add_link_flags(p)
    p.add_argument("--constraints", type=Path, default=None)
    _add_output_flags(p)
    p.set_defaults(handler=cmd_background)

    p = sub.add_parser("simulate", help="Monte Carlo transmission")
    p.add_argument("--scheme", choices=encodings, default=Encoding.OOK.value)
    p.add_argument(
        "--alpha2", type=float, required=True, help="|alpha|^2 at the source"
    )
    p.add_argument("--k", type=positive_int, default=1)
    p.add_argument("--theta", type=float, default=90.0, help="Degrees")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--q0", type=float, default=0.5)
    p.add_argument(
        "--tie-rule",
        choices=[t.value for t in TieRule],
        default=TieRule.ALWAYS_ONE.value,
    )
    _add_link_flags(p, delta=0.03)
    p.add_argument("--pulses", type=positive_int, default=500_000)
    p.add_argument("--repetitions", type=positive_int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--message", default=None, help="Send this text instead of random bits"
    )
    _add_detector_flags(p)
    _add_output_flags(p)
    p.set_defaults(handler=cmd_simulate)
    return parser


def _manifest(args: argparse.Namespace) -> RunManifest:
    parameters = {
        key: str(value) if isinstance(value, Path) else value
        for key, value in vars(args).items()
        if key not in ("handler", "command", "log_level")
    }
    return RunManifest(
        command=args.command, parameters=parameters, seed=getattr(args, "seed", None)
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    configure_logging(args.log_level)
    settings = get_settings()
    if getattr(args, "workers", None):
        settings = settings.model_copy(update={"workers": args.workers})

    try:
        records = args.handler(args, settings)
        out = settings.resolve_output(args.out) if args.out else None
        write_table(records, OutputFormat(args.format), _manifest(args), out)
    except (UsageError, ValidationError) as exc:
        print(f"qkpc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConsistencyError, InfeasibleError) as exc:
        print(f"qkpc {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QkpcError as exc:
        # domain errors come from user-supplied values
        print(f"qkpc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ValueError) else EXIT_NUMERICAL
    return EXIT_OK
