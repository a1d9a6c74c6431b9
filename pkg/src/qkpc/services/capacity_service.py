"""Service for private-capacity evaluation, optimization and sweeps."""

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat

import numpy as np
from pydantic import ValidationError
from scipy.optimize import minimize_scalar

from qkpc.config import Settings, get_settings
from qkpc.exceptions import InfeasibleError, QkpcError, UsageError
from qkpc.models.capacity import (
    CapacityResult,
    Constraints,
    Scheme,
    SweepCell,
    SweepGrid,
)
from qkpc.models.channel import LinkEnvironment, OokParams, PmParams, TieRule
from qkpc.physics.channels import eve_error, ook_channel, pm_channel
from qkpc.physics.information import (
    eve_usd_info,
    mutual_info_bob,
    mutual_info_eve,
    usd_bob_info,
)

logger = logging.getLogger(__name__)

MEAN_GRID_POINTS = 60
THETA_GRID_POINTS = 45
KAPPA_CANDIDATES = (0.0, 1.0)
REFINEMENT_PASSES = 2
REFINEMENT_XATOL = 1e-7
Q0_BOUNDS = (0.01, 0.99)
DROP_THRESHOLD = 1e-3

# below any achievable I_B - I_E
_PENALTY = -10.0

_ACCEPTED_PARAMS: dict[Scheme, tuple[type, ...]] = {
    Scheme.OOK_THRESHOLD1: (OokParams,),
    Scheme.OOK_PNR: (OokParams,),
    Scheme.PM: (OokParams, PmParams),
    Scheme.PM_CONSTRAINED: (OokParams, PmParams),
    Scheme.USD_PM: (PmParams,),
}

State = dict[str, float]


def evaluate_informations(
    params: OokParams | PmParams, env: LinkEnvironment, usd: bool = False
) -> tuple[float, float]:
    """
    Return ``(I_B, I_E)`` for one parameter point.

    With ``usd`` set, Bob uses unambiguous discrimination and Eve keeps the
    better of her minimum-error and unambiguous strategies.
    """
    helstrom_info = mutual_info_eve(eve_error(params, env))
    if usd:
        i_bob = usd_bob_info(env.eta, params.mean_photons, params.theta, env.delta)
        usd_info = eve_usd_info(env.eve_efficiency, params.mean_photons, params.theta)
        return i_bob, max(helstrom_info, usd_info)
    if isinstance(params, OokParams):
        channel = ook_channel(params, env)
    else:
        channel = pm_channel(params, env)
    return mutual_info_bob(channel, params.q0), helstrom_info


def build_result(
    scheme: Scheme, params: OokParams | PmParams, env: LinkEnvironment
) -> CapacityResult:
    """Evaluate ``params`` and wrap the floored difference in a result."""
    i_bob, i_eve = evaluate_informations(params, env, usd=scheme is Scheme.USD_PM)
    i_bob = min(max(i_bob, 0.0), 1.0)
    i_eve = min(max(i_eve, 0.0), 1.0)
    return CapacityResult(
        scheme=scheme,
        c_p=max(i_bob - i_eve, 0.0),
        i_bob=i_bob,
        i_eve=i_eve,
        best_params=params,
    )


def _difference(params: OokParams | PmParams, env: LinkEnvironment, usd: bool) -> float:
    try:
        i_bob, i_eve = evaluate_informations(params, env, usd=usd)
    except (QkpcError, ArithmeticError) as exc:
        logger.debug(f"Skipping point {params!r}: {exc}")
        return _PENALTY
    return i_bob - i_eve


def _mean_grid(constraints: Constraints) -> np.ndarray:
    return np.unique(
        np.geomspace(
            constraints.min_mean_photons, constraints.max_mean_photons, MEAN_GRID_POINTS
        )
    )


def _theta_grid(constraints: Constraints) -> np.ndarray:
    return np.unique(
        np.linspace(constraints.min_theta, constraints.max_theta, THETA_GRID_POINTS)
    )


def _step(grid: np.ndarray) -> float:
    return float(grid[1] - grid[0]) if grid.size > 1 else 0.0


def _neighbourhood(
    center: float, step: float, lower: float, upper: float
) -> tuple[float, float]:
    return max(center - step, lower), min(center + step, upper)


def _refine(
    objective: Callable[[State], float],
    state: State,
    value: float,
    brackets: dict[str, tuple[float, float]],
) -> tuple[State, float]:
    """One coordinate-wise pass of bounded Brent searches; keeps only improvements."""
    for name, (lower, upper) in brackets.items():
        if upper - lower <= REFINEMENT_XATOL:
            continue
        frozen = dict(state)

        def negated(x: float, name: str = name, frozen: State = frozen) -> float:
            return -objective(frozen | {name: float(x)})

        found = minimize_scalar(
            negated,
            bounds=(lower, upper),
            method="bounded",
            options={"xatol": REFINEMENT_XATOL},
        )
        if math.isfinite(found.fun) and -found.fun > value:
            state, value = state | {name: float(found.x)}, float(-found.fun)
    return state, value


def _grid_search(
    objective: Callable[[State], float], candidates: Sequence[State]
) -> tuple[State, float]:
    best_state, best_value = candidates[0], _PENALTY
    for state in candidates:
        value = objective(state)
        if value > best_value:
            best_state, best_value = state, value
    if best_value <= _PENALTY:
        raise InfeasibleError("No admissible parameter point inside the constraints")
    return best_state, best_value


def _optimize_ook(
    scheme: Scheme, env: LinkEnvironment, constraints: Constraints
) -> tuple[OokParams, float]:
    k_max = 1 if scheme is Scheme.OOK_THRESHOLD1 else constraints.max_threshold_k
    means = _mean_grid(constraints)
    log_lower, log_upper = math.log(means[0]), math.log(means[-1])
    log_step = math.log(means[1] / means[0]) if means.size > 1 else 0.0

    def to_params(state: State) -> OokParams:
        return OokParams(
            mean_photons=math.exp(state["log_mean"]),
            threshold_k=int(state["k"]),
            q0=state["q0"],
        )

    def objective(state: State) -> float:
        return _difference(to_params(state), env, usd=False)

    candidates = [
        {"log_mean": math.log(mean), "k": float(k), "q0": 0.5}
        for mean in means
        for k in range(1, k_max + 1)
    ]
    state, value = _grid_search(objective, candidates)
    for _ in range(REFINEMENT_PASSES):
        brackets = {
            "log_mean": _neighbourhood(
                state["log_mean"], log_step, log_lower, log_upper
            ),
            "q0": Q0_BOUNDS,
        }
        state, value = _refine(objective, state, value, brackets)
        if k_max > 1:
            state, value = _grid_search(
                objective,
                [state] + [state | {"k": float(k)} for k in range(1, k_max + 1)],
            )
    return to_params(state), value


def _optimize_pm(
    env: LinkEnvironment, constraints: Constraints, usd: bool = False
) -> tuple[PmParams, float]:
    means = _mean_grid(constraints)
    thetas = _theta_grid(constraints)
    log_lower, log_upper = math.log(means[0]), math.log(means[-1])
    log_step = math.log(means[1] / means[0]) if means.size > 1 else 0.0
    theta_step = _step(thetas)
    kappas = (1.0,) if usd else KAPPA_CANDIDATES

    def to_params(state: State) -> PmParams:
        return PmParams(
            mean_photons=math.exp(state["log_mean"]),
            theta=state["theta"],
            kappa=state["kappa"],
            q0=state["q0"],
            tie_rule=TieRule.ALWAYS_ONE,
        )

    def objective(state: State) -> float:
        return _difference(to_params(state), env, usd=usd)

    candidates = [
        {"log_mean": math.log(mean), "theta": float(theta), "kappa": kappa, "q0": 0.5}
        for mean in means
        for theta in thetas
        for kappa in kappas
    ]
    state, value = _grid_search(objective, candidates)
    for _ in range(REFINEMENT_PASSES):
        brackets = {
            "log_mean": _neighbourhood(
                state["log_mean"], log_step, log_lower, log_upper
            ),
            "theta": _neighbourhood(
                state["theta"], theta_step, constraints.min_theta, constraints.max_theta
            ),
        }
        if not usd:
            brackets |= {"kappa": (0.0, 1.0), "q0": Q0_BOUNDS}
        state, value = _refine(objective, state, value, brackets)
    return to_params(state), value


def optimize_scheme(
    scheme: Scheme, env: LinkEnvironment, constraints: Constraints | None = None
) -> CapacityResult:
    """
    Maximize I_B - I_E over the scheme's free parameters.

    Stage one scans a log-spaced |alpha|^2 grid (and k, theta, kappa where
    they apply) at q0 = 1/2; stage two runs bounded Brent searches along each
    continuous coordinate, twice. The PM schemes also try the OOK encoding
    with a PNR receiver, which is the kappa -> 0 end of the PM family.

    Raises:
        InfeasibleError: If no point inside ``constraints`` can be evaluated
    """
    constraints = constraints or Constraints.for_scheme(scheme)
    match scheme:
        case Scheme.OOK_THRESHOLD1 | Scheme.OOK_PNR:
            params, _ = _optimize_ook(scheme, env, constraints)
        case Scheme.PM | Scheme.PM_CONSTRAINED:
            pm_params, pm_value = _optimize_pm(env, constraints)
            ook_params, ook_value = _optimize_ook(Scheme.OOK_PNR, env, constraints)
            params = ook_params if ook_value > pm_value else pm_params
        case Scheme.USD_PM:
            params, _ = _optimize_pm(env, constraints, usd=True)
    return build_result(scheme, params, env)


def evaluate_sweep_cell(
    index: int,
    gamma: float,
    delta: float,
    scheme: Scheme,
    eta: float,
    constraints: Constraints | None,
    eve_includes_receiver_efficiency: bool,
) -> SweepCell:
    try:
        env = LinkEnvironment(
            eta=eta,
            delta=delta,
            gamma=gamma,
            eve_includes_receiver_efficiency=eve_includes_receiver_efficiency,
        )
        result = optimize_scheme(scheme, env, constraints)
    except (QkpcError, ArithmeticError, ValidationError) as exc:
        logger.warning(
            f"Sweep cell {index} (gamma={gamma}, delta={delta}) failed: {exc}"
        )
        return SweepCell(index=index, gamma=gamma, delta=delta, error=str(exc))
    return SweepCell(index=index, gamma=gamma, delta=delta, result=result)


def secure_message_rate(c_p: float, source_frequency: float) -> float:
    """Secure bits per second for ``c_p`` bits/use at ``source_frequency`` Hz."""
    return c_p * source_frequency


def first_drop_delta(
    delta_values: Sequence[float],
    capacities: Sequence[float],
    threshold: float = DROP_THRESHOLD,
) -> float:
    """Smallest noise level whose capacity falls below ``threshold``; inf if none."""
    for delta, c_p in zip(delta_values, capacities, strict=True):
        if c_p < threshold:
            return float(delta)
    return math.inf


class CapacityService:
    """
    High-level service for private-capacity computations.

    Wraps the channel and information kernels and returns validated
    CapacityResult models.
    """

    def __init__(self, settings: Settings | None = None):
        """
        Initialize capacity service.

        Args:
            settings: Runtime settings; the process-wide settings if omitted
        """
        self.settings = settings or get_settings()
        logger.info("Initialized capacity service")

    def environment(
        self, gamma: float, delta: float, eta: float = 1.0
    ) -> LinkEnvironment:
        """Build a link environment honouring the configured Eve efficiency model."""
        return LinkEnvironment(
            eta=eta,
            delta=delta,
            gamma=gamma,
            eve_includes_receiver_efficiency=(
                self.settings.eve_includes_receiver_efficiency
            ),
        )

    def private_capacity_point(
        self, scheme: Scheme, params: OokParams | PmParams, env: LinkEnvironment
    ) -> CapacityResult:
        """
        Evaluate the private capacity at a single parameter point.

        Args:
            scheme: Encoder/decoder family
            params: Parameters of that family
            env: Link environment

        Returns:
            CapacityResult with c_p = max(I_B - I_E, 0)

        Raises:
            UsageError: If ``params`` do not belong to ``scheme``
        """
        if not isinstance(params, _ACCEPTED_PARAMS[scheme]):
            raise UsageError(
                f"Scheme '{scheme}' does not accept {type(params).__name__}"
            )
        if scheme is Scheme.OOK_THRESHOLD1 and params.threshold_k != 1:
            raise UsageError(f"Scheme '{scheme}' requires threshold_k = 1")
        result = build_result(scheme, params, env)
        logger.debug(f"Point capacity for {scheme}: {result.c_p:.6f}")
        return result

    def optimize_private_capacity(
        self,
        scheme: Scheme,
        env: LinkEnvironment,
        constraints: Constraints | None = None,
    ) -> CapacityResult:
        """
        Optimize the private capacity of a scheme.

        Args:
            scheme: Encoder/decoder family
            env: Link environment
            constraints: Parameter bounds; scheme defaults if omitted

        Returns:
            CapacityResult at the best parameters found

        Raises:
            InfeasibleError: If the constraints leave nothing to evaluate
        """
        logger.info(
            f"Optimizing {scheme} at gamma={env.gamma}, delta={env.delta}, "
            f"eta={env.eta}"
        )
        result = optimize_scheme(scheme, env, constraints)
        logger.info(f"Optimized {scheme}: c_p={result.c_p:.6f}")
        return result

    def usd_private_capacity(
        self, env: LinkEnvironment, constraints: Constraints | None = None
    ) -> CapacityResult:
        """Optimize the PM encoding read out by unambiguous discrimination."""
        return self.optimize_private_capacity(Scheme.USD_PM, env, constraints)

    def capacity_sweep(
        self, grid: SweepGrid, workers: int | None = None
    ) -> list[SweepCell]:
        """
        Optimize every (gamma, delta) cell of a grid.

        Cells run in a process pool when more than one worker is requested;
        results are always returned in cell-index order (gamma outer). A cell
        whose optimization fails is returned with ``error`` set.

        Args:
            grid: Sweep definition
            workers: Process count; ``Settings.workers`` if omitted

        Returns:
            One SweepCell per grid cell
        """
        workers = workers or self.settings.workers
        cells = grid.cells()
        logger.info(
            f"Sweeping {grid.scheme} over {len(cells)} cells with {workers} worker(s)"
        )
        arguments = (
            range(len(cells)),
            [gamma for gamma, _ in cells],
            [delta for _, delta in cells],
            repeat(grid.scheme),
            repeat(grid.eta),
            repeat(grid.constraints),
            repeat(self.settings.eve_includes_receiver_efficiency),
        )
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(evaluate_sweep_cell, *arguments))
        else:
            results = list(map(evaluate_sweep_cell, *arguments))

        failed = sum(cell.failed for cell in results)
        if failed:
            logger.warning(f"{failed} of {len(results)} sweep cells failed")
        logger.info(f"Sweep of {grid.scheme} complete")
        return results
