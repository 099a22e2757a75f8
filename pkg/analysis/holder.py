"""
Both directions of the Hoelder characterisation.

Moment side: the slope of log E(X_t - X_s)^2 against log |t - s|.
Path side: the slope of the dyadic-scale oscillation of single paths, the
Sobolev-embedding constant C_eps(omega) and its exponential moment.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from config import config
from errors import DomainError
from models.base_model import ModelSpec, SampleField
from models.model_manager import get_model_manager
from montecarlo import map_paths
from .fields import box_increment
from .grr import LIMSUP_MIN_POINTS, beta_window, sobolev_bound

logger = logging.getLogger(__name__)

DEFAULT_EPSILONS = (0.05, 0.1, 0.2)
DEFAULT_SCALES = tuple(range(3, 11))
MIN_SCALING_LAGS = 5
MIN_SCALING_PATHS = 1000
ANCHOR_SCALE = 3


@dataclass
class ScalingFit:
    """Least-squares fit of log second moment against log lag."""
    lags: List[float]
    log_lags: List[float]
    log_second_moments: List[float]
    slope: float
    slope_stderr: float
    intercept: float
    r_value: float

    @property
    def alpha_hat(self) -> float:
        return self.slope / 2.0

    def to_rows(self) -> List[Dict[str, float]]:
        return [{"lag": lag, "log_lag": x, "log_second_moment": y}
                for lag, x, y in zip(self.lags, self.log_lags, self.log_second_moments)]


@dataclass
class OscillationRow:
    scale: int
    delta: float
    oscillation: float
    n_pairs: int


@dataclass
class ExpMomentReport:
    """Stability verdict for E exp(beta C^(1/iota))."""
    estimate: float
    half_estimate: float
    trimmed_estimate: float
    n_samples: int
    stable: bool
    verdict: str

    def to_record(self) -> Dict[str, float]:
        return {"estimate": self.estimate, "half_estimate": self.half_estimate,
                "trimmed_estimate": self.trimmed_estimate, "n_samples": self.n_samples,
                "stable": self.stable, "verdict": self.verdict}


@dataclass
class DirectionResult:
    alpha_hat: float
    passed: bool
    details: Dict[str, float] = field(default_factory=dict)


@dataclass
class IffReport:
    """Moment and path directions for one model and claimed alpha."""
    alpha: float
    moment: DirectionResult
    path: DirectionResult
    scaling: ScalingFit
    exp_moment: Optional[ExpMomentReport]
    sobolev_violations: Dict[float, int]
    agreement: float

    @property
    def consistent(self) -> bool:
        return self.moment.passed == self.path.passed

    @property
    def passed(self) -> bool:
        return (self.moment.passed and self.path.passed
                and self.agreement <= config.holder_agreement_tolerance)

    def to_record(self) -> Dict[str, float]:
        record = {
            "alpha": self.alpha,
            "alpha_moment": self.moment.alpha_hat,
            "alpha_path": self.path.alpha_hat,
            "moment_pass": self.moment.passed,
            "path_pass": self.path.passed,
            "agreement": self.agreement,
            "consistent": self.consistent,
            "passed": self.passed,
        }
        for epsilon, violations in self.sobolev_violations.items():
            record[f"sobolev_violations_eps_{epsilon:g}"] = violations
        if self.exp_moment is not None:
            record["exp_moment_verdict"] = self.exp_moment.verdict
        return record


@dataclass
class FieldScalingReport:
    """Per-axis and diagonal exponent fits of the field metric d_X."""
    axis_fits: List[ScalingFit]
    diagonal_fit: ScalingFit

    @property
    def alpha_hats(self) -> Tuple[float, ...]:
        return tuple(fit.alpha_hat for fit in self.axis_fits)


def _is_dyadic(lag: float) -> bool:
    exponent = np.log2(lag)
    return bool(abs(exponent - round(exponent)) < 1e-9)


def fit_scaling(lags: Sequence[float], second_moments: Sequence[float]) -> ScalingFit:
    """
    Regress log second moment on log lag (scipy linregress).

    Raises:
        DomainError: for fewer than 5 lags, non-dyadic lags or a vanishing second moment
    """
    lags = [float(lag) for lag in lags]
    moments = np.asarray(second_moments, dtype=float)
    if len(lags) < MIN_SCALING_LAGS:
        raise DomainError(f"need at least {MIN_SCALING_LAGS} lags, got {len(lags)}")
    if len(lags) != moments.size:
        raise DomainError(f"{moments.size} second moments for {len(lags)} lags")
    if any(lag <= 0 or lag > 1 or not _is_dyadic(lag) for lag in lags):
        raise DomainError(f"lags must be dyadic in (0, 1], got {lags}")
    if np.any(~np.isfinite(moments)) or np.any(moments <= 0):
        raise DomainError("degenerate model: second moments must be positive")
    log_lags = np.log(lags)
    log_moments = np.log(moments)
    result = stats.linregress(log_lags, log_moments)
    return ScalingFit(lags=lags, log_lags=log_lags.tolist(), log_second_moments=log_moments.tolist(),
                      slope=float(result.slope), slope_stderr=float(result.stderr),
                      intercept=float(result.intercept), r_value=float(result.rvalue))


def _lag_steps(lags: Sequence[float], n_points: int) -> List[int]:
    steps = []
    for lag in lags:
        count = lag * (n_points - 1)
        if abs(count - round(count)) > 1e-9 or round(count) < 1:
            raise DomainError(f"lag {lag} is not a multiple of the grid step 1/{n_points - 1}")
        steps.append(int(round(count)))
    return steps


def variance_scaling(spec: ModelSpec, lags: Optional[Sequence[float]] = None, n_paths: int = 1000,
                     grid: int = 1025, seed: Optional[int] = None, workers: Optional[int] = None) -> ScalingFit:
    """
    Slope of log E(Delta X)^2 against log lag; alpha_hat = slope / 2.

    Squared increments are averaged over all positions of each path and then
    over paths.
    """
    if n_paths < MIN_SCALING_PATHS:
        raise DomainError(f"variance_scaling needs at least {MIN_SCALING_PATHS} paths, got {n_paths}")
    if not lags:
        finest = min(DEFAULT_SCALES[-1], int(np.floor(np.log2(grid - 1))))
        lags = [2.0 ** (-k) for k in range(DEFAULT_SCALES[0], finest + 1)]
    lags = list(lags)
    steps = _lag_steps(lags, grid)
    model = get_model_manager().create_model(spec)

    def one_path(index: int, path_seed: int) -> np.ndarray:
        values = model.sample(grid, path_seed).values
        return np.array([np.mean((values[s:] - values[:-s]) ** 2) for s in steps])

    units = np.stack(map_paths(one_path, n_paths, spec.seed if seed is None else int(seed),
                               workers=workers, desc=f"scaling {spec.kind}"))
    return fit_scaling(lags, units.mean(axis=0))


def oscillation_profile(path, scales: Optional[Sequence[int]] = None,
                        anchored: bool = True) -> List[OscillationRow]:
    """
    max |X_{s + 2^-k} - X_s| per dyadic scale k.

    Anchored: s runs over the lattice {j / 8}, the same pairs count at every
    scale. Otherwise every grid pair at separation 2^-k is used.
    """
    intervals = path.n_points - 1
    max_scale = int(np.floor(np.log2(intervals)))
    scales = list(scales) if scales else list(range(ANCHOR_SCALE, max_scale + 1))
    anchor_step = intervals // 2 ** ANCHOR_SCALE
    values = path.values
    rows = []
    for k in scales:
        if intervals % 2 ** k:
            raise DomainError(f"scale 2^-{k} is not a multiple of the grid step 1/{intervals}")
        lag = intervals // 2 ** k
        if anchored:
            if intervals % 2 ** ANCHOR_SCALE or k < ANCHOR_SCALE:
                raise DomainError(f"anchored oscillations need scales >= {ANCHOR_SCALE} on a dyadic grid")
            starts = np.arange(0, intervals, anchor_step)
            starts = starts[starts + lag <= intervals]
            increments = np.abs(values[starts + lag] - values[starts])
        else:
            increments = np.abs(values[lag:] - values[:-lag])
        rows.append(OscillationRow(scale=k, delta=2.0 ** (-k), oscillation=float(increments.max()),
                                   n_pairs=int(increments.size)))
    return rows


def pathwise_exponent(path, anchored: bool = True) -> float:
    """
    Slope of log oscillation against log 2^-k; +inf for a constant path.
    """
    if path.n_points < LIMSUP_MIN_POINTS:
        logger.warning(f"pathwise_exponent on {path.n_points} points; at least {LIMSUP_MIN_POINTS} "
                       f"are recommended")
    rows = oscillation_profile(path, anchored=anchored)
    positive = [row for row in rows if row.oscillation > 0]
    if len(positive) < 2:
        return float("inf")
    result = stats.linregress(np.log([row.delta for row in positive]),
                              np.log([row.oscillation for row in positive]))
    return float(result.slope)


def exp_moment_check(C_eps_samples: Sequence[float], beta: float, iota: float) -> ExpMomentReport:
    """
    Empirical E exp(beta C^(1/iota)) with a stability verdict.

    Stable iff the estimate from the first half of the samples is within 10%
    of the full estimate and dropping the top 1% moves it by less than 25%.
    An overflowing exponent gives the verdict "beta too large".
    """
    samples = np.asarray(C_eps_samples, dtype=float)
    if samples.size < config.exp_moment_min_samples:
        raise DomainError(f"need at least {config.exp_moment_min_samples} samples, got {samples.size}")
    if np.any(samples < 0) or np.any(~np.isfinite(samples)):
        raise DomainError("C_eps samples must be finite and non-negative")
    if beta <= 0 or iota <= 0:
        raise DomainError(f"beta and iota must be positive, got {beta}, {iota}")

    exponents = beta * samples ** (1.0 / iota)
    nan = float("nan")
    if np.max(exponents) > 709.0:
        return ExpMomentReport(estimate=float("inf"), half_estimate=nan, trimmed_estimate=nan,
                               n_samples=int(samples.size), stable=False, verdict="beta too large")

    values = np.exp(exponents)
    estimate = float(np.mean(values))
    half_estimate = float(np.mean(values[: samples.size // 2]))
    keep = int(np.floor(samples.size * (1.0 - config.exp_moment_trim_fraction)))
    trimmed_estimate = float(np.mean(np.sort(values)[:keep]))

    doubling_change = abs(estimate - half_estimate) / estimate
    trim_change = abs(estimate - trimmed_estimate) / estimate
    stable = (doubling_change < config.exp_moment_doubling_tolerance
              and trim_change < config.exp_moment_trim_tolerance)
    return ExpMomentReport(estimate=estimate, half_estimate=half_estimate,
                           trimmed_estimate=trimmed_estimate, n_samples=int(samples.size),
                           stable=bool(stable), verdict="stable" if stable else "unstable")


def iff_report(spec: ModelSpec, alpha: Optional[float] = None,
               epsilons: Sequence[float] = DEFAULT_EPSILONS, n_paths: int = 1000, grid: int = 1025,
               seed: Optional[int] = None, exp_beta: Optional[float] = None,
               workers: Optional[int] = None) -> IffReport:
    """
    Moment direction: variance_scaling. Path direction: median pathwise exponent
    and Sobolev checks for every epsilon < alpha, plus exp_moment_check on the
    C_eps samples of the largest such epsilon.

    A direction passes when its alpha_hat is at least alpha - HOLDER_ALPHA_TOLERANCE;
    the report passes when both do and they agree within HOLDER_AGREEMENT_TOLERANCE.
    """
    model = get_model_manager().create_model(spec)
    alpha = model.holder_exponents()[0] if alpha is None else float(alpha)
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    valid_epsilons = sorted(float(e) for e in epsilons if 0.0 < e < alpha)
    if len(valid_epsilons) < len(list(epsilons)):
        logger.info(f"Skipping epsilons >= alpha={alpha}: Sobolev needs gamma q > 1")
    master = spec.seed if seed is None else int(seed)
    tolerance = config.holder_alpha_tolerance

    scaling = variance_scaling(spec, n_paths=n_paths, grid=grid, seed=master, workers=workers)
    moment = DirectionResult(alpha_hat=scaling.alpha_hat, passed=scaling.alpha_hat >= alpha - tolerance,
                             details={"slope": scaling.slope, "slope_stderr": scaling.slope_stderr})

    def one_path(index: int, path_seed: int) -> Tuple[float, Dict[float, Tuple[float, int]]]:
        path = model.sample(grid, path_seed)
        sobolev = {}
        for epsilon in valid_epsilons:
            result = sobolev_bound(path, alpha, epsilon)
            sobolev[epsilon] = (result.constant, result.report.violations)
        return pathwise_exponent(path), sobolev

    results = map_paths(one_path, n_paths, master, workers=workers, desc=f"paths {spec.kind}")
    exponents = np.array([r[0] for r in results])
    alpha_path = float(np.median(exponents))
    violations = {e: int(sum(r[1][e][1] for r in results)) for e in valid_epsilons}
    path = DirectionResult(alpha_hat=alpha_path,
                           passed=bool(alpha_path >= alpha - tolerance and not any(violations.values())),
                           details={"n_paths": n_paths})

    exp_moment = None
    if valid_epsilons:
        c0, iota = model.hyper_witness()
        beta = 0.1 * beta_window(c0, iota) if exp_beta is None else float(exp_beta)
        constants = [r[1][valid_epsilons[-1]][0] for r in results]
        if len(constants) >= config.exp_moment_min_samples:
            exp_moment = exp_moment_check(constants, beta, iota)

    agreement = abs(moment.alpha_hat - alpha_path) if np.isfinite(alpha_path) else float("inf")
    if np.isinf(alpha_path) and np.isinf(moment.alpha_hat):
        agreement = 0.0
    return IffReport(alpha=alpha, moment=moment, path=path, scaling=scaling, exp_moment=exp_moment,
                     sobolev_violations=violations, agreement=float(agreement))


def field_variance_scaling(spec: ModelSpec, lags: Optional[Sequence[float]] = None, n_paths: int = 1000,
                           grid: Sequence[int] = (33, 33), seed: Optional[int] = None,
                           workers: Optional[int] = None) -> FieldScalingReport:
    """
    Exponents of d_X from the corner: boxes [0, delta]^n give slope 2 sum alpha_j,
    boxes with side delta on axis j and 1 elsewhere give slope 2 alpha_j.
    """
    if n_paths < MIN_SCALING_PATHS:
        raise DomainError(f"field_variance_scaling needs at least {MIN_SCALING_PATHS} paths, got {n_paths}")
    grid = tuple(int(g) for g in grid)
    model = get_model_manager().create_model(spec)
    dims = model.dims
    if len(grid) != dims:
        grid = grid[:1] * dims
    coarsest = min(grid) - 1
    lags = list(lags) if lags else [2.0 ** (-k) for k in range(1, int(np.log2(coarsest)) + 1)]
    for size in grid:
        _lag_steps(lags, size)
    origin = (0.0,) * dims

    corners = [tuple(lag for _ in range(dims)) for lag in lags]
    for axis in range(dims):
        corners += [tuple(lag if k == axis else 1.0 for k in range(dims)) for lag in lags]

    def one_path(index: int, path_seed: int) -> np.ndarray:
        sample = model.sample(grid, path_seed)
        if not isinstance(sample, SampleField):
            sample = SampleField.from_path(sample)
        return np.array([box_increment(sample, origin, corner) ** 2 for corner in corners])

    means = np.stack(map_paths(one_path, n_paths, spec.seed if seed is None else int(seed),
                               workers=workers, desc=f"field scaling {spec.kind}")).mean(axis=0)
    n_lags = len(lags)
    diagonal_fit = fit_scaling(lags, means[:n_lags])
    axis_fits = [fit_scaling(lags, means[n_lags * (axis + 1): n_lags * (axis + 2)]) for axis in range(dims)]
    return FieldScalingReport(axis_fits=axis_fits, diagonal_fit=diagonal_fit)
