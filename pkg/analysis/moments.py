"""
Moment oracles and estimation of the hypercontractivity parameters (C0, iota).

A process is hypercontractive with parameters (C0, iota) when

    E|X_t - X_s|^p <= C0^p p^(p iota) (E|X_t - X_s|^2)^(p/2)    for all p >= 1.

The normalised ratio C(p) = E|D|^p / (E D^2)^(p/2) is estimated from pooled
increments and the bound is inverted by least squares in log space.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate, special

from errors import DomainError, NumericalError

logger = logging.getLogger(__name__)

DEFAULT_P_GRID = (2, 3, 4, 5, 6, 7, 8)
MIN_INCREMENT_SAMPLES = 100


@dataclass(frozen=True)
class HyperParams:
    """Pair (C0, iota) of the increment moment bound."""
    C0: float
    iota: float

    def __post_init__(self):
        if not (np.isfinite(self.C0) and self.C0 > 0):
            raise DomainError(f"C0 must be positive, got {self.C0}")
        # iota = 0 would make Psi(x) = exp(beta x^(1/iota)) degenerate
        if not (np.isfinite(self.iota) and self.iota > 0):
            raise DomainError(f"iota must be positive, got {self.iota}")

    def bound(self, p: float) -> float:
        """C0^p p^(p iota)."""
        return float(np.exp(p * np.log(self.C0) + self.iota * p * np.log(p)))


@dataclass(frozen=True)
class HyperEstimate:
    """Fitted parameters with least-squares diagnostics."""
    params: HyperParams
    p_grid: List[float]
    residual_rms: float
    r_squared: float
    residuals: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, float]:
        return {
            "C0": self.params.C0,
            "iota": self.params.iota,
            "residual_rms": self.residual_rms,
            "r_squared": self.r_squared,
        }


@dataclass(frozen=True)
class MomentRow:
    """One row of an increment moment table."""
    p: float
    ratio: float
    max_ratio: float
    bound: float
    passed: bool


def gaussian_abs_moment(p: float) -> float:
    """E|Z|^p = 2^(p/2) Gamma((p+1)/2) / sqrt(pi) for standard Gaussian Z."""
    if p < 1:
        raise DomainError(f"moment order must be at least 1, got {p}")
    log_value = 0.5 * p * np.log(2.0) + special.gammaln(0.5 * (p + 1.0)) - 0.5 * np.log(np.pi)
    return float(np.exp(log_value))


def chaos_moment_comparison(q: float, r: float, chaos_order: int) -> float:
    """
    ((r - 1) / (q - 1))^(p/2): how far the L^r norm can exceed the L^q norm in chaos p.
    """
    if q <= 1:
        raise DomainError(f"q must exceed 1, got {q}")
    if r < q:
        raise DomainError(f"r must be at least q, got q={q}, r={r}")
    if int(chaos_order) != chaos_order or chaos_order < 1:
        raise DomainError(f"chaos order must be a positive integer, got {chaos_order}")
    return float(((r - 1.0) / (q - 1.0)) ** (0.5 * chaos_order))


def hermite_abs_moment(order: int, p: float) -> float:
    """
    E|He_n(Z)|^p for standard Gaussian Z.

    Adaptive quadrature against the Gaussian density with breakpoints at the
    roots of He_n, where |He_n|^p has its kinks.
    """
    if order < 0:
        raise DomainError(f"Hermite order must be non-negative, got {order}")
    if p < 1:
        raise DomainError(f"moment order must be at least 1, got {p}")
    if order == 0:
        return 1.0

    coefficients = np.zeros(order + 1)
    coefficients[-1] = 1.0
    roots = np.sort(np.real(hermite_e.hermeroots(coefficients)))
    limit = 10.0 + 2.0 * np.sqrt(order * p)

    def integrand(x):
        return np.abs(hermite_e.hermeval(x, coefficients)) ** p * np.exp(-0.5 * x * x)

    value, error = integrate.quad(integrand, -limit, limit, points=roots, limit=400)
    if not np.isfinite(value) or error > 1e-6 * max(value, 1.0):
        raise NumericalError(f"E|He_{order}(Z)|^{p} did not converge (error estimate {error:.3g})")
    return float(value / np.sqrt(2.0 * np.pi))


def chaos_moment_ratio(order: int, p: float) -> float:
    """E|He_n(Z)|^p / (n!)^(p/2), using E He_n(Z)^2 = n!."""
    log_norm = 0.5 * p * special.gammaln(order + 1.0)
    return float(hermite_abs_moment(order, p) / np.exp(log_norm))


def _abs_moment(abs_samples: np.ndarray, p: float) -> float:
    return float(np.mean(abs_samples ** float(p)))


def empirical_moment_ratio(increment_samples: Sequence[float], p: float) -> float:
    """
    Plug-in estimate of E|D|^p / (E D^2)^(p/2).

    Raises:
        DomainError: for fewer than 100 samples, all-equal samples, or a zero second moment
    """
    samples = np.asarray(increment_samples, dtype=float).ravel()
    if samples.size < MIN_INCREMENT_SAMPLES:
        raise DomainError(f"need at least {MIN_INCREMENT_SAMPLES} increments, got {samples.size}")
    if not np.all(np.isfinite(samples)):
        raise DomainError("increment samples must be finite")
    if np.ptp(samples) == 0.0:
        raise DomainError("degenerate increment samples: all values are equal")
    if p < 1:
        raise DomainError(f"moment order must be at least 1, got {p}")

    abs_samples = np.abs(samples)
    second = _abs_moment(abs_samples, 2.0)
    if second <= 0.0:
        raise DomainError("second moment of the increments is zero")
    return _abs_moment(abs_samples, p) / second ** (0.5 * p)


def fit_hyper_params(ratios: Mapping[float, float]) -> HyperEstimate:
    """
    Least-squares fit of log C(p) = p log C0 + iota p log p.

    Args:
        ratios: Map from moment order p to the ratio C(p)

    Raises:
        DomainError: for fewer than 4 orders, non-positive ratios, or a singular design
    """
    orders = np.array(sorted(float(p) for p in ratios), dtype=float)
    if len(orders) < 4:
        raise DomainError(f"need at least 4 distinct moment orders, got {len(orders)}")
    if orders[0] < 1:
        raise DomainError("moment orders must be at least 1")
    values = np.array([float(ratios[p]) for p in sorted(ratios, key=float)], dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise DomainError("all moment ratios must be positive and finite")

    design = np.column_stack([orders, orders * np.log(orders)])
    if np.linalg.matrix_rank(design) < 2:
        raise DomainError("singular design: need at least two distinct p log p values")
    target = np.log(values)
    coefficients, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    residuals = target - design @ coefficients

    ss_res = float(np.sum(residuals ** 2))
    ss_tot = float(np.sum((target - target.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else float(ss_res == 0.0)
    r_squared = float(np.clip(r_squared, 0.0, 1.0))

    log_c0, iota = coefficients
    if iota <= 0:
        raise DomainError(f"fitted iota is not positive ({iota:.4g}); the increments look bounded")
    estimate = HyperEstimate(
        params=HyperParams(C0=float(np.exp(log_c0)), iota=float(iota)),
        p_grid=[float(p) for p in orders],
        residual_rms=float(np.sqrt(ss_res / len(orders))),
        r_squared=r_squared,
        residuals=[float(r) for r in residuals],
    )
    logger.debug(f"Fitted hyper parameters: {estimate.to_dict()}")
    return estimate


def combine_product_params(first: HyperParams, second: HyperParams) -> HyperParams:
    """Parameters of Z = XY for independent X, Y: (2^(iX + iY) C0X C0Y, iX + iY)."""
    iota = first.iota + second.iota
    return HyperParams(C0=2.0 ** iota * first.C0 * second.C0, iota=iota)


def combine_linear_params(weights: Sequence[float], params: Sequence[HyperParams]) -> HyperParams:
    """
    Parameters of sum_i w_i X_i for independent centred processes.

    Minkowski and Cauchy-Schwarz give C0 = sqrt(k) max_i C0_i and
    iota = max_i iota_i over the k nonzero weights.
    """
    if len(weights) != len(params):
        raise DomainError(f"got {len(weights)} weights for {len(params)} parameter pairs")
    active = [param for weight, param in zip(weights, params) if weight != 0.0]
    if not active:
        raise DomainError("at least one weight must be nonzero")
    return HyperParams(
        C0=float(np.sqrt(len(active))) * max(param.C0 for param in active),
        iota=max(param.iota for param in active),
    )


def hyper_bound_holds(ratios: Mapping[float, float], params: HyperParams) -> Dict[float, bool]:
    """Per-order check C(p) <= C0^p p^(p iota)."""
    return {float(p): bool(ratio <= params.bound(float(p))) for p, ratio in ratios.items()}


def pooled_increments(values: Sequence[np.ndarray], lag: int) -> np.ndarray:
    """Increments X_{t + lag} - X_t pooled over all paths (overlapping windows)."""
    if lag < 1:
        raise DomainError(f"lag must be at least one grid step, got {lag}")
    blocks = [np.asarray(v, dtype=float)[lag:] - np.asarray(v, dtype=float)[:-lag] for v in values]
    blocks = [b for b in blocks if b.size]
    if not blocks:
        raise DomainError(f"lag {lag} exceeds the path length")
    return np.concatenate(blocks)


def dyadic_lags(n_points: int, min_samples_per_path: int = 4) -> List[int]:
    """Lags 1, 2, 4, ... grid steps leaving at least min_samples_per_path increments per path."""
    lags = []
    lag = 1
    while n_points - 1 - lag >= min_samples_per_path - 1 and lag < n_points - 1:
        lags.append(lag)
        lag *= 2
    return lags or [1]


def increment_moment_table(paths: Sequence, p_grid: Sequence[float] = DEFAULT_P_GRID,
                           lags: Optional[Sequence[int]] = None,
                           params: Optional[HyperParams] = None) -> List[MomentRow]:
    """
    Moment ratios of pooled increments.

    ``ratio`` uses increments one grid step apart; ``max_ratio`` is the max over
    the dyadic lags. With params the bound column holds C0^p p^(p iota),
    otherwise it is NaN and every row passes.
    """
    values = [getattr(path, "values", path) for path in paths]
    n_points = min(len(v) for v in values)
    lags = list(lags) if lags else dyadic_lags(n_points)

    by_lag = {}
    for lag in lags:
        increments = pooled_increments(values, lag)
        if increments.size < MIN_INCREMENT_SAMPLES:
            logger.debug(f"Skipping lag {lag}: only {increments.size} increments")
            continue
        by_lag[lag] = increments
    if 1 not in by_lag:
        by_lag[1] = pooled_increments(values, 1)

    rows = []
    for p in p_grid:
        ratio = empirical_moment_ratio(by_lag[1], p)
        max_ratio = max(empirical_moment_ratio(increments, p) for increments in by_lag.values())
        bound = params.bound(float(p)) if params else float("nan")
        rows.append(MomentRow(p=float(p), ratio=ratio, max_ratio=max_ratio, bound=bound,
                              passed=bool(params is None or max_ratio <= bound)))
    return rows
