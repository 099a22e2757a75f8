"""
Supremum tail bounds, the beta0 window, C(beta0) estimation and the
second-moment diagnostics (Paley-Zygmund, tightness) behind the necessity
half of the Hoelder characterisation.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import config
from errors import DomainError
from models.base_model import ModelSpec, SampleField, SamplePath
from models.model_manager import get_model_manager
from montecarlo import map_paths
from .fields import c_tilde, compute_B_field, field_holder_constants
from .grr import beta_window, check_parameters, compute_B, holder_constants

logger = logging.getLogger(__name__)

MIN_TAIL_PATHS = 1000
DEFAULT_U_GRID = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
SECOND_MOMENT_SLOPE_FLOOR = -0.05


@dataclass(frozen=True)
class TailConfig:
    """Parameters of a supremum tail experiment."""
    beta: float
    beta0: float
    iota: float
    alphas: Tuple[float, ...]
    C0: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        check_parameters(self.beta, self.iota, self.alphas)
        if not (self.beta0 > 0):
            raise DomainError(f"beta0 must be positive, got {self.beta0}")
        if self.C0 is not None:
            if self.beta >= beta_window(self.C0, self.iota):
                raise DomainError(f"beta={self.beta} is outside (0, {beta_window(self.C0, self.iota):.6g})")
            limit = beta0_max(self.C0, self.iota, len(self.alphas))
            if self.beta0 >= limit:
                raise DomainError(f"beta0={self.beta0} must be below beta0_max={limit:.6g}")

    @property
    def dims(self) -> int:
        return len(self.alphas)


@dataclass
class CBeta0Estimate:
    """Plug-in C(beta0) with its exponent and an optional moment-window warning."""
    value: float
    kappa: float
    n_samples: int
    warning: Optional[str] = None


@dataclass
class TailCurve:
    """Empirical exceedance frequencies next to the analytic bound."""
    u_grid: List[float]
    empirical: List[float]
    bound: List[float]
    n_paths: int
    margin: List[float] = field(default_factory=list)

    @property
    def passes(self) -> List[bool]:
        return [e <= b + m for e, b, m in zip(self.empirical, self.bound, self.margin)]

    @property
    def passed(self) -> bool:
        return all(self.passes)

    def to_rows(self) -> List[Dict[str, float]]:
        return [{"u": u, "empirical_prob": e, "bound": b, "pass": ok}
                for u, e, b, ok in zip(self.u_grid, self.empirical, self.bound, self.passes)]


@dataclass
class TailResult:
    """A tail curve with the constants used to build it."""
    curve: TailCurve
    C_beta0: CBeta0Estimate
    C_d: float
    additive_constant: float
    statement_constant: float
    threshold_scale: float
    grid_points: Tuple[int, ...]

    def to_record(self) -> Dict[str, float]:
        return {
            "C_beta0": self.C_beta0.value,
            "kappa": self.C_beta0.kappa,
            "C_d": self.C_d,
            "additive_constant": self.additive_constant,
            "statement_additive_constant": self.statement_constant,
            "threshold_scale": self.threshold_scale,
            "grid_points": list(self.grid_points),
            "n_paths": self.curve.n_paths,
            "passed": self.curve.passed,
            "moment_window_warning": self.C_beta0.warning or "",
        }


@dataclass
class TightnessRow:
    lag: int
    delta: float
    mean_f2: float
    mean_f4: float
    ratio: float
    ratio_se: float


@dataclass
class TightnessReport:
    """Moments of F = |X_t - X_s| / |t - s|^(alpha - epsilon) across scales."""
    rows: List[TightnessRow]
    sup_f2: float
    max_ratio: float
    ratio_limit: float
    f2_slope: float
    premise_holds: bool
    second_moment_bounded: bool
    degenerate: bool


def beta0_max(C0: float, iota: float, n_dims: int = 1) -> float:
    """e iota / (8^n C0 3^max(iota-1,0))^(1/iota)."""
    if C0 <= 0 or iota <= 0 or n_dims < 1:
        raise DomainError(f"need C0 > 0, iota > 0, n_dims >= 1; got {C0}, {iota}, {n_dims}")
    base = 8.0 ** n_dims * C0 * 3.0 ** max(iota - 1.0, 0.0)
    return float(np.e * iota / base ** (1.0 / iota))


def c_beta0_kappa(beta0: float, beta: float, iota: float, n_dims: int = 1) -> float:
    """kappa = beta0 / beta (8^n 3^max(iota-1,0))^(1/iota)."""
    return float(beta0 / beta * (8.0 ** n_dims * 3.0 ** max(iota - 1.0, 0.0)) ** (1.0 / iota))


def estimate_C_beta0(B_samples: Sequence[float], beta0: float, beta: float, iota: float,
                     n_dims: int = 1, C0: Optional[float] = None) -> CBeta0Estimate:
    """
    Plug-in mean of 4^n B^kappa.

    With C0 given, kappa at or above the finite-moment threshold
    e iota / (beta C0^(1/iota)) attaches a warning instead of failing.
    """
    samples = np.asarray(B_samples, dtype=float)
    if samples.size == 0 or np.any(samples <= 0):
        raise DomainError("B samples must be a non-empty set of positive values")
    kappa = c_beta0_kappa(beta0, beta, iota, n_dims)
    value = float(np.mean(4.0 ** n_dims * np.exp(kappa * np.log(samples))))
    warning = None
    if C0 is not None:
        threshold = np.e * iota / (beta * C0 ** (1.0 / iota))
        if kappa >= threshold:
            warning = (f"kappa={kappa:.4g} is outside the finite-moment window (< {threshold:.4g}); "
                       f"the C(beta0) estimate may not converge")
            logger.warning(warning)
    return CBeta0Estimate(value=value, kappa=kappa, n_samples=int(samples.size), warning=warning)


def additive_constants(C_d: float, alpha: float, iota: float) -> Tuple[float, float]:
    """(C_d e^-iota (iota/alpha)^iota, C_d e^(-alpha iota) iota^iota)."""
    derived = C_d * np.exp(-iota) * (iota / alpha) ** iota
    statement = C_d * np.exp(-alpha * iota) * iota ** iota
    return float(derived), float(statement)


def tail_bound_curve(u_grid: Sequence[float], C_beta0: float, beta0: float, iota: float) -> np.ndarray:
    """C(beta0) exp(-beta0 u^(1/iota))."""
    u = np.asarray(u_grid, dtype=float)
    return C_beta0 * np.exp(-beta0 * u ** (1.0 / iota))


def _box_indices(axis: np.ndarray, lower: float, upper: float, name: str) -> np.ndarray:
    if not (0.0 <= lower < upper <= 1.0):
        raise DomainError(f"{name} must satisfy 0 <= a < b <= 1, got [{lower}, {upper}]")
    inside = np.nonzero((axis >= lower - 1e-9) & (axis <= upper + 1e-9))[0]
    if inside.size < 2 or abs(axis[inside[0]] - lower) > 1e-9 or abs(axis[inside[-1]] - upper) > 1e-9:
        raise DomainError(f"{name}=[{lower}, {upper}] is not aligned with the grid")
    return inside


def sup_box_increment(field_sample: SampleField, lower: Sequence[float], upper: Sequence[float],
                      base: Sequence[float]) -> float:
    """sup over grid nodes t of the box I of |box(X; base, t)|; at n = 1 this is sup |X_t - X_s|."""
    values = field_sample.values
    ranges = []
    for k, axis in enumerate(field_sample.axes):
        inside = _box_indices(axis, lower[k], upper[k], f"interval on axis {k + 1}")
        s_index = int(np.argmin(np.abs(axis - base[k])))
        if abs(axis[s_index] - base[k]) > 1e-9 or s_index not in inside:
            raise DomainError(f"base point {base[k]} must be a grid node inside the interval")
        values = values - np.take(values, [s_index], axis=k)
        ranges.append(inside)
    return float(np.max(np.abs(values[np.ix_(*ranges)])))


def _tail_run(spec: ModelSpec, lower: Sequence[float], upper: Sequence[float], base: Sequence[float],
              u_grid: Sequence[float], n_paths: int, tail_config: TailConfig, grid: Tuple[int, ...],
              seed: Optional[int], additive: float, statement: float, C_d: float,
              workers: Optional[int] = None) -> TailResult:
    if n_paths < MIN_TAIL_PATHS:
        raise DomainError(f"tail experiments need at least {MIN_TAIL_PATHS} paths, got {n_paths}")
    u_grid = [float(u) for u in u_grid]
    if not u_grid or any(u <= 0 for u in u_grid) or any(b <= a for a, b in zip(u_grid, u_grid[1:])):
        raise DomainError("u grid must be positive and strictly increasing")

    model = get_model_manager().create_model(spec)
    if model.dims != tail_config.dims:
        raise DomainError(f"{len(tail_config.alphas)} exponents for a {model.dims}-parameter model")
    master = spec.seed if seed is None else int(seed)

    def one_path(index: int, path_seed: int) -> Tuple[float, float]:
        sample = model.sample(grid, path_seed)
        if isinstance(sample, SamplePath):
            B = compute_B(sample, tail_config.alphas[0], tail_config.beta, tail_config.iota)
            sample = SampleField.from_path(sample)
        else:
            B = compute_B_field(sample, tail_config.alphas, tail_config.beta, tail_config.iota)
        return sup_box_increment(sample, lower, upper, base), B

    results = map_paths(one_path, n_paths, master, workers=workers, desc=f"tail {spec.kind}")
    sups = np.array([r[0] for r in results])
    B_samples = np.array([r[1] for r in results])

    estimate = estimate_C_beta0(B_samples, tail_config.beta0, tail_config.beta, tail_config.iota,
                                tail_config.dims, C0=tail_config.C0)
    scale = float(np.prod([(b - a) ** alpha for a, b, alpha in zip(lower, upper, tail_config.alphas)]))
    empirical = [float(np.mean(sups >= u * scale + additive)) for u in u_grid]
    bound = tail_bound_curve(u_grid, estimate.value, tail_config.beta0, tail_config.iota)
    margin = [config.mc_standard_errors * np.sqrt(p * (1.0 - p) / n_paths) for p in empirical]
    curve = TailCurve(u_grid=u_grid, empirical=empirical, bound=[float(b) for b in bound],
                      n_paths=n_paths, margin=[float(m) for m in margin])
    if not curve.passed:
        logger.warning(f"Tail bound exceeded for {spec.describe()} at "
                       f"u={[u for u, ok in zip(u_grid, curve.passes) if not ok]}")
    return TailResult(curve=curve, C_beta0=estimate, C_d=C_d, additive_constant=additive,
                      statement_constant=statement, threshold_scale=scale, grid_points=tuple(grid))


def sup_tail_experiment(spec: ModelSpec, interval: Tuple[float, float] = (0.0, 1.0), base: float = 0.0,
                        u_grid: Sequence[float] = DEFAULT_U_GRID, n_paths: int = 10000,
                        tail_config: Optional[TailConfig] = None, grid: int = 257,
                        seed: Optional[int] = None, workers: Optional[int] = None) -> TailResult:
    """
    Frequencies of sup_{t in I} |X_t - X_s| >= u |I|^alpha + C_d e^-iota (iota/alpha)^iota
    against C(beta0) exp(-beta0 u^(1/iota)).

    PASS at u iff the frequency is at most the bound plus MC_STANDARD_ERRORS
    binomial standard errors.
    """
    if tail_config is None or tail_config.dims != 1:
        raise DomainError("sup_tail_experiment needs a one-parameter TailConfig")
    alpha = tail_config.alphas[0]
    _, C_d = holder_constants(1.0, tail_config.beta, tail_config.iota, alpha)
    additive, statement = additive_constants(C_d, alpha, tail_config.iota)
    return _tail_run(spec, (interval[0],), (interval[1],), (base,), u_grid, n_paths, tail_config,
                     (int(grid),), seed, additive, statement, C_d, workers=workers)


def field_sup_tail_experiment(spec: ModelSpec, lower: Sequence[float], upper: Sequence[float],
                              base: Sequence[float], u_grid: Sequence[float] = DEFAULT_U_GRID,
                              n_paths: int = 1000, tail_config: Optional[TailConfig] = None,
                              grid: Sequence[int] = (33, 33), seed: Optional[int] = None,
                              workers: Optional[int] = None) -> TailResult:
    """
    Field version: sup_{t in I} |box(X; s, t)| >= u prod |I_j|^alpha_j + C_tilde
    against C(beta0) exp(-beta0 u^(1/iota)) with prefactor 4^n.
    """
    if tail_config is None:
        raise DomainError("field_sup_tail_experiment needs a TailConfig")
    _, C_d = field_holder_constants(1.0, tail_config.beta, tail_config.iota, tail_config.alphas)
    additive = c_tilde(tail_config.alphas, tail_config.iota, C_d)
    alpha_min = min(tail_config.alphas)
    _, statement = additive_constants(C_d, alpha_min, tail_config.iota)
    return _tail_run(spec, tuple(lower), tuple(upper), tuple(base), u_grid, n_paths, tail_config,
                     tuple(int(g) for g in grid), seed, additive, statement, C_d, workers=workers)


def paley_zygmund(mean: float, second_moment: float, theta: float) -> float:
    """(1 - theta)^2 mean^2 / second_moment, a lower bound on P(X > theta E X)."""
    if mean < 0:
        raise DomainError(f"mean must be non-negative, got {mean}")
    if second_moment <= 0:
        raise DomainError(f"second moment must be positive, got {second_moment}")
    if mean * mean > second_moment * (1.0 + 1e-12):
        raise DomainError(f"mean^2={mean * mean:.6g} exceeds the second moment {second_moment:.6g}")
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    return float((1.0 - theta) ** 2 * mean * mean / second_moment)


def paley_zygmund_check(samples: Sequence[float], theta: float) -> Dict[str, float]:
    """Empirical P(X > theta E X) next to the Paley-Zygmund lower bound."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0 or np.any(x < 0):
        raise DomainError("Paley-Zygmund needs non-negative samples")
    mean = float(np.mean(x))
    second = float(np.mean(x * x))
    bound = paley_zygmund(mean, second, theta)
    probability = float(np.mean(x > theta * mean))
    return {"theta": theta, "mean": mean, "second_moment": second,
            "empirical_prob": probability, "bound": bound, "holds": probability >= bound}


def tightness_diagnostic(spec: ModelSpec, epsilon: float, alpha: Optional[float] = None,
                         scale_grid: Optional[Sequence[int]] = None, n_paths: int = 1000,
                         grid: int = 257, seed: Optional[int] = None,
                         workers: Optional[int] = None) -> TightnessReport:
    """
    Moments of F_{s,t} = |X_t - X_s| / |t - s|^(alpha - epsilon) at each lag.

    Per-path averages of F^2 and F^4 are the independent units; the ratio
    E F^4 / (E F^2)^2 carries a delta-method standard error. The premise holds
    when the ratio stays below C0^4 4^(4 iota) from the model's hyper witness;
    E F^2 counts as bounded when its log-log slope against the lag is at least -0.05.
    """
    model = get_model_manager().create_model(spec)
    if model.dims != 1:
        raise DomainError("tightness_diagnostic runs on one-parameter models")
    alpha = model.holder_exponents()[0] if alpha is None else float(alpha)
    if not (0.0 < epsilon < alpha):
        raise DomainError(f"epsilon must lie in (0, alpha), got {epsilon}")
    lags = list(scale_grid) if scale_grid else [2 ** k for k in range(int(np.log2(grid - 1)) - 1)]
    if any(lag < 1 or lag >= grid - 1 for lag in lags):
        raise DomainError(f"lags must lie in [1, {grid - 2}] grid steps, got {lags}")
    step = 1.0 / (grid - 1)
    exponent = alpha - epsilon

    def one_path(index: int, path_seed: int) -> np.ndarray:
        values = model.sample(grid, path_seed).values
        out = np.empty((len(lags), 2))
        for row, lag in enumerate(lags):
            f_values = np.abs(values[lag:] - values[:-lag]) / (lag * step) ** exponent
            f2 = f_values * f_values
            out[row] = (np.mean(f2), np.mean(f2 * f2))
        return out

    units = np.stack(map_paths(one_path, n_paths, spec.seed if seed is None else int(seed),
                               workers=workers, desc=f"tightness {spec.kind}"))
    c0, iota = model.hyper_witness()
    ratio_limit = c0 ** 4 * 4.0 ** (4.0 * iota)

    rows = []
    for row, lag in enumerate(lags):
        f2 = units[:, row, 0]
        f4 = units[:, row, 1]
        mean_f2 = float(np.mean(f2))
        mean_f4 = float(np.mean(f4))
        if mean_f2 > 0:
            ratio = mean_f4 / mean_f2 ** 2
            gradient = np.array([1.0 / mean_f2 ** 2, -2.0 * mean_f4 / mean_f2 ** 3])
            covariance = np.cov(np.vstack([f4, f2])) / n_paths
            ratio_se = float(np.sqrt(max(gradient @ covariance @ gradient, 0.0)))
        else:
            ratio, ratio_se = float("nan"), float("nan")
        rows.append(TightnessRow(lag=lag, delta=lag * step, mean_f2=mean_f2, mean_f4=mean_f4,
                                 ratio=float(ratio), ratio_se=ratio_se))

    mean_f2s = np.array([r.mean_f2 for r in rows])
    degenerate = bool(np.all(mean_f2s == 0.0))
    if degenerate:
        logger.info(f"{spec.describe()} has vanishing increments; tightness report is degenerate")
        return TightnessReport(rows=rows, sup_f2=0.0, max_ratio=float("nan"), ratio_limit=ratio_limit,
                               f2_slope=0.0, premise_holds=True, second_moment_bounded=True,
                               degenerate=True)

    positive = mean_f2s > 0
    deltas = np.array([r.delta for r in rows])
    if np.count_nonzero(positive) >= 2:
        slope = float(np.polyfit(np.log(deltas[positive]), np.log(mean_f2s[positive]), 1)[0])
    else:
        slope = 0.0
    max_ratio = float(np.nanmax([r.ratio for r in rows]))
    return TightnessReport(rows=rows, sup_f2=float(np.max(mean_f2s)), max_ratio=max_ratio,
                           ratio_limit=ratio_limit, f2_slope=slope,
                           premise_holds=bool(max_ratio <= ratio_limit),
                           second_moment_bounded=bool(slope >= SECOND_MOMENT_SLOPE_FLOOR),
                           degenerate=False)
