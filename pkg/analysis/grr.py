"""
One-parameter Garsia-Rodemich-Rumsey engine.

With Psi(x) = exp(beta x^(1/iota)) and rho(u) = u^alpha, a continuous path
satisfies

    |X_t - X_s| <= 8 int_0^|t-s| Psi^-1(4B / u^2) d rho(u)

where B is the double integral of Psi(|X_t - X_s| / rho(|t - s|)). This
module evaluates B on a grid, the modulus integral, the Hoelder constants
C(omega) and C_d derived from it, the Sobolev-embedding constant and the
pathwise checks of all of them.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from config import config
from errors import DomainError, IntegrandOverflowError
from montecarlo import ordered_sum
from .quadrature import log_moment_integral, log_power_modulus_integral

logger = logging.getLogger(__name__)

# exp() overflows double precision just above this exponent
MAX_EXPONENT = 709.0
ROW_BLOCK = 512
MODULUS_SAMPLE_SCALES = tuple(range(0, 11))
LIMSUP_MAX_LAG = 8
LIMSUP_MIN_POINTS = 1024
MIN_B_POINTS = 16


@dataclass(frozen=True)
class GrrConfig:
    """beta, iota and the power-law exponent alpha of rho(u) = u^alpha."""
    beta: float
    iota: float
    alpha: float
    quadrature_nodes: Optional[int] = None
    C0: Optional[float] = None

    def __post_init__(self):
        issues = _parameter_issues(self.beta, self.iota, (self.alpha,))
        if self.C0 is not None:
            if self.C0 <= 0:
                issues.append(f"C0 must be positive, got {self.C0}")
            elif self.beta >= beta_window(self.C0, self.iota):
                issues.append(f"beta={self.beta} is outside the finite-moment window "
                              f"(0, {beta_window(self.C0, self.iota):.6g}) for C0={self.C0}")
        if self.quadrature_nodes is not None and self.quadrature_nodes < 16:
            issues.append("quadrature_nodes must be at least 16")
        if issues:
            raise DomainError("Invalid GRR configuration: " + "; ".join(issues))


@dataclass
class GrrResult:
    """B and the constants derived from it for one path or field."""
    B: float
    C_omega: float
    C_d: float
    beta: float
    iota: float
    alpha: Tuple[float, ...]
    diagonal_weight: float = 0.0
    modulus_samples: List[Tuple[float, float]] = field(default_factory=list)

    def to_record(self) -> Dict[str, float]:
        """Flat key-value record; alpha is split per axis for fields."""
        record = {"B": self.B, "C_omega": self.C_omega, "C_d": self.C_d,
                  "beta": self.beta, "iota": self.iota}
        if len(self.alpha) == 1:
            record["alpha"] = self.alpha[0]
        else:
            for j, alpha in enumerate(self.alpha, start=1):
                record[f"alpha{j}"] = alpha
        record["diagonal_weight"] = self.diagonal_weight
        return record


@dataclass
class ViolationReport:
    """Outcome of a pathwise bound check over grid pairs."""
    n_pairs: int
    violations: int
    worst_margin: float
    max_increment: float
    worst_pair: Optional[Tuple] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_record(self) -> Dict[str, float]:
        return {"n_pairs": self.n_pairs, "violations": self.violations,
                "worst_margin": self.worst_margin, "max_increment": self.max_increment,
                "passed": self.passed}


@dataclass
class SobolevResult:
    """Pathwise Sobolev-embedding constant and its grid check."""
    constant: float
    c_gamma_q: float
    integral: float
    q: float
    gamma: float
    report: ViolationReport


def _parameter_issues(beta: float, iota: float, alphas: Sequence[float]) -> List[str]:
    issues = []
    if not (np.isfinite(beta) and beta > 0):
        issues.append(f"beta must be positive, got {beta}")
    if not (np.isfinite(iota) and iota > 0):
        issues.append(f"iota must be positive, got {iota}")
    for alpha in alphas:
        if not (0.0 < alpha <= 1.0):
            issues.append(f"alpha must lie in (0, 1], got {alpha}")
    return issues


def check_parameters(beta: float, iota: float, alphas: Sequence[float]) -> None:
    """Raise DomainError unless beta > 0, iota > 0 and every alpha is in (0, 1]."""
    issues = _parameter_issues(beta, iota, alphas)
    if issues:
        raise DomainError("; ".join(issues))


def beta_window(C0: float, iota: float) -> float:
    """Upper end e iota / C0^(1/iota) of the beta range where B has all moments."""
    if C0 <= 0 or iota <= 0:
        raise DomainError(f"C0 and iota must be positive, got C0={C0}, iota={iota}")
    return float(np.e * iota / C0 ** (1.0 / iota))


def psi(x, beta: float, iota: float):
    """Psi(x) = exp(beta x^(1/iota)) for x >= 0."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("psi is defined for x >= 0")
    value = np.exp(beta * x_arr ** (1.0 / iota))
    return float(value) if value.ndim == 0 else value


def psi_inv(y, beta: float, iota: float):
    """Psi^-1(y) = (log(y) / beta)^iota for y >= 1."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 1):
        raise DomainError("psi_inv is defined for y >= 1")
    value = (np.log(y_arr) / beta) ** iota
    return float(value) if value.ndim == 0 else value


def b_floor(dims: int = 1) -> float:
    """Smallest B accepted by the modulus integrals: 1/4^n plus B_FLOOR_EPSILON."""
    return 0.25 ** dims + config.b_floor_epsilon


def _cells(path) -> Tuple[np.ndarray, np.ndarray]:
    """Cell centres and cell-midpoint values of a path."""
    t = path.grid_points
    x = path.values
    return 0.5 * (t[1:] + t[:-1]), 0.5 * (x[1:] + x[:-1])


def _log_ratio_block(values: np.ndarray, centres: np.ndarray, rows: slice, alpha: float) -> np.ndarray:
    """log(|m_i - m_j| / |c_i - c_j|^alpha) for the row block; -inf where the increment is 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        log_inc = np.log(np.abs(values[rows, None] - values[None, :]))
        log_gap = np.log(np.abs(centres[rows, None] - centres[None, :]))
        return log_inc - alpha * log_gap


def compute_B_detail(path, alpha: float, beta: float, iota: float) -> Tuple[float, float]:
    """
    Midpoint-rule B over the (N-1)^2 grid cells and the diagonal weight.

    Each cell takes the average of its two adjacent path values. Cells on the
    diagonal use the integrand value 1 = Psi(0); their total weight 1/(N-1)
    is returned alongside B.

    Raises:
        DomainError: for inadmissible parameters or fewer than 16 grid points
        IntegrandOverflowError: when beta (ratio)^(1/iota) exceeds the exp range
    """
    check_parameters(beta, iota, (alpha,))
    n_points = path.n_points
    if n_points < MIN_B_POINTS:
        raise DomainError(f"compute_B needs at least {MIN_B_POINTS} grid points, got {n_points}")

    centres, values = _cells(path)
    n_cells = centres.size
    blocks = []
    for start in range(0, n_cells, ROW_BLOCK):
        rows = slice(start, min(start + ROW_BLOCK, n_cells))
        log_ratio = _log_ratio_block(values, centres, rows, alpha)
        with np.errstate(over="ignore"):
            exponent = beta * np.exp(log_ratio / iota)
        diagonal = np.arange(rows.start, rows.stop)
        exponent[diagonal - rows.start, diagonal] = 0.0
        exponent = np.nan_to_num(exponent, nan=0.0, posinf=np.inf)
        worst = int(np.argmax(exponent))
        if exponent.flat[worst] > MAX_EXPONENT:
            i, j = np.unravel_index(worst, exponent.shape)
            pair = (float(centres[rows.start + i]), float(centres[j]))
            raise IntegrandOverflowError(
                f"B integrand overflows at cell pair {pair} (exponent {exponent.flat[worst]:.4g}); "
                f"beta={beta} is too large for this path",
                pair=pair, exponent=float(exponent.flat[worst])
            )
        blocks.append(float(np.sum(np.exp(exponent))))

    B = ordered_sum(blocks) / float(n_cells) ** 2
    if not np.isfinite(B):
        raise IntegrandOverflowError(f"B overflows for beta={beta}", exponent=MAX_EXPONENT)
    return B, 1.0 / n_cells


def compute_B(path, alpha: float, beta: float, iota: float) -> float:
    """B = int int Psi(|X_t - X_s| / |t - s|^alpha) ds dt on the path grid."""
    return compute_B_detail(path, alpha, beta, iota)[0]


def modulus_bound(delta: float, B: float, beta: float, iota: float, alpha: float,
                  nodes: Optional[int] = None) -> float:
    """
    8 int_0^delta beta^-iota (log(4B / u^2))^iota alpha u^(alpha - 1) du.

    B is floored at 1/4 + B_FLOOR_EPSILON so the logarithm stays positive.
    """
    check_parameters(beta, iota, (alpha,))
    if not (0.0 < delta <= 1.0):
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    B = max(float(B), b_floor(1))
    offset = np.log(4.0 * B) + 2.0 * np.log(1.0 / delta)
    integral = log_power_modulus_integral(offset, iota, (alpha,), nodes=nodes)
    return float(8.0 * beta ** (-iota) * delta ** alpha * integral)


def log_moment_integral_1d(iota: float, alpha: float, nodes: Optional[int] = None) -> float:
    """int_0^1 (log 1/v)^iota v^(alpha - 1) dv (= Gamma(iota + 1) / alpha^(iota + 1))."""
    return log_moment_integral(iota, (alpha,), nodes=nodes)


def holder_constants_nd(B: float, beta: float, iota: float, alphas: Sequence[float],
                        nodes: Optional[int] = None) -> Tuple[float, float]:
    """
    (C(omega), C_d) on [0,1]^n.

    C(omega) = 8^n 3^max(iota-1,0) beta^-iota (log max(4^n B, 1))^iota
    C_d = 8^n prod(alpha) 2^iota 3^max(iota-1,0) beta^-iota
          [prod(1/alpha) + int (sum log 1/v_j)^iota prod v_j^(alpha_j - 1) dv]
    """
    alphas = tuple(float(a) for a in alphas)
    check_parameters(beta, iota, alphas)
    n = len(alphas)
    spread = 3.0 ** max(iota - 1.0, 0.0) * beta ** (-iota)
    log_term = np.log(max(4.0 ** n * B, 1.0))
    c_omega = 8.0 ** n * spread * log_term ** iota
    alpha_product = float(np.prod(alphas))
    v_integral = log_moment_integral(iota, alphas, nodes=nodes)
    c_d = 8.0 ** n * alpha_product * 2.0 ** iota * spread * (1.0 / alpha_product + v_integral)
    return float(c_omega), float(c_d)


def holder_constants(B: float, beta: float, iota: float, alpha: float,
                     nodes: Optional[int] = None) -> Tuple[float, float]:
    """(C(omega), C_d) of the one-parameter Hoelder bound; C(omega) = 0 when B <= 1/4."""
    return holder_constants_nd(B, beta, iota, (alpha,), nodes=nodes)


def analyze_path(path, grr_config: GrrConfig) -> GrrResult:
    """B, both constants and the modulus sampled at delta = 2^-k, k = 0..10."""
    B, diagonal_weight = compute_B_detail(path, grr_config.alpha, grr_config.beta, grr_config.iota)
    c_omega, c_d = holder_constants(B, grr_config.beta, grr_config.iota, grr_config.alpha,
                                    nodes=grr_config.quadrature_nodes)
    samples = []
    for k in MODULUS_SAMPLE_SCALES:
        delta = 2.0 ** (-k)
        samples.append((delta, modulus_bound(delta, B, grr_config.beta, grr_config.iota,
                                             grr_config.alpha, nodes=grr_config.quadrature_nodes)))
    return GrrResult(B=B, C_omega=c_omega, C_d=c_d, beta=grr_config.beta, iota=grr_config.iota,
                     alpha=(grr_config.alpha,), diagonal_weight=diagonal_weight,
                     modulus_samples=samples)


def _check_by_lag(path, rhs_for_gap, max_lag: Optional[int] = None,
                  skip_unit_gap: bool = True) -> ViolationReport:
    """Compare |X_{i+k} - X_i| against rhs_for_gap(k h) for every lag k."""
    values = path.values
    n_points = path.n_points
    step = path.step
    last_lag = n_points - 1 if max_lag is None else min(max_lag, n_points - 1)
    n_pairs = 0
    violations = 0
    worst_margin = np.inf
    worst_pair = None
    max_increment = 0.0
    for lag in range(1, last_lag + 1):
        gap = lag * step
        if skip_unit_gap and gap >= 1.0 - 1e-12:
            continue
        increments = np.abs(values[lag:] - values[:-lag])
        margins = rhs_for_gap(gap) - increments
        n_pairs += increments.size
        violations += int(np.count_nonzero(margins < 0))
        max_increment = max(max_increment, float(increments.max()))
        i = int(np.argmin(margins))
        if margins[i] < worst_margin:
            worst_margin = float(margins[i])
            worst_pair = (float(path.grid_points[i]), float(path.grid_points[i + lag]))
    if n_pairs == 0:
        worst_margin = float("nan")
    return ViolationReport(n_pairs=n_pairs, violations=violations, worst_margin=float(worst_margin),
                           max_increment=max_increment, worst_pair=worst_pair)


def verify_modulus(path, grr: GrrResult, alpha: float, iota: float) -> ViolationReport:
    """
    Check |X_t - X_s| <= C(omega) d^alpha + C_d d^alpha (log 1/d)^iota, d = |t - s|,
    at every grid pair with 0 < d < 1.
    """
    def rhs(gap):
        return grr.C_omega * gap ** alpha + grr.C_d * gap ** alpha * np.log(1.0 / gap) ** iota

    report = _check_by_lag(path, rhs)
    if not report.passed:
        logger.warning(f"Modulus bound violated at {report.violations} of {report.n_pairs} pairs "
                       f"(worst margin {report.worst_margin:.4g} at {report.worst_pair})")
    return report


def sobolev_constant(gamma: float, q: float) -> float:
    """C_{gamma,q} = 8 4^(1/q) (gamma + 1/q) / (gamma - 1/q)."""
    if gamma * q <= 1:
        raise DomainError(f"need gamma q > 1, got gamma={gamma}, q={q}")
    return float(8.0 * 4.0 ** (1.0 / q) * (gamma + 1.0 / q) / (gamma - 1.0 / q))


def sobolev_integral(path, alpha: float, epsilon: float) -> float:
    """
    Midpoint-rule int int |X_u - X_v|^q / |u - v|^(2 alpha / epsilon) du dv with q = 2/epsilon.

    Summed in log space; the diagonal cells contribute 0.
    """
    q = 2.0 / epsilon
    power = 2.0 * alpha / epsilon
    centres, values = _cells(path)
    n_cells = centres.size
    log_blocks = []
    for start in range(0, n_cells, ROW_BLOCK):
        rows = slice(start, min(start + ROW_BLOCK, n_cells))
        with np.errstate(divide="ignore", invalid="ignore"):
            log_inc = np.log(np.abs(values[rows, None] - values[None, :]))
            log_gap = np.log(np.abs(centres[rows, None] - centres[None, :]))
            terms = q * log_inc - power * log_gap
        diagonal = np.arange(rows.start, rows.stop)
        terms[diagonal - rows.start, diagonal] = -np.inf
        terms = np.where(np.isnan(terms), -np.inf, terms)
        log_blocks.append(float(logsumexp(terms)))
    total = float(logsumexp(log_blocks)) - 2.0 * np.log(n_cells)
    return float(np.exp(total))


def sobolev_bound(path, alpha: float, epsilon: float) -> SobolevResult:
    """
    C_eps(omega) = C_{gamma,q} (int int |X_u - X_v|^q / |u - v|^(gamma q + 1))^(1/q)
    with q = 2/epsilon and gamma = alpha - epsilon/2, plus the check
    |X_t - X_s| <= C_eps(omega) |t - s|^(alpha - epsilon) on the grid.

    Raises:
        DomainError: if q < 2 or gamma q <= 1
    """
    if not (0.0 < epsilon <= 1.0):
        raise DomainError(f"epsilon must lie in (0, 1] so that q = 2/epsilon >= 2, got {epsilon}")
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    q = 2.0 / epsilon
    gamma = alpha - 0.5 * epsilon
    c_gamma_q = sobolev_constant(gamma, q)
    integral = sobolev_integral(path, alpha, epsilon)
    constant = c_gamma_q * integral ** (1.0 / q)
    exponent = alpha - epsilon
    report = _check_by_lag(path, lambda gap: constant * gap ** exponent, skip_unit_gap=False)
    if not report.passed:
        logger.warning(f"Sobolev bound violated at {report.violations} of {report.n_pairs} pairs")
    return SobolevResult(constant=float(constant), c_gamma_q=c_gamma_q, integral=integral,
                         q=q, gamma=gamma, report=report)


def limsup_ratio(path, alpha: float, iota: float, C_d: Optional[float] = None) -> float:
    """
    max |X_t - X_s| / (d^alpha (log 1/d)^iota) over pairs at most 8 grid steps apart.

    With C_d given, a ratio above it is logged.
    """
    if path.n_points < LIMSUP_MIN_POINTS:
        logger.warning(f"limsup_ratio on {path.n_points} points; at least {LIMSUP_MIN_POINTS} "
                       f"are needed for the small-gap regime")
    values = path.values
    best = 0.0
    for lag in range(1, min(LIMSUP_MAX_LAG, path.n_points - 1) + 1):
        gap = lag * path.step
        if gap >= 1.0:
            continue
        scale = gap ** alpha * np.log(1.0 / gap) ** iota
        best = max(best, float(np.max(np.abs(values[lag:] - values[:-lag]))) / scale)
    if C_d is not None and best > C_d:
        logger.warning(f"limsup ratio {best:.4g} exceeds C_d={C_d:.4g}")
    return best
