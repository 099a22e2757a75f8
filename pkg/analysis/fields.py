"""
Multiparameter GRR engine for fields on [0,1]^n.

The rectangular increment of f over the box spanned by s and t is

    box(f; s, t) = prod_k (I - V_k) f (t),   V_k replaces coordinate k by s_k,

i.e. the alternating sum of f over the 2^n corners. Everything here works for
general n; only the pair arrays grow like N^(2n), so analysis grids are
subsampled to keep them bounded.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from config import config
from errors import DomainError, IntegrandOverflowError
from models.base_model import ModelSpec, SampleField, uniform_grid
from models.model_manager import get_model_manager
from .grr import (MAX_EXPONENT, LIMSUP_MAX_LAG, GrrResult, ViolationReport, b_floor, beta_window,
                  check_parameters, holder_constants_nd)
from .quadrature import log_power_modulus_integral

logger = logging.getLogger(__name__)

# upper bound on the elements of an all-pairs array (2^24 doubles = 128 MiB)
MAX_PAIR_ELEMENTS = 2 ** 24
C_TILDE_POINTS = 1000
C_TILDE_ZOOMS = 12
MIN_D_METRIC_PATHS = 1000


@dataclass
class FieldGrrConfig:
    """beta and iota with one power-law exponent per axis."""
    beta: float
    iota: float
    alphas: Tuple[float, ...]
    C0: Optional[float] = None

    def __post_init__(self):
        self.alphas = tuple(float(a) for a in self.alphas)
        check_parameters(self.beta, self.iota, self.alphas)
        if self.C0 is not None and self.beta >= beta_window(self.C0, self.iota):
            raise DomainError(f"beta={self.beta} is outside the finite-moment window "
                              f"(0, {beta_window(self.C0, self.iota):.6g}) for C0={self.C0}")


@dataclass
class FieldSobolevResult:
    """Multiparameter Sobolev constant and its grid check."""
    constant: float
    c_gamma_q: float
    integral: float
    q: float
    gammas: Tuple[float, ...]
    report: ViolationReport


def _grid_index(axis: np.ndarray, value: float, name: str) -> int:
    index = int(np.argmin(np.abs(axis - value)))
    if abs(axis[index] - value) > 1e-9:
        raise DomainError(f"{name}={value} is not a grid node")
    return index


def _indices(field: SampleField, point: Sequence[float], name: str) -> Tuple[int, ...]:
    point = tuple(float(x) for x in np.atleast_1d(point))
    if len(point) != field.dims:
        raise DomainError(f"{name} has {len(point)} coordinates for a {field.dims}-parameter field")
    return tuple(_grid_index(axis, x, f"{name}[{k}]") for k, (axis, x) in enumerate(zip(field.axes, point)))


def box_increment(field: SampleField, s: Sequence[float], t: Sequence[float]) -> float:
    """Corner sum: sum over c in prod {s_k, t_k} of (-1)^#{k: c_k = s_k} f(c)."""
    s_idx = _indices(field, s, "s")
    t_idx = _indices(field, t, "t")
    total = 0.0
    for choice in itertools.product((0, 1), repeat=field.dims):
        corner = tuple(s_idx[k] if pick else t_idx[k] for k, pick in enumerate(choice))
        total += (-1) ** sum(choice) * field.values[corner]
    return float(total)


def box_increment_operator(field: SampleField, s: Sequence[float], t: Sequence[float]) -> float:
    """prod_k (I - V_k) applied to the whole grid function, then evaluated at t."""
    s_idx = _indices(field, s, "s")
    t_idx = _indices(field, t, "t")
    g = field.values
    for k in range(field.dims):
        substituted = np.take(g, [s_idx[k]], axis=k)
        g = g - substituted
    return float(g[t_idx])


def _pair_differences(values: np.ndarray) -> np.ndarray:
    """
    All-pairs rectangular increments: shape (M1, M1, ..., Mn, Mn) with entry
    [i1, j1, ..., in, jn] the box increment between nodes i and j.
    """
    pairs = np.asarray(values, dtype=float)
    for k in range(values.ndim):
        pairs = np.expand_dims(pairs, 2 * k + 1) - np.expand_dims(pairs, 2 * k)
    return pairs


def _axis_layout(k: int, dims: int, size: int) -> List[int]:
    shape = [1] * (2 * dims)
    shape[2 * k] = size
    shape[2 * k + 1] = size
    return shape


def _gap_arrays(axes: Sequence[np.ndarray]) -> List[np.ndarray]:
    """|x_i - x_j| per axis, reshaped to broadcast against _pair_differences."""
    dims = len(axes)
    return [np.abs(axis[:, None] - axis[None, :]).reshape(_axis_layout(k, dims, axis.size))
            for k, axis in enumerate(axes)]


def _upper_mask(axes: Sequence[np.ndarray]) -> np.ndarray:
    """True where i_k < j_k on every axis (one entry per distinct box)."""
    dims = len(axes)
    mask = np.ones([1] * (2 * dims), dtype=bool)
    for k, axis in enumerate(axes):
        upper = np.triu(np.ones((axis.size, axis.size), dtype=bool), k=1)
        mask = mask & upper.reshape(_axis_layout(k, dims, axis.size))
    return mask


def _cell_field(field: SampleField) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    """Cell centres per axis and the cell values (average of the 2^n corners)."""
    values = field.values
    for k in range(field.dims):
        lower = np.take(values, np.arange(values.shape[k] - 1), axis=k)
        upper = np.take(values, np.arange(1, values.shape[k]), axis=k)
        values = 0.5 * (lower + upper)
    centres = tuple(0.5 * (axis[1:] + axis[:-1]) for axis in field.axes)
    return centres, values


def analysis_cap(dims: int) -> int:
    """Points per axis allowed on an analysis grid of dimension dims."""
    pair_cap = int(np.floor(MAX_PAIR_ELEMENTS ** (1.0 / (2 * dims)) + 1e-9))
    if dims == 1:
        return min(config.max_path_points, pair_cap)
    return min(config.max_analysis_points_per_axis, pair_cap)


def subsample_field(field: SampleField, max_points_per_axis: Optional[int] = None) -> SampleField:
    """
    Keep every k-th node per axis so at most max_points_per_axis remain.

    k is the smallest divisor of N - 1 that meets the cap, so both endpoints
    stay on the grid.
    """
    cap = max_points_per_axis or analysis_cap(field.dims)
    if cap < 2:
        raise DomainError(f"max_points_per_axis must be at least 2, got {cap}")
    indices = []
    for size in field.grid_sizes:
        intervals = size - 1
        stride = next(d for d in range(1, intervals + 1) if intervals % d == 0 and intervals // d + 1 <= cap)
        indices.append(np.arange(0, size, stride))
    if all(idx.size == size for idx, size in zip(indices, field.grid_sizes)):
        return field
    values = field.values[np.ix_(*indices)]
    logger.debug(f"Subsampled field {field.grid_sizes} -> {values.shape}")
    return SampleField(tuple(uniform_grid(idx.size) for idx in indices), values)


def _check_alphas(field: SampleField, alphas: Sequence[float]) -> Tuple[float, ...]:
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) != field.dims:
        raise DomainError(f"{len(alphas)} exponents for a {field.dims}-parameter field")
    return alphas


def compute_B_field_detail(field: SampleField, alphas: Sequence[float], beta: float,
                           iota: float) -> Tuple[float, float]:
    """
    Midpoint-rule B over all pairs of grid cells, and the degenerate-pair fraction.

    Pairs sharing a cell index on any axis use the integrand value 1.

    Raises:
        IntegrandOverflowError: when the exponent leaves the exp range
    """
    alphas = _check_alphas(field, alphas)
    check_parameters(beta, iota, alphas)
    field = subsample_field(field)
    centres, cells = _cell_field(field)

    with np.errstate(divide="ignore", invalid="ignore"):
        log_inc = np.log(np.abs(_pair_differences(cells)))
        log_gap = sum(alpha * np.log(gap) for alpha, gap in zip(alphas, _gap_arrays(centres)))
        log_ratio = log_inc - log_gap
    degenerate = ~np.isfinite(log_gap)
    with np.errstate(over="ignore"):
        exponent = beta * np.exp(log_ratio / iota)
    exponent = np.where(degenerate | np.isnan(exponent), 0.0, exponent)

    worst = int(np.argmax(exponent))
    if exponent.flat[worst] > MAX_EXPONENT:
        index = np.unravel_index(worst, exponent.shape)
        pair = (tuple(float(centres[k][index[2 * k]]) for k in range(field.dims)),
                tuple(float(centres[k][index[2 * k + 1]]) for k in range(field.dims)))
        raise IntegrandOverflowError(
            f"field B integrand overflows at cells {pair} (exponent {exponent.flat[worst]:.4g})",
            pair=pair, exponent=float(exponent.flat[worst])
        )
    B = float(np.mean(np.exp(exponent)))
    diagonal_fraction = 1.0 - float(np.prod([1.0 - 1.0 / c.size for c in centres]))
    return B, diagonal_fraction


def compute_B_field(field: SampleField, alphas: Sequence[float], beta: float, iota: float) -> float:
    """Field analogue of B with rho_j(u) = u^alpha_j."""
    return compute_B_field_detail(field, alphas, beta, iota)[0]


def field_modulus_bound(deltas: Sequence[float], B: float, beta: float, iota: float,
                        alphas: Sequence[float], nodes: Optional[int] = None) -> float:
    """
    8^n int_0^delta_1 .. int_0^delta_n beta^-iota (log(4^n B / prod u_j^2))^iota prod d(u_j^alpha_j).

    B is floored at 4^-n + B_FLOOR_EPSILON.
    """
    deltas = tuple(float(d) for d in deltas)
    alphas = tuple(float(a) for a in alphas)
    check_parameters(beta, iota, alphas)
    if len(deltas) != len(alphas):
        raise DomainError(f"{len(deltas)} gaps for {len(alphas)} exponents")
    if any(not (0.0 < d <= 1.0) for d in deltas):
        raise DomainError(f"every delta must lie in (0, 1], got {deltas}")
    n = len(alphas)
    B = max(float(B), b_floor(n))
    offset = np.log(4.0 ** n * B) + 2.0 * sum(np.log(1.0 / d) for d in deltas)
    integral = log_power_modulus_integral(offset, iota, alphas, nodes=nodes)
    scale = float(np.prod([d ** a for d, a in zip(deltas, alphas)]))
    return float(8.0 ** n * beta ** (-iota) * scale * integral)


def field_holder_constants(B: float, beta: float, iota: float, alphas: Sequence[float],
                           nodes: Optional[int] = None) -> Tuple[float, float]:
    """(C(omega), C_d) for fields; C(omega) = 0 when B <= 4^-n."""
    return holder_constants_nd(B, beta, iota, alphas, nodes=nodes)


def analyze_field(field: SampleField, grr_config: FieldGrrConfig) -> GrrResult:
    """B and both constants for one field."""
    B, diagonal = compute_B_field_detail(field, grr_config.alphas, grr_config.beta, grr_config.iota)
    c_omega, c_d = field_holder_constants(B, grr_config.beta, grr_config.iota, grr_config.alphas)
    return GrrResult(B=B, C_omega=c_omega, C_d=c_d, beta=grr_config.beta, iota=grr_config.iota,
                     alpha=grr_config.alphas, diagonal_weight=diagonal)


def c_tilde_closed_form(alphas: Sequence[float], iota: float, C_d: float = 1.0) -> float:
    """C_d e^-iota (iota / min alpha)^iota."""
    alpha_min = min(float(a) for a in alphas)
    return float(C_d * np.exp(-iota) * (iota / alpha_min) ** iota)


def _zoom_maximize(fn, lower: np.ndarray, upper: np.ndarray, points: int, zooms: int) -> float:
    """Tensor grid search on a box, refined around the best node."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    best = -np.inf
    for _ in range(zooms):
        axes = [np.linspace(lo, hi, points) for lo, hi in zip(lower, upper)]
        mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
        values = fn(mesh)
        index = np.unravel_index(int(np.argmax(values)), values.shape)
        best = max(best, float(values[index]))
        for k, axis in enumerate(axes):
            width = axis[1] - axis[0]
            centre = axis[index[k]]
            lower[k] = max(lower[k], centre - 2.0 * width)
            upper[k] = min(upper[k], centre + 2.0 * width)
    return best


def c_tilde(alphas: Sequence[float], iota: float, C_d: float) -> float:
    """
    C_d max over [0,1]^n of prod x_j^alpha_j (log 1/prod x_j)^iota.

    With L_j = log(1/x_j) the objective is exp(-sum alpha_j L_j) (sum L_j)^iota;
    for a fixed total L it is largest with all of L on the axis of smallest
    alpha, leaving a 1-D search in L done on a log grid with refinement.
    """
    alphas = tuple(float(a) for a in alphas)
    if not alphas or any(not (0.0 < a <= 1.0) for a in alphas):
        raise DomainError(f"every alpha must lie in (0, 1], got {alphas}")
    if iota <= 0:
        raise DomainError(f"iota must be positive, got {iota}")
    alpha_min = min(alphas)

    def log_objective(mesh):
        log_total = mesh[0]
        return -alpha_min * np.exp(log_total) + iota * log_total

    best = _zoom_maximize(log_objective, np.array([np.log(1e-12)]), np.array([np.log(1e6)]),
                          C_TILDE_POINTS, C_TILDE_ZOOMS)
    return float(C_d * np.exp(best))


def c_tilde_grid_search(alphas: Sequence[float], iota: float, C_d: float = 1.0,
                        points_per_axis: Optional[int] = None) -> float:
    """Brute-force C_tilde on a tensor grid of [0,1]^n with zoom refinement."""
    alphas = tuple(float(a) for a in alphas)
    n = len(alphas)
    points = points_per_axis or min(C_TILDE_POINTS, int(MAX_PAIR_ELEMENTS ** (1.0 / n)))

    def objective(mesh):
        with np.errstate(divide="ignore", invalid="ignore"):
            log_x = [np.log(x) for x in mesh]
            log_product = sum(log_x)
            value = np.exp(sum(a * lx for a, lx in zip(alphas, log_x))) * (-log_product) ** iota
        return np.where(np.isfinite(value), value, 0.0)

    best = _zoom_maximize(objective, np.zeros(n), np.ones(n), points, C_TILDE_ZOOMS)
    return float(C_d * best)


def _node_pairs(field: SampleField):
    """Pair increments, per-axis gaps and the distinct-box mask on the node grid."""
    pairs = np.abs(_pair_differences(field.values))
    gaps = _gap_arrays(field.axes)
    return pairs, gaps, _upper_mask(field.axes)


def _field_report(field: SampleField, pairs: np.ndarray, rhs: np.ndarray, mask: np.ndarray) -> ViolationReport:
    margins = np.where(mask, rhs - pairs, np.inf)
    n_pairs = int(np.count_nonzero(mask))
    violations = int(np.count_nonzero(margins < 0))
    worst = int(np.argmin(margins))
    index = np.unravel_index(worst, margins.shape)
    worst_pair = None
    worst_margin = float("nan")
    if n_pairs:
        worst_margin = float(margins.flat[worst])
        worst_pair = (tuple(float(field.axes[k][index[2 * k + 1]]) for k in range(field.dims)),
                      tuple(float(field.axes[k][index[2 * k]]) for k in range(field.dims)))
    max_increment = float(np.max(np.where(mask, pairs, 0.0))) if n_pairs else 0.0
    return ViolationReport(n_pairs=n_pairs, violations=violations, worst_margin=worst_margin,
                           max_increment=max_increment, worst_pair=worst_pair)


def verify_field_modulus(field: SampleField, result: GrrResult, alphas: Sequence[float],
                         iota: float) -> ViolationReport:
    """
    Check |box| <= C(omega) prod d_j^alpha_j + C_d prod d_j^alpha_j (log 1/prod d_j)^iota
    over node pairs with every gap positive and prod d_j < 1.

    Runs on the same analysis grid that compute_B_field uses.
    """
    alphas = _check_alphas(field, alphas)
    field = subsample_field(field)
    pairs, gaps, mask = _node_pairs(field)
    gap_product = np.prod(np.broadcast_arrays(*gaps), axis=0)
    scale = np.prod(np.broadcast_arrays(*[g ** a for g, a in zip(gaps, alphas)]), axis=0)
    mask = mask & (gap_product < 1.0 - 1e-12)
    with np.errstate(divide="ignore"):
        log_term = np.where(mask, np.log(1.0 / np.where(mask, gap_product, 1.0)), 0.0)
    rhs = result.C_omega * scale + result.C_d * scale * log_term ** iota
    report = _field_report(field, pairs, rhs, mask)
    if not report.passed:
        logger.warning(f"Field modulus bound violated at {report.violations} of {report.n_pairs} boxes")
    return report


def field_limsup_ratio(field: SampleField, alphas: Sequence[float], iota: float) -> float:
    """max |box| / (prod d_j^alpha_j (log 1/prod d_j)^iota) over boxes with every side <= 8 steps."""
    alphas = _check_alphas(field, alphas)
    field = subsample_field(field)
    pairs, gaps, mask = _node_pairs(field)
    for gap, step in zip(gaps, field.steps):
        mask = mask & (gap <= LIMSUP_MAX_LAG * step + 1e-12)
    gap_product = np.prod(np.broadcast_arrays(*gaps), axis=0)
    mask = mask & (gap_product < 1.0 - 1e-12)
    if not np.any(mask):
        return 0.0
    safe_product = np.where(mask, gap_product, 0.5)
    scale = np.prod(np.broadcast_arrays(*[np.where(mask, g, 1.0) ** a for g, a in zip(gaps, alphas)]), axis=0)
    denominator = scale * np.log(1.0 / safe_product) ** iota
    return float(np.max(np.where(mask, pairs / denominator, 0.0)))


def field_sobolev_constant(gammas: Sequence[float], q: float) -> float:
    """8^n prod_j 4^(1/q) (gamma_j + 1/q) / (gamma_j - 1/q)."""
    constant = 8.0 ** len(gammas)
    for gamma in gammas:
        if gamma * q <= 1:
            raise DomainError(f"need gamma_j q > 1 on every axis, got gamma={gamma}, q={q}")
        constant *= 4.0 ** (1.0 / q) * (gamma + 1.0 / q) / (gamma - 1.0 / q)
    return float(constant)


def field_sobolev_bound(field: SampleField, alphas: Sequence[float], epsilon: float) -> FieldSobolevResult:
    """
    Multiparameter Sobolev constant with q = 2/epsilon and gamma_j = alpha_j - epsilon/2,
    plus the check |box| <= C prod d_j^(alpha_j - epsilon) on node pairs.
    """
    alphas = _check_alphas(field, alphas)
    if not (0.0 < epsilon <= 1.0):
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    q = 2.0 / epsilon
    gammas = tuple(a - 0.5 * epsilon for a in alphas)
    c_gamma_q = field_sobolev_constant(gammas, q)

    field = subsample_field(field)
    centres, cells = _cell_field(field)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_terms = q * np.log(np.abs(_pair_differences(cells)))
        for alpha, gap in zip(alphas, _gap_arrays(centres)):
            log_terms = log_terms - (2.0 * alpha / epsilon) * np.log(gap)
    log_terms = np.where(np.isfinite(log_terms), log_terms, -np.inf)
    cell_volume = float(np.prod([c.size for c in centres]))
    integral = float(np.exp(logsumexp(log_terms) - 2.0 * np.log(cell_volume)))
    constant = c_gamma_q * integral ** (1.0 / q)

    pairs, gaps, mask = _node_pairs(field)
    rhs = constant * np.prod(np.broadcast_arrays(*[g ** (a - epsilon) for g, a in zip(gaps, alphas)]), axis=0)
    report = _field_report(field, pairs, rhs, mask)
    return FieldSobolevResult(constant=float(constant), c_gamma_q=c_gamma_q, integral=integral,
                              q=q, gammas=gammas, report=report)


def box_increment_samples(spec: ModelSpec, s: Sequence[float], t: Sequence[float], n_paths: int,
                          grid: Sequence[int], seed: Optional[int] = None,
                          workers: Optional[int] = None) -> np.ndarray:
    """Box increments of n_paths independent fields of spec over the box (s, t)."""
    fields = get_model_manager().sample_batch(spec, grid, n_paths, seed=seed, workers=workers)
    return np.array([box_increment(f, s, t) for f in fields])


def estimate_d_metric(spec: ModelSpec, s: Sequence[float], t: Sequence[float], n_paths: int,
                      grid: Sequence[int] = (17, 17), seed: Optional[int] = None,
                      workers: Optional[int] = None) -> float:
    """
    Monte Carlo d_X(s, t) = sqrt(E |box|^2).

    Raises:
        DomainError: for fewer than 1000 paths
    """
    if n_paths < MIN_D_METRIC_PATHS:
        raise DomainError(f"estimate_d_metric needs at least {MIN_D_METRIC_PATHS} paths, got {n_paths}")
    samples = box_increment_samples(spec, s, t, n_paths, grid, seed=seed, workers=workers)
    return float(np.sqrt(np.mean(samples ** 2)))
