"""
Exact-covariance samplers on uniform grids.

Paths are drawn by a dense Cholesky factor of the covariance of
(X_{t_1}, ..., X_{t_{N-1}}), t_i > 0, with X_0 = 0 prepended. The fBm sheet
covariance is a product of per-axis fBm covariances, so its factor is the
Kronecker product of the per-axis factors and a sample is L1 Z L2^T.
"""
import logging
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import linalg

from config import config
from errors import DomainError, NumericalError, SimulationError
from montecarlo import make_rng
from .base_model import SampleField, SamplePath, uniform_grid

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _check_hurst(hurst: float) -> None:
    if not (0.0 < hurst < 1.0):
        raise DomainError(f"Hurst parameter must lie in (0, 1), got {hurst}")


def _check_path_points(n_points: int, cap: int) -> None:
    if n_points < 2:
        raise DomainError(f"n_points must be at least 2, got {n_points}")
    if n_points > cap:
        raise DomainError(f"n_points={n_points} exceeds the dense Cholesky cap of {cap}")


def fbm_covariance(s: ArrayLike, t: ArrayLike, hurst: float) -> ArrayLike:
    """
    fBm covariance 1/2 (t^{2H} + s^{2H} - |t - s|^{2H}).

    Raises:
        DomainError: if H is outside (0, 1) or a time is outside [0, 1]
    """
    _check_hurst(hurst)
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any((s_arr < 0) | (s_arr > 1)) or np.any((t_arr < 0) | (t_arr > 1)):
        raise DomainError("times must lie in [0, 1]")
    two_h = 2.0 * hurst
    cov = 0.5 * (t_arr ** two_h + s_arr ** two_h - np.abs(t_arr - s_arr) ** two_h)
    return float(cov) if cov.ndim == 0 else cov


def fbm_covariance_matrix(times: np.ndarray, hurst: float) -> np.ndarray:
    """Covariance matrix of fBm at the given times."""
    times = np.asarray(times, dtype=float)
    return fbm_covariance(times[:, None], times[None, :], hurst)


def cholesky_factor(cov: np.ndarray, label: str = "covariance") -> np.ndarray:
    """
    Lower Cholesky factor after adding jitter * max(diag) to the diagonal.

    Raises:
        SimulationError: if the jittered matrix is still not positive definite
    """
    cov = np.asarray(cov, dtype=float)
    jitter = config.cholesky_jitter * float(np.max(np.diag(cov)))
    try:
        return linalg.cholesky(cov + jitter * np.eye(cov.shape[0]), lower=True)
    except linalg.LinAlgError as e:
        min_eig = float(np.min(linalg.eigvalsh(cov)))
        raise SimulationError(
            f"{label} of size {cov.shape[0]} is not positive definite after jitter {jitter:.3g} "
            f"(smallest eigenvalue {min_eig:.3g}): {e}"
        )


@lru_cache(maxsize=8)
def _fbm_factor(n_points: int, hurst: float) -> np.ndarray:
    times = uniform_grid(n_points)[1:]
    factor = cholesky_factor(fbm_covariance_matrix(times, hurst), label=f"fBm(H={hurst}) covariance")
    factor.setflags(write=False)
    logger.debug(f"Factorized fBm covariance: n_points={n_points}, H={hurst}")
    return factor


def sample_fbm(n_points: int, hurst: float, seed: int) -> SamplePath:
    """
    Sample fBm on the uniform grid of n_points nodes of [0, 1].

    The same (n_points, hurst, seed) always returns a bitwise-identical path.
    """
    _check_hurst(hurst)
    _check_path_points(n_points, config.max_path_points)
    factor = _fbm_factor(int(n_points), float(hurst))
    noise = make_rng(seed).standard_normal(n_points - 1)
    values = np.concatenate(([0.0], factor @ noise))
    return SamplePath(uniform_grid(n_points), values)


def hermite(n: int, x: ArrayLike) -> ArrayLike:
    """
    Probabilists' Hermite polynomial He_n by the three-term recurrence.

    He_0 = 1, He_1 = x, He_{k+1} = x He_k - k He_{k-1}.
    """
    return scaled_hermite(n, x, 1.0)


def scaled_hermite(n: int, x: ArrayLike, variance: ArrayLike) -> ArrayLike:
    """
    v^{n/2} He_n(x / sqrt(v)), computed without division.

    Recurrence P_{k+1} = x P_k - k v P_{k-1}; at v = 0 this is x^n.

    Raises:
        DomainError: for negative orders
        NumericalError: when the result overflows
    """
    if n < 0:
        raise DomainError(f"Hermite order must be non-negative, got {n}")
    x_arr = np.asarray(x, dtype=float)
    v_arr = np.asarray(variance, dtype=float)
    previous = np.ones(np.broadcast(x_arr, v_arr).shape)
    current = x_arr * np.ones_like(previous)
    if n == 0:
        result = previous
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(1, n):
                previous, current = current, x_arr * current - k * v_arr * previous
        result = current
    if not np.all(np.isfinite(result)):
        raise NumericalError(f"Hermite polynomial of order {n} overflowed")
    return float(result) if result.ndim == 0 else result


def wick_power(path: SamplePath, order: int, hurst: float) -> SamplePath:
    """Y_t = t^{nH} He_n(X_t / t^H) for t > 0 and Y_0 = 0."""
    variance = path.grid_points ** (2.0 * hurst)
    values = scaled_hermite(order, path.values, variance)
    values = np.asarray(values, dtype=float).copy()
    values[0] = 0.0
    return SamplePath(path.grid_points, values)


def sample_wick_chaos(n_points: int, order: int, hurst: float, seed: int) -> SamplePath:
    """
    Wick power of order n of a sampled fBm path.

    Order 1 returns the underlying fBm path exactly.
    """
    if order < 1:
        raise DomainError(f"chaos order must be at least 1, got {order}")
    base = sample_fbm(n_points, hurst, seed)
    if order == 1:
        return base
    return wick_power(base, order, hurst)


def sample_fbm_sheet(n1: int, n2: int, hurst1: float, hurst2: float, seed: int) -> SampleField:
    """
    Centered Gaussian field with Cov(X_s, X_t) = R_H1(s1, t1) R_H2(s2, t2).

    Values vanish on the coordinate axes.
    """
    _check_hurst(hurst1)
    _check_hurst(hurst2)
    cap = config.max_field_points_per_axis
    _check_path_points(n1, cap)
    _check_path_points(n2, cap)
    factor1 = _fbm_factor(int(n1), float(hurst1))
    factor2 = _fbm_factor(int(n2), float(hurst2))
    noise = make_rng(seed).standard_normal((n1 - 1, n2 - 1))
    values = np.zeros((n1, n2))
    values[1:, 1:] = factor1 @ noise @ factor2.T
    return SampleField((uniform_grid(n1), uniform_grid(n2)), values)
