"""
Quadrature for integrals with u^(alpha-1) singularities at the origin.

Every integral the GRR engines need has the form

    int_0^delta F(log(1/u)) alpha u^(alpha-1) du

per axis. Substituting u = delta exp(-y^2 / alpha) turns alpha u^(alpha-1) du
into delta^alpha 2y exp(-y^2) dy and log(1/u) into log(1/delta) + y^2/alpha,
so the nodes are log-spaced in u and the weight is smooth in y. The y-integral
over [0, Y_MAX] is a tensor midpoint rule with one Richardson step; the result
is checked against the same rule on a doubled node count.
"""
import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from config import config
from errors import DomainError, QuadratureError

logger = logging.getLogger(__name__)

# exp(-Y_MAX^2) = exp(-80) is below double-precision resolution of the integrals
Y_MAX = float(np.sqrt(80.0))
MAX_TENSOR_POINTS = 2 ** 22

GaussianIntegrand = Callable[[Tuple[np.ndarray, ...]], np.ndarray]


def default_nodes(dims: int) -> int:
    """Per-axis node count: QUADRATURE_NODES halved for every extra axis."""
    if dims < 1:
        raise DomainError(f"dims must be at least 1, got {dims}")
    return max(16, config.quadrature_nodes // 2 ** (dims - 1))


def _midpoint(fn: GaussianIntegrand, dims: int, nodes: int) -> float:
    h = Y_MAX / nodes
    y = (np.arange(nodes) + 0.5) * h
    weight = 2.0 * y * np.exp(-y * y) * h
    # slabs along the first axis keep each tensor evaluation below MAX_TENSOR_POINTS
    chunk = max(1, MAX_TENSOR_POINTS // nodes ** (dims - 1))
    total = 0.0
    for start in range(0, nodes, chunk):
        head = slice(start, start + chunk)
        mesh = np.meshgrid(y[head], *([y] * (dims - 1)), indexing="ij", sparse=True)
        values = np.asarray(fn(tuple(mesh)), dtype=float)
        for axis in range(dims):
            shape = [1] * dims
            shape[axis] = -1
            values = values * (weight[head] if axis == 0 else weight).reshape(shape)
        total += float(np.sum(values))
    return total


def _richardson(fn: GaussianIntegrand, dims: int, nodes: int) -> float:
    coarse = _midpoint(fn, dims, nodes)
    fine = _midpoint(fn, dims, 2 * nodes)
    return (4.0 * fine - coarse) / 3.0


def gaussian_weight_integral(fn: GaussianIntegrand, dims: int = 1, nodes: Optional[int] = None,
                             tolerance: Optional[float] = None, label: str = "integral") -> float:
    """
    Integrate fn(y_1..y_n) prod_j 2 y_j exp(-y_j^2) over [0, inf)^n.

    Args:
        fn: Vectorised integrand taking a tuple of broadcastable axis arrays
        dims: Number of axes
        nodes: Per-axis nodes of the coarse rule (default from QUADRATURE_NODES)
        tolerance: Allowed relative node-doubling disagreement
        label: Name used in error messages

    Raises:
        QuadratureError: if the estimate on 2x nodes disagrees by more than tolerance
    """
    nodes = nodes or default_nodes(dims)
    tolerance = config.quadrature_tolerance if tolerance is None else tolerance
    coarse = _richardson(fn, dims, nodes)
    fine = _richardson(fn, dims, 2 * nodes)
    if not np.isfinite(fine):
        raise QuadratureError(f"{label} is not finite", coarse=coarse, fine=fine)
    scale = max(abs(fine), np.finfo(float).tiny)
    if abs(fine - coarse) / scale > tolerance:
        raise QuadratureError(
            f"{label} did not converge under node doubling: {coarse!r} vs {fine!r}",
            coarse=coarse, fine=fine
        )
    return fine


def log_moment_integral(iota: float, alphas: Sequence[float], nodes: Optional[int] = None) -> float:
    """
    int_[0,1]^n (sum_j log 1/v_j)^iota prod_j v_j^(alpha_j - 1) dv.

    At n = 1 the closed form is Gamma(iota + 1) / alpha^(iota + 1).
    """
    alphas = tuple(float(a) for a in alphas)
    if iota <= 0:
        raise DomainError(f"iota must be positive, got {iota}")
    if not alphas or any(not (0.0 < a <= 1.0) for a in alphas):
        raise DomainError(f"every alpha must lie in (0, 1], got {alphas}")

    def integrand(ys):
        total = sum(y * y / a for y, a in zip(ys, alphas))
        return total ** iota

    value = gaussian_weight_integral(integrand, dims=len(alphas), nodes=nodes,
                                     label=f"log-moment integral (iota={iota}, alphas={alphas})")
    return value / float(np.prod(alphas))


def log_power_modulus_integral(offset: float, iota: float, alphas: Sequence[float],
                               nodes: Optional[int] = None) -> float:
    """
    int (offset + 2 sum_j y_j^2 / alpha_j)^iota prod_j 2 y_j exp(-y_j^2) dy.

    This is the y-form of int_0^delta (log(K / prod u_j^2))^iota prod d(u_j^alpha_j)
    divided by prod delta_j^alpha_j, with offset = log K + 2 sum_j log(1/delta_j).

    Raises:
        DomainError: if offset is negative (the logarithm would change sign)
    """
    alphas = tuple(float(a) for a in alphas)
    if offset < 0:
        raise DomainError(f"log offset must be non-negative, got {offset}")

    def integrand(ys):
        return (offset + 2.0 * sum(y * y / a for y, a in zip(ys, alphas))) ** iota

    return gaussian_weight_integral(integrand, dims=len(alphas), nodes=nodes,
                                    label=f"modulus integral (offset={offset:.6g}, iota={iota})")
