"""Gauss-Hermite velocity grid, orthonormal Hermite basis and moment transform.

The velocity discretization lives on the 2N Gauss-Hermite nodes for the weight
e^{-v^2}. All basis evaluations carry the exponential weight, i.e. we work with
the Hermite functions H_k(v) = P_k(v) e^{-v^2/2} built from the orthonormal
polynomials P_0 = pi^{-1/4}, P_1 = sqrt(2) pi^{-1/4} v and the three-term
recursion v P_k = alpha_{k+1} P_{k+1} + alpha_k P_{k-1} with alpha_k = sqrt(k/2).
Carrying the weight inside the recursion keeps every table entry representable
for large N, where the raw polynomial values overflow and the raw quadrature
weights underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, lu_factor, lu_solve

__all__ = [
    "MAX_HALF_ORDER",
    "QuadratureRule",
    "HermiteTable",
    "MomentTransform",
    "MomentSet",
    "recursion_coefficients",
    "hermite_functions",
    "build_rule",
    "build_tables",
    "moments",
    "discrete_maxwellian",
]

MAX_HALF_ORDER = 1500


def readonly(*arrays: np.ndarray) -> None:
    """Mark constructed arrays immutable; shared objects must not be written."""
    for array in arrays:
        array.flags.writeable = False


def recursion_coefficients(count: int) -> np.ndarray:
    """Return alpha_k = sqrt(k/2) for k = 1..count."""
    return np.sqrt(np.arange(1, count + 1) / 2.0)


def hermite_functions(points, count: int) -> np.ndarray:
    """Evaluate the Hermite functions H_k at arbitrary points.

    Returns the (count, len(points)) table H[k, i] = P_k(x_i) e^{-x_i^2/2}.
    The recursion runs on dynamically rescaled values so that intermediate
    polynomial magnitudes never overflow; entries whose true size is below
    the double-precision range come out as an honest zero.
    """
    x = np.atleast_1d(np.asarray(points, dtype=float))
    out = np.empty((count, x.size))
    log_scale = -0.5 * x * x - 0.25 * np.log(np.pi)
    u_prev = np.zeros_like(x)
    u = np.ones_like(x)
    with np.errstate(under="ignore"):
        out[0] = u * np.exp(log_scale)
        alpha = recursion_coefficients(count)
        for k in range(count - 1):
            a_k = alpha[k - 1] if k >= 1 else 0.0
            u, u_prev = (x * u - a_k * u_prev) / alpha[k], u
            mag = np.maximum(np.abs(u), np.abs(u_prev))
            mag[mag == 0.0] = 1.0
            u /= mag
            u_prev /= mag
            log_scale += np.log(mag)
            out[k + 1] = u * np.exp(log_scale)
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule with 2N nodes for the weight e^{-v^2}.

    ``scaled_weights`` holds w_i e^{v_i^2}; this is the combination entering the
    discrete Maxwellian and the only form that stays representable at large N.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray

    @property
    def half(self) -> int:
        """N, the number of positive velocities."""
        return self.order // 2


def build_rule(N: int) -> QuadratureRule:
    """Build the 2N-point Gauss-Hermite rule by the Golub-Welsch construction.

    Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix with
    off-diagonal alpha_k = sqrt(k/2); weights are sqrt(pi) times the squared
    first components of the normalized eigenvectors, evaluated through the
    stable identity w_i e^{v_i^2} = 1 / sum_k H_k(v_i)^2.
    """
    if not isinstance(N, (int, np.integer)) or not 1 <= N <= MAX_HALF_ORDER:
        raise ValueError(f"N must be an integer in [1, {MAX_HALF_ORDER}], got {N!r}")
    order = 2 * N
    offdiag = recursion_coefficients(order - 1)
    nodes = eigh_tridiagonal(np.zeros(order), offdiag, eigvals_only=True)
    nodes = 0.5 * (nodes - nodes[::-1])  # enforce exact +- symmetry
    table = hermite_functions(nodes, order)
    scaled = 1.0 / np.einsum("ki,ki->i", table, table)
    scaled = 0.5 * (scaled + scaled[::-1])
    with np.errstate(under="ignore"):
        weights = scaled * np.exp(-nodes * nodes)
    readonly(nodes, weights, scaled)
    return QuadratureRule(order, nodes, weights, scaled)


@dataclass(frozen=True)
class HermiteTable:
    """Orthonormal Hermite basis evaluated at the quadrature nodes.

    ``values[k, i]`` is the pre-weighted H_k(v_i); ``alpha`` holds the
    recursion coefficients alpha_1..alpha_{2N}.
    """

    nodes: np.ndarray
    alpha: np.ndarray
    values: np.ndarray

    def polynomial_values(self) -> np.ndarray:
        """Raw P_k(v_i) table. Overflows for N larger than a few hundred."""
        return self.values * np.exp(0.5 * self.nodes * self.nodes)


@dataclass(frozen=True)
class MomentTransform:
    """The invertible map between nodal values f_i and moments g_k = sum_i H_k(v_i) f_i."""

    matrix: np.ndarray
    factorization: tuple

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Forward transform G = S f (f may carry trailing/leading batch axes)."""
        return self.matrix @ f

    def solve(self, g: np.ndarray) -> np.ndarray:
        """Inverse transform f = S^{-1} g through the stored LU factorization."""
        return lu_solve(self.factorization, g)


def build_tables(rule: QuadratureRule) -> tuple[HermiteTable, MomentTransform]:
    """Evaluate the basis at the rule's nodes and factorize the moment transform."""
    values = hermite_functions(rule.nodes, rule.order)
    alpha = recursion_coefficients(rule.order)
    factorization = lu_factor(values)  # copies; values stay pristine
    readonly(values, alpha)
    table = HermiteTable(rule.nodes, alpha, values)
    transform = MomentTransform(values, factorization)
    return table, transform


@dataclass(frozen=True)
class MomentSet:
    """Moment vector g_0..g_{2N-1} with the derived macroscopic quantities."""

    g: np.ndarray

    @property
    def rho(self) -> float:
        return np.sqrt(2.0) * self.g[0]

    @property
    def q(self) -> float:
        return np.sqrt(2.0) * self.g[1]

    @property
    def S(self) -> float:
        return 2.0 * self.g[2] + self.rho

    @property
    def h(self) -> float:
        """Third-order moment, 3 q + 2 sqrt(3) g_3."""
        return 3.0 * self.q + 2.0 * np.sqrt(3.0) * self.g[3]


def moments(f: np.ndarray, transform: MomentTransform) -> MomentSet:
    """Moments of a nodal distribution vector."""
    f = np.asarray(f, dtype=float)
    n = transform.matrix.shape[0]
    if f.shape != (n,):
        raise ValueError(f"expected distribution of length {n}, got shape {f.shape}")
    return MomentSet(transform.apply(f))


def discrete_maxwellian(g0: float, g1: float, g2: float,
                        rule: QuadratureRule, table: HermiteTable) -> np.ndarray:
    """Discrete linearized Maxwellian M_i = w_i e^{v_i^2} sum_{k<3} H_k(v_i) g_k.

    By discrete orthogonality its moments reproduce (g0, g1, g2) and annihilate
    g_3..g_{2N-1}.
    """
    if rule.order < 4:
        raise ValueError("discrete Maxwellian needs at least N = 2 (four velocities)")
    h = table.values
    return rule.scaled_weights * (h[0] * g0 + h[1] * g1 + h[2] * g2)
