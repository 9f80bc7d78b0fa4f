"""Discrete half-space layer ODE: tridiagonal system, stable manifold, lift.

The interface-layer moments g = (g_4, ..., g_{2N-1}) obey the linear ODE
sqrt(2) A dg/dx = -g with A the symmetric tridiagonal matrix of recursion
coefficients alpha_5..alpha_{2N-1} and zero diagonal. Bounded solutions on
[0, inf) live on the span of the eigenvectors with positive eigenvalue; the
lift matrix maps the reduced unknowns (D, C, B, gamma) of a layer solution to
the full moment vector at x = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .hermite import readonly

__all__ = [
    "LayerMatrix",
    "LayerSpectrum",
    "LiftMatrix",
    "build_layer_matrix",
    "stable_manifold",
    "build_lift",
    "layer_profile",
]


@dataclass(frozen=True)
class LayerMatrix:
    """Symmetric tridiagonal layer matrix of dimension 2(N-2), zero diagonal."""

    dim: int
    offdiag: np.ndarray

    def dense(self) -> np.ndarray:
        a = np.zeros((self.dim, self.dim))
        idx = np.arange(self.dim - 1)
        a[idx, idx + 1] = self.offdiag
        a[idx + 1, idx] = self.offdiag
        return a


@dataclass(frozen=True)
class LayerSpectrum:
    """Eigen-decomposition of a LayerMatrix with the stable manifold extracted.

    Eigenvalues are ascending; ``R2plus`` stacks the eigenvectors of the N-2
    positive eigenvalues (ascending), each flipped so its first nonzero
    component is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    positive_indices: np.ndarray
    R2plus: np.ndarray

    @property
    def positive_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.positive_indices]


@dataclass(frozen=True)
class LiftMatrix:
    """2N x (N+1) map from (D, C, B, gamma) to the moment vector at x = 0."""

    matrix: np.ndarray


def build_layer_matrix(N: int) -> LayerMatrix:
    """Layer matrix for 2N velocities; rejects N < 4 where the system degenerates."""
    if N < 4:
        raise ValueError(f"layer system needs N >= 4, got {N}")
    offdiag = np.sqrt(np.arange(5, 2 * N) / 2.0)
    readonly(offdiag)
    return LayerMatrix(2 * (N - 2), offdiag)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # First *nonzero* component positive: leading components of high-eigenvalue
    # eigenvectors underflow to exact zeros at large N and must be skipped.
    for j in range(vectors.shape[1]):
        nz = np.flatnonzero(vectors[:, j])
        if nz.size and vectors[nz[0], j] < 0.0:
            vectors[:, j] = -vectors[:, j]
    return vectors


def stable_manifold(matrix: LayerMatrix) -> LayerSpectrum:
    """Full spectrum of the layer matrix and the positive-eigenvalue basis."""
    try:
        lam, vec = scipy.linalg.eigh_tridiagonal(np.zeros(matrix.dim), matrix.offdiag)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(
            f"tridiagonal eigensolver failed for layer matrix of size {matrix.dim}"
        ) from exc
    vec = _fix_signs(vec)
    positive = np.flatnonzero(lam > 0.0)
    expected = matrix.dim // 2
    if positive.size != expected:
        raise NumericalError(
            f"expected {expected} positive layer eigenvalues, found {positive.size}"
        )
    r2plus = vec[:, positive]
    readonly(lam, vec, positive, r2plus)
    return LayerSpectrum(lam, vec, positive, r2plus)


def build_lift(spectrum: LayerSpectrum, N: int) -> LiftMatrix:
    """Assemble the lift from (D, C, B, gamma) to (g_0, ..., g_{2N-1}) at x = 0."""
    r2 = spectrum.R2plus
    if r2.shape != (2 * (N - 2), N - 2):
        raise ValueError(f"spectrum has shape {r2.shape}, inconsistent with N={N}")
    e1r = r2[0, :]
    T = np.zeros((2 * N, N + 1))
    T[0, 2] = 1.0 / np.sqrt(2.0)                   # g0 = B/sqrt2 + (2 sqrt2/sqrt3) g4
    T[0, 3:] = (2.0 * np.sqrt(2.0) / np.sqrt(3.0)) * e1r
    T[1, 1] = 1.0 / np.sqrt(2.0)                   # g1 = C/sqrt2
    T[2, 0] = 0.5                                  # g2 = (D-B)/2 - (2/sqrt3) g4
    T[2, 2] = -0.5
    T[2, 3:] = -(2.0 / np.sqrt(3.0)) * e1r
    # g3 row stays zero: bounded layers force g3 = 0
    T[4:, 3:] = r2
    readonly(T)
    return LiftMatrix(T)


def layer_profile(gamma: np.ndarray, x: float, spectrum: LayerSpectrum) -> np.ndarray:
    """Layer moments at depth x >= 0: g(x) = sum_i gamma_i r_i exp(-x/(sqrt2 lambda_i))."""
    if x < 0:
        raise ValueError(f"layer coordinate must be nonnegative, got {x}")
    gamma = np.asarray(gamma, dtype=float)
    lam = spectrum.positive_eigenvalues
    if gamma.shape != lam.shape:
        raise ValueError(f"gamma has shape {gamma.shape}, expected {lam.shape}")
    return spectrum.R2plus @ (gamma * np.exp(-x / (np.sqrt(2.0) * lam)))
