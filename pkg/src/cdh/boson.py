"""Bosonic-mode primitives: displacement matrix elements, Hermite functions,
Gauss-Hermite quadrature, and the two interchangeable routes to polaron-rotated
operator blocks (spectral decomposition and momentum-space integration).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class FockTruncation:
    """Number of retained Fock states, enumerated 0..levels-1."""

    levels: int

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError(f"need at least one Fock level, got {self.levels}")


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite nodes/weights for integrals against exp(-x^2)."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.nodes)


def ladder(levels: int) -> np.ndarray:
    """Annihilation operator on a truncated Fock space."""
    a = np.zeros((levels, levels), dtype=complex)
    for n in range(1, levels):
        a[n - 1, n] = math.sqrt(n)
    return a


def number_operator(levels: int) -> np.ndarray:
    return np.diag(np.arange(levels, dtype=float)).astype(complex)


def displacement_element(s: int, r: int, alpha: float) -> float:
    """Exact Fock matrix element <s|D(alpha)|r> of the displacement operator
    D(alpha) = exp(alpha a^dag - alpha a), for real alpha.

    Uses the associated-Laguerre closed form with the factorial ratio in log
    space, stable up to indices of a few hundred.
    """
    if s < 0 or r < 0:
        raise ValueError(f"Fock indices must be non-negative, got ({s}, {r})")
    if not math.isfinite(alpha):
        raise ValueError(f"displacement amplitude must be finite, got {alpha}")
    if s < r:
        # <s|D(a)|r> = <r|D(-a)|s> for real a
        s, r, alpha = r, s, -alpha
    m = s - r
    x = alpha * alpha
    # forward recurrence for L_r^(m)(x)
    lk_prev, lk = 0.0, 1.0
    for k in range(r):
        lk_prev, lk = lk, ((2 * k + 1 + m - x) * lk - (k + m) * lk_prev) / (k + 1)
    log_ratio = 0.5 * (math.lgamma(r + 1) - math.lgamma(s + 1))
    scale = math.exp(log_ratio - 0.5 * x)
    return scale * alpha ** m * lk


def displacement_matrix(levels: int, alpha: float) -> np.ndarray:
    """Entrywise-exact projection of D(alpha) onto the lowest Fock levels."""
    mat = np.empty((levels, levels))
    for s in range(levels):
        for r in range(levels):
            mat[s, r] = displacement_element(s, r, alpha)
    return mat


def displacement_unitary(levels: int, alpha: float) -> np.ndarray:
    """exp(alpha (a^dag - a)) on the truncated Fock space.

    Unlike `displacement_matrix` this is exactly unitary for any truncation,
    at the price of matrix elements that only converge to the exact ones as
    the truncation grows.
    """
    a = ladder(levels)
    return scipy.linalg.expm(alpha * (a.conj().T - a)).real


def hermite_function(n: int, x: float) -> float:
    """Orthonormal Hermite function phi_n(x) = H_n(x) exp(-x^2/2) / sqrt(sqrt(pi) 2^n n!)."""
    if n < 0:
        raise ValueError(f"order must be non-negative, got {n}")
    phi_prev = math.pi ** -0.25 * math.exp(-x * x / 2)
    if n == 0:
        return phi_prev
    phi = math.sqrt(2.0) * x * phi_prev
    for k in range(1, n):
        phi_prev, phi = phi, math.sqrt(2.0 / (k + 1)) * x * phi - math.sqrt(k / (k + 1.0)) * phi_prev
    return phi


def gauss_hermite(order: int) -> QuadratureRule:
    """Gauss-Hermite rule: sum_q w_q f(x_q) ~ integral f(x) exp(-x^2) dx."""
    if order < 1:
        raise ValueError(f"quadrature order must be positive, got {order}")
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    return QuadratureRule(nodes=nodes, weights=weights)


def _coupling_eigenbasis(coupling_op: np.ndarray):
    evals, vecs = np.linalg.eigh(coupling_op)
    return evals, vecs


def polaron_block_by_spectrum(
    system_op: np.ndarray,
    coupling_op: np.ndarray,
    epsilon: float,
    s: int,
    r: int,
) -> np.ndarray:
    """(s, r) Fock block of U_P O U_P^dag via the spectral decomposition of the
    coupling operator, U_P = sum_k |k><k| x D(epsilon s_k).

    Exact up to floating point: each block reduces to a single displacement
    element per eigenvalue pair.
    """
    evals, vecs = _coupling_eigenbasis(coupling_op)
    op_eig = vecs.conj().T @ system_op @ vecs
    diffs = epsilon * (evals[:, None] - evals[None, :])
    elems = np.empty_like(diffs)
    for i in range(diffs.shape[0]):
        for j in range(diffs.shape[1]):
            elems[i, j] = displacement_element(s, r, diffs[i, j])
    return vecs @ (op_eig * elems) @ vecs.conj().T


def polaron_block_by_quadrature(
    system_op: np.ndarray,
    coupling_op: np.ndarray,
    epsilon: float,
    s: int,
    r: int,
    rule: QuadratureRule,
    self_check: bool = True,
) -> np.ndarray:
    """(s, r) Fock block of U_P O U_P^dag as a momentum-space integral.

    Integrand: i^(s-r) phi_s(x) phi_r(x) e^(x^2) U(x) O U(x)^dag with
    U(x) = exp(-i sqrt(2) epsilon x S); the quadrature weight absorbs the
    e^(-x^2) produced by the two Hermite-function Gaussians. The phase
    prefactor makes the result match `polaron_block_by_spectrum` exactly.
    """
    evals, vecs = _coupling_eigenbasis(coupling_op)
    op_eig = vecs.conj().T @ system_op @ vecs

    def run(quad: QuadratureRule) -> np.ndarray:
        acc = np.zeros_like(op_eig)
        for x, w in zip(quad.nodes, quad.weights):
            phases = np.exp(-1j * math.sqrt(2.0) * epsilon * x * evals)
            rotated = (phases[:, None] * op_eig) * phases.conj()[None, :]
            acc = acc + w * hermite_function(s, x) * hermite_function(r, x) * math.exp(x * x) * rotated
        return (1j) ** (s - r) * (vecs @ acc @ vecs.conj().T)

    block = run(rule)
    if self_check:
        finer = run(gauss_hermite(rule.order + 8))
        drift = float(np.abs(block - finer).max())
        if drift > 1e-9:
            warnings.warn(
                f"quadrature order {rule.order} may be too coarse: refining by 8 nodes "
                f"moved the block by {drift:.2e}",
                stacklevel=2,
            )
    return block


def default_quadrature_order(rotation_levels: int) -> int:
    """Order with headroom for blocks up to the given Fock truncation."""
    return 2 * rotation_levels + 16
