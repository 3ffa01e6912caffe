"""Finite-dimensional operator algebra for spin chains coupled to a cavity.

Conventions used throughout the package:

* spin basis: sigma_z eigenbasis with up = (1, 0), sigma_z|up> = +|up>,
* site 0 is the leftmost Kronecker factor of the chain,
* the cavity factor, when present, is the outermost (leftmost) factor,
  so a full operator acts on (cavity levels) x (2**L chain states).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12

_PAULI = {
    "identity": np.eye(2, dtype=complex),
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


@dataclass(frozen=True)
class ChainGeometry:
    """A 1D chain of spin-1/2 sites."""

    length: int
    periodic: bool = True

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"chain length must be positive, got {self.length}")

    @property
    def dim(self) -> int:
        return 2 ** self.length


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for axis in {x, y, z, identity}."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with block-of-b layout; dimensions multiply."""
    return np.kron(a, b)


def hermiticity_defect(mat: np.ndarray) -> float:
    """Max-norm of (H - H^dagger)."""
    return float(np.abs(mat - mat.conj().T).max())


def is_hermitian(mat: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return mat.shape[0] == mat.shape[1] and hermiticity_defect(mat) < tol


def assert_hermitian(mat: np.ndarray, tol: float = HERMITICITY_TOL, what: str = "operator") -> np.ndarray:
    """Validate the Hermiticity invariant, returning the matrix unchanged."""
    defect = hermiticity_defect(mat)
    if not np.isfinite(mat).all():
        raise ValueError(f"{what} contains non-finite entries")
    if defect >= tol:
        raise ValueError(f"{what} is not Hermitian: max|H - H^dag| = {defect:.3e} >= {tol:.0e}")
    return mat


def site_operator(op: np.ndarray, site: int, geometry: ChainGeometry) -> np.ndarray:
    """Embed a 2x2 operator at `site`, identity elsewhere, over sites 0..L-1."""
    length = geometry.length
    if not 0 <= site < length:
        raise IndexError(f"site {site} out of range for chain of length {length}")
    eye_left = np.eye(2 ** site)
    eye_right = np.eye(2 ** (length - site - 1))
    return np.kron(eye_left, np.kron(op, eye_right))


def two_site_operator(op_a: np.ndarray, op_b: np.ndarray, site: int, geometry: ChainGeometry) -> np.ndarray:
    """Embed op_a at `site` and op_b at the neighbouring site (site+1) mod L.

    The wrap-around bond (L-1, 0) is only available on periodic chains.
    """
    length = geometry.length
    if not 0 <= site < length:
        raise IndexError(f"site {site} out of range for chain of length {length}")
    if site == length - 1 and not geometry.periodic:
        raise ValueError("wrap-around bond requested on an open chain")
    return site_operator(op_a, site, geometry) @ site_operator(op_b, (site + 1) % length, geometry)


def sum_site_operator(op: np.ndarray, geometry: ChainGeometry) -> np.ndarray:
    """Sum of a single-site operator over all sites."""
    total = np.zeros((geometry.dim, geometry.dim), dtype=complex)
    for i in range(geometry.length):
        total += site_operator(op, i, geometry)
    return total


def sum_bond_operator(op_a: np.ndarray, op_b: np.ndarray, geometry: ChainGeometry) -> np.ndarray:
    """Sum of op_a(i) op_b(i+1) over all bonds (L bonds when periodic, else L-1)."""
    bonds = geometry.length if geometry.periodic else geometry.length - 1
    total = np.zeros((geometry.dim, geometry.dim), dtype=complex)
    for i in range(bonds):
        total += two_site_operator(op_a, op_b, i, geometry)
    return total


def partial_trace_half_chain(rho: np.ndarray, length: int, cavity_levels: int = 1) -> np.ndarray:
    """Reduced density matrix of the first L/2 sites of a chain.

    `rho` is a density matrix over (cavity_levels x 2**L) states, cavity
    factor outermost; the cavity (if present) is traced out together with
    the second half of the chain. Requires even L and unit trace.
    """
    if length % 2 != 0:
        raise ValueError(f"half-chain partial trace needs an even chain length, got {length}")
    dim = cavity_levels * 2 ** length
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix shape {rho.shape} does not match {(dim, dim)}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"density matrix trace {tr:.12f} is not 1 within 1e-10")
    da = 2 ** (length // 2)
    db = 2 ** (length - length // 2)
    work = rho.reshape(cavity_levels, da, db, cavity_levels, da, db)
    # trace over the cavity index and the second half of the chain
    return np.einsum("cabcxb->ax", work)


def reduced_half_chain_from_state(psi: np.ndarray, length: int, cavity_levels: int = 1) -> np.ndarray:
    """Reduced density matrix of the first L/2 sites from a pure state vector."""
    if length % 2 != 0:
        raise ValueError(f"half-chain partial trace needs an even chain length, got {length}")
    da = 2 ** (length // 2)
    db = 2 ** (length - length // 2)
    # fold the cavity into the traced-out side: indices (c, a, b) -> (a, c*b)
    mat = np.transpose(psi.reshape(cavity_levels, da, db), (1, 0, 2)).reshape(da, cavity_levels * db)
    return mat @ mat.conj().T
