"""Cavity-dressed Hamiltonian builders.

Models in scope: the quantum Rabi model

    H = Delta sigma_z + Omega a^dag a + lam sigma_x (a^dag + a)

and the Dicke-Heisenberg chain

    H = Delta sum_i sigma_z_i + Omega a^dag a
        + (lam / sqrt(L)) sum_i sigma_x_i (a^dag + a)
        + sum_i sum_a gamma_a sigma_a_i sigma_a_{i+1}

with periodic bonds by default. Positive gamma is antiferromagnetic in this
sign convention.

The entangling transformation U_P = exp[(lam_eff/Omega) S (a^dag - a)] maps H
to blocks indexed by cavity Fock numbers; truncating to the lowest `M` levels
gives a compact Hermitian matrix of dimension M * d_system whose spectrum
converges quickly to the exact one even at strong coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cdh.boson import displacement_element, ladder, number_operator
from cdh.operators import (
    ChainGeometry,
    assert_hermitian,
    pauli,
    sum_bond_operator,
    sum_site_operator,
)


@dataclass(frozen=True)
class RabiModel:
    """Single spin coupled to one cavity mode."""

    delta: float
    omega: float
    lam: float

    def __post_init__(self):
        _validate_energies(self.omega, self.lam)

    @property
    def epsilon(self) -> float:
        """Scaled coupling lam/Omega."""
        return self.lam / self.omega

    @property
    def delta_tilde(self) -> float:
        """Suppressed spin splitting Delta exp(-2 epsilon^2)."""
        return self.delta * math.exp(-2.0 * self.epsilon ** 2)

    @property
    def system_dim(self) -> int:
        return 2


@dataclass(frozen=True)
class DickeHeisenbergModel:
    """Heisenberg chain coupled collectively to one cavity mode."""

    delta: float
    omega: float
    lam: float
    gamma: tuple[float, float, float] = (0.0, 0.0, 0.0)
    geometry: ChainGeometry = ChainGeometry(length=8, periodic=True)

    def __post_init__(self):
        _validate_energies(self.omega, self.lam)
        if len(self.gamma) != 3:
            raise ValueError("gamma must be (gamma_x, gamma_y, gamma_z)")
        if any(g != 0.0 for g in self.gamma) and self.geometry.length < 2:
            raise ValueError("two-body couplings need a chain of length >= 2")

    @property
    def epsilon(self) -> float:
        """Scaled coupling lam/(Omega sqrt(L))."""
        return self.lam / (self.omega * math.sqrt(self.geometry.length))

    @property
    def delta_tilde(self) -> float:
        return self.delta * math.exp(-2.0 * self.epsilon ** 2)

    @property
    def system_dim(self) -> int:
        return self.geometry.dim


ModelSpec = RabiModel | DickeHeisenbergModel


@dataclass(frozen=True)
class Truncation:
    """The three truncation knobs.

    cdh_levels: cavity sectors kept in the dressed Hamiltonian (M),
    rotation_levels: cavity dimension used to rotate observables (M_P >= M),
    bare_levels: Fock cutoff of the untransformed oracle Hamiltonian (N).
    """

    cdh_levels: int
    rotation_levels: int
    bare_levels: int

    def __post_init__(self):
        if not self.cdh_levels >= 1:
            raise ValueError("cdh_levels must be >= 1")
        if self.rotation_levels < self.cdh_levels:
            raise ValueError("rotation_levels must be >= cdh_levels")
        if self.bare_levels < 1:
            raise ValueError("bare_levels must be >= 1")


@dataclass(frozen=True)
class DressingValues:
    """Coefficients mixing yy/zz bonds and generating yz+zy cross terms."""

    epsilon: float
    f: tuple[float, float, float]
    g: tuple[float, float, float]
    h: float
    v: float
    w: float


def _validate_energies(omega: float, lam: float) -> None:
    if omega <= 0:
        raise ValueError(f"cavity frequency must be positive, got {omega}")
    if lam < 0:
        raise ValueError(f"coupling strength must be non-negative, got {lam}")


def system_hamiltonian(model: ModelSpec) -> np.ndarray:
    """The matter Hamiltonian without any cavity terms."""
    if isinstance(model, RabiModel):
        return model.delta * pauli("z")
    geo = model.geometry
    h = model.delta * sum_site_operator(pauli("z"), geo)
    for g, axis in zip(model.gamma, "xyz"):
        if g != 0.0:
            h = h + g * sum_bond_operator(pauli(axis), pauli(axis), geo)
    return h


def coupling_operator(model: ModelSpec) -> np.ndarray:
    """The matter operator S entering lam_eff S (a^dag + a)."""
    if isinstance(model, RabiModel):
        return pauli("x")
    return sum_site_operator(pauli("x"), model.geometry)


def coupling_strength(model: ModelSpec) -> float:
    """lam for the Rabi model, lam/sqrt(L) for chains."""
    if isinstance(model, RabiModel):
        return model.lam
    return model.lam / math.sqrt(model.geometry.length)


def squared_coupling_prefactor(model: ModelSpec) -> float:
    """Prefactor of the -S^2 term generated by the transformation."""
    if isinstance(model, RabiModel):
        return model.lam ** 2 / model.omega
    return model.lam ** 2 / (model.omega * model.geometry.length)


def build_bare(model: ModelSpec, bare_levels: int) -> np.ndarray:
    """Untransformed Hamiltonian with the cavity truncated to `bare_levels`.

    Slowly convergent at strong coupling; used as the large-N oracle.
    """
    if bare_levels < 1:
        raise ValueError("bare_levels must be >= 1")
    h_s = system_hamiltonian(model)
    s_op = coupling_operator(model)
    d = h_s.shape[0]
    a = ladder(bare_levels)
    h = (
        np.kron(np.eye(bare_levels), h_s)
        + model.omega * np.kron(number_operator(bare_levels), np.eye(d))
        + coupling_strength(model) * np.kron(a + a.conj().T, s_op)
    )
    return assert_hermitian(h, what="bare Hamiltonian")


def _displacement_weights(evals: np.ndarray, epsilon: float, s: int, r: int) -> np.ndarray:
    """Matrix of <s|D(epsilon (a_i - a_j))|r> over eigenvalue pairs.

    Eigenvalues are rounded to collapse the integer spectra of the couplings
    in scope, so each distinct difference is evaluated once.
    """
    rounded = np.round(evals, 9)
    diffs = epsilon * (rounded[:, None] - rounded[None, :])
    values, inverse = np.unique(diffs, return_inverse=True)
    table = np.array([displacement_element(s, r, float(v)) for v in values])
    return table[inverse].reshape(diffs.shape)


def build_cdh_generic(model: ModelSpec, cdh_levels: int) -> np.ndarray:
    """Cavity-dressed Hamiltonian with `cdh_levels` Fock sectors.

    Blocks are assembled from the spectral decomposition of the coupling
    operator: (H_S)_sr picks up one displacement element per eigenvalue pair,
    the cavity contributes a diagonal m*Omega, and the -S^2 term commutes with
    the transformation and enters block-diagonally.
    """
    if cdh_levels < 1:
        raise ValueError("cdh_levels must be >= 1")
    h_s = system_hamiltonian(model)
    s_op = coupling_operator(model)
    evals, vecs = np.linalg.eigh(s_op)
    h_eig = vecs.conj().T @ h_s @ vecs
    d = h_s.shape[0]
    eps = model.epsilon
    static = squared_coupling_prefactor(model) * (s_op @ s_op)

    out = np.zeros((cdh_levels * d, cdh_levels * d), dtype=complex)
    for s in range(cdh_levels):
        for r in range(s, cdh_levels):
            weights = _displacement_weights(evals, eps, s, r)
            if np.all(weights == 1.0):
                block = h_s.astype(complex)  # keeps the lam = 0 sectors exact
            else:
                block = vecs @ (h_eig * weights) @ vecs.conj().T
            out[s * d:(s + 1) * d, r * d:(r + 1) * d] = block
            if r != s:
                out[r * d:(r + 1) * d, s * d:(s + 1) * d] = block.conj().T
        out[s * d:(s + 1) * d, s * d:(s + 1) * d] += s * model.omega * np.eye(d) - static
    return assert_hermitian(out, what="cavity-dressed Hamiltonian")


# Polynomial coefficients of the dressed sigma_z blocks for the lowest four
# sectors: entry (s, r) holds (kind, coefficient(eps)) with kind 'z' for
# coeff * sigma_z and 'y' for coeff * (i sigma_y); lower blocks follow from
# Hermiticity.
_SQRT2 = math.sqrt(2.0)
_SQRT23 = math.sqrt(2.0 / 3.0)
_SQRT3 = math.sqrt(3.0)

_RABI_BLOCKS = {
    (0, 0): ("z", lambda e: 1.0),
    (0, 1): ("y", lambda e: 2.0 * e),
    (0, 2): ("z", lambda e: 2.0 * _SQRT2 * e ** 2),
    (0, 3): ("y", lambda e: 4.0 * _SQRT23 * e ** 3),
    (1, 1): ("z", lambda e: 1.0 - 4.0 * e ** 2),
    (1, 2): ("y", lambda e: -2.0 * _SQRT2 * e * (2.0 * e ** 2 - 1.0)),
    (1, 3): ("z", lambda e: -2.0 * _SQRT23 * e ** 2 * (4.0 * e ** 2 - 3.0)),
    (2, 2): ("z", lambda e: 8.0 * e ** 4 - 8.0 * e ** 2 + 1.0),
    (2, 3): ("y", lambda e: 2.0 * e * (8.0 * e ** 4 - 12.0 * e ** 2 + 3.0) / _SQRT3),
    (3, 3): ("z", lambda e: (-32.0 * e ** 6 + 72.0 * e ** 4 - 36.0 * e ** 2 + 3.0) / 3.0),
}


def build_cdh_rabi_closed_form(cdh_levels: int, model: RabiModel) -> np.ndarray:
    """Closed-form Rabi CDH for M <= 4; regression anchor for the generic builder."""
    if not isinstance(model, RabiModel):
        raise TypeError("closed-form Rabi builder needs a RabiModel")
    if not 1 <= cdh_levels <= 4:
        raise ValueError("closed form covers 1 <= cdh_levels <= 4; use build_cdh_generic beyond")
    eps = model.epsilon
    dt = model.delta_tilde
    sz = pauli("z")
    isy = 1j * pauli("y")
    shift = model.lam ** 2 / model.omega
    out = np.zeros((2 * cdh_levels, 2 * cdh_levels), dtype=complex)
    for s in range(cdh_levels):
        for r in range(s, cdh_levels):
            kind, coeff = _RABI_BLOCKS[(s, r)]
            block = dt * coeff(eps) * (sz if kind == "z" else isy)
            out[2 * s:2 * s + 2, 2 * r:2 * r + 2] = block
            if r != s:
                out[2 * r:2 * r + 2, 2 * s:2 * s + 2] = block.conj().T
        out[2 * s:2 * s + 2, 2 * s:2 * s + 2] += (s * model.omega - shift) * np.eye(2)
    return assert_hermitian(out, what="closed-form Rabi CDH")


def rabi_m2_eigenvalues(model: RabiModel) -> np.ndarray:
    """The four eigenenergies of the two-sector Rabi CDH, ascending.

    The sign inside the square root pairs with the sign in the epsilon^2
    prefactor; the pairing is fixed by the decoupled lam = 0 limit.
    """
    eps = model.epsilon
    dt = model.delta_tilde
    om = model.omega
    values = []
    for branch in (+1.0, -1.0):
        base = om / 2.0 - eps ** 2 * (om + branch * 2.0 * dt)
        root = math.sqrt(dt ** 2 * (4.0 * eps ** 4 + 1.0) + branch * dt * om * (1.0 - 2.0 * eps ** 2) + om ** 2 / 4.0)
        values.extend([base + root, base - root])
    return np.sort(np.array(values))


def dressing_values(epsilon: float) -> DressingValues:
    """The nine bond-dressing coefficients at the given scaled coupling."""
    if not math.isfinite(epsilon):
        raise ValueError(f"epsilon must be finite, got {epsilon}")
    e8 = math.exp(-8.0 * epsilon ** 2)
    f0 = 0.5 * (1.0 + e8)
    f1 = 0.5 * (1.0 + e8 * (1.0 - 16.0 * epsilon ** 2))
    f2 = 0.5 * (1.0 + e8 * (1.0 - 32.0 * epsilon ** 2 + 128.0 * epsilon ** 4))
    return DressingValues(
        epsilon=epsilon,
        f=(f0, f1, f2),
        g=(1.0 - f0, 1.0 - f1, 1.0 - f2),
        h=2.0 * epsilon * e8,
        v=-2.0 * _SQRT2 * e8 * epsilon * (8.0 * epsilon ** 2 - 1.0),
        w=4.0 * _SQRT2 * e8 * epsilon ** 2,
    )


def build_cdh_dicke_heisenberg_closed_form(cdh_levels: int, model: DickeHeisenbergModel) -> np.ndarray:
    """Closed-form Dicke-Heisenberg CDH for M <= 3.

    Assembles the dressed one-body ladder, the yy/zz bond mixing through the
    dressing coefficients, the yz+zy cross terms on off-diagonal blocks, the
    all-to-all -lam^2/(Omega L) xx term, and the m*Omega shifts.
    """
    if not isinstance(model, DickeHeisenbergModel):
        raise TypeError("closed-form chain builder needs a DickeHeisenbergModel")
    if not 1 <= cdh_levels <= 3:
        raise ValueError("closed form covers 1 <= cdh_levels <= 3; use build_cdh_generic beyond")
    geo = model.geometry
    d = geo.dim
    eps = model.epsilon
    dt = model.delta_tilde
    gx, gy, gz = model.gamma
    dr = dressing_values(eps)

    sum_z = sum_site_operator(pauli("z"), geo)
    sum_y = sum_site_operator(pauli("y"), geo)
    xx = sum_bond_operator(pauli("x"), pauli("x"), geo)
    yy = sum_bond_operator(pauli("y"), pauli("y"), geo)
    zz = sum_bond_operator(pauli("z"), pauli("z"), geo)
    yz = sum_bond_operator(pauli("y"), pauli("z"), geo) + sum_bond_operator(pauli("z"), pauli("y"), geo)
    s_tot = sum_site_operator(pauli("x"), geo)
    all_to_all = squared_coupling_prefactor(model) * (s_tot @ s_tot)

    one_body = {0: 1.0, 1: 1.0 - 4.0 * eps ** 2, 2: 8.0 * eps ** 4 - 8.0 * eps ** 2 + 1.0}
    eye = np.eye(d)

    def diagonal(m: int) -> np.ndarray:
        return (
            dt * one_body[m] * sum_z
            + gx * xx
            + (gy * dr.f[m] + gz * dr.g[m]) * yy
            + (gy * dr.g[m] + gz * dr.f[m]) * zz
            - all_to_all
            + m * model.omega * eye
        )

    off_diagonal = {
        (0, 1): 2.0j * eps * dt * sum_y + 1.0j * dr.h * (gz - gy) * yz,
        (0, 2): 2.0 * _SQRT2 * eps ** 2 * dt * sum_z + dr.w * (gz - gy) * (zz - yy),
        (1, 2): -2.0j * _SQRT2 * eps * (2.0 * eps ** 2 - 1.0) * dt * sum_y + 1.0j * dr.v * (gz - gy) * yz,
    }

    out = np.zeros((cdh_levels * d, cdh_levels * d), dtype=complex)
    for s in range(cdh_levels):
        out[s * d:(s + 1) * d, s * d:(s + 1) * d] = diagonal(s)
        for r in range(s + 1, cdh_levels):
            block = off_diagonal[(s, r)]
            out[s * d:(s + 1) * d, r * d:(r + 1) * d] = block
            out[r * d:(r + 1) * d, s * d:(s + 1) * d] = block.conj().T
    return assert_hermitian(out, what="closed-form Dicke-Heisenberg CDH")


def deep_strong_limit_cdh(model: DickeHeisenbergModel, cdh_levels: int) -> tuple[np.ndarray, float]:
    """lam -> infinity limit of the chain CDH, split into a finite part and
    the coefficient of the divergent all-to-all sum_ij sigma_x_i sigma_x_j term.

    One-body terms are exponentially suppressed in this limit, off-diagonal
    blocks vanish, and the yy/zz bonds average to (gamma_y + gamma_z)/2.
    """
    if not 1 <= cdh_levels <= 3:
        raise ValueError("deep-strong closed form covers 1 <= cdh_levels <= 3")
    geo = model.geometry
    d = geo.dim
    gx, gy, gz = model.gamma
    xx = sum_bond_operator(pauli("x"), pauli("x"), geo)
    yy = sum_bond_operator(pauli("y"), pauli("y"), geo)
    zz = sum_bond_operator(pauli("z"), pauli("z"), geo)
    block = gx * xx + 0.5 * (gy + gz) * (yy + zz)
    out = np.zeros((cdh_levels * d, cdh_levels * d), dtype=complex)
    for m in range(cdh_levels):
        out[m * d:(m + 1) * d, m * d:(m + 1) * d] = block + m * model.omega * np.eye(d)
    coefficient = -model.lam ** 2 / (model.omega * geo.length)
    return assert_hermitian(out, what="deep-strong limit CDH"), coefficient
