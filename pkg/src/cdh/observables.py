"""Diagonalization and ground-state/thermal observables.

Reported observables are lab-frame expectations: operators that do not
commute with the entangling transformation are rotated on `rotation_levels`
cavity levels and then truncated down to the `cdh_levels` of the density
matrix. Rotating on a finite space leaks weight out of the kept blocks, so
results carry a real dependence on `rotation_levels`; they converge to the
exact dressed blocks as it grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cdh.boson import displacement_unitary
from cdh.cdh import (
    DickeHeisenbergModel,
    ModelSpec,
    RabiModel,
    Truncation,
    build_bare,
    build_cdh_generic,
    coupling_operator,
)
from cdh.operators import (
    assert_hermitian,
    pauli,
    reduced_half_chain_from_state,
    sum_site_operator,
)

#: Default rotation depth for resonant ground-state observables; thermal
#: sweeps default to rotation at the CDH dimension itself.
GROUND_STATE_ROTATION_LEVELS = 20


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition of a Hermitian operator, ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def eigensolve(h: np.ndarray) -> Spectrum:
    """Dense Hermitian eigendecomposition with validated input."""
    assert_hermitian(h, what="eigensolve input")
    eigenvalues, eigenvectors = np.linalg.eigh(h)
    return Spectrum(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def _as_spectrum(h_or_spectrum) -> Spectrum:
    if isinstance(h_or_spectrum, Spectrum):
        return h_or_spectrum
    return eigensolve(h_or_spectrum)


def rotate_observable(
    op_on_system: np.ndarray,
    coupling_op: np.ndarray,
    epsilon: float,
    levels: int,
    rotation_levels: int,
) -> np.ndarray:
    """U_P (op x I) U_P^dag built on `rotation_levels` cavity levels, then
    truncated to the leading `levels` block grid.

    U_P is assembled from the spectral decomposition of the coupling operator
    with one truncated displacement unitary per distinct eigenvalue, so the
    rotation is exactly unitary on the enlarged space (the identity maps to
    the identity for any truncation).
    """
    if rotation_levels < levels:
        raise ValueError("rotation_levels must be >= levels")
    evals, vecs = np.linalg.eigh(coupling_op)
    rounded = np.round(evals, 9)
    op_eig = vecs.conj().T @ op_on_system @ vecs
    d = op_on_system.shape[0]

    distinct = np.unique(rounded)
    unitaries = {a: displacement_unitary(rotation_levels, epsilon * a) for a in distinct}
    # cavity factor of each eigenvalue pair: D(eps a) D(eps b)^T, truncated
    products = {
        (a, b): unitaries[a] @ unitaries[b].T
        for a in distinct
        for b in distinct
    }

    out = np.zeros((levels * d, levels * d), dtype=complex)
    for s in range(levels):
        for r in range(levels):
            weights = np.empty((d, d))
            for a in distinct:
                ia = np.flatnonzero(rounded == a)
                for b in distinct:
                    ib = np.flatnonzero(rounded == b)
                    weights[np.ix_(ia, ib)] = products[(a, b)][s, r]
            block = vecs @ (op_eig * weights) @ vecs.conj().T
            out[s * d:(s + 1) * d, r * d:(r + 1) * d] = block
    return out


def expectation(rho: np.ndarray, obs: np.ndarray) -> float:
    """Tr(rho obs) with the imaginary residue asserted small and discarded."""
    value = complex(np.trace(rho @ obs))
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise ValueError(f"expectation has imaginary residue {value.imag:.3e}")
    return value.real


def gibbs_density(h_or_spectrum, temperature: float) -> np.ndarray:
    """Canonical density matrix exp(-H/T)/Z from shifted Boltzmann weights."""
    if temperature <= 0:
        raise ValueError("temperature must be positive; use ground-state routines at T=0")
    spec = _as_spectrum(h_or_spectrum)
    weights = np.exp(-(spec.eigenvalues - spec.eigenvalues[0]) / temperature)
    weights /= weights.sum()
    return (spec.eigenvectors * weights) @ spec.eigenvectors.conj().T


def default_degeneracy_tol(spec: Spectrum) -> float:
    scale = max(abs(spec.eigenvalues[0]), abs(spec.eigenvalues[-1]), 1.0)
    return 1e-9 * scale


def ground_state_density(h_or_spectrum, degeneracy_tol: float | None = None) -> np.ndarray:
    """Ground-state density matrix; an equal-weight mixture over the
    degenerate subspace when the ground level is degenerate."""
    spec = _as_spectrum(h_or_spectrum)
    tol = default_degeneracy_tol(spec) if degeneracy_tol is None else degeneracy_tol
    sel = spec.eigenvalues <= spec.eigenvalues[0] + tol
    basis = spec.eigenvectors[:, sel]
    return (basis @ basis.conj().T) / int(sel.sum())


def thermal_expectation(h_or_spectrum, obs: np.ndarray, temperature: float) -> float:
    """Tr(rho_P obs) in the canonical state of the given Hamiltonian."""
    spec = _as_spectrum(h_or_spectrum)
    if obs.shape[0] != spec.dim:
        raise ValueError(f"observable dimension {obs.shape[0]} does not match state dimension {spec.dim}")
    return expectation(gibbs_density(spec, temperature), obs)


def ground_state_expectation(h_or_spectrum, obs: np.ndarray, degeneracy_tol: float | None = None) -> float:
    spec = _as_spectrum(h_or_spectrum)
    if obs.shape[0] != spec.dim:
        raise ValueError(f"observable dimension {obs.shape[0]} does not match state dimension {spec.dim}")
    return expectation(ground_state_density(spec, degeneracy_tol), obs)


def _chain_only(model: ModelSpec, name: str) -> DickeHeisenbergModel:
    if not isinstance(model, DickeHeisenbergModel):
        raise ValueError(f"{name} is a chain observable; got a Rabi model")
    return model


def _state_density(model, truncation, representation, temperature, spectrum):
    if spectrum is None:
        h = (
            build_cdh_generic(model, truncation.cdh_levels)
            if representation == "cdh"
            else build_bare(model, truncation.bare_levels)
        )
        spectrum = eigensolve(h)
    if temperature is None:
        return ground_state_density(spectrum), spectrum
    return gibbs_density(spectrum, temperature), spectrum


def _rotated_or_bare(model, op, truncation, representation, rotation_levels):
    """Lab-frame observable in the chosen representation."""
    if representation == "bare":
        return np.kron(np.eye(truncation.bare_levels), op)
    levels = truncation.cdh_levels
    rot = truncation.rotation_levels if rotation_levels is None else rotation_levels
    return rotate_observable(op, coupling_operator(model), model.epsilon, levels, max(rot, levels))


def magnetization_z(
    model: ModelSpec,
    truncation: Truncation,
    temperature: float | None = None,
    representation: str = "cdh",
    rotation_levels: int | None = None,
    spectrum: Spectrum | None = None,
) -> float:
    """Site-averaged magnetization (1/L) sum_i <sigma_z_i>; single-spin
    <sigma_z> for the Rabi model. Ground state unless a temperature is given."""
    if isinstance(model, RabiModel):
        op = pauli("z")
    else:
        op = sum_site_operator(pauli("z"), model.geometry) / model.geometry.length
    obs = _rotated_or_bare(model, op, truncation, representation, rotation_levels)
    rho, _ = _state_density(model, truncation, representation, temperature, spectrum)
    return expectation(rho, obs)


def structure_factor(
    model: ModelSpec,
    truncation: Truncation,
    axis: str,
    temperature: float | None = None,
    representation: str = "cdh",
    rotation_levels: int | None = None,
    spectrum: Spectrum | None = None,
) -> float:
    """S_axis = sum_ij <sigma_axis_i sigma_axis_j> / L^2, diagonal included,
    computed as the expectation of (sum_i sigma_axis_i)^2 / L^2."""
    chain = _chain_only(model, "structure_factor")
    total = sum_site_operator(pauli(axis), chain.geometry)
    op = (total @ total) / chain.geometry.length ** 2
    if rotation_levels is None and representation == "cdh":
        # bond correlators follow the density matrix truncation by default
        rotation_levels = truncation.cdh_levels
    obs = _rotated_or_bare(model, op, truncation, representation, rotation_levels)
    rho, _ = _state_density(model, truncation, representation, temperature, spectrum)
    return expectation(rho, obs)


def entanglement_entropy(
    model: ModelSpec,
    truncation: Truncation,
    representation: str = "cdh",
    spectrum: Spectrum | None = None,
    degeneracy_tol: float | None = None,
) -> float:
    """Half-chain von Neumann entropy (nats) of the ground state, tracing the
    cavity out together with the second half of the chain.

    Degenerate ground levels use the equal-weight mixture, consistent with the
    expectation-value routines.
    """
    chain = _chain_only(model, "entanglement_entropy")
    length = chain.geometry.length
    if length % 2 != 0:
        raise ValueError("half-chain entropy needs an even chain length")
    if spectrum is None:
        h = (
            build_cdh_generic(model, truncation.cdh_levels)
            if representation == "cdh"
            else build_bare(model, truncation.bare_levels)
        )
        spectrum = eigensolve(h)
    cavity = truncation.cdh_levels if representation == "cdh" else truncation.bare_levels
    tol = default_degeneracy_tol(spectrum) if degeneracy_tol is None else degeneracy_tol
    sel = np.flatnonzero(spectrum.eigenvalues <= spectrum.eigenvalues[0] + tol)
    rho_a = np.zeros((2 ** (length // 2), 2 ** (length // 2)), dtype=complex)
    for idx in sel:
        rho_a += reduced_half_chain_from_state(spectrum.eigenvectors[:, idx], length, cavity)
    rho_a /= len(sel)
    return entropy_from_density(rho_a)


def entropy_from_density(rho: np.ndarray, clamp: float = 1e-10) -> float:
    """Von Neumann entropy in nats, clamping small negative eigenvalues."""
    eigenvalues = np.linalg.eigvalsh(rho)
    if eigenvalues.min() < -clamp:
        raise ValueError(f"density matrix has eigenvalue {eigenvalues.min():.3e} below -{clamp:.0e}")
    positive = np.clip(eigenvalues, 0.0, None)
    positive = positive[positive > 0.0]
    return float(-np.sum(positive * np.log(positive)))


def thermal_sigma_z(
    model: ModelSpec,
    truncation: Truncation,
    temperature: float,
    representation: str = "cdh",
    rotation_levels: int | None = None,
    spectrum: Spectrum | None = None,
) -> float:
    """Thermal lab-frame magnetization; rotation defaults to the CDH dimension."""
    if rotation_levels is None and representation == "cdh":
        rotation_levels = truncation.cdh_levels
    return magnetization_z(
        model,
        truncation,
        temperature=temperature,
        representation=representation,
        rotation_levels=rotation_levels,
        spectrum=spectrum,
    )
