import math

import numpy as np
import pytest

from cdh.cdh import (
    DickeHeisenbergModel,
    RabiModel,
    Truncation,
    build_bare,
    build_cdh_generic,
)
from cdh.observables import (
    eigensolve,
    entanglement_entropy,
    entropy_from_density,
    gibbs_density,
    ground_state_density,
    ground_state_expectation,
    magnetization_z,
    rotate_observable,
    structure_factor,
    thermal_expectation,
    thermal_sigma_z,
)
from cdh.operators import ChainGeometry, pauli, sum_site_operator
from conftest import random_hermitian


def rabi(lam, delta=1.0, omega=2.0):
    return RabiModel(delta=delta, omega=omega, lam=lam)


def xx_chain(lam, length=4, delta=1.0, omega=2.0):
    return DickeHeisenbergModel(
        delta=delta, omega=omega, lam=lam, gamma=(omega / 8, omega / 8, 0.0),
        geometry=ChainGeometry(length=length, periodic=True),
    )


def trunc(m=3, mp=20, n=40):
    return Truncation(cdh_levels=m, rotation_levels=mp, bare_levels=n)


# ---------------------------------------------------------------------------
# eigensolve
# ---------------------------------------------------------------------------


def test_eigensolve_sorted_diagonal():
    spec = eigensolve(np.diag([3.0, 1.0, 2.0]).astype(complex))
    assert np.allclose(spec.eigenvalues, [1.0, 2.0, 3.0])


def test_eigensolve_sigma_x():
    spec = eigensolve(pauli("x"))
    assert np.allclose(spec.eigenvalues, [-1.0, 1.0])
    minus = spec.eigenvectors[:, 0]
    assert np.isclose(abs(minus @ np.array([1.0, -1.0]) / np.sqrt(2.0)), 1.0)


def test_eigensolve_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eigensolve(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigensolve_residuals_on_chain_cdh():
    model = xx_chain(1.0, length=8)
    h = build_cdh_generic(model, 3)  # 768-dimensional
    spec = eigensolve(h)
    norm = np.linalg.norm(h, 2)
    for idx in (0, 1, 400, 767):
        vec = spec.eigenvectors[:, idx]
        residual = np.linalg.norm(h @ vec - spec.eigenvalues[idx] * vec)
        assert residual < 1e-9 * norm
    gram = spec.eigenvectors.conj().T @ spec.eigenvectors
    assert np.abs(gram - np.eye(spec.dim)).max() < 1e-10


# ---------------------------------------------------------------------------
# rotate_observable
# ---------------------------------------------------------------------------


def test_rotation_trivial_at_zero_coupling():
    rotated = rotate_observable(pauli("z"), pauli("x"), 0.0, 3, 17)
    assert np.abs(rotated - np.kron(np.eye(3), pauli("z"))).max() < 1e-13


def test_rotation_of_identity_is_identity():
    for mp in (2, 5, 24):
        rotated = rotate_observable(np.eye(2), pauli("x"), 1.3, 2, mp)
        assert np.abs(rotated - np.eye(4)).max() < 1e-12


def test_rotation_matches_dressed_sigma_z_blocks_at_large_depth():
    # rotating on a deep cavity space converges to the closed-form blocks
    eps = 0.4
    dt = math.exp(-2.0 * eps ** 2)
    sq2, sq23, sq3 = math.sqrt(2.0), math.sqrt(2.0 / 3.0), math.sqrt(3.0)
    coeffs = {
        (0, 0): ("z", 1.0),
        (0, 1): ("y", 2 * eps),
        (0, 2): ("z", 2 * sq2 * eps ** 2),
        (0, 3): ("y", 4 * sq23 * eps ** 3),
        (1, 1): ("z", 1 - 4 * eps ** 2),
        (1, 2): ("y", -2 * sq2 * eps * (2 * eps ** 2 - 1)),
        (1, 3): ("z", -2 * sq23 * eps ** 2 * (4 * eps ** 2 - 3)),
        (2, 2): ("z", 8 * eps ** 4 - 8 * eps ** 2 + 1),
        (2, 3): ("y", 2 * eps * (8 * eps ** 4 - 12 * eps ** 2 + 3) / sq3),
        (3, 3): ("z", (-32 * eps ** 6 + 72 * eps ** 4 - 36 * eps ** 2 + 3) / 3),
    }
    expected = np.zeros((8, 8), dtype=complex)
    for (s, r), (kind, c) in coeffs.items():
        block = dt * c * (pauli("z") if kind == "z" else 1j * pauli("y"))
        expected[2 * s:2 * s + 2, 2 * r:2 * r + 2] = block
        if s != r:
            expected[2 * r:2 * r + 2, 2 * s:2 * s + 2] = block.conj().T
    rotated = rotate_observable(pauli("z"), pauli("x"), eps, 4, 40)
    assert np.abs(rotated - expected).max() < 1e-12


def test_rotation_depth_leakage_is_real_then_converges():
    eps = 0.5
    shallow = rotate_observable(pauli("z"), pauli("x"), eps, 4, 4)
    mid = rotate_observable(pauli("z"), pauli("x"), eps, 4, 8)
    deep = rotate_observable(pauli("z"), pauli("x"), eps, 4, 20)
    deeper = rotate_observable(pauli("z"), pauli("x"), eps, 4, 30)
    assert np.abs(shallow - deep).max() > 1e-4  # truncation leakage is measurable
    assert np.abs(mid - deep).max() < np.abs(shallow - deep).max()
    assert np.abs(deeper - deep).max() < 1e-8
    for rotated in (shallow, deep):
        assert np.abs(rotated - rotated.conj().T).max() < 1e-12


def test_rotation_depth_guard():
    with pytest.raises(ValueError):
        rotate_observable(pauli("z"), pauli("x"), 0.5, 4, 3)


# ---------------------------------------------------------------------------
# expectations
# ---------------------------------------------------------------------------


def test_thermal_decoupled_spin_is_tanh():
    model = rabi(0.0)
    h = build_cdh_generic(model, 4)
    obs = rotate_observable(pauli("z"), pauli("x"), 0.0, 4, 4)
    value = thermal_expectation(h, obs, 1.0)
    assert abs(value + math.tanh(1.0)) < 1e-10


def test_thermal_infinite_temperature_limit():
    model = rabi(1.0)
    h = build_cdh_generic(model, 4)
    obs = rotate_observable(pauli("z"), pauli("x"), model.epsilon, 4, 4)
    assert abs(thermal_expectation(h, obs, 1e6)) < 1e-5


def test_thermal_approaches_ground_state():
    model = rabi(1.2)
    h = build_cdh_generic(model, 3)
    obs = rotate_observable(pauli("z"), pauli("x"), model.epsilon, 3, 20)
    spec = eigensolve(h)
    low_t = 1e-6 * max(abs(spec.eigenvalues[0]), abs(spec.eigenvalues[-1]))
    assert abs(thermal_expectation(spec, obs, low_t) - ground_state_expectation(spec, obs)) < 1e-6


def test_thermal_rotation_depth_insensitive_at_weak_coupling():
    # thermal observables need no extra rotation depth in the weak-coupling range
    for lam_over in (0.1, 0.2, 0.25):
        model = rabi(lam_over * 2.0)
        h = build_cdh_generic(model, 4)
        shallow = thermal_expectation(h, rotate_observable(pauli("z"), pauli("x"), model.epsilon, 4, 4), 1.0)
        deep = thermal_expectation(h, rotate_observable(pauli("z"), pauli("x"), model.epsilon, 4, 20), 1.0)
        assert abs(shallow - deep) < 1e-3


def test_gibbs_density_invariants():
    model = rabi(0.9)
    rho = gibbs_density(build_cdh_generic(model, 3), temperature=0.7)
    assert abs(np.trace(rho).real - 1.0) < 1e-10
    assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_gibbs_density_temperature_guard():
    with pytest.raises(ValueError):
        gibbs_density(np.eye(2), temperature=0.0)


def test_ground_state_polarized_rabi():
    model = rabi(0.0)
    h = build_cdh_generic(model, 4)
    obs = rotate_observable(pauli("z"), pauli("x"), 0.0, 4, 4)
    assert abs(ground_state_expectation(h, obs) + 1.0) < 1e-12


def test_ground_state_degenerate_mixture():
    assert abs(ground_state_expectation(np.eye(2, dtype=complex), pauli("z"))) < 1e-15


def test_ground_state_deep_strong_magnetization_suppressed():
    model = rabi(10.0)  # lam/Omega = 5
    h = build_cdh_generic(model, 4)
    obs = rotate_observable(pauli("z"), pauli("x"), model.epsilon, 4, 20)
    assert abs(ground_state_expectation(h, obs)) < 0.01


def test_expectation_dimension_guard():
    with pytest.raises(ValueError):
        thermal_expectation(np.eye(4, dtype=complex), np.eye(2), 1.0)


# ---------------------------------------------------------------------------
# chain observables
# ---------------------------------------------------------------------------


def test_magnetization_polarized_chain():
    model = xx_chain(0.0, length=4)
    assert abs(magnetization_z(model, trunc()) + 1.0) < 1e-12


def test_magnetization_polarized_above_transition_l8():
    model = xx_chain(0.0, length=8, delta=1.0)  # Delta above gamma_x + gamma_y
    assert abs(magnetization_z(model, trunc(m=3, mp=6)) + 1.0) < 1e-10


def test_magnetization_matches_bare_oracle():
    model = xx_chain(1.0, length=4)  # lam/Omega = 0.5
    cdh_value = magnetization_z(model, trunc(m=3, mp=6))
    bare_value = magnetization_z(model, trunc(n=40), representation="bare")
    assert abs(cdh_value - bare_value) < 0.02


def test_magnetization_bounded():
    for lam in (0.0, 1.0, 2.5):
        value = magnetization_z(xx_chain(lam), trunc())
        assert abs(value) <= 1.0 + 1e-12


def test_structure_factor_polarized_limits():
    model = xx_chain(0.0, length=4, delta=2.0)
    t = trunc()
    assert abs(structure_factor(model, t, "z") - 1.0) < 1e-10
    assert abs(structure_factor(model, t, "x") - 0.25) < 1e-10
    assert abs(structure_factor(model, t, "y") - 0.25) < 1e-10


def test_structure_factor_bounds():
    # inter-site anticorrelations can pull S below the 1/L diagonal part,
    # so only [0, 1] is a real bound
    t = trunc()
    for lam in (0.1, 1.0, 3.0):
        model = xx_chain(lam, delta=1.0)
        for axis in "xyz":
            value = structure_factor(model, t, axis)
            assert -1e-10 <= value <= 1.0 + 1e-10


def test_structure_factor_polarized_saturates_lower_bound():
    model = xx_chain(0.0, length=4, delta=2.0)
    assert abs(structure_factor(model, trunc(), "x") - 0.25) < 1e-10


def test_structure_factor_strong_coupling_alignment():
    t = trunc()
    weak = structure_factor(xx_chain(0.1, delta=1.0), t, "x")
    strong = structure_factor(xx_chain(3.0, delta=1.0), t, "x")
    assert strong > weak
    assert strong > 0.9


def test_structure_factor_chain_only():
    with pytest.raises(ValueError):
        structure_factor(rabi(0.5), trunc(), "z")


def test_thermal_sigma_z_chain_runs():
    value = thermal_sigma_z(xx_chain(0.5), trunc(), temperature=1.0)
    assert -1.0 <= value <= 0.0


# ---------------------------------------------------------------------------
# entanglement entropy
# ---------------------------------------------------------------------------


def test_entropy_zero_for_polarized_ground_state():
    model = xx_chain(0.0, length=4, delta=2.0)
    assert entanglement_entropy(model, trunc()) < 1e-10


def test_entropy_bell_pair_from_antiferromagnetic_bond():
    # strong antiferromagnetic zz bond on two sites; a weak cavity coupling
    # selects the symmetric combination of |ud> and |du>
    model = DickeHeisenbergModel(
        delta=1.0, omega=2.0, lam=0.2, gamma=(0.0, 0.0, 5.0),
        geometry=ChainGeometry(length=2, periodic=True),
    )
    entropy = entanglement_entropy(model, trunc(m=2, mp=2, n=20))
    assert abs(entropy - math.log(2.0)) < 1e-3


def test_entropy_matches_pure_spin_chain_oracle():
    # lam = 0, Delta = 0: reshape-SVD of the bare chain ground state
    model = xx_chain(0.0, length=4, delta=0.0)
    from cdh.cdh import system_hamiltonian

    h_s = system_hamiltonian(model)
    spec = eigensolve(h_s)
    assert spec.eigenvalues[1] - spec.eigenvalues[0] > 1e-6  # unique ground state
    singular = np.linalg.svd(spec.eigenvectors[:, 0].reshape(4, 4), compute_uv=False)
    probabilities = singular ** 2
    probabilities = probabilities[probabilities > 0]
    oracle = float(-np.sum(probabilities * np.log(probabilities)))
    value = entanglement_entropy(model, trunc(m=3))
    assert abs(value - oracle) < 1e-8


def test_entropy_bounds_along_sweep():
    t = trunc()
    bound = 2.0 * math.log(2.0)
    for lam in (0.0, 0.5, 1.5, 3.0):
        value = entanglement_entropy(xx_chain(lam), t)
        assert -1e-12 <= value <= bound + 1e-12


def test_entropy_odd_length_guard():
    model = DickeHeisenbergModel(
        delta=1.0, omega=2.0, lam=0.1, gamma=(0.0, 0.0, 0.0),
        geometry=ChainGeometry(length=3, periodic=True),
    )
    with pytest.raises(ValueError):
        entanglement_entropy(model, trunc())


def test_entropy_clamps_but_rejects_bad_density(rng):
    bad = random_hermitian(rng, 3)
    with pytest.raises(ValueError):
        entropy_from_density(bad)
    rho = np.diag([1.0, -5e-11, 5e-11])
    assert entropy_from_density(rho) >= 0.0


def test_bare_representation_entropy_agrees_weak_coupling():
    model = xx_chain(0.3, length=4)
    cdh_value = entanglement_entropy(model, trunc(m=3))
    bare_value = entanglement_entropy(model, trunc(n=30), representation="bare")
    assert abs(cdh_value - bare_value) < 0.02
