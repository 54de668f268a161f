import numpy as np
import pytest

from uuqc.channels import KrausChannel, apply
from uuqc.linalg import (
    SubspaceIsometry,
    factor_as_tensor,
    partial_trace,
    random_ket,
    random_unitary,
    tensor_product,
)
from uuqc.unambiguous import (
    certify_uum,
    certify_uuqc,
    extend_by_identity,
    probability_profile,
    refine,
    restrict_operator,
)

from builders import env_factors, make_uum, make_uuqc, rand_complex


def test_certify_plain_unitary():
    u = random_unitary(3, 2)
    cert = certify_uum(u)
    assert cert.is_uum
    assert cert.probability == pytest.approx(1.0, abs=1e-12)
    assert cert.env_factor.shape == (1, 1)
    assert abs(cert.env_factor[0, 0]) == pytest.approx(1.0, abs=1e-12)


def test_certify_recovers_constructed_unitary():
    rng = np.random.default_rng(1)
    theta = env_factors(rng, 3, 2, [0.42])[0]
    u = random_unitary(2, 8)
    omega = tensor_product(u, theta)
    cert = certify_uum(omega, env_in=2, env_out=3)
    assert cert.is_uum
    assert cert.probability == pytest.approx(np.linalg.norm(theta) ** 2, abs=1e-9)
    # recovered up to phase
    assert abs(np.trace(cert.unitary.conj().T @ u)) == pytest.approx(2.0, abs=1e-9)
    # p = Tr(T T^dag) for the extracted factor
    assert np.trace(cert.env_factor @ cert.env_factor.conj().T).real == pytest.approx(
        cert.probability, abs=1e-9
    )


def test_certify_ignores_annihilated_noise():
    rng = np.random.default_rng(2)
    omega, u, theta, v1, v2 = make_uum(rng, 2, 4, 5, 2, 2, 0.37, with_noise=True)
    cert = certify_uum(omega, v1, v2, 2, 2)
    assert cert.is_uum
    assert cert.probability == pytest.approx(0.37, abs=1e-9)
    # direct evaluation of the defining equation on random subspace kets
    proj_out = tensor_product(v2.projector(), np.eye(2))
    for k in range(20):
        psi = v1.columns @ random_ket(2, k)
        block = proj_out @ omega @ tensor_product(psi.reshape(-1, 1), np.eye(2))
        assert np.linalg.norm(block) ** 2 == pytest.approx(0.37, abs=1e-9)


def test_reconstruction_invariant():
    rng = np.random.default_rng(3)
    omega, u, theta, v1, v2 = make_uum(rng, 3, 4, 4, 2, 2, 0.6, with_noise=True)
    cert = certify_uum(omega, v1, v2, 2, 2)
    restricted = restrict_operator(omega, v1, v2, 2, 2)
    recon = tensor_product(cert.unitary, cert.env_factor)
    assert np.linalg.norm(recon - restricted) <= cert.residual + 1e-9
    gram = cert.unitary.conj().T @ cert.unitary
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-9)


def test_certified_matrices_round_trip_both_directions():
    # built as a product (plus annihilated noise) -> certifies; certified ->
    # reconstructs as a product within the residual
    rng = np.random.default_rng(4)
    for trial in range(10):
        omega, u, theta, v1, v2 = make_uum(rng, 2, 3, 3, 2, 3, 0.5, with_noise=True)
        cert = certify_uum(omega, v1, v2, 2, 3)
        assert cert.is_uum
        restricted = restrict_operator(omega, v1, v2, 2, 3)
        assert (
            np.linalg.norm(tensor_product(cert.unitary, cert.env_factor) - restricted)
            <= 1e-9
        )


def test_profile_flat_for_identity():
    prof = probability_profile(np.eye(4, dtype=complex), samples=10, seed=0)
    np.testing.assert_allclose(prof, 1.0, atol=1e-12)


def test_profile_flat_for_constructed_map():
    rng = np.random.default_rng(5)
    omega, *_ , v1, v2 = make_uum(rng, 2, 4, 4, 2, 2, 0.42)
    prof = probability_profile(omega, v1, v2, 2, 2, samples=100, seed=1)
    np.testing.assert_allclose(prof, 0.42, atol=1e-10)


def test_profile_exposes_filter_preference():
    prof_0 = probability_profile(np.diag([1.0, 0.5]).astype(complex), samples=200, seed=2)
    assert prof_0.max() <= 1.0 + 1e-12
    assert prof_0.max() - prof_0.min() > 0.5
    # endpoint values from direct evaluation
    filt = np.diag([1.0, 0.5])
    assert np.linalg.norm(filt @ [1, 0]) ** 2 == pytest.approx(1.0)
    assert np.linalg.norm(filt @ [0, 1]) ** 2 == pytest.approx(0.25)


def test_profile_with_fixed_environment_state():
    rng = np.random.default_rng(20)
    u = random_unitary(2, 21)
    theta = env_factors(rng, 2, 2, [0.6])[0]
    omega = tensor_product(u, theta)
    sigma = np.diag([0.75, 0.25]).astype(complex)
    prof = probability_profile(omega, env_in=2, env_out=2, samples=30, seed=3, env_state=sigma)
    expected = np.trace(theta @ sigma @ theta.conj().T).real
    np.testing.assert_allclose(prof, expected, atol=1e-10)


def test_degenerate_spectrum_reported_not_uum():
    # the swap operator has a flat operator-Schmidt spectrum; the verdict is
    # negative and the certificate keeps both leading values visible
    swap = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            swap[j * 2 + i, i * 2 + j] = 1.0
    cert = certify_uum(swap, env_in=2, env_out=2)
    assert not cert.is_uum
    assert cert.residual > 0.5
    assert cert.schmidt_values[0] == pytest.approx(cert.schmidt_values[1], abs=1e-12)


def test_input_preference_constant_invariant():
    # flat profile over Haar inputs for any certified map
    rng = np.random.default_rng(6)
    for d, env in ((2, 2), (3, 3), (2, 3)):
        omega, *_, v1, v2 = make_uum(rng, d, d + 1, d + 2, env, env, 0.3, with_noise=True)
        prof = probability_profile(omega, v1, v2, env, env, samples=100, seed=7)
        assert prof.max() - prof.min() <= 1e-9


def test_uuqc_single_unitary():
    cert = certify_uuqc(KrausChannel((random_unitary(2, 3),)))
    assert cert.is_uuqc
    assert cert.total_probability == pytest.approx(1.0, abs=1e-9)


def test_uuqc_two_elements_sum_probability():
    rng = np.random.default_rng(7)
    ch, u, thetas, v1, v2 = make_uuqc(rng, 2, 3, 3, 2, 2, [0.3, 0.5])
    cert = certify_uuqc(ch, v1, v2, 2, 2)
    assert cert.is_uuqc
    assert cert.total_probability == pytest.approx(0.8, abs=1e-9)
    assert cert.definition_residual <= 1e-9


def test_uuqc_probability_matches_direct_definition():
    # q from the per-element sum equals q read off the defining identity
    rng = np.random.default_rng(8)
    ch, u, thetas, v1, v2 = make_uuqc(rng, 2, 4, 3, 2, 2, [0.25, 0.15, 0.2])
    cert = certify_uuqc(ch, v1, v2, 2, 2)
    rho = np.diag([0.5, 0.5]).astype(complex)
    embedded = v1.columns @ rho @ v1.columns.conj().T
    out = apply(ch, tensor_product(embedded, np.eye(2)))
    reduced = partial_trace(out, (3, 2), keep=(0,))
    lhs = v2.columns.conj().T @ reduced @ v2.columns
    q_direct = np.trace(lhs).real
    assert cert.total_probability == pytest.approx(q_direct, abs=1e-9)
    assert cert.total_probability == pytest.approx(0.6, abs=1e-9)


def test_uuqc_rejects_mismatched_unitaries():
    u = np.eye(2, dtype=complex)
    w = np.diag([1.0, 1j])  # trace modulus sqrt(2) != 2
    ch = KrausChannel((np.sqrt(0.5) * u, np.sqrt(0.5) * w))
    cert = certify_uuqc(ch)
    assert not cert.is_uuqc
    assert cert.mismatched_pair == (0, 1)


def test_uuqc_allows_zero_probability_elements():
    rng = np.random.default_rng(9)
    ch, u, thetas, v1, v2 = make_uuqc(rng, 2, 4, 4, 1, 1, [0.5])
    # an element supported entirely outside the output subspace
    junk = v2.complement().columns @ rand_complex(rng, (2, 4)) * 0.1
    ch2 = KrausChannel(ch.elements + (junk,))
    cert = certify_uuqc(ch2, v1, v2)
    assert cert.is_uuqc
    assert cert.total_probability == pytest.approx(0.5, abs=1e-9)


def test_refine_already_rank_one():
    u = random_unitary(2, 11)
    env = np.zeros((2, 2), dtype=complex)
    env[1, 0] = 1.0  # |1><0| on the environment legs
    ch = KrausChannel((tensor_product(u, env),))
    refined = refine(ch, env_in=2, env_out=2)
    assert len(refined.elements) == 1
    original = ch.elements[0]
    overlap = abs(np.vdot(refined.elements[0], original))
    assert overlap == pytest.approx(np.linalg.norm(original) ** 2, abs=1e-9)


def test_refine_expands_full_rank_environment():
    rng = np.random.default_rng(12)
    u = random_unitary(2, 13)
    theta = rand_complex(rng, (2, 2))
    theta *= np.sqrt(0.9) / np.linalg.norm(theta)
    ch = KrausChannel((tensor_product(u, theta),))
    refined = refine(ch, env_in=2, env_out=2)
    assert len(refined.elements) == 4
    # weights are the entry moduli of the environment factor
    weights = sorted(np.linalg.norm(e) / np.sqrt(2) for e in refined.elements)
    expected = sorted(np.abs(theta).reshape(-1))
    np.testing.assert_allclose(weights, expected, atol=1e-9)
    cert = certify_uuqc(refined, env_in=2, env_out=2)
    assert cert.is_uuqc
    assert cert.total_probability == pytest.approx(0.9, abs=1e-10)


def test_refine_combines_elements_entrywise():
    rng = np.random.default_rng(14)
    u = random_unitary(2, 15)
    t1, t2 = env_factors(rng, 2, 2, [0.4, 0.35])
    ch = KrausChannel((tensor_product(u, t1), tensor_product(u, t2)))
    refined = refine(ch, env_in=2, env_out=2)
    # entry-wise expansion: weight(i_out, i_in) = sqrt(|t1|^2 + |t2|^2)
    expected = np.sqrt(np.abs(t1) ** 2 + np.abs(t2) ** 2)
    got = np.zeros((2, 2))
    for e in refined.elements:
        pair = factor_as_tensor(e, 2, 2, 2, 2)
        env = pair.env_factor
        j, i = np.unravel_index(np.argmax(np.abs(env)), env.shape)
        # the unit-norm system factor is U / sqrt(2), so the environment
        # side carries an extra sqrt(2)
        got[j, i] = np.linalg.norm(env) / np.sqrt(2)
    np.testing.assert_allclose(got, expected, atol=1e-9)
    cert = certify_uuqc(refined, env_in=2, env_out=2)
    assert cert.total_probability == pytest.approx(0.75, abs=1e-10)


def test_refine_rank_one_environment_invariant():
    rng = np.random.default_rng(16)
    ch, u, thetas, v1, v2 = make_uuqc(rng, 2, 3, 3, 2, 3, [0.3, 0.25, 0.2])
    before = certify_uuqc(ch, v1, v2, 2, 3)
    refined = refine(ch, v1, v2, 2, 3)
    after = certify_uuqc(refined, v1, v2, 2, 3)
    assert after.is_uuqc
    assert after.total_probability == pytest.approx(before.total_probability, abs=1e-9)
    for e in refined.elements:
        pair = factor_as_tensor(e, 3, 3, 3, 2)
        assert pair.schmidt_values[1] <= 1e-9


def test_refine_refuses_non_uuqc():
    ch = KrausChannel((np.diag([1.0, 0.5]).astype(complex),))
    with pytest.raises(ValueError):
        refine(ch)


def test_extend_by_identity_trivial_and_preserving():
    rng = np.random.default_rng(17)
    ch, u, thetas, v1, v2 = make_uuqc(rng, 2, 3, 3, 1, 1, [0.5, 0.3])
    assert extend_by_identity(ch, 1) is ch
    for ancilla in (2, 3, 4):
        ext = extend_by_identity(ch, ancilla)
        cert = certify_uuqc(ext, v1.extend_left(ancilla), v2.extend_left(ancilla))
        assert cert.is_uuqc
        assert cert.total_probability == pytest.approx(0.8, abs=1e-9)
        # the extended unitary is the ancilla identity tensored with the original
        target = tensor_product(np.eye(ancilla), u)
        assert abs(np.trace(cert.unitary.conj().T @ target)) == pytest.approx(
            2 * ancilla, abs=1e-8
        )


def test_extend_applied_to_entangled_input():
    # forward construction: a d=2 maximally entangled ancilla-system input
    # comes out as (I (x) U) Phi with weight q on the success branch
    rng = np.random.default_rng(18)
    ch, u, thetas, v1, v2 = make_uuqc(rng, 2, 2, 2, 1, 1, [0.45, 0.25])
    ext = extend_by_identity(ch, 2)
    phi = np.eye(2, dtype=complex).reshape(-1) / np.sqrt(2)
    embedded = tensor_product(np.eye(2), v1.columns) @ phi
    out = apply(ext, np.outer(embedded, embedded.conj()))
    restrict = tensor_product(np.eye(2), v2.columns)
    block = restrict.conj().T @ out @ restrict
    assert np.trace(block).real == pytest.approx(0.7, abs=1e-9)
    target = tensor_product(np.eye(2), u) @ phi
    np.testing.assert_allclose(
        block, 0.7 * np.outer(target, target.conj()), atol=1e-9
    )


def test_dimension_errors():
    with pytest.raises(ValueError):
        certify_uum(np.eye(4), SubspaceIsometry.full(3), SubspaceIsometry.full(4))
    with pytest.raises(ValueError):
        certify_uum(np.eye(4), SubspaceIsometry.full(4), SubspaceIsometry.full(3))
    with pytest.raises(ValueError):
        restrict_operator(np.eye(4), SubspaceIsometry.full(2), SubspaceIsometry.full(2), 3, 2)
