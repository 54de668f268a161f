"""Certification of unambiguous unitary maps and channels.

An operator that, restricted to chosen input/output subspaces, acts as
``U (x) T`` implements the unitary ``U`` with heralded probability
``p = Tr(T T^dag)``; a channel whose projected, environment-traced action
equals ``q U rho U^dag`` on every subspace-supported density operator does
the same with probability ``q``.  This module certifies both, extracts the
``(U, T, p)`` data, rewrites certified channels into rank-one-environment
form, and tensors them with identity ancillas.

Conventions.  Operators map ``system (x) env_in -> system (x) env_out``
with the system factor slowest-varying.  Certification contracts the
environment input against an *unnormalized* identity, so probabilities add
up element by element without extra normalization factors;
``probability_profile`` additionally accepts a fixed environment
preparation for physical scenarios.  Pure-state probabilities are evaluated
by applying the operator to ``ket (x) I_env_in`` and tracing the squared
result over the environment output, which reproduces the factorization
criterion exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, apply
from .linalg import (
    DEFAULT_TOL,
    SubspaceIsometry,
    dagger,
    factor_as_tensor,
    frobenius,
    partial_trace,
    random_ket,
    tensor_product,
)

__all__ = [
    "UumCertificate",
    "UuqcCertificate",
    "certify_uum",
    "probability_profile",
    "certify_uuqc",
    "refine",
    "extend_by_identity",
    "restrict_operator",
]


@dataclass(frozen=True)
class UumCertificate:
    """Verdict and extracted data for a single operator.

    ``unitary`` is ``d x d`` on the subspace bases and has its largest-modulus
    entry fixed real positive so certificates are comparable across Kraus
    elements.  ``probability`` equals the squared dominant operator-Schmidt
    value divided by ``d``, which coincides with ``Tr(T T^dag)`` for the
    extracted environment factor ``env_factor``.  ``schmidt_values`` keeps the
    full operator-Schmidt spectrum so degenerate non-factorable cases stay
    visible in the certificate.
    """

    is_uum: bool
    probability: float
    unitary: np.ndarray
    env_factor: np.ndarray
    residual: float
    schmidt_values: np.ndarray
    unitarity_deviation: float


@dataclass(frozen=True)
class UuqcCertificate:
    """Verdict for a channel: per-element certificates plus the shared unitary.

    ``total_probability`` is the sum of contributing per-element
    probabilities.  ``definition_residual`` is the worst Frobenius deviation
    of the projected, environment-traced channel action from
    ``q U rho U^dag`` over the sampled check states.  ``mismatched_pair``
    names the first pair of contributing elements whose unitaries disagree
    beyond tolerance, if any.
    """

    is_uuqc: bool
    total_probability: float
    per_element: tuple
    unitary: np.ndarray
    definition_residual: float
    mismatched_pair: tuple | None


def _check_env_dims(env_in: int, env_out: int):
    if env_in < 1 or env_out < 1:
        raise ValueError("environment dimensions must be >= 1")


def restrict_operator(
    omega: np.ndarray,
    v1: SubspaceIsometry,
    v2: SubspaceIsometry,
    env_in: int = 1,
    env_out: int = 1,
) -> np.ndarray:
    """Compress the system legs of ``omega`` onto the chosen subspaces.

    Returns ``(V2^dag (x) I) omega (V1 (x) I)`` of shape
    ``(d * env_out, d * env_in)``.
    """
    omega = np.asarray(omega, dtype=complex)
    _check_env_dims(env_in, env_out)
    if omega.shape != (v2.ambient_dim * env_out, v1.ambient_dim * env_in):
        raise ValueError(
            f"operator shape {omega.shape} does not match "
            f"({v2.ambient_dim}*{env_out}, {v1.ambient_dim}*{env_in})"
        )
    left = tensor_product(dagger(v2.columns), np.eye(env_out))
    right = tensor_product(v1.columns, np.eye(env_in))
    return left @ omega @ right


def _fix_phase(u: np.ndarray) -> complex:
    """Phase that makes the largest-modulus entry of ``u`` real positive."""
    idx = np.unravel_index(np.argmax(np.abs(u)), u.shape)
    entry = u[idx]
    if abs(entry) == 0.0:
        return 1.0 + 0j
    return np.conj(entry) / abs(entry)


def certify_uum(
    omega: np.ndarray,
    v1: SubspaceIsometry | None = None,
    v2: SubspaceIsometry | None = None,
    env_in: int = 1,
    env_out: int = 1,
    tol: float = DEFAULT_TOL,
) -> UumCertificate:
    """Decide whether ``omega`` acts as ``U (x) T`` between the subspaces.

    The restricted operator is factorized across the system/environment cut.
    Certification requires the rank-one residual to vanish within ``tol``,
    the system factor to be proportional to a unitary, and the implied
    probability to be positive.  When the subspaces are omitted they default
    to the full spaces (with ``omega`` square on the system after removing
    the declared environment legs).
    """
    omega = np.asarray(omega, dtype=complex)
    _check_env_dims(env_in, env_out)
    if v1 is None:
        v1 = SubspaceIsometry.full(omega.shape[1] // env_in)
    if v2 is None:
        v2 = SubspaceIsometry.full(omega.shape[0] // env_out)
    d = v1.sub_dim
    if d != v2.sub_dim:
        raise ValueError(f"subspace dimensions differ: {d} vs {v2.sub_dim}")

    restricted = restrict_operator(omega, v1, v2, env_in, env_out)
    pair = factor_as_tensor(restricted, d, env_out, d, env_in)

    sys_factor = pair.sys_factor
    gram = dagger(sys_factor) @ sys_factor
    scale = float(np.trace(gram).real) / d
    unitarity_dev = frobenius(gram - scale * np.eye(d))
    probability = float(pair.schmidt_values[0] ** 2) / d

    is_uum = pair.residual <= tol and unitarity_dev <= tol and probability > tol

    if scale > 0:
        unitary = sys_factor / np.sqrt(scale)
        env_factor = np.sqrt(scale) * pair.env_factor
    else:
        unitary = sys_factor
        env_factor = pair.env_factor
    phase = _fix_phase(unitary)
    unitary = unitary * phase
    env_factor = env_factor * np.conj(phase)

    return UumCertificate(
        is_uum=is_uum,
        probability=probability,
        unitary=unitary,
        env_factor=env_factor,
        residual=pair.residual,
        schmidt_values=pair.schmidt_values,
        unitarity_deviation=unitarity_dev,
    )


def probability_profile(
    omega: np.ndarray,
    v1: SubspaceIsometry | None = None,
    v2: SubspaceIsometry | None = None,
    env_in: int = 1,
    env_out: int = 1,
    samples: int = 100,
    seed=0,
    env_state: np.ndarray | None = None,
) -> np.ndarray:
    """Per-state success probabilities over random subspace inputs.

    For each sampled ket the operator is applied to ``ket (x) I_env_in``,
    projected onto the output subspace, and the squared Frobenius norm is
    recorded.  A certified map yields a flat profile; anything else betrays
    its input preference here.

    ``env_state`` optionally fixes a physical environment preparation (a
    density matrix on the input environment) in place of the unnormalized
    identity the certification bookkeeping uses.
    """
    omega = np.asarray(omega, dtype=complex)
    _check_env_dims(env_in, env_out)
    if v1 is None:
        v1 = SubspaceIsometry.full(omega.shape[1] // env_in)
    if v2 is None:
        v2 = SubspaceIsometry.full(omega.shape[0] // env_out)
    d = v1.sub_dim
    if d != v2.sub_dim:
        raise ValueError(f"subspace dimensions differ: {d} vs {v2.sub_dim}")
    restricted = restrict_operator(omega, v1, v2, env_in, env_out)

    if env_state is None:
        env_block = np.eye(env_in)
    else:
        env_state = np.asarray(env_state, dtype=complex)
        if env_state.shape != (env_in, env_in):
            raise ValueError("env_state must be a density matrix on the input environment")
        evals, evecs = np.linalg.eigh(env_state)
        env_block = evecs @ np.diag(np.sqrt(np.clip(evals, 0.0, None))) @ dagger(evecs)

    rng = np.random.default_rng(seed)
    values = np.empty(samples)
    for i in range(samples):
        psi = random_ket(d, rng)
        block = restricted @ tensor_product(psi.reshape(d, 1), env_block)
        values[i] = np.linalg.norm(block) ** 2
    return values


def _random_subspace_density(d: int, rng) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def _definition_residual(
    ch: KrausChannel,
    v1: SubspaceIsometry,
    v2: SubspaceIsometry,
    env_in: int,
    env_out: int,
    q: float,
    unitary: np.ndarray,
    check_states: int,
    seed,
) -> float:
    """Worst deviation of the projected channel action from ``q U rho U^dag``."""
    rng = np.random.default_rng(seed)
    d = v1.sub_dim
    dim2 = v2.ambient_dim
    eye_env = np.eye(env_in)
    worst = 0.0
    for _ in range(check_states):
        rho = _random_subspace_density(d, rng)
        embedded = v1.columns @ rho @ dagger(v1.columns)
        full_in = tensor_product(embedded, eye_env)
        out = apply(ch, full_in)
        reduced = partial_trace(out, (dim2, env_out), keep=(0,))
        lhs = dagger(v2.columns) @ reduced @ v2.columns
        rhs = q * (unitary @ rho @ dagger(unitary))
        worst = max(worst, frobenius(lhs - rhs))
    return worst


def certify_uuqc(
    ch: KrausChannel,
    v1: SubspaceIsometry | None = None,
    v2: SubspaceIsometry | None = None,
    env_in: int = 1,
    env_out: int = 1,
    tol: float = DEFAULT_TOL,
    check_states: int = 4,
    seed=0,
) -> UuqcCertificate:
    """Certify a channel as a probabilistic unitary between the subspaces.

    Every Kraus element is certified on its own.  Elements whose implied
    probability is at most ``tol`` feed only the failure branch and may take
    any form; every other element must factorize and all extracted unitaries
    must agree up to a global phase.  The summed probability is then checked
    directly against the defining channel identity on random subspace states.
    """
    _check_env_dims(env_in, env_out)
    if v1 is None:
        v1 = SubspaceIsometry.full(ch.in_dim // env_in)
    if v2 is None:
        v2 = SubspaceIsometry.full(ch.out_dim // env_out)
    d = v1.sub_dim

    certs = tuple(
        certify_uum(e, v1, v2, env_in, env_out, tol) for e in ch.elements
    )
    contributing = [k for k, c in enumerate(certs) if c.probability > tol]

    ok = True
    mismatched = None
    for k in contributing:
        if not certs[k].is_uum:
            ok = False
            break
    if ok:
        for a, b in zip(contributing, contributing[1:]):
            overlap = abs(np.trace(dagger(certs[a].unitary) @ certs[b].unitary))
            if d - overlap > d * tol:
                ok = False
                mismatched = (a, b)
                break

    q = float(sum(certs[k].probability for k in contributing))
    if contributing:
        unitary = certs[contributing[0]].unitary
    else:
        unitary = np.eye(d, dtype=complex)
        q = 0.0
        ok = False

    residual = _definition_residual(
        ch, v1, v2, env_in, env_out, q, unitary, check_states, seed
    )
    if residual > tol:
        ok = False

    return UuqcCertificate(
        is_uuqc=ok and q > tol,
        total_probability=q,
        per_element=certs,
        unitary=unitary,
        definition_residual=residual,
        mismatched_pair=mismatched,
    )


def refine(
    ch: KrausChannel,
    v1: SubspaceIsometry | None = None,
    v2: SubspaceIsometry | None = None,
    env_in: int = 1,
    env_out: int = 1,
    env_in_basis: np.ndarray | None = None,
    env_out_basis: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
) -> KrausChannel:
    """Rewrite a certified channel so every environment factor is rank one.

    The environment factors of all contributing elements are expanded in the
    chosen environment bases and recombined per basis-index pair: the element
    for ``(i, j)`` is ``w * U (x) |out_j><in_i|`` with
    ``w = sqrt(sum_k |<out_j| T_k |in_i>|^2)``.  The result represents the
    same unitary with the same total probability, and is supported on the
    certified subspaces.
    """
    _check_env_dims(env_in, env_out)
    if v1 is None:
        v1 = SubspaceIsometry.full(ch.in_dim // env_in)
    if v2 is None:
        v2 = SubspaceIsometry.full(ch.out_dim // env_out)
    cert = certify_uuqc(ch, v1, v2, env_in, env_out, tol)
    if not cert.is_uuqc:
        raise ValueError("refinement requires a certified channel")

    b_in = np.eye(env_in, dtype=complex) if env_in_basis is None else np.asarray(env_in_basis, dtype=complex)
    b_out = np.eye(env_out, dtype=complex) if env_out_basis is None else np.asarray(env_out_basis, dtype=complex)
    if b_in.shape != (env_in, env_in) or b_out.shape != (env_out, env_out):
        raise ValueError("environment bases must be square in their leg dimensions")

    # Expansion coefficients of every contributing environment factor:
    # row j, column i holds <out_j| T_k |in_i>.
    weights2 = np.zeros((env_out, env_in))
    for c in cert.per_element:
        if c.probability > tol:
            coeff = dagger(b_out) @ c.env_factor @ b_in
            weights2 += np.abs(coeff) ** 2

    embedded_u = v2.columns @ cert.unitary @ dagger(v1.columns)
    elems = []
    for j in range(env_out):
        for i in range(env_in):
            w = np.sqrt(weights2[j, i])
            if w <= tol:
                continue
            env_part = np.outer(b_out[:, j], np.conj(b_in[:, i]))
            elems.append(w * tensor_product(embedded_u, env_part))
    if not elems:
        raise ValueError("refinement produced no elements")
    return KrausChannel(tuple(elems))


def extend_by_identity(ch: KrausChannel, ancilla_dim: int) -> KrausChannel:
    """Tensor an identity map on an ancilla onto the slow side of a channel."""
    if ancilla_dim < 1:
        raise ValueError("ancilla_dim must be >= 1")
    if ancilla_dim == 1:
        return ch
    eye = np.eye(ancilla_dim)
    return KrausChannel(tuple(tensor_product(eye, e) for e in ch.elements))
