"""Schmidt machinery, uniformly entangled states, and teleportation checks.

A uniformly entangled state of rank ``d`` has ``d`` nonzero Schmidt
coefficients all equal to ``1/sqrt(d)``.  Holding one with some probability
is interchangeable with holding a probabilistic unitary channel of the same
probability: sending half of the canonical entangled ket through a certified
channel produces the state, and the standard teleportation scheme consumes
the state to rebuild the channel.  Teleporting through a shared pure state
therefore reduces to converting that state into the canonical entangled ket,
whose optimal probability is the tail-sum minimum implemented by
``conversion_probability``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channels import KrausChannel, apply, maximally_entangled_ket
from .linalg import (
    DEFAULT_TOL,
    SubspaceIsometry,
    dagger,
    partial_trace,
    shift_clock_unitaries,
    tensor_product,
)
from .unambiguous import certify_uuqc

__all__ = [
    "SchmidtForm",
    "TeleportCertificate",
    "schmidt",
    "ues",
    "is_rank_d_ues",
    "conversion_probability",
    "uuqc_to_ues",
    "ues_to_uuqc",
    "teleportation_parts",
    "teleport_probability_pure",
    "check_mixed_nonzero",
    "search_mixed_nonzero",
]


@dataclass(frozen=True)
class SchmidtForm:
    """Schmidt data of a bipartite ket: descending coefficients plus bases."""

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    rank: int


@dataclass(frozen=True)
class TeleportCertificate:
    """Teleportation verdict: achievable probability and, for the mixed-state
    check, the subspace pair that witnesses it."""

    probability: float
    rank_d: int
    witness_subspaces: tuple | None = None


def schmidt(psi: np.ndarray, dim_a: int, dim_b: int, tol: float = DEFAULT_TOL) -> SchmidtForm:
    """Schmidt decomposition of a ket on ``dim_a x dim_b``."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != dim_a * dim_b:
        raise ValueError(f"ket length {psi.size} does not match {dim_a}*{dim_b}")
    coeff = psi.reshape(dim_a, dim_b)
    left, values, right_h = np.linalg.svd(coeff, full_matrices=False)
    rank = int(np.sum(values > tol))
    # psi = sum_i values[i] * left[:, i] (x) right_h[i, :]
    return SchmidtForm(values, left, right_h.T, rank)


def ues(d: int) -> np.ndarray:
    """Canonical rank-``d`` uniformly entangled ket on ``d x d``."""
    return maximally_entangled_ket(d)


def is_rank_d_ues(psi: np.ndarray, dim_a: int, dim_b: int, d: int, tol: float = 1e-8) -> bool:
    """True when the ket has exactly ``d`` Schmidt coefficients ~ 1/sqrt(d)."""
    form = schmidt(psi, dim_a, dim_b, tol)
    target = 1.0 / np.sqrt(d)
    values = form.coefficients
    head = values[:d]
    tail = values[d:]
    if head.size < d:
        return False
    return bool(np.max(np.abs(head - target)) <= tol and (tail.size == 0 or np.max(tail) <= tol))


def conversion_probability(sf: SchmidtForm, d: int) -> float:
    """Optimal probability of converting a normalized pure state into the
    canonical rank-``d`` entangled ket by local operations.

    Zero when the Schmidt rank falls short of ``d``; otherwise the minimum
    over cut points ``l`` of ``d * (tail sum of squared coefficients from l)
    / (d - l + 1)``, which is one exactly when the squared spectrum is
    majorized by the flat one.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if sf.rank < d:
        return 0.0
    lam2 = np.asarray(sf.coefficients, dtype=float) ** 2
    best = 1.0
    for cut in range(d):
        tail = float(np.sum(lam2[cut:]))
        best = min(best, d * tail / (d - cut))
    return max(0.0, min(1.0, best))


def uuqc_to_ues(
    ch: KrausChannel,
    v1: SubspaceIsometry | None = None,
    v2: SubspaceIsometry | None = None,
    env_in: int = 1,
    env_out: int = 1,
    tol: float = DEFAULT_TOL,
):
    """Turn a certified channel into the uniformly entangled state it powers.

    Half of the canonical entangled ket is sent through the channel (with an
    identity riding on the kept half); the system output is projected onto
    the certified subspace and the environment is traced away.  Returns the
    success weight, which equals the certified probability, and the
    normalized success ket, which is the kept-side identity tensored with
    the certified unitary acting on the canonical ket.
    """
    if v1 is None:
        v1 = SubspaceIsometry.full(ch.in_dim // env_in)
    if v2 is None:
        v2 = SubspaceIsometry.full(ch.out_dim // env_out)
    cert = certify_uuqc(ch, v1, v2, env_in, env_out, tol)
    if not cert.is_uuqc:
        raise ValueError("channel did not certify; cannot convert to a shared state")
    d = v1.sub_dim

    phi = ues(d)
    embedded = tensor_product(np.eye(d), v1.columns) @ phi
    rho_in = tensor_product(np.outer(embedded, embedded.conj()), np.eye(env_in))
    big = KrausChannel(tuple(tensor_product(np.eye(d), e) for e in ch.elements))
    out = apply(big, rho_in)
    reduced = partial_trace(out, (d, v2.ambient_dim, env_out), keep=(0, 1))
    restrict = tensor_product(np.eye(d), v2.columns)
    sigma = dagger(restrict) @ reduced @ restrict

    weight = float(np.trace(sigma).real)
    evals, evecs = np.linalg.eigh(sigma)
    ket = evecs[:, -1]
    idx = int(np.argmax(np.abs(ket)))
    phase = np.conj(ket[idx]) / abs(ket[idx])
    return weight, ket * phase


def _bell_kets(d: int) -> list[np.ndarray]:
    phi = ues(d)
    return [tensor_product(w, np.eye(d)) @ phi for w in shift_clock_unitaries(d)]


def teleportation_parts(d: int):
    """Measurement bras and corrections of the standard teleportation scheme.

    Returns ``(bras, corrections)``: the ``d**2`` rank-one measurement
    operators on (input, held half) as ``1 x d**2`` matrices, and the
    matching correction unitaries on the receiving side.
    """
    bras = [np.conj(b).reshape(1, -1) for b in _bell_kets(d)]
    corrections = shift_clock_unitaries(d)
    return bras, corrections


def ues_to_uuqc(d: int) -> KrausChannel:
    """Teleportation channel consuming a held canonical entangled ket.

    One Kraus element per generalized measurement outcome: correction
    unitary after the entangled-basis bra, with the held ket supplied
    internally.  Certifies as the identity with unit probability; every
    outcome fires with probability ``1/d**2``.
    """
    if d < 2:
        raise ValueError("teleportation needs d >= 2")
    phi = ues(d)
    bras, corrections = teleportation_parts(d)
    # (bra on (input, held-A) (x) I) ( I_input (x) held ket ) contracts to a
    # d x d matrix; entry (o, i) picks the bra component at (i, o) over sqrt(d).
    elems = []
    for bra, corr in zip(bras, corrections):
        base = bra.reshape(d, d).T / np.sqrt(d)
        elems.append(corr @ base)
    return KrausChannel(tuple(elems))


def teleport_probability_pure(shared: np.ndarray, dim_a: int, dim_b: int, d: int) -> TeleportCertificate:
    """Optimal unambiguous teleportation probability through a shared pure state."""
    shared = np.asarray(shared, dtype=complex).reshape(-1)
    norm = np.linalg.norm(shared)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError("shared ket must be normalized")
    prob = conversion_probability(schmidt(shared, dim_a, dim_b), d)
    return TeleportCertificate(probability=prob, rank_d=d)


def check_mixed_nonzero(
    rho: np.ndarray,
    dim_a: int,
    dim_b: int,
    d: int,
    va: SubspaceIsometry,
    vb: SubspaceIsometry,
    tol: float = DEFAULT_TOL,
) -> TeleportCertificate:
    """Nonzero-probability test for teleportation through a shared mixed state.

    Projects the state onto the supplied ``d x d`` subspace pair; the attempt
    witnesses a nonzero probability exactly when the projection has positive
    weight, is pure, and has Schmidt rank ``d``.  The reported probability is
    the lower bound established by this witness (projection weight times the
    pure-state conversion optimum); the zero certificate means this subspace
    pair proves nothing.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim_a * dim_b, dim_a * dim_b):
        raise ValueError("state shape does not match the factor dimensions")
    if va.sub_dim != d or vb.sub_dim != d:
        raise ValueError(f"witness subspaces must have dimension {d}")
    if va.ambient_dim != dim_a or vb.ambient_dim != dim_b:
        raise ValueError("witness subspaces do not live on the state factors")

    restrict = tensor_product(va.columns, vb.columns)
    block = dagger(restrict) @ rho @ restrict
    weight = float(np.trace(block).real)
    if weight <= tol:
        return TeleportCertificate(0.0, d)
    evals, evecs = np.linalg.eigh(block)
    top = float(evals[-1])
    if weight - top > tol:
        return TeleportCertificate(0.0, d)
    psi = evecs[:, -1]
    form = schmidt(psi, d, d, tol)
    if form.rank != d:
        return TeleportCertificate(0.0, d)
    prob = weight * conversion_probability(form, d)
    return TeleportCertificate(prob, d, witness_subspaces=(va, vb))


def search_mixed_nonzero(
    rho: np.ndarray,
    dim_a: int,
    dim_b: int,
    d: int,
    tol: float = DEFAULT_TOL,
    max_dim: int = 4,
) -> TeleportCertificate:
    """Exhaustive sweep of computational-basis subspace pairs.

    Tries every pair of ``d``-element basis-index subsets in lexicographic
    order and returns the first nonzero certificate, or the zero certificate
    when no pair works.  Guarded to small factor dimensions; larger searches
    need problem-specific subspaces fed to ``check_mixed_nonzero``.
    """
    if dim_a > max_dim or dim_b > max_dim:
        raise ValueError(f"exhaustive sweep limited to factor dims <= {max_dim}")
    for idx_a in combinations(range(dim_a), d):
        va = SubspaceIsometry.from_indices(dim_a, idx_a)
        for idx_b in combinations(range(dim_b), d):
            vb = SubspaceIsometry.from_indices(dim_b, idx_b)
            cert = check_mixed_nonzero(rho, dim_a, dim_b, d, va, vb, tol)
            if cert.probability > 0.0:
                return cert
    return TeleportCertificate(0.0, d)
