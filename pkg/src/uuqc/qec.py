"""Error correction viewed as a probability-one unambiguous unitary channel.

The composite recover-after-noise operation restricted to the code space is
a probabilistic identity; demanding unit probability reproduces the
Knill-Laflamme correctability condition ``P E_j^dag E_i P = h_ji P``.
Demanding only a *nonzero* probability leads through the channel's Choi
state: the error is correctable with probability ``p`` exactly when the
canonical entangled ket can be distilled from that state with probability
``p`` by operations on the noisy half alone, and correctable with certainty
only when the (pure) Choi state already is a uniformly entangled state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, choi_state, compose
from .entanglement import conversion_probability, is_rank_d_ues, schmidt
from .linalg import (
    DEFAULT_TOL,
    SubspaceIsometry,
    dagger,
    frobenius,
    partial_trace,
)
from .unambiguous import UuqcCertificate, certify_uuqc

__all__ = [
    "CodeSpec",
    "KlReport",
    "CorrectionReport",
    "kl_check",
    "diagonalize_errors",
    "standard_recovery",
    "encoding_channel",
    "verify_correction_uuqc",
    "unambiguous_correction_probability",
    "noise_choi_state",
    "meets_certainty_condition",
]


@dataclass(frozen=True)
class CodeSpec:
    """A code given by its encoding isometry ``encoder`` (n_phys x d)."""

    encoder: np.ndarray

    def __post_init__(self):
        enc = np.asarray(self.encoder, dtype=complex)
        if enc.ndim != 2 or enc.shape[0] < enc.shape[1]:
            raise ValueError("encoder must be a tall matrix")
        if frobenius(dagger(enc) @ enc - np.eye(enc.shape[1])) > 1e-8:
            raise ValueError("encoder columns are not orthonormal")
        enc = enc.copy()
        enc.setflags(write=False)
        object.__setattr__(self, "encoder", enc)

    @property
    def logical_dim(self) -> int:
        return self.encoder.shape[1]

    @property
    def physical_dim(self) -> int:
        return self.encoder.shape[0]

    def code_projector(self) -> np.ndarray:
        return self.encoder @ dagger(self.encoder)

    def subspace(self) -> SubspaceIsometry:
        return SubspaceIsometry(self.encoder)


@dataclass(frozen=True)
class KlReport:
    """Knill-Laflamme verdict: the overlap matrix ``h`` and the worst
    deviation of ``P E_j^dag E_i P`` from ``h_ji P``."""

    correctable: bool
    h: np.ndarray
    residual: float


@dataclass(frozen=True)
class CorrectionReport:
    """Certification of a recover-after-noise composite on the code space.

    ``identity_probability`` counts only the weight of Kraus elements whose
    extracted unitary matches the identity up to phase; it is the probability
    that the composite provably acts as the logical identity.  The full
    channel certificate is kept alongside for inspection.
    """

    certificate: UuqcCertificate
    identity_probability: float

    @property
    def fully_corrected(self) -> bool:
        return self.certificate.is_uuqc and abs(self.identity_probability - 1.0) <= 1e-9


def encoding_channel(code: CodeSpec) -> KrausChannel:
    return KrausChannel((code.encoder,))


def kl_check(code: CodeSpec, errors: KrausChannel, tol: float = DEFAULT_TOL) -> KlReport:
    """Test ``P E_j^dag E_i P = h_ji P`` on the code projector.

    ``h_ji = Tr(P E_j^dag E_i P) / d``; the residual is the largest Frobenius
    deviation over element pairs, evaluated on the logical blocks
    ``C^dag E_j^dag E_i C`` (an isometry-invariant, hence identical, norm).
    ``h`` comes back Hermitian and positive semidefinite for correctable
    sets, with unit trace when the noise is trace-preserving.
    """
    if errors.in_dim != code.physical_dim or errors.out_dim != code.physical_dim:
        raise ValueError("error elements must act on the physical space")
    d = code.logical_dim
    n = len(errors.elements)
    enc = code.encoder
    h = np.zeros((n, n), dtype=complex)
    residual = 0.0
    eye = np.eye(d)
    for j in range(n):
        for i in range(n):
            block = dagger(enc) @ dagger(errors.elements[j]) @ errors.elements[i] @ enc
            hij = np.trace(block) / d
            h[j, i] = hij
            residual = max(residual, frobenius(block - hij * eye))
    return KlReport(correctable=residual <= tol, h=h, residual=float(residual))


def diagonalize_errors(report: KlReport, errors: KrausChannel) -> KrausChannel:
    """Remix the error elements so the overlap matrix becomes diagonal.

    The new elements are combinations by the eigenvectors of ``h``; the remix
    matrix is unitary, so the quantum operation is unchanged while re-running
    the correctability check yields a diagonal ``h`` with the same spectrum.
    """
    if not report.correctable:
        raise ValueError("cannot diagonalize a non-correctable error set")
    _, vecs = np.linalg.eigh(report.h)
    new_elems = []
    for m in range(len(errors.elements)):
        f = np.zeros_like(errors.elements[0])
        for i, e in enumerate(errors.elements):
            f = f + vecs[i, m] * e
        new_elems.append(f)
    return KrausChannel(tuple(new_elems))


def standard_recovery(code: CodeSpec, errors: KrausChannel, tol: float = DEFAULT_TOL) -> KrausChannel:
    """Measure-and-rotate recovery for a correctable error set.

    After diagonalizing the overlap matrix, each surviving error sends the
    code space isometrically onto a mutually orthogonal corrupted space; the
    recovery elements project onto those spaces and rotate them back.  The
    result is trace-decreasing when the corrupted spaces do not fill the
    physical space, which is fine for unambiguous bookkeeping.
    """
    report = kl_check(code, errors, tol)
    if not report.correctable:
        raise ValueError("error set is not correctable on this code")
    rotated = diagonalize_errors(report, errors)
    diag_report = kl_check(code, rotated, max(tol, 1e-8))
    lambdas = np.diagonal(diag_report.h).real
    enc = code.encoder
    elems = []
    for lam, f in zip(lambdas, rotated.elements):
        if lam <= tol:
            continue
        corrupted = f @ enc / np.sqrt(lam)
        elems.append(enc @ dagger(corrupted))
    if not elems:
        raise ValueError("no correctable syndromes with positive weight")
    return KrausChannel(tuple(elems))


def verify_correction_uuqc(
    code: CodeSpec,
    errors: KrausChannel,
    recovery: KrausChannel,
    tol: float = DEFAULT_TOL,
) -> CorrectionReport:
    """Certify encode-noise-recover as a probabilistic logical identity.

    The composite maps the logical space into the physical space; it is
    certified with the full logical space as input subspace and the code
    space as output subspace.  The identity-consistent probability is one
    exactly when the recovery corrects the noise completely.
    """
    if recovery.in_dim != code.physical_dim:
        raise ValueError("recovery must act on the physical space")
    total = compose(compose(encoding_channel(code), errors), recovery)
    v1 = SubspaceIsometry.full(code.logical_dim)
    v2 = code.subspace()
    cert = certify_uuqc(total, v1, v2, 1, 1, tol)
    d = code.logical_dim
    q_id = 0.0
    for c in cert.per_element:
        if c.probability > tol and c.is_uum:
            if d - abs(np.trace(c.unitary)) <= d * tol:
                q_id += c.probability
    return CorrectionReport(certificate=cert, identity_probability=float(q_id))


def noise_choi_state(code: CodeSpec, noise: KrausChannel) -> np.ndarray:
    """Unnormalized Choi state of encode-then-noise with a logical reference."""
    if noise.in_dim != code.physical_dim:
        raise ValueError("noise must act on the physical space")
    return choi_state(compose(encoding_channel(code), noise))


def meets_certainty_condition(code: CodeSpec, noise: KrausChannel, tol: float = 1e-8) -> bool:
    """Necessary condition for correction with certainty: the normalized
    Choi state of encode-then-noise is a rank-``d`` uniformly entangled ket.

    Meaningful as stated for pure Choi states (isometric or filtered noise);
    a mixed Choi state fails the check outright.
    """
    sigma = noise_choi_state(code, noise)
    weight = float(np.trace(sigma).real)
    if weight <= tol:
        return False
    evals, evecs = np.linalg.eigh(sigma)
    if weight - float(evals[-1]) > tol:
        return False
    d = code.logical_dim
    return is_rank_d_ues(evecs[:, -1], d, noise.out_dim, d, tol)


def _filter_candidates(sigma_b: np.ndarray, rng, grid_points: int, random_trials: int):
    """Yield one-sided filter matrices for the distillation lower bound.

    Diagonal filters in the eigenbasis of the noisy-side marginal: a full
    grid over the three leading eigendirections with the remaining entries
    pinned to zero or one, then seeded random diagonals and random
    contractions.
    """
    n = sigma_b.shape[0]
    _, basis = np.linalg.eigh(sigma_b)
    basis = basis[:, ::-1]
    k = min(3, n)
    grid = np.linspace(0.0, 1.0, grid_points)
    mesh = np.stack(np.meshgrid(*([grid] * k), indexing="ij"), axis=-1).reshape(-1, k)
    for head in mesh:
        for fill in (0.0, 1.0):
            diag = np.full(n, fill)
            diag[:k] = head
            yield basis @ np.diag(diag) @ dagger(basis)
            if n == k:
                break
    for _ in range(random_trials // 2):
        diag = rng.uniform(0.0, 1.0, size=n)
        yield basis @ np.diag(diag) @ dagger(basis)
    for _ in range(random_trials - random_trials // 2):
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        yield m / np.linalg.svd(m, compute_uv=False)[0]


def unambiguous_correction_probability(
    code: CodeSpec,
    noise: KrausChannel,
    tol: float = DEFAULT_TOL,
    seed=0,
    grid_points: int = 21,
    random_trials: int = 200,
):
    """Probability that the noise on this code is unambiguously correctable.

    Builds the unnormalized Choi state of encode-then-noise.  When that state
    is pure the answer is exact: its weight times the optimal pure-state
    conversion probability to the canonical entangled ket (method
    ``"pure-exact"``).  Otherwise a seeded search over one-sided filters on
    the noisy half reports the best weight whose filtered output is a pure
    rank-``d`` state, times that output's conversion optimum; an honest
    lower bound, tagged ``"filter-lower-bound"``.
    """
    sigma = noise_choi_state(code, noise)
    d = code.logical_dim
    n = noise.out_dim
    weight = float(np.trace(sigma).real)
    if weight <= tol:
        return 0.0, "pure-exact"
    evals, evecs = np.linalg.eigh(sigma)

    if weight - float(evals[-1]) <= tol:
        psi = evecs[:, -1]
        prob = weight * conversion_probability(schmidt(psi, d, n), d)
        return float(prob), "pure-exact"

    rng = np.random.default_rng(seed)
    sigma_b = partial_trace(sigma, (d, n), keep=(1,))
    best = 0.0
    eye_a = np.eye(d)
    for f in _filter_candidates(sigma_b, rng, grid_points, random_trials):
        big = np.kron(eye_a, f)
        filtered = big @ sigma @ dagger(big)
        w = float(np.trace(filtered).real)
        if w <= best or w <= tol:
            continue
        fe, fv = np.linalg.eigh(filtered)
        if w - float(fe[-1]) > tol:
            continue
        form = schmidt(fv[:, -1], d, n, tol)
        if form.rank != d:
            continue
        best = max(best, w * conversion_probability(form, d))
    return float(best), "filter-lower-bound"
