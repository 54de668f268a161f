"""Unambiguous dense coding over a partially entangled shared state.

Sending one of ``D**2`` messages through a Schmidt-rank-``D`` shared ket
with equal success probability caps that probability at ``D * lambda_D**2``.
The optimal protocol saturating the cap encodes with the shift/clock family,
distills the shared state with the one-shot filter ``diag(lambda_D /
lambda_i)`` on the receiving side, and then discriminates the resulting
orthonormal basis.

Slot convention for bipartite kets here: the receiver's retained particle is
the slow (first) tensor factor, the particle the sender encodes and
transmits is the fast (second) one.  The linear-form verifier stacks the
encoders column-wise as kets with the retained-side index slow, so a
protocol acts as ``B (diag(lambdas) (x) I) A_stack = r I`` exactly when
every message is sent faithfully with amplitude ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_TOL, dagger, frobenius, partial_trace, shift_clock_unitaries, tensor_product

__all__ = [
    "SharedState",
    "DenseCodingProtocol",
    "SimulationResult",
    "BoundReport",
    "weyl_operators",
    "capacity",
    "optimal_protocol",
    "optimal_receiver",
    "simulate",
    "verify_protocol_bound",
]


@dataclass(frozen=True)
class SharedState:
    """Schmidt spectrum of the shared ket: descending positive ``lambdas``
    with unit squared sum."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size < 1:
            raise ValueError("lambdas must be a nonempty 1-D array")
        if np.any(np.diff(lam) > 0):
            raise ValueError("lambdas must be sorted descending")
        if lam[-1] <= 0:
            raise ValueError("all Schmidt coefficients must be positive")
        if abs(np.sum(lam**2) - 1.0) > 1e-12:
            raise ValueError("squared Schmidt coefficients must sum to one")
        lam = lam.copy()
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def rank(self) -> int:
        return self.lambdas.size

    def ket(self) -> np.ndarray:
        """The shared ket ``sum_i lambda_i |ii>`` (symmetric in the slots)."""
        d = self.rank
        out = np.zeros(d * d, dtype=complex)
        out[np.arange(d) * d + np.arange(d)] = self.lambdas
        return out

    @classmethod
    def from_squares(cls, lambdas_squared) -> "SharedState":
        return cls(np.sqrt(np.asarray(lambdas_squared, dtype=float)))


@dataclass(frozen=True)
class DenseCodingProtocol:
    """Encoders, the receiver-side filter, and the discrimination basis."""

    encoders: tuple
    filter: np.ndarray
    discrimination_basis: np.ndarray  # columns are the basis kets


@dataclass(frozen=True)
class SimulationResult:
    sent: np.ndarray
    succeeded: np.ndarray
    decode_errors: int

    @property
    def per_message_rate(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.where(self.sent > 0, self.succeeded / self.sent, 0.0)

    @property
    def pooled_rate(self) -> float:
        return float(np.sum(self.succeeded) / np.sum(self.sent))

    @property
    def trials(self) -> int:
        return int(np.sum(self.sent))


@dataclass(frozen=True)
class BoundReport:
    """Outcome of the linear-form bound verification."""

    r: complex
    form_residual: float
    form_holds: bool
    success_probability: float  # |r|^2
    bound: float                # D * lambda_D^2
    bound_satisfied: bool
    gram_trace_max_eigenvalue: float
    gram_trace_ok: bool


def weyl_operators(D: int) -> tuple:
    """The ``D**2`` shift/clock encoders: unitary, pairwise trace-orthogonal."""
    if D < 2:
        raise ValueError("dense coding needs D >= 2")
    return tuple(shift_clock_unitaries(D))


def capacity(state: SharedState) -> float:
    """Maximal equal success probability: ``D * lambda_D**2``."""
    return float(state.rank * state.lambdas[-1] ** 2)


def optimal_protocol(state: SharedState) -> DenseCodingProtocol:
    """Filter-then-discriminate protocol achieving the capacity.

    The filter ``diag(lambda_D / lambda_i)`` turns the shared ket into the
    canonical entangled ket with probability ``D * lambda_D**2``; the
    discrimination basis is the encoded canonical ket for each message,
    which is orthonormal for trace-orthogonal unitary encoders.
    """
    D = state.rank
    encoders = weyl_operators(D)
    filt = np.diag(state.lambdas[-1] / state.lambdas).astype(complex)
    phi = np.eye(D, dtype=complex).reshape(-1) / np.sqrt(D)
    basis = np.column_stack([tensor_product(np.eye(D), a) @ phi for a in encoders])
    return DenseCodingProtocol(encoders=encoders, filter=filt, discrimination_basis=basis)


def simulate(
    state: SharedState,
    protocol: DenseCodingProtocol,
    trials: int = 100_000,
    seed=0,
) -> SimulationResult:
    """Monte Carlo run of a dense-coding protocol.

    Each trial draws a uniform message, encodes the transmitted half of the
    shared ket, Born-samples the receiver's two-outcome filter, and on
    success measures in the discrimination basis.  Decoding mistakes on
    success are counted and should be zero for an unambiguous protocol.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    D = state.rank
    n_msg = len(protocol.encoders)
    ket = state.ket()
    eye = np.eye(D)

    success_prob = np.empty(n_msg)
    outcome_dist = np.empty((n_msg, n_msg))
    for x, a in enumerate(protocol.encoders):
        encoded = tensor_product(eye, a) @ ket
        filtered = tensor_product(protocol.filter, eye) @ encoded
        p_succ = float(np.vdot(filtered, filtered).real)
        success_prob[x] = p_succ
        if p_succ > 0:
            amps = dagger(protocol.discrimination_basis) @ (filtered / np.sqrt(p_succ))
            dist = np.abs(amps) ** 2
            outcome_dist[x] = dist / np.sum(dist)
        else:
            outcome_dist[x] = np.full(n_msg, 1.0 / n_msg)

    rng = np.random.default_rng(seed)
    messages = rng.integers(0, n_msg, size=trials)
    coins = rng.uniform(size=trials)
    sent = np.bincount(messages, minlength=n_msg)
    succeeded = np.zeros(n_msg, dtype=np.int64)
    decode_errors = 0
    for x in range(n_msg):
        mask = messages == x
        wins = int(np.sum(coins[mask] < success_prob[x]))
        succeeded[x] = wins
        if wins:
            decoded = rng.choice(n_msg, size=wins, p=outcome_dist[x])
            decode_errors += int(np.sum(decoded != x))
    return SimulationResult(sent=sent, succeeded=succeeded, decode_errors=decode_errors)


def verify_protocol_bound(
    state: SharedState,
    encoders,
    bob: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> BoundReport:
    """Check a protocol's linear form and the capacity bound.

    Stacks the vectorized encoders (retained-side index slow) into columns,
    applies the shared-state diagonal on the retained slot and the receiver
    operator, and tests whether the product is ``r`` times the identity.
    When the form holds, ``|r|**2`` is the protocol's equal success
    probability and must respect ``D * lambda_D**2``.  The trace condition
    on the stacked encoders' Gram operator is verified alongside; it holds
    whenever every encoder is trace-non-increasing.
    """
    D = state.rank
    n_msg = D * D
    encoders = [np.asarray(a, dtype=complex) for a in encoders]
    if len(encoders) != n_msg:
        raise ValueError(f"expected {n_msg} encoders, got {len(encoders)}")
    for k, a in enumerate(encoders):
        if a.shape != (D, D):
            raise ValueError(f"encoder {k} has shape {a.shape}, expected ({D}, {D})")
        top = float(np.max(np.linalg.eigvalsh(dagger(a) @ a)))
        if top > 1.0 + tol:
            raise ValueError(f"encoder {k} is not trace-non-increasing")
    bob = np.asarray(bob, dtype=complex)
    if bob.shape != (n_msg, n_msg):
        raise ValueError(f"receiver operator must be {n_msg} x {n_msg}")
    top = float(np.max(np.linalg.eigvalsh(dagger(bob) @ bob)))
    if top > 1.0 + tol:
        raise ValueError("receiver operator must satisfy B^dag B <= I")

    # Column x holds the encoder ket with the retained-side index slow,
    # i.e. entry (j*D + i) is A_x[i, j].
    stacked = np.column_stack([a.T.reshape(-1) for a in encoders])
    lifted = tensor_product(np.diag(state.lambdas), np.eye(D)) @ stacked
    product = bob @ lifted

    r = complex(np.trace(product) / n_msg)
    form_residual = frobenius(product - r * np.eye(n_msg))
    bound = capacity(state)
    success = float(abs(r) ** 2)

    gram = partial_trace(stacked @ dagger(stacked), (D, D), keep=(0,))
    gram_max = float(np.max(np.linalg.eigvalsh(gram)))

    return BoundReport(
        r=r,
        form_residual=form_residual,
        form_holds=form_residual <= tol,
        success_probability=success,
        bound=bound,
        bound_satisfied=success <= bound + tol,
        gram_trace_max_eigenvalue=gram_max,
        gram_trace_ok=gram_max <= n_msg + tol,
    )


def optimal_receiver(protocol: DenseCodingProtocol) -> np.ndarray:
    """Receiver operator of the optimal protocol in one matrix: project onto
    each discrimination ket after filtering the retained slot."""
    basis = protocol.discrimination_basis
    D = protocol.filter.shape[0]
    return dagger(basis) @ tensor_product(protocol.filter, np.eye(D))
