"""Quantum operations in operator-sum form.

Trace-decreasing channels are first-class here: physicality only requires
the element Gram sum to sit below the identity, and a separate flag reports
whether the channel is trace-preserving.  Choi states are returned
unnormalized so their trace keeps the channel's success weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_TOL, dagger, frobenius, tensor_product

__all__ = [
    "KrausChannel",
    "PhysicalityReport",
    "apply",
    "is_physical",
    "choi_state",
    "compose",
    "povm_of",
    "identity_channel",
    "maximally_entangled_ket",
]


@dataclass(frozen=True)
class KrausChannel:
    """A quantum operation given by its Kraus (operation) elements.

    Every element is an ``out_dim x in_dim`` complex matrix.  Construction
    checks shapes only; physicality is a separate query so that deliberately
    unphysical element sets can still be inspected.
    """

    elements: tuple

    def __post_init__(self):
        if len(self.elements) == 0:
            raise ValueError("a channel needs at least one Kraus element")
        mats = []
        shape = None
        for k, e in enumerate(self.elements):
            arr = np.asarray(e, dtype=complex)
            if arr.ndim != 2:
                raise ValueError(f"Kraus element {k} is not a matrix")
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise ValueError(
                    f"Kraus element {k} has shape {arr.shape}, expected {shape}"
                )
            arr = arr.copy()
            arr.setflags(write=False)
            mats.append(arr)
        object.__setattr__(self, "elements", tuple(mats))

    @property
    def in_dim(self) -> int:
        return self.elements[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.elements[0].shape[0]

    def gram_sum(self) -> np.ndarray:
        """Sum of POVM elements ``sum_k E_k^dag E_k``."""
        return sum(dagger(e) @ e for e in self.elements)


@dataclass(frozen=True)
class PhysicalityReport:
    physical: bool
    trace_preserving: bool
    max_eigenvalue: float


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),))


def maximally_entangled_ket(d: int) -> np.ndarray:
    """The canonical rank-``d`` uniformly entangled ket on ``d x d``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def apply(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Operator-sum action ``sum_k E_k rho E_k^dag``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.in_dim, ch.in_dim):
        raise ValueError(f"state shape {rho.shape} does not match in_dim {ch.in_dim}")
    out = np.zeros((ch.out_dim, ch.out_dim), dtype=complex)
    for e in ch.elements:
        out += e @ rho @ dagger(e)
    return out


def is_physical(ch: KrausChannel, tol: float = DEFAULT_TOL) -> PhysicalityReport:
    """Check ``sum_k E_k^dag E_k <= I`` and report trace preservation."""
    gram = ch.gram_sum()
    max_eig = float(np.max(np.linalg.eigvalsh(gram)))
    trace_preserving = frobenius(gram - np.eye(ch.in_dim)) <= tol
    return PhysicalityReport(max_eig <= 1.0 + tol, trace_preserving, max_eig)


def choi_state(ch: KrausChannel) -> np.ndarray:
    """Send one half of the canonical entangled ket through the channel.

    The reference system has dimension ``in_dim`` and sits on the slow
    tensor slot.  The result is left unnormalized: its trace equals the
    average success weight ``Tr(sum_k E_k^dag E_k) / in_dim``.
    """
    d = ch.in_dim
    phi = maximally_entangled_ket(d)
    rho = np.outer(phi, phi.conj())
    out = np.zeros((d * ch.out_dim, d * ch.out_dim), dtype=complex)
    eye = np.eye(d)
    for e in ch.elements:
        big = tensor_product(eye, e)
        out += big @ rho @ dagger(big)
    return out


def compose(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """Channel equal to applying ``first`` and then ``second``."""
    if first.out_dim != second.in_dim:
        raise ValueError(
            f"cannot compose: first.out_dim={first.out_dim} != second.in_dim={second.in_dim}"
        )
    elems = [b @ a for a in first.elements for b in second.elements]
    return KrausChannel(tuple(elems))


def povm_of(ch: KrausChannel) -> tuple:
    """POVM elements ``E_k^dag E_k`` of the measurement the channel induces."""
    return tuple(dagger(e) @ e for e in ch.elements)
