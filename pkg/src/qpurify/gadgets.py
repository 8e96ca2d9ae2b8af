"""Purification gadgets on dense multi-register states.

Every permutation gadget here is the same object in different clothing: put M
noisy copies in the joint state X, average the register-permutation matrices
of a chosen set G into A, post-select on the symmetric outcome (probability
Tr[A X A^dagger]), and keep register 1 of the conditioned state.  Conjugating
with A rather than multiplying once keeps the arithmetic honest even when A
is not idempotent (the two-element derangement average).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densmat import (
    DensityMatrix,
    MultiRegisterState,
    check_hermitian,
    partial_trace_keep_first,
    tensor_power,
    trace_moment,
)
from . import permgroup
from .permgroup import PermutationGroup, build_group, group_projector

VANISHING_ACCEPT = 1e-12

GADGET_KINDS = ("SWAP", "SGG", "CGG", "GSG", "ESD", "RSG")

_KIND_GROUP = {"SGG": permgroup.SYMMETRIC, "CGG": permgroup.CYCLIC, "GSG": permgroup.PARALLEL_SWAP}


@dataclass(frozen=True)
class GadgetOutcome:
    """Post-selected state on register 1 plus the acceptance probability.

    When accept_prob falls at or below 1e-12 the conditioned state is
    undefined noise; `purified` is then None and `vanishing` is set instead
    of dividing by the trace.
    """

    purified: object
    accept_prob: float
    vanishing: bool = False


def _sandwich_diagonal(avg: np.ndarray, diag: np.ndarray, d: int) -> tuple:
    # Exact contraction of A diag(x) A^T and its keep-first partial trace:
    # accept = sum_i x_i ||A[:,i]||^2 and
    # out[a,b] = sum_{i,t} A[(a,t),i] x_i A[(b,t),i], with t the traced tail.
    rest = avg.shape[0] // d
    ar = avg.reshape(d, rest, avg.shape[0])
    accept = float(np.einsum("ki,ki,i->", avg, avg, diag))
    out = np.tensordot(ar * diag, ar, axes=([1, 2], [1, 2]))
    return out, accept


def apply_group_gadget(inputs: MultiRegisterState, group: PermutationGroup) -> GadgetOutcome:
    """Run the permutation-average gadget of `group` on a joint input state.

    Heterogeneous (non-i.i.d.) inputs are fine; the state is whatever the
    caller packed into `inputs`.  Acceptance is Tr[A X A^dagger] with A the
    element average, which reduces to Tr[A X] when A is a projector.
    """
    if group.copies != inputs.copies:
        raise ValueError(f"group acts on {group.copies} registers, state has {inputs.copies}")
    avg = group_projector(group, inputs.local_dim)
    x = inputs.matrix
    diag = np.diagonal(x)
    if not x.size or (np.count_nonzero(x - np.diag(diag)) == 0 and not diag.imag.any()):
        out, accept = _sandwich_diagonal(avg, diag.real, inputs.local_dim)
    else:
        s = avg @ x @ avg.T
        accept = float(np.trace(s).real)
        out = partial_trace_keep_first(
            MultiRegisterState(inputs.copies, inputs.local_dim, DensityMatrix(s))
        ).matrix
    if accept <= VANISHING_ACCEPT:
        return GadgetOutcome(purified=None, accept_prob=accept, vanishing=True)
    return GadgetOutcome(purified=DensityMatrix(out / accept), accept_prob=accept)


def swap_gadget(rho: DensityMatrix, sigma: DensityMatrix) -> GadgetOutcome:
    """Two-copy swap test, closed form.

    accept = (1 + Tr[rho sigma]) / 2 and the conditioned register-1 state is
    (rho + sigma + rho sigma + sigma rho) / (4 accept).
    """
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    cross = rho.matrix @ sigma.matrix
    accept = 0.5 * (1.0 + float(np.trace(cross).real))
    if accept <= VANISHING_ACCEPT:
        return GadgetOutcome(purified=None, accept_prob=accept, vanishing=True)
    out = (rho.matrix + sigma.matrix + cross + cross.conj().T) / (4.0 * accept)
    return GadgetOutcome(purified=DensityMatrix(out), accept_prob=accept)


def rsg_purify(rho: DensityMatrix, depth: int) -> GadgetOutcome:
    """Recursive swap cascade: depth levels of pairwise swap tests.

    Level l runs 2**(depth-l) identical pairwise tests, so the probability
    that the whole tree of 2**depth copies post-selects is the product of
    the per-level acceptances raised to their multiplicities.  Only pairwise
    states are ever materialised (dimension d**2, regardless of depth).
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if depth == 0:
        return GadgetOutcome(purified=rho, accept_prob=1.0)
    current = rho
    accept = 1.0
    for level in range(1, depth + 1):
        step = swap_gadget(current, current)
        if step.vanishing:
            return GadgetOutcome(purified=None, accept_prob=0.0, vanishing=True)
        accept *= step.accept_prob ** (2 ** (depth - level))
        current = step.purified
    return GadgetOutcome(purified=current, accept_prob=accept)


def esd_outcome(rho: DensityMatrix, m: int) -> GadgetOutcome:
    """Derangement-pair gadget in closed form.

    The two-element average gives the conditioned state
    (rho + rho**m) / (2 accept) with accept = (1 + Tr[rho**m]) / 2, computed
    with d x d matrix powers; no M-register tensor is needed.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    power = np.linalg.matrix_power(rho.matrix, m)
    accept = 0.5 * (1.0 + float(np.trace(power).real))
    out = (rho.matrix + power) / (2.0 * accept)
    return GadgetOutcome(purified=DensityMatrix(out), accept_prob=accept)


def run_named_gadget(kind: str, rho: DensityMatrix, m: int) -> GadgetOutcome:
    """Dispatch a named gadget on m i.i.d. copies of rho.

    SWAP is the m=2 pairwise test; SGG/CGG/GSG are dense permutation-average
    runs over the symmetric / cyclic / parallel-swap sets; ESD uses its
    closed form; RSG runs the binary swap cascade (m = 2**depth).
    """
    if kind not in GADGET_KINDS:
        raise ValueError(f"unknown gadget kind {kind!r}; expected one of {GADGET_KINDS}")
    if kind == "SWAP":
        if m != 2:
            raise ValueError(f"SWAP is a two-copy gadget, got m={m}")
        return swap_gadget(rho, rho)
    if kind == "ESD":
        return esd_outcome(rho, m)
    if kind == "RSG":
        if m < 1 or m & (m - 1):
            raise ValueError(f"RSG needs a power-of-two copy count, got {m}")
        return rsg_purify(rho, m.bit_length() - 1)
    group = build_group(_KIND_GROUP[kind], m)
    return apply_group_gadget(tensor_power(rho, m), group)


def esd_mitigated_expectation(rho: DensityMatrix, m: int, obs: np.ndarray) -> float:
    """Error-mitigated expectation Tr[rho**m O] / Tr[rho**m].

    `obs` must be Hermitian with spectral norm at most 1 (the ancilla
    readout only estimates expectations in that range).
    """
    obs = np.asarray(obs, dtype=complex)
    check_hermitian(obs)
    norm = float(np.max(np.abs(np.linalg.eigvalsh(obs)))) if obs.size else 0.0
    if norm > 1.0 + 1e-12:
        raise ValueError(f"observable spectral norm {norm:.6f} exceeds 1")
    power = np.linalg.matrix_power(rho.matrix, m)
    return float(np.trace(power @ obs).real) / float(np.trace(power).real)


def hadamard_test_accept(rho: DensityMatrix, m: int, obs: np.ndarray) -> float:
    """Ancilla acceptance probability of the controlled-shift route,
    (1 + Tr[rho**m O]) / 2.

    Cross-validation hook for esd_mitigated_expectation: the moment comes
    back as 2 p - 1, so the mitigated value is
    (2 p_O - 1) / (2 p_I - 1) with p_I the acceptance at O = identity.
    """
    obs = np.asarray(obs, dtype=complex)
    check_hermitian(obs)
    power = np.linalg.matrix_power(rho.matrix, m)
    return 0.5 * (1.0 + float(np.trace(power @ obs).real))


def gsg_overlap_test(phi: np.ndarray, psi: np.ndarray, m: int) -> float:
    """Acceptance of the parallel-swap gadget on phi (x) psi^(x)(m-1).

    Both inputs are pure state vectors.  The dense value equals
    1/m + (1 - 1/m) |<phi|psi>|**2, so the gadget doubles as an overlap
    estimator; the returned number is the dense acceptance probability.
    """
    phi = np.asarray(phi, dtype=complex).ravel()
    psi = np.asarray(psi, dtype=complex).ravel()
    if phi.shape != psi.shape:
        raise ValueError(f"dimension mismatch: {phi.shape} vs {psi.shape}")
    for name, vec in (("phi", phi), ("psi", psi)):
        if abs(np.vdot(vec, vec).real - 1.0) > 1e-10:
            raise ValueError(f"{name} is not normalised")
    joint = phi
    for _ in range(m - 1):
        joint = np.kron(joint, psi)
    group = build_group(permgroup.PARALLEL_SWAP, m)
    avg = group_projector(group, phi.size)
    return float(np.vdot(joint, avg @ joint).real)
