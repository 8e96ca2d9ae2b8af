"""Input-noise families: depolarisation, per-copy coherent drift, and
per-copy stochastic perturbations.

The drift and perturbation paths both come in two orders.  EXACT builds
honest joint states (unitaries applied, PSD enforced).  FIRST builds the
first-order truncations the suppression predictions are derived from; those
truncations are intentionally unnormalised / non-PSD intermediates and are
returned through the permissive MultiRegisterState container without
validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .densmat import (
    DensityMatrix,
    MultiRegisterState,
    check_hermitian,
    dense_cap,
    partial_trace_keep_first,
    trace_moment,
)
from .permgroup import PermutationGroup, _cached_average

EXACT = "EXACT"
FIRST = "FIRST"


def _pure_vector(dm: DensityMatrix, name: str = "state") -> np.ndarray:
    vals, vecs = np.linalg.eigh(dm.matrix)
    if abs(vals[-1] - 1.0) > 1e-10:
        raise ValueError(f"{name} must be pure, leading eigenvalue {vals[-1]:.12f}")
    return vecs[:, -1]


def _kron_chain(factors) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def _check_joint_dim(d: int, m: int):
    if d**m > dense_cap():
        raise ValueError(f"dense dimension {d}**{m} = {d**m} exceeds cap {dense_cap()}")


@dataclass(frozen=True)
class CoherentDriftEnsemble:
    """Independent per-copy drift generators H_k with |eigenvalues| <= epsilon,
    acting for one time step delta_t each."""

    copies: int
    local_dim: int
    hamiltonians: tuple
    epsilon: float
    delta_t: float

    def __post_init__(self):
        object.__setattr__(
            self, "hamiltonians", tuple(np.asarray(h, dtype=complex) for h in self.hamiltonians)
        )
        if len(self.hamiltonians) != self.copies:
            raise ValueError(f"expected {self.copies} generators, got {len(self.hamiltonians)}")
        for k, h in enumerate(self.hamiltonians):
            if h.shape != (self.local_dim, self.local_dim):
                raise ValueError(f"generator {k} has shape {h.shape}")
            check_hermitian(h)
            top = float(np.max(np.abs(np.linalg.eigvalsh(h)))) if h.size else 0.0
            if top > self.epsilon + 1e-12:
                raise ValueError(f"generator {k} spectral norm {top:.3e} exceeds {self.epsilon}")

    def step_unitaries(self) -> list:
        """e^{i H_k delta_t} for each copy, via eigendecomposition."""
        out = []
        for h in self.hamiltonians:
            vals, vecs = np.linalg.eigh(h)
            out.append((vecs * np.exp(1j * vals * self.delta_t)) @ vecs.conj().T)
        return out


@dataclass(frozen=True)
class StochasticPerturbation:
    """Per-copy trace-free Hermitian perturbations at a common scale."""

    copies: int
    sigmas: tuple
    scale: float

    def __post_init__(self):
        object.__setattr__(
            self, "sigmas", tuple(np.asarray(s, dtype=complex) for s in self.sigmas)
        )
        if len(self.sigmas) != self.copies:
            raise ValueError(f"expected {self.copies} perturbations, got {len(self.sigmas)}")
        for k, s in enumerate(self.sigmas):
            check_hermitian(s)
            if abs(np.trace(s)) > 1e-12:
                raise ValueError(f"perturbation {k} is not trace-free")


@dataclass(frozen=True)
class GeneralStochastic:
    """Mixture family (1-p) rho0 + p sigma with pure rho0."""

    rho0: DensityMatrix
    sigma: DensityMatrix
    p: float

    def mixture(self) -> DensityMatrix:
        return DensityMatrix((1.0 - self.p) * self.rho0.matrix + self.p * self.sigma.matrix)

    def validate(self) -> "GeneralStochastic":
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if abs(trace_moment(self.rho0, 2) - 1.0) > 1e-10:
            raise ValueError("rho0 must be pure")
        self.mixture().validate()
        return self


def depolarise(rho0: DensityMatrix, p: float, d: int) -> DensityMatrix:
    """(1-p) rho0 + p I/d."""
    if rho0.dim != d:
        raise ValueError(f"rho0 has dimension {rho0.dim}, expected {d}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return DensityMatrix((1.0 - p) * rho0.matrix + (p / d) * np.eye(d))


def random_drift_ensemble(
    copies: int, local_dim: int, epsilon: float, delta_t: float, seed: int
) -> CoherentDriftEnsemble:
    """Gaussian Hermitian generators rescaled so each spectral norm is
    exactly epsilon (the bound is tight, which keeps ensembles comparable
    across seeds)."""
    rng = np.random.default_rng(seed)
    hams = []
    for _ in range(copies):
        g = rng.normal(size=(local_dim, local_dim)) + 1j * rng.normal(size=(local_dim, local_dim))
        h = 0.5 * (g + g.conj().T)
        h *= epsilon / np.max(np.abs(np.linalg.eigvalsh(h)))
        hams.append(h)
    return CoherentDriftEnsemble(copies, local_dim, tuple(hams), epsilon, delta_t)


def random_perturbation(
    rho0: DensityMatrix, copies: int, scale: float, seed: int
) -> StochasticPerturbation:
    """Trace-free perturbations sigma_i = tau_i - rho0 with tau_i random
    full-rank densities.

    This mixture form is the generic sampler that actually satisfies the
    PSD requirement: rho0 + scale*sigma_i = (1-scale) rho0 + scale tau_i is
    a state for every scale in [0, 1], whereas an unconstrained Gaussian
    Hermitian direction leaves the state cone at any positive scale.
    """
    rng = np.random.default_rng(seed)
    d = rho0.dim
    sigmas = []
    for _ in range(copies):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        tau = g @ g.conj().T
        tau /= np.trace(tau).real
        sig = tau - rho0.matrix
        sig = 0.5 * (sig + sig.conj().T)
        sig -= (np.trace(sig) / d) * np.eye(d)
        sigmas.append(sig)
    return StochasticPerturbation(copies, tuple(sigmas), scale)


def coherent_inputs(
    e: CoherentDriftEnsemble, target: DensityMatrix, order: str
) -> MultiRegisterState:
    """Joint input after one drift step on every copy of the target.

    EXACT applies the unitaries e^{i H_k delta_t}; FIRST keeps the
    first-order expansion (I + i H_k delta_t) per copy, renormalised.
    """
    if target.dim != e.local_dim:
        raise ValueError(f"target dimension {target.dim} != {e.local_dim}")
    _check_joint_dim(e.local_dim, e.copies)
    v = _pure_vector(target, "target")
    if order == EXACT:
        joint = _kron_chain([u @ v for u in e.step_unitaries()])
    elif order == FIRST:
        joint = _kron_chain([v] * e.copies).astype(complex)
        for k, h in enumerate(e.hamiltonians):
            factors = [v] * e.copies
            factors[k] = 1j * e.delta_t * (h @ v)
            joint = joint + _kron_chain(factors)
        joint = joint / np.linalg.norm(joint)
    else:
        raise ValueError(f"unknown order {order!r}")
    state = DensityMatrix(np.outer(joint, joint.conj()))
    return MultiRegisterState(copies=e.copies, local_dim=e.local_dim, state=state)


def perturbed_inputs(
    s: StochasticPerturbation, rho0: DensityMatrix, order: str
) -> MultiRegisterState:
    """Joint input (x)_i (rho0 + scale sigma_i), or its first-order
    truncation rho0^(x)M + scale sum_i (... sigma_i at slot i ...).

    The truncation is deliberately left unnormalised (its trace is already
    exactly 1 because the sigma_i are trace-free) and may be indefinite.
    """
    d = rho0.dim
    _check_joint_dim(d, s.copies)
    for k, sig in enumerate(s.sigmas):
        if sig.shape[0] != d:
            raise ValueError(f"perturbation {k} has dimension {sig.shape[0]}, expected {d}")
        lo = float(np.linalg.eigvalsh(rho0.matrix + s.scale * sig).min())
        if lo < -1e-10:
            raise ValueError(
                f"PSD violation at scale {s.scale}: copy {k} minimum eigenvalue {lo:.3e}"
            )
    if order == EXACT:
        joint = _kron_chain([rho0.matrix + s.scale * sig for sig in s.sigmas])
    elif order == FIRST:
        joint = _kron_chain([rho0.matrix] * s.copies)
        for k, sig in enumerate(s.sigmas):
            factors = [rho0.matrix] * s.copies
            factors[k] = s.scale * sig
            joint = joint + _kron_chain(factors)
    else:
        raise ValueError(f"unknown order {order!r}")
    return MultiRegisterState(copies=s.copies, local_dim=d, state=DensityMatrix(joint))


@lru_cache(maxsize=2)
def _projected_kernel(label: str, m: int, d: int, vec_bytes: bytes) -> np.ndarray:
    # A (Q1 (x) I) A with A the cached group average; Q1 = I - |v><v|.
    # Cached because ensemble sweeps evaluate it for hundreds of states.
    avg = _cached_average(label, m, d)
    v = np.frombuffer(vec_bytes, dtype=complex)
    rest = avg.shape[0] // d
    ar = avg.reshape(d, rest, avg.shape[0])
    qa = avg - np.einsum("i,j,jax->iax", v, v.conj(), ar).reshape(avg.shape)
    return avg @ qa


def deviation_probability(
    state: MultiRegisterState, target: DensityMatrix, projected: bool, group: PermutationGroup
) -> float:
    """Unnormalised weight of non-target components on register 1.

    With projected=True the group average A is applied first (the weight of
    register-1 deviation surviving post-selection); otherwise the weight is
    read directly off the input.  The state may be unnormalised.
    """
    if target.dim != state.local_dim:
        raise ValueError(f"target dimension {target.dim} != {state.local_dim}")
    if group.copies != state.copies:
        raise ValueError(f"group acts on {group.copies} registers, state has {state.copies}")
    v = _pure_vector(target, "target")
    if not projected:
        red = partial_trace_keep_first(state).matrix
        return float((np.trace(red) - v.conj() @ red @ v).real)
    kern = _projected_kernel(group.label, group.copies, state.local_dim, v.tobytes())
    return float(np.einsum("ij,ji->", kern, state.matrix).real)
