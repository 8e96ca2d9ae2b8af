"""Dense density-matrix containers and the handful of primitives everything
else is built from.

Conventions used throughout the package:

* register 1 is the most significant (leftmost) tensor factor, so an M-copy
  state on local dimension d indexes as ``rho[i1...iM, j1...jM]`` with i1
  varying slowest;
* validation is explicit.  Constructors store what they are given; call
  ``validate()`` when you want the physical invariants enforced.  Intermediate
  objects (first-order perturbation truncations, unnormalised post-selection
  numerators) are deliberately allowed to violate them.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

DENSE_CAP_ENV = "QPURIFY_DENSE_CAP"
DEFAULT_DENSE_CAP = 4096


def dense_cap() -> int:
    """Largest total dimension d**M the dense backend will materialise.

    Overridable through the QPURIFY_DENSE_CAP environment variable; read at
    call time so tests (and long-running shells) can adjust it.
    """
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None:
        return DEFAULT_DENSE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{DENSE_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 2:
        raise ValueError(f"{DENSE_CAP_ENV} must be >= 2, got {cap}")
    return cap


def _as_square_complex(matrix) -> np.ndarray:
    arr = np.asarray(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def check_hermitian(matrix: np.ndarray, tol: float = HERMITICITY_TOL) -> float:
    """Return the max-abs deviation from Hermiticity, raising if above tol."""
    dev = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian: max deviation {dev:.3e} > {tol:.1e}")
    return dev


@dataclass
class DensityMatrix:
    """A single-register density matrix.

    ``matrix`` is stored as given.  ``validate()`` checks Hermiticity within
    1e-12, unit trace within 1e-12 and min eigenvalue >= -1e-10.
    """

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = _as_square_complex(self.matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self) -> "DensityMatrix":
        check_hermitian(self.matrix)
        tr = complex(np.trace(self.matrix))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} deviates from 1 by more than {TRACE_TOL:.1e}")
        lo = float(np.linalg.eigvalsh(self.matrix).min())
        if lo < EIGENVALUE_FLOOR:
            raise ValueError(f"minimum eigenvalue {lo:.3e} below floor {EIGENVALUE_FLOOR:.1e}")
        return self


@dataclass
class MultiRegisterState:
    """An M-register state on (C^d)^(x)M, register 1 leftmost.

    ``state`` holds the full d**M x d**M matrix.  Like DensityMatrix the
    container is permissive; unnormalised or indefinite matrices are legal
    payloads (post-selection numerators, perturbative truncations) and only
    ``validate()`` enforces the density-matrix invariants.
    """

    copies: int
    local_dim: int
    state: DensityMatrix

    def __post_init__(self):
        if self.copies < 1:
            raise ValueError(f"copies must be >= 1, got {self.copies}")
        if self.local_dim < 2:
            raise ValueError(f"local_dim must be >= 2, got {self.local_dim}")
        expect = self.local_dim**self.copies
        if self.state.dim != expect:
            raise ValueError(
                f"state dimension {self.state.dim} != local_dim**copies = {expect}"
            )

    @property
    def dim(self) -> int:
        return self.state.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.state.matrix

    def validate(self) -> "MultiRegisterState":
        self.state.validate()
        return self


def tensor_product(a, b):
    """Kronecker product keeping the kind of its arguments.

    Two DensityMatrix inputs give a DensityMatrix; two raw arrays (Hermitian
    operators and friends) give an array.  The left factor is the more
    significant one, matching the register-1-leftmost convention.
    """
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix))
    if isinstance(a, DensityMatrix) or isinstance(b, DensityMatrix):
        raise TypeError("tensor_product requires both arguments of the same kind")
    return np.kron(_as_square_complex(a), _as_square_complex(b))


def tensor_power(rho: DensityMatrix, m: int) -> MultiRegisterState:
    """rho^(x)m as an m-register state.  Refuses dimensions above the cap."""
    if m < 1:
        raise ValueError(f"tensor power needs m >= 1, got {m}")
    d = rho.dim
    total = d**m
    cap = dense_cap()
    if total > cap:
        raise ValueError(
            f"dense dimension {d}**{m} = {total} exceeds cap {cap}"
            f" (raise {DENSE_CAP_ENV} to override)"
        )
    out = rho.matrix
    for _ in range(m - 1):
        out = np.kron(out, rho.matrix)
    return MultiRegisterState(copies=m, local_dim=d, state=DensityMatrix(out))


def partial_trace_keep_first(s: MultiRegisterState) -> DensityMatrix:
    """Trace out registers 2..M, keeping register 1.

    Works on unnormalised matrices too (the trace is preserved exactly), which
    is what post-selection numerators need.
    """
    d = s.local_dim
    rest = s.dim // d
    t = s.matrix.reshape(d, rest, d, rest)
    return DensityMatrix(np.einsum("iaja->ij", t))


def trace_moment(rho: DensityMatrix, m: int) -> float:
    """Tr[rho**m] for integer m >= 1, by repeated matrix product."""
    if m < 1:
        raise ValueError(f"trace moment needs m >= 1, got {m}")
    if m == 1:
        return float(np.trace(rho.matrix).real)
    acc = rho.matrix
    for _ in range(m - 1):
        acc = acc @ rho.matrix
    return float(np.trace(acc).real)


def state_metrics(rho: DensityMatrix, rho0: DensityMatrix) -> dict:
    """Fidelity Tr[rho0 rho] and purity Tr[rho**2].

    The fidelity reading assumes rho0 is pure (purity within 1e-10 of 1);
    for mixed rho0 the returned number is just the overlap.
    """
    if rho.dim != rho0.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {rho0.dim}")
    fid = float(np.trace(rho0.matrix @ rho.matrix).real)
    pur = float(np.trace(rho.matrix @ rho.matrix).real)
    return {"fidelity": fid, "purity": pur}


def random_density(d: int, rank: int, seed: int) -> DensityMatrix:
    """Random rank-`rank` density matrix on C^d, deterministic in `seed`.

    Wishart construction: G G^dagger with G a d x rank complex Gaussian,
    trace-normalised.  Identical seeds give bit-identical matrices.
    """
    if not 1 <= rank <= d:
        raise ValueError(f"rank must satisfy 1 <= rank <= d, got rank={rank}, d={d}")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    mat = g @ g.conj().T
    mat /= np.trace(mat).real
    # symmetrise away the last few ulps so validate() never trips on roundoff
    mat = 0.5 * (mat + mat.conj().T)
    return DensityMatrix(mat)
