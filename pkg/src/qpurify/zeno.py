"""Repetitive stabilisation: noisy step, perfect gadget, repeat.

The full d**M joint state is threaded through all N steps; the gadget's
projector is applied exactly each round (the gadget hardware is assumed
noiseless).  For speed the projector is factored once as P = B B^T with B
the orthonormal basis of group-orbit indicator vectors, so each round costs
two thin rectangular products instead of two dense D^3 multiplies; the
factorisation is exact, not an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .densmat import DensityMatrix, dense_cap
from .noise import CoherentDriftEnsemble, _kron_chain, _pure_vector
from .permgroup import CYCLIC, PARALLEL_SWAP, SYMMETRIC, build_group, orbit_basis

_GADGET_GROUP = {"CGG": CYCLIC, "GSG": PARALLEL_SWAP, "SGG": SYMMETRIC}

# Per-step first-order error budget above which the run is flagged as
# outside the regime the slope predictions are derived for.
STEP_ERROR_GUARD = 0.1


@dataclass
class ZenoRun:
    """Configuration plus (after run_zeno) the recorded trajectory.

    Exactly one of dephasing_eta / drift must be set.  The trajectory holds
    N+1 rows of {step, fidelity, cumulative_accept} including step 0;
    cumulative_accept is non-increasing and fidelities stay in [0, 1].
    """

    steps: int
    copies: int
    gadget: str = "CGG"
    dephasing_eta: float = None
    drift: CoherentDriftEnsemble = None
    trajectory: list = field(default_factory=list)
    flagged: bool = False


def copy_budget(eta: float, steps: int, delta: float) -> int:
    """Copies needed, to first order, to hold the fidelity loss to delta
    over `steps` rounds at per-step rate eta: ceil(-eta N / log(1-delta))."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(-eta * steps / math.log1p(-delta))


def _step_error_estimate(run: ZenoRun) -> float:
    if run.dephasing_eta is not None:
        return run.copies * run.dephasing_eta
    return run.copies * (run.drift.epsilon * run.drift.delta_t) ** 2


def _dephasing_signs(d: int, m: int) -> list:
    # Sign vector of Z on copy k: +1 / -1 by the k-th base-d digit (d = 2).
    dim = d**m
    idx = np.arange(dim)
    signs = []
    for k in range(m):
        digit = (idx // (d ** (m - 1 - k))) % d
        signs.append(np.where(digit == 0, 1.0, -1.0))
    return signs


def run_zeno(run: ZenoRun, rho0: DensityMatrix) -> ZenoRun:
    """Execute the stabilisation loop and return the run with its
    trajectory filled in.

    Each round applies the noise channel to every copy, then the gadget
    projector; the acceptance of round i multiplies into cumulative_accept
    and the state is renormalised before the next round.  rho0 is the pure
    target; with M = 1 the gadget is the identity and the bare channel
    decay is recorded.
    """
    if run.steps < 0:
        raise ValueError(f"steps must be >= 0, got {run.steps}")
    if run.copies < 1:
        raise ValueError(f"copies must be >= 1, got {run.copies}")
    if (run.dephasing_eta is None) == (run.drift is None):
        raise ValueError("set exactly one of dephasing_eta / drift")
    if run.gadget not in _GADGET_GROUP:
        raise ValueError(f"unknown gadget {run.gadget!r}; expected one of {tuple(_GADGET_GROUP)}")
    d = rho0.dim
    m = run.copies
    if d**m > dense_cap():
        raise ValueError(f"dense dimension {d}**{m} = {d**m} exceeds cap {dense_cap()}")
    if run.dephasing_eta is not None:
        if d != 2:
            raise ValueError("the dephasing channel is defined for qubit registers")
        if not 0.0 <= run.dephasing_eta <= 0.5:
            raise ValueError(f"dephasing rate must lie in [0, 0.5], got {run.dephasing_eta}")
        signs = _dephasing_signs(d, m)
        unitaries = None
    else:
        if run.drift.copies != m or run.drift.local_dim != d:
            raise ValueError("drift ensemble does not match the run geometry")
        signs = None
        unitaries = _kron_chain(run.drift.step_unitaries())

    group = build_group(_GADGET_GROUP[run.gadget], m)
    basis = orbit_basis(group, d)
    # Reduced observable for the register-1 fidelity, in the orbit basis.
    rest = d ** (m - 1)
    br = basis.reshape(d, rest, basis.shape[1])
    fid_kernel = basis.T @ np.einsum("ij,jar->iar", rho0.matrix, br).reshape(basis.shape)

    vec = _kron_chain([_pure_vector(rho0, "rho0")] * m)
    state = np.outer(vec, vec.conj())
    eta = run.dephasing_eta
    traj = [{"step": 0, "fidelity": 1.0, "cumulative_accept": 1.0}]
    cumulative = 1.0
    for step in range(1, run.steps + 1):
        if eta is not None:
            for s in signs:
                state = (1.0 - eta) * state + eta * (s[:, None] * state * s[None, :])
        else:
            state = unitaries @ state @ unitaries.conj().T
        small = basis.T @ (state @ basis)
        accept = float(np.trace(small).real)
        cumulative *= accept
        small /= accept
        state = basis @ small @ basis.T
        fid = float(np.einsum("ij,ji->", fid_kernel, small).real)
        traj.append({"step": step, "fidelity": fid, "cumulative_accept": cumulative})
    return replace(
        run, trajectory=traj, flagged=_step_error_estimate(run) >= STEP_ERROR_GUARD
    )


def decay_exponent(run: ZenoRun, window: int = 2) -> float:
    """Fitted decay rate of log(fidelity) over the first `window` rounds.

    The fit window is deliberately short: the 1/M suppression is a
    first-order statement and the trajectory departs from pure exponential
    decay within a few rounds once M*eta is non-negligible (second-order
    events the gadget cannot undo start to accumulate), so the exponent is
    read off the initial regime, steps 0..window.  Pass a larger window to
    fit the longer-time behaviour instead.
    """
    if not run.trajectory:
        raise ValueError("run has no trajectory; call run_zeno first")
    if window < 1 or window >= len(run.trajectory):
        raise ValueError(f"window must lie in [1, {len(run.trajectory) - 1}], got {window}")
    ys = np.log([row["fidelity"] for row in run.trajectory[: window + 1]])
    slope = np.polyfit(np.arange(window + 1), ys, 1)[0]
    return float(-slope)
