"""Built-in cross-validation checks for the `verify` CLI command.

Each check recomputes one identity two independent ways and reports the
measured discrepancy against its tolerance.  FAST is the sub-second subset;
FULL adds the dense-grid and convergence checks.  Formula-side quantities
are always reached through the `analytic` module namespace, so corrupting
one symbol there (the mutation drill in the test suite) makes the affected
checks fail rather than silently agreeing with themselves.
"""

from __future__ import annotations

import math

import numpy as np

from . import analytic, gadgets, permgroup
from .densmat import DensityMatrix, random_density, tensor_power, tensor_product
from .noise import depolarise, random_perturbation, perturbed_inputs
from .zeno import ZenoRun, run_zeno

FAST = "FAST"
FULL = "FULL"


def _basis_state(d: int) -> DensityMatrix:
    mat = np.zeros((d, d), dtype=complex)
    mat[0, 0] = 1.0
    return DensityMatrix(mat)


def check_totient_table():
    worst = 0
    for m in range(1, 61):
        direct = sum(1 for k in range(1, m + 1) if math.gcd(k, m) == 1)
        worst = max(worst, abs(analytic.euler_totient(m) - direct))
    return float(worst), 0.0


def check_weight_sums():
    worst = 0
    for m in range(1, 25):
        weights = analytic.cgg_weights(m)
        if sorted(weights) != [k for k in range(1, m + 1) if m % k == 0]:
            return 1.0, 0.0
        worst = max(worst, abs(sum(weights.values()) - m))
    return float(worst), 0.0


def check_swap_identity():
    worst = 0.0
    for d in (2, 3, 4):
        rho = random_density(d, d, seed=11 * d)
        sig = random_density(d, d, seed=11 * d + 1)
        swap = permgroup.permutation_matrix(permgroup.Permutation((2, 1)), d)
        joint = tensor_product(rho, sig).matrix @ swap
        red = joint.reshape(d, d, d, d)
        lhs = np.einsum("iaja->ij", red)
        worst = max(worst, float(np.max(np.abs(lhs - rho.matrix @ sig.matrix))))
    return worst, 1e-12


def check_group_axioms():
    bad = 0
    cases = [(permgroup.SYMMETRIC, m) for m in (2, 3, 4)]
    cases += [(permgroup.CYCLIC, m) for m in (2, 3, 5, 8)]
    cases += [(permgroup.PARALLEL_SWAP, m) for m in (2, 4, 8)]
    for label, m in cases:
        group = permgroup.build_group(label, m)
        elems = set(g.image for g in group.elements)
        if tuple(range(1, m + 1)) not in elems:
            bad += 1
        for a in group.elements:
            if permgroup.inverse(a).image not in elems:
                bad += 1
            for b in group.elements:
                if permgroup.compose(a, b).image not in elems:
                    bad += 1
    return float(bad), 0.0


def check_projector_idempotent():
    worst = 0.0
    for label, m in ((permgroup.CYCLIC, 3), (permgroup.SYMMETRIC, 3), (permgroup.PARALLEL_SWAP, 4)):
        proj = permgroup.group_projector(permgroup.build_group(label, m), 2)
        worst = max(worst, float(np.max(np.abs(proj @ proj - proj))))
        worst = max(worst, float(np.max(np.abs(proj - proj.T))))
    return worst, 1e-10


def _dense_vs_formula(kind: str, m: int, seed: int) -> float:
    rho = random_density(2, 2, seed=seed)
    dense = gadgets.run_named_gadget(kind, rho, m)
    formula = analytic.closed_form_outcome(kind, rho, m)
    gap = abs(dense.accept_prob - formula.accept_prob)
    return max(gap, float(np.max(np.abs(dense.purified.matrix - formula.purified.matrix))))


def check_cgg_dense_vs_formula():
    return max(_dense_vs_formula("CGG", m, seed=m) for m in (2, 3, 4)), 1e-10


def check_gsg_dense_vs_formula():
    return max(_dense_vs_formula("GSG", m, seed=40 + m) for m in (2, 4)), 1e-10


def check_esd_dense_vs_formula():
    rho = random_density(2, 2, seed=71)
    sandwich = gadgets.apply_group_gadget(
        tensor_power(rho, 3), permgroup.build_group(permgroup.DERANGEMENT_PAIR, 3)
    )
    formula = gadgets.esd_outcome(rho, 3)
    gap = abs(sandwich.accept_prob - formula.accept_prob)
    return (
        max(gap, float(np.max(np.abs(sandwich.purified.matrix - formula.purified.matrix)))),
        1e-10,
    )


def check_depolarised_worked_value():
    out = analytic.depolarised_ptilde("CGG", analytic.DepolarisedSpec(0.2, 2), 2)
    gap = abs(out["ptilde"] - 0.2 * 1.1 / 1.82)
    return max(gap, abs(out["accept_prob"] - 0.91)), 1e-15


def check_optimal_sandwich():
    worst = 0.0
    for p in (1e-1, 1e-2, 1e-3):
        opt = analytic.optimal_point(p)
        ratio = opt.ptilde_star / p
        worst = max(worst, opt.ratio_lower - ratio, ratio - opt.ratio_upper)
    return max(worst, 0.0), 0.0


def check_rsg_bound():
    worst = 0.0
    for p in (0.1, 0.3):
        res = analytic.rsg_iterate(analytic.DepolarisedSpec(p, 2), 4)
        for n in range(1, 5):
            worst = max(worst, res["ptilde_sequence"][n] - res["bound_sequence"][n])
    return max(worst, 0.0), 0.0


def check_depolarised_grid():
    worst = 0.0
    rho0 = {d: _basis_state(d) for d in (2, 4)}
    for kind, ms in (("CGG", (2, 3, 4)), ("GSG", (2, 4)), ("ESD", (2, 3, 4)), ("RSG", (2, 4))):
        for p in (0.1, 0.4, 0.7):
            for d in (2, 4):
                spec = analytic.DepolarisedSpec(p, d)
                for m in ms:
                    formula = analytic.depolarised_ptilde(kind, spec, m)
                    rho = depolarise(rho0[d], p, d)
                    if kind == "ESD":
                        dense = gadgets.apply_group_gadget(
                            tensor_power(rho, m),
                            permgroup.build_group(permgroup.DERANGEMENT_PAIR, m),
                        )
                    else:
                        dense = gadgets.run_named_gadget(kind, rho, m)
                    ptilde = analytic.extract_ptilde(dense.purified, rho0[d])
                    worst = max(worst, abs(ptilde - formula["ptilde"]))
                    worst = max(worst, abs(dense.accept_prob - formula["accept_prob"]))
    return worst, 1e-10


def check_infinite_limit():
    worst = 0.0
    for p in (0.1, 0.01):
        for m in (2, 4, 8):
            inf_spec = analytic.DepolarisedSpec(p, analytic.INFINITE)
            cgg = analytic.depolarised_ptilde("CGG", inf_spec, m)["ptilde"]
            gsg = analytic.depolarised_ptilde("GSG", inf_spec, m)["ptilde"]
            worst = max(worst, abs(cgg - gsg))
            gaps = [
                abs(analytic.depolarised_ptilde("CGG", analytic.DepolarisedSpec(p, d), m)["ptilde"] - cgg)
                for d in (2, 8, 32, 128, 512)
            ]
            if any(a < b for a, b in zip(gaps, gaps[1:])):
                worst = max(worst, 1.0)
    return worst, 1e-15


def check_first_order_residual():
    rho0 = _basis_state(2)
    m = 3
    residuals = []
    for scale in (4e-3, 2e-3):
        pert = random_perturbation(rho0, m, scale, seed=5)
        joint = perturbed_inputs(pert, rho0, "EXACT")
        out = gadgets.apply_group_gadget(joint, permgroup.build_group(permgroup.CYCLIC, m))
        fid = float(np.trace(rho0.matrix @ out.purified.matrix).real)
        pred = analytic.first_order_predictions(
            rho0, [scale * s for s in pert.sigmas], m
        ).fidelity_pred
        residuals.append(abs(fid - pred))
    ratio = residuals[0] / residuals[1]
    return abs(ratio - 4.0), 1.0


def check_partition_modes():
    rho0 = _basis_state(3)
    sigma = random_density(3, 3, seed=9)
    worst = 0.0
    dense = analytic.trace_rho0_rhom(analytic.DENSE, rho0, sigma, 0.3, 6)
    worst = max(worst, abs(analytic.trace_rho0_rhom(analytic.PARTITION, rho0, sigma, 0.3, 6) - dense))
    pure = random_density(3, 1, seed=10)
    dense_p = analytic.trace_rho0_rhom(analytic.DENSE, rho0, pure, 0.3, 6)
    worst = max(
        worst, abs(analytic.trace_rho0_rhom(analytic.PURE_SIGMA, rho0, pure, 0.3, 6) - dense_p)
    )
    return worst, 1e-9


def check_zeno_noise_free():
    plus = DensityMatrix(np.full((2, 2), 0.5, dtype=complex))
    run = run_zeno(ZenoRun(steps=10, copies=2, dephasing_eta=0.0), plus)
    worst = max(
        max(abs(row["fidelity"] - 1.0), abs(row["cumulative_accept"] - 1.0))
        for row in run.trajectory
    )
    return worst, 1e-12


def check_m2_coincidence():
    rho = random_density(2, 2, seed=77)
    outs = [gadgets.run_named_gadget(k, rho, 2) for k in ("SWAP", "CGG", "GSG", "SGG")]
    worst = 0.0
    for other in outs[1:]:
        worst = max(worst, abs(outs[0].accept_prob - other.accept_prob))
        worst = max(
            worst, float(np.max(np.abs(outs[0].purified.matrix - other.purified.matrix)))
        )
    return worst, 1e-12


CHECKS = (
    ("totient-table", FAST, check_totient_table),
    ("cgg-weight-sums", FAST, check_weight_sums),
    ("swap-partial-trace-identity", FAST, check_swap_identity),
    ("group-axioms", FAST, check_group_axioms),
    ("projector-idempotent", FAST, check_projector_idempotent),
    ("cgg-dense-vs-formula", FAST, check_cgg_dense_vs_formula),
    ("gsg-dense-vs-formula", FAST, check_gsg_dense_vs_formula),
    ("esd-dense-vs-formula", FAST, check_esd_dense_vs_formula),
    ("depolarised-worked-value", FAST, check_depolarised_worked_value),
    ("optimal-point-sandwich", FAST, check_optimal_sandwich),
    ("rsg-cascade-bound", FAST, check_rsg_bound),
    ("depolarised-grid-dense-vs-formula", FULL, check_depolarised_grid),
    ("infinite-dim-limits", FULL, check_infinite_limit),
    ("first-order-residual-quadratic", FULL, check_first_order_residual),
    ("trace-expansion-modes", FULL, check_partition_modes),
    ("zeno-noise-free", FULL, check_zeno_noise_free),
    ("m2-gadget-coincidence", FULL, check_m2_coincidence),
)


def run_verify(level: str = FAST) -> tuple:
    """Run the registry at the given level; returns (report_lines, all_ok)."""
    if level not in (FAST, FULL):
        raise ValueError(f"level must be FAST or FULL, got {level!r}")
    lines = []
    all_ok = True
    for name, lvl, fn in CHECKS:
        if level == FAST and lvl == FULL:
            continue
        try:
            measured, tol = fn()
            ok = measured <= tol
        except Exception as exc:  # a crashed check is a failed check
            measured, tol, ok = float("nan"), float("nan"), False
            lines.append(f"FAIL {name}: raised {type(exc).__name__}: {exc}")
            all_ok = False
            continue
        status = "PASS" if ok else "FAIL"
        lines.append(f"{status} {name}: measured={measured:.3e} tolerance={tol:.3e}")
        all_ok = all_ok and ok
    return lines, all_ok
