"""Simulation and closed-form analysis of permutation-based state
purification gadgets, their resource costs, and repeated-stabilisation
trajectories."""

from .analytic import (
    COMMUTING,
    DENSE,
    INFINITE,
    PARTITION,
    PURE_SIGMA,
    DepolarisedSpec,
    FirstOrderPrediction,
    OptimalPoint,
    accept_limit,
    cgg_weights,
    closed_form_outcome,
    depolarised_moment,
    depolarised_ptilde,
    euler_totient,
    extract_ptilde,
    fidelity_general,
    first_order_predictions,
    optimal_point,
    ptilde_limit,
    rsg_iterate,
    sampling_costs,
    trace_rho0_rhom,
)
from .densmat import (
    DensityMatrix,
    MultiRegisterState,
    dense_cap,
    partial_trace_keep_first,
    random_density,
    state_metrics,
    tensor_power,
    tensor_product,
    trace_moment,
)
from .gadgets import (
    GADGET_KINDS,
    GadgetOutcome,
    apply_group_gadget,
    esd_mitigated_expectation,
    esd_outcome,
    gsg_overlap_test,
    hadamard_test_accept,
    rsg_purify,
    run_named_gadget,
    swap_gadget,
)
from .noise import (
    EXACT,
    FIRST,
    CoherentDriftEnsemble,
    GeneralStochastic,
    StochasticPerturbation,
    coherent_inputs,
    depolarise,
    deviation_probability,
    perturbed_inputs,
    random_drift_ensemble,
    random_perturbation,
)
from .permgroup import (
    CYCLIC,
    DERANGEMENT_PAIR,
    GADGET_COSTED,
    PARALLEL_SWAP,
    SYMMETRIC,
    CostReport,
    Permutation,
    PermutationGroup,
    build_group,
    ceil_log2,
    compose,
    cost_model,
    cyclic_shift,
    group_projector,
    identity_perm,
    index_map,
    inverse,
    orbit_basis,
    permutation_matrix,
)
from .zeno import ZenoRun, copy_budget, decay_exponent, run_zeno

__version__ = "0.1.0"

__all__ = [
    "COMMUTING",
    "CYCLIC",
    "DENSE",
    "DERANGEMENT_PAIR",
    "EXACT",
    "FIRST",
    "GADGET_COSTED",
    "GADGET_KINDS",
    "INFINITE",
    "PARALLEL_SWAP",
    "PARTITION",
    "PURE_SIGMA",
    "SYMMETRIC",
    "CoherentDriftEnsemble",
    "CostReport",
    "DensityMatrix",
    "DepolarisedSpec",
    "FirstOrderPrediction",
    "GadgetOutcome",
    "GeneralStochastic",
    "MultiRegisterState",
    "OptimalPoint",
    "Permutation",
    "PermutationGroup",
    "StochasticPerturbation",
    "ZenoRun",
    "accept_limit",
    "apply_group_gadget",
    "build_group",
    "ceil_log2",
    "cgg_weights",
    "closed_form_outcome",
    "coherent_inputs",
    "compose",
    "copy_budget",
    "cost_model",
    "cyclic_shift",
    "decay_exponent",
    "dense_cap",
    "depolarise",
    "depolarised_moment",
    "depolarised_ptilde",
    "deviation_probability",
    "esd_mitigated_expectation",
    "esd_outcome",
    "euler_totient",
    "extract_ptilde",
    "fidelity_general",
    "first_order_predictions",
    "group_projector",
    "gsg_overlap_test",
    "hadamard_test_accept",
    "identity_perm",
    "index_map",
    "inverse",
    "optimal_point",
    "orbit_basis",
    "partial_trace_keep_first",
    "permutation_matrix",
    "perturbed_inputs",
    "ptilde_limit",
    "random_density",
    "random_drift_ensemble",
    "random_perturbation",
    "rsg_iterate",
    "rsg_purify",
    "run_named_gadget",
    "run_zeno",
    "sampling_costs",
    "state_metrics",
    "swap_gadget",
    "tensor_power",
    "tensor_product",
    "trace_moment",
    "trace_rho0_rhom",
]
