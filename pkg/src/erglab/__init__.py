"""erglab: exact finite models for orbit equivalence relations,
capture functionals, co-induced actions, and Cayley-graph percolation."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import CapExceeded, CheckFailed, ValidationError, get_cap
from .ergcore import (
    EqRel,
    FinAction,
    FinSpace,
    GramCertificate,
    GroupElement,
    PartialIso,
    Perm,
    cost,
    delta_u,
    full_group,
    full_group_size,
    gram_check,
    in_full_group,
    orbit_relation,
    phi,
    project_to_full_group,
    psi,
    sample_full_group,
    theta,
    weak_metric,
)
from .coinduce import (
    CoinducedSystem,
    FreeGroupAction,
    MixingIdentityReport,
    PairingReport,
    TargetAction,
    check_prop34_pairing,
    check_rho_cocycle,
    check_thm33_identity,
    choice_perm,
    coinduced_action,
    delta_bar,
    phi_kn,
    semidirect_mul,
)
from .percolation import (
    CayleyBall,
    ClusterStats,
    FreeModel,
    LengthSystem,
    LengthValue,
    PercConfig,
    PermGroupModel,
    PhiDictionary,
    ProductModel,
    SweepResult,
    SweepRow,
    ZdModel,
    action_to_percolation,
    cayley_ball,
    cluster_labels,
    cluster_stats,
    length_function,
    percolate,
    sweep,
)
from .kazhdan import (
    AveragingReport,
    FiniteRep,
    KazhdanPair,
    Prop53Report,
    TransferredForm,
    amplify,
    averaging_norm,
    bounds,
    cor54_thresholds,
    cor54_tier,
    cost_band,
    pd_transfer,
    prop53_check,
)
from .subrel import (
    CaptureBoundReport,
    ChoiceSystem,
    ExtractionRow,
    Infeasible,
    InvariantReport,
    MinIndexReport,
    SeparationResult,
    check_thm27,
    choice_functions,
    evading_map,
    index_cocycle,
    invariant_analysis,
    merge_links,
    min_index_set,
    separating_maps,
    sigma,
    tau_character,
    tau_inner,
    tau_representation,
    xi0,
)
from .instances import (
    GENERATE_KINDS,
    KNOWN_CHECKS,
    CoinduceSpec,
    Instance,
    canonical_json,
    generate,
    instance_hash,
    load_instance,
    make_coinduce_ready,
    make_cyclic,
    make_product,
    make_random_pair,
    rational_map,
    rational_str,
)
from .verify import SUITE_NAMES, SuiteResult, run_all, run_suite

__all__ = [
    "__version__",
    "CapExceeded",
    "CheckFailed",
    "ValidationError",
    "get_cap",
    "EqRel",
    "FinAction",
    "FinSpace",
    "GramCertificate",
    "GroupElement",
    "PartialIso",
    "Perm",
    "cost",
    "delta_u",
    "full_group",
    "full_group_size",
    "gram_check",
    "in_full_group",
    "orbit_relation",
    "phi",
    "project_to_full_group",
    "psi",
    "sample_full_group",
    "theta",
    "weak_metric",
    "CoinducedSystem",
    "FreeGroupAction",
    "MixingIdentityReport",
    "PairingReport",
    "TargetAction",
    "check_prop34_pairing",
    "check_rho_cocycle",
    "check_thm33_identity",
    "choice_perm",
    "coinduced_action",
    "delta_bar",
    "phi_kn",
    "semidirect_mul",
    "CayleyBall",
    "ClusterStats",
    "FreeModel",
    "LengthSystem",
    "LengthValue",
    "PercConfig",
    "PermGroupModel",
    "PhiDictionary",
    "ProductModel",
    "SweepResult",
    "SweepRow",
    "ZdModel",
    "action_to_percolation",
    "cayley_ball",
    "cluster_labels",
    "cluster_stats",
    "length_function",
    "percolate",
    "sweep",
    "AveragingReport",
    "FiniteRep",
    "KazhdanPair",
    "Prop53Report",
    "TransferredForm",
    "amplify",
    "averaging_norm",
    "bounds",
    "cor54_thresholds",
    "cor54_tier",
    "cost_band",
    "pd_transfer",
    "prop53_check",
    "CaptureBoundReport",
    "ChoiceSystem",
    "ExtractionRow",
    "Infeasible",
    "InvariantReport",
    "MinIndexReport",
    "SeparationResult",
    "check_thm27",
    "choice_functions",
    "evading_map",
    "index_cocycle",
    "invariant_analysis",
    "merge_links",
    "min_index_set",
    "separating_maps",
    "sigma",
    "tau_character",
    "tau_inner",
    "tau_representation",
    "xi0",
    "GENERATE_KINDS",
    "KNOWN_CHECKS",
    "CoinduceSpec",
    "Instance",
    "canonical_json",
    "generate",
    "instance_hash",
    "load_instance",
    "make_coinduce_ready",
    "make_cyclic",
    "make_product",
    "make_random_pair",
    "rational_map",
    "rational_str",
    "SUITE_NAMES",
    "SuiteResult",
    "run_all",
    "run_suite",
]
