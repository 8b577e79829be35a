from pbobench.problems.functions import (
    FUNCTION_NAMES,
    base_optimum,
    build_ising_graph,
    build_mivs_graph,
    check_dimension,
    evaluate_base,
)
from pbobench.problems.instances import (
    VALID_IIDS,
    EvaluationResult,
    InstanceParams,
    ProblemInstance,
    derive_instance_params,
    evaluate_instance,
)
from pbobench.problems.targets import PUBLISHED_TARGETS, analytic_optimum, published_target, target_table

__all__ = [
    "FUNCTION_NAMES",
    "PUBLISHED_TARGETS",
    "VALID_IIDS",
    "EvaluationResult",
    "InstanceParams",
    "ProblemInstance",
    "analytic_optimum",
    "base_optimum",
    "build_ising_graph",
    "build_mivs_graph",
    "check_dimension",
    "derive_instance_params",
    "evaluate_base",
    "evaluate_instance",
    "published_target",
    "target_table",
]
