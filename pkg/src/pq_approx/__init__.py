"""Numerical library for a two-parameter calculus and the positive linear
operator family built on it: exact and floating kernels, closed-form moments
with brute-force oracles, convergence-rate functionals, statistical-limit
machinery, a bivariate extension, and a deterministic experiment harness.
"""

from .bivariate import (
    BivariateLipschitzSpec,
    BivariateParams,
    bbh_pq_2d,
    bivariate_holder_bound_check,
    bivariate_korovkin_battery,
    bivariate_moment,
    bivariate_rate_bound_check,
    brute_force_moment_2d,
    delta_n1,
    delta_n2,
    omega2,
)
from .functions import (
    BivariateFunction,
    LipschitzSpec,
    RealFunction,
    const,
    expneg,
    korovkin_quadruple,
    lift_first,
    lift_second,
    lip,
    lip2,
    resolve,
    resolve2,
    sinu,
    tensor,
    u_of,
    upow,
    usq_sum,
)
from .operators import (
    GeneralizedSpec,
    VARIANT_ORACLE,
    VARIANT_PRINTED,
    bbh_classical,
    bbh_pq,
    bbh_pq_generalized,
    bbh_q,
    brute_force_moment,
    generalized_holder_bound,
    moment_closed,
    node_weight_table,
)
from .pq_core import (
    DomainError,
    PQParams,
    euler_product,
    euler_sum,
    floating,
    pq_binomial,
    pq_factorial,
    pq_integer,
    pq_integers,
    rational,
    shift_relation_residual,
)
from .rates import (
    ALL_OF_R_PLUS,
    BoundCheckReport,
    BoundCheckRow,
    certify_lipschitz,
    delta_n,
    distance_to_set,
    divided_difference,
    lipschitz_class_bound_check,
    modulus_tilde,
    rate_bound_check,
    representation_residual,
    representation_sides,
    representation_sides_corrected,
    second_moment_brute,
    sup_norm,
    u_grid,
)
from .reporting import DiscrepancyReport, build_catalogue
from .statistical import (
    korovkin_battery,
    natural_density,
    schedule,
    schedule_arrays,
    st_limit_check,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_OF_R_PLUS",
    "BivariateFunction",
    "BivariateLipschitzSpec",
    "BivariateParams",
    "BoundCheckReport",
    "BoundCheckRow",
    "DiscrepancyReport",
    "DomainError",
    "GeneralizedSpec",
    "LipschitzSpec",
    "PQParams",
    "RealFunction",
    "VARIANT_ORACLE",
    "VARIANT_PRINTED",
    "bbh_classical",
    "bbh_pq",
    "bbh_pq_2d",
    "bbh_pq_generalized",
    "bbh_q",
    "bivariate_holder_bound_check",
    "bivariate_korovkin_battery",
    "bivariate_moment",
    "bivariate_rate_bound_check",
    "brute_force_moment",
    "brute_force_moment_2d",
    "build_catalogue",
    "certify_lipschitz",
    "const",
    "delta_n",
    "delta_n1",
    "delta_n2",
    "distance_to_set",
    "divided_difference",
    "euler_product",
    "euler_sum",
    "expneg",
    "floating",
    "generalized_holder_bound",
    "korovkin_battery",
    "korovkin_quadruple",
    "lift_first",
    "lift_second",
    "lip",
    "lip2",
    "lipschitz_class_bound_check",
    "modulus_tilde",
    "moment_closed",
    "natural_density",
    "node_weight_table",
    "omega2",
    "pq_binomial",
    "pq_factorial",
    "pq_integer",
    "pq_integers",
    "rate_bound_check",
    "rational",
    "representation_residual",
    "representation_sides",
    "representation_sides_corrected",
    "resolve",
    "resolve2",
    "schedule",
    "schedule_arrays",
    "second_moment_brute",
    "shift_relation_residual",
    "sinu",
    "st_limit_check",
    "sup_norm",
    "tensor",
    "u_grid",
    "u_of",
    "upow",
    "usq_sum",
]
