"""Boundary-crossing probabilities for multivariate Brownian motion:
certified closed-form bounds with an explicit approximation constant, and a
reproducible Monte-Carlo oracle for validating every bound."""

__version__ = "0.1.0"

from .geometry import (
    Annulus,
    Ball,
    Band1D,
    ConvexPolytope,
    EmptyRegion,
    MetricResult,
    Region,
    Shifted,
    dilate,
    hausdorff,
    rho_H,
    signed_distance,
)
from .closedform import (
    Polyline,
    bridge_segment_crossing,
    first_passage_density_line,
    first_passage_mass_line,
    linear_noncrossing_exact,
    normal_cdf,
    piecewise_linear_bcp_1d,
)
from .domains import (
    AnnulusTube,
    Band1DTube,
    BallTube,
    DomainCertificate,
    PolytopeTube,
    TimeSpaceDomain,
    TruncatedCone,
    VectorPolyline,
    analytic_lipschitz,
    certify_domain,
    estimate_gamma,
    estimate_lipschitz,
    exterior_ball_radius,
    make_domain,
)
from .bounds import (
    CertifiedBound,
    GapConstant,
    bridge_cone_survival_bound,
    certified_gap_constant,
    cone_survival_bound,
    density_envelope,
    linear_noncrossing_bound,
    quick_exit_bound,
    survival_given_endpoint_bound,
)
from .mc import (
    GapEstimate,
    HittingHistogram,
    MCEstimate,
    SimConfig,
    bridge_conditional_survival,
    cone_avoidance_survival,
    estimate_gap,
    estimate_survival,
    estimate_survival_many,
    hitting_time_histogram,
    quick_exit_probability,
    radial_domination_rate,
)
from .config import build_domain, load_config, normalize_domain

__all__ = [
    "__version__",
    "Annulus",
    "AnnulusTube",
    "Ball",
    "BallTube",
    "Band1D",
    "Band1DTube",
    "CertifiedBound",
    "ConvexPolytope",
    "DomainCertificate",
    "EmptyRegion",
    "GapConstant",
    "GapEstimate",
    "HittingHistogram",
    "MCEstimate",
    "MetricResult",
    "Polyline",
    "PolytopeTube",
    "Region",
    "Shifted",
    "SimConfig",
    "TimeSpaceDomain",
    "TruncatedCone",
    "VectorPolyline",
    "analytic_lipschitz",
    "bridge_cone_survival_bound",
    "bridge_conditional_survival",
    "bridge_segment_crossing",
    "build_domain",
    "certified_gap_constant",
    "certify_domain",
    "cone_avoidance_survival",
    "cone_survival_bound",
    "density_envelope",
    "dilate",
    "estimate_gamma",
    "estimate_gap",
    "estimate_lipschitz",
    "estimate_survival",
    "estimate_survival_many",
    "exterior_ball_radius",
    "first_passage_density_line",
    "first_passage_mass_line",
    "hausdorff",
    "hitting_time_histogram",
    "linear_noncrossing_bound",
    "linear_noncrossing_exact",
    "load_config",
    "make_domain",
    "normal_cdf",
    "normalize_domain",
    "piecewise_linear_bcp_1d",
    "quick_exit_bound",
    "quick_exit_probability",
    "radial_domination_rate",
    "rho_H",
    "signed_distance",
    "survival_given_endpoint_bound",
]
