"""Two-parameter persistent homology along line slices.

The package computes persistence diagrams of bifiltered simplicial
complexes restricted to positive-slope lines, compares diagrams with a
bottleneck-type extended metric, transports diagram points continuously
between lines, and aggregates the transported matchings into the coherent
matching distance together with its monodromy diagnostics.
"""
from .bifiltration import (
    ComplexError,
    ParamPoint,
    SimplicialBifiltration,
    SliceFiltration,
    build_slice,
    complex_from_dict,
    complex_to_dict,
    from_vertex_values,
    load_complex,
    save_complex,
    slice_value,
    sup_norm_diff,
    sup_norm_slice_gap,
)
from .persistence import (
    DIAGONAL,
    DiagramPoint,
    PersistenceDiagram,
    betti_number,
    compute_diagram,
    diagram_at,
    load_diagram_csv,
    multiplicity,
    persistent_betti,
    save_diagram_csv,
)
from .diagram_metric import (
    CapExceeded,
    Matching,
    MatchingCost,
    bottleneck_distance,
    compose_matchings,
    enumerate_matchings,
    identity_matching,
    matching_cost,
    point_distance,
)
from .parameter_space import (
    AdmissibleLine,
    ParamPath,
    ParameterRegion,
    SingularPairReport,
    contains,
    detect_singular_pairs,
    generator_loops,
    load_region,
    min_diagram_gap,
    path_avoiding_disks,
    region_from_dict,
    region_to_dict,
    save_region,
    save_reports,
    segment_path,
    suggest_separation,
    winding_number,
)
from .transport import (
    PointTrack,
    RegionViolation,
    SingularityEncountered,
    TransportConfig,
    TransportConsistencyError,
    continuity_constant,
    loop_permutation,
    motion_bound,
    save_track,
    transport_diagram,
    transport_matching,
    transport_point,
)
from .coherent_distance import (
    CoherentCostReport,
    CoherentDistanceReport,
    MaxPrincipleReport,
    PairPermutationGroup,
    PseudoMetricReport,
    SampleSpec,
    apply_group_element,
    basepoint_independence_check,
    close_generators,
    coherent_cost,
    coherent_distance_report,
    coherent_matching_distance,
    dmatch,
    family_distances,
    max_principle_check,
    monodromy_group,
    pseudo_metric_check,
    sample_endpoints,
    save_heatmap,
    save_report,
    trivial_group,
)
from .pareto_grid import (
    ArcPairing,
    Contour,
    ContourArc,
    ExtendedParetoGrid,
    GridIntersection,
    PositionReport,
    annihilation_catalog,
    arcs_at,
    builtin_grid,
    grid_to_dict,
    line_grid_intersections,
    pair_arcs,
    position_check,
    save_grid,
    save_intersections,
)
from .examples import (
    EXAMPLE_IDS,
    ExampleSpec,
    example,
    generate,
    monodromy_f2,
    perturbed,
    value_shift,
)

__all__ = [
    # bifiltration
    "ComplexError",
    "ParamPoint",
    "SimplicialBifiltration",
    "SliceFiltration",
    "build_slice",
    "complex_from_dict",
    "complex_to_dict",
    "from_vertex_values",
    "load_complex",
    "save_complex",
    "slice_value",
    "sup_norm_diff",
    "sup_norm_slice_gap",
    # persistence
    "DIAGONAL",
    "DiagramPoint",
    "PersistenceDiagram",
    "betti_number",
    "compute_diagram",
    "diagram_at",
    "load_diagram_csv",
    "multiplicity",
    "persistent_betti",
    "save_diagram_csv",
    # diagram_metric
    "CapExceeded",
    "Matching",
    "MatchingCost",
    "bottleneck_distance",
    "compose_matchings",
    "enumerate_matchings",
    "identity_matching",
    "matching_cost",
    "point_distance",
    # parameter_space
    "AdmissibleLine",
    "ParamPath",
    "ParameterRegion",
    "SingularPairReport",
    "contains",
    "detect_singular_pairs",
    "generator_loops",
    "load_region",
    "min_diagram_gap",
    "path_avoiding_disks",
    "region_from_dict",
    "region_to_dict",
    "save_region",
    "save_reports",
    "segment_path",
    "suggest_separation",
    "winding_number",
    # transport
    "PointTrack",
    "RegionViolation",
    "SingularityEncountered",
    "TransportConfig",
    "TransportConsistencyError",
    "continuity_constant",
    "loop_permutation",
    "motion_bound",
    "save_track",
    "transport_diagram",
    "transport_matching",
    "transport_point",
    # coherent_distance
    "CoherentCostReport",
    "CoherentDistanceReport",
    "MaxPrincipleReport",
    "PairPermutationGroup",
    "PseudoMetricReport",
    "SampleSpec",
    "apply_group_element",
    "basepoint_independence_check",
    "close_generators",
    "coherent_cost",
    "coherent_distance_report",
    "coherent_matching_distance",
    "dmatch",
    "family_distances",
    "max_principle_check",
    "monodromy_group",
    "pseudo_metric_check",
    "sample_endpoints",
    "save_heatmap",
    "save_report",
    "trivial_group",
    # pareto_grid
    "ArcPairing",
    "Contour",
    "ContourArc",
    "ExtendedParetoGrid",
    "GridIntersection",
    "PositionReport",
    "annihilation_catalog",
    "arcs_at",
    "builtin_grid",
    "grid_to_dict",
    "line_grid_intersections",
    "pair_arcs",
    "position_check",
    "save_grid",
    "save_intersections",
    # examples
    "EXAMPLE_IDS",
    "ExampleSpec",
    "example",
    "generate",
    "monodromy_f2",
    "perturbed",
    "value_shift",
]

__version__ = "0.1.0"
