"""Exact random walks on Bratteli diagrams.

Measures, cotransition probabilities and density cocycles on path spaces;
harmonic sequences and ergodic decompositions; conditional expectations on
direct sums of matrix algebras presented by inclusion graphs; windowed skew
products for group-valued potentials.  All probability arithmetic is exact
(fractions.Fraction); floats appear only in numeric verification helpers.
"""

from .diagram import (
    BratteliDiagram,
    Cylinder,
    Edge,
    FinitePath,
    Violation,
    count_paths,
    enumerate_paths,
    subdiagram,
    tail_related,
    validate_diagram,
)
from .errors import (
    BratteliError,
    FileFormatError,
    IncompatibleData,
    InvalidDiagram,
    NotACocycle,
    NotAMatrixUnit,
    NotAMeasure,
    NotHarmonic,
    NotTailRelated,
    PathError,
    ShapeMismatch,
    SupportViolation,
    WindowError,
)
from .fdalg import (
    AlgebraElement,
    AlgebraStructure,
    DiagonalizedState,
    ExpectationReport,
    FiniteEquivRelation,
    InclusionGraph,
    ModelExpectation,
    TorusCocycle,
    algebra_of,
    brute_force_commutant,
    canonical_units,
    commutant_embed_k,
    diagonalize_state,
    expectation_map,
    extend_matrix_unit,
    extract_transition,
    identity_element,
    include_j,
    matrix_unit,
    pinch_average_decompose,
    trivialize_cocycle,
    verify_expectation,
)
from .fileio import (
    DiagramFile,
    dump_diagram,
    dump_element,
    load_diagram,
    load_element,
    load_inclusion_graph,
    load_measure_table,
    load_terminal,
    potential_from_file,
    walk_from_file,
)
from .harmonic import (
    ErgodicComponent,
    HarmonicCheck,
    HarmonicSequence,
    InvariantFunction,
    ergodic_components,
    harmonic_from_terminal,
    harmonic_to_invariant,
    invariant_to_harmonic,
    is_harmonic,
    measure_from_harmonic,
)
from .skew import (
    EdgePotential,
    MultiplicativeRationals,
    SkewDiagram,
    ZLattice,
    cotransition_potential,
    group_cocycle,
    lift_walk,
    pascal_diagram,
    pascal_edge_potential,
    pascal_path,
    skew_harmonic,
    skew_product,
    uhf_from_group_walk,
)
from .walk import (
    CotransitionProbability,
    InitialDistribution,
    QuasiProductCocycle,
    RandomWalk,
    TransitionProbability,
    build_walk,
    check_q_measure,
    cotransition_of_path,
    cylinder_measure,
    from_cotransition,
    markov_cylinder_table,
    q_measure_witness,
    radon_nikodym,
    sample_path,
    table_from_leaves,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "AlgebraStructure",
    "BratteliDiagram",
    "BratteliError",
    "CotransitionProbability",
    "Cylinder",
    "DiagonalizedState",
    "DiagramFile",
    "Edge",
    "EdgePotential",
    "ErgodicComponent",
    "ExpectationReport",
    "FileFormatError",
    "FiniteEquivRelation",
    "FinitePath",
    "HarmonicCheck",
    "HarmonicSequence",
    "InclusionGraph",
    "IncompatibleData",
    "InitialDistribution",
    "InvalidDiagram",
    "InvariantFunction",
    "ModelExpectation",
    "MultiplicativeRationals",
    "NotACocycle",
    "NotAMatrixUnit",
    "NotAMeasure",
    "NotHarmonic",
    "NotTailRelated",
    "PathError",
    "QuasiProductCocycle",
    "RandomWalk",
    "ShapeMismatch",
    "SkewDiagram",
    "SupportViolation",
    "TorusCocycle",
    "TransitionProbability",
    "Violation",
    "WindowError",
    "ZLattice",
    "algebra_of",
    "brute_force_commutant",
    "build_walk",
    "canonical_units",
    "check_q_measure",
    "commutant_embed_k",
    "cotransition_of_path",
    "cotransition_potential",
    "count_paths",
    "cylinder_measure",
    "diagonalize_state",
    "dump_diagram",
    "dump_element",
    "enumerate_paths",
    "ergodic_components",
    "expectation_map",
    "extend_matrix_unit",
    "extract_transition",
    "from_cotransition",
    "group_cocycle",
    "harmonic_from_terminal",
    "harmonic_to_invariant",
    "identity_element",
    "include_j",
    "invariant_to_harmonic",
    "is_harmonic",
    "lift_walk",
    "load_diagram",
    "load_element",
    "load_inclusion_graph",
    "load_measure_table",
    "load_terminal",
    "markov_cylinder_table",
    "matrix_unit",
    "measure_from_harmonic",
    "pascal_diagram",
    "pascal_edge_potential",
    "pascal_path",
    "pinch_average_decompose",
    "potential_from_file",
    "q_measure_witness",
    "radon_nikodym",
    "sample_path",
    "skew_harmonic",
    "skew_product",
    "subdiagram",
    "table_from_leaves",
    "tail_related",
    "trivialize_cocycle",
    "uhf_from_group_walk",
    "validate_diagram",
    "verify_expectation",
    "walk_from_file",
]
