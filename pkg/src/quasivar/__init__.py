"""Ekeland-type variational principles on quasi-pseudometric spaces.

Library layout:
  space       spaces, axiom validation, canonical examples, generators
  sequences   convergence modes, Cauchy types, separation, promotion
  variational descent sets, the deterministic descent walk, plain solvers
  strong      strong-minimum constructions, probes, hypothesis checks
  oracle      brute-force admissible sets, cross-checks, the falsifier
  serialize   JSON/CSV file formats
  cli         command-line front end
"""

from .space import (
    AxiomReport,
    MalformedSpaceError,
    QpmSpace,
    ball,
    canonical_space,
    closure_of_singleton,
    conjugate,
    generate_random_qpm,
    minplus_closure,
    symmetrize,
    validate_axioms,
)
from .sequences import (
    PointSeq,
    PreconditionError,
    SeqVerdict,
    check_subsequence_promotion,
    classify_cauchy,
    classify_convergence,
    random_right_k_cauchy_prefix,
    separation_class,
)
from .variational import (
    ConditionCheck,
    EkelandCertificate,
    Objective,
    SublevelSet,
    check_sublevel_properties,
    ekeland_point,
    ekeland_point_prime,
    picard_sequence,
    sublevel_set,
)
from .strong import (
    MinimizingTrace,
    StrongCertificate,
    check_dbar_bounded,
    check_smyth_hypothesis,
    check_strong_min_finite,
    minimizing_sequence_probe,
    strong_ekeland_georgiev,
    strong_ekeland_suzuki,
)
from .oracle import (
    CrossCheckReport,
    FalsifyReport,
    OracleResult,
    cross_check,
    falsify,
    oracle_ekeland_all,
    oracle_strong_all,
    random_instance,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
