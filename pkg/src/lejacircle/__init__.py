"""Leja and symmetric Leja sequences on the unit circle.

Greedy construction by potential minimization, exact regularity
functionals (discrepancy, diaphony, log-potential norms, pair energy,
the Erdos maximum), and structured checks of the identities and growth
bounds those functionals satisfy.
"""

from .benchmarks import (
    BASELINE_COUNTS,
    BENCHMARKS,
    BenchmarkSpec,
    benchmark_run,
)
from .greedy import (
    DegenerateGapError,
    GreedyConfig,
    GreedyRun,
    Mode,
    StepRecord,
    SymmetryError,
    gap_minimize,
    inject_manual,
    leja_step,
    parse_injection_schedule,
    potential,
    run,
    symmetric_leja_step,
)
from .kernels import (
    KernelKind,
    SingularityError,
    clausen_cl2,
    kernel_antiderivative,
    kernel_value,
    wrapped_distance,
)
from .metrics import (
    METRICS_CSV_HEADER,
    ConvergenceError,
    MetricsRow,
    discrepancy_l1,
    discrepancy_l2_sq,
    erdos_a,
    fn_l1,
    fn_l2_sq,
    logpot_l1,
    logpot_l2_sq,
    metrics_over_prefixes,
    metrics_over_sequence,
    pair_energy,
    read_metrics_csv,
    star_discrepancy_linf,
    write_metrics_csv,
)
from .pointset import (
    DISTINCTNESS_TOLERANCE,
    SEQUENCE_CSV_HEADER,
    SYMMETRY_TOLERANCE,
    CirclePointSet,
    DistinctnessError,
    Gap,
    Provenance,
    StateError,
    as_angles,
    gaps,
    insert,
    is_mirror_paired,
    is_symmetric,
    kronecker,
    read_sequence_csv,
    roots_of_unity,
    van_der_corput,
    write_sequence_csv,
)
from .verify import (
    CheckReport,
    fekete_check,
    fekete_sweep_check,
    lemma1_check,
    lemma2_check,
    proposition_check,
    report_to_json,
    stability_check,
    theorem1_check,
    theorem1_ratio,
    theorem2_check,
    theorem2_ratio,
    theorem3_check,
    theorem3_growth,
    wagner_check,
    write_reports_ndjson,
)

__version__ = "0.1.0"
