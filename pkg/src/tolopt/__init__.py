"""tolopt: percentile-rank tolerance optimisation for AOI inspection data.

Computes per-part candidate tolerances from false-call measurements,
guards them so every confirmed defect stays flagged, validates on held-out
defects, and simulates percentile choices before anything is deployed.
"""

from .errors import (
    EmptySample,
    GuardIneffective,
    ParameterError,
    SchemaError,
    SpecError,
    TolOptError,
)
from .ingest import (
    Disposition,
    InspectionRecord,
    PartDataset,
    PartKey,
    RejectLog,
    RejectReason,
    build_part_datasets,
    datasets_to_csv,
    parse_records,
)
from .optimizer import (
    DEFAULT_MARGIN,
    GuardOutcome,
    SafetyMargin,
    ToleranceProposal,
    defect_guard,
    flag,
    optimize_all,
    optimize_part,
)
from .quantile import PercentileSpec, SortedValues, mean, percentile_rank, percentile_value, sort_ascending
from .simulate import (
    DistributionSpec,
    HistogramData,
    SweepPoint,
    SyntheticSpec,
    aggregate_report,
    generate_synthetic,
    histogram,
    sweep,
)
from .validation import (
    DefectSplit,
    RecallValue,
    SplitPolicy,
    ValidationReport,
    ValidationRow,
    recall,
    run_validation_protocol,
    select_top_parts,
    split_defects,
    validate_part,
)

__version__ = "0.1.0"
