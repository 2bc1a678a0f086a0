"""Exception types shared across the engine."""


class TolOptError(Exception):
    """Base class for all engine errors."""


class SchemaError(TolOptError):
    """Fatal input-schema problem (e.g. a required header column is absent).

    Distinct from per-row rejects, which are recorded in a RejectLog and
    never abort a parse.
    """


class EmptySample(TolOptError):
    """An operation that needs at least one value received none."""


class GuardIneffective(TolOptError):
    """The defect guard fired with a zero safety margin.

    With strict below-tolerance flagging, ``max_defect + 0`` would itself
    not be flagged, so the guarantee the guard exists for cannot hold.
    """


class ParameterError(TolOptError):
    """A run parameter is outside its allowed domain."""


class SpecError(TolOptError):
    """A synthetic-data spec is infeasible or self-contradictory."""
