"""Intermediate temporal language toolkit.

Formulas are parsed from ITL text (``parse``) or infix LTL (``parse_infix``).
Results that carry structure (verdicts, repair outcomes, reports, records)
come back as plain dicts and lists in the same shape as the CLI's JSON.
"""

from ._core import (
    Error,
    Formula,
    GeneratorError,
    GroundingError,
    IngestError,
    InvalidInput,
    SearchLimitExceeded,
    are_equivalent,
    automaton,
    check_equivalence,
    classify,
    classify_mismatch,
    compute_reward,
    default_context,
    evaluate,
    explain,
    generate_corpus,
    is_satisfiable,
    parse,
    parse_infix,
    random_formula,
    repair,
    run_filter,
    train,
    validate_record,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
