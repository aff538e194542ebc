"""Python access to the gaze-interaction markup toolkit."""

from ._core import (
    canonically_equal,
    detect_fixations,
    inspect,
    keywords_table,
    languages,
    parse,
    run,
    translate,
    validate,
)

__all__ = [
    "canonically_equal",
    "detect_fixations",
    "inspect",
    "keywords_table",
    "languages",
    "parse",
    "run",
    "translate",
    "validate",
]
