"""Online schema-migration strategy simulator (native core)."""

from ._core import (  # noqa: F401
    hop_audit,
    hop_categories,
    run_benchmark,
    run_drain,
    strategies,
)

__all__ = ["hop_audit", "hop_categories", "run_benchmark", "run_drain", "strategies"]
