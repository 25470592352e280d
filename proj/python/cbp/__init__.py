"""Controlled branching processes: simulation, estimation, model selection.

Thin python layer over the C++ core. The central objects are
:class:`FullTreeSample` (complete observation), :class:`ProgenitorSample`
(sizes plus progenitor counts) and :class:`SizesSample` (sizes only), with
``estimate`` for the complete-data MLE, ``em_fit_progenitors`` /
``em_fit_sizes`` / ``multi_start`` for the incomplete schemes,
``loglik_*`` + ``aic`` + ``scan_*`` for model selection, ``bootstrap`` for
estimator comparison and ``count_b`` / ``b_max`` for transition-tree sizes.
"""

from ._core import (
    BootstrapSummary,
    CbpError,
    CompleteCis,
    CompleteMle,
    ControlFamily,
    DegenerateError,
    DomainError,
    EmFit,
    FullTreeSample,
    Interval,
    IoError,
    OffspringDistribution,
    ProgenitorSample,
    SchemaError,
    SizesSample,
    aic,
    aic_plain,
    b_max,
    b_star_max,
    bmax_table,
    bootstrap,
    confidence_intervals,
    count_b,
    count_b_star,
    efficiency,
    em_fit_progenitors,
    em_fit_sizes,
    enumerate_fixed,
    estimate,
    loglik_progenitors,
    loglik_sizes,
    multi_start,
    mu_inverse,
    mu_value,
    project_progenitors,
    project_sizes,
    read_full_tree_csv,
    read_progenitor_csv,
    read_sizes_csv,
    scan_progenitors,
    scan_sizes,
    simulate,
    write_full_tree_csv,
)

__version__ = "1.0.0"

__all__ = [
    "BootstrapSummary",
    "CbpError",
    "CompleteCis",
    "CompleteMle",
    "ControlFamily",
    "DegenerateError",
    "DomainError",
    "EmFit",
    "FullTreeSample",
    "Interval",
    "IoError",
    "OffspringDistribution",
    "ProgenitorSample",
    "SchemaError",
    "SizesSample",
    "aic",
    "aic_plain",
    "b_max",
    "b_star_max",
    "bmax_table",
    "bootstrap",
    "confidence_intervals",
    "count_b",
    "count_b_star",
    "efficiency",
    "em_fit_progenitors",
    "em_fit_sizes",
    "enumerate_fixed",
    "estimate",
    "loglik_progenitors",
    "loglik_sizes",
    "multi_start",
    "mu_inverse",
    "mu_value",
    "project_progenitors",
    "project_sizes",
    "read_full_tree_csv",
    "read_progenitor_csv",
    "read_sizes_csv",
    "scan_progenitors",
    "scan_sizes",
    "simulate",
    "write_full_tree_csv",
]
