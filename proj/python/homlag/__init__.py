"""Reparametrization-invariant mechanics: canonical homogeneous Lagrangians,
gauge-fixed dynamics and d-brane actions."""

from ._homlag import (
    Embedding,
    HomlagError,
    Lagrangian,
    Preset,
    ansatz_accel,
    assemble_eom,
    brane_action,
    christoffel,
    cylinder,
    dng_lagrangian,
    faraday,
    flat_sheet,
    integrate,
    jacobian_minors,
    preset,
    run_brane,
    run_diagnose,
    run_simulate,
    run_sweep,
)

__all__ = [
    "Embedding",
    "HomlagError",
    "Lagrangian",
    "Preset",
    "ansatz_accel",
    "assemble_eom",
    "brane_action",
    "christoffel",
    "cylinder",
    "dng_lagrangian",
    "faraday",
    "flat_sheet",
    "integrate",
    "jacobian_minors",
    "preset",
    "run_brane",
    "run_diagnose",
    "run_simulate",
    "run_sweep",
]
