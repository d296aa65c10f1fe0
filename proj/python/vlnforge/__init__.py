"""Synthetic indoor scenes to navigation training data.

The heavy lifting lives in the compiled extension; this package
re-exports its surface.
"""

from _vlnforge import (  # noqa: F401
    VlnforgeError,
    dataset_stats,
    default_config,
    evaluate,
    make_instruction,
    mlm_mask,
    pixel_to_point,
    process_scene,
    run_pipeline,
    sap_samples,
    validate,
)

__all__ = [
    "VlnforgeError",
    "dataset_stats",
    "default_config",
    "evaluate",
    "make_instruction",
    "mlm_mask",
    "pixel_to_point",
    "process_scene",
    "run_pipeline",
    "sap_samples",
    "validate",
]
