from ._prg_mnar import (
    Dataset,
    LabeledSample,
    UnlabeledSample,
    build_transition_matrix,
    cadr_label_counts,
    class_rescale,
    confidence_eta,
    confusion_metrics,
    darp_counts,
    default_config_json,
    distribution_alignment_eta,
    eta_rescale,
    generate_dataset,
    gm_score,
    ours_label_counts,
    prg_rescale,
    replay,
    rescaled_ce_gradient,
    run,
)

__all__ = [
    "Dataset",
    "LabeledSample",
    "UnlabeledSample",
    "build_transition_matrix",
    "cadr_label_counts",
    "class_rescale",
    "confidence_eta",
    "confusion_metrics",
    "darp_counts",
    "default_config_json",
    "distribution_alignment_eta",
    "eta_rescale",
    "generate_dataset",
    "gm_score",
    "ours_label_counts",
    "prg_rescale",
    "replay",
    "rescaled_ce_gradient",
    "run",
]
