"""Self-supervised spectral-matching target detection."""

from ._core import (
    Encoder,
    SpecmatchError,
    ace,
    auc_pairwise,
    cem,
    detect,
    generate_scene,
    kmeans,
    load_envi,
    mix_batch,
    mix_weights,
    normalize,
    npair_loss,
    quantile_split,
    roc,
    write_envi,
)

__all__ = [
    "Encoder",
    "SpecmatchError",
    "ace",
    "auc_pairwise",
    "cem",
    "detect",
    "generate_scene",
    "kmeans",
    "load_envi",
    "mix_batch",
    "mix_weights",
    "normalize",
    "npair_loss",
    "quantile_split",
    "roc",
    "write_envi",
]
