from ._omnikit import (
    Tokenizer,
    audio_token_count,
    builtin_stages,
    compression_rate,
    count_params,
    lsh_dedup,
    mel_spectrogram,
    normalize,
    plan_slices,
    pretrain_lr,
    run_search_pipeline,
    shingle_jaccard,
    topo_sort,
    vision_token_budget,
)

__all__ = [
    "Tokenizer",
    "audio_token_count",
    "builtin_stages",
    "compression_rate",
    "count_params",
    "lsh_dedup",
    "mel_spectrogram",
    "normalize",
    "plan_slices",
    "pretrain_lr",
    "run_search_pipeline",
    "shingle_jaccard",
    "topo_sort",
    "vision_token_budget",
]
