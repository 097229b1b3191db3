"""Corpus curation toolkit: deterministic embeddings, expert-similarity
rewards, budgeted selection, translation metrics, adapter math, and
emissions accounting, backed by the C++ core."""

from ._sage import (
    CometHead,
    ExpertReference,
    LoraLayer,
    bleu_corpus,
    bleu_segment,
    build_expert_reference,
    cosine,
    estimate_emissions,
    format_reduction,
    fuse_features,
    hash_embed,
    layer_mix,
    normalize,
    pair_loss,
    paired_t_test,
    parse_corpus_line,
    percent_reduction,
    regularized_incomplete_beta,
    semantic_reward,
    semantic_reward_batch,
    tokenize_for_bleu,
    topk_select,
)

__version__ = "0.1.0"

__all__ = [
    "CometHead",
    "ExpertReference",
    "LoraLayer",
    "bleu_corpus",
    "bleu_segment",
    "build_expert_reference",
    "cosine",
    "estimate_emissions",
    "format_reduction",
    "fuse_features",
    "hash_embed",
    "layer_mix",
    "normalize",
    "pair_loss",
    "paired_t_test",
    "parse_corpus_line",
    "percent_reduction",
    "regularized_incomplete_beta",
    "semantic_reward",
    "semantic_reward_batch",
    "tokenize_for_bleu",
    "topk_select",
]
