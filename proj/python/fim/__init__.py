"""Fairness-aware influence maximization from diffusion cascades.

Thin Python layer over the C++ core. The heavy lifting (training, selection,
simulation) lives in the compiled `_core` extension.
"""

from fim._core import (  # noqa: F401
    AttributeSchema,
    Cascade,
    CascadeLog,
    DataError,
    DatasetSplit,
    EmbeddingModel,
    NumericError,
    ParseError,
    ProfileTable,
    SeedSet,
    SelectionInputs,
    SynthConfig,
    SynthData,
    TrainConfig,
    avg_cascade_baseline,
    build_selection_inputs,
    category_population,
    combine_attributes,
    concat_models,
    dataset_stats,
    digg_like_config,
    dni,
    expected_spread,
    fair_greedy,
    fairness_score,
    flip_attribute,
    gen_graph,
    influencer_fairness_avg,
    influencer_fairness_pooled,
    load_model,
    model_summary_json,
    parse_cascade_log,
    parse_cascade_log_str,
    parse_profiles,
    parse_schema,
    save_model,
    simulate_ic_cascades,
    split_by_time,
    spread_fairness,
    temporal_weights,
    train,
    weibo_like_config,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
