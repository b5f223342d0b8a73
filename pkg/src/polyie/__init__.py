"""Multi-dialect code-style prompting, parsing and ensemble evaluation for IE."""

from .model import (
    Annotation,
    Dialect,
    Entity,
    EventArgument,
    EventTrigger,
    LabelDescriptor,
    LabelSchema,
    PromptStyle,
    Relation,
    RoleDescriptor,
    TaskInstance,
    TaskKind,
    Violation,
    load_dataset,
    normalize_surface,
    save_dataset,
    validate_instance,
)
from .compiler import (
    CodePrompt,
    GoldCompletion,
    InvalidInstanceError,
    compile_prompt,
    prompt_length,
    render_gold_output,
)
from .parsing import PredictionSet, parse_completion, roundtrip_check
from .metrics import (
    ScoreReport,
    dataset_jaccard,
    intersect_agg,
    jaccard,
    micro_f1,
    union_agg,
    union_voting_gap,
    vote,
)
from .dataset import export_sft, length_stats, read_conll_bio
from .gateway import GatewayConfig, MockModelConfig, complete_mock, complete_remote

__all__ = [
    "Annotation",
    "CodePrompt",
    "Dialect",
    "Entity",
    "EventArgument",
    "EventTrigger",
    "GatewayConfig",
    "GoldCompletion",
    "InvalidInstanceError",
    "LabelDescriptor",
    "LabelSchema",
    "MockModelConfig",
    "PredictionSet",
    "PromptStyle",
    "Relation",
    "RoleDescriptor",
    "ScoreReport",
    "TaskInstance",
    "TaskKind",
    "Violation",
    "compile_prompt",
    "complete_mock",
    "complete_remote",
    "dataset_jaccard",
    "export_sft",
    "intersect_agg",
    "jaccard",
    "length_stats",
    "load_dataset",
    "micro_f1",
    "normalize_surface",
    "parse_completion",
    "prompt_length",
    "read_conll_bio",
    "render_gold_output",
    "roundtrip_check",
    "save_dataset",
    "union_agg",
    "union_voting_gap",
    "validate_instance",
    "vote",
]
