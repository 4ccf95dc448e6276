"""Neural rule ensembles: margin-split trees refined into trainable min-pool ReLU rules."""

from .data import (
    Dataset,
    FoldAssignment,
    StandardizationParams,
    fetch_pmlb,
    gen_linear_separable,
    gen_madelon_like,
    gen_rotated_xor,
    load_table,
    standardize_apply,
    standardize_fit,
    stratified_kfold,
)
from .ensemble import (
    NREModel,
    TrainConfig,
    evaluate,
    load_model,
    logistic_loss,
    nre_predict,
    nre_score,
    nre_score_batch,
    nre_train,
    save_model,
)
from .errors import DataError, ModelFormatError, UsageError
from .neural import (
    AdamState,
    ForwardTrace,
    NeuralRule,
    adam_step,
    backward,
    forward,
    init_deep_from_rule,
    init_from_rule,
)
from .rules import (
    ConjunctiveRule,
    Literal,
    extract_rules,
    rank_rules,
    rule_activate,
    rule_margin_score,
    rule_norm,
    rule_to_str,
)
from .stats import (
    ComparisonTable,
    SignTestResult,
    WilcoxonResult,
    critical_values,
    sign_test,
    wilcoxon_signed_rank,
)
from .tree import DecisionTree, TreeNode, best_split, build_tree, margin_split_gain

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ComparisonTable",
    "ConjunctiveRule",
    "DataError",
    "Dataset",
    "DecisionTree",
    "FoldAssignment",
    "ForwardTrace",
    "Literal",
    "ModelFormatError",
    "NREModel",
    "NeuralRule",
    "SignTestResult",
    "StandardizationParams",
    "TrainConfig",
    "TreeNode",
    "UsageError",
    "WilcoxonResult",
    "adam_step",
    "backward",
    "best_split",
    "build_tree",
    "critical_values",
    "evaluate",
    "extract_rules",
    "fetch_pmlb",
    "forward",
    "gen_linear_separable",
    "gen_madelon_like",
    "gen_rotated_xor",
    "init_deep_from_rule",
    "init_from_rule",
    "load_model",
    "load_table",
    "logistic_loss",
    "margin_split_gain",
    "nre_predict",
    "nre_score",
    "nre_score_batch",
    "nre_train",
    "rank_rules",
    "rule_activate",
    "rule_margin_score",
    "rule_norm",
    "rule_to_str",
    "save_model",
    "sign_test",
    "standardize_apply",
    "standardize_fit",
    "stratified_kfold",
    "wilcoxon_signed_rank",
]
