"""End-to-end neural rule ensembles.

Training pipeline: standardize, grow a margin-split tree, decompose it into
conjunctive rules, map each rule to a (deep) neural rule, then jointly train
all rule parameters with Adam on the mean logistic loss of the summed rule
outputs. The trained model carries its standardizer and the source tree, and
serializes to a canonical, checksummed JSON file.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset, StandardizationParams, standardize_apply, standardize_fit
from .errors import DataError, ModelFormatError
from .neural import (
    AdamState,
    NeuralRule,
    adam_step,
    backward_batch,
    forward,
    forward_batch,
    init_deep_from_rule,
    init_from_rule,
    pack_grads,
    pack_params,
    unpack_params,
)
from .rules import extract_rules, rank_rules
from .tree import DecisionTree, build_tree

SCHEMA_VERSION = 1
FULL_BATCH_LIMIT = 4096


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the training pipeline.

    ``batch_size=None`` resolves to full batch up to 4096 training samples and
    256 afterwards. ``learning_rate`` is the Adam step size. ``early_stop_patience``
    enables early stopping on a seeded 10% validation split when set. With full
    batches one epoch is one optimizer iteration.
    """

    max_depth: int = 4
    min_leaf: int = 1
    deep: bool = False
    epochs: int = 200
    batch_size: int | None = None
    learning_rate: float = 0.01
    l2: float = 0.0
    seed: int = 0
    max_rules: int | None = None
    early_stop_patience: int | None = None

    def __post_init__(self):
        if self.max_depth < 1 or self.min_leaf < 1:
            raise ValueError("max_depth and min_leaf must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1 when given")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.max_rules is not None and self.max_rules < 1:
            raise ValueError("max_rules must be >= 1 when given")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1 when given")


@dataclass
class NREModel:
    """Deployable artifact: standardizer + trained neural rules + provenance."""

    standardization: StandardizationParams
    rules: list[NeuralRule]
    config: TrainConfig
    source_tree: DecisionTree
    degenerate: bool = False
    history: list[tuple[int, float, float]] = field(default_factory=list, repr=False)

    @property
    def tree_features(self) -> tuple[int, ...]:
        if self.rules:
            return self.rules[0].tree_features
        return self.source_tree.feature_set

    @property
    def constant_score(self) -> float:
        """Score of a rule-less (single-leaf) model: the root's signed class margin."""
        root = self.source_tree.root
        return (root.n_pos - root.n_neg) / max(1, root.n_pos + root.n_neg)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(u, y):
    """Stable elementwise logistic loss log(1 + exp(-u*y)) and its u-derivative."""
    u = np.asarray(u, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = u * y
    loss = np.logaddexp(0.0, -z)
    dloss = -y * _sigmoid(-z)
    return loss, dloss


def model_pack(rules: list[NeuralRule]) -> np.ndarray:
    return np.concatenate([pack_params(r) for r in rules])


def model_unpack(rules: list[NeuralRule], flat: np.ndarray) -> None:
    i = 0
    for r in rules:
        n = r.n_params()
        unpack_params(r, flat[i : i + n])
        i += n


def ensemble_scores(rules: list[NeuralRule], features: np.ndarray) -> np.ndarray:
    scores = np.zeros(features.shape[0])
    for r in rules:
        scores += forward_batch(r, features).values
    return scores


def model_loss_and_grad(
    rules: list[NeuralRule], features: np.ndarray, labels: np.ndarray, l2: float = 0.0
):
    """Mean logistic loss of the summed rule outputs plus optional L2 shrinkage.

    Returns the objective value and its gradient over the flat parameter
    vector. With shrinkage l2=rho the gradient is the data gradient plus
    2*rho*params.
    """
    N = features.shape[0]
    traces = [forward_batch(r, features) for r in rules]
    scores = np.zeros(N)
    for bt in traces:
        scores += bt.values
    losses, dscores = logistic_loss(scores, labels)
    upstream = dscores / N
    grad = np.concatenate(
        [pack_grads(r, backward_batch(r, bt, upstream)) for r, bt in zip(rules, traces)]
    )
    loss = float(losses.mean())
    if l2 > 0.0:
        params = model_pack(rules)
        grad = grad + 2.0 * l2 * params
        loss += l2 * float(params @ params)
    return loss, grad


def _eval_rules(rules, features, labels):
    scores = ensemble_scores(rules, features)
    losses, _ = logistic_loss(scores, labels)
    preds = np.where(scores >= 0.0, 1, -1)
    return float(losses.mean()), float(np.mean(preds != labels))


def nre_train(d: Dataset, cfg: TrainConfig, trace=None) -> NREModel:
    """Run the full training pipeline on a dataset.

    The optional ``trace(stage, payload)`` hook fires at every stage boundary
    ("standardize", "tree", "rules", "neural_init", one "train_epoch" per epoch
    including the epoch-0 baseline, then "done"), which makes the pipeline
    order observable and lets callers write mid-training checkpoints.
    """
    emit = trace if trace is not None else (lambda stage, payload: None)
    if len(np.unique(d.labels)) < 2:
        raise DataError("training needs both classes present")

    params = standardize_fit(d)
    ds = standardize_apply(d, params)
    emit("standardize", params)

    tree = build_tree(ds, cfg.max_depth, cfg.min_leaf)
    emit("tree", tree)

    if tree.root.is_leaf:
        warnings.warn("tree degenerated to a single leaf; returning a constant model")
        model = NREModel(params, [], cfg, tree, degenerate=True)
        c = model.constant_score
        loss = float(logistic_loss(np.full(ds.n_samples, c), ds.labels)[0].mean())
        err = float(np.mean(np.where(c >= 0, 1, -1) != ds.labels))
        model.history = [(0, loss, err)]
        emit("done", model)
        return model

    rules = extract_rules(tree)
    if cfg.max_rules is not None and cfg.max_rules < len(rules):
        keep = rank_rules(rules)[: cfg.max_rules]
        rules = [rules[i] for i in keep]
    emit("rules", rules)

    make = init_deep_from_rule if cfg.deep else init_from_rule
    nrules = [make(r, tree.feature_set) for r in rules]
    emit("neural_init", nrules)

    model = NREModel(params, nrules, cfg, tree)
    X, y = ds.features, ds.labels
    N = X.shape[0]
    rng = np.random.default_rng(cfg.seed)

    if cfg.early_stop_patience is not None:
        n_val = max(1, int(round(0.10 * N)))
        perm = rng.permutation(N)
        val_idx, train_idx = perm[:n_val], perm[n_val:]
        if train_idx.size == 0:
            raise DataError("dataset too small for a validation split")
    else:
        val_idx, train_idx = None, np.arange(N)
    n_train = train_idx.size
    batch = cfg.batch_size or (n_train if n_train <= FULL_BATCH_LIMIT else 256)
    batch = min(batch, n_train)

    flat = model_pack(nrules)
    state = AdamState.for_params(flat.size, alpha=cfg.learning_rate)

    loss0, err0 = _eval_rules(nrules, X[train_idx], y[train_idx])
    model.history = [(0, loss0, err0)]
    emit("train_epoch", {"epoch": 0, "loss": loss0, "error": err0, "model": model})

    best_val = np.inf
    best_flat = None
    stale = 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n_train)
        for start in range(0, n_train, batch):
            bidx = train_idx[order[start : start + batch]]
            _, grad = model_loss_and_grad(nrules, X[bidx], y[bidx], l2=cfg.l2)
            flat = adam_step(flat, grad, state)
            model_unpack(nrules, flat)
        loss_e, err_e = _eval_rules(nrules, X[train_idx], y[train_idx])
        model.history.append((epoch, loss_e, err_e))
        emit("train_epoch", {"epoch": epoch, "loss": loss_e, "error": err_e, "model": model})
        if val_idx is not None:
            val_loss, _ = _eval_rules(nrules, X[val_idx], y[val_idx])
            if val_loss < best_val:
                best_val, best_flat, stale = val_loss, flat.copy(), 0
            else:
                stale += 1
                if stale >= cfg.early_stop_patience:
                    break
    if val_idx is not None and best_flat is not None:
        model_unpack(nrules, best_flat)
    emit("done", model)
    return model


def nre_score(m: NREModel, x) -> float:
    """Ensemble score of one raw point: standardize, then sum all rule outputs."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != m.standardization.means.shape:
        raise DataError(f"point has shape {x.shape}, model expects {m.standardization.means.shape}")
    xs = (x - m.standardization.means) / m.standardization.stds
    if not m.rules:
        return m.constant_score
    return float(sum(forward(r, xs).value for r in m.rules))


def nre_score_batch(m: NREModel, features: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if X.shape[1] != m.standardization.means.shape[0]:
        raise DataError(
            f"features have {X.shape[1]} columns, model expects {m.standardization.means.shape[0]}"
        )
    Xs = (X - m.standardization.means) / m.standardization.stds
    if not m.rules:
        return np.full(X.shape[0], m.constant_score)
    return ensemble_scores(m.rules, Xs)


def nre_predict(m: NREModel, x) -> int:
    """Label from the score's sign; an exact zero counts as +1."""
    return 1 if nre_score(m, x) >= 0.0 else -1


def evaluate(m: NREModel, d: Dataset) -> float:
    """Fraction of misclassified samples in [0, 1]."""
    scores = nre_score_batch(m, d.features)
    preds = np.where(scores >= 0.0, 1, -1)
    return float(np.mean(preds != d.labels))


def _rule_payload(r: NeuralRule) -> dict:
    out = {
        "layer1": [{"w": w.tolist(), "b": float(b)} for w, b in zip(r.w1, r.b1)],
        "c": float(r.c),
    }
    if r.deep:
        out["layer2"] = [{"w": w.tolist(), "b": float(b)} for w, b in zip(r.w2, r.b2)]
    return out


def _model_payload(m: NREModel) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "standardization": {
            "means": m.standardization.means.tolist(),
            "stds": m.standardization.stds.tolist(),
        },
        "tree_features": list(m.tree_features),
        "rules": [_rule_payload(r) for r in m.rules],
        "source_tree": m.source_tree.to_dict(),
        "config": asdict(m.config),
    }


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_model(m: NREModel, path: str) -> None:
    """Write the model as canonical JSON with an embedded content checksum.

    Floats serialize at full round-trip precision, so save -> load -> save is
    byte-identical and loaded models score exactly like the originals.
    """
    payload = _model_payload(m)
    checksum = hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()
    payload["checksum"] = checksum
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_canonical(payload))


def load_model(path: str) -> NREModel:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"not a valid model file: {e}") from e
    if not isinstance(payload, dict):
        raise ModelFormatError("model file must contain a JSON object")
    try:
        checksum = payload.pop("checksum")
        version = payload["version"]
        if version != SCHEMA_VERSION:
            raise ModelFormatError(f"unsupported schema version {version}")
        expected = hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()
        if checksum != expected:
            raise ModelFormatError("checksum mismatch; file corrupted or edited")
        std = StandardizationParams(
            np.array(payload["standardization"]["means"], dtype=np.float64),
            np.array(payload["standardization"]["stds"], dtype=np.float64),
        )
        tf = tuple(payload["tree_features"])
        rules = []
        for rp in payload["rules"]:
            w1 = np.array([u["w"] for u in rp["layer1"]], dtype=np.float64)
            b1 = np.array([u["b"] for u in rp["layer1"]], dtype=np.float64)
            if "layer2" in rp:
                w2 = np.array([u["w"] for u in rp["layer2"]], dtype=np.float64)
                b2 = np.array([u["b"] for u in rp["layer2"]], dtype=np.float64)
            else:
                w2 = b2 = None
            rules.append(NeuralRule(tf, w1, b1, w2, b2, float(rp["c"])))
        tree = DecisionTree.from_dict(payload["source_tree"])
        cfg = TrainConfig(**payload["config"])
    except (KeyError, TypeError, IndexError) as e:
        raise ModelFormatError(f"model file is missing fields: {e}") from e
    return NREModel(std, rules, cfg, tree, degenerate=not rules)
