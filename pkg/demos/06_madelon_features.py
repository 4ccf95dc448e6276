"""Feature selection through tree initialization on a MADELON-style problem.

The generator hides a 5-dimensional XOR (clusters on hypercube vertices with
random labels) among linear echoes of those coordinates and hundreds of pure
noise columns. A fully connected network sees 500 inputs; the tree behind a
neural rule ensemble touches only a handful, and the ensemble trains only on
those.
"""
import numpy as np

from nre import TrainConfig, evaluate, gen_madelon_like, nre_train
from nre.data import stratified_kfold

data, origin = gen_madelon_like(n=1500, informative=5, redundant=15, distractors=180, seed=2)
print(f"dataset: {data.n_samples} rows, {data.n_features} feature columns")
kinds = [k for k, _ in origin]
print(
    "hidden composition:",
    kinds.count("informative"), "informative,",
    kinds.count("redundant"), "redundant,",
    kinds.count("distractor"), "distractors",
)

folds = stratified_kfold(data, 5, seed=0)
cfg = TrainConfig(max_depth=6, epochs=150, seed=0)
errors, used_kinds = [], []
for fold in range(5):
    model = nre_train(data.subset(folds.train_indices(fold)), cfg)
    errors.append(evaluate(model, data.subset(folds.test_indices(fold))))
    used_kinds.append([origin[j][0] for j in model.tree_features])

print(f"\nfive-fold test error: {100 * float(np.mean(errors)):.2f}% "
      f"(folds: {', '.join(f'{100 * e:.1f}%' for e in errors)})")

print("\nfeature columns each fold's tree selected, by hidden origin:")
for fold, kinds in enumerate(used_kinds):
    counts = {k: kinds.count(k) for k in ("informative", "redundant", "distractor")}
    print(f"  fold {fold}: {len(kinds):2d} features used -> {counts}")
print("\nthe trees concentrate on informative/redundant columns and mostly")
print("ignore the distractors, which is the point of tree-based initialization")
