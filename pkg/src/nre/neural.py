"""Neural rules: trainable min-pool ReLU relaxations of conjunctive rules.

A rule's output is c * min_j relu(w_j . x_T + a_j) over one hidden unit per
original decision node, where x_T gathers the features used anywhere in the
source tree. A deep rule stacks a second, identity-initialized hidden layer of
the same width, which lets the support grow non-convex during training. The
min pool routes each sample's gradient through its least confident unit only,
and samples outside the support contribute exactly zero gradient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rules import ConjunctiveRule


@dataclass
class NeuralRule:
    tree_features: tuple[int, ...]
    w1: np.ndarray  # (H, q)
    b1: np.ndarray  # (H,)
    w2: np.ndarray | None  # (H, H) for deep rules
    b2: np.ndarray | None  # (H,)
    c: float

    @property
    def deep(self) -> bool:
        return self.w2 is not None

    @property
    def n_units(self) -> int:
        return self.w1.shape[0]

    def n_params(self) -> int:
        n = self.w1.size + self.b1.size + 1
        if self.deep:
            n += self.w2.size + self.b2.size
        return n


@dataclass
class ForwardTrace:
    """Intermediates of one forward pass, kept for backpropagation."""

    x_t: np.ndarray
    preacts1: np.ndarray
    acts1: np.ndarray
    preacts2: np.ndarray | None
    acts2: np.ndarray | None
    argmin_index: int
    value: float


@dataclass
class RuleGradients:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray | None
    b2: np.ndarray | None
    c: float
    dx_t: np.ndarray | None = None  # gradient w.r.t. the gathered input, tests only


@dataclass
class AdamState:
    """First/second moment accumulators for one flat parameter vector."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    alpha: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def for_params(n: int, alpha: float = 0.01) -> "AdamState":
        return AdamState(m=np.zeros(n), v=np.zeros(n), alpha=alpha)


def _layer1_init(rule: ConjunctiveRule, tree_features) -> tuple[np.ndarray, np.ndarray]:
    tf = tuple(tree_features)
    if not rule.literals:
        raise ValueError("cannot map a rule with no literals into a neural rule")
    position = {f: i for i, f in enumerate(tf)}
    H, q = len(rule.literals), len(tf)
    w1 = np.zeros((H, q))
    b1 = np.zeros(H)
    for j, (f, w, a) in enumerate(rule.literals):
        if f not in position:
            raise ValueError(f"rule feature {f} is not among the tree features {tf}")
        w1[j, position[f]] = float(w)
        b1[j] = a
    return w1, b1


def init_from_rule(rule: ConjunctiveRule, tree_features) -> NeuralRule:
    """Shallow neural rule whose support at init equals the rule's hyper-rectangle.

    Unit j corresponds to literal j: its weight row is zero except for ±1 at
    that literal's feature, and its bias is the literal's bias, so the
    connections mirroring the tree start at their tree values and every other
    connection starts at zero.
    """
    w1, b1 = _layer1_init(rule, tree_features)
    return NeuralRule(tuple(tree_features), w1, b1, None, None, c=rule.c)


def init_deep_from_rule(rule: ConjunctiveRule, tree_features) -> NeuralRule:
    """Deep neural rule: identity-initialized second layer preserves the support."""
    w1, b1 = _layer1_init(rule, tree_features)
    H = w1.shape[0]
    return NeuralRule(tuple(tree_features), w1, b1, np.eye(H), np.zeros(H), c=rule.c)


def forward(n: NeuralRule, x) -> ForwardTrace:
    """Evaluate the rule at one point; the trace carries everything backward needs."""
    x_t = np.asarray(x, dtype=np.float64)[list(n.tree_features)]
    pre1 = n.w1 @ x_t + n.b1
    act1 = np.maximum(0.0, pre1)
    if n.deep:
        pre2 = n.w2 @ act1 + n.b2
        act2 = np.maximum(0.0, pre2)
        final = act2
    else:
        pre2 = act2 = None
        final = act1
    k = int(np.argmin(final))  # first occurrence = smallest index on ties
    return ForwardTrace(x_t, pre1, act1, pre2, act2, k, float(n.c * final[k]))


def backward(n: NeuralRule, trace: ForwardTrace, upstream: float) -> RuleGradients:
    """Gradients of ``upstream * value`` for every parameter plus the input.

    Outside the support (pooled minimum <= 0) everything is exactly zero.
    Inside, only the argmin unit carries gradient; for deep rules it fans out
    to first-layer units with positive preactivation.
    """
    gw1 = np.zeros_like(n.w1)
    gb1 = np.zeros_like(n.b1)
    gw2 = np.zeros_like(n.w2) if n.deep else None
    gb2 = np.zeros_like(n.b2) if n.deep else None
    dx_t = np.zeros_like(trace.x_t)
    final = trace.acts2 if n.deep else trace.acts1
    k = trace.argmin_index
    a_min = final[k]
    if a_min <= 0.0:
        return RuleGradients(gw1, gb1, gw2, gb2, 0.0, dx_t)
    dc = upstream * a_min
    g = upstream * n.c  # d(upstream * value) / d(final act of unit k)
    if n.deep:
        gw2[k] = g * trace.acts1
        gb2[k] = g
        dpre1 = g * n.w2[k] * (trace.preacts1 > 0.0)
        gw1 += dpre1[:, None] * trace.x_t
        gb1 += dpre1
        dx_t = n.w1.T @ dpre1
    else:
        gw1[k] = g * trace.x_t
        gb1[k] = g
        dx_t = g * n.w1[k]
    return RuleGradients(gw1, gb1, gw2, gb2, dc, dx_t)


@dataclass
class BatchTrace:
    x_t: np.ndarray  # (N, q)
    pre1: np.ndarray  # (N, H)
    act1: np.ndarray
    pre2: np.ndarray | None
    act2: np.ndarray | None
    argmin_index: np.ndarray  # (N,)
    values: np.ndarray  # (N,)


def forward_batch(n: NeuralRule, features: np.ndarray) -> BatchTrace:
    X_t = np.asarray(features, dtype=np.float64)[:, list(n.tree_features)]
    pre1 = X_t @ n.w1.T + n.b1
    act1 = np.maximum(0.0, pre1)
    if n.deep:
        pre2 = act1 @ n.w2.T + n.b2
        act2 = np.maximum(0.0, pre2)
        final = act2
    else:
        pre2 = act2 = None
        final = act1
    ks = np.argmin(final, axis=1)
    vals = n.c * final[np.arange(final.shape[0]), ks]
    return BatchTrace(X_t, pre1, act1, pre2, act2, ks, vals)


def backward_batch(n: NeuralRule, bt: BatchTrace, upstream: np.ndarray) -> RuleGradients:
    """Per-parameter gradients summed over the batch (no input gradient)."""
    N = bt.x_t.shape[0]
    rows = np.arange(N)
    final = bt.act2 if n.deep else bt.act1
    a_min = final[rows, bt.argmin_index]
    gate = a_min > 0.0
    dc = float(np.sum(upstream * a_min * gate))
    gvec = np.where(gate, upstream * n.c, 0.0)
    G = np.zeros_like(final)
    G[rows, bt.argmin_index] = gvec
    if n.deep:
        gw2 = G.T @ bt.act1
        gb2 = G.sum(axis=0)
        dpre1 = (G @ n.w2) * (bt.pre1 > 0.0)
        gw1 = dpre1.T @ bt.x_t
        gb1 = dpre1.sum(axis=0)
        return RuleGradients(gw1, gb1, gw2, gb2, dc)
    gw1 = G.T @ bt.x_t
    gb1 = G.sum(axis=0)
    return RuleGradients(gw1, gb1, None, None, dc)


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState) -> np.ndarray:
    """One bias-corrected Adam update; mutates the state, returns new parameters."""
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValueError("parameter, gradient and state shapes must agree")
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads**2
    m_hat = state.m / (1.0 - state.beta1**state.step)
    v_hat = state.v / (1.0 - state.beta2**state.step)
    return params - state.alpha * m_hat / (np.sqrt(v_hat) + state.eps)


# Flat parameter layout per rule: w1 row-major, b1, then w2 row-major, b2
# (deep only), then c. Serialization and Adam state both rely on this order.

def pack_params(n: NeuralRule) -> np.ndarray:
    parts = [n.w1.ravel(), n.b1]
    if n.deep:
        parts += [n.w2.ravel(), n.b2]
    parts.append(np.array([n.c]))
    return np.concatenate(parts)


def unpack_params(n: NeuralRule, flat: np.ndarray) -> None:
    if flat.shape != (n.n_params(),):
        raise ValueError(f"expected {n.n_params()} parameters, got {flat.shape}")
    i = 0

    def take(shape):
        nonlocal i
        size = int(np.prod(shape))
        out = flat[i : i + size].reshape(shape)
        i += size
        return out

    n.w1 = take(n.w1.shape).copy()
    n.b1 = take(n.b1.shape).copy()
    if n.deep:
        n.w2 = take(n.w2.shape).copy()
        n.b2 = take(n.b2.shape).copy()
    n.c = float(flat[i])


def pack_grads(n: NeuralRule, g: RuleGradients) -> np.ndarray:
    parts = [g.w1.ravel(), g.b1]
    if n.deep:
        parts += [g.w2.ravel(), g.b2]
    parts.append(np.array([g.c]))
    return np.concatenate(parts)
