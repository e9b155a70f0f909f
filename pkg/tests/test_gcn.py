"""GCN numerics: analytic gradients vs central differences, softmax
coupling, and permutation invariance of the pooled readout."""

import numpy as np
import pytest

from trojangym.detector import (FEATURE_DIM, GcnModel, batch_loss, featurize,
                                forward, init_params, loss_and_gradients)
from trojangym.detector.gcn import _forward_cache
from trojangym.core import HtType
from trojangym.dfg import Dfg, DfgNode, NodeKind

_OP_LABELS = ("XOR", "ADD", "AND", "OR", "SHL", "EQ", "LT", "SUB")


def random_graph(rng: np.random.Generator, n_nodes: int) -> Dfg:
    nodes = []
    for i in range(n_nodes):
        kind = NodeKind(rng.choice([k.value for k in NodeKind]))
        if kind is NodeKind.OP:
            label = str(rng.choice(_OP_LABELS))
        elif kind is NodeKind.BRANCH:
            label = "MUX"
        elif kind is NodeKind.CONST:
            label = f"8'h{i:x}"
        elif kind is NodeKind.INSTANCE_PORT:
            label = f"u0.p{i}"
        else:
            label = f"s{i}"
        nodes.append(DfgNode(id=i, kind=kind, label=label))
    edges = set()
    for _ in range(rng.integers(n_nodes, 3 * n_nodes)):
        a, b = rng.integers(0, n_nodes, size=2)
        if a != b:
            edges.add((min(int(a), int(b)), max(int(a), int(b))))
    dfg = Dfg(nodes=nodes, edges=sorted(edges))
    dfg.validate()
    return dfg


def random_batch(seed: int, count: int):
    rng = np.random.default_rng(seed)
    graphs = [random_graph(rng, int(rng.integers(5, 16)))
              for _ in range(count)]
    labels = [int(rng.integers(0, 2)) for _ in range(count)]
    return [featurize(g) for g in graphs], labels


def test_analytic_gradients_match_central_differences():
    feats_list, labels = random_batch(seed=42, count=20)
    params = init_params(seed=7, hidden=8)
    rng = np.random.default_rng(0)
    # random biases keep every pre-activation off the ReLU kink, where
    # the subgradient and a central difference legitimately disagree
    for bias in (params.b1, params.b2, params.bout):
        bias += rng.normal(0.0, 0.1, size=bias.shape)
    for feats in feats_list:
        cache = _forward_cache(params, feats)
        assert np.min(np.abs(cache.z1)) > 1e-7
        assert np.min(np.abs(cache.z2)) > 1e-7

    _, grads = loss_and_gradients(params, feats_list, labels,
                                  class_weights=(1.0, 2.0))
    eps = 1e-5
    worst = 0.0
    for name, array in params.arrays().items():
        flat = array.reshape(-1)
        analytic = grads.arrays()[name].reshape(-1)
        picks = rng.choice(flat.size, size=min(10, flat.size), replace=False)
        for idx in picks:
            keep = flat[idx]
            flat[idx] = keep + eps
            hi = batch_loss(params, feats_list, labels,
                            class_weights=(1.0, 2.0))
            flat[idx] = keep - eps
            lo = batch_loss(params, feats_list, labels,
                            class_weights=(1.0, 2.0))
            flat[idx] = keep
            fd = (hi - lo) / (2 * eps)
            rel = abs(analytic[idx] - fd) / max(abs(analytic[idx]) + abs(fd),
                                                1e-8)
            worst = max(worst, rel)
    assert worst < 1e-4


def test_probabilities_sum_to_one_even_when_saturated():
    feats_list, _ = random_batch(seed=1, count=6)
    for scale in (1.0, 50.0):
        params = init_params(seed=3, hidden=8)
        for array in params.arrays().values():
            array *= scale
        for feats in feats_list:
            p_clean, p_trojan, _ = forward(params, feats)
            assert abs(p_clean + p_trojan - 1.0) < 1e-9
            assert 0.0 <= p_clean <= 1.0


def permute_graph(dfg: Dfg, perm: np.ndarray) -> Dfg:
    nodes = [None] * len(dfg.nodes)
    for node in dfg.nodes:
        new_id = int(perm[node.id])
        nodes[new_id] = DfgNode(id=new_id, kind=node.kind, label=node.label)
    edges = sorted((int(perm[a]), int(perm[b])) for a, b in dfg.edges)
    out = Dfg(nodes=nodes, edges=edges)
    out.validate()
    return out


def test_forward_is_invariant_to_node_permutation():
    rng = np.random.default_rng(9)
    params = init_params(seed=5, hidden=8)
    for _ in range(10):
        dfg = random_graph(rng, int(rng.integers(5, 16)))
        perm = rng.permutation(len(dfg.nodes))
        p0 = forward(params, featurize(dfg))
        p1 = forward(params, featurize(permute_graph(dfg, perm)))
        assert abs(p0[0] - p1[0]) <= 1e-12
        assert abs(p0[1] - p1[1]) <= 1e-12
        assert np.max(np.abs(p0[2] - p1[2])) <= 1e-12


def test_loss_and_gradients_agrees_with_batch_loss():
    feats_list, labels = random_batch(seed=12, count=8)
    params = init_params(seed=2, hidden=8)
    loss, _ = loss_and_gradients(params, feats_list, labels)
    assert loss == pytest.approx(batch_loss(params, feats_list, labels))


def test_class_weights_scale_their_class_only():
    feats_list, labels = random_batch(seed=20, count=8)
    labels = [1] * len(labels)
    params = init_params(seed=4, hidden=8)
    base = batch_loss(params, feats_list, labels, class_weights=(1.0, 1.0))
    doubled = batch_loss(params, feats_list, labels, class_weights=(1.0, 2.0))
    assert doubled == pytest.approx(2.0 * base)
    # clean-class weight is inert when every label is trojan
    assert batch_loss(params, feats_list, labels, class_weights=(9.0, 1.0)) \
        == pytest.approx(base)


def test_init_params_reproducible_and_shaped():
    a = init_params(seed=11)
    b = init_params(seed=11)
    c = init_params(seed=12)
    assert a.W1.shape == (FEATURE_DIM, 32)
    assert a.Wout.shape == (32, 2)
    for name, array in a.arrays().items():
        assert np.array_equal(array, b.arrays()[name])
    assert not np.array_equal(a.W1, c.W1)
    assert np.all(a.b1 == 0.0) and np.all(a.bout == 0.0)


def test_forward_accepts_model_wrapper():
    feats_list, _ = random_batch(seed=30, count=1)
    params = init_params(seed=6, hidden=8)
    model = GcnModel(params=params, trained_for=HtType.HT1)
    via_model = forward(model, feats_list[0])
    via_params = forward(params, feats_list[0])
    assert via_model[0] == via_params[0]
    assert via_model[1] == via_params[1]
    assert np.array_equal(via_model[2], via_params[2])
