import json

import numpy as np
import pytest
import torch

from organtrain import (DescriptorCorpus, TrainConfig, evaluate,
                        export_weights, l1_l2_penalty, train,
                        training_summary, weight_matrices)
from organtrain.formats import write_rows
from organtrain.net import PointClassifierNet


def _blob_corpus(tmp_path, rows_per_class=200, dim=16, classes=3, seed=0):
    """Well-separated Gaussian blobs: trivially learnable."""
    rng = np.random.default_rng(seed)
    values, labels = [], []
    for c in range(classes):
        center = np.zeros(dim, dtype=np.float32)
        center[c % dim] = 10.0 * (c + 1)
        values.append(center + rng.standard_normal(
            (rows_per_class, dim)).astype(np.float32))
        labels.append(np.full(rows_per_class, c, dtype=np.uint16))
    order = rng.permutation(classes * rows_per_class)
    path = tmp_path / "blobs.orgd"
    write_rows(path, np.concatenate(values)[order],
               np.concatenate(labels)[order])
    return DescriptorCorpus.open([path])


def _fast_config(**overrides):
    base = dict(epochs=5, lr_init=1e-2, lr_final=1e-4, hidden=16, blocks=2,
                batch_size=64, dropout=0.1, val_split=0.1, seed=3)
    base.update(overrides)
    return TrainConfig(**base)


def test_learns_separable_blobs(tmp_path):
    corpus = _blob_corpus(tmp_path)
    net, result = train(corpus, _fast_config())
    assert result.epochs_run <= 5
    assert result.val_accuracy is not None
    assert result.val_accuracy >= 0.99
    assert result.train_accuracy >= 0.99


def test_training_is_deterministic_for_fixed_seed(tmp_path):
    corpus = _blob_corpus(tmp_path)
    net_a, result_a = train(corpus, _fast_config(epochs=2))
    net_b, result_b = train(corpus, _fast_config(epochs=2))
    names = ["a", "b", "c"]
    assert export_weights(net_a, names) == export_weights(net_b, names)
    assert result_a == result_b


def test_different_seeds_give_different_models(tmp_path):
    corpus = _blob_corpus(tmp_path)
    net_a, _ = train(corpus, _fast_config(epochs=1, seed=1))
    net_b, _ = train(corpus, _fast_config(epochs=1, seed=2))
    names = ["a", "b", "c"]
    assert export_weights(net_a, names) != export_weights(net_b, names)


def test_early_stop_on_validation_accuracy(tmp_path):
    corpus = _blob_corpus(tmp_path)
    cfg = _fast_config(epochs=50, stop_at_val_accuracy=0.95)
    net, result = train(corpus, cfg)
    assert result.val_accuracy >= 0.95
    assert result.epochs_run < 50


def test_network_returned_in_eval_mode(tmp_path):
    corpus = _blob_corpus(tmp_path, rows_per_class=40)
    net, _ = train(corpus, _fast_config(epochs=1))
    assert not net.training


def test_steps_count_matches_batches(tmp_path):
    corpus = _blob_corpus(tmp_path, rows_per_class=100)  # 300 rows
    cfg = _fast_config(epochs=2, batch_size=64, val_split=0.1)
    _, result = train(corpus, cfg)
    # 270 training rows -> 5 batches of <=64 per epoch
    assert result.steps == 2 * 5
    assert result.epochs_run == 2


def test_penalty_value_over_weight_matrices_only():
    torch.manual_seed(0)
    net = PointClassifierNet(8, 6, 2, 3)
    coeff = 1e-3
    expected = coeff * sum(
        (w.abs().sum() + w.pow(2).sum()).item() for w in weight_matrices(net))
    assert l1_l2_penalty(net, coeff).item() == pytest.approx(expected, rel=1e-6)

    # Biases and norm parameters must not contribute.
    with torch.no_grad():
        for block in net.blocks:
            block.fc1.bias.fill_(100.0)
            block.ln1.weight.fill_(100.0)
        net.head.bias.fill_(100.0)
    assert l1_l2_penalty(net, coeff).item() == pytest.approx(expected, rel=1e-6)


def test_penalty_pulls_weights_toward_zero(tmp_path):
    corpus = _blob_corpus(tmp_path, rows_per_class=60)
    free, _ = train(corpus, _fast_config(epochs=3, l1_l2_coeff=0.0, dropout=0.0))
    tight, _ = train(corpus, _fast_config(epochs=3, l1_l2_coeff=1e-2, dropout=0.0))
    norm = lambda net: sum(w.abs().sum().item() for w in weight_matrices(net))
    assert norm(tight) < norm(free)


def test_evaluate_reports_exact_accuracy(tmp_path):
    corpus = _blob_corpus(tmp_path, rows_per_class=50)
    net, _ = train(corpus, _fast_config())
    indices = np.arange(len(corpus))
    loss, acc = evaluate(net, corpus, indices, batch_size=32)

    x, y = corpus.gather(indices)
    with torch.no_grad():
        pred = net(torch.from_numpy(x)).argmax(dim=1).numpy()
    assert acc == pytest.approx((pred == y).mean())
    assert loss > 0.0


def test_training_summary_records_run(tmp_path):
    corpus = _blob_corpus(tmp_path, rows_per_class=40)
    cfg = _fast_config(epochs=1)
    net, result = train(corpus, cfg)
    summary = training_summary(cfg, corpus, ["a", "b", "c"], result)
    encoded = json.loads(json.dumps(summary))

    assert encoded["optimizer"] == "adam"
    assert encoded["num_classes"] == 3
    assert encoded["label_names"] == ["a", "b", "c"]
    assert encoded["config"]["epochs"] == 1
    assert encoded["config"]["seed"] == cfg.seed
    assert encoded["dataset"]["rows"] == len(corpus)
    assert encoded["dataset"]["descriptor_dim"] == 16
    assert encoded["result"]["epochs_run"] == result.epochs_run
    assert encoded["result"]["val_accuracy"] == pytest.approx(result.val_accuracy)
