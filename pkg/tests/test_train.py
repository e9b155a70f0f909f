"""Training loop behavior at full default scale."""

import numpy as np
import pytest

from trojangym.core import HtType
from trojangym.detector import ClassEmptyError, TrainConfig, train
from trojangym.detector.gcn import stratified_split


def test_every_class_reaches_090_validation_accuracy(default_training_run):
    for ht, acc in default_training_run["val_acc"].items():
        assert acc >= 0.90, f"{ht.name} stalled at {acc:.3f}"


def test_epoch_budget_respected(default_training_run):
    cfg = default_training_run["config"]
    for model in default_training_run["models"].values():
        meta = model.training_meta
        assert 1 <= meta.epochs <= cfg.max_epochs
        assert np.isfinite(meta.final_train_loss)
        assert np.isfinite(meta.final_val_loss)


def test_lr_history_is_a_non_increasing_schedule(default_training_run):
    cfg = default_training_run["config"]
    for model in default_training_run["models"].values():
        history = model.training_meta.lr_history
        assert len(history) == model.training_meta.epochs
        assert history[0] == cfg.lr
        for before, after in zip(history, history[1:]):
            assert after <= before
        assert history[-1] >= cfg.lr_floor


def test_retraining_with_same_seed_is_bit_identical(default_training_run):
    clean = default_training_run["clean"]
    infected = default_training_run["infected"][HtType.HT1]
    cfg = default_training_run["config"]
    rerun = train(clean, infected, HtType.HT1, cfg)
    first = default_training_run["models"][HtType.HT1]
    for name, array in first.params.arrays().items():
        assert np.array_equal(array, rerun.params.arrays()[name]), name
    assert rerun.training_meta.lr_history == \
        first.training_meta.lr_history


def test_different_seed_changes_the_weights(default_training_run):
    clean = default_training_run["clean"]
    infected = default_training_run["infected"][HtType.HT1]
    other = train(clean, infected, HtType.HT1, TrainConfig(seed=1))
    first = default_training_run["models"][HtType.HT1]
    assert not np.array_equal(first.params.W1, other.params.W1)


def test_model_records_its_target_class(default_training_run):
    for ht, model in default_training_run["models"].items():
        assert model.trained_for is ht


def test_too_few_examples_per_class_rejected(default_training_run):
    clean = default_training_run["clean"]
    infected = default_training_run["infected"][HtType.HT2]
    with pytest.raises(ClassEmptyError):
        train(clean[:3], infected, HtType.HT2, TrainConfig())
    with pytest.raises(ClassEmptyError):
        train(clean, infected[:2], HtType.HT2, TrainConfig())


def test_stratified_split_is_seeded_and_class_balanced():
    labels = [0] * 30 + [1] * 10
    train_idx, val_idx = stratified_split(labels, 0.25, seed=3)
    assert sorted(train_idx + val_idx) == list(range(40))
    assert not set(train_idx) & set(val_idx)
    for half in (train_idx, val_idx):
        kinds = {labels[i] for i in half}
        assert kinds == {0, 1}
    again = stratified_split(labels, 0.25, seed=3)
    assert (train_idx, val_idx) == again
    assert stratified_split(labels, 0.25, seed=4) != again
