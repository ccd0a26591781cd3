import math

import pytest

from organtrain import TrainConfig, cosine_lr


def test_defaults():
    cfg = TrainConfig()
    assert cfg.epochs == 100
    assert cfg.lr_init == pytest.approx(3e-4)
    assert cfg.lr_final == pytest.approx(1e-6)
    assert cfg.l1_l2_coeff == pytest.approx(1e-5)
    assert cfg.dropout == pytest.approx(0.25)
    assert cfg.hidden == 128
    assert cfg.blocks == 4
    assert cfg.batch_size == 1024
    assert cfg.val_split == pytest.approx(0.05)
    assert cfg.stop_at_val_accuracy is None


def test_cosine_schedule_endpoints():
    cfg = TrainConfig()
    total = 1000
    assert cosine_lr(cfg, 0, total) == pytest.approx(3e-4, abs=1e-9)
    assert cosine_lr(cfg, total - 1, total) == pytest.approx(1e-6, abs=1e-9)


def test_cosine_schedule_midpoint_and_monotone():
    cfg = TrainConfig()
    total = 201
    mid = cosine_lr(cfg, 100, total)
    assert mid == pytest.approx(cfg.lr_final + 0.5 * (cfg.lr_init - cfg.lr_final))
    values = [cosine_lr(cfg, s, total) for s in range(total)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_cosine_schedule_follows_half_cosine_shape():
    cfg = TrainConfig()
    total = 50
    for step in range(total):
        expected = cfg.lr_final + 0.5 * (cfg.lr_init - cfg.lr_final) * (
            1.0 + math.cos(math.pi * step / (total - 1)))
        assert cosine_lr(cfg, step, total) == pytest.approx(expected, rel=1e-12)


def test_cosine_single_step_returns_initial_rate():
    cfg = TrainConfig()
    assert cosine_lr(cfg, 0, 1) == pytest.approx(cfg.lr_init)


def test_cosine_rejects_out_of_range_step():
    cfg = TrainConfig()
    with pytest.raises(ValueError):
        cosine_lr(cfg, -1, 10)
    with pytest.raises(ValueError):
        cosine_lr(cfg, 10, 10)


@pytest.mark.parametrize("kwargs", [
    {"epochs": 0},
    {"hidden": 0},
    {"blocks": -1},
    {"batch_size": 0},
    {"lr_init": 0.0},
    {"lr_final": 3e-4, "lr_init": 1e-6},
    {"l1_l2_coeff": -1e-5},
    {"dropout": 1.0},
    {"dropout": -0.1},
    {"val_split": 1.0},
])
def test_invalid_configs_rejected(kwargs):
    with pytest.raises(ValueError):
        TrainConfig(**kwargs)
