"""Adam, checkpoints, the training loop, and its determinism."""

import numpy as np
import pytest

from eventpivot.corpus import GenConfig, generate_synthetic
from eventpivot.evaluation import EvalReport
from eventpivot.model import ModelConfig
from eventpivot.tensor import NumericError, Tensor
from eventpivot.training import (Adam, TrainConfig, TrainLog, apply_checkpoint,
                                 evaluate_model, load_checkpoint,
                                 predict_sentences, save_checkpoint, train)


# -------------------------------------------------------------------- adam

def test_adam_first_step_hand_value():
    p = Tensor(np.array([2.0, -1.0]), requires_grad=True)
    p.grad = np.array([1.0, 1.0])
    Adam({"p": p}, lr=0.1).step()
    # bias correction cancels on step one: delta = lr * g / (|g| + eps)
    expected = np.array([2.0, -1.0]) - 0.1 * (1.0 / (1.0 + 1e-8))
    np.testing.assert_allclose(p.data, expected, rtol=0, atol=1e-15)


def test_adam_leaves_gradless_parameters_alone():
    p = Tensor(np.array([3.0]), requires_grad=True)
    q = Tensor(np.array([5.0]), requires_grad=True)
    q.grad = np.array([1.0])
    Adam({"p": p, "q": q}, lr=0.1).step()
    np.testing.assert_array_equal(p.data, [3.0])
    assert q.data[0] != 5.0


def test_adam_step_sizes_do_not_grow_under_constant_gradient():
    p = Tensor(np.array([0.0]), requires_grad=True)
    opt = Adam({"p": p}, lr=0.1)
    p.grad = np.array([2.0])
    before = p.data.copy()
    opt.step()
    d1 = abs(p.data[0] - before[0])
    p.grad = np.array([2.0])
    before = p.data.copy()
    opt.step()
    d2 = abs(p.data[0] - before[0])
    assert d2 <= d1 + 1e-12


def test_adam_clip_reports_norm_without_mutating_grads():
    p = Tensor(np.array([0.0, 0.0]), requires_grad=True)
    g = np.array([3.0, 4.0])
    p.grad = g.copy()
    opt = Adam({"p": p}, lr=0.1)
    norm = opt.step(clip_norm=1.0)
    assert norm == pytest.approx(5.0)
    np.testing.assert_array_equal(p.grad, g)  # caller's grads untouched


def test_adam_rejects_nan_gradient_by_name():
    p = Tensor(np.array([1.0]), requires_grad=True)
    p.grad = np.array([np.nan])
    with pytest.raises(NumericError, match="embed.word"):
        Adam({"embed.word": p}).step()


def test_adam_zero_grad_clears_all():
    p = Tensor(np.array([1.0]), requires_grad=True)
    p.grad = np.array([2.0])
    opt = Adam({"p": p})
    opt.zero_grad()
    assert p.grad is None


# ------------------------------------------------------------ train config

def test_train_config_collects_all_problems():
    with pytest.raises(ValueError) as exc:
        TrainConfig(batch_size=0, max_epochs=3, patience=9, lr=-1.0,
                    dropout_keep=0.0)
    msg = str(exc.value)
    for frag in ("batch_size", "patience", "lr", "dropout_keep"):
        assert frag in msg, frag


def test_resolve_model_config_folds_flags():
    base = ModelConfig(tc_layers=4)
    cfg = TrainConfig(tau=0.3, dropout_keep=0.8)
    mc = cfg.resolve_model_config(base)
    assert mc.tau == pytest.approx(0.3)
    assert mc.drop_rate == pytest.approx(0.2)
    assert mc.use_labels and mc.lsl_mode == "straight_through"

    mc = TrainConfig(bypass_lsl=True).resolve_model_config(base)
    assert mc.lsl_mode == "bypass"
    mc = TrainConfig(no_labels=True).resolve_model_config(base)
    assert not mc.use_labels
    mc = TrainConfig(small_tc=True).resolve_model_config(base)
    assert mc.tc_layers == 2
    assert TrainConfig(small_tc=True).resolve_model_config(
        ModelConfig(tc_layers=1)).tc_layers == 1


# -------------------------------------------------------------- train log

def test_train_log_running_best_is_monotone():
    log = TrainLog()
    for ep, f1 in enumerate([0.2, 0.5, 0.3, 0.6, 0.1], start=1):
        log.record(ep, 1.0, EvalReport.from_counts(10, 10, int(10 * f1)))
    best = [e["running_best_f1"] for e in log.epochs]
    assert best == sorted(best)
    assert best[-1] == pytest.approx(0.6)


def test_train_log_json_round_trip():
    log = TrainLog()
    log.record(1, 0.9, EvalReport.from_counts(4, 4, 2))
    log.best_epoch = 1
    log.stop_reason = "max_epochs"
    back = TrainLog.from_json(log.to_json())
    assert back.to_json() == log.to_json()


# ------------------------------------------------------------- tiny corpus

TINY_GEN = GenConfig(n_types=2, train_sents=48, dev_sents=16, test_sents=16,
                     multi_event_fraction=0.2, distractor_fraction=0.2,
                     seed=11)
TINY_MODEL = ModelConfig(dim=16, lsl_heads=2, tc_heads=2, lsl_layers=1,
                         tc_layers=1, ffn_dim=16, max_len=48)
TINY_TRAIN = TrainConfig(max_epochs=4, patience=2, batch_size=8, seed=3)


@pytest.fixture(scope="module")
def tiny_run():
    schema, split = generate_synthetic(TINY_GEN)
    model, log = train(TINY_TRAIN, split, schema, TINY_MODEL)
    return schema, split, model, log


def test_train_log_shape_and_stop_reason(tiny_run):
    _, _, model, log = tiny_run
    assert 1 <= log.best_epoch <= len(log.epochs) <= TINY_TRAIN.max_epochs
    assert log.stop_reason in ("early_stop", "max_epochs")
    best = [e["running_best_f1"] for e in log.epochs]
    assert best == sorted(best)
    assert log.best_dev_f1 == pytest.approx(best[-1])


def test_every_parameter_sees_gradient_in_epoch_one(tiny_run):
    _, _, _, log = tiny_run
    assert log.grad_untouched == []


def test_predictions_cover_every_sentence(tiny_run):
    _, split, model, _ = tiny_run
    preds = predict_sentences(model, split.test)
    assert set(preds) == {s.key for s in split.test}
    report = evaluate_model(model, split.test)
    assert report.gold == sum(len(s.triggers) for s in split.test)
    assert 0.0 <= report.f1 <= 1.0


def test_training_is_deterministic_per_seed(tiny_run):
    schema, split, model, log = tiny_run
    again_model, again_log = train(TINY_TRAIN, split, schema, TINY_MODEL)
    assert again_log.to_json() == log.to_json()
    for k, t in model.parameters().items():
        np.testing.assert_array_equal(t.data, again_model.parameters()[k].data)

    other_model, other_log = train(
        TINY_TRAIN.__class__(**{**TINY_TRAIN.__dict__, "seed": 4}),
        split, schema, TINY_MODEL)
    assert other_log.to_json() != log.to_json()


def test_eventful_only_drops_distractors():
    schema, split = generate_synthetic(TINY_GEN)
    cfg = TrainConfig(max_epochs=1, patience=1, batch_size=8, seed=3,
                      eventful_only=True)
    model, log = train(cfg, split, schema, TINY_MODEL)
    assert log.epochs  # ran on the filtered split without complaint


# ------------------------------------------------------------- checkpoints

def test_checkpoint_round_trip(tmp_path, tiny_run):
    schema, split, model, _ = tiny_run
    path = tmp_path / "model.ckpt"
    save_checkpoint(model.parameters(), path)
    state = load_checkpoint(path)

    fresh, _ = train(TrainConfig(max_epochs=1, patience=1, seed=9),
                     split, schema, TINY_MODEL)
    apply_checkpoint(fresh, state)
    base = predict_sentences(model, split.test)
    restored = predict_sentences(fresh, split.test)
    assert {k: [s.as_tuple() for s in v] for k, v in base.items()} == \
        {k: [s.as_tuple() for s in v] for k, v in restored.items()}


def test_checkpoint_mismatches_are_rejected(tmp_path, tiny_run):
    _, _, model, _ = tiny_run
    state = {k: t.data.copy() for k, t in model.parameters().items()}

    missing = dict(state)
    missing.pop("embed.word")
    with pytest.raises(ValueError, match="missing"):
        apply_checkpoint(model, missing)

    extra = dict(state)
    extra["bogus.param"] = np.zeros(3)
    with pytest.raises(ValueError, match="unexpected"):
        apply_checkpoint(model, extra)

    bad_shape = dict(state)
    bad_shape["embed.word"] = np.zeros((2, 2))
    with pytest.raises(ValueError, match="shape"):
        apply_checkpoint(model, bad_shape)


def test_train_rejects_empty_split():
    schema, split = generate_synthetic(TINY_GEN)
    empty = split.__class__([], split.dev, split.test)
    with pytest.raises(ValueError, match="empty"):
        train(TINY_TRAIN, empty, schema, TINY_MODEL)
