"""Flat key=value configuration: parsing, precedence, and mapping."""

import pytest

from eventpivot.config import (ENV_CONFIG, KEYS, Config, ConfigError,
                               default_config_text, load_config,
                               parse_config_text, resolve_config)


# ----------------------------------------------------------------- parsing

def test_parse_lines_comments_and_blanks():
    text = """
    # a comment line
    corpus.n_types = 3   # trailing comment
    train.lr=0.001

    lsl.mode = soft
    """
    raw = parse_config_text(text)
    assert raw == {"corpus.n_types": "3", "train.lr": "0.001",
                   "lsl.mode": "soft"}


def test_parse_reports_every_problem_with_source_and_line():
    text = "garbage line\ncorpus.seed = 1\ncorpus.seed = 2\nanother bad"
    with pytest.raises(ConfigError) as exc:
        parse_config_text(text, source="exp.cfg")
    msg = str(exc.value)
    assert "exp.cfg:1" in msg and "garbage" in msg
    assert "exp.cfg:3" in msg and "duplicate" in msg
    assert "exp.cfg:4" in msg


def test_resolve_collects_unknown_keys_and_bad_values():
    with pytest.raises(ConfigError) as exc:
        resolve_config({"corpus.n_types": "many", "nope.key": "1"},
                       {"train.lr": "fast"})
    msg = str(exc.value)
    assert "unknown config file key: nope.key" in msg
    assert "bad value for corpus.n_types" in msg
    assert "bad value for train.lr" in msg


def test_bool_words_and_rejection():
    for word, want in (("true", True), ("YES", True), ("1", True),
                       ("false", False), ("No", False), ("0", False)):
        cfg = resolve_config({"train.no_labels": word})
        assert cfg["train.no_labels"] is want
    with pytest.raises(ConfigError, match="boolean"):
        resolve_config({"train.no_labels": "maybe"})


def test_choice_keys_are_validated():
    assert resolve_config({"lsl.mode": "bypass"})["lsl.mode"] == "bypass"
    with pytest.raises(ConfigError, match="one of"):
        resolve_config({"lsl.mode": "telepathy"})


# -------------------------------------------------------------- precedence

def test_defaults_then_file_then_override():
    assert resolve_config()["train.batch_size"] == KEYS["train.batch_size"].default
    cfg = resolve_config({"train.batch_size": "16"})
    assert cfg["train.batch_size"] == 16
    cfg = resolve_config({"train.batch_size": "16"}, {"train.batch_size": "32"})
    assert cfg["train.batch_size"] == 32


def test_load_config_reads_env_var(tmp_path, monkeypatch):
    path = tmp_path / "exp.cfg"
    path.write_text("corpus.seed = 99\n", encoding="utf-8")
    monkeypatch.setenv(ENV_CONFIG, str(path))
    assert load_config()["corpus.seed"] == 99
    monkeypatch.delenv(ENV_CONFIG)
    assert load_config()["corpus.seed"] == KEYS["corpus.seed"].default


def test_explicit_path_beats_env(tmp_path, monkeypatch):
    a = tmp_path / "a.cfg"
    a.write_text("corpus.seed = 1\n", encoding="utf-8")
    b = tmp_path / "b.cfg"
    b.write_text("corpus.seed = 2\n", encoding="utf-8")
    monkeypatch.setenv(ENV_CONFIG, str(a))
    assert load_config(b)["corpus.seed"] == 2


# ----------------------------------------------------------------- mapping

def test_gen_config_mapping_and_zero_lexicon_means_all():
    cfg = resolve_config({"corpus.n_types": "3",
                          "corpus.trigger_lexicon_size": "0"})
    gc = cfg.gen_config()
    assert gc.n_types == 3
    assert gc.trigger_lexicon_size is None
    gc = resolve_config({"corpus.trigger_lexicon_size": "12"}).gen_config()
    assert gc.trigger_lexicon_size == 12


def test_model_config_mapping():
    cfg = resolve_config({"lsl.copy_bias": "4.5", "train.dropout_keep": "0.8",
                          "lsl.mode": "soft", "train.no_labels": "true"})
    mc = cfg.model_config()
    assert mc.copy_bias == pytest.approx(4.5)
    assert mc.drop_rate == pytest.approx(0.2)
    assert mc.lsl_mode == "soft"
    assert mc.use_labels is False


def test_train_config_mapping_bypass_from_mode():
    cfg = resolve_config({"lsl.mode": "bypass", "train.small_tc": "true"})
    tc = cfg.train_config()
    assert tc.bypass_lsl is True
    assert tc.small_tc is True
    assert tc.tau == cfg["lsl.tau"]


def test_default_config_text_round_trips():
    text = default_config_text()
    raw = parse_config_text(text)
    cfg = resolve_config(raw)
    assert cfg.as_dict() == resolve_config().as_dict()
    # every known key is present in the emitted text
    assert set(raw) == set(KEYS)


def test_as_dict_is_sorted_and_complete():
    cfg = resolve_config()
    keys = list(cfg.as_dict())
    assert keys == sorted(keys)
    assert set(keys) == set(KEYS)
