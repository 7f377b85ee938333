"""Tokenizer and vocabulary contracts."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eventpivot.corpus import EventSchema, EventType
from eventpivot.text import (CLS, MASK, PAD, SEP, SPECIALS, UNK, Vocabulary,
                             build_vocab, tokenize)


def test_tokenize_news_sentence():
    text = "A bomb went off near the city hall on Friday, injuring 6."
    assert tokenize(text) == ["a", "bomb", "went", "off", "near", "the",
                              "city", "hall", "on", "friday", ",",
                              "injuring", "6", "."]


def test_tokenize_empty():
    assert tokenize("") == []
    assert tokenize("   \n\t ") == []


def test_tokenize_case_folding_shares_id():
    vocab = build_vocab([tokenize("attack"), tokenize("Attack")])
    assert vocab.id_of("attack") == vocab.encode(tokenize("Attack"))[0]


def test_tokenize_splits_punctuation():
    assert tokenize("wait, really?!") == ["wait", ",", "really", "?", "!"]


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet=st.characters(codec="ascii"), max_size=40))
def test_tokenize_idempotent_on_own_output(text):
    once = tokenize(text)
    again = tokenize(" ".join(once))
    assert once == again


def test_specials_occupy_fixed_ids():
    assert (PAD, UNK, CLS, SEP, MASK) == (0, 1, 2, 3, 4)
    vocab = Vocabulary(["alpha"])
    for tok, i in SPECIALS.items():
        assert vocab.token_of(i) == tok
    assert vocab.id_of("alpha") == len(SPECIALS)


def test_encode_decode_roundtrip():
    vocab = Vocabulary(["the", "troops", "met"])
    toks = ["the", "troops", "met", "the", "troops"]
    assert vocab.decode(vocab.encode(toks)) == toks


def test_unknown_token_encodes_to_unk():
    vocab = Vocabulary(["known"])
    assert vocab.encode(["known", "unknown"]) == [vocab.id_of("known"), UNK]


def test_build_vocab_forces_label_words():
    schema = EventSchema([EventType("Injure", ["injure"])])
    vocab = build_vocab([["nothing", "here"]], schema=schema)
    assert vocab.id_of("injure") != UNK
    # label words come first, before corpus tokens
    assert vocab.id_of("injure") < vocab.id_of("nothing")


def test_build_vocab_min_count_threshold():
    sents = [["rare", "common"], ["common"], ["common"]]
    vocab = build_vocab(sents, min_count=2)
    assert vocab.encode(["rare"]) == [UNK]
    assert vocab.encode(["common"])[0] != UNK

    all_in = build_vocab(sents, min_count=1)
    assert all_in.encode(["rare"])[0] != UNK


def test_vocabulary_json_roundtrip(tmp_path):
    schema = EventSchema([EventType("Meet", ["meet"])])
    vocab = build_vocab([["envoys", "gathered", "."]], schema=schema)
    path = tmp_path / "vocab.json"
    vocab.save(path)
    loaded = Vocabulary.load(path)
    assert loaded.tokens == vocab.tokens
    assert loaded.encode(["envoys", "gathered"]) == vocab.encode(["envoys", "gathered"])


def test_vocabulary_json_validates_specials():
    vocab = Vocabulary(["word"])
    obj = json.loads(vocab.to_json())
    obj["specials"]["PAD"] = 9
    with pytest.raises(ValueError):
        Vocabulary.from_json(json.dumps(obj))


def test_duplicate_tokens_share_one_id():
    vocab = Vocabulary(["twice", "twice", "other"])
    assert vocab.encode(["twice", "other"]) == [5, 6]
    assert len(vocab) == 7


def test_special_name_collision_rejected():
    with pytest.raises(ValueError):
        Vocabulary(["fine", "PAD"])
