import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slucil.data import (BOS, EOS, FILL, SEP, SPECIALS, UNK_ID, CorpusSpec, Entity, Utterance,
                         build_vocabulary, decode_augmented, encode_augmented, generate_corpus,
                         load_corpus, save_corpus, word_frames)
from slucil.errors import ConfigError, IntegrityError

WORD = st.text(alphabet="abcdefghij", min_size=1, max_size=6)


def test_generation_is_deterministic(small_corpus):
    again = generate_corpus(CorpusSpec.default(total_samples=600, seed=3))
    assert [u.transcript for u in again.utterances] == [u.transcript for u in small_corpus.utterances]
    for a, b in zip(again.utterances, small_corpus.utterances):
        np.testing.assert_array_equal(a.features, b.features)
    other = generate_corpus(CorpusSpec.default(total_samples=600, seed=4))
    assert [u.transcript for u in other.utterances] != [u.transcript for u in small_corpus.utterances]


def test_default_corpus_shape():
    spec = CorpusSpec.default()
    assert len(spec.scenarios) == 18
    counts = spec.sample_counts()
    assert min(counts.values()) >= 10
    # frequencies are imbalanced like the real corpus
    assert max(counts.values()) > 3 * min(counts.values())


@pytest.mark.parametrize("total", [400, 600, 1000, 6000])
def test_split_is_stratified_and_exact(total):
    c = generate_corpus(CorpusSpec.default(total_samples=total))
    n = len(c)
    sizes = {k: len(v) for k, v in c.splits.items()}
    assert sizes["train"] == round(0.7 * n)
    assert sizes["valid"] == round(0.1 * n)
    assert sum(sizes.values()) == n
    all_ids = sorted(i for v in c.splits.values() for i in v)
    assert all_ids == sorted(u.id for u in c.utterances)
    for split in c.splits:
        assert all(len(v) >= 1 for v in c.ids_by_scenario(split).values())


def test_features_fit_the_frame_budget(small_corpus):
    spec = small_corpus.spec
    for u in small_corpus.utterances:
        assert u.features.shape[1] == spec.feat_dim
        assert 1 <= len(u.features) <= spec.max_frames


@settings(max_examples=40, deadline=None)
@given(st.lists(WORD, min_size=1, max_size=6), st.integers(0, 50))
def test_word_frames_are_prefix_consistent(words, seed):
    full = word_frames(words, seed, 4)
    head = word_frames(words[:-1], seed, 4)
    np.testing.assert_array_equal(full[:len(head)], head)
    assert len(words) <= len(full) <= 3 * len(words)


# -- codec -----------------------------------------------------------------------

def test_codec_roundtrip_on_corpus(small_corpus):
    for u in small_corpus.utterances:
        parsed = decode_augmented(encode_augmented(u).tokens)
        assert parsed.well_formed
        assert parsed.intent == u.intent
        assert parsed.entities == [(e.entity_type, e.value) for e in u.entities]
        assert parsed.transcript == u.transcript


@st.composite
def utterances(draw):
    transcript = draw(st.lists(WORD, min_size=1, max_size=8))
    ents = []
    for _ in range(draw(st.integers(0, 3))):
        i = draw(st.integers(0, len(transcript) - 1))
        j = draw(st.integers(i + 1, len(transcript)))
        ents.append(Entity(draw(st.sampled_from(["date", "place_name", "time"])),
                           tuple(transcript[i:j])))
    return Utterance(0, "calendar", "set", ents, transcript)


@settings(max_examples=100, deadline=None)
@given(utterances())
def test_codec_roundtrip_property(u):
    parsed = decode_augmented(encode_augmented(u).framed())
    assert (parsed.intent, parsed.transcript) == (u.intent, u.transcript)
    assert parsed.entities == [(e.entity_type, e.value) for e in u.entities]


def test_encode_layout():
    u = Utterance(1, "alarm", "set", [Entity("time", ("seven", "am"))],
                  ["wake", "me", "at", "seven", "am"])
    assert str(encode_augmented(u)) == "alarm_set _SEP time _FILL seven am _SEP wake me at seven am"


def test_encode_rejects_value_outside_transcript():
    u = Utterance(1, "alarm", "set", [Entity("time", ("noon",))], ["wake", "me"])
    with pytest.raises(IntegrityError):
        encode_augmented(u)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from([SEP, FILL, BOS, EOS, "x", "y", "alarm_set", "date"]), max_size=12))
def test_decode_never_raises(tokens):
    parsed = decode_augmented(tokens)
    assert isinstance(parsed.flags, set)


@pytest.mark.parametrize("text, flag", [
    ("alarm_set wake me", "missing-separator"),
    ("alarm_set _SEP wake me", "missing-separator"),
    ("_SEP _SEP wake", "empty-intent"),
    ("alarm set _SEP _SEP wake", "multi-token-intent"),
    ("alarm_set _SEP time _FILL _SEP wake", "malformed-entity"),
    ("alarm_set _SEP time seven _SEP wake", "malformed-entity"),
    ("alarm_set _SEP _SEP wake _SEP me", "extra-separator"),
])
def test_decode_flags(text, flag):
    assert flag in decode_augmented(text).flags


def test_decode_stops_at_eos_and_lowercases():
    p = decode_augmented("<bos> a_b _SEP t _FILL Big Ben _SEP see Big Ben <eos> junk")
    assert p.entities == [("t", ("big", "ben"))]
    assert p.transcript == ["see", "big", "ben"]


# -- vocabulary --------------------------------------------------------------------

def test_vocabulary_layout(small_corpus, small_vocab):
    assert small_vocab.tokens[:6] == list(SPECIALS)
    intents = {u.intent for u in small_corpus.utterances}
    assert set(small_vocab.tokens[6:6 + len(intents)]) == intents
    u = small_corpus.utterances[0]
    ids = small_vocab.encode_target(u)
    assert small_vocab.detokenize(ids, join=False) == encode_augmented(u).framed()


def test_unknown_words_are_counted(small_vocab):
    before = small_vocab.unk_count
    known = small_vocab.tokens[6]
    assert small_vocab.tokenize(f"zzzqqq {known}") == [UNK_ID, 6]
    assert small_vocab.unk_count == before + 1


def test_vocabulary_hash_is_stable(small_corpus):
    assert build_vocabulary(small_corpus).hash == build_vocabulary(small_corpus).hash


def test_corpus_persistence_roundtrip(tmp_path, small_corpus):
    save_corpus(small_corpus, tmp_path / "c")
    back = load_corpus(tmp_path / "c")
    assert back.splits == small_corpus.splits
    assert build_vocabulary(back).hash == build_vocabulary(small_corpus).hash
    for a, b in zip(back.utterances, small_corpus.utterances):
        assert (a.intent, a.transcript, a.entities) == (b.intent, b.transcript, b.entities)
        np.testing.assert_array_equal(a.features, b.features)


# -- spec validation ---------------------------------------------------------------

def _mini_spec(**over):
    raw = {"total_samples": 40, "scenarios": {
        "a": {"actions": {"go": ["go to {place}"]}, "entities": {"place": ["home", "the shop"]}},
        "b": {"actions": {"stop": ["stop now"]}}}}
    raw.update(over)
    return raw


def test_custom_spec_generates():
    c = generate_corpus(CorpusSpec.from_dict(_mini_spec()))
    assert len(c) == 40 and c.scenarios() == ["a", "b"]


def test_unknown_entity_slot_rejected():
    raw = _mini_spec()
    raw["scenarios"]["b"]["actions"]["stop"] = ["stop {thing}"]
    with pytest.raises(ConfigError):
        CorpusSpec.from_dict(raw)


def test_too_few_samples_rejected():
    with pytest.raises(ConfigError):
        CorpusSpec.from_dict(_mini_spec(total_samples=12))


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        CorpusSpec.from_dict(_mini_spec(colour="red"))
