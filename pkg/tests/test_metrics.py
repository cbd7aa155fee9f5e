import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slucil.data import Entity, Utterance, encode_augmented
from slucil.errors import UsageError
from slucil.metrics import (METRICS, TaskMatrix, aggregate, corpus_wer, edit_distance, f1_counts,
                            fill_row, intent_accuracy, make_record, slu_f1, wer)

from oracles import edit_distance_recursive

WORDS = st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=8)


@settings(max_examples=300, deadline=None)
@given(WORDS, WORDS)
def test_edit_distance_matches_recursive_oracle(h, r):
    assert edit_distance(h, r) == edit_distance_recursive(h, r)


@settings(max_examples=100, deadline=None)
@given(WORDS, WORDS, WORDS)
def test_edit_distance_is_a_metric(a, b, c):
    assert edit_distance(a, b) == edit_distance(b, a)
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)
    assert (edit_distance(a, b) == 0) == (a == b)


@pytest.mark.parametrize("hyp, ref, expected", [
    ("a b c", "a b c", 0.0),
    ("a x c", "a b c", 1 / 3),
    ("a b", "a b c d", 0.5),
    ("a b c d e f", "a b", 2.0),
    ("", "a b", 1.0),
])
def test_wer_examples(hyp, ref, expected):
    assert wer(hyp.split(), ref.split()) == pytest.approx(expected)


def test_wer_empty_reference():
    with pytest.raises(UsageError):
        wer(["a"], [])


def _utt(uid=0, scenario="alarm"):
    return Utterance(uid, scenario, "set", [Entity("time", ("seven",))], ["wake", "at", "seven"])


def test_record_for_perfect_prediction():
    u = _utt()
    r = make_record(u, encode_augmented(u).framed())
    assert r.intent_correct and r.errors == 0 and r.ref_len == 3
    assert slu_f1([r]) == 1.0


def test_record_for_broken_prediction():
    r = make_record(_utt(), "<bos> wake at eleven <eos>")
    assert not r.intent_correct
    # no separators, so the whole output is read as transcript
    assert r.errors == 1 and r.pred.transcript == ["wake", "at", "eleven"]
    assert slu_f1([r]) == 0.0


def test_full_sequence_wer_option():
    u = _utt()
    r = make_record(u, "<bos> alarm_set _SEP _SEP wake at seven <eos>", full_sequence_wer=True)
    # ref has 9 tokens; hypothesis drops "time _FILL seven"
    assert (r.errors, r.ref_len) == (3, 9)


def test_corpus_wer_pools_words():
    u1 = _utt(0)
    u2 = Utterance(1, "alarm", "set", [], ["stop"])
    r1 = make_record(u1, "alarm_set _SEP _SEP wake at eleven")
    r2 = make_record(u2, "alarm_set _SEP _SEP go")
    assert corpus_wer([r1, r2]) == pytest.approx(2 / 4)
    assert intent_accuracy([r1, r2]) == 1.0


def test_f1_multiset_counts():
    gold = [("a", ("x",)), ("b", ("y",))]
    pred = [("a", ("x",)), ("a", ("x",)), ("c", ("z",))]
    assert f1_counts(gold, pred) == (1, 3, 2)


def test_slu_f1_hand_value():
    u = Utterance(0, "alarm", "set", [Entity("a", ("x",)), Entity("b", ("y",))], ["x", "y"])
    r = make_record(u, "alarm_set _SEP a _FILL x a _FILL x c _FILL z _SEP x y")
    # precision 1/3, recall 1/2
    assert slu_f1([r]) == pytest.approx(2 * (1 / 3) * (1 / 2) / (1 / 3 + 1 / 2))


def test_slu_f1_vacuous():
    u = Utterance(0, "alarm", "set", [], ["stop"])
    assert slu_f1([make_record(u, "alarm_set _SEP _SEP stop")]) == 1.0


def test_metrics_on_empty_sets():
    for fn in (intent_accuracy, corpus_wer, slu_f1):
        with pytest.raises(UsageError):
            fn([])


# -- matrices -------------------------------------------------------------------------

def test_task_matrix_lower_triangle_only(tmp_path):
    m = TaskMatrix(3)
    m.set(1, 0, 0.5)
    with pytest.raises(UsageError):
        m.set(0, 1, 0.5)
    m.set(2, 2, 0.25)
    m.write_csv(tmp_path / "m.csv")
    back = TaskMatrix.read_csv(tmp_path / "m.csv")
    np.testing.assert_array_equal(np.isnan(back.grid), np.isnan(m.grid))
    assert back.grid[1, 0] == 0.5 and back.grid[2, 2] == 0.25
    assert TaskMatrix.from_list(m.to_list()).to_list() == m.to_list()


def test_fill_row_and_aggregate():
    scen_task = {"alarm": 0, "music": 1}
    good = lambda uid, s: make_record(_utt(uid, s), f"{s}_set _SEP time _FILL seven _SEP wake at seven")
    bad = lambda uid, s: make_record(_utt(uid, s), "x _SEP _SEP wake")
    mats = {k: TaskMatrix(2) for k in METRICS}
    fill_row(mats, 0, [good(0, "alarm"), bad(1, "alarm")], scen_task)
    fill_row(mats, 1, [good(0, "alarm"), good(1, "alarm"), bad(2, "music"), good(3, "music")], scen_task)
    assert mats["acc"].grid[0, 0] == 0.5
    assert mats["acc"].grid[1, 0] == 1.0
    assert mats["acc"].grid[1, 1] == 0.75
    agg = aggregate(mats)
    assert agg["avg_acc"] == pytest.approx((0.5 + 0.75) / 2)
    assert agg["last_acc"] == 0.75
    assert agg["final_wer"] == pytest.approx(2 / 12)
    assert agg["avg_wer"] == pytest.approx((2 / 6 + 2 / 12) / 2)


def test_aggregate_requires_complete_diagonal():
    mats = {k: TaskMatrix(2) for k in METRICS}
    mats["acc"].set(0, 0, 1.0)
    with pytest.raises(UsageError):
        aggregate(mats)


def test_malformed_decode_is_intent_wrong():
    u = _utt()
    r = make_record(u, "alarm_set _SEP time _FILL _SEP wake at seven")
    assert not r.pred.well_formed and r.pred.intent == u.intent
    assert not r.intent_correct
