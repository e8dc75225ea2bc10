import json

import numpy as np
import pytest

import tierroute as tr

from conftest import make_record, make_set


def small_set():
    rec1 = make_record("v0", split="validation", embedding=[1.0, 2.0, 3.0, 4.0],
                       probs=[0.9, 0.8, 1.0], conf={"mobile": 0.9, "edge": 0.95, "cloud": 0.99},
                       correct={"mobile": True, "edge": True, "cloud": False}, label=1)
    rec2 = make_record("t0", split="test", embedding=[0.5, -1.25, 0.0, 7.5], label=0)
    return make_set([rec1, rec2])


def test_round_trip_small(tmp_path):
    ts = small_set()
    path = tmp_path / "traces.jsonl"
    tr.write_traces(ts, path)
    back = tr.read_traces(path)
    assert len(back) == 2
    assert back == ts


def test_round_trip_preserves_awkward_floats(tmp_path):
    emb = [0.1 + 0.2, 1e-17, -1234567890.123456789, 2**-52]
    ts = make_set([make_record("t0", embedding=emb)])
    path = tmp_path / "t.jsonl"
    tr.write_traces(ts, path)
    back = tr.read_traces(path)
    assert np.array_equal(back.records[0].embedding, np.asarray(emb))


def test_empty_set_writes_header_only(tmp_path):
    ts = make_set([])
    path = tmp_path / "empty.jsonl"
    tr.write_traces(ts, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    header = json.loads(lines[0])
    assert header["kind"] == "tierroute-traces" and header["D"] == 4
    assert len(tr.read_traces(path)) == 0


def test_write_is_byte_stable(tmp_path):
    ts = small_set()
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    tr.write_traces(ts, p1)
    tr.write_traces(ts, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_synthetic_thousand_round_trip(tmp_path):
    ts = tr.generate_synthetic(tr.benchmark_spec(7, validation=400, test=600))
    assert len(ts) == 1000
    path = tmp_path / "big.jsonl"
    tr.write_traces(ts, path)
    back = tr.read_traces(path)
    assert back == ts  # field-for-field, full float precision


def test_epoch_count_mismatch_rejected():
    bad = make_record("v0", split="validation", probs=[0.9, 0.8])
    with pytest.raises(tr.TraceError, match="epoch count mismatch"):
        make_set([bad])


def test_epoch_count_mismatch_read(tmp_path):
    ts = small_set()
    path = tmp_path / "t.jsonl"
    tr.write_traces(ts, path)
    lines = path.read_text().splitlines()
    rec = json.loads(lines[1])
    rec["epoch_true_probs"] = [0.9, 0.8]
    lines[1] = json.dumps(rec)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(tr.TraceError, match="line 2.*epoch count mismatch"):
        tr.read_traces(path)


def test_probability_out_of_range_rejected():
    bad = make_record("t0", conf={"mobile": 1.2, "edge": 0.5, "cloud": 0.5})
    with pytest.raises(tr.TraceError, match="probability out of range"):
        make_set([bad])
    bad = make_record("v0", split="validation", probs=[0.9, -0.1, 0.5])
    with pytest.raises(tr.TraceError, match="probability out of range"):
        make_set([bad])


def test_malformed_line_reports_line_number(tmp_path):
    ts = small_set()
    path = tmp_path / "t.jsonl"
    tr.write_traces(ts, path)
    text = path.read_text().splitlines()
    text.insert(2, "{not json")
    path.write_text("\n".join(text) + "\n")
    with pytest.raises(tr.TraceError, match="line 3.*malformed"):
        tr.read_traces(path)


def test_embedding_dimension_mismatch():
    bad = make_record("t0", embedding=[1.0, 2.0, 3.0])
    with pytest.raises(tr.TraceError, match="dimension mismatch"):
        make_set([bad])


def test_duplicate_ids_rejected():
    with pytest.raises(tr.TraceError, match="duplicate id"):
        make_set([make_record("x"), make_record("x")])


def test_unknown_split_rejected():
    with pytest.raises(tr.TraceError, match="unknown split"):
        make_set([make_record("t0", split="holdout")])


def test_validation_requires_epoch_probs():
    with pytest.raises(tr.TraceError, match="missing epoch_true_probs"):
        make_set([make_record("v0", split="validation", probs=None)])


def test_label_checks():
    with pytest.raises(tr.TraceError, match="label"):
        make_set([make_record("t0", label=2)], num_classes=2)
    with pytest.raises(tr.TraceError, match="label"):
        make_set([make_record("t0", label=True)])


def test_non_finite_embedding_rejected():
    with pytest.raises(tr.TraceError, match="non-finite"):
        make_set([make_record("t0", embedding=[1.0, float("nan"), 0.0, 0.0])])


def test_unknown_record_key_rejected(tmp_path):
    ts = small_set()
    path = tmp_path / "t.jsonl"
    tr.write_traces(ts, path)
    lines = path.read_text().splitlines()
    rec = json.loads(lines[1])
    rec["extra"] = 1
    lines[1] = json.dumps(rec)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(tr.TraceError, match="unknown record keys"):
        tr.read_traces(path)


def test_wrong_header_kind_rejected(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text(json.dumps({"kind": "other", "version": 1, "D": 4, "E": 3,
                                "num_classes": 2, "seed": None, "note": ""}) + "\n")
    with pytest.raises(tr.TraceError, match="not a trace file"):
        tr.read_traces(path)


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text("")
    with pytest.raises(tr.TraceError, match="empty file"):
        tr.read_traces(path)


def test_tier_conf_keys_must_be_complete():
    rec = make_record("t0")
    rec.tier_conf = {"mobile": 0.9, "edge": 0.9}
    with pytest.raises(tr.TraceError, match="tier_conf"):
        make_set([rec])
