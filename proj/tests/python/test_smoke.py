import copy
import json
import math
import pathlib

import pytest

import musicduel

FIXTURE = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "example_battle.json"


@pytest.fixture()
def example():
    return json.loads(FIXTURE.read_text())


def test_example_record_round_trips(example):
    assert musicduel.normalize_battle(example) == example
    assert musicduel.validate_battle(example) == []


def test_listening_time_matches_hand_arithmetic(example):
    vote = example["vote"]
    seconds = musicduel.effective_listen_seconds([tuple(e) for e in vote["a_listen_data"]], vote["preference_time"])
    assert seconds == pytest.approx(48.56318378448486, abs=1e-6)


def test_validation_names_the_field(example):
    bad = copy.deepcopy(example)
    bad["b_metadata"]["system_key"] = bad["a_metadata"]["system_key"]
    fields = [f for f, _ in musicduel.validate_battle(bad)]
    assert "a_metadata.system_key/b_metadata.system_key" in fields


def test_malformed_record_raises():
    with pytest.raises(musicduel.MusicDuelError):
        musicduel.normalize_battle("{}")


def test_pseudonymize_is_salted_sha256_prefix():
    import hashlib

    salt = "python-smoke-salt-0123"
    assert musicduel.pseudonymize("203.0.113.9", salt) == hashlib.sha256((salt + "203.0.113.9").encode()).hexdigest()[:32]


def test_prompt_gate():
    accepted = musicduel.analyze_prompt("a 30 second ambient piece, no vocals")
    assert accepted["accepted"] is True
    assert accepted["detailed"]["duration"] == 30
    assert accepted["detailed"]["instrumental"] is True
    rejected = musicduel.analyze_prompt("play me Bohemian Rhapsody by Queen")
    assert rejected["accepted"] is False
    assert rejected["category"] == "COPYRIGHT"


def _battle(example, winner, loser, i):
    record = copy.deepcopy(example)
    record["uuid"] = f"battle-{i}"
    record["a_metadata"]["system_key"] = {"system_tag": winner, "variant_tag": "initial"}
    record["b_metadata"]["system_key"] = {"system_tag": loser, "variant_tag": "initial"}
    record["vote"]["preference"] = "A"
    return record


def test_bradley_terry_and_scores(example):
    assert musicduel.rtf(30, 3) == 10.0
    assert musicduel.arena_score(0.0) == 1000.0
    assert musicduel.arena_score(math.log(10)) == pytest.approx(1400.0)
    records = [_battle(example, "p", "q", i) for i in range(8)] + [_battle(example, "q", "p", 8 + i) for i in range(2)]
    fit = musicduel.fit_bradley_terry(records)
    assert fit["p:initial"] - fit["q:initial"] == pytest.approx(math.log(4), abs=1e-6)
    rows = musicduel.leaderboard(records, resamples=100)
    assert [r["system"] for r in rows][:1] == ["p:initial"]
    for row in rows:
        assert row["ci_low"] <= row["arena_score"] <= row["ci_high"]


def test_export_round_trip(tmp_path, example):
    assert musicduel.load_records(str(tmp_path / "empty-store")) == []
    with pytest.raises(musicduel.MusicDuelError, match="period_open"):
        musicduel.export_release("2099-01", str(tmp_path / "empty-store"), str(tmp_path / "release"))
    manifest = musicduel.export_release("2025-07", str(tmp_path / "empty-store"), str(tmp_path / "release"))
    assert manifest["record_count"] == 0
    assert musicduel.verify_release(str(tmp_path / "release" / "2025-07"))["ok"]
