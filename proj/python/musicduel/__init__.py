"""Python access to the musicduel core.

Battle records are plain dicts in the public JSON layout. Functions that take
records accept dicts or JSON strings.
"""

from __future__ import annotations

import json
import time
from typing import Iterable, Mapping, Sequence, Union

from . import _core
from ._core import MusicDuelError, arena_score, effective_listen_seconds, pseudonymize, rtf

Record = Union[str, Mapping]

__all__ = [
    "MusicDuelError",
    "analyze_prompt",
    "arena_score",
    "effective_listen_seconds",
    "export_release",
    "fit_bradley_terry",
    "leaderboard",
    "load_records",
    "normalize_battle",
    "pseudonymize",
    "rtf",
    "validate_battle",
    "verify_release",
]


def _text(record: Record) -> str:
    return record if isinstance(record, str) else json.dumps(record)


def normalize_battle(record: Record) -> dict:
    """Parses and re-serializes a record; raises MusicDuelError if malformed."""
    return json.loads(_core.normalize_battle(_text(record)))


def validate_battle(record: Record, vote_gate_seconds: float = 4.0) -> list[tuple[str, str]]:
    """(field, message) pairs for every violated invariant; empty when valid."""
    return _core.validate_battle(_text(record), vote_gate_seconds)


def analyze_prompt(text: str, rules_path: str = "") -> dict:
    """Runs the rule-based prompt gate (built-in rules unless a file is given)."""
    return json.loads(_core.analyze_prompt(text, rules_path))


def fit_bradley_terry(records: Iterable[Record]) -> dict[str, float]:
    """Strength per "system:variant" key; ties count as half wins."""
    return _core.fit_bradley_terry([_text(r) for r in records])


def leaderboard(
    records: Iterable[Record],
    registry: Sequence[Mapping] | None = None,
    resamples: int = 1000,
    seed: int = 1,
    sort_key: str = "arena_score",
) -> list[dict]:
    reg = json.dumps(list(registry)) if registry else ""
    return json.loads(_core.leaderboard([_text(r) for r in records], reg, resamples, seed, sort_key))


def load_records(store_dir: str) -> list[dict]:
    """All finalized records of a store, in append order."""
    return [json.loads(t) for t in _core.store_records(store_dir)]


def export_release(period: str, store_dir: str, out_root: str, now: float | None = None, shard_size: int = 1000) -> dict:
    """Writes <out_root>/<period>/ and returns its manifest."""
    return json.loads(_core.export_release(period, store_dir, out_root, time.time() if now is None else now, shard_size))


def verify_release(release_dir: str) -> dict:
    ok, problems, checked = _core.verify_release(release_dir)
    return {"ok": ok, "problems": problems, "records_checked": checked}
