from __future__ import annotations

import enum
import json
import math

import pytest

from soliton.runner import (
    INF_SENTINEL,
    RunResult,
    atomic_path,
    format_value,
    jsonable,
    parallel_map,
    read_csv,
    write_csv,
    write_json,
)


class Color(enum.Enum):
    red = "RED"


@pytest.mark.parametrize(
    "value, expected",
    [
        (0.1, "0.10000000000000001"),
        (2.0, "2"),
        (math.inf, INF_SENTINEL),
        (-math.inf, "-INF"),
        (True, "true"),
        (3, "3"),
        (Color.red, "RED"),
        ("s2xs2", "s2xs2"),
    ],
)
def test_format_value(value, expected: str) -> None:
    assert format_value(value) == expected


def test_atomic_path_replaces_on_success(tmp_path) -> None:
    target = tmp_path / "deep" / "out.txt"
    with atomic_path(target) as tmp:
        assert tmp.parent == target.parent
        tmp.write_text("done")
        assert not target.exists()
    assert target.read_text() == "done"
    assert [p.name for p in target.parent.iterdir()] == ["out.txt"]


def test_atomic_path_leaves_nothing_on_failure(tmp_path) -> None:
    target = tmp_path / "out.txt"
    target.write_text("old")
    with pytest.raises(RuntimeError):
        with atomic_path(target) as tmp:
            tmp.write_text("partial")
            raise RuntimeError("boom")
    assert target.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_csv_is_byte_stable(tmp_path) -> None:
    rows = [(0.5, 1, "CONICAL"), (math.inf, 2, "EINSTEIN")]
    first = write_csv(tmp_path / "a.csv", ["x", "n", "class"], rows).read_bytes()
    second = write_csv(tmp_path / "b.csv", ["x", "n", "class"], iter(rows)).read_bytes()
    assert first == second
    assert first == b"x,n,class\n0.5,1,CONICAL\nINF,2,EINSTEIN\n"
    assert read_csv(tmp_path / "a.csv")[1] == {"x": "INF", "n": "2", "class": "EINSTEIN"}


def test_write_json(tmp_path) -> None:
    path = write_json(tmp_path / "r.json", {"b": 1, "a": [0.25]})
    text = path.read_text()
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [0.25], "b": 1}


def test_write_json_uses_the_inf_sentinel(tmp_path) -> None:
    payload = {"T": math.inf, "low": -math.inf, "gap": math.nan, "xs": (1.5, math.inf)}
    text = write_json(tmp_path / "p.json", payload).read_text()
    assert "Infinity" not in text
    assert "NaN" not in text
    assert json.loads(text) == {
        "T": INF_SENTINEL,
        "low": "-INF",
        "gap": None,
        "xs": [1.5, INF_SENTINEL],
    }


def test_jsonable_leaves_finite_values() -> None:
    class Case(str, enum.Enum):
        cp2 = "cp2"

    assert jsonable({"case": Case.cp2, "n": 2, "v": [0.5, "x"], "ok": True}) == {
        "case": "cp2",
        "n": 2,
        "v": [0.5, "x"],
        "ok": True,
    }


@pytest.mark.parametrize("threads", [1, 2])
def test_parallel_map_keeps_order(threads: int) -> None:
    items = [9.0, 4.0, 1.0, 16.0, 0.0]
    assert parallel_map(math.sqrt, items, threads=threads) == [3.0, 2.0, 1.0, 4.0, 0.0]
    assert parallel_map(math.sqrt, [], threads=threads) == []


def test_run_result_defaults() -> None:
    result = RunResult(command=["kahler", "count"], summary={"count": 2})
    assert result.to_primitive() == {
        "command": ["kahler", "count"],
        "outputs": [],
        "summary": {"count": 2},
        "failed_cells": 0,
        "exit_code": 0,
    }


def test_run_result_summary_is_strict_json() -> None:
    result = RunResult(command=["shoot", "sol"], summary={"sol": math.inf, "T": math.nan})
    text = json.dumps(result.to_primitive(), sort_keys=True, allow_nan=False)
    assert json.loads(text)["summary"] == {"T": None, "sol": INF_SENTINEL}
