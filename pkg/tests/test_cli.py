import json

import pytest

from heron_descent import cli

from .conftest import TABLE_PRIMES, report_for


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


@pytest.mark.parametrize("argv,code", [(["verify", "11"], 2), (["verify", "17"], 2), (["verify", "abc"], 64),
                                       (["scan", "700", "2"], 64), (["classno", "16"], 64),
                                       (["local", "409", "3", "1", "--place", "2"], 64),
                                       (["local", "409", "p", "1", "--place", "4"], 64),
                                       (["verify", "409", "--jobs", "0"], 64)])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_unknown_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 64


def test_rejection_reason(capsys):
    code, out = run(capsys, "verify", "41", "--format", "json")
    assert code == 2 and json.loads(out) == {"p": 41, "rejected": "q-not-prime"}


def test_scan(capsys):
    code, out = run(capsys, "scan", "2", "700", "--format", "json")
    assert code == 0
    assert [row["p"] for row in json.loads(out)] == list(TABLE_PRIMES)
    assert run(capsys, "scan", "2", "100")[1].strip() == ""


def test_local_and_classno(capsys):
    code, out = run(capsys, "local", "409", "p", "1", "--place", "p", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "solvable" and data["rules"]["evidence"]["kind"] == "construction"
    _, out = run(capsys, "local", "409", "q", "1", "--place", "q", "--format", "json")
    assert json.loads(out)["verdict"] == "unsolvable"
    _, out = run(capsys, "local", "409", "p", "1", "--place", "q", "--format", "json")
    assert json.loads(out)["rules"] == "not-covered"
    _, out = run(capsys, "classno", "10", "--format", "json")
    assert json.loads(out)["h"] == 2


@pytest.mark.slow
def test_selmer_command(capsys):
    code, out = run(capsys, "selmer", "409", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["selmer_rank"] == 2 and len(data["selmer_members"]) == 16


@pytest.mark.slow
def test_verify_json_round_trip_and_cache(capsys, tmp_path):
    cache = str(tmp_path / "reports.jsonl")
    code, first = run(capsys, "verify", "409", "--format", "json", "--cache", cache)
    assert code == 0
    data = json.loads(first)
    assert (data["rank"], data["selmer_rank"], data["sha2_dim"]) == (0, 2, 2)
    code, second = run(capsys, "verify", "409", "--format", "json", "--cache", cache)
    assert code == 0 and second == first
    assert len((tmp_path / "reports.jsonl").read_text().splitlines()) == 1


@pytest.mark.slow
def test_cache_ignores_other_bounds(capsys, tmp_path):
    cache = tmp_path / "c.jsonl"
    run(capsys, "verify", "409", "--cache", str(cache), "--curve-bound", "50", "--space-bound", "50")
    run(capsys, "verify", "409", "--cache", str(cache), "--curve-bound", "60", "--space-bound", "50")
    assert len(cache.read_text().splitlines()) == 2


@pytest.mark.slow
def test_corrupt_cache_line_is_skipped(capsys, tmp_path):
    cache = tmp_path / "c.jsonl"
    cache.write_text("not json\n")
    code, _ = run(capsys, "verify", "409", "--cache", str(cache), "--curve-bound", "50", "--space-bound", "50")
    assert code == 0


@pytest.mark.slow
def test_table(capsys, tmp_path):
    cache = str(tmp_path / "t.jsonl")
    # three rows come from the cache, two are computed in worker processes
    for p in TABLE_PRIMES[:3]:
        cli.ReportCache(cache).put(report_for(p), (1000, 10**4, 100))
    code, out = run(capsys, "table", "700", "--cache", cache, "--jobs", "2")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 2 + len(TABLE_PRIMES)
    assert lines[0] == "| p | Rank of E_p | 2-Selmer rank of E_p | Sha(E_p/Q)[2] |"
    for p, line in zip(TABLE_PRIMES, lines[2:]):
        assert line == f"| {p} | 0 | 2 | (Z/2Z)^2 |"
    code, out = run(capsys, "table", "700", "--cache", cache, "--format", "json")
    assert [(r["p"], r["rank"], r["selmer_rank"], r["sha2_dim"]) for r in json.loads(out)] == \
        [(p, 0, 2, 2) for p in TABLE_PRIMES]
    code, out = run(capsys, "table", "2")
    assert code == 0 and len(out.strip().splitlines()) == 2
