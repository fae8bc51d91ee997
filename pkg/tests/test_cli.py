import csv
import io
import json

import pytest

from polarce import bsc_density, polarize
from polarce import cli
from polarce.cli import CacheError, ReliabilityTable, load_cache, main, sweep_grid


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_construct_gamma(capsys):
    code, out, err = run(capsys, "construct", "--channel", "bsc:0.1", "--level", "3", "--gamma", "0.1")
    assert code == 0
    rows = read_csv(out)
    assert [int(r["index"]) for r in rows] == list(range(1, 9))
    d = bsc_density(0.1)
    for r in rows:
        z = polarize(d, r["pattern"])
        assert float(r["z"]) == z
        assert r["selected"] == str(int(z < 0.1))
    assert "selected" in err
    assert "\r" not in out


def test_construct_rate_bec(capsys):
    code, out, _ = run(capsys, "construct", "--channel", "bec:0.5", "--level", "2", "--rate", "0.25")
    assert code == 0
    rows = read_csv(out)
    assert [int(r["index"]) for r in rows if r["selected"] == "1"] == [4]
    assert float(rows[3]["z"]) == 0.0625


def test_construct_rate_count(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, out, _ = run(capsys, "construct", "--channel", "bsc:0.11", "--level", "4", "--rate", "0.3", "--out", str(path))
    assert code == 0
    assert "selected 4 of 16" in out
    assert sum(r["selected"] == "1" for r in read_csv(path.read_text())) == 4


def test_construct_bad_channel(capsys):
    code, _, err = run(capsys, "construct", "--channel", "bsc:0.7", "--level", "3", "--gamma", "0.1")
    assert code == 1
    assert "crossover" in err


def test_usage_errors_exit_one(capsys):
    assert run(capsys, "construct", "--channel", "bsc:0.1", "--level", "3")[0] == 1
    assert run(capsys, "construct", "--channel", "bsc:0.1", "--level", "0", "--gamma", "0.1")[0] == 1
    assert run(capsys, "nonsense")[0] == 1
    assert run(capsys, "construct", "--channel", "bsc:0.1", "--level", "99", "--gamma", "0.1")[0] == 1


def test_construct_overflow_exit_two(capsys):
    code, _, err = run(
        capsys, "construct", "--channel", "bsc:0.1", "--level", "4", "--gamma", "0.1", "--atom-cap", "2"
    )
    assert code == 2
    assert "index" in err


def test_construct_rational_backend(capsys):
    code, out, _ = run(capsys, "construct", "--channel", "bsc:0.1", "--level", "2", "--gamma", "0.5", "--backend", "rational")
    assert code == 0
    assert float(read_csv(out)[3]["z"]) == pytest.approx(0.1296, abs=1e-15)


def test_csv_full_precision_round_trip(capsys):
    _, out, _ = run(capsys, "construct", "--channel", "bsc:0.123456789", "--level", "3", "--gamma", "0.5")
    d = bsc_density(0.123456789)
    for r in read_csv(out):
        assert float(r["z"]) == polarize(d, r["pattern"])


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--level", "3", "--channel", "bsc:0.1", "--channel", "bec:0.3")
    assert code == 0
    report = json.loads(out)
    assert report["ok"] is True
    assert report["failures"] == 0
    kinds = {c["check"] for c in report["checks"]}
    assert kinds == {"closed_form", "recursion", "brute_force"}


def test_verify_failure_exit_three(capsys, monkeypatch):
    monkeypatch.setattr(cli, "RECURSION_TOL", -1.0)
    code, out, err = run(capsys, "verify", "--level", "2", "--channel", "bsc:0.1", "--brute-level", "0")
    assert code == 3
    report = json.loads(out)
    assert report["ok"] is False
    assert report["first_failure"]["index"] == 1
    assert "verification failed" in err


def test_sweep_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "bsc", "--level", "3", "--points", "20")
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 160
    first = [float(r["z"]) for r in rows[:8]]
    last = [float(r["z"]) for r in rows[-8:]]
    assert max(first) < max(last)


def test_sweep_grid_limits():
    assert all(0 < p < 0.5 for p in sweep_grid("bsc", 50))
    assert all(0 < e < 1 for e in sweep_grid("bec", 50))
    d_low, d_high = bsc_density(1e-6), bsc_density(0.5 - 1e-9)
    for pat in ("000", "011", "111"):
        assert polarize(d_low, pat) < 1e-2
        assert polarize(d_high, pat) > 1 - 1e-6


def test_sweep_bec_explicit_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "bec", "--level", "2", "--grid", "0.5")
    assert code == 0
    assert [float(r["z"]) for r in read_csv(out)] == [0.9375, 0.5625, 0.4375, 0.0625]


def test_cache_round_trip_and_byte_stable(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "cache", "--channel", "bsc:0.2", "--level", "3", "--out", str(a))[0] == 0
    assert run(capsys, "cache", "--channel", "bsc:0.2", "--level", "3", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    table = load_cache(a)
    assert table.level == 3
    assert table.z == [polarize(bsc_density(0.2), pat) for _, pat, _ in table.rows]
    assert ReliabilityTable.from_json(table.to_json()).rows == table.rows
    code, out, _ = run(capsys, "load", str(a))
    assert code == 0
    assert len(read_csv(out)) == 8


def test_cache_rejects_corrupt_and_version(capsys, tmp_path):
    good = tmp_path / "good.json"
    run(capsys, "cache", "--channel", "bec:0.3", "--level", "2", "--out", str(good))
    doc = json.loads(good.read_text())

    bumped = dict(doc, schema_version=2)
    with pytest.raises(CacheError, match="schema_version"):
        ReliabilityTable.from_json(json.dumps(bumped))

    swapped = dict(doc, rows=[doc["rows"][1], doc["rows"][0], *doc["rows"][2:]])
    with pytest.raises(CacheError):
        ReliabilityTable.from_json(json.dumps(swapped))

    short = dict(doc, rows=doc["rows"][:3])
    with pytest.raises(CacheError):
        ReliabilityTable.from_json(json.dumps(short))

    bad = tmp_path / "bad.json"
    bad.write_text(good.read_text()[:-20])
    code, _, err = run(capsys, "load", str(bad))
    assert code == 1
    assert "JSON" in err
