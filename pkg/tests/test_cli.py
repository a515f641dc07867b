import csv
import json

import pytest

from lielat.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_index_examples(capsys):
    assert run(capsys, "index", "--family", "sl", "--l", "1", "--p", "3", "--k", "1",
               "--m", "1", "--level", "group")[:2] == (0, "72\n")
    assert run(capsys, "index", "--family", "sp", "--l", "1", "--p", "3", "--k", "1",
               "--level", "congruence")[:2] == (0, "9\n")
    code, out, _ = run(capsys, "index", "--family", "sl", "--l", "2", "--p", "3", "--level", "group")
    assert code == 3 and "8 > 3" in out


def test_index_bound_and_json(capsys):
    code, out, _ = run(capsys, "index", "--family", "so_odd", "--l", "2", "--p", "11",
                       "--level", "bound", "--of", "congruence", "--format", "json")
    (rec,) = json.loads(out)
    assert code == 0 and rec["value"] == str(11 ** 3) and rec["level"] == "bound_congruence"


def test_bad_flags_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["index", "--family", "gl", "--l", "1", "--p", "3"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["order", "--group", "O"])
    assert exc.value.code == 1
    assert run(capsys, "index", "--family", "sl", "--l", "1", "--p", "4")[0] == 1
    assert main([]) == 1


def test_order_and_verify(capsys):
    assert run(capsys, "order", "--group", "SO", "--n", "3", "--p", "3")[:2] == (0, "24\n")
    code, out, _ = run(capsys, "verify", "order", "--group", "O", "--n", "3", "--p", "3",
                       "--m", "1", "--methods", "formula,orbit,brute")
    assert code == 0 and out.count(": 48") == 3 and "agree" in out
    code, out, _ = run(capsys, "order", "--group", "SO", "--n", "3",
                       "--ring", "GR(3,1,2):1,0,1", "--method", "brute")
    assert code == 0 and out == "720\n"


def test_verify_budget_exhaustion(capsys):
    code, _, err = run(capsys, "verify", "order", "--group", "O", "--n", "4", "--p", "3",
                       "--m", "2", "--methods", "brute", "--budget", "1000")
    assert code == 1 and "budget" in err


def test_verify_order_mismatch_is_exit_two(capsys, monkeypatch):
    from lielat import counting
    real = counting.formula_order

    def wrong(*a, **k):
        res = real(*a, **k)
        res.value += 1
        return res

    monkeypatch.setattr(counting, "formula_order", wrong)
    code, out, _ = run(capsys, "verify", "order", "--group", "O", "--n", "3", "--p", "3")
    assert code == 2 and "MISMATCH" in out


def test_verify_escape_and_structure(capsys):
    code, out, _ = run(capsys, "verify", "escape", "--family", "sl", "--n", "3", "--p", "3",
                       "--m", "1", "--k", "1")
    assert code == 0 and "all cosets escape" in out
    code, out, _ = run(capsys, "verify", "structure", "--family", "so_odd", "--n", "5", "--p", "5")
    assert code == 0 and "FAIL" not in out


def test_lattice_dump(capsys, tmp_path):
    code, out, _ = run(capsys, "lattice", "--family", "sl", "--n", "3", "--k", "1")
    assert code == 0 and "e13: " in out and "w=-1" in out
    path = tmp_path / "sl3.json"
    assert run(capsys, "lattice", "--family", "sl", "--n", "3", "--out", str(path))[0] == 0
    (data,) = json.loads(path.read_text())
    assert data["rank"] == 2 and len(data["basis"]) == 8


def test_tables(capsys, tmp_path):
    d = tmp_path / "d.csv"
    assert run(capsys, "tables", "thmD", "--p", "3", "--n-max", "4", "--m-max", "2",
               "--out", str(d))[0] == 0
    rows = list(csv.DictReader(d.open()))
    assert len(rows) == 16 and all(r["agree"] == "True" for r in rows)
    a = tmp_path / "a.json"
    assert run(capsys, "tables", "thmA", "--p", "7", "--l-max", "2", "--out", str(a))[0] == 0
    recs = json.loads(a.read_text())
    assert isinstance(recs, list) and {r["level"] for r in recs} == \
        {"full_group", "congruence_group", "lattice"}
    c = tmp_path / "cn.csv"
    assert run(capsys, "tables", "cn", "--q", "3,5", "--n-max", "6", "--out", str(c))[0] == 0
    rows = list(csv.DictReader(c.open()))
    assert len(rows) == 12 and {"c_recursive", "c_closed"} <= set(rows[0])


@pytest.mark.parametrize("argv", [
    ["index", "--family", "sp", "--l", "2", "--p", "11", "--k", "2"],
    ["order", "--group", "O", "--n", "3", "--p", "5", "--m", "2", "--method", "brute"],
    ["order", "--group", "SL", "--n", "2", "--ring", "Eis(3,2):3,0,1"],
    ["verify", "order", "--group", "SO", "--n", "2", "--p", "5", "--m", "2"],
    ["verify", "escape", "--family", "sp", "--n", "2", "--p", "3", "--m", "0"],
    ["verify", "structure", "--family", "sp", "--n", "4", "--p", "5"],
    ["lattice", "--family", "so_odd", "--n", "3"],
    ["tables", "thmD", "--p", "3", "--n-max", "3", "--m-max", "1"],
    ["tables", "thmA", "--p", "7", "--l-max", "1"],
    ["tables", "cn", "--q", "9", "--n-max", "4"],
])
def test_json_replay_round_trip(capsys, tmp_path, argv):
    path = tmp_path / "out.json"
    assert main(argv + ["--out", str(path)]) == 0
    capsys.readouterr()
    code, out, _ = run(capsys, "--replay", str(path))
    assert code == 0 and out.strip().endswith("0 mismatches")


def test_replay_detects_tampering(capsys, tmp_path):
    path = tmp_path / "o.json"
    main(["order", "--group", "O", "--n", "3", "--p", "3", "--out", str(path)])
    recs = json.loads(path.read_text())
    recs[0]["value"] = "47"
    path.write_text(json.dumps(recs))
    capsys.readouterr()
    code, out, _ = run(capsys, "--replay", str(path))
    assert code == 2 and "mismatch" in out
    code, _, err = run(capsys, "--replay", str(tmp_path / "missing.json"))
    assert code == 1
