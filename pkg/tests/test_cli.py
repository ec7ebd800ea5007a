import json

import pytest

from brieskorn_rfh import floer_algebra as fa
from brieskorn_rfh.cli import main


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def value(node):
    return node["value"] if isinstance(node, dict) and "value" in node else node


def test_cz_rotation(capsys):
    code, out, _ = run(capsys, "cz", "rot:1 T=6.2831853072")
    assert code == 0
    data = json.loads(out)
    assert value(data["mu_cz"]) == 2 and data["mu_cz"]["provenance"] == "computed"


def test_cz_hyperbolic_and_bad_spec(capsys):
    code, out, _ = run(capsys, "cz", "hyp T=5")
    assert code == 0 and value(json.loads(out)["mu_cz"]) == 0
    code, _, err = run(capsys, "cz", "rot:x T=??")
    assert code == 1 and err.startswith("error:")


def test_output_is_deterministic(capsys):
    first = run(capsys, "brieskorn", "2,2,2,5", "--lmax", "8")[1]
    second = run(capsys, "brieskorn", "2,2,2,5", "--lmax", "8")[1]
    assert first == second


@pytest.mark.parametrize("tup, expected", [("2,2,2,3", True), ("2,2,2,2", False), ("3,5,7,11", True)])
def test_sphere_flag(capsys, tup, expected):
    code, out, _ = run(capsys, "brieskorn", tup, "--lmax", "4")
    assert code == 0 and value(json.loads(out)["sphere"]) is expected


def test_brieskorn_errors(capsys):
    assert run(capsys, "brieskorn", "2")[0] == 1
    assert run(capsys, "brieskorn", "2,0,2")[0] == 1
    code, _, err = run(capsys, "brieskorn", "2,2,2", "--sphere")
    assert code == 2 and "DimensionTooLow" in err


def test_floer_file(capsys, tmp_path):
    path = tmp_path / "ex.json"
    path.write_text(json.dumps(fa.worked_example().to_dict()))
    code, out, _ = run(capsys, "floer", str(path), "--window", "0", "0.5")
    data = json.loads(out)
    assert code == 0
    assert value(data["fh"]["dim"]) == 2
    assert data["reduction"]["boundary"] == [{"source": "[a1]", "targets": ["[b0]"]}]
    assert value(data["window"]["dim"]) == 2


def test_floer_errors(capsys, tmp_path):
    assert run(capsys, "floer", str(tmp_path / "missing.json"))[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "generators": [{"name": "x", "action": 0, "degree": 1}, {"name": "y", "action": 1, "degree": 0}],
        "boundary": [{"source": "x", "target": "y"}],
    }))
    assert run(capsys, "floer", str(bad))[0] == 2
    (tmp_path / "junk.json").write_text("{")
    assert run(capsys, "floer", str(tmp_path / "junk.json"))[0] == 1


def test_rfh_csv_window(capsys):
    code, out, _ = run(capsys, "rfh", "2,2,2,13", "--degrees", "4:12", "--format", "csv")
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()]
    header, body = rows[0], rows[1:]
    table = {int(r[header.index("degree")]): r for r in body}
    for d in range(5, 12):
        assert table[d][header.index("kind")] == "exact"
        assert table[d][header.index("value")] == "2"
    assert table[4][header.index("kind")] != "exact"


def test_rfh_growth_and_distinguish(capsys):
    code, out, _ = run(capsys, "rfh", "4,4,4,4", "--degrees", "-3:4", "--growth", "id")
    data = json.loads(out)
    assert code == 0
    assert value(data["growth"]["+"]["gamma"]) == 1 and data["growth"]["-"]["exact"]
    code, out, _ = run(capsys, "rfh", "2,2,2,10", "--degrees", "0:2", "--distinguish", "2,2,2,14")
    witness = json.loads(out)["distinguish"]
    assert code == 0 and value(witness["degree"]) == 11
    assert value(witness["first"]["hi"]) <= 1 and value(witness["second"]["value"]) == 2


def test_morse(capsys, tmp_path):
    code, out, _ = run(capsys, "morse", "--n", "3", "--a", "2", "--starts", "3")
    data = json.loads(out)
    assert code == 0
    assert sorted(value(c["index"]) for c in data["critical_points"]) == [0, 1, 2, 3]
    code, out, _ = run(capsys, "morse", "--count", "c4+:c3+")
    data = json.loads(out)
    assert value(data["count"]) == 2 and value(data["s3_count"]) == 4
    assert data["source"] == ["z-+"] and data["target"] == ["z--"]
    assert run(capsys, "morse", "--n", "9")[0] == 1
    target = tmp_path / "crit.csv"
    assert run(capsys, "morse", "--format", "csv", "--out", str(target))[0] == 0
    assert target.read_text().startswith("label,value,index")


def test_table_format(capsys):
    code, out, _ = run(capsys, "cz", "rot:1 T=3", "--format", "table")
    assert code == 0 and "mu_cz" in out
