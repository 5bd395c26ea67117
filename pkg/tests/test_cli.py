import json
import re

import pytest

from sosgibbs.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_k2_tau8(tmp_path, capsys):
    path = tmp_path / "laws.json"
    code, out, _ = run(capsys, "solve", "--k", "2", "--tau", "8", "--out", str(path))
    assert code == 0
    data = json.loads(path.read_text())
    assert len(data["laws"]) == 7
    assert sorted(r["family"] for r in data["laws"]).count("asymmetric") == 4
    assert data["manifest"]["command"] == "solve"
    assert data["manifest"]["tolerances"]["recursion"] == 1e-9


def test_solve_to_stdout_trivial_only(capsys):
    code, out, _ = run(capsys, "solve", "--k", "2", "--tau", "3")
    assert code == 0
    assert len(json.loads(out)["laws"]) == 1


@pytest.mark.parametrize("argv", [
    ["solve", "--k", "1", "--tau", "8"],
    ["solve", "--k", "2", "--theta", "1.5"],
    ["solve", "--k", "2", "--tau", "abc"],
    ["solve", "--k", "2", "--tau", "8", "--theta", "0.1"],
    ["solve", "--k", "2"],
    ["tauc", "--k", "1..3"],
    ["sweep", "--k", "2", "--tau", "9..3", "--steps", "3"],
    ["sweep", "--k", "2", "--tau", "x..y", "--steps", "3"],
    ["marginal", "--k", "2", "--tau", "8", "--a", "-1"],
    ["bogus"],
])
def test_input_errors_exit_2(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_verify_roundtrip(tmp_path, capsys):
    path = tmp_path / "laws.json"
    main(["solve", "--k", "3", "--tau", "9", "--out", str(path)])
    capsys.readouterr()
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0
    lines = out.strip().splitlines()
    assert all(line.endswith("PASS") for line in lines[:-1])
    assert lines[-1].endswith("0 failed")


def test_verify_detects_perturbation(tmp_path, capsys):
    path = tmp_path / "laws.json"
    main(["solve", "--k", "2", "--tau", "8", "--out", str(path)])
    capsys.readouterr()
    data = json.loads(path.read_text())
    data["laws"][2]["a"] += 0.01
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", str(path))
    assert code != 0
    line = out.splitlines()[2]
    assert "FAIL" in line
    assert float(re.search(r"recursion=(\S+)", line).group(1)) > 1e-4


def test_verify_empty_and_malformed(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text('{"laws": []}')
    code, out, _ = run(capsys, "verify", str(empty))
    assert code == 0 and "0 laws" in out
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "verify", str(bad))[0] == 2
    assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == 2


def test_tauc(tmp_path, capsys):
    code, out, _ = run(capsys, "tauc", "--k", "2..5")
    assert code == 0
    assert out == "k,tau_c\n2,6\n3,4\n4,3.333333333\n5,3\n"
    path = tmp_path / "tc.csv"
    assert main(["tauc", "--k", "2..5", "--out", str(path)]) == 0
    manifest = json.loads((tmp_path / "tc.csv.manifest.json").read_text())
    assert manifest["command"] == "tauc"


def test_sweep(tmp_path, capsys):
    path = tmp_path / "phase.csv"
    assert main(["sweep", "--k", "2", "--tau", "3..9", "--steps", "7", "--out", str(path)]) == 0
    rows = [r.split(",") for r in path.read_text().splitlines()[1:]]
    counts = [int(r[3]) for r in rows]
    changes = [i for i in range(1, len(counts)) if counts[i] != counts[i - 1]]
    assert changes == [4] and float(rows[4][2]) > 6 > float(rows[3][2]) - 1e-12
    assert (tmp_path / "phase.csv.manifest.json").exists()


def test_sample_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sample", "--k", "2", "--tau", "8", "--a", "2.618033988749895", "--b",
            "2.618033988749895", "--radius", "2", "--n", "500", "--seed", "42"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 501
    assert json.loads((tmp_path / "a.csv.manifest.json").read_text())["seed"] == 42


def test_marginal_modes(capsys):
    code, out, _ = run(capsys, "marginal", "--k", "2", "--theta", "0.5", "-M", "3")
    table = json.loads(out)
    assert code == 0 and len(table["entries"]) == 7 ** 3
    assert table["truncation"] == 3 and "manifest" in table
    code, out, _ = run(capsys, "marginal", "--k", "2", "--theta", "0.5", "--edge", "2")
    pmf = {e["j"]: e["p"] for e in json.loads(out)["pmf"]}
    assert abs(pmf[0] - 1 / 3) < 1e-12
    code, out, _ = run(capsys, "marginal", "--k", "2", "--theta", "0.5", "--classes")
    assert len(json.loads(out)["entries"]) == 64


def test_marginal_budget_exit_4(capsys):
    code, _, err = run(capsys, "marginal", "--k", "2", "--tau", "8", "--radius", "3", "-M", "20")
    assert code == 4 and "budget" in err


def test_marginal_edge_not_in_ball(capsys):
    assert run(capsys, "marginal", "--k", "2", "--tau", "8", "--edge", "50")[0] == 2
