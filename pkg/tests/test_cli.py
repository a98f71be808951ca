import json

import pytest

from markovpsi.cli import main
from markovpsi.markov_graph import build_ring


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_ring4_symbolic(capsys):
    code, out, _ = run(capsys, "verify", "--family", "ring", "--n", "4", "--mode", "symbolic",
                       "--checks", "all", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["mode"] == "symbolic" and rep["residual"] == "1" and rep["verdict"] == "match"
    assert rep["psi_degree"] == 12 and rep["tree_count"] == 16
    rank3 = [m["exponent"] for m in rep["multiplicities"] if m["rank"] == 3]
    assert rank3 == [1, 1, 1, 1]
    assert all(rep["checks"][k] is True for k in
               ["pi_invariance", "kirchhoff", "lemma_covfor", "distinguished_monomial", "degree_identity"])
    assert set(rep) >= {"graph", "mode", "psi_degree", "tree_count", "multiplicities",
                        "residual", "pit", "checks"}


def test_verify_complete4_pit(capsys):
    code, out, _ = run(capsys, "verify", "--family", "complete", "--n", "4", "--mode", "pit",
                       "--trials", "20", "--claim", "chapuy", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["pit"]["verdict"] == "match" and rep["pit"]["failures"] == 0
    assert rep["claim"]["exponents"] == {"2": 3, "3": 2}
    assert set(rep["pit"]) >= {"prime", "trials", "seed", "failures"}


def test_refuted_claim_exits_1(capsys):
    code, out, _ = run(capsys, "verify", "--family", "complete", "--n", "4", "--mode", "pit",
                       "--exponents", "2:3,3:1", "--trials", "3", "--format", "json")
    rep = json.loads(out)
    assert code == 1 and rep["verdict"] == "refuted" and rep["pit"]["failing_assignment"]


def test_json_is_byte_identical(capsys):
    args = ["verify", "--family", "ring", "--n", "3", "--format", "json", "--seed", "5"]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    args = ["verify", "--family", "ring", "--n", "6", "--mode", "pit", "--format", "json"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_json_round_trip(capsys):
    _, out, _ = run(capsys, "verify", "--family", "complete", "--n", "3", "--format", "json")
    rep = json.loads(out)
    assert json.dumps(rep, indent=2, sort_keys=True) + "\n" == out


def test_auto_switches_to_pit(capsys):
    code, out, err = run(capsys, "verify", "--family", "complete", "--n", "4", "--trials", "3",
                         "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["mode"] == "pit" and rep["warnings"]


def test_symbolic_beyond_cutoff_is_infeasible(capsys):
    code, out, _ = run(capsys, "verify", "--family", "complete", "--n", "4", "--mode", "symbolic",
                       "--format", "json")
    assert code == 2 and "error" in json.loads(out)


def test_config_errors_exit_2(capsys, tmp_path):
    assert run(capsys, "verify", "--family", "ring")[0] == 2
    assert run(capsys, "verify", "--family", "ring", "--n", "2")[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("3\n1 1\n", encoding="utf-8")
    assert run(capsys, "verify", "--graph", str(bad))[0] == 2
    red = tmp_path / "red.txt"
    red.write_text("3\n1 2\n2 1\n3 1\n", encoding="utf-8")
    assert run(capsys, "verify", "--graph", str(red))[0] == 2
    assert run(capsys, "verify", "--family", "ring", "--n", "3", "--checks", "bogus")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--mode", "nope"])
    assert exc.value.code == 2


def test_graph_file_input(capsys, tmp_path):
    path = tmp_path / "g.txt"
    path.write_text(build_ring(4).to_text(), encoding="utf-8")
    code, out, _ = run(capsys, "verify", "--graph", str(path), "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["residual"] == "1"
    custom = tmp_path / "c.txt"
    custom.write_text("3\n1 2\n2 3\n3 1\n2 1\n", encoding="utf-8")
    code, out, _ = run(capsys, "verify", "--graph", str(custom), "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] is None and rep["graph"]["family"] == "custom"


def test_specialized_run(capsys):
    code, out, _ = run(capsys, "verify", "--family", "ring", "--n", "4", "--specialize",
                       "q1_2,q3_4", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["specialized"] == ["q1_2", "q3_4"] and rep["residual"] == "1"
    assert any("does not prove" in w for w in rep["warnings"])


def test_prime_env_override(capsys, monkeypatch):
    monkeypatch.setenv("MARKOVPSI_PRIME", str((1 << 89) - 1))
    _, out, _ = run(capsys, "verify", "--family", "ring", "--n", "5", "--mode", "pit",
                    "--trials", "3", "--format", "json")
    rep = json.loads(out)
    assert rep["pit"]["prime"] == (1 << 89) - 1 and rep["pit"]["failures"] == 0


def test_human_output_uses_letters_for_three_states(capsys):
    code, out, _ = run(capsys, "verify", "--family", "complete", "--n", "3")
    assert code == 0 and "verdict: match" in out and "check kirchhoff: PASS" in out


def test_show_r_matrix_three_states(capsys):
    code, out, _ = run(capsys, "show", "r-matrix", "--family", "complete", "--n", "3")
    rows = [r.split() for r in out.strip().splitlines()]
    assert code == 0 and len(rows) == 9
    # first row: lambda 0 0 | 0 a 0 | w 0 0 with lambda = -a - w
    assert " ".join(rows[0]) == "-a - w 0 0 0 a 0 w 0 0"
    assert " ".join(rows[8]) == "0 0 c v 0 0 0 0 -c - v"


def test_show_lift_dot_ring4(capsys, tmp_path):
    fig = tmp_path / "t.png"
    code, out, _ = run(capsys, "show", "lift", "--family", "ring", "--n", "4", "--emit", "dot",
                       "--figure", str(fig))
    assert code == 0 and out.count('[label="[') == 16 and out.count(" -> ") == 32
    assert fig.stat().st_size > 0
    code, out2, _ = run(capsys, "lift", "--family", "ring", "--n", "4", "--emit", "dot")
    assert out2 == out
    code, js, _ = run(capsys, "lift", "--family", "ring", "--n", "4", "--emit", "json")
    assert len(json.loads(js)["trees"]) == 16


def test_show_trees_root3(capsys):
    code, out, _ = run(capsys, "show", "trees", "--family", "ring", "--n", "4", "--root", "3")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 4
    assert sorted(ln.split()[2] for ln in lines) == ["[3,1]", "[3,2]", "[3,3]", "[3,4]"]
    code, out, _ = run(capsys, "trees", "--family", "complete", "--n", "3", "--root", "1")
    assert len(out.strip().splitlines()) == 3


def test_figure_dir(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--family", "ring", "--n", "4", "--format", "json",
                       "--figure-dir", str(tmp_path))
    rep = json.loads(out)
    assert code == 0 and rep["figures"] == ["ring_n4_lift.png", "ring_n4_exponents.png"]
    for name in rep["figures"]:
        assert (tmp_path / name).stat().st_size > 0


def test_output_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--family", "ring", "--n", "3", "--format", "json",
                       "-o", str(path))
    assert code == 0 and out == "" and json.loads(path.read_text(encoding="utf-8"))["mode"] == "symbolic"
