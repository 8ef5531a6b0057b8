import json

import pytest

from aalkit.cli import main, render


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code = main(list(argv) + ["--json", "-"])
    return code, json.loads(capsys.readouterr().out)


def test_entail_matrices_yes(capsys):
    code, rep = run_json(capsys, "entail", "--matrices", "b2.alg", "--designated", "1",
                         "--gamma", "p,(imp p q)", "--phi", "q")
    assert code == 0
    assert rep["verdict"] == "yes" and rep["result"]["context"] == ["p", "q"]


def test_entail_matrices_no_with_countermodel(capsys):
    code, rep = run_json(capsys, "entail", "--matrices", "b2.alg", "--gamma", "q",
                         "--phi", "p")
    assert code == 1
    assert rep["result"]["countermodel"]["evaluation"] == {"p": "0", "q": "1"}


def test_entail_class(capsys):
    code, out, _ = run(capsys, "entail", "--class", "b2.alg", "--eq", "p ~ p")
    assert code == 0 and "verdict: yes" in out
    code, _, _ = run(capsys, "entail", "--class", "b2.alg", "h3.alg",
                     "--eq", "(or p (not p)) ~ top")
    assert code == 1


def test_malformed_term_is_a_usage_error_with_position(capsys):
    code, _, err = run(capsys, "entail", "--matrices", "b2.alg", "--gamma", "p,(imp p q",
                       "--phi", "q")
    assert code == 2
    assert "col 3" in err and "unbalanced" in err


def test_unknown_file_is_a_usage_error(capsys):
    code, _, err = run(capsys, "check-sig", "missing.sig")
    assert code == 2 and "missing-file" in err


@pytest.mark.parametrize("names,size", [("p", 4), ("p q", 16), ("", 2)])
def test_free_algebra_sizes(capsys, names, size):
    code, rep = run_json(capsys, "free-algebra", "--class", "b2.alg", "--vars", names)
    assert code == 0 and rep["result"]["carrier_size"] == size


def test_free_algebra_cache(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("AALKIT_CACHE", str(tmp_path))
    _, first = run_json(capsys, "free-algebra", "--class", "b2.alg", "--vars", "p", "--tables")
    assert len(list(tmp_path.iterdir())) == 1
    _, second = run_json(capsys, "free-algebra", "--class", "b2.alg", "--vars", "p", "--tables")
    assert first == second


def test_free_algebra_guard_exit(capsys):
    code, _, err = run(capsys, "free-algebra", "--class", "b2.alg", "--vars", "p q",
                       "--guard-free", "5")
    assert code == 4 and "guard" in err


def test_derive_and_inconclusive(capsys):
    code, rep = run_json(capsys, "derive", "--rules", "cpc.rules", "--sig", "cpc.sig",
                         "--gamma", "p,(imp p q)", "--phi", "q")
    assert code == 0 and rep["result"]["rounds"] == 1
    code, rep = run_json(capsys, "derive", "--rules", "cpc.rules", "--sig", "cpc.sig",
                         "--phi", "(imp p p)", "--budget", "1")
    assert code == 3 and rep["verdict"] == "unknown"


def test_lt(capsys):
    code, rep = run_json(capsys, "lt", "--class", "b2.alg", "--vars", "p q",
                         "--left", "(and p q)", "--right", "(not (or (not p) (not q)))")
    assert code == 0 and rep["result"]["agree"]
    code, rep = run_json(capsys, "lt", "--class", "b2.alg", "h3.alg", "--vars", "p",
                         "--left", "(not (not p))", "--right", "p")
    assert code == 1 and rep["result"]["agree"]


def test_theories(capsys):
    code, rep = run_json(capsys, "theories", "--matrices", "b2.alg",
                         "--universe", "p, (not p), (or p q)")
    assert code == 0 and rep["result"]["closed_theories"] == 6
    assert len(rep["result"]["closure"]) == 8
    code, rep = run_json(capsys, "theories", "--matrices", "b2.alg", "--universe", "")
    assert rep["result"]["closed_theories"] == 1
    big = ",".join(["p", "q", "r"] + [f"(not {x})" for x in "pqr"] +
                   [f"(or {x} {y})" for x in "pqr" for y in "pqr"])
    code, _, _ = run(capsys, "theories", "--matrices", "b2.alg", "--universe", big)
    assert code == 4


def test_algebraise_bundles(capsys):
    base = ["algebraise", "--class", "b2.alg", "--sig", "cpc.sig"]
    code, rep = run_json(capsys, *base, "--matrices", "b2.alg", "--translation", "cpc.tr")
    assert code == 0 and rep["result"]["status"] == "pass"
    code, out, _ = run(capsys, *base, "--matrices", "b2.alg", "--translation", "broken.tr")
    assert code == 1 and "counterexamples:" in out and "tau_delta_z" in out
    code, rep = run_json(capsys, *base, "--rules", "cpc.rules", "--translation", "cpc.tr",
                         "--depth", "0", "--ctx", "1", "--sets", "1", "--budget", "0")
    assert code == 3 and rep["verdict"] == "inconclusive"


def test_check_lemmas_only(capsys):
    code, rep = run_json(capsys, "check-lemmas", "--only", "bijection", "--max-elems", "4")
    assert code == 0
    (suite,) = rep["result"]["suites"]
    assert suite["details"]["lattices"] == 5 and suite["instances"] == 22


def test_check_lemmas_unknown_name(capsys):
    code, _, err = run(capsys, "check-lemmas", "--only", "bogus")
    assert code == 2 and "valid names" in err and "bijection" in err


def test_factorize_and_iso(capsys):
    code, rep = run_json(capsys, "factorize", "--source", "powerset2.lat", "--target",
                         "chain3.lat", "--map", "e=0,x=m,y=m,xy=m")
    assert code == 0 and rep["result"]["middle"]["elements"] == ["e", "xy"]
    code, _, _ = run(capsys, "factorize", "--source", "powerset2.lat", "--target",
                     "chain3.lat", "--map", "e=0,x=m,y=0,xy=1")
    assert code == 2
    assert run(capsys, "lattice-iso", "diamond.lat", "powerset2.lat")[0] == 0
    assert run(capsys, "lattice-iso", "diamond.lat", "chain3.lat")[0] == 1


def test_check_sig_and_term(capsys):
    code, rep = run_json(capsys, "check-sig", "cpc.sig")
    assert code == 0 and rep["result"]["constants"] == ["top"]
    code, rep = run_json(capsys, "term", "(imp p (not q))", "--sig", "cpc.sig",
                         "--subst", "p=(not r)")
    assert rep["result"]["substituted"] == "(imp (not r) (not q))"
    assert rep["result"]["depth"] == 2


def test_negative_bound_is_usage_error(capsys):
    assert run(capsys, "check-sig", "cpc.sig", "--depth", "-1")[0] == 2


def test_json_file_matches_rendering(capsys, tmp_path):
    path = tmp_path / "r.json"
    main(["entail", "--class", "b2.alg", "--eq", "p ~ p", "--json", str(path)])
    out = capsys.readouterr().out
    rep = json.loads(path.read_text())
    assert set(render(rep["result"])) <= set(out.splitlines())
    assert "json" not in rep["args"]


def test_usage_error_from_argparse():
    with pytest.raises(SystemExit) as e:
        main(["entail", "--nope"])
    assert e.value.code == 2
