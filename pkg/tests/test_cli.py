import json

from click.testing import CliRunner

from thinspan.cli import main

from support import CORPUS_PATH

EX2 = ["--ctx", "f:o->o, g:o->o, y:o", "--term", "f (g y)", "--point",
       '{"ctx": {"f": "[[*,*]-o*]", "g": "[[]-o*, [*]-o*]", "y": "[*]"}, "type": "*"}']
FAN = ["--ctx", "g:o->o, y:o", "--term", "g (g y)", "--point",
       '{"ctx": {"g": "[[*,*]-o*,[*]-o*,[*]-o*]", "y": "[*,*]"}, "type": "*"}']
REDEX = ["--ctx", "y:o", "--term", "(\\x:o. x) y", "--point",
         '{"ctx": {"y": "[*]"}, "type": "*"}']


def run(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env)


def test_check_reports_normal_form():
    res = run("check", "--ctx", "g:o->o, y:o", "--term", "(\\x:o. g x) y")
    assert res.exit_code == 0
    assert "type: o" in res.output
    assert "beta-normal: no" in res.output
    assert "normal form: g y" in res.output


def test_check_json():
    res = run("check", "--ctx", "g:o->o", "--term", "\\x:o. g x", "--json")
    assert res.exit_code == 0
    obj = json.loads(res.output)
    assert obj["type"] == "o -> o"
    assert obj["normal"] is True


def test_check_rejects_bad_input():
    res = run("check", "--term", "\\x:o. (")
    assert res.exit_code == 1
    assert "error:" in res.stderr
    res = run("check", "--ctx", "y:o", "--term", "y y")
    assert res.exit_code == 1


def test_witnesses_text_output():
    res = run("witnesses", *EX2)
    assert res.exit_code == 0
    assert "positive witnesses: 2 (exact)" in res.output
    assert "class 1: size 2, 1 endomorphisms" in res.output
    assert res.output.count("f^{<*,*>-o*}") == 2


def test_witnesses_json_shape():
    res = run("witnesses", *EX2, "--json")
    assert res.exit_code == 0
    obj = json.loads(res.output)
    assert obj["count"] == 2
    assert obj["completeness"] == "exact"
    assert obj["classes"] == [{"witnesses": [0, 1], "size": 2, "endomorphisms": 1}]
    assert obj["degrees"]["ctx"]["positive"] == 2
    assert obj["triples"] == 2
    assert len(obj["witnesses"]) == 2
    assert obj["canonical"]["type"] == "*"


def test_witnesses_budget_exit_code():
    res = run("witnesses", *REDEX)
    assert res.exit_code == 3
    assert "budget" in res.stderr


def test_budget_from_environment():
    res = run("witnesses", *REDEX, env={"THINSPAN_BUDGET": "1"})
    assert res.exit_code == 0
    assert "positive witnesses: 1 (bounded at 1)" in res.output
    res = run("witnesses", *REDEX, env={"THINSPAN_BUDGET": "zzz"})
    assert res.exit_code == 2


def test_witnesses_refinement_error():
    res = run("witnesses", "--ctx", "y:o", "--term", "y", "--point",
              '{"ctx": {"y": "[[*]-o*]"}, "type": "*"}')
    assert res.exit_code == 1
    assert "refine" in res.stderr


def test_point_from_file(tmp_path):
    pf = tmp_path / "point.json"
    pf.write_text('{"ctx": {"g": "[[*,*]-o*,[*]-o*,[*]-o*]", "y": "[*,*]"}, "type": "*"}')
    res = run("witnesses", "--ctx", "g:o->o, y:o", "--term", "g (g y)",
              "--point", str(pf))
    assert res.exit_code == 0
    assert "positive witnesses: 1 (exact)" in res.output
    assert "2 endomorphisms" in res.output


def test_weight_text_and_json():
    res = run("weight", *FAN)
    assert res.exit_code == 0
    assert "coefficient: 1" in res.output
    assert "positive witnesses: 1 in 1 classes" in res.output
    assert "class-weighted sum: 1" in res.output
    assert "witness triples: 4" in res.output
    obj = json.loads(run("weight", *FAN, "--json").output)
    assert obj == {"coefficient": 1, "witnesses": 1, "class_weighted": 1,
                   "classes": 1, "triples": 4}


def test_verify_corpus_passes():
    res = run("verify", "--corpus", str(CORPUS_PATH))
    assert res.exit_code == 0
    lines = [l for l in res.output.splitlines() if l]
    assert len(lines) == 20
    assert all(l.startswith("PASS ") for l in lines)


def test_verify_corpus_json():
    res = run("verify", "--corpus", str(CORPUS_PATH), "--json")
    assert res.exit_code == 0
    results = json.loads(res.output)
    assert len(results) == 20
    assert all(r["ok"] for r in results)
    assert {c["name"] for r in results for c in r["checks"]} == {
        "wrel-equals-witness-count", "class-weights-sum", "class-sizes",
        "triple-count-factors", "coefficient-division", "expected-value"}


def test_verify_single_subject():
    res = run("verify", "--ctx", "g:o->o, y:o", "--term", "g (g y)", "--point",
              '{"ctx": {"g": "[[*,*]-o*,[*]-o*,[*]-o*]", "y": "[*,*]"}, "type": "*"}',
              "--expected", "1")
    assert res.exit_code == 0
    assert res.output.startswith("PASS")


def test_verify_detects_wrong_expectation():
    res = run("verify", "--ctx", "g:o->o, y:o", "--term", "g (g y)", "--point",
              '{"ctx": {"g": "[[*,*]-o*,[*]-o*,[*]-o*]", "y": "[*,*]"}, "type": "*"}',
              "--expected", "3")
    assert res.exit_code == 4
    assert res.output.startswith("FAIL")
    assert "expected-value" in res.output


def test_verify_needs_subject_or_corpus():
    res = run("verify")
    assert res.exit_code == 2


def test_verify_underbudget_fails(tmp_path):
    # a budget too small to cover the needed cut shows up as a failed
    # count identity, not as a silent pass
    cf = tmp_path / "c.json"
    cf.write_text(json.dumps([{
        "name": "too-tight",
        "ctx": "g:o->o, y:o",
        "term": "(\\f:o->o. \\x:o. f (f x)) ((\\h:o->o. \\z:o. h (h z)) g) y",
        "point": {"ctx": {"g": "[[*]-o*,[*]-o*,[*]-o*,[*]-o*]", "y": "[*]"},
                  "type": "*"},
        "expected": 1,
        "budget": 1,
    }]))
    res = run("verify", "--corpus", str(cf))
    assert res.exit_code == 4
    assert res.output.startswith("FAIL too-tight")
    assert "wrel-equals-witness-count" in res.output


def test_verify_mixed_corpus(tmp_path):
    cf = tmp_path / "c.json"
    cf.write_text(json.dumps([
        {"name": "plain", "ctx": "g:o->o, y:o", "term": "g (g y)",
         "point": {"ctx": {"g": "[[*,*]-o*,[*]-o*,[*]-o*]", "y": "[*,*]"},
                   "type": "*"},
         "expected": 1},
        {"name": "reduced", "ctx": "y:o", "term": "(\\x:o. x) y",
         "point": {"ctx": {"y": "[*]"}, "type": "*"}, "expected": 1, "budget": 1},
    ]))
    res = run("verify", "--corpus", str(cf))
    assert res.exit_code == 0
    assert res.output.count("PASS") == 2
