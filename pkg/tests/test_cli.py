import json
import subprocess
import sys

import pytest

from fuchsnielsen.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_exceptional(capsys):
    code, out, _ = run(capsys, "classify", "--exponents", "7,7,7", "--n", "4")
    assert code == 2 and "condition (a)" in out


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "--exponents", "8,7,5,4,3", "--json")
    d = json.loads(out)
    assert code == 0 and d["exceptional"] is False


def test_decide_equivalent(capsys):
    code, out, _ = run(capsys, "decide", "--exponents", "5,5,5,5,5", "--u", "1,1,1,1",
                       "--missing-u", "5", "--v", "4,1,1,1", "--missing-v", "5")
    assert code == 0 and "verdict: Equivalent" in out and "numeric check: PASS" in out


def test_decide_json_schema(capsys):
    code, out, _ = run(capsys, "decide", "--exponents", "5,5,5,5,5", "--u", "1,1,1,1",
                       "--v", "2,1,1,1", "--json")
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "Inequivalent"
    assert {"verdict", "condition", "checks", "certificate"} <= set(d)


def test_decide_exceptional(capsys):
    code, _, _ = run(capsys, "decide", "--exponents", "7,7,7", "--u", "1,1", "--v", "2,1")
    assert code == 2


def test_scan_pi(capsys):
    code, out, _ = run(capsys, "scan-pi", "--p", "5", "--q", "5", "--r", "1,2")
    assert code == 0 and "0 violations" in out


def test_certify(capsys):
    code, out, _ = run(capsys, "certify", "--exponents", "5,5,5,5,5", "--u", "1,1,1,1",
                       "--v", "2,1,1,1", "--json")
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "Inequivalent"
    assert d["positions"][0]["witness_u"]


def test_certify_skipped_everywhere(capsys):
    code, out, _ = run(capsys, "certify", "--exponents", "7,5,3,3,3", "--n", "2",
                       "--u", "1,1,1,1,1,1", "--v", "1,2,1,1,1,1")
    assert code == 2 and "SkippedEverywhere" in out


def test_rep(capsys):
    code, out, _ = run(capsys, "rep", "--exponents", "5,5,5", "--seed", "4")
    assert code == 0 and "verification: PASS" in out


def test_deterministic_output(capsys):
    a = run(capsys, "rep", "--exponents", "5,4,3,3", "--seed", "9", "--json")
    b = run(capsys, "rep", "--exponents", "5,4,3,3", "--seed", "9", "--json")
    assert a == b


def test_input_file(tmp_path, capsys):
    f = tmp_path / "pair.txt"
    f.write_text("# a pair of systems\n"
                 "group.exponents = [5,5,5,5,5]\n"
                 "group.genus = 0\n"
                 "gensys.missing = 5\n"
                 "gensys.exponents = [1,1,1,1]\n"
                 "gensys.missing = 4\n"
                 "gensys.exponents = [1,1,1,1]\n")
    code, out, _ = run(capsys, "decide", "--input", str(f))
    assert code == 0 and "verdict: Equivalent" in out


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["decide", "--exponents", "5,5,5"],
    ["classify"],
    ["scan-pi", "--p", "5"],
    ["certify", "--exponents", "5,x"],
    ["decide", "--exponents", "5,5,5", "--u", "1,1", "--v", "1,1", "--tol", "-1"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 64


def test_domain_error_exit_1(capsys):
    code, _, err = run(capsys, "decide", "--exponents", "5,5,5,5,5", "--u", "5,1,1,1",
                       "--v", "1,1,1,1")
    assert code == 1 and "IncompatibleSystems" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fuchsnielsen", "scan-pi", "--p", "3", "--q", "3"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "0 violations" in res.stdout


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--seed", "1")
    assert code == 0 and "FAIL" not in out
