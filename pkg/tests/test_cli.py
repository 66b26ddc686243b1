import hashlib
import io
import json
import os
import subprocess
import sys

import pytest

from kripkelab.cli import run
from kripkelab.frame import parse_frame
from kripkelab.morphism import parse_morphism, violation

from conftest import FIXTURES


def fx(name):
    return os.path.join(FIXTURES, name)


def binary(*argv):
    p = subprocess.run(["kripkelab", *map(str, argv)], capture_output=True, text=True)
    return p.returncode, p.stdout


def call(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], out)
    return code, out.getvalue()


CASES = [
    (0, ["frame", "show", fx("V_wbeth.frm")]),
    (0, ["frame", "class", fx("V_wbeth.frm"), "--class", "K"]),
    (1, ["frame", "class", fx("V_wbeth.frm"), "--class", "K4"]),
    (0, ["frame", "class", fx("chain2.frm"), "--class", f"horn:{fx('transitive.horn')}"]),
    (0, ["frame", "subreductions", fx("V_wbeth.frm")]),
    (0, ["frame", "quotients", fx("V_wbeth.frm")]),
    (0, ["frame", "catalog", "--class", "S4", "--max-size", "3"]),
    (0, ["morph", "check", fx("wbeth_to_V2.mor")]),
    (1, ["morph", "check", fx("cycle3_to_chain2_bad.mor")]),
    (0, ["morph", "classify", fx("wbeth_to_one.mor"), "--class", f"sub-of:{fx('V_wbeth.frm')}"]),
    (0, ["morph", "list", fx("V_wbeth.frm"), fx("one.frm")]),
    (0, ["morph", "compose", fx("cycle3_rot.mor"), fx("cycle3_rot.mor")]),
    (0, ["cat", "coeq", fx("cycle3_rot.mor"), fx("cycle3_id.mor")]),
    (0, ["cat", "cokpair", fx("wbeth_to_V2.mor")]),
    (0, ["cat", "equalize", fx("cycle3_rot.mor"), fx("cycle3_id.mor")]),
    (0, ["cat", "factor", fx("wbeth_to_one.mor")]),
    (0, ["cat", "pullback-regmono", fx("wbeth_to_one.mor"), fx("id_one.mor")]),
    (0, ["cat", "setpb", fx("chain2r_to_one.mor"), fx("chain2r_to_one.mor"), "--class", "S4"]),
    (0, ["cat", "verify", "coeq", fx("cycle3_rot.mor"), fx("cycle3_id.mor"), "--bound", "2"]),
    (0, ["algebra", "eval", fx("V_wbeth.frm"), "(box (var x))", "--valuation", fx("x.val")]),
    (1, ["algebra", "valid", fx("one.frm"), fx("T_x.fml")]),
    (0, ["algebra", "valid", fx("one.frm"), "(imp (box (var x)) (var x))"]),
    (1, ["algebra", "lf", "@omega", "--depth", "5"]),
    (0, ["algebra", "lf", fx("V_wbeth.frm"), "--point", "1"]),
    (0, ["algebra", "identities", fx("V_wbeth.frm"), "--samples", "20"]),
    (0, ["algebra", "dual", fx("wbeth_to_V2.mor")]),
    (0, ["proof", "check", fx("eq2_pq.prf")]),
    (0, ["proof", "check", fx("eq2_pq.json")]),
    (0, ["proof", "derive-eq", "ii", "--S", "(var p) (var q)"]),
    (0, ["proof", "derive-eq", "iv", "--family", "(var p)", "--family", "(var q)"]),
    (0, ["proof", "deduce", fx("eq2_pq.prf"), "--theory", "(var p)"]),
    (0, ["formula", "nf", "(box (or (var p) (var q)))"]),
    (0, ["formula", "print", "(imp (var p) (var q))"]),
    (1, ["semantics", "refute", fx("refl.seq"), "--logic", "K"]),
    (0, ["semantics", "refute", fx("refl.seq"), "--logic", "S4"]),
    (0, ["semantics", "refute", fx("box_x.seq"), "--theory", fx("T_x.fml")]),
    (0, ["props", "amalg", fx("chain2r_to_one.mor"), fx("chain2r_to_one.mor"), "--class", "S4"]),
    (0, ["props", "superamalg", fx("chain2r_to_one.mor"), fx("chain2r_to_one.mor"),
         "--class", "S4"]),
    (0, ["props", "beth", "--weak", "--class", f"sub-of:{fx('V_wbeth.frm')}"]),
    (1, ["props", "beth", "--strong", "--class", f"sub-of:{fx('V_wbeth.frm')}"]),
    (1, ["props", "beth", "--weak", "--class", f"sub-of:{fx('V_beth.frm')}"]),
    (2, ["props", "beth", "--weak", "--class", f"sub-of:{fx('V_wbeth.frm')}", "--bound", "1"]),
    (0, ["props", "sv", "--rho", "(iff (var x_0) (var x_1))", "--vars", "x"]),
    (1, ["props", "sv", "--rho", "(imp (var x_0) (var x_1))", "--vars", "x", fx("one.frm")]),
    (0, ["props", "functional-limits", "--samples", "3"]),
    (2, ["props", "reproduce-paper", "--bound", "1"]),
    (0, ["convert", fx("V_wbeth.frm"), "--format", "json"]),
    (0, ["convert", fx("x.val"), "--format", "json"]),
    (0, ["convert", fx("T_x.fml"), "--format", "json"]),
    (0, ["convert", fx("eq2_pq.prf"), "--format", "json"]),
]


@pytest.mark.parametrize("expected, argv", CASES, ids=[" ".join(a[:2]) for _, a in CASES])
def test_verbs_exit_codes_and_determinism(expected, argv):
    code, out = binary(*argv)
    assert code == expected, out
    code2, out2 = binary(*argv)
    assert code2 == code
    assert hashlib.sha256(out.encode()).digest() == hashlib.sha256(out2.encode()).digest()


@pytest.mark.parametrize("expected, argv", CASES[::6])
def test_json_reports_carry_the_exit_status(expected, argv):
    code, out = call(*argv, "--json")
    assert code == expected
    assert json.loads(out)["exit"] == expected


def test_malformed_edge_reports_line_and_column(capsys):
    assert call("frame", "show", fx("bad_edge.frm"))[0] == 3
    err = capsys.readouterr().err
    assert "line 2" in err and "column 12" in err


@pytest.mark.parametrize("argv", [
    ["frame", "show", "missing.frm"],
    ["frame", "show", "@nosuchframe"],
    ["frame", "class", fx("one.frm"), "--class", "NoLogic"],
    ["morph", "compose", fx("wbeth_to_V2.mor"), fx("cycle3_id.mor")],
    ["formula", "print", "(var p"],
    ["proof", "check", fx("eq2_pq.prf"), "--logic", "nope"],
])
def test_usage_and_parse_errors_exit_3(argv):
    assert call(*argv)[0] == 3


def test_argparse_errors_exit_3():
    with pytest.raises(SystemExit) as e:
        run(["frame", "class", fx("one.frm")])
    assert e.value.code == 3
    with pytest.raises(SystemExit) as e:
        run(["frob"])
    assert e.value.code == 3


def test_bound_from_environment(monkeypatch):
    argv = ["props", "beth", "--weak", "--class", f"sub-of:{fx('V_wbeth.frm')}"]
    monkeypatch.setenv("KF_BOUND", "1")
    assert call(*argv)[0] == 2
    assert call(*argv, "--bound", "6")[0] == 0
    monkeypatch.setenv("KF_BOUND", "x")
    assert call(*argv)[0] == 3


@pytest.mark.parametrize("name", ["V_wbeth.frm", "wbeth_to_V2.mor", "x.val", "T_x.fml",
                                  "eq2_pq.prf"])
def test_convert_round_trips(tmp_path, name):
    # frame references in morphism files resolve against the file's directory
    for f in ("V_wbeth.frm", "V2.frm"):
        (tmp_path / f).write_text(open(fx(f)).read())
    js = tmp_path / (name + ".json")
    back = tmp_path / ("back_" + name)
    assert call("convert", fx(name), "--format", "json", "-o", js)[0] == 0
    kind = {".frm": "frame", ".mor": "morphism", ".val": "valuation", ".fml": "formula",
            ".prf": "proof"}[os.path.splitext(name)[1]]
    assert call("convert", js, "--format", "text", "--kind", kind, "-o", back)[0] == 0
    again = tmp_path / "again.json"
    call("convert", back, "--format", "json", "--kind", kind, "-o", again)
    assert json.loads(again.read_text()) == json.loads(js.read_text())


def test_out_directory_holds_reloadable_witnesses(tmp_path):
    code, _ = call("props", "beth", "--strong", "--class", f"sub-of:{fx('V_wbeth.frm')}",
                   "--out", tmp_path)
    assert code == 1
    assert json.loads((tmp_path / "report.json").read_text())["exit"] == 1
    mors = [p for p in os.listdir(tmp_path) if p.endswith(".mor")]
    assert mors
    for p in mors:
        assert violation(parse_morphism((tmp_path / p).read_text()).morphism) is None


def test_subreduction_witnesses_parse(tmp_path):
    call("frame", "subreductions", fx("V_wbeth.frm"), "--out", tmp_path)
    frames = [p for p in os.listdir(tmp_path) if p.endswith(".frm")]
    assert len(frames) == 4
    for p in frames:
        parse_frame((tmp_path / p).read_text())


def test_console_entry_points():
    for cmd in (["kripkelab"], [sys.executable, "-m", "kripkelab"]):
        p = subprocess.run(cmd + ["frame", "show", fx("one.frm")], capture_output=True, text=True)
        assert p.returncode == 0 and "points" in p.stdout
    p = subprocess.run([sys.executable, "-m", "kripkelab", "convert", fx("bad_edge.frm"),
                        "--format", "json"], capture_output=True, text=True)
    assert p.returncode == 3 and "column 12" in p.stderr


def test_seed_determines_sampled_suites():
    argv = ["props", "functional-limits", "--samples", "4", "--bound", "3", "--json"]
    a = call(*argv, "--seed", "5")[1]
    assert a == call(*argv, "--seed", "5")[1]
    assert json.loads(a)["exit"] == 0
