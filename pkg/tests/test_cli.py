import json

import pytest

from twistlog.cli import main
from twistlog.fock import SpecError
from twistlog.session import SessionSpec, load_session, parse_rational

EVEN1 = {"blocks": [{"kind": "even", "ell": 1, "alpha0": "-1/2"}], "cutoff": "3"}
ODD1 = {"blocks": [{"kind": "odd", "ell": 1, "alpha0": "-1/2"}], "cutoff": "4"}
EVEN2 = {"blocks": [{"kind": "even", "ell": 2, "alpha0": "-1/3"}], "cutoff": "2"}


@pytest.fixture
def write(tmp_path):
    def _write(data, name="spec.json"):
        p = tmp_path / name
        p.write_text(json.dumps(data) if not isinstance(data, str) else data)
        return str(p)
    return _write


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_rational():
    assert str(parse_rational("-10/4")) == "-5/2"
    assert parse_rational(3) == 3
    for bad in ("1/0", "0.5", "", "x", 0.5, True):
        with pytest.raises(SpecError):
            parse_rational(bad)


def test_session_roundtrip():
    data = {"blocks": [{"kind": "even", "ell": 1, "alpha0": "0"}, {"kind": "odd", "ell": 2, "alpha0": "0"}],
            "params": {"a1": "1/2", "a2": "3", "a": "-1"}, "cutoff": "2", "zero_cap": 2}
    spec = SessionSpec.from_dict(data)
    assert spec.blocks[0].a1 == parse_rational("1/2") and spec.blocks[1].a == -1
    assert SessionSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("data, msg", [
    ({"blocks": [{"kind": "even", "ell": 1, "alpha0": "1/0"}], "cutoff": "1"}, "zero denominator"),
    ({"blocks": [], "cutoff": "1"}, "non-empty"),
    ({"blocks": [{"kind": "weird", "ell": 1, "alpha0": "0"}], "cutoff": "1"}, "kind"),
    ({"blocks": [{"kind": "even", "ell": 1, "alpha0": "-1/3"}], "cutoff": "1", "conductor": 8}, "conductor"),
    ({"blocks": [{"kind": "even", "ell": 1, "alpha0": "-1/2"}], "cutoff": 0.5}, "rational"),
    ({"blocks": [{"kind": "even", "ell": 1, "alpha0": "-1/2"}], "cutof": "1"}, "unknown"),
])
def test_session_errors(data, msg):
    with pytest.raises(SpecError, match=msg):
        SessionSpec.from_dict(data)


def test_build_examples(write, tmp_path, capsys):
    code, out, _ = run(["build", "--spec", write(EVEN1), "--cutoff", "1"], capsys)
    assert code == 0
    basis = json.loads(out)["basis"]
    assert len(basis) == 6 and basis[0]["monomial"] == "1"
    code, out, _ = run(["build", "--spec", write(EVEN1), "--cutoff", "0"], capsys)
    assert [b["monomial"] for b in json.loads(out)["basis"]] == ["1"]


def test_build_bad_rational(write, capsys):
    bad = {"blocks": [{"kind": "even", "ell": 1, "alpha0": "1/0"}], "cutoff": "1"}
    code, _, err = run(["build", "--spec", write(bad)], capsys)
    assert code == 2 and "zero denominator" in err
    code, _, err = run(["build", "--spec", write("{not json")], capsys)
    assert code == 2 and "invalid JSON" in err
    assert main(["frobnicate"]) == 2
    assert main(["verify", "--spec", write(EVEN1), "--suite", "nope"]) == 2


def test_build_is_deterministic(write, tmp_path, capsys):
    spec = write(EVEN2)
    for d in ("a", "b"):
        assert run(["build", "--spec", spec, "--out", str(tmp_path / d)], capsys)[0] == 0
    for f in ("basis.json", "operators.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_verify_heisenberg(write, capsys):
    code, out, _ = run(["verify", "--spec", write(EVEN1), "--suite", "heisenberg"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["counts"]["failed"] == 0 and rep["counts"]["checked"] > 0


def test_verify_virasoro_reports_c(write, capsys):
    code, out, _ = run(["verify", "--spec", write(ODD1), "--suite", "virasoro", "--m-range", "2"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["central_charge"] == {"expected": "1", "recomputed": "1"}


def test_verify_borcherds_corrupted_cache(write, tmp_path, capsys):
    spec = write(EVEN2)
    assert run(["build", "--spec", spec, "--out", str(tmp_path / "ops")], capsys)[0] == 0
    code, out, _ = run(["verify", "--spec", spec, "--suite", "borcherds", "--cache", str(tmp_path / "ops"),
                        "--n-range", "1"], capsys)
    assert code == 0
    ops = json.loads((tmp_path / "ops" / "operators.json").read_text())
    target = next(r for r in ops["modes"] if r["entries"] and r["m"] == "2/3")
    target["entries"][0][2] = "17/5"
    (tmp_path / "bad.json").write_text(json.dumps(ops))
    code, out, _ = run(["verify", "--spec", spec, "--suite", "borcherds", "--cache", str(tmp_path / "bad.json"),
                        "--n-range", "1"], capsys)
    rep = json.loads(out)
    assert code == 1 and rep["counts"]["failed"] > 0
    keys = [json.dumps(f, sort_keys=True) for f in rep["failures"]]
    assert keys == sorted(keys)


def test_verify_parallel_matches_serial(write, capsys, monkeypatch):
    spec = write(EVEN2)
    _, serial, _ = run(["verify", "--spec", spec, "--suite", "locality", "--jobs", "1"], capsys)
    monkeypatch.setenv("TWISTLOG_JOBS", "2")
    _, par, _ = run(["verify", "--spec", spec, "--suite", "locality"], capsys)
    a, b = json.loads(serial), json.loads(par)
    assert a["counts"] == b["counts"] and a["failures"] == b["failures"]


def test_verify_inconclusive_exit(write, capsys):
    code, out, _ = run(["verify", "--spec", write(EVEN1), "--cutoff", "0", "--suite", "locality"], capsys)
    rep = json.loads(out)
    assert code == 3 and rep["counts"]["checked"] == 0 and rep["counts"]["inconclusive"] > 0


@pytest.mark.parametrize("data, levels, key, value", [
    (EVEN1, None, "vacuum_weight", "1/8"),
    (ODD1, None, "vacuum_weight", "1/16"),
])
def test_spectrum_weights(write, capsys, data, levels, key, value):
    code, out, _ = run(["spectrum", "--spec", write(data)], capsys)
    assert code == 0 and json.loads(out)[key] == value


def test_spectrum_jordan(write, capsys):
    code, out, _ = run(["spectrum", "--spec", write(EVEN2), "--levels", "1/3"], capsys)
    levels = json.loads(out)["levels"]
    assert code == 0 and levels == [{"dimension": 2, "eigenvalue": "5/9", "energy": "1/3", "partition": [2]}]
    code, _, err = run(["spectrum", "--spec", write(EVEN2), "--levels", "5"], capsys)
    assert code == 2 and "beyond the cutoff" in err


def test_report(write, capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, _, err = run(["report", "--spec", write(EVEN1), "--cutoff", "2", "--suite", "heisenberg,translation",
                        "--out", str(out_file)], capsys)
    rep = json.loads(out_file.read_text())
    assert code == 0 and [r["suite"] for r in rep["suites"]] == ["heisenberg", "translation"]
    assert "heisenberg" in err


def test_load_session_missing(tmp_path):
    with pytest.raises(SpecError):
        load_session(tmp_path / "missing.json")
