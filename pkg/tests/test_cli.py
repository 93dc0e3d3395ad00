import json

import pytest

from tetracore.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(scope="module")
def catalog_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cat") / "catalog.json"
    assert main(["certify", "--out", str(path)]) == EXIT_OK
    return path


def test_sample_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["sample", "--seed", "1", "--count", "3", "--out", str(a)]) == EXIT_OK
    assert main(["sample", "--seed", "1", "--count", "3", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert len(json.loads(a.read_text())["configs"]) == 3


def test_sample_rejects_zero_count(tmp_path):
    assert main(["sample", "--seed", "1", "--count", "0", "--out", str(tmp_path / "x.json")]) == EXIT_USAGE


def test_unknown_command_is_usage_error():
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["degenerate", "--seed", "1"]) == EXIT_USAGE
    assert main(["degenerate", "--seed", "1", "--target-split", "41,51,22"]) == EXIT_USAGE


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["sample", "--seed", "1", "--count", "1", "--out", str(blocker / "x.json")]) == EXIT_USAGE


@pytest.mark.parametrize("level", ["u", "z"])
def test_verify_passes(level):
    assert main(["verify", "--level", level, "--samples", "20"]) == EXIT_OK


def test_verify_detects_injected_fault(capsys):
    assert main(["verify", "--level", "u", "--samples", "5", "--inject-fault"]) == EXIT_FAIL
    assert "FAIL" in capsys.readouterr().out


def test_report_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["--report", str(a), "verify", "--level", "u", "--samples", "5"])
    main(["--report", str(b), "verify", "--level", "u", "--samples", "5"])
    strip = lambda p: {k: v for k, v in json.loads(p.read_text()).items() if k != "timings"}
    assert strip(a) == strip(b)


def test_certify_only_dde(tmp_path):
    path = tmp_path / "dde.json"
    assert main(["certify", "--only-type", "DDE", "--out", str(path)]) == EXIT_OK
    data = json.loads(path.read_text())
    assert sum(len(r["certificates"]) for r in data) == 6


def test_full_catalog_replays(catalog_file, capsys):
    data = json.loads(catalog_file.read_text())
    assert sum(len(r["certificates"]) for r in data) == 66 + 12
    assert all(c["verdict"] == "Smooth" for r in data for c in r["certificates"])
    capsys.readouterr()
    assert main(["check", "--catalog", str(catalog_file), "--skip-enumeration"]) == EXIT_OK


def test_tampered_catalog_detected(catalog_file, tmp_path):
    data = json.loads(catalog_file.read_text())
    data[0]["certificates"][0]["corank"] = 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["check", "--catalog", str(bad), "--skip-enumeration"]) == EXIT_FAIL


def test_tampered_coordinate_detected(catalog_file, tmp_path):
    data = json.loads(catalog_file.read_text())
    face = data[1]["representatives"][0]["y"]
    name = sorted(face)[0]
    key = sorted(face[name])[1]
    face[name][key] = "17/3"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["check", "--catalog", str(bad), "--skip-enumeration"]) == EXIT_FAIL


def test_malformed_catalog_detected(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('[{"type": "DDE"}]')
    assert main(["check", "--catalog", str(bad), "--skip-enumeration"]) == EXIT_FAIL


def test_export(tmp_path):
    assert main(["export", "--gamma", "dot", "--relations", "txt", "--level", "u", "--out-dir", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "gamma.dot").read_text().count("subgraph") == 19
    assert len((tmp_path / "relations_u.txt").read_text().splitlines()) == 47
    assert main(["export", "--gamma", "json", "--out-dir", str(tmp_path)]) == EXIT_OK
    assert json.loads((tmp_path / "gamma.json").read_text())["edge_count"] == 72
    assert main(["export", "--out-dir", str(tmp_path)]) == EXIT_USAGE


def _report(tmp_path, argv):
    path = tmp_path / "report.json"
    code = main(["--report", str(path), *argv])
    return code, json.loads(path.read_text())


def test_degenerate_zero_weights(tmp_path):
    code, rep = _report(tmp_path, ["degenerate", "--seed", "1", "--weights", "0,0,0,0"])
    assert code == EXIT_OK
    assert rep["counts"]["limit equals seed"] is True
    assert rep["counts"]["catalog match"] == "none"


def test_degenerate_not_split(tmp_path):
    code, rep = _report(tmp_path, ["degenerate", "--seed", "1", "--weights", "0,1,1,1"])
    assert rep["counts"]["n_1"] == 1
    assert rep["counts"]["status"] == "not split"


def test_degenerate_target_split(tmp_path, catalog_file):
    out = tmp_path / "deg.json"
    code, rep = _report(tmp_path, ["degenerate", "--seed", "1", "--target-split", "31,51,22", "--catalog", str(catalog_file), "--out", str(out)])
    assert code == EXIT_OK
    assert rep["counts"]["status"] == "minimally split"
    assert rep["counts"]["catalog match"] == "CDE"
    assert json.loads(out.read_text())["n_k"] == [2, 2, 2]


def test_infeasible_target_split(tmp_path, catalog_file, capsys):
    code = main(["degenerate", "--seed", "1", "--target-split", "22,42,22", "--catalog", str(catalog_file)])
    assert code == EXIT_FAIL
    assert "realised splits" in capsys.readouterr().out
