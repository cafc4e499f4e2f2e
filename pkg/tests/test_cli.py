import gzip
import json

import numpy as np
import pytest

from asepdual.cli import main
from asepdual.measures import shock_tanh_profile


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_suite_algebra_exact(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["verify", "--suite", "algebra", "--L", "6", "--q", "3/2", "--mode", "exact",
                      "--out", str(out)], capsys)
    data = json.loads(out.read_text())
    assert code == 0 and data["summary"]["failed"] == 0
    assert data["config"]["q"] == "3/2" and data["config"]["mode"] == "exact"


def test_verify_twisted_intertwiner_check(capsys):
    code, out, _ = run(["verify", "--check", "prop1", "--L", "6", "--K", "2", "--n", "1", "--sign", "+",
                        "--mode", "exact"], capsys)
    assert code == 0 and json.loads(out)["reports"][0]["pass"]


def test_verify_global_shock_walk_check(capsys):
    code, out, _ = run(["verify", "--check", "theorem2", "--L", "8", "--N", "3", "--K", "1", "--x", "3",
                        "--q", "1.5", "--t", "0.5"], capsys)
    rep = json.loads(out)["reports"][0]
    assert code == 0 and rep["residual"] <= 1e-9


def test_profile_matches_tanh(capsys):
    code, out, _ = run(["profile", "--L", "100", "--shocks", "30", "--z", "1", "--q", "1.1", "--kind", "II"], capsys)
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[0] == "k,z_k,rho_k"
    rho = np.array([float(l.split(",")[2]) for l in lines[1:]])
    assert np.allclose(rho, shock_tanh_profile(100, [30], 1.0, 1.1), atol=1e-12, rtol=0)
    assert lines[30].split(",")[1] == "inf"


def test_decompose_at_time_zero(tmp_path, capsys):
    base = tmp_path / "dec"
    code, _, _ = run(["decompose", "--L", "8", "--N", "3", "--x", "3", "--q", "1.5", "--t", "0",
                      "--out", str(base)], capsys)
    data = json.loads((tmp_path / "dec.json").read_text())
    assert code == 0
    assert data["weights"]["3"] == pytest.approx(1.0, abs=1e-12)
    assert sum(abs(v) for k, v in data["weights"].items() if k != "3") < 1e-12
    assert (tmp_path / "dec.csv").read_text().startswith("# config:")


def test_transition_table_csv(capsys):
    code, out, _ = run(["transition", "--L", "4", "--K", "1", "--driving", "global", "--M", "2", "--q", "1.5",
                        "--t", "0.3"], capsys)
    rows = [l.split(",") for l in out.splitlines() if not l.startswith("#")][1:]
    assert code == 0 and len(rows) == 16
    assert float(rows[0][2]) == pytest.approx(0.570456443720734, abs=1e-13)


def test_evolve_json_and_gzip(tmp_path, capsys):
    out = tmp_path / "v.json"
    code, _, _ = run(["evolve", "--L", "5", "--eta", "11000", "--M", "0", "--q", "2", "--t", "0.4",
                      "--out", str(out), "--gzip"], capsys)
    data = json.loads(gzip.decompress((tmp_path / "v.json.gz").read_bytes()))
    assert code == 0 and data["dim"] == 10
    assert data["triplets"][0][:2] == [0, 0]
    assert data["triplets"][0][2] == pytest.approx(0.4161290468806922, abs=1e-12)
    assert data["total"] == pytest.approx(1.0, abs=1e-12)


def test_reruns_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["verify", "--suite", "appendix", "--no-timing", "--L", "4"]
    run(args + ["--out", str(a)], capsys)
    run(args + ["--out", str(b)], capsys)
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    da["config"].pop("out")
    db["config"].pop("out")
    assert da == db


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"L": 4, "K": 1, "n": 2, "sign": "-"}))
    code, out, _ = run(["verify", "--check", "prop1", "--config", str(cfg), "--L", "5"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["config"]["L"] == 5 and rep["reports"][0]["params"]["n"] == 2


def test_report_from_file(tmp_path, capsys):
    r = tmp_path / "r.json"
    run(["verify", "--check", "lemmas", "--L", "3", "--out", str(r)], capsys)
    code, out, _ = run(["report", "--from", str(r)], capsys)
    assert code == 0 and "lemmas,exact,1," in out and "# passed 1/1" in out


@pytest.mark.parametrize("argv", [
    ["evolve", "--L", "4", "--N", "2", "--x", "2", "--mode", "exact"],
    ["verify", "--check", "theorem2", "--N", "3", "--K", "1", "--x", "3", "--mode", "exact"],
    ["verify", "--suite", "bogus"],
    ["verify", "--check", "prop1", "--L", "4", "--K", "9"],
    ["verify", "--check", "prop1", "--L", "4"],
    ["profile", "--L", "4", "--shocks", "2,2"],
    ["transition", "--L", "4", "--K", "1", "--q", "-1", "--M", "1"],
    ["evolve", "--L", "4", "--eta", "0102", "--M", "1"],
])
def test_usage_errors_exit_2(argv, tmp_path, capsys):
    out = tmp_path / "never.json"
    code, _, _ = run(argv + ["--out", str(out)], capsys)
    assert code == 2 and not out.exists()


def test_bad_config_writes_nothing(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"Lattice": 4}))
    out = tmp_path / "o.json"
    code, _, _ = run(["verify", "--suite", "algebra", "--config", str(cfg), "--out", str(out)], capsys)
    assert code == 2 and not out.exists()


def test_numerical_failure_exit_3(monkeypatch, capsys):
    from asepdual import evolution

    def boom(*a, **k):
        raise evolution.PropagationError("forced")

    monkeypatch.setattr(evolution, "_uniformization", boom)
    code, _, err = run(["evolve", "--L", "6", "--eta", "110100", "--M", "0", "--t", "1",
                        "--method", "uniformization"], capsys)
    assert code == 3 and "numerical failure" in err


def test_failed_check_exits_1(monkeypatch, capsys):
    from asepdual import verify

    def failing(*a, **k):
        return verify.VerificationReport("probe", {}, "exact", 1.0, False)

    monkeypatch.setattr(verify, "check_lemmas", failing)
    code, out, _ = run(["verify", "--check", "lemmas", "--L", "3"], capsys)
    assert code == 1 and json.loads(out)["summary"]["failed"] == 1
