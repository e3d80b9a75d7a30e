import json
import subprocess
import sys
from pathlib import Path

import pytest

from dimarket.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def base(**kw):
    doc = {"schema": "dimarket.experiment/1", "n_players": 2,
           "security": {"kind": "parity", "sign": 1, "mask": [1, 2]},
           "prior": {"kind": "uniform"}, "true_state": [1, 1]}
    doc.update(kw)
    return doc


def test_run_xor_summary(capsys):
    assert main(["run", "--config", str(CONFIGS / "run_xor_uniform.json")]) == 0
    assert capsys.readouterr().out.strip() == "eq@1 price=0 truth=false"


def test_run_parity_writes_trace(tmp_path, capsys):
    out = tmp_path / "trace.json"
    assert main(["run", "--config", str(CONFIGS / "run_parity_biased.json"), "--out", str(out)]) == 0
    assert capsys.readouterr().out.strip() == "eq@2 price=-1 truth=true"
    doc = json.loads(out.read_text())
    assert doc["final_price"] == "-1/1" and doc["equilibrium_round"] == 2


def test_run_max_rounds_flag(tmp_path, capsys):
    cfg = write(tmp_path, base(security={"kind": "threshold", "w": ["1", "1", "1"], "theta": "1"},
                               n_players=3, true_state=[1, 1, -1]))
    assert main(["run", "--config", cfg, "--max-rounds", "1"]) == 0
    assert capsys.readouterr().out.strip() == "eq@none price=1/6 truth=false"


@pytest.mark.parametrize("doc", [
    base(prior={"kind": "table", "masses": ["1/4", "1/4", "1/4", "24/100"]}),
    base(schema="dimarket.experiment/99"),
    base(true_state=[1, 1, 1]),
    base(security={"kind": "parity", "mask": [3]}),
    base(prior={"kind": "product_biased", "p": 0.75}),
    base(mode="sweep"),
])
def test_invalid_input_exit_2(tmp_path, doc, capsys):
    assert main(["run", "--config", write(tmp_path, doc)]) == 2
    assert "error:" in capsys.readouterr().err


def test_unreadable_config_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2


def test_resource_cap_exit_3(tmp_path):
    doc = base(n_players=13, security={"kind": "threshold", "w": ["1"] * 13, "theta": "1"})
    del doc["prior"]
    assert main(["classify", "--config", write(tmp_path, doc)]) == 3
    doc = base(n_players=30, security={"kind": "parity", "mask": [1]})
    assert main(["run", "--config", write(tmp_path, doc)]) == 3


def test_all_states_csv_and_json(tmp_path, capsys):
    cfg = str(CONFIGS / "all_states_majority.json")
    assert main(["all-states", "--config", cfg, "--out", str(tmp_path / "s.csv")]) == 0
    assert capsys.readouterr().out.strip() == "converged 8/8 max_eq=2"
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "true_state,equilibrium_round,final_price,converged" and len(lines) == 9
    assert main(["all-states", "--config", cfg, "--out", str(tmp_path / "s.json")]) == 0
    assert len(json.loads((tmp_path / "s.json").read_text())["traces"]) == 8


def test_classify(tmp_path, capsys):
    doc = base(prior={"kind": "product_biased", "p": "3/4"})
    assert main(["classify", "--config", write(tmp_path, doc)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["gamma0"] == "3/8"
    assert rep["parity"] == {"sign": 1, "mask": [1, 2]}
    assert rep["threshold"] is None
    assert rep["prediction"]["reason"] == "parity-biased"


def _sweep_cfg(tmp_path):
    return write(tmp_path, {
        "schema": "dimarket.experiment/1", "n_players": 3,
        "sweep": {"securities": [{"generate": "threshold", "count": 3}, {"kind": "parity", "mask": [1, 2]}],
                  "priors": [{"generate": "table", "count": 4}, {"kind": "uniform"}]}})


def test_sweep_reproducible_across_jobs(tmp_path):
    cfg = _sweep_cfg(tmp_path)
    outs = []
    for jobs in ("1", "3"):
        out = tmp_path / f"s{jobs}.csv"
        assert main(["sweep", "--config", cfg, "--seed", "7", "--jobs", jobs, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = outs[0].decode().splitlines()
    assert rows[0] == ("security_index,prior_index,true_state,equilibrium_round,final_price,"
                       "converged,gamma0,classes,prediction")
    assert len(rows) == 1 + 4 * 5 * 8
    other = tmp_path / "other.csv"
    main(["sweep", "--config", cfg, "--seed", "8", "--out", str(other)])
    assert other.read_bytes() != outs[0]


def test_sweep_gamma_filter(tmp_path):
    cfg = write(tmp_path, {
        "schema": "dimarket.experiment/1", "n_players": 2,
        "sweep": {"securities": [{"kind": "parity", "mask": [1, 2]}],
                  "priors": [{"kind": "uniform"}, {"kind": "product_biased", "p": "3/4"}],
                  "require_gamma0_nonzero": True}})
    out = tmp_path / "o.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 4 and all(r.split(",")[1] == "1" for r in rows)


def test_sweep_bad_generator(tmp_path):
    cfg = write(tmp_path, {"schema": "dimarket.experiment/1", "n_players": 2,
                           "sweep": {"securities": [{"generate": "bogus"}], "priors": [{"kind": "uniform"}]}})
    assert main(["sweep", "--config", cfg]) == 2


def test_verify(capsys, tmp_path):
    assert main(["verify", "A7"]) == 0
    assert capsys.readouterr().out.startswith("A7 PASS")
    assert main(["verify", "A9"]) == 0
    assert main(["verify", "Z1"]) == 2
    assert main(["verify"]) == 2
    cfg = write(tmp_path, {"schema": "dimarket.experiment/1", "suite": "A2"})
    assert main(["verify", "--config", cfg]) == 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dimarket.cli", "verify", "A7"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "A7 PASS" in proc.stdout
