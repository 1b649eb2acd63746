import csv
import json

import numpy as np
import pytest
import yaml

from rismimo import cli
from rismimo.mc_rate import RateReport

FAST_GA = ["--generations", "5", "--population", "12", "--elites", "2"]


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump({"M": 16, "N": 16, "K": 2, "seed": 3, "mc_realizations": 40}))
    return path


def _run(config, out, *extra):
    return cli.main(["run", "--config", str(config), "--out", str(out), *extra])


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_rate_vs_M(config, tmp_path):
    out = tmp_path / "o"
    assert _run(config, out, "--experiment", "rate_vs_M", "--sweep", "16,36", *FAST_GA) == 0
    rows = _rows(out / "rate_vs_M.csv")
    assert tuple(rows[0]) == cli.HEADER
    assert len(rows) == 1 + 2 * 2 * 2  # sweep values x users x methods
    assert {r[3] for r in rows[1:]} == {"mc", "closed"}
    for r in rows[1:]:
        float(r[4])
        assert (r[5] == "") == (r[3] == "closed")
    manifest = json.loads((out / "rate_vs_M.manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["config"]["M"] == 16
    assert manifest["experiment"]["ga"]["t_T"] == 5


def test_byte_identical_reruns(config, tmp_path):
    args = ["--experiment", "rate_vs_kappa", "--sweep", "0.5,1", *FAST_GA]
    assert _run(config, tmp_path / "a", *args) == 0
    assert _run(config, tmp_path / "b", *args) == 0
    a = (tmp_path / "a" / "rate_vs_kappa.csv").read_bytes()
    assert a == (tmp_path / "b" / "rate_vs_kappa.csv").read_bytes()
    assert _run(config, tmp_path / "c", *args, "--seed", "4") == 0
    assert a != (tmp_path / "c" / "rate_vs_kappa.csv").read_bytes()


def test_power_scaling_rows(config, tmp_path):
    out = tmp_path / "ps"
    assert _run(config, out, "--experiment", "power_scaling", "--sweep", "16,64", "--phases", "random") == 0
    rows = _rows(out / "power_scaling.csv")[1:]
    assert {r[0] for r in rows} == {"M;eps=1", "M;eps=1.4"}
    assert {r[3] for r in rows} == {"closed", "limit"}
    limits = [float(r[4]) for r in rows if r[0] == "M;eps=1.4" and r[3] == "limit"]
    assert limits and all(v == 0 for v in limits)


def test_optimize_only_extras(config, tmp_path):
    out = tmp_path / "opt"
    assert _run(config, out, "--experiment", "optimize_only", *FAST_GA) == 0
    assert len(_rows(out / "optimize_only.phases.csv")) == 1 + 16
    hist = _rows(out / "optimize_only.history.csv")[1:]
    assert len(hist) == 5
    vals = [float(r[1]) for r in hist]
    assert vals == sorted(vals)


def test_discrete_vs_continuous(config, tmp_path):
    out = tmp_path / "d"
    assert _run(config, out, "--experiment", "discrete_vs_continuous", "--sweep", "1,2", *FAST_GA) == 0
    rows = _rows(out / "discrete_vs_continuous.csv")[1:]
    assert [r[0] for r in rows] == ["continuous"] * 2 + ["B"] * 4


def test_validate_mc(config, tmp_path):
    out = tmp_path / "v"
    assert _run(config, out, "--experiment", "validate_mc", "--sweep", "1", "--oracle-samples", "2000") == 0
    table = _rows(out / "validate_mc.oracle.csv")
    assert table[0] == ["config", "quantity", "k", "i", "closed", "mc", "stderr", "z"]
    assert {r[1] for r in table[1:]} >= {"xi", "varpi", "zeta"}


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"M": 16, "colour": "red"}))
    assert _run(bad, tmp_path / "o", "--experiment", "rate_vs_M") == 2
    assert _run(tmp_path / "missing.yaml", tmp_path / "o", "--experiment", "rate_vs_M") == 2
    bad.write_text(yaml.safe_dump({"M": 12}))
    assert _run(bad, tmp_path / "o", "--experiment", "rate_vs_M") == 2


def test_bad_method_and_arguments(config, tmp_path):
    assert _run(config, tmp_path / "o", "--experiment", "rate_vs_M", "--methods", "limit") == 2
    assert _run(config, tmp_path / "o", "--experiment", "rate_vs_M", "--methods", "bogus") == 2
    with pytest.raises(SystemExit) as exc:
        _run(config, tmp_path / "o", "--experiment", "not_an_experiment")
    assert exc.value.code == 2


def test_nan_exit_code(config, tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "rate_closed_form",
                        lambda sc, ph: RateReport(per_user_rate=np.full(sc.K, np.nan), method="closed"))
    out = tmp_path / "n"
    code = _run(config, out, "--experiment", "rate_vs_M", "--sweep", "16", "--methods", "closed",
                "--phases", "random")
    assert code == 3
    assert not (out / "rate_vs_M.csv").exists()


def test_unwritable_output(config, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = _run(config, blocker / "sub", "--experiment", "rate_vs_M", "--sweep", "16", "--methods", "closed",
                "--phases", "random")
    assert code == 1
