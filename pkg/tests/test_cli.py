import csv
import json

import numpy as np
import pytest

from imcsim.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, format_codes, main, parse_codes
from imcsim.config import SimConfig
from imcsim.network import build_network


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_train_artifacts(tmp_path):
    out = tmp_path / "run"
    assert main(["train", "--epochs", "2", "--seed", "1", "--out", str(out)]) == EXIT_OK
    for name in ("run.json", "metrics.csv", "weights.txt", "ledger.csv", "timing.json"):
        assert (out / name).is_file()
    rep = json.loads((out / "run.json").read_text())
    assert rep["seed"] == 1 and rep["epochs_run"] == 2
    assert rep["dataset"]["n_train"] == 120 and rep["dataset"]["n_test"] == 30
    assert len(rep["per_epoch"]["mean_abs_VE"]) == 2
    assert "wall_clock_s" not in rep
    rows = read_csv(out / "metrics.csv")
    assert rows[0] == ["epoch", "mean_abs_VE_V", "train_accuracy", "energy_J", "delay_s"] and len(rows) == 3


def test_train_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["train", "--epochs", "2", "--out", str(d)]) == EXIT_OK
    for name in ("run.json", "metrics.csv", "weights.txt", "ledger.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_eval_reads_snapshot(tmp_path):
    out = tmp_path / "run"
    main(["train", "--epochs", "2", "--out", str(out)])
    assert main(["eval", "--out", str(out)]) == EXIT_OK
    ev = json.loads((out / "eval.json").read_text())
    rep = json.loads((out / "run.json").read_text())
    assert ev["test_accuracy"] == rep["final"]["test_accuracy"]


def test_codes_round_trip():
    net = build_network(SimConfig(), rng=np.random.default_rng(0))
    grids = parse_codes(format_codes(net))
    assert [g.tolist() for g in grids] == [
        (np.where(l.bca.stored_values() > 7, l.bca.stored_values() - 15, l.bca.stored_values())).tolist()
        for l in net.layers]
    with pytest.raises(ValueError):
        parse_codes("0101 0011\n")


@pytest.mark.parametrize("A", [5, 10, 20, 40, 80])
def test_sweep_a(tmp_path, A):
    assert main(["sweep", "--sweep", "A", "--out", str(tmp_path)]) == EXIT_OK
    rows = {float(r[0]): r for r in read_csv(tmp_path / "sweep.csv")[1:]}
    assert float(rows[A][1]) == pytest.approx(1 / (2 * A), abs=1e-12)


def test_sweep_fr_energy(tmp_path):
    assert main(["sweep", "--sweep", "fr-energy", "--out", str(tmp_path)]) == EXIT_OK
    e = [float(r[1]) for r in read_csv(tmp_path / "sweep.csv")[1:]]
    assert len(e) == 16 and e[0] == e[15] == min(e)


@pytest.mark.parametrize("kind, n", [("adc", 15), ("alpha-nl", 11)])
def test_sweep_other(tmp_path, kind, n):
    assert main(["sweep", "--sweep", kind, "--out", str(tmp_path)]) == EXIT_OK
    assert len(read_csv(tmp_path / "sweep.csv")) == n + 1


def test_export(tmp_path):
    out = tmp_path / "run"
    main(["train", "--epochs", "1", "--out", str(out)])
    exp = tmp_path / "exp"
    assert main(["export", "--report", str(out / "run.json"), "--out", str(exp)]) == EXIT_OK
    assert read_csv(exp / "ledger_phases.csv")[0] == ["phase", "energy_J", "delay_s", "count"]


@pytest.mark.parametrize(
    "argv, code",
    [
        (["train", "--bogus"], EXIT_USAGE),
        ([], EXIT_USAGE),
        (["sweep"], EXIT_USAGE),
        (["sweep", "--sweep", "nope"], EXIT_USAGE),
        (["train", "--epochs", "0"], EXIT_USAGE),
        (["train", "--config", "/nonexistent.cfg"], EXIT_USAGE),
        (["train", "--dataset", "/nonexistent.csv"], EXIT_USAGE),
        (["eval", "--weights", "/nonexistent.txt"], EXIT_RUNTIME),
        (["export", "--report", "/nonexistent.json"], EXIT_RUNTIME),
    ],
)
def test_errors(tmp_path, argv, code, capsys):
    assert main(argv + (["--out", str(tmp_path)] if argv else [])) == code
    assert "error" in capsys.readouterr().err


def test_bad_config_is_runtime_error(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("A = 0.5\n")
    assert main(["train", "--config", str(p), "--out", str(tmp_path)]) == EXIT_RUNTIME


def test_module_entry_point():
    import subprocess
    import sys

    r = subprocess.run([sys.executable, "-m", "imcsim", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "train" in r.stdout
