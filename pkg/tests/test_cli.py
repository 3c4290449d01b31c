import json

import numpy as np
import pytest

from eigenchaos.cli import main
from eigenchaos.matrix_core import write_matrix
from eigenchaos.partitions import entries_partition, write_partition
from eigenchaos.spectral import eig_hess_tensor


def test_validate_partition_file(tmp_path, capsys):
    f = tmp_path / "p.txt"
    write_partition(f, entries_partition(4))
    assert main(["validate-partition", "--file", str(f)]) == 0
    assert "valid: n=4 m=10" in capsys.readouterr().out


def test_validate_partition_invalid(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text("2 2 2\n1,1 2,2\n1,2\n", encoding="utf-8")  # (2,1) missing
    assert main(["validate-partition", "--file", str(f)]) == 3
    assert capsys.readouterr().out.startswith("invalid:")
    assert main(["validate-partition", "--file", str(tmp_path / "none.txt")]) == 1


def test_check_identity_pdbr_example():
    assert main(["check-identity", "pdbr", "--n", "2", "--trials", "1e6", "--seed", "7"]) == 0


def test_check_identity_json_and_threads(tmp_path):
    out = tmp_path / "r.json"
    assert main(["check-identity", "diffcov", "--n", "3", "--kb", "1", "--trials", "20000",
                 "--threads", "2", "--json", str(out)]) == 0
    d = json.loads(out.read_text(encoding="utf-8"))
    assert d["trials"] == 20000 and d["z"] <= 3


def test_check_identity_failure_exit_code():
    # an impossible tolerance turns any Monte Carlo noise into a failure
    assert main(["check-identity", "ou", "--n", "2", "--trials", "2000", "--z-max", "-1"]) == 3


def test_check_identity_other_verbs():
    assert main(["check-identity", "tk", "--n", "2", "--trials", "20000"]) == 0
    assert main(["check-identity", "mono", "--n", "8", "--trials", "300"]) == 0
    assert main(["check-identity", "tpm", "--n", "3", "--trials", "2000"]) in (0, 3)


def test_missing_config(capsys):
    assert main(["run", "--config", "missing.json"]) == 1
    assert "config not found" in capsys.readouterr().err


def test_run_writes_csv(tmp_path, capsys):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"kind": "eigenvalue_variance", "n_list": [6], "trials": 20, "master_seed": 1}),
                 encoding="utf-8")
    out = tmp_path / "o.csv"
    assert main(["run", "--config", str(c), "--output", str(out)]) == 0
    assert out.exists() and (tmp_path / "o.meta.json").exists()


def test_run_bad_config_leaves_no_output(tmp_path):
    c = tmp_path / "c.json"
    out = tmp_path / "o.csv"
    c.write_text(json.dumps({"kind": "pdbou_decorrelation", "n_list": [4], "trials": 20,
                             "params": {"t_list": [9.0]}, "output": str(out)}), encoding="utf-8")
    assert main(["run", "--config", str(c)]) == 1
    assert not out.exists()


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["check-identity", "ou", "--trials", "0.5"],
    ["check-identity", "diffcov", "--n", "3", "--block", "99"],
    ["--threads", "0", "version"],
    ["sweep-path"],
])
def test_invalid_invocations(argv):
    assert main(argv) == 1


def test_sweep_path(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep-path", "--n", "6", "--block", "3", "--q", "9", "--output", str(out)]) == 0
    assert len(out.read_text(encoding="utf-8").splitlines()) == 10


def test_sweep_path_crossing(tmp_path):
    x, y = tmp_path / "x.txt", tmp_path / "y.txt"
    write_matrix(x, np.diag([2.0, 1.0]))
    write_matrix(y, np.diag([1.0, 2.0]))
    assert main(["sweep-path", "--x", str(x), "--y", str(y), "--q", "5"]) == 3


def test_version(capsys):
    assert main(["version"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("eigenchaos ") and out[1].startswith("build ") and out[2].startswith("requirements ")


def test_oracle_suite_passes():
    assert main(["oracle-suite"]) == 0


def test_oracle_suite_catches_sign_flip():
    assert main(["oracle-suite"], hess_fn=lambda s, a: -eig_hess_tensor(s, a)) == 3
