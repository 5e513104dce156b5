import json
import subprocess
import sys

import numpy as np
import pytest

from qudit_cloning.cli import main
from qudit_cloning.state import PureState, load_state, save_state


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_verify_algebra_qutrit(capsys):
    code, rep, _ = run(capsys, "verify-algebra", "--d", "3")
    assert code == 0 and rep["passed"]
    assert rep["suites"]["composition"]["cases"] == 81
    assert rep["suites"]["orthogonality"]["cases"] == 81
    assert all(s["offenders"] == [] for s in rep["suites"].values())


def test_verify_algebra_qubit_transpose_trick(capsys):
    code, rep, _ = run(capsys, "verify-algebra", "--d", "2")
    assert code == 0
    assert rep["suites"]["transpose_trick"]["cases"] == 4 and rep["suites"]["transpose_trick"]["passed"]


@pytest.mark.parametrize("argv", [
    ["verify-algebra", "--d", "1"],
    ["verify-algebra", "--d", "9"],
    ["clone", "--n", "1"],
    ["clone", "--n", "4"],
    ["clone", "--d", "8", "--n", "3"],
    ["clone", "--l", "3"],
    ["clone", "--lose-noise", "1"],
    ["verify-ame", "--source", "file"],
    ["loss-demo", "--tol", "0"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, rep, err = run(capsys, *argv)
    assert code == 2 and rep is None and err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify-ame", "--source", "nowhere"])
    assert exc.value.code == 2


def test_clone_uniform_matches_reference(capsys):
    code, rep, _ = run(capsys, "clone", "--uniform")
    assert code == 0 and rep["matches_reference_qubit_state"] is True
    assert rep["max_hiding_deviation"] < 1e-10


def test_clone_seed_42(capsys):
    code, rep, _ = run(capsys, "clone", "--seed", "42", "--l", "2")
    assert code == 0 and rep["recovery_fidelity"] >= 1 - 1e-10
    assert rep["matches_reference_qubit_state"] is None
    assert set(rep["hiding_deviations"]) == {"A", "S1", "S2"}
    assert abs(rep["other_signal_purities"]["S1"] - 0.5) < 1e-10


def test_clone_loss(capsys):
    code, rep, _ = run(capsys, "clone", "--lose-noise", "2", "--d", "3", "--n", "3")
    assert code == 0
    assert rep["loss_recovery"]["fidelity"] >= 1 - 1e-10
    assert rep["loss_recovery"]["sacrificed_deviation"]["S2"] < 1e-10


def test_clone_file_round_trip(capsys, tmp_path):
    psi = PureState.from_vector(np.array([0.6, 0.8j]), [2], ["A"])
    src, enc_path = tmp_path / "in.json", tmp_path / "enc.json"
    save_state(src, psi)
    code, rep, _ = run(capsys, "clone", "--input", str(src), "--save-encrypted", str(enc_path))
    assert code == 0 and rep["input"] == "file"
    enc = load_state(enc_path)
    assert enc.layout.roles == ("A", "S1", "S2", "N1", "N2")


def test_clone_bad_files(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dims": [2], "roles": [None], "amplitudes": [[2, 0], [0, 0]]}))
    assert run(capsys, "clone", "--input", str(bad))[0] == 2
    bad.write_text("[]")
    assert run(capsys, "clone", "--input", str(bad))[0] == 2
    wrong_dim = tmp_path / "q.json"
    save_state(wrong_dim, PureState.from_vector(np.ones(3) / np.sqrt(3), [3]))
    assert run(capsys, "clone", "--input", str(wrong_dim))[0] == 2
    assert run(capsys, "clone", "--input", str(tmp_path / "missing.json"))[0] == 2


def test_verify_ame_encrypted(capsys):
    code, rep, _ = run(capsys, "verify-ame", "--d", "3")
    assert code == 0 and rep["report"]["is_ame"] is True
    code, rep, _ = run(capsys, "verify-ame", "--d", "2", "--n", "3")
    assert code == 0 and rep["report"]["is_ame"] is False
    assert abs(rep["worst_offender"]["deviation"] - 0.125) < 1e-12
    assert list(rep["report"]) == ["m", "d", "tolerance", "marginals", "is_ame"]


@pytest.mark.parametrize("source", ["partial", "codeword"])
def test_verify_ame_six_registers(capsys, source):
    code, rep, _ = run(capsys, "verify-ame", "--source", source, "--d", "2")
    assert code == 0 and rep["report"]["is_ame"] and rep["report"]["m"] == 6
    assert len(rep["report"]["marginals"]) == 20
    assert rep.get("codeword_basis") == ("fourier" if source == "codeword" else None)


def test_verify_ame_file(capsys, tmp_path):
    good, bad = tmp_path / "good.json", tmp_path / "bad.json"
    run(capsys, "clone", "--uniform", "--save-encrypted", str(good))
    run(capsys, "clone", "--uniform", "--n", "3", "--save-encrypted", str(bad))
    assert run(capsys, "verify-ame", "--source", "file", "--file", str(good))[0] == 0
    code, rep, _ = run(capsys, "verify-ame", "--source", "file", "--file", str(bad))
    assert code == 1 and rep["passed"] is False


def test_qss_table(capsys):
    code, rep, _ = run(capsys, "qss", "--d", "2", "--secrets", "5")
    assert code == 0 and rep["threshold_structure"]
    assert rep["counts_by_size"] == {
        "1": {"authorized": 0, "unauthorized": 5},
        "2": {"authorized": 0, "unauthorized": 10},
        "3": {"authorized": 10, "unauthorized": 0},
        "4": {"authorized": 5, "unauthorized": 0},
    }
    row = next(r for r in rep["subsets"] if r["players"] == ["S1", "N1", "N2"])
    assert row["authorized"] and row["random_secret_min_fidelity"] > 1 - 1e-9


def test_qss_qutrits(capsys):
    code, rep, _ = run(capsys, "qss", "--d", "3", "--secrets", "3")
    assert code == 0 and len(rep["subsets"]) == 30


def test_loss_demo(capsys):
    code, rep, _ = run(capsys, "loss-demo", "--d", "3", "--n", "3")
    assert code == 0 and len(rep["cases"]) == 6
    assert min(c["fidelity"] for c in rep["cases"]) >= 1 - 1e-10


@pytest.mark.parametrize("argv", [
    ["clone", "--seed", "7", "--lose-noise", "2"],
    ["qss", "--d", "2", "--seed", "3", "--secrets", "4"],
    ["loss-demo", "--seed", "1"],
])
def test_reports_are_deterministic(capsys, argv):
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_out_and_human(capsys, tmp_path):
    path = tmp_path / "r.json"
    code = main(["verify-algebra", "--d", "2", "--human", "--out", str(path)])
    assert code == 0 and capsys.readouterr().out == ""
    text = path.read_text()
    assert text.startswith("{\n  ") and json.loads(text)["passed"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qudit_cloning", "verify-algebra", "--d", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["passed"]
