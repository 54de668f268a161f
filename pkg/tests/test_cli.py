import json

import numpy as np
import pytest

from uuqc.channels import KrausChannel
from uuqc.cli import dispatch
from uuqc.densecode import SharedState, optimal_protocol, optimal_receiver
from uuqc.entanglement import ues
from uuqc.formats import (
    channel_to_doc,
    code_to_doc,
    dump_json,
    ket_to_doc,
    matrix_to_doc,
)
from uuqc.linalg import random_unitary, tensor_product
from uuqc.qec import CodeSpec

from builders import PAULI_X, repetition_code, single_qubit_on


def write(path, doc):
    path.write_text(dump_json(doc))
    return str(path)


@pytest.fixture
def phi2_file(tmp_path):
    return write(tmp_path / "phi2.json", ket_to_doc(ues(2)))


def run(capsys, argv):
    code = dispatch(argv)
    captured = capsys.readouterr()
    report = json.loads(captured.out) if captured.out else None
    return code, report, captured.err


def test_schmidt_report(capsys, phi2_file):
    code, report, err = run(capsys, ["schmidt", phi2_file, "--dims", "2,2"])
    assert code == 0
    np.testing.assert_allclose(report["coefficients"], [0.70710678, 0.70710678], atol=1e-8)
    assert report["rank"] == 2
    assert "rank 2" in err


def test_check_uum_positive_and_negative(capsys, tmp_path):
    u_file = write(tmp_path / "u.json", matrix_to_doc(random_unitary(3, 5)))
    code, report, _ = run(capsys, ["check-uum", u_file])
    assert code == 0 and report["is_uum"]
    assert report["probability"] == pytest.approx(1.0, abs=1e-9)

    f_file = write(tmp_path / "f.json", matrix_to_doc(np.diag([1.0, 0.5])))
    code, report, _ = run(capsys, ["check-uum", f_file])
    assert code == 3 and not report["is_uum"]
    assert report["residual"] >= 0.0


def test_check_uuqc_and_refine(capsys, tmp_path):
    u = random_unitary(2, 9)
    t1 = np.sqrt(0.3) * np.eye(2) / np.sqrt(2)
    t2 = np.array([[0.1, 0.5], [0.3, 0.2]], dtype=complex)
    t2 *= np.sqrt(0.5) / np.linalg.norm(t2)
    ch = KrausChannel((tensor_product(u, t1), tensor_product(u, t2)))
    ch_file = write(tmp_path / "ch.json", channel_to_doc(ch))
    code, report, _ = run(
        capsys, ["check-uuqc", ch_file, "--env-in", "2", "--env-out", "2"]
    )
    assert code == 0 and report["is_uuqc"]
    assert report["total_probability"] == pytest.approx(0.8, abs=1e-9)

    out_file = tmp_path / "refined.json"
    code, report, _ = run(
        capsys,
        ["refine", ch_file, "--env-in", "2", "--env-out", "2", "--out", str(out_file)],
    )
    assert code == 0
    # the refine report is itself a channel document: pipe it straight back
    code, report, _ = run(
        capsys, ["check-uuqc", str(out_file), "--env-in", "2", "--env-out", "2"]
    )
    assert code == 0 and report["is_uuqc"]
    assert report["total_probability"] == pytest.approx(0.8, abs=1e-9)

    bad = write(tmp_path / "bad.json", channel_to_doc(KrausChannel((np.diag([1.0, 0.5]),))))
    code, report, _ = run(capsys, ["refine", bad])
    assert code == 3 and not report["is_uuqc"]


def test_to_ues_and_teleport(capsys, tmp_path, phi2_file):
    u_file = write(tmp_path / "u.json", channel_to_doc(KrausChannel((random_unitary(2, 3),))))
    code, report, _ = run(capsys, ["to-ues", u_file])
    assert code == 0
    assert report["success_weight"] == pytest.approx(1.0, abs=1e-9)

    code, report, _ = run(capsys, ["teleport", phi2_file, "--dims", "2,2", "--d", "2"])
    assert code == 0
    assert report["probability"] == pytest.approx(1.0, abs=1e-9)

    lam = np.sqrt([0.8, 0.2])
    shared = np.zeros(4, dtype=complex)
    shared[0], shared[3] = lam[0], lam[1]
    s_file = write(tmp_path / "shared.json", ket_to_doc(shared))
    code, report, _ = run(capsys, ["teleport", s_file, "--dims", "2,2", "--d", "2"])
    assert report["probability"] == pytest.approx(0.4, abs=1e-9)


def test_kl_check_exit_codes(capsys, tmp_path):
    code_file = write(tmp_path / "code.json", code_to_doc(repetition_code()))
    flips = KrausChannel(
        tuple([0.5 * np.eye(8)] + [0.5 * single_qubit_on(PAULI_X, w) for w in range(3)])
    )
    flips_file = write(tmp_path / "flips.json", channel_to_doc(flips))
    code, report, _ = run(capsys, ["kl-check", code_file, flips_file])
    assert code == 0 and report["correctable"]
    h = report["h"]
    assert h["rows"] == 4
    diag = [h["data"][i * 4 + i][0] for i in range(4)]
    np.testing.assert_allclose(diag, [0.25] * 4, atol=1e-10)

    z_noise = KrausChannel(
        (np.eye(8) / np.sqrt(2), single_qubit_on(np.diag([1, -1]).astype(complex), 0) / np.sqrt(2))
    )
    z_file = write(tmp_path / "z.json", channel_to_doc(z_noise))
    code, report, _ = run(capsys, ["kl-check", code_file, z_file])
    assert code == 3 and not report["correctable"]


def test_ec_prob(capsys, tmp_path):
    code_file = write(tmp_path / "triv.json", code_to_doc(CodeSpec(np.eye(2, dtype=complex))))
    noise = KrausChannel((np.diag([1.0, 0.8]).astype(complex),))
    noise_file = write(tmp_path / "noise.json", channel_to_doc(noise))
    code, report, _ = run(capsys, ["ec-prob", code_file, noise_file])
    assert code == 0
    assert report["probability"] == pytest.approx(0.64, abs=1e-9)
    assert report["method"] == "pure-exact"
    assert report["certainty_condition"] is False


def test_dense_code_stats(capsys):
    code, report, _ = run(
        capsys,
        ["dense-code", "--D", "2", "--lambdas2", "0.8,0.2", "--trials", "100000", "--seed", "7"],
    )
    assert code == 0
    assert report["capacity"] == pytest.approx(0.4, abs=1e-12)
    sigma = np.sqrt(0.4 * 0.6 / 100000)
    assert abs(report["pooled_rate"] - 0.4) <= 3 * sigma
    assert report["decode_errors"] == 0
    assert report["bound_check"]["form_holds"]


def test_verify_dc(capsys, tmp_path):
    state = SharedState.from_squares([0.8, 0.2])
    prot = optimal_protocol(state)
    enc_file = write(tmp_path / "enc.json", channel_to_doc(KrausChannel(prot.encoders)))
    bob_file = write(tmp_path / "bob.json", matrix_to_doc(optimal_receiver(prot)))
    code, report, _ = run(
        capsys, ["verify-dc", enc_file, bob_file, "--lambdas2", "0.8,0.2"]
    )
    assert code == 0
    assert report["form_holds"] and report["bound_satisfied"]
    assert report["success_probability"] == pytest.approx(0.4, abs=1e-9)

    code, report, _ = run(
        capsys, ["verify-dc", enc_file, bob_file, "--lambdas2", "0.9,0.1"]
    )
    # the optimal receiver for one spectrum is not the scaled identity form
    # for another: the verdict must turn negative
    assert code == 3


def test_invalid_inputs_exit_one(capsys, tmp_path):
    code, _, err = run(capsys, ["schmidt", str(tmp_path / "missing.json"), "--dims", "2,2"])
    assert code == 1 and "missing.json" in err

    broken = tmp_path / "broken.json"
    broken.write_text('{"rows": 2, "cols": 2, "data": [[1.0, 0.0]]}')
    code, _, err = run(capsys, ["schmidt", str(broken), "--dims", "2,2"])
    assert code == 1 and "data" in err

    code, _, _ = run(capsys, ["schmidt"])
    assert code == 1

    code, _, _ = run(capsys, ["no-such-command"])
    assert code == 1


def test_reports_byte_identical(tmp_path):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    argv = ["dense-code", "--D", "2", "--lambdas2", "0.8,0.2", "--trials", "20000",
            "--seed", "13", "--out"]
    assert dispatch(argv + [str(out1)]) == 0
    assert dispatch(argv + [str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
