import json
import subprocess
import sys

import pytest

from conftest import SEEDS
from qscatter.coeff_ring import QRational, from_string
from qscatter.cli import BUDGET_ERROR, FAILED, INPUT_ERROR, OK, run

PENT = str(SEEDS / "pentagon.json")
KRON = str(SEEDS / "kronecker.json")


def quiet(argv, capsys=None):
    status, art = run(argv)
    if capsys is not None:
        capsys.readouterr()
    return status, art


def test_scatter_pentagon(capsys):
    status, art = quiet(["scatter", "--seed", PENT, "--order", "6"], capsys)
    assert status == OK
    res = art["result"]
    assert res["num_walls"] == 3 and res["consistency"]["pass"]
    assert art["provenance"]["inputs"]["seed_data"]["rank"] == 2


def test_theta_kernel_vector(capsys):
    status, art = quiet(["theta", "--seed", PENT, "--p", "0,0"], capsys)
    assert status == OK
    assert art["result"]["theta"] == [{"exponent": [0, 0], "coeff": "1"}]


def test_theta_negative_vector_needs_equals(capsys):
    status, art = quiet(["theta", "--seed", PENT, "--p=-1,0", "--Q", "713/1000,-291/1000"], capsys)
    assert status == OK
    assert [t["exponent"] for t in art["result"]["theta"]] == [[-1, 0], [0, 1]]


def test_alpha(capsys):
    status, art = quiet(["alpha", "--seed", PENT, "--order", "6", "--p", "1,0", "--p=-1,0", "--n", "0,1"], capsys)
    assert status == OK
    # theta_{f_1} theta_{-f_1} = 1 + q theta_{f_2}
    assert from_string(art["result"]["alpha"]) == QRational.qpow(1)


@pytest.mark.parametrize("argv", [
    ["verify", "tropfrob", "--seed", PENT, "--limit", "6"],
    ["verify", "scatdisks", "--seed", KRON],
    ["verify", "frobenius-classical", "--seed", PENT, "--p", "1,1", "--prime", "3", "--order", "5"],
    ["verify", "frobenius-quantum", "--seed", PENT, "--p", "1,0", "--root-order", "3", "--order", "6",
     "--Q", "291/1000,-713/1000", "--trees", "--tree-budget", "2"],
    ["verify", "chamber", "--seed", PENT, "--word", "1,0"],
    ["verify", "chamber", "--seed", PENT, "--word", "0", "--side", "A", "--principal"],
])
def test_verify_commands_pass(argv, capsys):
    status, art = quiet(argv, capsys)
    assert status == OK, art.get("error")


@pytest.mark.parametrize("argv,code", [
    (["verify", "frobenius-quantum", "--seed", PENT, "--p", "1,0", "--root-order", "4"], INPUT_ERROR),
    (["scatter", "--seed", "/nonexistent/seed.json"], INPUT_ERROR),
    (["verify", "chamber", "--seed", PENT, "--word", "0,0"], INPUT_ERROR),
    (["theta", "--seed", PENT, "--p", "1,0,0"], INPUT_ERROR),
    (["theta", "--seed", PENT, "--p", "1,0", "--Q", "0,1/2"], BUDGET_ERROR),
    (["scatter"], INPUT_ERROR),
])
def test_error_codes(argv, code, capsys):
    status, art = quiet(argv, capsys)
    assert status == code
    if art is not None:
        assert art["status"] == code and art["error"]["code"] == code


def test_deterministic_and_out_file(tmp_path, capsys):
    argv = ["product", "--seed", KRON, "--p=-1,0", "--p=0,-1", "--order", "4"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert quiet(argv + ["--out", str(a)], capsys)[0] == OK
    assert quiet(argv + ["--out", str(b)], capsys)[0] == OK
    assert a.read_text() == b.read_text()
    data = json.loads(a.read_text())
    assert data["command"] == "product" and data["status"] == OK


def test_failed_status_constant():
    assert (OK, FAILED, INPUT_ERROR, BUDGET_ERROR) == (0, 1, 2, 3)


def test_console_entry_point(tmp_path):
    out = tmp_path / "m.json"
    proc = subprocess.run([sys.executable, "-m", "qscatter.cli", "mid-theta", "--seed", PENT, "--p=-1,-1",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    data = json.loads(out.read_text())
    assert {"exponent": [-2, 0], "coeff": "2"} in data["result"]["laurent"]
