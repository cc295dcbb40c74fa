from __future__ import annotations

import json
import subprocess
import sys

import pytest
from conftest import CORPUS

from prodint.cli import run

P32 = str(CORPUS / "p32_guarded.tiny")
P33 = str(CORPUS / "p33_offset3.tiny")
POWER = [
    "--domains", "interval,diff", "--product", "power", "--reductions", "intervals-to-diff",
    "--power-pivot", "l", "--power-exponent", "interval-atoms", "--power-atoms", "(-inf,2];[3,+inf)",
]


def call(capsys, *argv):
    code = run(["analyze", *argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exit_codes(capsys, tmp_path):
    assert call(capsys, P32, "--domains", "interval,diff", "--reductions", "intervals-to-diff")[0] == 0
    assert call(capsys, P32, "--domains", "interval,diff", "--product", "cartesian")[0] == 1
    assert call(capsys, P33, *POWER)[0] == 0
    assert call(capsys, str(tmp_path / "missing.tiny"))[0] == 2
    bad = tmp_path / "bad.tiny"
    bad.write_text("x := ;\n")
    code, _, err = call(capsys, str(bad))
    assert code == 2 and "1:" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["--domains", "octagon"],
        ["--product", "power"],
        ["--product", "power", "--power-pivot", "l", "--power-exponent", "interval-atoms", "--power-atoms", "[3,2]"],
        ["--widening-delay", "-2"],
    ],
)
def test_bad_configuration_exits_2(capsys, argv):
    assert call(capsys, P32, *argv)[0] == 2


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["analyze", P32, "--frobnicate"])
    assert exc.value.code == 2


def test_text_and_json_agree(capsys):
    args = [P33, "--domains", "interval,diff", "--reductions", "intervals-to-diff"]
    _, text, _ = call(capsys, *args)
    _, raw, _ = call(capsys, *args, "--format", "json")
    rep = json.loads(raw)
    assert set(rep) == {"program", "config", "points", "obligations", "counters"}
    for o in rep["obligations"]:
        assert f"{o['line']}:{o['col']} {o['kind']} {o['verdict']}" in text
    assert [o["verdict"] for o in rep["obligations"]] == ["PROVED", "UNKNOWN"]


def test_output_is_deterministic(capsys, tmp_path):
    out = tmp_path / "r.json"
    first = call(capsys, P33, *POWER, "--format", "json", "--out", str(out))[1]
    second = call(capsys, P33, *POWER, "--format", "json")[1]
    assert first == second == out.read_text()


def test_oracle_field(capsys):
    code, raw, _ = call(capsys, P32, "--domains", "interval,diff", "--reductions", "intervals-to-diff",
                        "--oracle", "--format", "json")
    rep = json.loads(raw)
    assert code == 0 and rep["oracle"]["violations"] == 0 and rep["oracle"]["checked"] > 0


def test_arrays_flag(capsys):
    code, text, _ = call(capsys, str(CORPUS / "ccl11_packets.tiny"), "--domains", "interval,parity",
                         "--reductions", "interval-parity", "--arrays", "index-parity", "--widening-delay", "8")
    assert "A: {o -> [-16..-16], e -> [0..0]}" in text


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "prodint.cli", "analyze", P32], capture_output=True, text=True)
    assert proc.returncode == 1 and "obligations:" in proc.stdout
