import json
from pathlib import Path

import pytest

from lelsieve.cli import main
from lelsieve.config import Config
from lelsieve.exceptions import UsageError


def run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, str, str]:
    code = main([*argv, "--threads", "1"])
    out, err = capsys.readouterr()
    return code, out, err


def test_fp_exact(capsys: pytest.CaptureFixture[str]):
    code, out, _ = run(capsys, "fp", "--sap", "RL", "--exact")
    assert code == 0
    result = json.loads(out)
    assert result["exact"] == "1/8"
    assert result["patch_size"] == 8


def test_fp_from_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    f = tmp_path / "saps.txt"
    f.write_text("RL\nRULD\n")
    code, out, _ = run(capsys, "fp", "--file", str(f), "--precision", "64")
    assert code == 0
    assert [r["ell"] for r in json.loads(out)] == [2, 4]


def test_domain_errors_exit_one(capsys: pytest.CaptureFixture[str]):
    code, _, err = run(capsys, "fp", "--sap", "RU")
    assert code == 1
    assert "NotClosed" in err


@pytest.mark.parametrize(
    "argv",
    [
        ("fp",),
        ("fp", "--sap", "RL", "--precision", "20"),
        ("frobnicate",),
        ("sweep", "--max-len", "5"),
        ("finite", "torus-check", "--torus", "2"),
        (),
    ],
)
def test_usage_errors_exit_two(capsys: pytest.CaptureFixture[str], argv: tuple):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("lel: usage error:")


def test_sweep_csv(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    out_file = tmp_path / "table.csv"
    code, _, _ = run(capsys, "sweep", "--max-len", "4", "--precision", "53", "--out", str(out_file))
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "L,count,S"
    assert lines[1].startswith("2,4,0.5")
    code, out, _ = run(capsys, "fit", "--table", str(out_file))
    assert code == 1
    assert out == ""


def test_sweep_with_cache(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    cache = str(tmp_path / "c.lel.jsonl")
    _, out, _ = run(capsys, "sweep", "--max-len", "4", "--precision", "53", "--cache", cache)
    assert json.loads(out)["computed"] == 3
    _, out, _ = run(capsys, "sweep", "--max-len", "4", "--precision", "53", "--cache", cache)
    assert json.loads(out)["computed"] == 0


def test_series_text(capsys: pytest.CaptureFixture[str]):
    code, out, _ = run(capsys, "series", "--sap", "RL", "--order", "6", "--format", "text")
    assert code == 0
    assert out.splitlines()[-1].split() == ["6", "70"]


def test_zeta_tilde(capsys: pytest.CaptureFixture[str]):
    _, out, _ = run(capsys, "zeta-tilde", "--order", "4")
    result = json.loads(out)
    assert result["zeta_tilde"] == ["1", "0", "2", "0", "11"]
    assert result["mu_tilde"] == ["1", "0", "-2", "0", "-7"]


def test_dump_c(capsys: pytest.CaptureFixture[str]):
    _, out, _ = run(capsys, "dump-c", "--radius", "1")
    assert out.splitlines() == ["dx,dy,a,b", "0,0,0,0", "1,0,-1,0", "1,1,0,-4"]


def test_shapes(capsys: pytest.CaptureFixture[str]):
    _, out, _ = run(capsys, "shapes", "--max-len", "8", "--format", "csv")
    assert out.splitlines()[1:] == ["2,4,2", "4,8,1", "6,24,2", "8,112,7"]


def test_oracle_count(capsys: pytest.CaptureFixture[str]):
    _, out, _ = run(capsys, "oracle", "count", "--sap", "RL", "--len", "4")
    assert json.loads(out)["count"] == 7


def test_oracle_histogram(capsys: pytest.CaptureFixture[str]):
    _, out, _ = run(capsys, "oracle", "hist", "--len", "4")
    assert json.loads(out)["total"] == 36


def test_finite_zeta_from_graph_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    f = tmp_path / "k3.json"
    f.write_text(json.dumps({"n": 3, "edges": [[0, 1], [1, 0], [1, 2], [2, 1], [0, 2], [2, 0]]}))
    _, out, _ = run(capsys, "finite", "zeta", "--graph", str(f), "--order", "5")
    result = json.loads(out)
    assert result["zeta"] == ["1", "0", "3", "2", "9", "12"]
    assert result["lambda"] == ["0", "0", "6", "6", "18", "30"]


def test_finite_viennot_needs_support(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    code, _, _ = run(capsys, "finite", "viennot", "--torus", "8")
    assert code == 2


def test_torus_check(capsys: pytest.CaptureFixture[str]):
    _, out, _ = run(capsys, "finite", "torus-check", "--torus", "4", "--precision", "64")
    result = json.loads(out)
    assert float(result["lhs"]) == pytest.approx(float(result["rhs"]), rel=1e-12)


def test_monte_carlo(capsys: pytest.CaptureFixture[str]):
    _, out, _ = run(capsys, "mc", "--sap", "RL", "--samples", "50", "--max-len", "50", "--seed", "3")
    result = json.loads(out)
    assert result["samples"] == 50
    assert result["seed"] == 3


def test_verify_quick(capsys: pytest.CaptureFixture[str]):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert all(c["passed"] for c in json.loads(out))


def test_config_validation():
    with pytest.raises(UsageError):
        Config(precision=20).validate()
    with pytest.raises(UsageError):
        Config(output_format="xml").validate()
    with pytest.raises(UsageError):
        Config(threads=0).validate()
    assert Config(threads=2).validate().threads == 2


def test_cache_from_environment(monkeypatch: pytest.MonkeyPatch, tmp_path: Path):
    monkeypatch.setenv("LEL_CACHE", str(tmp_path / "env.lel.jsonl"))
    assert Config().cache == tmp_path / "env.lel.jsonl"
    monkeypatch.delenv("LEL_CACHE")
    assert Config().cache is None


@pytest.mark.parametrize("argv", [("fp", "--sap", ""), ("series", "--sap", "  "), ("mc", "--sap", "")])
def test_empty_polygon_is_a_domain_error(capsys: pytest.CaptureFixture[str], argv: tuple):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "EmptyInput" in err
