import json
import shutil

import pytest

from cli import EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK, main
from conftest import NETWORK_DIR
from core.crn.reconstruct import VERDICT_STABLE


def _network(name: str) -> str:
    return str(NETWORK_DIR / name)


class TestInfo:
    def test_text(self, capsys):
        assert main(["info", _network("example6.crn")]) == EXIT_OK
        out = capsys.readouterr().out
        assert "linkage classes: 3" in out
        assert "deficiency: 1" in out
        assert "complex balanced at @equilibrium: False" in out

    def test_json(self, capsys):
        assert main(["info", _network("example2.crn"), "--format", "json"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["deficiency"] == 1
        assert report["weakly_reversible"] is False

    def test_parse_error(self, tmp_path, capsys):
        path = tmp_path / "bad.crn"
        path.write_text("X1 -> X2 ; k = 1\nX2 -> X1 ; k = -2\n")
        assert main(["info", str(path)]) == EXIT_ERROR
        assert "line 2" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["info", "does/not/exist.crn"]) == EXIT_ERROR
        assert "not found" in capsys.readouterr().err


class TestConservedAndEquilibrium:
    def test_conserved(self, capsys):
        assert main(["conserved", _network("example4.crn")]) == EXIT_OK
        out = capsys.readouterr().out
        assert "q = 2" in out
        assert "non-free: X2, X3" in out

    def test_equilibrium(self, capsys):
        assert main(["equilibrium", _network("example4.crn"), "--x0", "0.6,0.6,0.4"]) == EXIT_OK
        values = dict(line.split(" = ") for line in capsys.readouterr().out.splitlines())
        assert float(values["X1"]) == pytest.approx(0.5, abs=1e-9)
        assert float(values["residual"]) < 1e-9


class TestReconstruct:
    def test_writes_certificate(self, tmp_path):
        out = tmp_path / "certs" / "example2.json"
        assert main(["reconstruct", _network("example2.crn"), "--out", str(out)]) == EXIT_OK
        certificate = json.loads(out.read_text())
        assert certificate["verdict"] == VERDICT_STABLE
        assert certificate["reconstruction"]["species"] == ["Xhat1"]

    def test_text_summary(self, capsys):
        assert main(["reconstruct", _network("example4.crn"), "--format", "text"]) == EXIT_OK
        out = capsys.readouterr().out
        assert f"verdict: {VERDICT_STABLE}" in out
        assert "reconstruction:" in out

    def test_bad_epsilon(self, capsys):
        assert main(["reconstruct", _network("example2.crn"), "--epsilon", "1.5"]) == EXIT_ERROR
        assert "invalid arguments" in capsys.readouterr().err

    def test_unstable_is_inconclusive(self, tmp_path):
        path = tmp_path / "unstable.crn"
        path.write_text("@equilibrium = (1)\n2 X1 -> 3 X1 ; k = 1\nX1 -> 0 ; k = 1\n")
        assert main(["reconstruct", str(path), "--out", str(tmp_path / "unstable.json")]) == EXIT_INCONCLUSIVE

    def test_batch(self, tmp_path, capsys):
        networks = tmp_path / "networks"
        networks.mkdir()
        for name in ("example2.crn", "example4.crn"):
            shutil.copy(NETWORK_DIR / name, networks / name)
        out = tmp_path / "out"
        assert main(["reconstruct", str(networks), "--out", str(out)]) == EXIT_OK
        assert sorted(p.name for p in out.glob("*.json")) == ["example2.json", "example4.json"]
        assert f"example4.crn  {VERDICT_STABLE}" in capsys.readouterr().out


class TestVerify:
    def test_published_example2(self, capsys):
        assert main(["verify", _network("example2_published.json")]) == EXIT_OK
        assert f"verdict: {VERDICT_STABLE}" in capsys.readouterr().out

    def test_published_example1_is_inconclusive(self, capsys):
        assert main(["verify", _network("example1_published.json")]) == EXIT_INCONCLUSIVE
        out = capsys.readouterr().out
        assert "X1^2" in out
        assert "expected -0.02" in out

    def test_round_trip(self, tmp_path):
        out = tmp_path / "example4.json"
        assert main(["reconstruct", _network("example4.crn"), "--out", str(out)]) == EXIT_OK
        assert main(["verify", str(out)]) == EXIT_OK


class TestSimulate:
    def test_csv_to_stdout(self, capsys):
        code = main(["simulate", _network("example2.crn"), "--t-end", "0.1", "--dt", "0.05"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# basin_hint: true"
        assert "# trajectory: original" in lines
        assert "t,x1,x2,G,cons_residual" in lines

    def test_both_to_directory(self, tmp_path, capsys):
        code = main([
            "simulate", _network("example2.crn"), "--target", "both",
            "--t-end", "1", "--dt", "0.01", "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        assert (tmp_path / "example2_original.csv").is_file()
        assert (tmp_path / "example2_reverse.csv").is_file()
        assert "# equivalence_gap:" in capsys.readouterr().out

    def test_reconstruction_options_reach_the_reverse_run(self, capsys):
        code = main([
            "simulate", _network("example2.crn"), "--target", "reverse",
            "--q", "2", "--t-end", "0.1", "--dt", "0.05",
        ])
        assert code == EXIT_ERROR
        assert "[conservation]" in capsys.readouterr().err

    @pytest.mark.parametrize("flag", ["--dt", "--t-end"])
    def test_rejects_nonpositive_steps(self, flag):
        assert main(["simulate", _network("example2.crn"), flag, "0"]) == EXIT_ERROR
