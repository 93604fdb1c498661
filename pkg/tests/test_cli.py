import json

import pytest

from jpsq.cli import main, parse_grid, ConfigError

SMALL = ["--builtin", "fig3b", "--n-max", "3"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestParsing:
    def test_linspace(self):
        assert parse_grid("dPhiZ=-0.002:0.002:5") == ("dPhiZ", [-0.002, -0.001, 0.0, 0.001, 0.002])

    def test_list(self):
        assert parse_grid("Qb=0,0.25") == ("Qb", [0.0, 0.25])

    @pytest.mark.parametrize("bad", ["Qb", "Qb=0:1:0", "Qb=", "Qb=a,b"])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            parse_grid(bad)


class TestCommands:
    def test_spectrum(self, capsys):
        code, out, _ = run(capsys, "spectrum", *SMALL, "--k", "3", "--bias", "Qb=0.5")
        assert code == 0
        doc = json.loads(out)
        assert len(doc["eigenvalues_GHz"]) == 3
        prov = doc["provenance"]
        assert prov["command"] == "spectrum" and prov["config"]["bias"]["Qb"] == 0.5
        assert prov["config"]["circuit"]["name"] == "fig3b_caseA"

    def test_sweep_worker_determinism(self, capsys, tmp_path):
        outs = []
        for w in ("1", "2"):
            p = tmp_path / f"s{w}.csv"
            code, _, _ = run(capsys, "--workers", w, "sweep", *SMALL, "--grid", "Qb=0:0.5:3", "--grid", "dPhiZ=0,0.1",
                             "--parity", "0", "--parity", "1", "--k", "2", "--out", str(p))
            assert code == 0
            outs.append(p.read_text())
        assert outs[0] == outs[1]
        body = [l for l in outs[0].splitlines() if not l.startswith("#")]
        assert body[0].startswith("Qb,dPhiZ,") and len(body) == 1 + 3 * 2 * 2

    def test_sweep_provenance_reruns(self, capsys):
        code, out, _ = run(capsys, "sweep", *SMALL, "dPhiZ=0,0.1", "--k", "2")
        assert code == 0
        head = json.loads("".join(l[2:] for l in out.splitlines() if l.startswith("# ")))
        assert head["config"]["grid"] == {"dPhiZ": [0.0, 0.1]} and head["config"]["n_max"] == 3

    def test_sweep_failed_point(self, capsys):
        code, out, err = run(capsys, "sweep", *SMALL, "--grid", "Qb=0,nan,0.2", "--k", "2")
        assert code == 3
        assert json.loads(err)["error"] == "PointFailures"
        rows = [l for l in out.splitlines() if not l.startswith("#")]
        assert rows[2].endswith("failed") and rows[1].endswith("ok") and rows[3].endswith("ok")

    @pytest.mark.parametrize(
        "argv",
        [
            ["sweep", *SMALL],
            ["sweep", *SMALL, "--grid", "Qb=0:1:0"],
            ["sweep", *SMALL, "--grid", "nope=0,1"],
            ["spectrum", "--n-max", "3"],
            ["--workers", "0", "spectrum", *SMALL],
        ],
    )
    def test_config_errors(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2
        doc = json.loads(err.strip().splitlines()[-1])
        assert doc["exit_code"] == 2 and doc["message"]

    def test_runtime_error_json(self, capsys):
        code, _, err = run(capsys, "spectrum", *SMALL, "--k", "0")
        assert code == 1 and json.loads(err)["error"] == "ValueError"

    def test_analytic(self, capsys):
        code, out, _ = run(capsys, "analytic", "--beta", "15", "--phiDelta", "0.3", "--EJa", "29.8", "--CJa", "1.44", "--CI", "60")
        assert code == 0
        doc = json.loads(out)
        assert doc["intermediates"]["y_Ja"] == pytest.approx(5.07, abs=0.01)
        assert "provenance" in doc

    def test_compare_analytic_only(self, capsys):
        code, out, _ = run(capsys, "compare", "--case", "A", "--skip-numeric")
        assert code == 0
        doc = json.loads(out)
        assert "analytic" in json.dumps(doc)

    def test_coherence(self, capsys):
        code, out, _ = run(capsys, "coherence", "--case", "A")
        assert code == 0
        doc = json.loads(out)
        assert "t1" in json.dumps(doc)

    def test_compose_emit_round_trip(self, capsys, tmp_path):
        code, out, _ = run(capsys, "compose", "--emit")
        assert code == 0 and "ZZII" in out
        p = tmp_path / "m.txt"
        p.write_text(out)
        code, out2, _ = run(capsys, "compose", "--model", "pauli", "--pauli", str(p))
        assert code == 0 and json.loads(out2)

    def test_config_file_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("spectrum:\n  k: 2\n")
        code, out, _ = run(capsys, "--config", str(cfg), "spectrum", *SMALL)
        assert code == 0 and len(json.loads(out)["eigenvalues_GHz"]) == 2
