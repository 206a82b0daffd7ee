"""CLI contract: subcommands, config precedence, exit codes, idempotence."""

import csv
import json
import math

import pytest

from nodalbubbles.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_RESOLUTION,
    RunConfig,
    load_run_config,
    main,
)
from nodalbubbles.errors import ConfigurationError
from conftest import SADDLE_VALUE


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


class TestRunConfig:
    def test_defaults(self):
        c = RunConfig()
        assert c.dim == 3 and c.radius == 1.0
        assert c.eps == (0.1, 0.05, 0.025)
        assert c.grid_nz == 513 and c.grid_nr == 257

    def test_eps_sorted_descending(self):
        c = RunConfig(eps=(0.025, 0.1, 0.05))
        assert c.eps == (0.1, 0.05, 0.025)

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            RunConfig(dim=2)
        with pytest.raises(ConfigurationError):
            RunConfig(radius=-1.0)
        with pytest.raises(ConfigurationError):
            RunConfig(eps=(1.5,))
        with pytest.raises(ConfigurationError):
            RunConfig(format="xml")
        with pytest.raises(ConfigurationError):
            RunConfig(center=(0.0, 0.0))  # wrong length for dim=3

    def test_load_precedence(self, tmp_path):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text(json.dumps({"radius": 2.0, "seed": 5}))
        c = load_run_config(str(cfg_file), {"seed": 9, "out": None})
        assert c.radius == 2.0   # file beats default
        assert c.seed == 9       # flag beats file

    def test_load_rejects_unknown_keys(self, tmp_path):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text(json.dumps({"radius": 2.0, "bogus": 1}))
        with pytest.raises(ConfigurationError, match="bogus"):
            load_run_config(str(cfg_file), {})


class TestConstantsCommand:
    def test_report_values(self, tmp_path):
        rc = main(["constants", "--dim", "3", "--out", str(tmp_path)])
        assert rc == EXIT_OK
        doc = read_json(tmp_path / "constants.json")
        rep = doc["report"]
        assert rep["omegaN"] == pytest.approx(2.1368320341615211, rel=1e-9)
        assert rep["cN"] == pytest.approx(1.0 / 128.0, rel=1e-9)
        assert rep["values_implementer_derived"] is True
        assert doc["meta"]["command"] == "constants"

    def test_dim4_quad_error(self, tmp_path):
        rc = main(["constants", "--dim", "4", "--out", str(tmp_path)])
        assert rc == EXIT_OK
        rep = read_json(tmp_path / "constants.json")["report"]
        assert rep["N"] == 4
        assert rep["quad_error"] < 1e-9

    def test_dim2_rejected(self, tmp_path, capsys):
        rc = main(["constants", "--dim", "2", "--out", str(tmp_path)])
        assert rc == EXIT_CONFIG
        assert "N >= 3" in capsys.readouterr().err


class TestAssumptionsCommand:
    def test_unit_ball_passes(self, tmp_path):
        rc = main(["assumptions", "--out", str(tmp_path)])
        assert rc == EXIT_OK
        rep = read_json(tmp_path / "assumptions.json")["report"]
        assert rep["all_passed"] is True
        names = [c["check"] for c in rep["checks"]]
        joined = " ".join(names)
        assert "convexity" in joined and "monotonicity" in joined
        # Report carries the monitored extremes (min h'', worst (t-s) dg/dt).
        worst = {c["check"]: c["worst_value"] for c in rep["checks"]}
        assert any(v > 0 for v in worst.values())
        assert any(v < 0 for v in worst.values())

    def test_bad_radius_rejected(self, tmp_path):
        rc = main(["assumptions", "--radius", "-2", "--out", str(tmp_path)])
        assert rc == EXIT_CONFIG


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    path = tmp_path_factory.mktemp("saddle_run")
    rc = main(["saddle", "--out", str(path), "--trace"])
    assert rc == EXIT_OK
    return path


class TestSaddleCommand:
    def test_report_contents(self, outdir):
        rep = read_json(outdir / "saddle.json")["report"]
        s = rep["saddle"]
        assert s["value"] == pytest.approx(SADDLE_VALUE, abs=1e-9)
        assert s["grad_norm"] <= 1e-8
        assert s["inertia"][0] >= 1 and s["inertia"][1] >= 1
        assert s["bounds_ok"] is True
        assert rep["identities_max_deviation"] <= 1e-6
        assert rep["bounds"]["lower"] <= s["value"] <= rep["bounds"]["upper"]
        assert rep["t0"] == pytest.approx(0.0, abs=1e-12)
        assert rep["r0"] == pytest.approx(0.06, abs=1e-12)

    def test_trace_emitted(self, outdir):
        rows = list(csv.reader(open(outdir / "trace.csv")))
        assert rows[0] == ["iter", "psi_tilde", "grad_norm", "step"]
        assert len(rows) >= 3
        assert float(rows[-1][2]) <= 1e-8


class TestVerifyCommand:
    def test_inline_configuration(self, tmp_path):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text(json.dumps({
            "eps": [0.1, 0.05],
            "configuration": {"k": 1, "signs": [1],
                              "Lambda": [math.sqrt(4 * math.pi)], "t": [0.0]},
        }))
        rc = main(["verify", "--config", str(cfg_file),
                   "--out", str(tmp_path)])
        assert rc == EXIT_OK
        rep = read_json(tmp_path / "verify.json")["report"]
        gap = rep["expansion_gap"]
        assert gap["k"] == 1
        assert gap["monotone_decreasing"] is True
        assert rep["projection_rate"]["constant_stable_within_factor_2"]

    def test_reads_saddle_output(self, tmp_path):
        assert main(["saddle", "--out", str(tmp_path)]) == EXIT_OK
        rc = main(["verify", "--out", str(tmp_path), "--eps", "0.1",
                   "--eps", "0.05"])
        assert rc == EXIT_OK
        rep = read_json(tmp_path / "verify.json")["report"]
        assert rep["configuration"]["k"] == 4
        assert rep["expansion_gap"]["psi"] == pytest.approx(SADDLE_VALUE,
                                                            abs=1e-9)

    def test_missing_configuration(self, tmp_path):
        assert main(["verify", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_coarse_grid_resolution_guard(self, tmp_path, capsys):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text(json.dumps({
            "configuration": {"k": 1, "signs": [1],
                              "Lambda": [math.sqrt(128.0)], "t": [0.0]},
        }))
        rc = main(["verify", "--config", str(cfg_file), "--out",
                   str(tmp_path), "--eps", "0.5", "--grid-nz", "17",
                   "--grid-nr", "9"])
        assert rc == EXIT_RESOLUTION
        err = capsys.readouterr().err
        assert "requires at least grid" in err


class TestDeterminismAndFormats:
    def test_saddle_reports_byte_identical_modulo_timestamp(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["saddle", "--out", str(a)]) == EXIT_OK
        assert main(["saddle", "--out", str(b)]) == EXIT_OK
        la = (a / "saddle.json").read_text().splitlines()
        lb = (b / "saddle.json").read_text().splitlines()
        assert len(la) == len(lb)
        diff = [(x, y) for x, y in zip(la, lb) if x != y]
        for x, _ in diff:
            assert "timestamp_utc" in x or '"out"' in x
        assert len(diff) <= 2

    def test_csv_twin_consistent_with_json(self, tmp_path):
        rc = main(["constants", "--out", str(tmp_path), "--format", "csv"])
        assert rc == EXIT_OK
        rep = read_json(tmp_path / "constants.json")["report"]
        rows = {k: v for k, v in
                list(csv.reader(open(tmp_path / "constants.csv")))[1:]}
        assert float(rows["omegaN"]) == rep["omegaN"]
        assert float(rows["cN"]) == rep["cN"]

    def test_json_has_sorted_keys_and_meta(self, tmp_path):
        assert main(["constants", "--out", str(tmp_path)]) == EXIT_OK
        doc = read_json(tmp_path / "constants.json")
        assert set(doc) == {"meta", "report"}
        meta = doc["meta"]
        assert meta["package"] == "nodalbubbles"
        assert "timestamp_utc" in meta
        assert meta["effective_config"]["dim"] == 3
