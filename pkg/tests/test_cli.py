import csv
import json

import pytest

from conetube.cli import main
from conetube.reporting import AUDIT_COLUMNS, SCALING_COLUMNS


def write_cfg(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def run(args):
    return main(args)


class TestAudit:
    def test_default_n1_suite_passes(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "a.json",
                        {"n": 1, "seed": 11, "budget": 60_000,
                         "configs_per_identity": 1})
        code = run(["audit", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 0
        lines = (tmp_path / "out" / "audit.csv").read_text().splitlines()
        assert lines[0] == "# schema_version=1"
        rows = list(csv.reader(lines[1:]))
        assert tuple(rows[0]) == AUDIT_COLUMNS
        statuses = {r[-1] for r in rows[1:]}
        assert statuses <= {"CONFIRMED", "EXPONENT_CONFIRMED_CONSTANT_MISMATCH"}
        details = json.loads((tmp_path / "out" / "audit_details.json")
                             .read_text())
        assert details["schema_version"] == 1
        assert details["summary"]["rows"] == 8
        # dual-region companions recorded for the two kernel identities
        regions = {d["region"] for d in details["records"]}
        assert regions == {"cone", "dual"}
        assert (tmp_path / "out" / "run_meta.json").exists()

    def test_replay_is_byte_identical(self, tmp_path):
        cfg = write_cfg(tmp_path, "a.json",
                        {"n": 2, "seed": 3, "budget": 40_000,
                         "configs_per_identity": 1, "oracle": "mc",
                         "identities": ["L23_1", "L24", "L25"]})
        assert run(["audit", "--config", cfg, "--out", str(tmp_path / "r1")]) == 0
        assert run(["audit", "--config", cfg, "--out", str(tmp_path / "r2")]) == 0
        for name in ("audit.csv", "audit_details.json"):
            assert (tmp_path / "r1" / name).read_bytes() == \
                (tmp_path / "r2" / name).read_bytes()

    def test_tiny_budget_warns_and_exits_zero(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "a.json",
                        {"n": 2, "seed": 1, "budget": 16,
                         "configs_per_identity": 1, "oracle": "mc",
                         "identities": ["L27"]})
        code = run(["audit", "--config", cfg, "--out", str(tmp_path / "out")])
        captured = capsys.readouterr()
        assert code == 0
        assert "inconclusive" in captured.err.lower()

    def test_explicit_cases(self, tmp_path):
        cfg = write_cfg(tmp_path, "a.json", {
            "n": 1, "seed": 5, "budget": 50_000,
            "cases": [
                {"identity": "L24", "n": 1,
                 "params": {"r": [3.0], "eta": [1.0]}, "point": {"b": [1.0]}},
                {"identity": "L27", "n": 1,
                 "params": {"l": [0.0], "r": [4.0]},
                 "point": {"z": {"x": [0.0], "y": [1.0]}}},
            ]})
        code = run(["audit", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 0
        details = json.loads((tmp_path / "out" / "audit_details.json")
                             .read_text())
        fitted = details["records"][0]["fitted_constant"]
        assert fitted == pytest.approx(0.5, rel=1e-8)

    def test_exit_one_on_structure_mismatch(self, tmp_path):
        # the slice identity's stated global exponent fails at n = 3, which
        # the audit must surface as a finding
        cfg = write_cfg(tmp_path, "a.json",
                        {"n": 3, "seed": 11, "budget": 400_000,
                         "configs_per_identity": 1, "oracle": "mc",
                         "identities": ["L25"]})
        code = run(["audit", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 1

    def test_bad_configs_exit_two(self, tmp_path, capsys):
        assert run(["audit", "--config", str(tmp_path / "missing.json"),
                    "--out", str(tmp_path / "o")]) == 2
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["audit", "--config", str(bad),
                    "--out", str(tmp_path / "o")]) == 2
        cfg = write_cfg(tmp_path, "c.json", {"n": 7})
        assert run(["audit", "--config", cfg,
                    "--out", str(tmp_path / "o")]) == 2
        cfg = write_cfg(tmp_path, "d.json", {"identities": ["NOPE"]})
        assert run(["audit", "--config", cfg,
                    "--out", str(tmp_path / "o")]) == 2
        cfg = write_cfg(tmp_path, "e.json",
                        {"cases": [{"identity": "L24", "n": 1,
                                    "params": {"r": [3.0]},
                                    "point": {"b": [1.0]}}]})
        assert run(["audit", "--config", cfg,
                    "--out", str(tmp_path / "o")]) == 2


class TestClassifyWitness:
    def config(self, tmp_path):
        return write_cfg(tmp_path, "sets.json", {"parameter_sets": [
            {"n": 2, "p": 2, "q": 2, "alpha": [0, 0], "beta": [0, 0],
             "a": [0, 0], "b": [0, 0], "c": [3, 3]},
            {"n": 2, "p": 2, "q": 2, "alpha": [0, 0], "beta": [0, 0],
             "a": [0, 0], "b": [0, 0], "c": [3, 3.5]},
        ]})

    def test_classify_verdicts(self, tmp_path):
        code = run(["classify", "--config", self.config(tmp_path),
                    "--out", str(tmp_path / "out")])
        assert code == 0
        data = json.loads((tmp_path / "out" / "verdicts.json").read_text())
        assert [v["verdict"] for v in data["verdicts"]] == \
            ["BOUNDED", "UNBOUNDED"]
        # full breakdown with margins rides along
        first = data["verdicts"][0]
        assert all("margin" in c for c in first["sufficient"])

    def test_classify_conflict_exits_one(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {"parameter_sets": [
            {"n": 3, "p": 2, "q": 2, "alpha": [-1.5, 0, 0],
             "beta": [-2.5, 0, 0], "a": [0, 0, 0], "b": [0, 0, 0],
             "c": [3.5, 4, 4]}]})
        assert run(["classify", "--config", cfg,
                    "--out", str(tmp_path / "out")]) == 1

    def test_witness_file(self, tmp_path):
        code = run(["witness", "--config", self.config(tmp_path),
                    "--out", str(tmp_path / "out")])
        assert code == 1  # second set cannot construct
        data = json.loads((tmp_path / "out" / "witnesses.json").read_text())
        good, bad = data["witnesses"]
        assert good["ok"] and good["t"] == pytest.approx(0.5)
        assert not bad["ok"]


class TestScaling:
    def test_csv_shape_and_slopes(self, tmp_path):
        cfg = write_cfg(tmp_path, "s.json", {
            "params": {"n": 1, "p": 2, "q": 2, "alpha": [0], "beta": [0],
                       "a": [0], "b": [0], "c": [2]},
            "l": [0.5], "r": [3.0], "R_grid": [1, 2, 4],
            "budget": 40_000, "seed": 5})
        code = run(["scaling", "--config", cfg,
                    "--out", str(tmp_path / "out")])
        assert code == 0
        lines = (tmp_path / "out" / "scaling.csv").read_text().splitlines()
        rows = list(csv.reader(lines[1:]))
        assert tuple(rows[0]) == SCALING_COLUMNS
        assert len(rows) == 1 + 3  # one coordinate, three grid points
        slopes = json.loads((tmp_path / "out" / "scaling.json").read_text())
        assert slopes["slopes"][0]["f_analytic"] == pytest.approx(-1.5)

    def test_single_point_grid_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, "s.json", {
            "params": {"n": 1, "p": 2, "q": 2, "alpha": [0], "beta": [0],
                       "a": [0], "b": [0], "c": [2]},
            "l": [0.5], "r": [3.0], "R_grid": [1],
            "budget": 1000, "seed": 5})
        assert run(["scaling", "--config", cfg,
                    "--out", str(tmp_path / "out")]) == 2
