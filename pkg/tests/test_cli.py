import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from sheafplectic.cli import (
    Manifest,
    ParseError,
    UnknownName,
    ValidationError,
    build_parser,
    emit_manifest,
    parse_manifest,
    run_command,
)

REPO = Path(__file__).resolve().parents[1]
MANIFESTS = REPO / "manifests"

MINIMAL = json.dumps({
    "format": "sheafplectic-manifest/1",
    "space": {"points": ["p0"], "opens": [[], ["p0"]]},
    "field": "Q",
    "rank": 2,
    "form": {"p0": [["0", "1"], ["-1", "0"]]},
})


def run_cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "sheafplectic", *argv],
                          capture_output=True, text=True, cwd=REPO)
    return proc.returncode, proc.stdout


class TestParseManifest:
    def test_minimal_valid(self):
        m = parse_manifest(MINIMAL)
        assert m.rank == 2 and m.form is not None
        assert m.space.points == ("p0",)

    def test_nonzero_diagonal_rejected(self):
        bad = MINIMAL.replace('[["0", "1"], ["-1", "0"]]',
                              '[["1", "0"], ["0", "0"]]')
        with pytest.raises(ValidationError) as exc:
            parse_manifest(bad)
        assert exc.value.path == "form.p0"
        assert "diagonal" in exc.value.message

    def test_nonskew_rejected(self):
        bad = MINIMAL.replace('[["0", "1"], ["-1", "0"]]',
                              '[["0", "1"], ["1", "0"]]')
        with pytest.raises(ValidationError) as exc:
            parse_manifest(bad)
        assert "skew" in exc.value.message

    def test_zero_denominator_is_parse_error(self):
        bad = MINIMAL.replace('"1"', '"1/0"', 1)
        with pytest.raises(ParseError):
            parse_manifest(bad)

    def test_float_literal_rejected(self):
        bad = MINIMAL.replace('"1"', '"1.5"', 1)
        with pytest.raises(ParseError):
            parse_manifest(bad)

    def test_json_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as exc:
            parse_manifest("{ not json")
        assert exc.value.line >= 1

    def test_unknown_section_rejected(self):
        doc = json.loads(MINIMAL)
        doc["extras"] = {}
        with pytest.raises(ValidationError):
            parse_manifest(json.dumps(doc))

    def test_unknown_point_in_map(self):
        doc = json.loads(MINIMAL)
        doc["form"]["zz"] = doc["form"]["p0"]
        with pytest.raises(ValidationError):
            parse_manifest(json.dumps(doc))

    def test_bad_format_string(self):
        doc = json.loads(MINIMAL)
        doc["format"] = "something-else"
        with pytest.raises(ValidationError) as exc:
            parse_manifest(json.dumps(doc))
        assert exc.value.path == "format"

    def test_topology_violation_rejected(self):
        doc = json.loads(MINIMAL)
        doc["space"] = {"points": ["a", "b"], "opens": [[], ["a"], ["b"]]}
        with pytest.raises(ValidationError) as exc:
            parse_manifest(json.dumps(doc))
        assert exc.value.path == "space"

    def test_fp_entries_must_be_integers(self):
        doc = json.loads(MINIMAL)
        doc["field"] = {"Fp": 3}
        doc["form"] = {"p0": [[0, "1"], [2, 0]]}
        with pytest.raises(ParseError):
            parse_manifest(json.dumps(doc))

    def test_nonprime_modulus(self):
        doc = json.loads(MINIMAL)
        doc["field"] = {"Fp": 4}
        del doc["form"]
        with pytest.raises(ValidationError):
            parse_manifest(json.dumps(doc))

    def test_point_cap(self, monkeypatch):
        monkeypatch.setenv("SHEAFPLECTIC_MAX_POINTS", "1")
        doc = json.loads(MINIMAL)
        doc["space"] = {"points": ["a", "b"],
                        "opens": [[], ["a"], ["a", "b"]]}
        doc["form"] = {x: [["0", "1"], ["-1", "0"]] for x in ("a", "b")}
        with pytest.raises(ValidationError) as exc:
            parse_manifest(json.dumps(doc))
        assert "cap" in exc.value.message

    def test_round_trip_all_example_manifests(self):
        for name in sorted(MANIFESTS.glob("*.json")):
            text = name.read_text()
            first = emit_manifest(parse_manifest(text))
            second = emit_manifest(parse_manifest(first))
            assert first == second


class TestRunCommand:
    def manifest(self, name):
        return parse_manifest((MANIFESTS / name).read_text())

    def args(self, *argv):
        return build_parser().parse_args(argv)

    def test_classify_lagrangian(self):
        m = self.manifest("point_rank2.json")
        code, recs = run_command(
            m, "classify", self.args("-m", "x", "classify", "--sub", "L"))
        assert code == 0
        assert recs[0]["lagrangian"] is True

    def test_classify_lagrangian_pair_plane(self):
        m = self.manifest("sierpinski_rank4.json")
        code, recs = run_command(
            m, "classify", self.args("-m", "x", "classify", "--sub", "L"))
        assert code == 0
        assert recs[0]["lagrangian"] is True

    def test_darboux_value(self):
        m = self.manifest("sierpinski_rank4.json")
        code, recs = run_command(
            m, "darboux", self.args("-m", "x", "darboux", "--at", "a"))
        assert code == 0
        assert recs[0]["half_rank"] == 2

    def test_reduce_rejects_non_coisotropic(self):
        m = self.manifest("point_rank2.json")
        code, recs = run_command(
            m, "reduce", self.args("-m", "x", "reduce", "--sub", "zero"))
        assert code == 1
        assert recs[0]["error"] == "NotCoisotropic"

    def test_unknown_name_exit_one(self):
        m = self.manifest("point_rank2.json")
        code, recs = run_command(
            m, "classify", self.args("-m", "x", "classify", "--sub", "nope"))
        assert code == 1
        assert recs[0]["error"] == "UnknownName"

    def test_check_suite_passes(self):
        m = self.manifest("discrete_f3.json")
        code, recs = run_command(
            m, "check",
            self.args("-m", "x", "check", "--suite", "transpose",
                      "--seed-rng", "5"))
        assert code == 0
        assert recs[-1]["verdict"] == "pass"


class TestProcessLevel:
    def test_validate_exit_zero(self):
        code, out = run_cli("-m", "manifests/point_rank2.json", "validate")
        assert code == 0
        assert json.loads(out.splitlines()[0])["verdict"] == "pass"

    def test_missing_file_exit_three(self):
        code, out = run_cli("-m", "no-such-file.json", "validate")
        assert code == 3

    def test_invalid_manifest_exit_three(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        code, out = run_cli("-m", str(bad), "validate")
        assert code == 3

    def test_usage_exit_two(self):
        code, _ = run_cli("-m", "manifests/point_rank2.json", "frobnicate")
        assert code == 2

    def test_machine_reports_byte_identical(self):
        jobs = [
            ("manifests/point_rank2.json", ["classify", "--sub", "L"]),
            ("manifests/sierpinski_rank4.json", ["darboux", "--at", "a"]),
            ("manifests/discrete_f3.json",
             ["check", "--suite", "annihilator-theorem", "--seed-rng", "7"]),
        ]
        for manifest, cmd in jobs:
            code1, out1 = run_cli("-m", manifest, *cmd)
            code2, out2 = run_cli("-m", manifest, *cmd)
            assert code1 == code2 == 0
            assert out1 == out2
            for line in out1.splitlines():
                json.loads(line)

    def test_human_rendering(self):
        code, out = run_cli("-m", "manifests/point_rank2.json", "--human",
                            "validate")
        assert code == 0
        assert out.startswith("[pass] validate")
        assert "elapsed" in out
