import csv
import hashlib
import json
import os

import pytest

from pslab.cli import main, parse_int_sci


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestNumericParsing:
    def test_plain_and_scientific(self):
        assert parse_int_sci("7") == 7
        assert parse_int_sci("1e9") == 10**9
        assert parse_int_sci("25E2") == 2500
        assert parse_int_sci("1e+6") == 10**6

    def test_fractional_mantissa_rejected(self):
        for bad in ("1.5e9", "0.5", "-3", "2e-1", "e9", "1e", ""):
            with pytest.raises(ValueError):
                parse_int_sci(bad)


class TestSweepCommand:
    def test_x13_massfn_single_row(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["sweep", "--x", "13", "--out", str(out), "--no-plots"])
        assert rc == 0
        rows = read_csv(out / "massfn.csv")
        assert rows[0] == ["x", "r", "N_r", "predicted", "ratio"]
        assert rows[1][:3] == ["13", "1", "1"]
        assert len(rows) == 2

    def test_x7_empty_tables_with_headers(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["sweep", "--x", "7", "--out", str(out), "--no-plots"])
        assert rc == 0
        assert read_csv(out / "massfn.csv") == [["x", "r", "N_r", "predicted", "ratio"]]
        moments = read_csv(out / "moments.csv")
        assert moments[0] == ["x", "k", "raw", "falling", "nondiagonal",
                              "predicted", "ratio"]
        assert all(row[2] == "0" for row in moments[1:])

    def test_moments_rows_for_k_range(self, tmp_path):
        out = tmp_path / "out"
        assert main(["sweep", "--x", "1e4", "--kmax", "6", "--out", str(out),
                     "--no-plots"]) == 0
        moments = read_csv(out / "moments.csv")
        assert [row[1] for row in moments[1:]] == ["1", "2", "3", "4", "5", "6"]
        omega = read_csv(out / "omega.csv")
        assert omega[0] == ["x", "m", "count"]
        assert int(omega[1][2]) >= 1

    def test_reruns_are_byte_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["sweep", "--x", "2e3", "--out", str(out), "--no-plots"]) == 0
            outs.append(out)
        for fname in ("massfn.csv", "moments.csv", "omega.csv"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()

    def test_manifest_digests(self, tmp_path):
        out = tmp_path / "out"
        assert main(["sweep", "--x", "1e3", "--out", str(out), "--no-plots"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "sweep"
        assert manifest["config"]["x"] == 1000
        for name, digest in manifest["files"].items():
            blob = (out / name).read_bytes()
            assert hashlib.sha256(blob).hexdigest() == digest

    def test_figures_rendered_by_default(self, tmp_path):
        out = tmp_path / "out"
        assert main(["sweep", "--x", "1e3", "--out", str(out)]) == 0
        for name in ("moments.png", "massfn.png", "omega.png"):
            assert (out / name).stat().st_size > 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert "moments.png" in manifest["files"]

    def test_cache_reused_and_rebuilt(self, tmp_path, capsys):
        cache = tmp_path / "cache"
        out = tmp_path / "out"
        args = ["sweep", "--x", "1e3", "--out", str(out), "--no-plots",
                "--cache-dir", str(cache)]
        assert main(args) == 0
        cache_file = next(cache.glob("*.psmm"))
        blob = cache_file.read_bytes()
        cache_file.write_bytes(b"corrupt")
        assert main(args) == 0
        assert cache_file.read_bytes() == blob
        assert "rebuilding" in capsys.readouterr().err

    def test_resource_limit_exit_code(self, tmp_path):
        assert main(["sweep", "--x", "1e14", "--out", str(tmp_path / "o"),
                     "--no-plots"]) == 3


class TestMassfnCommand:
    def test_writes_only_mass_function(self, tmp_path):
        out = tmp_path / "out"
        assert main(["massfn", "--x", "1e4", "--out", str(out), "--no-plots"]) == 0
        assert (out / "massfn.csv").exists()
        assert not (out / "moments.csv").exists()


class TestSingularCommand:
    def test_example_corpus(self, tmp_path):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("130 2 3 11 7 9\n5 2 1 2 2 1\n")
        out = tmp_path / "out"
        assert main(["singular", "--corpus", str(corpus), "--out", str(out),
                     "--cutoff", "1e4", "--no-plots"]) == 0
        rows = read_csv(out / "singular.csv")
        assert rows[0] == ["N", "k", "tuple_id", "value", "cutoff", "tail_bound",
                           "admissible"]
        by_n = {row[0]: row for row in rows[1:]}
        assert by_n["130"][6] == "true" and float(by_n["130"][3]) > 0
        assert by_n["5"][6] == "false" and float(by_n["5"][3]) == 0.0

    def test_empty_corpus(self, tmp_path):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("")
        out = tmp_path / "out"
        assert main(["singular", "--corpus", str(corpus), "--out", str(out),
                     "--no-plots"]) == 0
        assert read_csv(out / "singular.csv") == [
            ["N", "k", "tuple_id", "value", "cutoff", "tail_bound", "admissible"]]

    def test_malformed_corpus_reports_line(self, tmp_path, capsys):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("130 2 3 11 7 9\n130 9 1\n")
        out = tmp_path / "out"
        assert main(["singular", "--corpus", str(corpus), "--out", str(out),
                     "--no-plots"]) == 2
        assert "line 2" in capsys.readouterr().err


class TestConstantsCommand:
    def test_constants_json(self, tmp_path):
        out = tmp_path / "out"
        assert main(["constants", "--cutoff", "2e3", "--out", str(out),
                     "--no-plots"]) == 0
        doc = json.loads((out / "constants.json").read_text())
        assert abs(doc["rho"] - 0.0282) / 0.0282 < 0.02
        assert doc["prime_cutoff"] == 2000
        assert doc["moment_exponents"]["14"] == 8163
        assert "sensitivity" in doc
        exponents = read_csv(out / "exponents.csv")
        assert exponents[1] == ["1", "-2"] and exponents[14] == ["14", "8163"]

    def test_stable_key_order(self, tmp_path):
        texts = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["constants", "--cutoff", "1e3", "--out", str(out),
                         "--no-plots"]) == 0
            texts.append((out / "constants.json").read_text())
        assert texts[0] == texts[1]


class TestFkCommand:
    def test_fk_over_corpus(self, tmp_path):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("130 2 3 11 7 9\n")
        out = tmp_path / "out"
        assert main(["fk", "--corpus", str(corpus), "--x", "1e4", "--out", str(out),
                     "--no-plots"]) == 0
        rows = read_csv(out / "fk.csv")
        assert rows[0] == ["N", "k", "tuple_id", "z", "f_k", "f_k_star", "sieve_ratio"]
        final = rows[-1]
        assert final[3] == "10000" and final[4] == "22"
        assert int(final[5]) <= int(final[4])


class TestConfigPrecedence:
    def test_env_then_file_then_flags(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PSLAB_THREADS", "3")
        cfg = tmp_path / "cfg"
        cfg.write_text("x=5e3\nkmax=2\n")
        out = tmp_path / "out"
        assert main(["sweep", "--config", str(cfg), "--x", "1e3", "--out", str(out),
                     "--no-plots"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["x"] == 1000      # flag beats file
        assert manifest["config"]["kmax"] == 2      # file beats default
        assert manifest["config"]["threads"] == 3   # env beats default

    def test_env_cache_dir(self, tmp_path, monkeypatch):
        cache = tmp_path / "envcache"
        monkeypatch.setenv("PSLAB_CACHE_DIR", str(cache))
        out = tmp_path / "out"
        assert main(["sweep", "--x", "1e3", "--out", str(out), "--no-plots"]) == 0
        assert list(cache.glob("*.psmm"))

    def test_bad_config_file(self, tmp_path):
        cfg = tmp_path / "cfg"
        cfg.write_text("nonsense\n")
        assert main(["sweep", "--config", str(cfg), "--no-plots"]) == 2

    def test_bad_flag_value_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--x", "1.5e3", "--out", str(tmp_path)])
        assert exc.value.code == 2


def test_verify_quick_subset(tmp_path, capsys):
    rc = main(["verify", "--quick", "--threads", "2"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.count("criterion") >= 10
    assert "criteria passed" in out
