"""End-to-end checks of the lppl command line tool.

Usage: python3 test_cli.py LPPL_BINARY REPO_ROOT
"""
import csv
import datetime as dt
import filecmp
import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

LPPL = ""
ROOT = Path(".")


def run(*args, env=None, cwd=None):
    return subprocess.run([LPPL, *map(str, args)], capture_output=True, text=True, env=env, cwd=cwd)


def dates_of(path):
    with open(path, newline="") as f:
        return [dt.date.fromisoformat(r["date"]) for r in csv.DictReader(f)]


class Cli(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_synth_is_deterministic(self):
        a, b = self.tmp / "a.csv", self.tmp / "b.csv"
        for out in (a, b):
            r = run("synth", "--seed", 42, "--output", out)
            self.assertEqual(r.returncode, 0, r.stderr)
        self.assertTrue(filecmp.cmp(a, b, shallow=False))
        c = self.tmp / "c.csv"
        run("synth", "--seed", 43, "--output", c)
        self.assertFalse(filecmp.cmp(a, c, shallow=False))
        with open(a) as f:
            self.assertEqual(f.readline().strip(), "date,open,high,low,close")
        self.assertEqual(len(dates_of(a)), 400)

    def test_shrinking_scan_window_count(self):
        data = self.tmp / "long.csv"
        r = run("synth", "--seed", 1, "--n-days", 760, "--start-date", "2005-01-03", "--tc", 800, "--output", data)
        self.assertEqual(r.returncode, 0, r.stderr)
        out = self.tmp / "scan"
        r = run("scan", "--input", data, "--seed", 3, "--n-repeats", 1, "--n-iterations", 400,
                "--mode", "shrinking", "--t2", "2007-10-10", "--t1-first", "2005-10-01",
                "--t1-last", "2007-05-31", "--step", 5, "--output-dir", out)
        self.assertEqual(r.returncode, 0, r.stderr)
        # Start dates are every fifth trading day from the first one on or after 2005-10-01.
        days = dates_of(data)
        starts = [d for d in days if dt.date(2005, 10, 1) <= d <= dt.date(2007, 5, 31)]
        expected = len(starts[::5])
        summary = json.loads((out / "scan.json").read_text())
        self.assertEqual(summary["n_windows"], expected)
        with open(out / "fits.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(len(rows), expected)
        self.assertEqual(rows[0]["t1_date"], starts[0].isoformat())
        self.assertTrue(all(r["t2_date"] == "2007-10-10" for r in rows))

    def test_regime_writes_three_files(self):
        out = self.tmp / "regime"
        r = run("regime", "--input", ROOT / "tests/data/bubble.csv", "--seed", 1, "--T", "10,20,30",
                "--output-dir", out)
        self.assertEqual(r.returncode, 0, r.stderr)
        for T in (10, 20, 30):
            with open(out / f"regime_T{T}.csv", newline="") as f:
                rows = list(csv.DictReader(f))
            self.assertEqual(len(rows), 400 - T + 1)
            for row in rows:
                k = float(row["fraction"]) * T
                self.assertAlmostEqual(k, round(k), places=9)

    def test_report_validates_against_schema(self):
        schema = json.loads((ROOT / "schema/report.schema.json").read_text())
        out = self.tmp / "report"
        r = run("report", "--config", ROOT / "tests/data/bubble_config.json", "--output-dir", out,
                "--n-repeats", 1, "--n-iterations", 600, "--H", "0,0.5", "--q", "0.5")
        self.assertEqual(r.returncode, 0, r.stderr)
        doc = json.loads((out / "report.json").read_text())
        jsonschema.validate(doc, schema)
        for name in doc["files"]:
            self.assertTrue((out / name).exists(), name)
        self.assertTrue(any(n.startswith("periodogram_") for n in doc["files"]))

    def test_output_dir_environment_override(self):
        target = self.tmp / "from_env"
        env = dict(os.environ, LPPL_OUTPUT_DIR=str(target))
        r = run("regime", "--config", ROOT / "tests/data/bubble_config.json", "--T", "10", env=env, cwd=self.tmp)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertTrue((target / "regime_T10.csv").exists())
        # an explicit flag still wins
        flag = self.tmp / "from_flag"
        r = run("regime", "--config", ROOT / "tests/data/bubble_config.json", "--T", "10", "--output-dir", flag,
                env=env, cwd=self.tmp)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertTrue((flag / "regime_T10.csv").exists())

    def test_usage_errors(self):
        self.assertNotEqual(run("scan", "--no-such-flag").returncode, 0)
        self.assertNotEqual(run("fit", "--input", ROOT / "tests/data/bubble.csv").returncode, 0)
        r = run("report", "--input", self.tmp / "missing.csv", "--seed", 1, "--output-dir", self.tmp / "x")
        self.assertNotEqual(r.returncode, 0)
        self.assertNotEqual(run("nonsense").returncode, 0)

    def test_missing_seed_is_rejected(self):
        r = run("scan", "--input", ROOT / "tests/data/bubble.csv", "--t2", "2001-07-13",
                "--t1-first", "2000-01-03", "--t1-last", "2000-03-01", "--output-dir", self.tmp / "s")
        self.assertNotEqual(r.returncode, 0)
        self.assertIn("seed", r.stderr.lower())

    def test_help_shows_defaults(self):
        r = run("report", "--help")
        self.assertEqual(r.returncode, 0)
        for text in ("[2000]", "[4]", "[0.5]", "[1.2]", "[[10,20,30]]", "LPPL filter", "MacKinnon"):
            self.assertIn(text, r.stdout)

    def test_unfittable_run_exits_nonzero_with_report(self):
        out = self.tmp / "fail"
        r = run("report", "--config", ROOT / "tests/data/bubble_config.json", "--output-dir", out,
                "--max-iterations", 1, "--n-repeats", 1, "--n-iterations", 200, "--step", 60)
        self.assertEqual(r.returncode, 2, r.stderr)
        doc = json.loads((out / "report.json").read_text())
        self.assertFalse(doc["scan"]["tc_forecast"]["available"])


if __name__ == "__main__":
    LPPL = os.path.abspath(sys.argv[1])
    ROOT = Path(sys.argv[2]).resolve()
    unittest.main(argv=[sys.argv[0], "-v"])
