"""End-to-end checks of the perish command-line tool.

Run as: python3 cli_test.py <path to perish binary>
"""
import csv
import io
import json
import shutil
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

PERISH = None

SMALL = {
    "min_words": 50000,
    "dev_min": 10000,
    "test_min": 10000,
    "ladder_top": 32000,
    "ladder_floor": 4000,
    "ngram": {"order": 3},
}


def run(*args, check=True):
    proc = subprocess.run([PERISH, *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"perish {' '.join(map(str, args))} exited {proc.returncode}\n{proc.stderr}")
    return proc


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# config_hash="), lines[0]
    return lines[0].split("=", 1)[1], list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


class Pipeline(unittest.TestCase):
    """One small drifting corpus pushed through every stage."""

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        root = Path(cls.tmp.name)
        cls.cfg = root / "config.json"
        cls.cfg.write_text(json.dumps(SMALL))
        cls.work = root / "work"
        corpus = root / "corpus.txt"
        run("--seed", 3, "synth", "--out", corpus, "--drift", 1.0, "--periods", 4, "--words", 60000,
            "--vocab", 300, "--successors", 300, "--topic", "drifty")
        base = ["-w", cls.work, "-c", cls.cfg, "--seed", 3]
        run(*base, "ingest", corpus)
        run(*base, "slice")
        run(*base, "ladder")
        run(*base, "train", "--seeds", "0,1", "--jobs", 2)
        for cmd in ("curves", "effectiveness", "decay", "pairwise", "forms", "report"):
            run(*base, cmd)
        cls.base = base

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_one_manifest_line_per_period_rung_seed(self):
        lines = (self.work / "manifest.jsonl").read_text().splitlines()
        jobs = {json.dumps(json.loads(l)["job"], sort_keys=True) for l in lines}
        self.assertEqual(len(lines), 4 * 4 * 2)
        self.assertEqual(len(jobs), len(lines))

    def test_outputs_carry_config_hash(self):
        hashes = set()
        for name in ("curves.csv", "decay.csv", "forms.csv", "pairwise.csv", "report/decay_table.csv"):
            h, _ = read_csv(self.work / name)
            hashes.add(h)
        self.assertEqual(len(hashes), 1)
        h = hashes.pop()
        self.assertRegex(h, r"^[0-9a-f]{16}$")
        self.assertIn(f"config_hash={h}", (self.work / "report" / "effectiveness.svg").read_text())
        series = json.loads((self.work / "effectiveness" / "drifty.json").read_text())
        self.assertEqual(series["config_hash"], h)

    def test_decay_detects_drift(self):
        _, rows = read_csv(self.work / "decay.csv")
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]["topic"], "drifty")
        self.assertLess(float(rows[0]["estimate_per_year"]), 0.0)

    def test_rerun_is_deterministic(self):
        before = (self.work / "decay.csv").read_text()
        run(*self.base, "decay")
        self.assertEqual((self.work / "decay.csv").read_text(), before)

    def test_external_backend_reproduces_builtin(self):
        ext_cfg = dict(SMALL, external_command=f"{PERISH} ngram-backend", external_backend={"id": "ext", "ngram": SMALL["ngram"]},
                       early_stop_patience=7)
        path = Path(self.tmp.name) / "ext.json"
        path.write_text(json.dumps(ext_cfg))
        work = Path(self.tmp.name) / "ext_work"
        shutil.copytree(self.work, work)
        run("-w", work, "-c", path, "train", "--backend", "external", "--periods", "2020-01..2020-01",
            "--seeds", "0")
        builtin, external = {}, {}
        for line in (work / "manifest.jsonl").read_text().splitlines():
            rec = json.loads(line)
            job = rec["job"]
            if job["train_period"] != "2020-01" or job["seed"] != 0:
                continue
            target = external if job["backend_id"] == "ext" else builtin
            target[job["subset_size"]] = rec["dev_loss"]
        self.assertEqual(set(builtin), set(external))
        configs = list((work / "jobs").rglob("config.json"))
        self.assertEqual(len(configs), len(external))
        self.assertEqual(json.loads(configs[0].read_text())["early_stop_patience"], 7)
        for size in builtin:
            self.assertAlmostEqual(builtin[size], external[size], places=9)


class Errors(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.work = Path(self.tmp.name) / "work"

    def tearDown(self):
        self.tmp.cleanup()

    def test_report_on_empty_manifest(self):
        self.work.mkdir()
        (self.work / "manifest.jsonl").write_text("")
        proc = run("-w", self.work, "report")
        self.assertEqual(proc.returncode, 0)
        for name in ("curves.csv", "decay_table.csv", "pairwise.csv", "forms.csv"):
            _, rows = read_csv(self.work / "report" / name)
            self.assertEqual(rows, [], name)

    def test_missing_artifacts_name_prior_step(self):
        for cmd, needed in (("slice", "ingest"), ("ladder", "slice"), ("train", "slice"), ("curves", "train"),
                            ("effectiveness", "train"), ("report", "train")):
            proc = run("-w", self.work, cmd, check=False)
            self.assertEqual(proc.returncode, 2, cmd)
            self.assertIn(f"perish {needed}", proc.stderr, cmd)

    def test_usage_errors_exit_1(self):
        self.assertEqual(run("train", "--backend", "bogus", check=False).returncode, 1)
        self.assertEqual(run("no-such-command", check=False).returncode, 1)

    def test_bad_config_exits_2(self):
        cfg = Path(self.tmp.name) / "bad.json"
        cfg.write_text(json.dumps({"ladder_topp": 5}))
        proc = run("-w", self.work, "-c", cfg, "report", check=False)
        self.assertEqual(proc.returncode, 2)
        self.assertIn("ladder_topp", proc.stderr)

    def test_offload_trajectory(self):
        out = Path(self.tmp.name) / "offload.csv"
        run("offload", "--model", "drift_shift", "--a", 2, "--b", 0.3, "--d-scale", 0.5, "--n", 1e5, "--window", 2,
            "--masses", "0.5,0.5", "--out", out)
        _, rows = read_csv(out)
        self.assertGreaterEqual(len(rows), 1)


if __name__ == "__main__":
    PERISH = sys.argv.pop(1)
    unittest.main(verbosity=2)
