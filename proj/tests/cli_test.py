#!/usr/bin/env python3
# Copyright 2026 The ppkmeans Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""End-to-end checks of the ppkm command line.

Usage: cli_test.py <ppkm executable> <stats schema>
"""

import csv
import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

EXE = None
SCHEMA = None


def run(*args, cwd, env=None, check=0):
    proc = subprocess.run([EXE, *map(str, args)], cwd=cwd, env=env,
                          capture_output=True, text=True, timeout=300)
    if check is not None and proc.returncode != check:
        raise AssertionError(f"{' '.join(map(str, args))} exited {proc.returncode}:\n"
                             f"{proc.stdout}\n{proc.stderr}")
    return proc


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def labels(path):
    return [int(r["label"]) for r in rows(path)]


def nearest(points, centers):
    out = []
    for p in points:
        d = [sum((a - b) ** 2 for a, b in zip(p, c)) for c in centers]
        out.append(d.index(min(d)))
    return out


def points(path):
    return [[float(v) for k, v in r.items() if k != "label"] for r in rows(path)]


class CliTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory(prefix="ppkm_cli_")
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def ppkm(self, *args, **kw):
        return run(*args, cwd=self.dir, **kw)

    def stats(self, name):
        with open(self.dir / name) as f:
            data = json.load(f)
        try:
            import jsonschema
        except ImportError:
            return data
        with open(SCHEMA) as f:
            jsonschema.validate(data, json.load(f))
        return data

    # gen-data

    def test_gen_data_full(self):
        self.ppkm("gen-data", "--seed", 7, "--out", "data/")
        full = rows(self.dir / "data" / "full.csv")
        self.assertEqual(len(full), 400)
        self.assertEqual(list(full[0].keys()), ["x1", "x2", "label"])

    def test_gen_data_splits(self):
        self.ppkm("gen-data", "--split", "horizontal:200,200", "-o", "h")
        self.assertEqual([len(rows(self.dir / "h" / f"party{j}.csv")) for j in (1, 2)], [200, 200])
        self.ppkm("gen-data", "--split", "vertical:1,1", "-o", "v")
        for j in (1, 2):
            part = rows(self.dir / "v" / f"party{j}.csv")
            self.assertEqual(len(part), 400)
            self.assertEqual(len([k for k in part[0] if k != "label"]), 1)

    def test_seed_from_environment(self):
        env = dict(os.environ, PPKM_SEED="11")
        run("gen-data", "-o", "a", cwd=self.dir, env=env)
        self.ppkm("gen-data", "--seed", 11, "-o", "b")
        self.ppkm("gen-data", "--seed", 12, "-o", "c")
        a = (self.dir / "a" / "full.csv").read_bytes()
        self.assertEqual(a, (self.dir / "b" / "full.csv").read_bytes())
        self.assertNotEqual(a, (self.dir / "c" / "full.csv").read_bytes())

    # run

    def test_run_round_counts(self):
        self.ppkm("gen-data", "-o", "d")
        self.ppkm("run", "--mode", "shk", "--k", 4, "--division", "fast", "-d", "d/full.csv",
                  "--stats", "shk.json", "--model", "shk_model.json")
        shk = self.stats("shk.json")
        self.assertTrue(shk["converged"])
        self.assertEqual(set(shk["rounds_per_iteration"]), {28})
        self.assertEqual(shk["rounds_total"], shk["setup_rounds"] + 28 * shk["iterations"])
        self.assertEqual(len(shk["revealed_values"]), shk["iterations"])
        self.assertTrue(all(sum(t) == 400 for t in shk["revealed_values"]))

        self.ppkm("run", "--mode", "svk", "--k", 4, "-d", "d/full.csv",
                  "--stats", "svk.json", "--model", "svk_model.json")
        svk = self.stats("svk.json")
        self.assertEqual(set(svk["rounds_per_iteration"]), {36})

        self.ppkm("run", "--mode", "plain", "--k", 4, "-d", "d/full.csv",
                  "--stats", "plain.json", "--model", "plain_model.json")
        plain = self.stats("plain.json")
        self.assertEqual(plain["rounds_total"], 0)
        # Same seed, same initial rows: identical trajectories.
        self.assertEqual(plain["revealed_values"], shk["revealed_values"])
        self.assertEqual(plain["revealed_values"], svk["revealed_values"])
        self.assertAlmostEqual(plain["final_inertia"], shk["final_inertia"], places=2)

    def test_run_secure_division_and_parties(self):
        self.ppkm("gen-data", "-o", "d")
        self.ppkm("run", "-m", "shk", "--division", "secure", "-k", 3, "-d", "d/full.csv",
                  "--parties", 3, "--stats", "s.json", "--model", "m.json")
        s = self.stats("s.json")
        self.assertEqual(set(s["rounds_per_iteration"]), {2 * 3 + 150})
        self.assertEqual(s["parties"], 3)
        self.assertEqual(s["revealed_values"], [])
        for j in (1, 2, 3):
            self.assertTrue((self.dir / f"m.P{j}.skm1").exists())

    def test_run_party_files(self):
        self.ppkm("gen-data", "--split", "vertical:1,1", "-o", "v")
        self.ppkm("run", "-m", "svk", "--party-data", "v/party1.csv", "v/party2.csv",
                  "--stats", "s.json", "--model", "m.json", "--labels", "l.csv")
        self.ppkm("gen-data", "-o", "d")
        self.ppkm("run", "-m", "svk", "-d", "d/full.csv", "--stats", "s2.json",
                  "--model", "m2.json", "--labels", "l2.csv")
        self.assertEqual(labels(self.dir / "l.csv"), labels(self.dir / "l2.csv"))

    def test_non_convergence_exit_code(self):
        self.ppkm("gen-data", "-o", "d")
        proc = self.ppkm("run", "-m", "shk", "-d", "d/full.csv", "--max-iters", 1,
                         "--stats", "s.json", "--model", "m.json", check=3)
        self.assertIn("partial model", proc.stderr)
        self.assertFalse(self.stats("s.json")["converged"])
        self.assertTrue((self.dir / "m.json").exists())

    def test_error_exit_codes(self):
        self.ppkm("gen-data", "-o", "d")
        self.ppkm("run", "-m", "shk", "-d", "missing.csv", check=2)
        self.ppkm("run", "-m", "shk", "-d", "d/full.csv", "--k", 401, check=1)
        self.ppkm("run", "-m", "bogus", "-d", "d/full.csv", check=1)
        self.ppkm("run", "-m", "svk", "-d", "d/full.csv", "--split", "horizontal:200,200", check=1)
        self.ppkm("no-such-command", check=1)
        (self.dir / "bad.csv").write_text("x1,x2\n1,oops\n")
        self.ppkm("run", "-m", "shk", "-d", "bad.csv", check=2)

    # predict

    def test_predict_reproduces_training_labels(self):
        self.ppkm("gen-data", "-o", "d")
        for mode in ("shk", "svk"):
            self.ppkm("run", "-m", mode, "-d", "d/full.csv", "--stats", f"{mode}.json",
                      "--model", f"{mode}_model.json", "--labels", f"{mode}_train.csv")
            self.ppkm("predict", "--model", f"{mode}_model.json", "-d", "d/full.csv",
                      "-o", f"{mode}_pred.csv")
            self.assertEqual(labels(self.dir / f"{mode}_pred.csv"),
                             labels(self.dir / f"{mode}_train.csv"))

    def test_predict_bob_rows_match_plain_oracle(self):
        self.ppkm("gen-data", "--split", "horizontal:200,200", "-o", "h")
        self.ppkm("run", "-m", "shk", "--party-data", "h/party1.csv", "h/party2.csv",
                  "--stats", "s.json", "--model", "m.json", "--reveal-centers")
        with open(self.dir / "m.json") as f:
            centers = json.load(f)["centers"]
        self.ppkm("predict", "--model", "m.json", "-d", "h/party2.csv", "--owner", 2, "-o", "bob.csv")
        self.assertEqual(labels(self.dir / "bob.csv"), nearest(points(self.dir / "h" / "party2.csv"), centers))

    def test_predict_empty_and_mismatched(self):
        self.ppkm("gen-data", "-o", "d")
        self.ppkm("run", "-m", "shk", "-d", "d/full.csv", "--stats", "s.json", "--model", "m.json")
        (self.dir / "empty.csv").write_text("")
        self.ppkm("predict", "--model", "m.json", "-d", "empty.csv", "-o", "out.csv")
        self.assertEqual((self.dir / "out.csv").read_text(), "label\n")
        (self.dir / "wide.csv").write_text("x1,x2,x3\n1,2,3\n")
        self.ppkm("predict", "--model", "m.json", "-d", "wide.csv", check=2)
        self.ppkm("predict", "--model", "nope.json", "-d", "wide.csv", check=2)

    # rounds-report

    def test_rounds_report(self):
        proc = self.ppkm("rounds-report", "--k", 2, 8)
        table = list(csv.DictReader(proc.stdout.splitlines()))
        self.assertTrue(table)
        self.assertTrue(all(r["diff"] == "0" for r in table))
        get = {(r["k"], r["protocol"]): int(r["measured"]) for r in table}
        self.assertEqual(get[("2", "LabelSamples")], 12)
        self.assertEqual(get[("8", "SHK-means (secure division)")], 166)
        self.assertEqual(get[("8", "SVK-means")], 72)
        self.ppkm("rounds-report", "--format", "json", "-o", "r.json")
        with open(self.dir / "r.json") as f:
            data = json.load(f)
        self.assertEqual({r["k"] for r in data}, {2, 3, 4, 8})
        self.assertTrue(all(r["measured"] == r["formula"] for r in data))

    def test_rounds_report_other_cost_model(self):
        proc = self.ppkm("rounds-report", "--k", 3, "--drelu-rounds", 4, "--division-rounds", 60)
        table = list(csv.DictReader(proc.stdout.splitlines()))
        self.assertTrue(all(r["diff"] == "0" for r in table))
        get = {r["protocol"]: int(r["measured"]) for r in table}
        self.assertEqual(get["LabelSamples"], 2 * 3 + 4)
        self.assertEqual(get["SHK-means (fast division)"], 2 * 3 + 4 + 2 * 4)
        self.assertEqual(get["SHK-means (secure division)"], 2 * 3 + 4 + 2 * 4 + 60)
        self.ppkm("rounds-report", "--drelu-rounds", 4, check=1)

    # demo

    def test_demo_files(self):
        self.ppkm("demo", "--mode", "horizontal", "-o", "h")
        self.assertEqual(len(rows(self.dir / "h" / "ground_truth.csv")), 400)
        self.assertEqual(len(rows(self.dir / "h" / "alice_labels.csv")), 200)
        self.assertEqual(len(rows(self.dir / "h" / "secure_labels.csv")), 400)
        self.assertEqual(labels(self.dir / "h" / "secure_labels.csv"),
                         labels(self.dir / "h" / "full_plain_labels.csv"))
        with open(self.dir / "h" / "report.json") as f:
            report = json.load(f)
        self.assertGreater(report["alice_mislabel_rate"], 0.05)

        self.ppkm("demo", "--mode", "vertical", "-o", "v")
        centers = rows(self.dir / "v" / "alice_centers.csv")
        self.assertEqual(len(centers), 4)
        self.assertEqual(len(centers[0]), 1)
        with open(self.dir / "v" / "report.json") as f:
            report = json.load(f)
        self.assertLess(report["alice_truth_agreement"], 0.9)
        self.assertEqual(report["secure_plain_agreement"], 1.0)

    # determinism and configuration

    def test_determinism(self):
        self.ppkm("gen-data", "-o", "d")
        for rep in ("a", "b"):
            for mode in ("shk", "svk"):
                self.ppkm("run", "-m", mode, "-d", "d/full.csv", "--seed", 5,
                          "--stats", f"{rep}/{mode}_stats.json", "--model", f"{rep}/{mode}.json")
        files = sorted(p.name for p in (self.dir / "a").iterdir())
        self.assertEqual(len(files), 2 * 4)
        for name in files:
            self.assertEqual((self.dir / "a" / name).read_bytes(),
                             (self.dir / "b" / name).read_bytes(), name)

    def test_config_file_and_precedence(self):
        self.ppkm("gen-data", "-o", "d")
        (self.dir / "cfg.toml").write_text("seed = 3\n[run]\nk = 2\nmode = \"svk\"\n")
        self.ppkm("--config", "cfg.toml", "run", "-d", "d/full.csv", "--stats", "a.json",
                  "--model", "a_model.json")
        a = self.stats("a.json")
        self.assertEqual((a["k"], a["seed"], a["mode"]), (2, 3, "svk"))
        self.ppkm("--config", "cfg.toml", "run", "-d", "d/full.csv", "-k", 3, "--stats", "b.json",
                  "--model", "b_model.json")
        self.assertEqual(self.stats("b.json")["k"], 3)


def main():
    global EXE, SCHEMA
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 1
    EXE = os.path.abspath(sys.argv[1])
    SCHEMA = os.path.abspath(sys.argv[2])
    result = unittest.main(argv=[sys.argv[0], "-v"], exit=False).result
    return 0 if result.wasSuccessful() else 1


if __name__ == "__main__":
    sys.exit(main())
