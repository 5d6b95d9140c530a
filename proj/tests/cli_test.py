"""End-to-end checks of the cruxlite command line and its json report."""
import json
import os
import subprocess
import sys
import tempfile
import unittest

import jsonschema

BIN, CORPUS, SCHEMA = sys.argv[1:4]
del sys.argv[1:4]

with open(SCHEMA) as f:
    VALIDATOR = jsonschema.Draft202012Validator(json.load(f))


def cruxlite(*args, env=None):
    e = dict(os.environ)
    e.pop("CRUXLITE_SOLVER", None)
    e.update(env or {})
    return subprocess.run([BIN, *args], capture_output=True, text=True, env=e, timeout=600)


def corpus(name):
    return os.path.join(CORPUS, name)


def write(dirname, name, text):
    path = os.path.join(dirname, name)
    with open(path, "w") as f:
        f.write(text)
    return path


class Cli(unittest.TestCase):
    def test_all_proven(self):
        r = cruxlite("verify", corpus("vector_clock.cir"))
        self.assertEqual(r.returncode, 0, r.stdout + r.stderr)
        self.assertIn("PASS", r.stdout)
        self.assertIn("3 jobs: 3 proven", r.stdout)

    def test_refuted_reports_model(self):
        r = cruxlite("verify", corpus("deserialize_bug_bv4.cir"), "--test", "decode_never_fails")
        self.assertEqual(r.returncode, 1)
        self.assertIn("bounds at", r.stdout)
        self.assertIn("bytes[", r.stdout)
        self.assertIn("replay: confirmed", r.stdout)

    def test_json_schema_and_content(self):
        for name in ["vector_clock_bv4.cir", "vector_clock_bug_bv4.cir", "mix_sha_like_bug_bv2.cir",
                     "deserialize_bug_bv4.cir", "arx_mini_bv2.cir"]:
            r = cruxlite("verify", corpus(name), "--report", "json")
            report = json.loads(r.stdout)
            VALIDATOR.validate(report)
            self.assertEqual(report["exit_status"], r.returncode)
        r = cruxlite("verify", corpus("vector_clock.cir"), "--report", "json", "--test", "merge_vc_equiv")
        report = json.loads(r.stdout)
        VALIDATOR.validate(report)
        spec = report["jobs"][0]
        self.assertEqual(spec["summary"]["mode"], "Substitution")
        self.assertEqual(spec["summary"]["reference"], "ref_max")
        self.assertEqual(report["jobs"][1]["requires"], ["merge_c_equiv"])

    def test_trusted_report_validates(self):
        r = cruxlite("verify", corpus("mix_sha_like_bv2.cir"), "--report", "json", "--trust-specs")
        self.assertEqual(r.returncode, 0)
        report = json.loads(r.stdout)
        VALIDATOR.validate(report)
        self.assertTrue(report["jobs"][0]["trusted"])

    def test_reports_are_deterministic(self):
        args = ["verify", corpus("vector_clock_bug_bv4.cir"), corpus("mix_sha_like_bv2.cir"), "--report", "json"]
        a = cruxlite(*args).stdout
        b = cruxlite(*args).stdout
        c = cruxlite(*args, "--jobs", "4").stdout
        self.assertEqual(a, b)
        self.assertEqual(a, c)

    def test_usage_errors(self):
        self.assertEqual(cruxlite().returncode, 3)
        self.assertEqual(cruxlite("verify").returncode, 3)
        self.assertEqual(cruxlite("verify", corpus("vector_clock.cir"), "--bogus").returncode, 3)
        self.assertEqual(cruxlite("verify", corpus("vector_clock.cir"), "--test", "nope").returncode, 3)
        self.assertEqual(cruxlite("verify", corpus("vector_clock.cir"), "--backend", "external").returncode, 3)
        with tempfile.TemporaryDirectory() as d:
            bad = write(d, "bad.cir", "fn f( -> unit {\n}\n")
            r = cruxlite("verify", bad)
            self.assertEqual(r.returncode, 3)
            self.assertIn("bad.cir:1:", r.stderr)

    def test_engine_error_and_vacuity(self):
        with tempfile.TemporaryDirectory() as d:
            spin = write(d, "spin.cir", """#[test]
fn spins() -> unit {
  let x: bv8
  let c: bool
entry:
  x = symbolic bv8 "x"
  goto loop
loop:
  c = eq x, x
  br c loop out
out:
  ret ()
}
""")
            r = cruxlite("verify", spin, "--max-unroll", "4")
            self.assertEqual(r.returncode, 2)
            self.assertIn("unroll bound exceeded", r.stdout)
            vac = write(d, "vac.cir", """#[test]
fn never() -> unit {
  let x: bv8
  let c: bool
entry:
  x = symbolic bv8 "x"
  c = ult x, 0:bv8
  assume c
  ret ()
}
""")
            self.assertEqual(cruxlite("verify", vac).returncode, 1)
            self.assertEqual(cruxlite("verify", vac, "--allow-vacuous").returncode, 0)

    def test_dump_smt(self):
        with tempfile.TemporaryDirectory() as d:
            out = os.path.join(d, "smt")
            r = cruxlite("verify", corpus("vector_clock_bv4.cir"), "--dump-smt", out)
            self.assertEqual(r.returncode, 0)
            files = sorted(os.listdir(out))
            self.assertTrue(files)
            self.assertTrue(all(f.endswith(".smt2") for f in files), files)
            with open(os.path.join(out, files[0])) as f:
                self.assertIn("(check-sat)", f.read())

    def test_solver_env_default(self):
        with tempfile.TemporaryDirectory() as d:
            marker = os.path.join(d, "called")
            fake = write(d, "fake.sh", f"#!/bin/sh\ncat > /dev/null\ntouch {marker}\necho unsat\n")
            os.chmod(fake, 0o755)
            r = cruxlite("verify", corpus("vector_clock_bv4.cir"), "--backend", "external",
                         env={"CRUXLITE_SOLVER": fake})
            self.assertEqual(r.returncode, 0, r.stdout + r.stderr)
            self.assertTrue(os.path.exists(marker))


if __name__ == "__main__":
    unittest.main()
