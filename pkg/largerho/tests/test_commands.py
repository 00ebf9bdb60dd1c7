import io
import json
import math
import tempfile
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings, tag

from largerho.management.commands.stenflo import Command as StenfloCommand
from largerho.melnikov import solve_sym_branch
from largerho.models import Run
from largerho.params import Params

EQUILIBRIUM_RHO_10 = f"{math.sqrt(24.0)},{math.sqrt(24.0)},9"


class CommandTestCase(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out_dir = Path(self.tmp.name)
        override = override_settings(LARGERHO_OUTPUT_DIR=self.out_dir)
        override.enable()
        self.addCleanup(override.disable)

    def call(self, name, **options):
        out, err = io.StringIO(), io.StringIO()
        call_command(name, stdout=out, stderr=err, **options)
        return out.getvalue(), err.getvalue()

    def data_lines(self, text):
        return [line for line in text.splitlines() if line and not line.startswith("#")]

    def run_log(self):
        path = self.out_dir / "runs.jsonl"
        return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]


class BranchCommandTests(CommandTestCase):
    def test_grid_with_no_branch_row(self):
        out, err = self.call("branch", lambda_min=0.5, lambda_max=1.5, points=3)
        self.assertTrue(out.startswith("# largerho"))
        self.assertIn("# seed: 12345", out)
        lines = self.data_lines(out)
        self.assertEqual(lines[0], "lambda,branch,sigma,beta,k,B,trDM,detDM,h_limit,residual,status")
        statuses = [line.rsplit(",", 1)[1] for line in lines[1:]]
        self.assertEqual(statuses, ["no-branch", "ok", "ok"])
        self.assertIn("branch finished", err)

        run = Run.objects.get()
        self.assertEqual(run.status, "OK")
        self.assertEqual(run.summary["no-branch"], 1)
        self.assertEqual(self.run_log()[-1]["status"], "OK")

    def test_transport_file(self):
        target = self.out_dir / "branch.csv"
        self.call("branch", lambda_min=0.8, lambda_max=1.2, points=2, branch="both", transport=True, out=str(target))
        self.assertTrue(target.is_file())
        transport = self.data_lines((self.out_dir / "branch_transport.csv").read_text(encoding="utf-8"))
        self.assertEqual(transport[0], "lambda,h1,h2,R1,R2,gap")
        self.assertEqual(len(transport), 3)

    def test_bad_config_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("branch", lambda_min=2.0, lambda_max=1.0)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertEqual(Run.objects.get().status, "CONFIG_ERROR")

    def test_unknown_config_file_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("branch", config="no-such-config")
        self.assertEqual(ctx.exception.returncode, 2)


class SimulateCommandTests(CommandTestCase):
    def test_equilibrium_run(self):
        out, _ = self.call("simulate", rho=10.0, sigma=10.0, x0=EQUILIBRIUM_RHO_10, t_end=5.0, stride=10)
        self.assertEqual(self.data_lines(out)[0], "t,X,Y,Z")
        summary = Run.objects.get().summary
        self.assertAlmostEqual(summary["H"], 24.0, delta=1e-4)
        self.assertAlmostEqual(summary["bound"], 24.0, places=10)
        self.assertAlmostEqual(summary["nusselt"], 1.0 + 2.0 * 24.0 / (8.0 / 3.0 * 10.0), delta=1e-5)
        self.assertGreater(summary["h_limit"], 0.0)


class HysteresisCommandTests(CommandTestCase):
    def test_constant_schedule(self):
        target = self.out_dir / "hyst.csv"
        self.call("hysteresis", schedule="0:0.3, 20:0.3", window=5.0, out=str(target))
        lines = self.data_lines(target.read_text(encoding="utf-8"))
        self.assertEqual(lines[0], "t,lambda,X,localH")
        self.assertEqual((self.out_dir / "hyst_events.jsonl").read_text(encoding="utf-8"), "")
        summary = Run.objects.get().summary
        self.assertEqual(summary["events"], 0)
        self.assertEqual(summary["schedule"], "0:0.3, 20:0.3")


class OrbitCommandTests(CommandTestCase):
    def test_orbit_sample(self):
        out, _ = self.call("orbit_sample", A=0.2, B=1.0, points=50)
        lines = self.data_lines(out)
        self.assertEqual(lines[0], "tau,xi,eta,zeta")
        self.assertEqual(len(lines), 51)
        self.assertEqual(Run.objects.get().summary["tag"], "L1")

    def test_orbit_sample_from_config_file(self):
        path = self.out_dir / "sample.cfg"
        path.write_text("[orbit-sample]\nA = 0.2\nB = 1.0\npoints = 10\n", encoding="utf-8")
        out, _ = self.call("orbit_sample", config=str(path))
        self.assertEqual(len(self.data_lines(out)), 11)

    def test_orbit_sample_needs_both_constants(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("orbit_sample", A=0.2)
        self.assertEqual(ctx.exception.returncode, 2)

    def test_orbit_without_branch_exits_1(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("orbit", rho=1e6, lam=0.5)
        self.assertEqual(ctx.exception.returncode, 1)
        run = Run.objects.get()
        self.assertEqual(run.status, "NUMERICAL_FAILURE")
        self.assertEqual(run.summary["type"], "NoBranchError")
        self.assertEqual(self.run_log()[-1]["status"], "NUMERICAL_FAILURE")


class VerifyCommandTests(CommandTestCase):
    def test_short_series_fails_interval_claim(self):
        target = self.out_dir / "verify.csv"
        with self.assertRaises(CommandError) as ctx:
            self.call("verify", grid=10, N=9, out=str(target))
        self.assertEqual(ctx.exception.returncode, 1)
        rows = self.data_lines(target.read_text(encoding="utf-8"))
        self.assertEqual(rows[0], "claim,status,worst_margin,worst_at,detail")
        status = {row.split(",")[0]: row.split(",")[1] for row in rows[1:]}
        self.assertEqual(status["F2_positive"], "PASS")
        self.assertEqual(status["interval_of_positivity"], "FAIL")
        tau = self.data_lines((self.out_dir / "verify_tau.csv").read_text(encoding="utf-8"))
        self.assertEqual(tau[1].split(",")[:2], ["4", "3/2048"])
        self.assertEqual(Run.objects.get().summary["failed"][0], "interval_of_positivity")


class StenfloChecksTests(SimpleTestCase):
    def test_melnikov_checks(self):
        params = Params.from_lambda(1.5, 8.0 / 3.0, 1e6)
        err = io.StringIO()
        values, ok = StenfloCommand(stderr=err).melnikov_checks(solve_sym_branch(params), params, 0.1)
        self.assertTrue(ok)
        self.assertTrue(values["m4_vanishes_iff_chi0_zero"])
        self.assertTrue(values["det_sign_opposite_3d"])
        self.assertLess(values["detDM4"] * values["detDM3"], 0.0)
        self.assertIn("expected opposite signs", err.getvalue())
        self.assertIn("-sigma T det DM3", values["det_relation"])


@tag("slow")
class StenfloCommandTests(CommandTestCase):
    def test_bundled_config(self):
        out, _ = self.call("stenflo", config="stenflo")
        self.assertTrue(out.startswith("H = "))
        summary = Run.objects.get().summary
        self.assertTrue(summary["det_sign_opposite_3d"])
        self.assertLessEqual(summary["transport_relative_error"], 0.01)
