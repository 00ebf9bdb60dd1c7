import json
import logging

from largerho.io_utils import clean_json, write_json
from largerho.management.base import LabCommand
from largerho.melnikov import Branch, solve_branch
from largerho.serializers import BranchPointSerializer, MelnikovComparisonSerializer, PeriodicOrbitSerializer
from largerho.shooting import compare_with_melnikov, orbit_transport, refine_orbit, seed_from_branch

logger = logging.getLogger(__name__)


class Command(LabCommand):
    help = "Refine a Melnikov-predicted periodic orbit by Newton shooting and compare its Floquet multipliers."
    section = "orbit"

    def add_command_arguments(self, parser):
        parser.add_argument("--branch", choices=("symmetric", "asymmetric"))
        parser.add_argument("--sign", type=int, choices=(1, -1), help="Member of the asymmetric pair")
        parser.add_argument("--max-iterations", dest="max_iterations", type=int)
        parser.add_argument("--tol", type=float, help="Accepted shooting residual")

    def run(self, config):
        params = self.params(config)
        point = solve_branch(params, Branch(config["branch"]))
        seed, period = seed_from_branch(point, config["sign"])
        logger.info(f"{point.branch.value} seed at lambda={params.lam:.6g}: k={point.k:.10g}, B={point.B:.10g}, T={period:.10g}")

        orbit = refine_orbit(
            seed, period, params, max_iterations=config["max_iterations"], tol=config["tol"],
        )
        comparison = compare_with_melnikov(orbit, point, params.epsilon)
        transport = orbit_transport(orbit, params)
        record = {
            "lambda": params.lam,
            "epsilon": params.epsilon,
            "branch_point": BranchPointSerializer(point).data,
            "orbit": PeriodicOrbitSerializer(orbit).data,
            "melnikov": MelnikovComparisonSerializer(comparison).data,
            "transport": transport._asdict(),
        }
        path = self.out_path(config)
        if path is None:
            self.stdout.write(json.dumps(clean_json(record), sort_keys=True, indent=2, default=str))
        else:
            write_json(path, record)

        note = "" if comparison.informative else ", epsilon too large for a first-order check"
        self.stderr.write(
            f"{orbit.stability.value} orbit, period {orbit.period:.10g}, "
            f"Floquet error {comparison.max_abs_error:.3e} (tolerance {comparison.tolerance:.3e}{note})"
        )
        summary = {
            "period": orbit.period,
            "stability": orbit.stability.value,
            "symmetry": orbit.symmetry.value,
            "residual": orbit.converged_residual,
            "iterations": orbit.iterations,
            "floquet_error": comparison.max_abs_error,
            "floquet_informative": comparison.informative,
            "agrees": comparison.agrees,
        }
        return summary, True
