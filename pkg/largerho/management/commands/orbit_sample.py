from largerho.io_utils import write_csv
from largerho.management.base import LabCommand
from largerho.melnikov import Branch, solve_branch
from largerho.orbits import REGION_TOL, ConservedPair, OrbitFamily, sample_orbit

COLUMNS = ("tau", "xi", "eta", "zeta")


class Command(LabCommand):
    help = "Sample one period of an unperturbed orbit, given (A, B) or taken from the branch at lambda."
    section = "orbit_sample"

    def add_command_arguments(self, parser):
        parser.add_argument("--branch", choices=("symmetric", "asymmetric"))
        parser.add_argument("--sign", type=int, choices=(1, -1))
        parser.add_argument("--points", type=int)
        parser.add_argument("--A", dest="A", type=float, help="Conserved A = xi**2/2 - zeta")
        parser.add_argument("--B", dest="B", type=float, help="Conserved B = sqrt(eta**2 + zeta**2)")

    def run(self, config):
        if config.get("A") is not None:
            family = OrbitFamily.for_pair(ConservedPair(A=config["A"], B=config["B"]), config["sign"], tol=REGION_TOL)
        else:
            point = solve_branch(self.params(config), Branch(config["branch"]), stability=False)
            family = point.family(config["sign"])
        tau, states = sample_orbit(family, config["points"])
        rows = zip(tau, states.xi, states.eta, states.zeta)
        write_csv(self.out_path(config), COLUMNS, rows, self.header(config), self.stdout)
        return {"tag": family.tag.value, "A": family.pair.A, "B": family.pair.B, "points": len(tau)}, True
