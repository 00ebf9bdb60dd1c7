import logging

from largerho.exceptions import NoBranchError
from largerho.io_utils import write_csv
from largerho.management.base import LabCommand
from largerho.melnikov import solve_sym_branch
from largerho.odesim import TRANSIENT_FRACTION, measure_transport, random_initial_condition
from largerho.serializers import TransportSummarySerializer
from largerho.states import Frame, State3
from largerho.transport import fixed_point_transport, h_transport, nusselt, proportionality_check

logger = logging.getLogger(__name__)

# H may exceed the equilibrium value by this much from finite-time averaging
BOUND_SLACK = 5e-3


class Command(LabCommand):
    help = "Integrate the Lorenz system from a (seeded) initial condition and measure the transport H = <XY>."
    section = "simulate"

    def add_command_arguments(self, parser):
        parser.add_argument("--t-end", dest="t_end", type=float)
        parser.add_argument("--t-transient", dest="t_transient", type=float)
        parser.add_argument("--x0", type=str, help="Initial state X,Y,Z; random (seeded) when omitted")
        parser.add_argument("--frame", choices=("original", "rescaled"), help="Frame the integration runs in")
        parser.add_argument("--stride", type=int, help="Write every n-th accepted step")

    def run(self, config):
        params = self.params(config)
        if config.get("x0"):
            x0 = State3(*config["x0"], Frame.ORIGINAL)
        else:
            x0 = random_initial_condition(params, config["seed"])
        transient = config.get("t_transient")
        if transient is None:
            transient = TRANSIENT_FRACTION * config["t_end"]
        measurement, traj = measure_transport(
            params, x0, config["t_end"], transient, config["rtol"], config["atol"], Frame(config["frame"]),
        )

        stride = config["stride"]
        rows = ((t, *state[:3]) for t, state in zip(traj.times[::stride], traj.states[::stride]))
        write_csv(self.out_path(config), ("t", "X", "Y", "Z"), rows, self.header(config), self.stdout)

        bound = fixed_point_transport(params.rho, params.beta).H
        h_limit = None
        if params.lam > 2.0 / 3.0 and params.rho > 1.0:
            try:
                h_limit = h_transport(solve_sym_branch(params, stability=False), params).h1 * params.rho
            except NoBranchError:
                pass
        report = proportionality_check(traj, params.beta, transient)
        summary = TransportSummarySerializer({
            **measurement._asdict(),
            "bound": bound,
            "gap": bound - measurement.H,
            "h_limit": h_limit,
            "proportionality": report.worst,
            "nusselt": nusselt(measurement.H, params.rho, params.beta),
        }).data
        within_bound = measurement.H <= bound * (1.0 + BOUND_SLACK) + BOUND_SLACK
        if not within_bound:
            logger.error(f"H={measurement.H:.8g} exceeds the equilibrium bound {bound:.8g}")
        self.stderr.write(f"H = {measurement.H:.10g}, beta<Z> = {measurement.beta_avg_z:.10g}, bound = {bound:.10g}")
        return dict(summary), within_bound
