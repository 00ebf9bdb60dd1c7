import logging
import math

from largerho.management.base import LabCommand
from largerho.melnikov import solve_sym_branch, stenflo_melnikov
from largerho.orbits import period_action_frequency
from largerho.odesim import TRANSIENT_FRACTION, measure_transport, random_initial_condition
from largerho.serializers import TransportSummarySerializer
from largerho.shooting import orbit_transport, refine_orbit, seed_from_branch
from largerho.states import Frame
from largerho.transport import fixed_point_transport, h_transport

logger = logging.getLogger(__name__)

# relative distance of the simulated H from h1 rho accepted at large rho
TRANSPORT_TOL = 0.01
# determinant of the four-dimensional DM against -sigma T det DM3
BLOCK_TOL = 1e-9
DET_RELATION = (
    "det DM4 = -sigma T det DM3: the chi row of the Melnikov matrix is -sigma T, "
    "so the sign is opposite to the three-dimensional determinant while chi contracts"
)


class Command(LabCommand):
    help = "Lorenz-Stenflo extension: Melnikov structure on the symmetric branch, simulated transport, chi decay."
    section = "stenflo"

    def add_command_arguments(self, parser):
        parser.add_argument("--s", dest="s_rot", type=float, help="Rotation parameter s")
        parser.add_argument("--chi0", type=float, help="chi level used for the fourth Melnikov function")
        parser.add_argument("--t-end", dest="t_end", type=float)
        parser.add_argument("--t-transient", dest="t_transient", type=float)
        parser.add_argument("--orbit", action="store_true", default=None, help="Also refine orbits at rho and 4 rho")

    def melnikov_checks(self, point, params, chi0):
        zero = stenflo_melnikov(point, 0.0, params)
        shifted = stenflo_melnikov(point, chi0, params)
        m4_ok = zero.M4 == 0.0 and (shifted.M4 != 0.0) == (chi0 != 0.0)
        expected = -params.sigma * period_action_frequency(point.family()).T * point.detDM
        det_ok = (
            zero.detDM != 0.0
            and math.copysign(1.0, zero.detDM) == -math.copysign(1.0, point.detDM)
            and abs(zero.detDM - expected) <= BLOCK_TOL * abs(expected)
        )
        logger.info(f"stenflo Melnikov: M4(chi0={chi0:g}) = {shifted.M4:.6g}, det DM4 = {zero.detDM:.6g}")
        if det_ok:
            self.stderr.write(f"det DM4 = {zero.detDM:.6g}, det DM3 = {point.detDM:.6g} (expected opposite signs; {DET_RELATION})")
        else:
            logger.error(f"det DM4 = {zero.detDM:.6g} breaks {DET_RELATION}")
        return {
            "M1tilde": zero.M1tilde,
            "M3": zero.M3,
            "M4_chi0": shifted.M4,
            "detDM4": zero.detDM,
            "detDM3": point.detDM,
            "m4_vanishes_iff_chi0_zero": m4_ok,
            "det_sign_opposite_3d": det_ok,
            "det_relation": DET_RELATION,
        }, m4_ok and det_ok

    def chi_decay(self, point, params, s_rot):
        seed, period = seed_from_branch(point, dimension=4)
        means = {}
        for rho in (params.rho, 4.0 * params.rho):
            orbit = refine_orbit(seed, period, params.with_rho(rho), s_rot=s_rot)
            means[rho] = orbit_transport(orbit, params.with_rho(rho)).chi_mean
            logger.info(f"stenflo orbit at rho={rho:g}: period {orbit.period:.10g}, <chi> = {means[rho]:.3e}")
        small, large = means[params.rho], means[4.0 * params.rho]
        return {"chi_mean": {f"{rho:g}": value for rho, value in means.items()}}, abs(large) <= 0.5 * abs(small) or abs(small) < 1e-14

    def run(self, config):
        params = self.params(config)
        s_rot = config["s_rot"]
        point = solve_sym_branch(params)
        summary, ok = self.melnikov_checks(point, params, config["chi0"])

        x0 = random_initial_condition(params, config["seed"], dimension=4)
        transient = config.get("t_transient")
        if transient is None:
            transient = TRANSIENT_FRACTION * config["t_end"]
        measurement, _ = measure_transport(
            params, x0, config["t_end"], transient, config["rtol"], config["atol"], Frame.RESCALED, s_rot=s_rot,
        )
        h_limit = h_transport(point, params).h1 * params.rho
        bound = fixed_point_transport(params.rho, params.beta).H
        relative = abs(measurement.H - h_limit) / h_limit
        summary["transport"] = dict(TransportSummarySerializer({
            **measurement._asdict(),
            "bound": bound,
            "gap": bound - measurement.H,
            "h_limit": h_limit,
            "proportionality": None,
            "nusselt": None,
        }).data)
        summary["transport_relative_error"] = relative
        transport_ok = relative <= TRANSPORT_TOL
        if not transport_ok:
            logger.error(f"stenflo H={measurement.H:.8g} is {relative:.3%} from h1 rho={h_limit:.8g}")
        ok = ok and transport_ok

        if config["orbit"]:
            chi, chi_ok = self.chi_decay(point, params, s_rot)
            summary.update(chi)
            summary["chi_decays"] = chi_ok
            ok = ok and chi_ok

        self.stdout.write(f"H = {measurement.H:.10g}, h1 rho = {h_limit:.10g}, relative {relative:.3e}")
        return summary, ok
