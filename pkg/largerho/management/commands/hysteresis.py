import logging

import numpy as np

from largerho.io_utils import write_csv, write_jsonl
from largerho.management.base import LabCommand
from largerho.odesim import hysteresis_run
from largerho.serializers import HysteresisEventSerializer

logger = logging.getLogger(__name__)

COLUMNS = ("t", "lambda", "X", "localH")


class Command(LabCommand):
    help = "Integrate at fixed rho and beta while lambda follows a schedule; log the regime switches."
    section = "hysteresis"

    def add_command_arguments(self, parser):
        parser.add_argument("--schedule", type=str, help="Breakpoints t:lambda, e.g. '0:0.3, 300:2.4, 600:0.3'")
        parser.add_argument("--lambda-min", dest="lambda_min", type=float, help="Parabolic schedule minimum")
        parser.add_argument("--lambda-max", dest="lambda_max", type=float, help="Parabolic schedule maximum")
        parser.add_argument("--t-end", dest="t_end", type=float, help="Parabolic schedule duration")
        parser.add_argument("--window", type=float, help="Averaging window for the local transport")
        parser.add_argument("--spread-threshold", dest="spread_threshold", type=float)
        parser.add_argument("--jump-threshold", dest="jump_threshold", type=float)

    def events_path(self, config):
        path = self.out_path(config)
        return None if path is None else path.with_name(f"{path.stem}_events.jsonl")

    def run(self, config):
        schedule = config["lambda_schedule"]
        result = hysteresis_run(
            config["rho"], config["beta"], schedule,
            rtol=config["rtol"], atol=config["atol"], window=config["window"],
            spread_threshold=config["spread_threshold"], jump_threshold=config["jump_threshold"],
            seed=config["seed"],
        )
        traj = result.trajectory
        starts = np.array([w.t_start for w in result.windows])
        local_h = np.array([w.H_local for w in result.windows])
        if starts.size:
            index = np.clip(np.searchsorted(starts, traj.times, side="right") - 1, 0, starts.size - 1)
            step_h = local_h[index]
        else:
            step_h = np.full(traj.times.shape, np.nan)
        lam = schedule.lam(traj.times)
        rows = zip(traj.times, lam, traj.states[:, 0], step_h)
        write_csv(self.out_path(config), COLUMNS, rows, self.header(config), self.stdout)

        events = HysteresisEventSerializer(result.events, many=True).data
        write_jsonl(self.events_path(config), events, self.stderr)
        summary = {
            "events": len(events),
            "windows": len(result.windows),
            "H_equilibrium": result.H_equilibrium,
            "schedule": config["schedule"],
            "switches": [f"{e['from_regime']}->{e['to_regime']}@{e['lam']:.4f}" for e in events],
        }
        logger.info(f"hysteresis: {len(events)} events over {len(result.windows)} windows")
        return summary, True
