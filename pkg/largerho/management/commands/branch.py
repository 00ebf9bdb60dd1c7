import logging

import numpy as np

from largerho.exceptions import ConfigError, LabError, NoBranchError
from largerho.io_utils import write_csv
from largerho.management.base import LabCommand
from largerho.melnikov import RESIDUAL_TOL, Branch, BranchPoint, sweep_branches
from largerho.params import Params
from largerho.transport import h_transport, transport_curve

logger = logging.getLogger(__name__)

COLUMNS = ("lambda", "branch", "sigma", "beta", "k", "B", "trDM", "detDM", "h_limit", "residual", "status")
TRANSPORT_COLUMNS = ("lambda", "h1", "h2", "R1", "R2", "gap")


class Command(LabCommand):
    help = "Solve the symmetric and/or asymmetric periodic-orbit branch on a lambda grid."
    section = "branch"

    def add_command_arguments(self, parser):
        parser.add_argument("--lambda-min", dest="lambda_min", type=float)
        parser.add_argument("--lambda-max", dest="lambda_max", type=float)
        parser.add_argument("--points", type=int)
        parser.add_argument("--branch", choices=("symmetric", "asymmetric", "both"))
        parser.add_argument("--fix", choices=("beta", "sigma"), help="Parameter held fixed while lambda varies")
        parser.add_argument("--transport", action="store_true", default=None, help="Also write the transport curve")

    def params_for(self, lam: float, config) -> Params:
        if config["fix"] == "beta":
            return Params.from_lambda(lam, config["beta"], config.get("rho"))
        sigma = config["sigma"]
        return Params(sigma=sigma, beta=(sigma + 1.0) / lam - 2.0, rho=config.get("rho"))

    def row(self, lam: float, branch: Branch, params, result) -> tuple:
        if isinstance(result, BranchPoint):
            residual = max(result.residuals)
            h = h_transport(result, params)
            h_limit = h.h1 if branch is Branch.SYMMETRIC else h.h2
            status = "ok" if residual <= RESIDUAL_TOL else "residual"
            return (lam, branch.value, result.sigma, result.beta, result.k, result.B,
                    result.trDM, result.detDM, h_limit, residual, status)
        status = "no-branch" if isinstance(result, NoBranchError) else "failed"
        sigma = params.sigma if params is not None else float("nan")
        beta = params.beta if params is not None else float("nan")
        return (lam, branch.value, sigma, beta) + (float("nan"),) * 6 + (status,)

    def run(self, config):
        grid = np.linspace(config["lambda_min"], config["lambda_max"], config["points"])
        branches = [Branch.SYMMETRIC, Branch.ASYMMETRIC] if config["branch"] == "both" else [Branch(config["branch"])]

        params_list = []
        for lam in grid:
            try:
                params_list.append(self.params_for(float(lam), config))
            except ConfigError as exc:
                logger.warning(f"lambda={lam:.6g}: {exc}")
                params_list.append(None)
        valid = [p for p in params_list if p is not None]

        rows = []
        for branch in branches:
            solved = iter(sweep_branches(valid, branch, config["jobs"]))
            for lam, params in zip(grid, params_list):
                result = next(solved) if params is not None else ConfigError("invalid parameters")
                if isinstance(result, LabError) and not isinstance(result, NoBranchError):
                    logger.error(f"{branch.value} lambda={lam:.6g}: {result}")
                rows.append(self.row(float(lam), branch, params, result))

        write_csv(self.out_path(config), COLUMNS, rows, self.header(config), self.stdout)
        counts = {status: sum(1 for r in rows if r[-1] == status) for status in ("ok", "no-branch", "residual", "failed")}

        if config["transport"]:
            curve = transport_curve(grid, config["beta"], config.get("rho"), config["jobs"])
            write_csv(self.out_path(config, "_transport"), TRANSPORT_COLUMNS, [tp.as_row() for tp in curve],
                      self.header(config), self.stdout)

        logger.info(f"branch rows: {counts}")
        return {"rows": len(rows), **counts}, counts["residual"] == 0 and counts["failed"] == 0
