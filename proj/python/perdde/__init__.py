"""Periodic solutions of forced delay differential equations."""

import json
from dataclasses import dataclass, field

from ._perdde import (
    SCHEMA_VERSION,
    PerddeError,
    TrigPoly,
    __version__,
    block_pair,
    collocation_size,
    command_names,
    lambda_k,
    monodromy,
    ode_poincare_degree,
    project,
    sample,
    sign_of_det,
    small_delay_eigentest,
)
from . import _perdde


@dataclass
class CommandResult:
    exit_code: int
    headline: str
    report: dict
    report_text: str
    files: list = field(default_factory=list)


def nonresonance_test(A, B, tau, period, chi=1):
    """Certificate for u' = A u + B u(t - tau) at period T, as a dict."""
    return json.loads(_perdde.nonresonance_test(A, B, tau, period, chi))


def floquet_report(A, B, tau, period, m):
    """Floquet multipliers and fixed-point index of the linear Poincare map."""
    return json.loads(_perdde.floquet_report(A, B, tau, period, m))


def run_command(command, config, out_dir="", seed=None, threads=None, force=False):
    """Runs a CLI command on a config dict (or JSON string) and returns its report."""
    text = config if isinstance(config, str) else json.dumps(config)
    code, headline, report, files = _perdde.run_command(command, text, str(out_dir), seed, threads, force)
    return CommandResult(code, headline, json.loads(report), report, list(files))


__all__ = [
    "SCHEMA_VERSION",
    "CommandResult",
    "PerddeError",
    "TrigPoly",
    "__version__",
    "block_pair",
    "collocation_size",
    "command_names",
    "floquet_report",
    "lambda_k",
    "monodromy",
    "nonresonance_test",
    "ode_poincare_degree",
    "project",
    "run_command",
    "sample",
    "sign_of_det",
    "small_delay_eigentest",
]
