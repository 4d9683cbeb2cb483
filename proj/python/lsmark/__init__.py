"""Python access to the lsmark core: marking verification, Gram search, counting facts."""

import json

from . import _lsmark
from ._lsmark import (
    LsmError,
    b3_two_lsm_fact,
    gram_gradient,
    gram_objective,
    prop4_unitaries,
    rate_compare,
    unmarkable_by_counting,
)

__version__ = _lsmark.__version__

__all__ = [
    "LsmError",
    "b3_two_lsm_fact",
    "cli",
    "gram_gradient",
    "gram_objective",
    "prop4_unitaries",
    "rate_compare",
    "search_witness",
    "unmarkable_by_counting",
    "verify",
]


def verify(name, threads=1, leaves=False):
    """Verify a built-in protocol ("x4", "b4-catalytic", "b3-catalytic"); returns the report dict."""
    return json.loads(_lsmark.verify_json(name, threads, leaves))


def search_witness(unitaries, restarts=200, seed=0, threads=1):
    """Multi-start search for chi making {U_k chi} orthonormal; returns the result dict."""
    return json.loads(_lsmark.search_witness_json(list(unitaries), restarts, seed, threads))


def cli(*args):
    """Run the CLI in-process with `--json -`; returns (exit_code, report_dict_or_None)."""
    code, out, _ = _lsmark.run_cli(["--json", "-", *map(str, args)])
    return code, (json.loads(out) if out.strip() else None)
