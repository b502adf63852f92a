"""Shared fixtures and the acceptance-criterion report."""

import os
from collections import namedtuple
from pathlib import Path

import pytest

from colored_ito.cli import main
from colored_ito.config import load_config
from colored_ito.output import read_csv

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
DATA = Path(__file__).resolve().parent / "data"

_CRITERIA = {}

Sweep = namedtuple("Sweep", "cfg exit_code members_path aggregates_path members aggregates")


def record_criterion(number, passed, detail):
    """Store one pass/fail outcome; sub-checks of a criterion are and-ed."""
    ok, details = _CRITERIA.get(number, (True, []))
    _CRITERIA[number] = (ok and bool(passed), details + [detail])


@pytest.fixture(scope="session")
def criterion():
    return record_criterion


def _sweep(name, tmp_path_factory):
    cfg = load_config(CONFIGS / f"{name}.cfg")
    out = tmp_path_factory.mktemp(name) / f"{name}.csv"
    argv = ["converge", "--config", str(CONFIGS / f"{name}.cfg"), "--out", str(out)]
    workers = os.environ.get("COLORED_ITO_WORKERS")
    if workers:
        argv += ["--workers", workers]
    code = main(argv)
    agg = out.with_name(f"{name}.agg.csv")
    return Sweep(cfg, code, out, agg, read_csv(out), read_csv(agg))


@pytest.fixture(scope="session")
def fig1_run(tmp_path_factory):
    """The sweep in configs/fig1.cfg (eps = 0) through the CLI, once per session."""
    return _sweep("fig1", tmp_path_factory)


@pytest.fixture(scope="session")
def fig2_run(tmp_path_factory):
    """The sweep in configs/fig2.cfg (eps = 1e-3, N_x = 5) through the CLI, once per session."""
    return _sweep("fig2", tmp_path_factory)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, details = _CRITERIA[number]
        terminalreporter.write_line(f"CRITERION {number}: {'PASS' if ok else 'FAIL'}")
        for d in details:
            terminalreporter.write_line(f"    {d}")
