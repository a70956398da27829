"""Shared helpers: subprocess CLI runner with a controlled environment."""

from __future__ import annotations

import os
import subprocess
import sys

import pytest


@pytest.fixture(scope="session")
def run_cli():
    """Run the command-line tool in a subprocess; returns CompletedProcess."""

    def runner(args, threads=None, cwd=None):
        env = dict(os.environ)
        env.pop("LOEWNERQC_THREADS", None)
        if threads is not None:
            env["LOEWNERQC_THREADS"] = str(threads)
        return subprocess.run(
            [sys.executable, "-m", "loewnerqc.cli", *args],
            capture_output=True, text=True, env=env, cwd=cwd, timeout=600)

    return runner
