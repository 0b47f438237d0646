"""Shared fixtures for shapeinv tests."""

import importlib.util
import json
import os
import subprocess
import sys
import tempfile
from fractions import Fraction

import numpy as np
import pytest

SCRIPTS_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "scripts")
ROOT_DIR = os.path.join(os.path.dirname(__file__), os.pardir)
CLI_SCRIPT = os.path.join(SCRIPTS_DIR, "shapeinv.py")


def _load_module(name, path):
    """Load a Python file as a module (for scripts without .py packages)."""
    spec = importlib.util.spec_from_file_location(name, path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


# Lazy-load the CLI so tests can import its helpers directly.


@pytest.fixture
def shapeinv():
    return _load_module("shapeinv_cli", CLI_SCRIPT)


@pytest.fixture
def run_cli():
    """Run shapeinv.py as a subprocess; returns (exit code, stdout, stderr)."""

    def _run(*args):
        result = subprocess.run([sys.executable, CLI_SCRIPT, *args], capture_output=True, text=True)
        return result.returncode, result.stdout, result.stderr

    return _run


# --- Numeric helpers ---


@pytest.fixture
def fd_derivative():
    """Central-difference oracle for the analytic derivatives."""

    def _d(fn, xs, step=1e-5):
        xs = np.asarray(xs, dtype=float)
        return (fn(xs + step) - fn(xs - step)) / (2 * step)

    return _d


@pytest.fixture
def sample_params():
    """One in-window parameter set per family, keyed by slug."""
    from lib.families import Family, Params

    return {
        Family.RADIAL_OSCILLATOR: Params(g=Fraction(3), l=2),
        Family.TRIG_DPT: Params(g=Fraction(5, 2), l=2, h=Fraction(7, 2)),
        Family.HYP_DPT: Params(g=Fraction(7, 3), l=2, h=Fraction(7)),
        Family.RADIAL_OSCILLATOR_CONTL: Params(g=3.0, l=1.5),
        Family.TRIG_DPT_CONTL: Params(g=3.0, l=1.5, h=4.0),
    }


# --- Temp file helpers ---


@pytest.fixture
def tmp_dir():
    """Provide a temporary directory that's cleaned up after test."""
    with tempfile.TemporaryDirectory() as d:
        yield d


@pytest.fixture
def write_json(tmp_dir):
    """Helper to write a JSON file in tmp_dir and return its path."""

    def _write(filename, data):
        path = os.path.join(tmp_dir, filename)
        with open(path, "w") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
        return path

    return _write


@pytest.fixture
def read_json():
    """Helper to read a JSON file back."""

    def _read(path):
        with open(path) as f:
            return json.load(f)

    return _read
