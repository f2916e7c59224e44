"""Shared literal data for tests (the Bott-Samelson generators at t = 1)."""
import importlib.util
from pathlib import Path

_spec = importlib.util.spec_from_file_location(
    "make_fixtures", Path(__file__).resolve().parents[1] / "scripts" / "make_fixtures.py"
)
_mod = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(_mod)

BOTT_SAMELSON = _mod.BOTT_SAMELSON
BS_A = _mod.BS_A
EX27_C = _mod.EX27_C
