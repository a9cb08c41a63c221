"""Shared helpers for the CLI golden-file checks."""
import os
import re
from pathlib import Path

import numpy as np

from multipole_response.cli import main
from multipole_response.files import bundled_model_path, read_csv

GOLDEN = Path(__file__).parent / "golden"
DATA = Path(__file__).parent / "data"
UPDATE = os.environ.get("UPDATE_GOLDEN") == "1"
NUMBER = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf")


def model(name):
    return str(bundled_model_path(name))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _split(text):
    numbers = [float(x) for x in NUMBER.findall(text)]
    return NUMBER.sub("#", text), numbers


def check_text(name, text):
    path = GOLDEN / name
    if UPDATE:
        path.write_text(text)
    skeleton, numbers = _split(text)
    ref_skeleton, ref_numbers = _split(path.read_text())
    assert skeleton == ref_skeleton
    np.testing.assert_allclose(numbers, ref_numbers, rtol=1e-8, atol=1e-15)


def check_csv(name, produced):
    path = GOLDEN / name
    if UPDATE:
        path.write_bytes(Path(produced).read_bytes())
    header, data = read_csv(produced)
    ref_header, ref = read_csv(path)
    assert header == ref_header
    assert data.shape == ref.shape
    scale = np.max(np.abs(ref), axis=0, initial=0.0)
    atol = float((1e-15 * scale).max()) if scale.size else 0.0
    np.testing.assert_allclose(data, ref, rtol=1e-12, atol=atol)
