import json
import subprocess
import sys

import pytest


def primary_cli(*argv):
    out = subprocess.run([sys.executable, "-m", "cellgen", *argv],
                         capture_output=True, text=True)
    assert out.returncode in (0, 1), out.stderr
    return out.stdout


@pytest.fixture(scope="session")
def library():
    docs = json.loads(primary_cli("library", "--library-seed", "1"))
    return {d["name"]: {k: d[k] for k in ("name", "devices", "pins")} for d in docs}
