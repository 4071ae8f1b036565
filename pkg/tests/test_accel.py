import os
import subprocess
import sys

import pytest

from macflow import _accel


def _flag_in_child(env):
    code = "import macflow._accel as a; print(a.USE_NUMBA, a.thread_count())"
    out = subprocess.run([sys.executable, "-c", code], env={**os.environ, **env},
                         capture_output=True, text=True, check=True)
    return out.stdout.split()


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")
def test_env_flag_selects_backend():
    assert _flag_in_child({"MACFLOW_NUMBA": "1"})[0] == "True"
    assert _flag_in_child({"MACFLOW_NUMBA": "0"})[0] == "False"


def test_thread_count_env():
    assert _flag_in_child({"MACFLOW_THREADS": "3"})[1] == "3"
    assert _flag_in_child({"MACFLOW_THREADS": ""})[1] == "1"


def test_fallback_decorator_is_identity(monkeypatch):
    monkeypatch.setattr(_accel, "HAVE_NUMBA", False)
    f = lambda x: x + 1
    assert _accel.njit(f) is f
    assert _accel.njit(cache=True)(f) is f
