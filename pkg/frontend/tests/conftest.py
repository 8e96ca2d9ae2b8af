import shutil
import subprocess

import pytest

QPURIFY = shutil.which("qpurify")


def run_qpurify(*args):
    assert QPURIFY is not None, "qpurify console script not on PATH; install the backend first"
    proc = subprocess.run([QPURIFY, *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def default_sweep_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("csv") / "sweep_default.csv"
    run_qpurify("sweep", "--out", str(out))
    return out


@pytest.fixture(scope="session")
def by_d_sweep_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("csv") / "sweep_by_d.csv"
    run_qpurify(
        "sweep",
        "--gadgets", "CGG",
        "--p", "0.001",
        "--d", "2,4,inf",
        "--m", "1,2,4,8,16",
        "--out", str(out),
    )
    return out


@pytest.fixture(scope="session")
def zeno_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("csv") / "zeno.csv"
    run_qpurify("zeno", "--steps", "20", "--copies", "2", "--eta", "0.02", "--out", str(out))
    return out


@pytest.fixture(scope="session")
def header_only_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("csv") / "header_only.csv"
    run_qpurify("sweep", "--m", "", "--out", str(out))
    return out
