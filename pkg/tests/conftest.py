import numpy as np
import pytest

from cvclone import distill

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Store one acceptance verdict; also printed for `pytest -s` runs."""
    ACCEPTANCE[criterion] = (bool(ok), detail)
    print(f"ACCEPTANCE {criterion:2d} {'PASS' if ok else 'FAIL'}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def snr15_channel():
    return distill.JointChannel.from_snr(15.0)


@pytest.fixture(scope="session")
def snr15_config(snr15_channel):
    return distill.SliceConfig(distill.optimize_partition(snr15_channel, 5))


@pytest.fixture(scope="session")
def snr15_analysis(snr15_config, snr15_channel):
    return distill.analyze(snr15_config, snr15_channel)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
