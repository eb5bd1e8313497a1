import math
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nlgpe import QuadraticModel, derive_effective

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# every coupling switched on
REF = QuadraticModel(mu=1.0, rho=0.3, sigma=1.2, a=0.5, b=0.3, c=0.4, kappa=0.2, hbar=1.0)
# unequal mass and hbar, negative rho and kernel entries
ALT = QuadraticModel(mu=1.7, rho=-0.45, sigma=0.9, a=-0.2, b=0.25, c=-0.3, kappa=0.35, hbar=0.6)


@pytest.fixture(params=[REF, ALT], ids=["ref", "alt"])
def model(request):
    return request.param


@pytest.fixture
def eff(model):
    return derive_effective(model)


def rel_err(a, b):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(np.max(np.abs(b)), 1e-300)


def period(eff):
    return 2 * math.pi / eff.omega


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
