import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy import integrate

from pspin_at.mixture import MixtureSpec

settings.register_profile(
    "pkg", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("pkg")


def gauss_oracle(f, scale=1.0, shift=0.0):
    """``E f(scale Z + shift)`` by adaptive integration against the Gaussian density."""
    dens = lambda z: math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    val, _ = integrate.quad(lambda z: f(scale * z + shift) * dens(z), -40, 40, limit=400, epsabs=1e-14, epsrel=1e-13)
    return val


@pytest.fixture
def sk():
    return MixtureSpec.sk()


@pytest.fixture
def quartic_c2():
    return MixtureSpec.sk_plus_p(4, 2.0)


@pytest.fixture
def pure4():
    return MixtureSpec.pure(4, 0.25)


SPECS = {
    "sk": MixtureSpec.sk(),
    "sk+quartic": MixtureSpec.sk_plus_p(4, 2.0),
    "pure4": MixtureSpec.pure(4, 0.25),
    "mixed": MixtureSpec(((2, 0.3), (3, 0.2), (4, 0.5))),
}


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Recorder for one ``PASS``/``FAIL`` line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(name: str, ok: bool, detail: str) -> bool:
        line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
