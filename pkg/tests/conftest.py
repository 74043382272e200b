import numpy as np
import pytest

from holepair.models import ModelSpec


def random_two_chain(rng: np.random.Generator, N: int, disorder: bool = True) -> ModelSpec:
    """Random draw over drive, detuning, directionality and log-uniform hopping disorder."""
    J = np.exp(rng.uniform(np.log(0.2), np.log(2.0), N - 1)) if disorder else np.ones(N - 1)
    return ModelSpec(
        variant="two_chain",
        N=N,
        Omega=float(rng.uniform(0.1, 10.0)),
        Delta=float(rng.uniform(-1.0, 1.0)),
        nu=float(rng.choice([0.0, 0.5, -0.5, 1.0, -1.0])),
        J=tuple(float(x) for x in J),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(53710)


@pytest.fixture
def measured(request):
    """Record named measurements on the test report for the acceptance summary."""

    def _record(**values):
        for k, v in values.items():
            request.node.user_properties.append((k, v))

    return _record


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".6g")
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) != "call" or "test_acceptance" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::")[-1]
            values = " ".join(f"{k}={_fmt(v)}" for k, v in rep.user_properties)
            lines.append((name, f"{outcome.upper():6s} {name}  {values}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
