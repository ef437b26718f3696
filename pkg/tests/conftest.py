"""Shared fixtures and hypothesis strategies."""

import os

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dlal import terms as T
from dlal.stdlib import registry

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

NAMES = ["x", "y", "z", "f", "g"]


def terms(max_leaves: int = 12):
    """Terms over a small alphabet so that capture and shadowing come up often."""
    var = st.sampled_from(NAMES).map(T.Var)

    def extend(children):
        return st.one_of(
            st.builds(T.Abs, st.sampled_from(NAMES), children),
            st.builds(T.App, children, children),
        )

    return st.recursive(var, extend, max_leaves=max_leaves)


@pytest.fixture(scope="session")
def stdlib():
    return registry()


@pytest.fixture(scope="session")
def dlal_programs(stdlib):
    return {k: p for k, p in stdlib.items() if p.certificate is not None and p.system == "ndlal"}


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts at the end of the run, one line per criterion."""
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
