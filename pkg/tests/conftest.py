import pytest
from hypothesis import strategies as st

from pwyw.preferences import ConsumerProfile

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    """Record one acceptance criterion outcome for the end-of-run summary."""

    def _record(criterion: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((criterion, passed, detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {criterion} {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}")


money = st.floats(min_value=0, max_value=1e3, allow_subnormal=False)
betas = st.floats(min_value=0, max_value=0.99)
gammas = st.floats(min_value=0, max_value=3)


@st.composite
def preferences(draw):
    beta = draw(betas)
    alpha = draw(st.floats(min_value=beta, max_value=5))
    return alpha, beta, draw(gammas)


@st.composite
def problems(draw, min_pr=0.0):
    """(p_r, c, alpha, beta, gamma) with 0 <= c <= p_r."""
    # subnormal money is meaningless and halving it is inexact
    p_r = draw(st.floats(min_value=min_pr, max_value=1e3, allow_subnormal=False))
    c = draw(st.floats(min_value=0, max_value=1)) * p_r
    if c < 1e-300:
        c = 0.0
    return (p_r, c) + draw(preferences())


@st.composite
def consumers(draw, v=money):
    alpha, beta, gamma = draw(preferences())
    return ConsumerProfile(
        v=draw(v), alpha=alpha, beta=beta, gamma=gamma,
        lam=draw(st.floats(min_value=1e-3, max_value=1)),
        is_free_rider=draw(st.booleans()),
    )


from hypothesis import settings  # noqa: E402

settings.register_profile("thorough", max_examples=2000)
settings.load_profile(__import__("os").environ.get("HYPOTHESIS_PROFILE", "default"))
