import hypothesis.strategies as st
import pytest
from hypothesis import settings

from qlw import formula as fm

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

NAMES = ("A", "B", "C")


def formulas(names=NAMES, sequential=False, max_leaves=12):
    leaves = st.one_of(
        st.sampled_from(names).map(fm.Elementary),
        st.just(fm.Top()),
        st.just(fm.Bottom()),
    )
    binary = [fm.And, fm.Or, fm.Implies] + ([fm.Seq] if sequential else [])

    def extend(children):
        return st.one_of(
            children.map(fm.Not),
            st.tuples(st.sampled_from(binary), children, children).map(lambda t: t[0](t[1], t[2])),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@pytest.fixture(scope="session")
def default_family():
    from qlw.semantics import model_family
    return model_family("default")


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
