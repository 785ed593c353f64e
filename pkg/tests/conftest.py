"""Shared fixtures: cached surface samples and duals.

Generators are deterministic, so one sample per (name, n, params) is
shared across the whole session; tests must treat the returned objects
as read-only.
"""

import pytest

import quatsurf as qs


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance(pytestconfig):
    """acceptance(label, ok, detail) -> ok; records one PASS/FAIL line
    per criterion for the terminal summary."""

    def record(label, ok, detail=""):
        text = "[%s] %s" % ("PASS" if ok else "FAIL", label)
        if detail:
            text += " -- " + detail
        pytestconfig._acceptance_lines.append(text)
        print(text)
        return ok

    return record


@pytest.fixture(scope="session")
def surf():
    """surf(name, n=33, **params) -> cached GeneratorResult."""
    cache = {}

    def get(name, n=33, **params):
        key = (name, n, tuple(sorted(params.items())))
        if key not in cache:
            cache[key] = qs.make_surface(name, n=n, **params)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def dual_of(surf):
    """dual_of(name, n=33, **params) -> cached DualResult for the
    generator's known differential."""
    cache = {}

    def get(name, n=33, **params):
        key = (name, n, tuple(sorted(params.items())))
        if key not in cache:
            gen = surf(name, n, **params)
            cache[key] = qs.integrate_dual(gen.imm, gen.q_known)
        return cache[key]

    return get
