import functools

import pytest

from shellentropy import CouplingParams, estimate_dos, merge_spectra, solve_chain

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def chain(n, delta2):
    """(decomps, spectrum, default DOS) for an N-site chain, memoized per session."""
    decomps = solve_chain(n, CouplingParams(delta2))
    spectrum = merge_spectra(decomps)
    return decomps, spectrum, estimate_dos(spectrum)


@pytest.fixture(scope="session")
def solved():
    return chain


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
