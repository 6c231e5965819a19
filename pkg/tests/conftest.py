import numpy as np
import pytest

from renyicap import channel as chmod


@pytest.fixture
def noiseless2():
    return chmod.prepare(chmod.gen_noiseless_channel(2), 0.5)


@pytest.fixture
def random_channel():
    return chmod.gen_random_channel(10, 6, 1e-2, 0)


def bsc(eps=0.1):
    return np.array([[1 - eps, eps], [eps, 1 - eps]])


def interior(rng, n, floor=0.0):
    q = rng.dirichlet(np.ones(n))
    return (1 - n * floor) * q + floor


def tangent(rng, n):
    h = rng.standard_normal(n)
    return h - h.mean()


# -- acceptance summary -------------------------------------------------------
# test_acceptance records one (id, passed, detail) entry per criterion; the
# hook below prints them as a block at the end of the run.
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, name, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{key:2d}] {name}: {detail}")
