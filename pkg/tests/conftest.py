"""Shared fixtures: preset combs and the expensive wide delay scans."""

import numpy as np
import pytest

from bfcsim import DEFAULT_SOURCE, build_comb, cavity_preset, simulate_hom_trace

WIDE_STEP_PS = 0.2
WIDE_WINDOW_PS = 340.0


@pytest.fixture(scope="session")
def cavity_45():
    return cavity_preset("45ghz")


@pytest.fixture(scope="session")
def cavity_15():
    return cavity_preset("15ghz")


@pytest.fixture(scope="session")
def cavity_5():
    return cavity_preset("5ghz")


@pytest.fixture(scope="session")
def comb_45(cavity_45):
    return build_comb(cavity_45, DEFAULT_SOURCE)


@pytest.fixture(scope="session")
def comb_15(cavity_15):
    return build_comb(cavity_15, DEFAULT_SOURCE)


@pytest.fixture(scope="session")
def comb_5(cavity_5):
    return build_comb(cavity_5, DEFAULT_SOURCE)


def _wide_delays():
    return np.arange(-WIDE_WINDOW_PS, WIDE_WINDOW_PS + WIDE_STEP_PS / 2.0, WIDE_STEP_PS)


@pytest.fixture(scope="session")
def trace_45(comb_45):
    return simulate_hom_trace(comb_45, _wide_delays())


@pytest.fixture(scope="session")
def trace_15(comb_15):
    return simulate_hom_trace(comb_15, _wide_delays())


@pytest.fixture(scope="session")
def trace_5(comb_5):
    return simulate_hom_trace(comb_5, _wide_delays())


@pytest.fixture(scope="session")
def zoom_trace_45(comb_45):
    delays = np.arange(-12.0, 12.0 + 0.0025, 0.005)
    return simulate_hom_trace(comb_45, delays)
