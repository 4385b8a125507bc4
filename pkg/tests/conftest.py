import sys

import numpy as np
import pytest

from semalloc.netmodel import BaseStation, GlobalParams, Link, WirelessDevice
from semalloc.scenario import GenConfig, generate
from semalloc.utilmodel import AccuracyParams

BASE_PARAMS = GlobalParams(rb_bandwidth_hz=0.2e6, max_delay_s=10e-3, noise_power_w=1e-13)


def draw_app(rng) -> AccuracyParams:
    return AccuracyParams(
        eta1=rng.uniform(0.05, 0.08), eta2=rng.uniform(0.9, 0.95), c_max_cycles=rng.uniform(5e6, 10e6),
        beta1=rng.uniform(-0.75, -0.6), beta2=rng.uniform(10, 20), beta3=rng.uniform(0.9, 0.95),
        d_max_bits=rng.uniform(0.15e6, 0.25e6), raw_data_bits=rng.uniform(0.4e6, 0.8e6),
    )


def draw_wd(rng, n=0) -> WirelessDevice:
    return WirelessDevice(n, (0.0, 0.0), rng.uniform(1e9, 3e9), 0.2, 2e-3, rng.uniform(1e-28, 1e-27), draw_app(rng))


def draw_link(rng, params=BASE_PARAMS) -> Link:
    # distances 20..400 m with 6 dB shadowing, as the generator would produce
    dist_km = rng.uniform(0.02, 0.4)
    pl = 128.1 + 37.6 * np.log10(dist_km) + rng.normal(0, 6)
    return Link(min(10 ** (-pl / 10), 1.0), rng.uniform(1e-13, 1e-12), params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def mid_app():
    return AccuracyParams(eta1=0.065, eta2=0.925, c_max_cycles=7.5e6, beta1=-0.7, beta2=10.0, beta3=0.92,
                          d_max_bits=0.2e6, raw_data_bits=0.6e6)


@pytest.fixture
def wd(mid_app):
    return WirelessDevice(0, (0.0, 0.0), 2e9, 0.2, 2e-3, 5e-28, mid_app)


@pytest.fixture
def link():
    return Link(1e-10, 4e-13, BASE_PARAMS)


@pytest.fixture
def bs():
    return BaseStation(0, (0.0, 0.0), 10, 4e-13)


@pytest.fixture(scope="session")
def default_scenario():
    return generate(GenConfig(seed=0))


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
