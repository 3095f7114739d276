from __future__ import annotations

import numpy as np
import pytest

from choreo.algebra import HomPoly3
from choreo.family import (
    ellipse_tangent_lines,
    line_pencil,
    line_product,
    pencil_about_third_point,
    perturbation_loop,
    sampled_line_loop,
)
from choreo.scenario import M_CUBIC, NINE_POINT_CUBIC, TYPE_II_CUBIC
from choreo.topology import complex_orientation_cubic, trace_real_locus
from choreo.tracking import TrackerConfig, track_loop

CENTER = (-0.5, 0.0)


def on_cubic(x: float, sign: int) -> tuple[float, float]:
    return (x, sign * float(np.sqrt(x**3 - x)))


@pytest.fixture(scope="session")
def E() -> HomPoly3:
    return HomPoly3.from_dict(M_CUBIC)


@pytest.fixture(scope="session")
def E2() -> HomPoly3:
    return HomPoly3.from_dict(TYPE_II_CUBIC)


@pytest.fixture(scope="session")
def circle() -> HomPoly3:
    return HomPoly3.from_dict({"degree": 2, "coeffs": {"x^2": 1, "y^2": 1, "z^2": -1}})


@pytest.fixture(scope="session")
def nine() -> HomPoly3:
    return HomPoly3.from_dict(NINE_POINT_CUBIC)


@pytest.fixture(scope="session")
def topo_raw(E):
    return trace_real_locus(E)


@pytest.fixture(scope="session")
def topo(topo_raw):
    return complex_orientation_cubic(topo_raw, CENTER)


def _families(E):
    return {
        "sec7-1": pencil_about_third_point(E, on_cubic(-0.04, 1), on_cubic(1.17, 1)),
        "sec7-1b": pencil_about_third_point(E, on_cubic(-0.9, 1), on_cubic(-0.2, -1), swing=0.05),
        "sec7-2": line_pencil(CENTER),
        "sec7-3": line_product(CENTER, 3),
        "k2": line_product(CENTER, 2),
        "pencil-b": line_pencil((-0.7, 0.2)),
        "base-b": pencil_about_third_point(E, on_cubic(-0.6, -1), on_cubic(2.0, 1)),
        "ellipse": sampled_line_loop(ellipse_tangent_lines(CENTER, (0.8, 0.8), 720)),
    }


@pytest.fixture(scope="session")
def families(E):
    return _families(E)


class PathCache:
    """Tracks each named scenario once per session and step count."""

    def __init__(self, E, topo, families):
        self.E, self.topo, self.families = E, topo, families
        self._paths = {}

    def __call__(self, name: str, steps: int = 2000):
        key = (name, steps)
        if key not in self._paths:
            self._paths[key] = track_loop(self.E, self.families[name], TrackerConfig(steps=steps), topo=self.topo)
        return self._paths[key]


@pytest.fixture(scope="session")
def paths(E, topo, families) -> PathCache:
    return PathCache(E, topo, families)


def random_perturbation(nine, seed: int, eps: float):
    rng = np.random.default_rng(seed)
    G1 = HomPoly3(3, rng.standard_normal(10))
    G2 = HomPoly3(3, rng.standard_normal(10))
    return perturbation_loop(nine, G1, G2, eps)
