from __future__ import annotations

import numpy as np
import pytest

from choreo.algebra import binary_roots, normalize_c, restrict_to_line
from choreo.errors import NotInterior, OffCurve
from choreo.topology import (
    CurveType,
    classify_cubic_type,
    complex_orientation_cubic,
    covering_degree,
    current_covering_degree,
    line_crossings,
    locate_on_component,
    locate_with_segment,
    point_in_oval,
    trace_real_locus,
)
from choreo.tracking import line_basis


def kinds(topo):
    return sorted(c.kind for c in topo.components)


@pytest.fixture(scope="module")
def topo_E2(E2):
    return trace_real_locus(E2)


@pytest.fixture(scope="module")
def topo_circle(circle):
    return trace_real_locus(circle)


def test_component_counts(topo_raw, topo_E2, topo_circle):
    assert kinds(topo_raw) == ["one-sided", "oval"]
    assert kinds(topo_E2) == ["one-sided"]
    assert kinds(topo_circle) == ["oval"]


@pytest.mark.parametrize("which", ["E", "E2", "circle"])
def test_counts_stable_under_halving_step(which, request):
    F = request.getfixturevalue(which)
    coarse = trace_real_locus(F, step=1e-3)
    fine = trace_real_locus(F, step=5e-4)
    assert kinds(coarse) == kinds(fine)


@pytest.mark.parametrize("which", ["E", "E2", "circle"])
def test_vertex_invariants(which, request):
    F = request.getfixturevalue(which)
    topo = trace_real_locus(F)
    for c in topo.components:
        V = c.vertices
        assert np.max(np.abs(F(V))) <= 1e-10
        G = F.gradient(V)
        tangential = G - np.sum(G * V, axis=1, keepdims=True) * V
        assert np.min(np.linalg.norm(tangential, axis=1)) >= 1e-6
        steps = np.linalg.norm(np.diff(V, axis=0), axis=1)
        assert np.max(steps) <= 2 * topo.step
        assert np.linalg.norm(V[-1] - c.closing_target) <= 2 * topo.step


def test_oval_of_E_spans_minus_one_to_zero(topo_raw):
    oval, = topo_raw.ovals
    x = oval.vertices[:, 0] / oval.vertices[:, 2]
    assert x.min() == pytest.approx(-1.0, abs=1e-3)
    assert x.max() == pytest.approx(0.0, abs=1e-3)


@pytest.mark.parametrize("which", ["E", "E2", "circle"])
def test_parity_on_random_lines(which, request):
    """A line meets a degree-d locus in d (mod 2) points; the count also matches a root solve."""
    F = request.getfixturevalue(which)
    topo = trace_real_locus(F)
    rng = np.random.default_rng(20)
    for _ in range(20):
        line = rng.standard_normal(3)
        n = line_crossings(topo, line)
        assert n % 2 == F.degree % 2
        u, v = line_basis(line)
        roots = binary_roots(restrict_to_line(F, u, v))
        real = sum(1 for r in roots if np.max(np.abs(normalize_c(r.point).imag)) < 1e-9)
        assert n == real


def test_locate_examples(topo_raw):
    cid, phi = locate_on_component([-1.0, 0.0, 1.0], topo_raw)
    assert topo_raw.component(cid).kind == "oval"
    assert (cid, phi) == locate_on_component([-1.0, 0.0, 1.0], topo_raw)
    cid, _ = locate_on_component([1.0, 0.0, 1.0], topo_raw)
    assert topo_raw.component(cid).kind == "one-sided"
    cid, _ = locate_on_component([0.0, 1.0, 0.0], topo_raw)
    assert topo_raw.component(cid).kind == "one-sided"
    with pytest.raises(OffCurve):
        locate_on_component([5.0, 5.0, 1.0], topo_raw)


def test_locate_at_vertices_returns_arc_table(topo_raw):
    for comp in topo_raw.components:
        tol = topo_raw.step / comp.total
        for k in np.linspace(0, len(comp.vertices) - 1, 25).astype(int):
            cid, phi = locate_on_component(comp.vertices[k], topo_raw)
            assert cid == comp.id
            want = comp.cum[k] / comp.total
            d = abs(phi - want)
            assert min(d, 1 - d) <= tol
            # the antipodal representative is the same projective point
            assert locate_on_component(-comp.vertices[k], topo_raw)[0] == comp.id


def test_locate_with_hint_agrees(topo_raw):
    comp = topo_raw.one_sided[0]
    p = comp.vertices[100]
    full = locate_with_segment(p, topo_raw)
    hinted = locate_with_segment(p, topo_raw, hint=(comp.id, 90))
    assert full == hinted


def test_point_in_oval(topo_raw):
    oval, = topo_raw.ovals
    assert point_in_oval([-0.5, 0.0, 1.0], oval)
    assert not point_in_oval([2.0, 0.0, 1.0], oval)
    assert not point_in_oval([0.5, 0.0, 1.0], oval)
    assert point_in_oval((-0.5, 0.0), oval)


def test_classify(topo_raw, topo_E2, topo_circle):
    assert classify_cubic_type(topo_raw) == CurveType.TYPE_I
    assert classify_cubic_type(topo_E2) == CurveType.TYPE_II
    assert classify_cubic_type(topo_circle) == CurveType.UNKNOWN


def test_complex_orientation_degree_plus_two(topo_raw, topo):
    raw = covering_degree(topo_raw, (-0.5, 0.0))
    assert abs(abs(raw) - 2) < 0.05
    assert current_covering_degree(topo, (-0.5, 0.0)) == 2
    assert topo.complex_orientation_fixed
    # the one-sided component keeps its stored order
    assert topo.one_sided[0].orientation == 1


def test_complex_orientation_idempotent(topo_raw, topo):
    oval = topo_raw.ovals[0]
    flipped = topo_raw.with_orientations({oval.id: -oval.orientation}, fixed=False)
    again = complex_orientation_cubic(flipped, (-0.5, 0.0))
    assert [c.orientation for c in again.components] == [c.orientation for c in topo.components]
    twice = complex_orientation_cubic(topo, (-0.5, 0.0))
    assert [c.orientation for c in twice.components] == [c.orientation for c in topo.components]


def test_complex_orientation_independent_of_center(topo_raw, topo):
    """Reported check: other interior centers give the same orientation pair."""
    want = [c.orientation for c in topo.components]
    for c in [(-0.3, 0.1), (-0.8, -0.05), (-0.5, 0.3), (-0.15, -0.2)]:
        got = complex_orientation_cubic(topo_raw, c)
        assert [k.orientation for k in got.components] == want


def test_complex_orientation_needs_interior_point(topo_raw):
    with pytest.raises(NotInterior):
        complex_orientation_cubic(topo_raw, (2.0, 0.0))


def test_topology_json(topo):
    data = topo.to_json()
    assert data["curve_type"] == "TypeI"
    assert {c["kind"] for c in data["components"]} == {"oval", "one-sided"}
    assert all(len(c["vertices"][0]) == 3 for c in data["components"])
