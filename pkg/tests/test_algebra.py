from __future__ import annotations

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from choreo.algebra import (
    BinaryForm,
    HomPoly3,
    binary_roots,
    chordal,
    conj_partition,
    deflate,
    eval_hom,
    gradient_hom,
    intersect_curves,
    monomials,
    normalize_c,
    normalize_r,
    restrict_to_line,
)
from choreo.errors import DegenerateLine, NotARoot, UnpairedPoint

finite = st.floats(min_value=-3, max_value=3, allow_nan=False, allow_infinity=False)


def forms(degree: int):
    n = (degree + 1) * (degree + 2) // 2
    return st.lists(finite, min_size=n, max_size=n).filter(lambda c: max(map(abs, c)) > 1e-2)


def vec3():
    return st.lists(finite, min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-2)


def roots_match(got, expected, tol=1e-8):
    got = [normalize_c(g) for g in got]
    rest = [normalize_c(np.asarray(e, dtype=complex)) for e in expected]
    for g in got:
        d = [chordal(g, e) for e in rest]
        k = int(np.argmin(d))
        if d[k] > tol:
            return False
        rest.pop(k)
    return not rest


# ---------------------------------------------------------------- HomPoly3


def test_monomial_count_and_order():
    for d in range(1, 7):
        m = monomials(d)
        assert len(m) == (d + 1) * (d + 2) // 2
        assert all(sum(e) == d for e in m)
    assert monomials(2) == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]


def test_normalization(E):
    assert np.max(np.abs(E.coeffs)) == pytest.approx(1.0)
    G = HomPoly3.from_dict({"degree": 2, "coeffs": {"x^2": 4, "y z": -2}})
    assert G.to_dict()["coeffs"] == {"x^2": 1.0, "y z": -0.5}
    with pytest.raises(ValueError):
        HomPoly3(2, np.zeros(6))


def test_eval_examples(E, circle):
    assert abs(eval_hom(E, [0, 1, 0])) < 1e-15
    # E stores y^2 z - x^3 + x z^2 with max coefficient 1, so raw values are exact
    assert eval_hom(E, [2.0, 0.0, 1.0]) == pytest.approx(-6.0)
    assert abs(eval_hom(circle, normalize_r([1, 0, 1]))) < 1e-15


def test_gradient_examples(E, circle):
    g = gradient_hom(circle, [1.0, 0.0, 1.0])
    assert chordal(g, [2, 0, -2]) < 1e-14
    assert np.allclose(gradient_hom(E, [0.0, 0.0, 1.0]), [1.0, 0.0, 0.0])


@given(forms(3), vec3())
def test_euler_identity(c, p):
    F = HomPoly3(3, np.array(c))
    p = np.array(p)
    assert np.dot(F.gradient(p), p) == pytest.approx(3 * F(p), abs=1e-9)


@given(forms(3), vec3())
def test_gradient_matches_finite_differences(c, p):
    F = HomPoly3(3, np.array(c))
    p = np.array(p)
    h = 1e-6
    fd = np.array([(F(p + h * e) - F(p - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.allclose(F.gradient(p), fd, atol=1e-6)


# ---------------------------------------------------------------- restriction


def test_restrict_examples(E, circle):
    B = restrict_to_line(E, [1, 0, 0], [0, 0, 1])
    assert np.allclose(B.coeffs, [0, 1, 0, -1])  # alpha beta^2 - alpha^3
    B = restrict_to_line(circle, [1, 0, 0], [0, 1, 0])
    assert np.allclose(B.coeffs, [1, 0, 1])
    line_component = HomPoly3.from_dict({"degree": 2, "coeffs": {"x y": 1}})
    with pytest.raises(DegenerateLine):
        restrict_to_line(line_component, [1, 0, 0], [0, 0, 1])


@settings(max_examples=40, deadline=None)
@given(forms(3), vec3(), vec3())
def test_restrict_matches_symbolic_substitution(c, u, v):
    """Oracle: expand F(alpha u + beta v) with sympy."""
    F = HomPoly3(3, np.array(c))
    if abs(np.linalg.norm(np.cross(u, v))) < 1e-2:
        return
    try:
        B = restrict_to_line(F, u, v)
    except DegenerateLine:
        return
    a, b = sp.symbols("a b")
    x, y, z = (a * sp.Float(ui) + b * sp.Float(vi) for ui, vi in zip(u, v))
    expr = sum(sp.Float(coef) * x**i * y**j * z**k for (i, j, k), coef in zip(monomials(3), F.coeffs))
    poly = sp.Poly(sp.expand(expr), a, b)
    want = np.array([float(poly.coeff_monomial(a**k * b ** (3 - k))) for k in range(4)])
    assert np.allclose(B.coeffs.real, want, atol=1e-9 * max(1.0, np.max(np.abs(want))))


@given(forms(3), vec3(), vec3())
def test_restrict_swap_symmetry(c, u, v):
    F = HomPoly3(3, np.array(c))
    if np.linalg.norm(np.cross(u, v)) < 1e-2:
        return
    try:
        B = restrict_to_line(F, u, v)
    except DegenerateLine:
        return
    assert np.allclose(restrict_to_line(F, v, u).coeffs, B.swapped().coeffs)


@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=4, max_size=4).filter(lambda m: abs(m[0] * m[3] - m[1] * m[2]) > 0.1),
       st.integers(0, 10**6))
def test_restrict_equivariance(m, seed):
    """Replacing (u, v) by (a u + b v, c u + e v) maps roots by the inverse matrix."""
    rng = np.random.default_rng(seed)
    F = HomPoly3(3, rng.standard_normal(10))
    u, v = rng.standard_normal(3), rng.standard_normal(3)
    a, b, c, e = m
    M = np.array([[a, c], [b, e]])  # (alpha, beta) on new basis -> old coordinates
    u2, v2 = a * u + b * v, c * u + e * v
    old = [r.point for r in binary_roots(restrict_to_line(F, u, v))]
    new = [r.point for r in binary_roots(restrict_to_line(F, u2, v2))]
    mapped = [np.linalg.solve(M, r) for r in old]
    assert roots_match(new, mapped, tol=1e-6)


# ---------------------------------------------------------------- roots


def test_binary_root_examples():
    R = binary_roots(BinaryForm(3, [0, 1, 0, -1]))
    assert [r.multiplicity for r in R] == [1, 1, 1]
    assert roots_match([r.point for r in R], [[0, 1], [1, 1], [1, -1]])

    R = binary_roots(BinaryForm(2, [1, 0, 1]))
    assert roots_match([r.point for r in R], [[1j, 1], [-1j, 1]])

    # (alpha - beta)^2 beta = beta^3 - 2 alpha beta^2 + alpha^2 beta
    R = binary_roots(BinaryForm(3, [1, -2, 1, 0]))
    mult = {tuple(np.round(normalize_c(r.point).real, 6)): r.multiplicity for r in R}
    assert mult == {(0.707107, 0.707107): 2, (1.0, 0.0): 1}


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=2, max_size=10).filter(lambda c: abs(c[0]) + abs(c[-1]) > 1e-2))
def test_binary_roots_count_residual_and_conjugation(c):
    B = BinaryForm(len(c) - 1, c)
    R = binary_roots(B)
    assert sum(r.multiplicity for r in R) == B.degree
    for r in R:
        if r.multiplicity == 1:
            assert B.residual(r.point) < 1e-8
    # real coefficients: root multiset closed under conjugation
    pts = [r.point for r in R for _ in range(r.multiplicity)]
    for p in pts:
        assert min(chordal(np.conj(p), q) for q in pts) < 1e-5


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**6))
def test_deflate_is_left_inverse_of_linear_factor(d, seed):
    rng = np.random.default_rng(seed)
    B = BinaryForm(d, rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1))
    root = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    root /= np.linalg.norm(root)
    P = B.times_linear(root)
    Q = deflate(P, root)
    # the quotient is defined up to scale: compare projectively
    assert chordal(Q.coeffs, B.coeffs) < 1e-10
    assert chordal(Q.times_linear(root).coeffs, P.coeffs) < 1e-10


def test_deflate_examples():
    Bp = deflate(BinaryForm(3, [0, 1, 0, -1]), [0, 1])
    assert chordal(Bp.coeffs, [1, 0, -1]) < 1e-14  # beta^2 - alpha^2
    B = BinaryForm(2, [1, 0, 1])
    Bp = deflate(B, [1j, 1])
    assert chordal(Bp.times_linear([1j, 1]).coeffs, B.coeffs) < 1e-12
    assert roots_match([r.point for r in binary_roots(Bp)], [[-1j, 1]])
    with pytest.raises(NotARoot):
        deflate(B, [1, 0])


def test_deflate_then_roots_removes_one_copy():
    B = BinaryForm(3, [0, 1, 0, -1])
    rest = [r.point for r in binary_roots(deflate(B, [1, 1]))]
    assert roots_match(rest, [[0, 1], [1, -1]])


# ---------------------------------------------------------------- conjugation


def test_conj_partition_examples(E):
    real, pairs = conj_partition([[1, 0, 1]])
    assert len(real) == 1 and not pairs
    assert np.allclose(real[0], normalize_r([1, 0, 1]))

    u, v = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
    pts = [r.point[0] * u + r.point[1] * v for r in binary_roots(BinaryForm(2, [1, 0, 1]))]
    real, pairs = conj_partition(pts)
    assert not real and len(pairs) == 1
    a, b = pairs[0]
    assert chordal(np.conj(a), b) < 1e-12

    u, v = np.array([1.0, 0, 0]), np.array([0, 0, 1.0])
    pts = [r.point[0] * u + r.point[1] * v for r in binary_roots(restrict_to_line(E, u, v))]
    real, pairs = conj_partition(pts)
    assert len(real) == 3 and not pairs

    with pytest.raises(UnpairedPoint):
        conj_partition([[1j, 0, 1]])


def test_canonical_phase():
    p = normalize_c([0, 2j, 1 + 1j])
    assert abs(np.linalg.norm(p) - 1) < 1e-12
    assert p[1].imag == 0 and p[1].real > 0
    q = normalize_r([0, -3, 4])
    assert q[1] > 0 and abs(np.linalg.norm(q) - 1) < 1e-12


# ---------------------------------------------------------------- curve intersection


def test_intersect_curves_nine_real_points(E, nine):
    P = intersect_curves(E, nine)
    assert len(P) == 9
    assert np.max(np.abs(E(P))) < 1e-10 and np.max(np.abs(nine(P))) < 1e-10
    real, pairs = conj_partition(P)
    assert len(real) == 9 and not pairs


def test_intersect_curves_against_resultant_oracle(E):
    """Oracle: sympy resultant in y, then numeric roots in x, on a random conic."""
    rng = np.random.default_rng(3)
    G = HomPoly3(2, rng.standard_normal(6))
    P = intersect_curves(E, G)
    assert len(P) == 6
    x, y = sp.symbols("x y")
    f = y**2 - x**3 + x
    # exact binary rationals keep the resultant computation exact
    g = sum(sp.Rational(float(c)) * x**i * y**j for (i, j, k), c in zip(monomials(2), G.coeffs))
    res = sp.Poly(sp.resultant(f, g, y), x)
    xs = [complex(r) for r in res.nroots(n=30)]
    got = sorted((p[0] / p[2] for p in P), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    want = sorted(xs, key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    assert np.allclose(got, want, atol=1e-7)
