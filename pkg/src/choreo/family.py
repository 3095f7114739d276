"""Closed one-parameter families of cutting systems (lines or curves)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import HomPoly3, chordal, deflate, normalize_r, restrict_to_line
from .errors import NotClosed, NotInterior, NotOnCurve, ProportionalForms, TooCoarse
from .topology import CurveComponent, point_in_oval


@dataclass(frozen=True, eq=False)
class CuttingSystem:
    """Either a list of lines or a single curve, plus base points to remove."""

    lines: np.ndarray | None = None  # (k, 3) unit line coordinate vectors
    curve: HomPoly3 | None = None
    base_points: tuple[np.ndarray, ...] = ()

    @property
    def is_lines(self) -> bool:
        return self.lines is not None

    @property
    def cut_degree(self) -> int:
        return len(self.lines) if self.is_lines else self.curve.degree


@dataclass(frozen=True, eq=False)
class LoopFamily:
    kind: str  # LinePencil | LineProduct | BinaryPencil | PerturbationLoop | SampledLineLoop
    params: dict
    period: float
    sampler: Callable[[float], CuttingSystem] = field(repr=False)

    def __call__(self, t: float) -> CuttingSystem:
        return self.sampler(t)

    def closure_error(self) -> float:
        """Distance between sampler(0) and sampler(period) up to scale and order."""
        a, b = self.sampler(0.0), self.sampler(self.period)
        if a.is_lines:
            D = np.abs(chordal(a.lines[:, None, :], b.lines[None, :, :]))
            return float(max(np.max(np.min(D, axis=1)), np.max(np.min(D, axis=0))))
        return float(chordal(a.curve.coeffs, b.curve.coeffs))


def _pencil_line(center: np.ndarray, angle: float) -> np.ndarray:
    """Line through an affine center with unit normal at ``angle`` in the chart z = 1."""
    cx, cy = center[0] / center[2], center[1] / center[2]
    n = np.array([np.cos(angle), np.sin(angle), -(np.cos(angle) * cx + np.sin(angle) * cy)])
    return n / np.linalg.norm(n)


def _as_affine_center(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape == (2,):
        return np.array([c[0], c[1], 1.0])
    if abs(c[2]) < 1e-12:
        raise ValueError("pencil centers must be affine points")
    return c / c[2]


def line_pencil(c, theta0: float = 0.0, swing: float | None = None) -> LoopFamily:
    """Lines through ``c``; the normal angle turns by pi over one period.

    With ``swing`` the normal angle instead oscillates as
    theta0 + swing*sin(2t), which is a closed loop that does not go around
    the pencil.
    """
    center = _as_affine_center(c)

    if swing is None:
        def angle(t):
            return theta0 + t
    else:
        def angle(t):
            return theta0 + swing * np.sin(2.0 * t)

    def sampler(t: float) -> CuttingSystem:
        return CuttingSystem(lines=_pencil_line(center, angle(t))[None, :])

    params = {"center": center[:2].tolist(), "theta0": theta0, "swing": swing}
    return LoopFamily("LinePencil", params, np.pi, sampler)


def line_pencil_with_base_point(F: HomPoly3, C, theta0: float = 0.0, swing: float | None = None,
                                tol: float = 1e-9) -> LoopFamily:
    """Pencil about a curve point, with that point removed from every cut."""
    center = _as_affine_center(C)
    base = normalize_r(center)
    if abs(F(base)) > tol:
        raise NotOnCurve(f"|F(C)| = {abs(F(base)):.3g}")
    inner = line_pencil(center, theta0, swing)

    def sampler(t: float) -> CuttingSystem:
        return CuttingSystem(lines=inner.sampler(t).lines, base_points=(base,))

    params = dict(inner.params, base_point=base.tolist())
    return LoopFamily("LinePencil", params, np.pi, sampler)


def third_collinear_point(F: HomPoly3, A, B, tol: float = 1e-9) -> np.ndarray:
    """Real third intersection of line AB with a cubic through A and B."""
    A, B = _as_affine_center(A), _as_affine_center(B)
    for p in (A, B):
        if abs(F(normalize_r(p))) > tol:
            raise NotOnCurve(f"|F| = {abs(F(normalize_r(p))):.3g} at {p[:2].tolist()}")
    if F.degree != 3:
        raise ValueError("the third collinear point needs a cubic")
    line = np.cross(A, B)
    u = normalize_r(A)
    v = normalize_r(B)
    B3 = restrict_to_line(F, u, v)
    for root in (np.array([0.0, 1.0]), np.array([1.0, 0.0])):
        B3 = deflate(B3, root, tol=1e-7)
    # remaining factor c0*beta + c1*alpha vanishes at (alpha : beta) = (c0 : -c1)
    c0, c1 = np.real(B3.coeffs)
    C = normalize_r(c0 * u - c1 * v) if abs(c0) + abs(c1) > 0 else None
    if C is None or abs(line @ C) > 1e-9:
        raise NotOnCurve("line AB has no clean third intersection")
    if min(chordal(C, normalize_r(A)), chordal(C, normalize_r(B))) < 1e-8:
        raise NotOnCurve("line AB is tangent at A or B")
    return C


def pencil_about_third_point(F: HomPoly3, A, B, swing: float | None = None) -> LoopFamily:
    """Pencil of lines through the third point C of line AB, with C removed.

    The loop starts on the line AB itself, so its start divisor is A + B.
    """
    C = third_collinear_point(F, A, B)
    if abs(C[2]) < 1e-9:
        raise ValueError("the third point lies at infinity; choose A and B differently")
    line = np.cross(_as_affine_center(A), _as_affine_center(B))
    theta0 = float(np.arctan2(line[1], line[0]))
    fam = line_pencil_with_base_point(F, C / C[2], theta0, swing)
    params = dict(fam.params, A=_as_affine_center(A)[:2].tolist(), B=_as_affine_center(B)[:2].tolist(),
                  C=(C / C[2])[:2].tolist())
    return LoopFamily(fam.kind, params, fam.period, fam.sampler)


def line_product(c, k: int, oval: CurveComponent | None = None, theta0: float = 0.0) -> LoopFamily:
    """k lines through ``c`` at equally spaced angles; the set closes after pi/k."""
    if k < 2:
        raise ValueError("k must be >= 2")
    center = _as_affine_center(c)
    if oval is not None and not point_in_oval(center, oval):
        raise NotInterior("line product center must lie inside the oval")
    offsets = np.pi * np.arange(k) / k

    def sampler(t: float) -> CuttingSystem:
        return CuttingSystem(lines=np.array([_pencil_line(center, theta0 + t + o) for o in offsets]))

    params = {"center": center[:2].tolist(), "k": k, "theta0": theta0}
    return LoopFamily("LineProduct", params, np.pi / k, sampler)


def _check_not_proportional(F0: HomPoly3, F1: HomPoly3):
    if F0.degree != F1.degree:
        raise ValueError("forms must have the same degree")
    if chordal(F0.coeffs, F1.coeffs) < 1e-12:
        raise ProportionalForms("the two forms are proportional")


def binary_curve_pencil(F0: HomPoly3, F1: HomPoly3) -> LoopFamily:
    """G_t = cos(t) F0 + sin(t) F1 for t in [0, pi]; G_pi = -F0."""
    _check_not_proportional(F0, F1)
    a0, a1 = F0.coeffs, F1.coeffs

    def sampler(t: float) -> CuttingSystem:
        return CuttingSystem(curve=HomPoly3(F0.degree, np.cos(t) * a0 + np.sin(t) * a1))

    return LoopFamily("BinaryPencil", {"F0": F0.to_dict(), "F1": F1.to_dict()}, np.pi, sampler)


def perturbation_loop(F0: HomPoly3, G1: HomPoly3, G2: HomPoly3, eps: float) -> LoopFamily:
    """A small circle F0 + eps*(cos t G1 + sin t G2), t in [0, 2 pi].

    It lies in a ball around F0, so it is contractible whenever that ball
    avoids the discriminant.
    """
    _check_not_proportional(G1, G2)
    if not (F0.degree == G1.degree == G2.degree):
        raise ValueError("forms must have the same degree")
    a0, g1, g2 = F0.coeffs, G1.coeffs, G2.coeffs

    def sampler(t: float) -> CuttingSystem:
        return CuttingSystem(curve=HomPoly3(F0.degree, a0 + eps * (np.cos(t) * g1 + np.sin(t) * g2)))

    params = {"F0": F0.to_dict(), "G1": G1.to_dict(), "G2": G2.to_dict(), "eps": eps}
    return LoopFamily("PerturbationLoop", params, 2 * np.pi, sampler)


def _slerp(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    omega = np.arccos(np.clip(a @ b, -1.0, 1.0))
    if omega < 1e-12:
        v = (1 - s) * a + s * b
    else:
        v = (np.sin((1 - s) * omega) * a + np.sin(s * omega) * b) / np.sin(omega)
    return v / np.linalg.norm(v)


def sampled_line_loop(samples, base_point=None, max_gap: float = 0.1, close_tol: float = 1e-10) -> LoopFamily:
    """Piecewise spherical interpolation through a closed list of lines.

    The last sample must repeat the first up to scale; the period equals the
    number of segments.
    """
    S = np.asarray(samples, dtype=float)
    if S.ndim != 2 or S.shape[1] != 3 or len(S) < 3:
        raise ValueError("samples must be a list of at least 3 line vectors")
    S = S / np.linalg.norm(S, axis=1, keepdims=True)
    if chordal(S[0], S[-1]) > close_tol:
        raise NotClosed(f"first and last samples differ by {chordal(S[0], S[-1]):.3g}")
    # consistent signs so consecutive vectors are close on the sphere
    for i in range(1, len(S)):
        if S[i] @ S[i - 1] < 0:
            S[i] = -S[i]
    gaps = chordal(S[:-1], S[1:])
    if np.max(gaps) > max_gap:
        raise TooCoarse(f"consecutive samples {np.max(gaps):.3g} apart (limit {max_gap})")
    n_seg = len(S) - 1
    base = () if base_point is None else (normalize_r(base_point),)

    def sampler(t: float) -> CuttingSystem:
        t = min(max(t, 0.0), float(n_seg))
        i = min(int(np.floor(t)), n_seg - 1)
        return CuttingSystem(lines=_slerp(S[i], S[i + 1], t - i)[None, :], base_points=base)

    params = {"samples": len(S), "base_point": None if base_point is None else base[0].tolist()}
    return LoopFamily("SampledLineLoop", params, float(n_seg), sampler)


def ellipse_tangent_lines(center, axes, n: int = 720) -> np.ndarray:
    """Tangent lines of ((x-cx)/a)^2 + ((y-cy)/b)^2 = 1 at n equally spaced angles, closed."""
    cx, cy = center
    a, b = axes
    psi = 2 * np.pi * np.arange(n + 1) / n
    L = np.column_stack([np.cos(psi) / a, np.sin(psi) / b, -1 - cx * np.cos(psi) / a - cy * np.sin(psi) / b])
    L[-1] = L[0]
    return L
