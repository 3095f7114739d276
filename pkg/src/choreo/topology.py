"""Real locus of a plane curve as oriented polylines on the unit sphere.

The zero set of F on S^2 is antipodally symmetric. An oval lifts to two
disjoint loops (one is stored); a one-sided component lifts to a single loop
that double covers it, and we store half of it: an arc from v0 to -v0.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .algebra import HomPoly3, binary_roots, deflate, normalize_r, restrict_to_line
from .errors import Ambiguous, CoveringDegree, NotInterior, OffCurve, SeedMiss, SingularCurve

MIN_GRADIENT = 1e-6


class CurveType(str, Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    UNKNOWN = "Unknown"


@dataclass(frozen=True, eq=False)
class CurveComponent:
    id: int
    vertices: np.ndarray  # (n, 3) unit vectors on the sphere
    kind: str  # "oval" | "one-sided"
    orientation: int = 1
    cum: np.ndarray = field(init=False, repr=False)
    seg_len: np.ndarray = field(init=False, repr=False)
    total: float = field(init=False)

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        ends = np.roll(V, -1, axis=0)
        ends[-1] = V[0] if self.kind == "oval" else -V[0]
        ends.setflags(write=False)
        W = ends - V
        seg = np.linalg.norm(W, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
        object.__setattr__(self, "_ends", ends)
        object.__setattr__(self, "_dirs", W)
        object.__setattr__(self, "_dirs_sq", np.where(seg > 0, seg**2, 1.0))
        object.__setattr__(self, "seg_len", seg)
        object.__setattr__(self, "cum", cum)
        object.__setattr__(self, "total", float(np.sum(seg)))

    @property
    def closing_target(self) -> np.ndarray:
        return self.vertices[0] if self.kind == "oval" else -self.vertices[0]

    def segment_ends(self) -> np.ndarray:
        return self._ends

    def point_at(self, phi: float) -> np.ndarray:
        """Sphere point at normalized arc parameter ``phi`` (stored order, mod 1)."""
        s = (phi % 1.0) * self.total
        k = int(np.searchsorted(self.cum, s, side="right") - 1)
        k = min(max(k, 0), len(self.vertices) - 1)
        lam = (s - self.cum[k]) / self.seg_len[k] if self.seg_len[k] > 0 else 0.0
        p = self.vertices[k] + lam * (self.segment_ends()[k] - self.vertices[k])
        return p / np.linalg.norm(p)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "orientation": self.orientation,
            "vertices": np.round(self.vertices, 12).tolist(),
        }


@dataclass(frozen=True, eq=False)
class CurveTopology:
    F: HomPoly3
    components: tuple[CurveComponent, ...]
    step: float
    curve_type: CurveType = CurveType.UNKNOWN
    complex_orientation_fixed: bool = False

    def component(self, cid: int) -> CurveComponent:
        return self.components[cid]

    @property
    def ovals(self) -> list[CurveComponent]:
        return [c for c in self.components if c.kind == "oval"]

    @property
    def one_sided(self) -> list[CurveComponent]:
        return [c for c in self.components if c.kind == "one-sided"]

    def with_orientations(self, flags: dict[int, int], fixed: bool) -> CurveTopology:
        comps = tuple(dataclasses.replace(c, orientation=int(flags.get(c.id, c.orientation))) for c in self.components)
        return dataclasses.replace(self, components=comps, complex_orientation_fixed=fixed)

    def to_json(self) -> dict:
        return {
            "curve": self.F.to_dict(),
            "curve_type": self.curve_type.value,
            "complex_orientation_fixed": self.complex_orientation_fixed,
            "step": self.step,
            "components": [c.to_json() for c in self.components],
        }


# ---------------------------------------------------------------- marching


def _fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = np.pi * (1 + 5**0.5) * i
    return np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])


def _plane_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = n / np.linalg.norm(n)
    helper = np.eye(3)[np.argmin(np.abs(n))]
    a = np.cross(n, helper)
    a /= np.linalg.norm(a)
    return a, np.cross(n, a)


def _tangential_gradient(F: HomPoly3, p: np.ndarray) -> np.ndarray:
    g = F.gradient(p)
    return g - (g @ p) * p


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def _project(F: HomPoly3, q: np.ndarray, tol: float, maxiter: int = 30):
    """Newton projection of a sphere point onto F = 0 along the sphere.

    Returns the projected point and the tangential gradient there.
    """
    for _ in range(maxiter):
        val, g = F.value_and_gradient(q)
        g = g - (g @ q) * q
        gg = g @ g
        if gg < MIN_GRADIENT**2:
            raise SingularCurve(f"near-zero gradient at {q}")
        if abs(val) <= tol:
            return q, g
        q = q - val * g / gg
        q = q / math.sqrt(q @ q)
    val, g = F.value_and_gradient(q)
    if abs(val) > 1e3 * tol:
        raise SingularCurve(f"projection onto the curve failed near {q}")
    return q, g - (g @ q) * q


def _find_seeds(F: HomPoly3, n_circles: int, samples: int, tol: float) -> list[np.ndarray]:
    seeds = []
    sign = (-1.0) ** F.degree
    s = np.linspace(0.0, np.pi, samples, endpoint=False)
    for n in _fibonacci_sphere(n_circles):
        a, b = _plane_basis(n)
        P = np.cos(s)[:, None] * a + np.sin(s)[:, None] * b
        vals = F(P)
        nxt = np.append(vals[1:], sign * vals[0])
        s_next = np.append(s[1:], np.pi)
        idx = np.where(np.sign(vals) * np.sign(nxt) < 0)[0]
        lo, hi = s[idx].copy(), s_next[idx].copy()
        flo = vals[idx].copy()
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            fm = F(np.cos(mid)[:, None] * a + np.sin(mid)[:, None] * b)
            left = np.sign(fm) == np.sign(flo)
            lo = np.where(left, mid, lo)
            flo = np.where(left, fm, flo)
            hi = np.where(left, hi, mid)
        mid = 0.5 * (lo + hi)
        for m in mid:
            seeds.append(_project(F, np.cos(m) * a + np.sin(m) * b, tol)[0])
    return seeds


def _march(F: HomPoly3, p0: np.ndarray, h: float, tol: float, max_vertices: int):
    verts = [p0]
    p, g = _project(F, p0, tol)
    travelled = 0.0
    while True:
        gn = math.sqrt(g @ g)
        t = _cross(p, g) / gn
        q = p + h * t
        q, g = _project(F, q / math.sqrt(q @ q), tol)
        dq = q - p
        travelled += math.sqrt(dq @ dq)
        p = q
        if travelled > 10 * h:
            if np.linalg.norm(p - p0) < h:
                return np.array(verts), "oval"
            if np.linalg.norm(p + p0) < h:
                return np.array(verts), "one-sided"
        verts.append(p)
        if len(verts) > max_vertices:
            raise SeedMiss("marching did not close")


def _near_existing(p: np.ndarray, comps: list[np.ndarray], radius: float) -> bool:
    for V in comps:
        d = min(np.min(np.linalg.norm(V - p, axis=1)), np.min(np.linalg.norm(V + p, axis=1)))
        if d < radius:
            return True
    return False


def _chart_frame(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ref = np.array([1.0, 0.0, 0.0]) if abs(w[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = ref - (ref @ w) * w
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(w, e1)


def _canonical_sign(m: np.ndarray) -> float:
    for v in (m[2], m[1], m[0]):
        if abs(v) > 1e-9:
            return float(np.sign(v))
    return 1.0


def _canonicalize_oval(V: np.ndarray) -> np.ndarray:
    m = V.mean(axis=0)
    V = V * _canonical_sign(m)
    w = V.mean(axis=0)
    w /= np.linalg.norm(w)
    e1, e2 = _chart_frame(w)
    k = int(np.argmax(V @ e1))
    V = np.roll(V, -k, axis=0)
    den = V @ w
    x, y = (V @ e1) / den, (V @ e2) / den
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    if area < 0:
        V = np.concatenate([V[:1], V[:0:-1]])
    return V


def _canonicalize_one_sided(V: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(V[:, 2])))
    s = 1.0 if V[k, 2] >= 0 else -1.0
    A = s * np.concatenate([V[k:], -V[:k]])
    cross = np.cross(A[0], A[1] - A[0])[2]
    if cross < 0:
        A = np.concatenate([A[:1], -A[:0:-1]])
    return A


def trace_real_locus(
    F: HomPoly3,
    step: float = 1e-3,
    tol: float = 1e-12,
    n_circles: int = 64,
) -> CurveTopology:
    """March every component of the real locus of ``F``.

    Seeds come from sign changes of F along ``n_circles`` great circles;
    each unseen seed is marched with a tangent predictor and a Newton
    corrector until it closes on itself (oval) or on its antipode
    (one-sided component).
    """
    samples = max(1024, int(np.pi / step))
    seeds = _find_seeds(F, n_circles, samples, tol)
    raw: list[tuple[np.ndarray, str]] = []
    max_vertices = int(40 * np.pi / step)
    for p in seeds:
        if _near_existing(p, [V for V, _ in raw], 3 * step):
            continue
        V, kind = _march(F, p, step, tol, max_vertices)
        raw.append((V, kind))
    comps = []
    for V, kind in raw:
        V = _canonicalize_oval(V) if kind == "oval" else _canonicalize_one_sided(V)
        comps.append((V, kind))
    # deterministic order: one-sided components after ovals, then by first vertex
    comps.sort(key=lambda c: (c[1] != "oval", tuple(np.round(c[0][0], 6))))
    components = tuple(CurveComponent(i, V, kind) for i, (V, kind) in enumerate(comps))
    n_one_sided = sum(c.kind == "one-sided" for c in components)
    if n_one_sided % 2 != F.degree % 2 or n_one_sided > 1:
        raise SeedMiss(f"{n_one_sided} one-sided components for a curve of degree {F.degree}")
    topo = CurveTopology(F, components, step)
    return dataclasses.replace(topo, curve_type=classify_cubic_type(topo))


def line_crossings(topo: CurveTopology, line) -> int:
    """Number of sign changes of the linear form ``line`` along all polylines."""
    line = np.asarray(line, dtype=float)
    total = 0
    for c in topo.components:
        s = c.vertices @ line
        closed = np.append(s, c.closing_target @ line)
        total += int(np.sum(np.sign(closed[:-1]) * np.sign(closed[1:]) < 0))
    return total


# ---------------------------------------------------------------- queries


def _segment_distances(comp: CurveComponent, p: np.ndarray, idx=None):
    if idx is None:
        S, W, ww = comp.vertices, comp._dirs, comp._dirs_sq
    else:
        S, W, ww = comp.vertices[idx], comp._dirs[idx], comp._dirs_sq[idx]
    D = p - S
    lam = np.clip(np.einsum("ij,ij->i", D, W) / ww, 0.0, 1.0)
    R = D - lam[:, None] * W
    return np.einsum("ij,ij->i", R, R), lam


def _locate_in(comp: CurveComponent, p: np.ndarray, hint: int | None = None, window: int = 64):
    """(distance, segment, fraction) of the nearest polyline point to +-p."""
    n = len(comp.vertices)
    idx = None
    if hint is not None and n > 2 * window:
        idx = np.arange(hint - window, hint + window + 1) % n
    best = None
    for q in (p, -p):
        d2, lam = _segment_distances(comp, q, idx)
        k = int(np.argmin(d2))
        cand = (float(np.sqrt(d2[k])), int(idx[k]) if idx is not None else k, float(lam[k]))
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def locate_on_component(
    p,
    topo: CurveTopology,
    tol: float = 1e-3,
    hint: tuple[int, int] | None = None,
) -> tuple[int, float]:
    """Nearest component and normalized arc parameter of a real point."""
    cid, phi, _ = locate_with_segment(p, topo, tol, hint)
    return cid, phi


def locate_with_segment(p, topo: CurveTopology, tol: float = 1e-3, hint: tuple[int, int] | None = None):
    p = normalize_r(p)
    if hint is not None:
        comp = topo.components[hint[0]]
        d, k, lam = _locate_in(comp, p, hint[1])
        if d <= tol:
            return comp.id, float((comp.cum[k] + lam * comp.seg_len[k]) / comp.total % 1.0), k
    best = None
    for comp in topo.components:
        d, k, lam = _locate_in(comp, p)
        if best is None or d < best[0]:
            best = (d, comp, k, lam)
    d, comp, k, lam = best
    if d > tol:
        raise OffCurve(f"point is {d:.3g} away from the real locus")
    return comp.id, float((comp.cum[k] + lam * comp.seg_len[k]) / comp.total % 1.0), k


def locate_batch(P: np.ndarray, topo: CurveTopology, hints, tol: float = 1e-3, window: int = 64):
    """Locate several real points given (component, segment) hints.

    Returns arrays (component ids, arc parameters, segments). Points whose
    windowed search misses fall back to ``locate_with_segment``.
    """
    P = np.asarray(P, dtype=float)
    P = P / np.linalg.norm(P, axis=1, keepdims=True)
    m = len(P)
    cids = np.empty(m, dtype=int)
    phis = np.empty(m)
    segs = np.empty(m, dtype=int)
    miss = np.ones(m, dtype=bool)
    offs = np.arange(-window, window + 1)
    for comp in topo.components:
        rows = [i for i in range(m) if hints[i] is not None and hints[i][0] == comp.id]
        n = len(comp.vertices)
        if not rows or n <= 2 * window:
            continue
        rows = np.array(rows)
        idx = (np.array([hints[i][1] for i in rows])[:, None] + offs[None, :]) % n  # (r, K)
        S, W, ww = comp.vertices[idx], comp._dirs[idx], comp._dirs_sq[idx]
        best_d = np.full(len(rows), np.inf)
        best_k = np.zeros(len(rows), dtype=int)
        best_l = np.zeros(len(rows))
        for sgn in (1.0, -1.0):
            D = sgn * P[rows][:, None, :] - S
            lam = np.clip(np.einsum("rkj,rkj->rk", D, W) / ww, 0.0, 1.0)
            R = D - lam[..., None] * W
            d2 = np.einsum("rkj,rkj->rk", R, R)
            k = np.argmin(d2, axis=1)
            d = np.sqrt(d2[np.arange(len(rows)), k])
            better = d < best_d
            best_d = np.where(better, d, best_d)
            best_k = np.where(better, k, best_k)
            best_l = np.where(better, lam[np.arange(len(rows)), k], best_l)
        seg = idx[np.arange(len(rows)), best_k]
        ok = best_d <= tol
        r_ok = rows[ok]
        cids[r_ok] = comp.id
        segs[r_ok] = seg[ok]
        phis[r_ok] = ((comp.cum[seg[ok]] + best_l[ok] * comp.seg_len[seg[ok]]) / comp.total) % 1.0
        miss[r_ok] = False
    for i in np.nonzero(miss)[0]:
        cids[i], phis[i], segs[i] = locate_with_segment(P[i], topo, tol=tol)
    return cids, phis, segs


def _oval_chart(comp: CurveComponent):
    w = comp.vertices.mean(axis=0)
    w /= np.linalg.norm(w)
    if np.min(comp.vertices @ w) <= 0:
        raise Ambiguous("oval does not fit in a single affine chart")
    e1, e2 = _chart_frame(w)
    return w, e1, e2


def _as_point(p) -> np.ndarray:
    """Accept an affine pair (x, y) or homogeneous coordinates."""
    p = np.asarray(p, dtype=float)
    if p.shape == (2,):
        p = np.array([p[0], p[1], 1.0])
    return p / np.linalg.norm(p)


def point_in_oval(p, comp: CurveComponent, tol: float = 1e-9) -> bool:
    """Even-odd ray test in an affine chart containing the oval."""
    if comp.kind != "oval":
        raise ValueError("point_in_oval needs an oval")
    w, e1, e2 = _oval_chart(comp)
    p = _as_point(p)
    if p @ w < 0:
        p = -p
    if p @ w < 1e-12:
        return False
    V = comp.vertices
    den = V @ w
    X = np.column_stack([(V @ e1) / den, (V @ e2) / den])
    px = np.array([p @ e1, p @ e2]) / (p @ w)
    Y = np.roll(X, -1, axis=0)
    for attempt in range(5):
        ang = 0.3 + 1.1 * attempt
        d = np.array([np.cos(ang), np.sin(ang)])
        nrm = np.array([-d[1], d[0]])
        a = (X - px) @ nrm
        b = (Y - px) @ nrm
        if np.min(np.abs(a)) < tol:
            continue
        cross = np.sign(a) != np.sign(b)
        # ray parameter of the crossing
        t = a / np.where(cross, a - b, 1.0)
        hit = X + t[:, None] * (Y - X)
        along = (hit - px) @ d
        return bool(np.sum(cross & (along > 0)) % 2 == 1)
    raise Ambiguous("ray passes through a vertex for every retried direction")


def classify_cubic_type(topo: CurveTopology) -> CurveType:
    if topo.F.degree != 3:
        return CurveType.UNKNOWN
    return CurveType.TYPE_I if len(topo.components) == 2 else CurveType.TYPE_II


def covering_degree(topo: CurveTopology, c, samples: int = 720) -> float:
    """Degree of the oval -> one-sided map q -> (line cq) ∩ X1, in stored orders."""
    oval, = topo.ovals
    x1, = topo.one_sided
    F = topo.F
    c = normalize_r(_as_point(c))
    n = len(oval.vertices)
    idx = np.unique(np.linspace(0, n, samples, endpoint=False).astype(int))
    phis = []
    hint = None
    for k in idx:
        q = oval.vertices[k]
        B = deflate(restrict_to_line(F, c, q), [0.0, 1.0])
        best = None
        for r in binary_roots(B):
            a, b = r.point
            if abs(a.imag) > 1e-9 or abs(b.imag) > 1e-9:
                continue
            pt = normalize_r(a.real * c + b.real * q)
            d, seg, lam = _locate_in(x1, pt, hint)
            if d > 1e-2 and hint is not None:
                d, seg, lam = _locate_in(x1, pt)
            if best is None or d < best[0]:
                best = (d, seg, lam)
        if best is None or best[0] > 1e-2:
            raise CoveringDegree("line through the center misses the one-sided component")
        d, seg, lam = best
        hint = seg
        phis.append((x1.cum[seg] + lam * x1.seg_len[seg]) / x1.total)
    phis.append(phis[0])
    steps = np.diff(phis)
    steps -= np.round(steps)
    return float(np.sum(steps))


def complex_orientation_cubic(topo: CurveTopology, c) -> CurveTopology:
    """Fix orientations so the projection from ``c`` covers X1 with degree +2.

    The one-sided component keeps its stored vertex order; the oval is
    reversed if needed.
    """
    if topo.curve_type != CurveType.TYPE_I or len(topo.ovals) != 1:
        raise ValueError("complex orientations are fixed here only for M-cubics")
    oval, = topo.ovals
    x1, = topo.one_sided
    if not point_in_oval(c, oval):
        raise NotInterior("orientation center is not inside the oval")
    stored = covering_degree(topo, c)
    if abs(abs(stored) - 2.0) > 0.1:
        raise CoveringDegree(f"covering degree {stored:.3f} is not +-2")
    flag0 = 1 if stored > 0 else -1
    return topo.with_orientations({oval.id: flag0, x1.id: 1}, fixed=True)


def current_covering_degree(topo: CurveTopology, c) -> int:
    """Covering degree with respect to the orientations currently set."""
    oval, = topo.ovals
    x1, = topo.one_sided
    return int(round(covering_degree(topo, c) * oval.orientation * x1.orientation))
