"""Continuation of the intersection divisor along a closed family.

Points are stored as unit complex 3-vectors whose phases are aligned from
one grid value to the next, so each trajectory is a continuous curve in
C^3 and finite differences make sense. Only one half of every conjugate
pair is corrected; its partner is set to the exact conjugate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    BinaryForm,
    HomPoly3,
    align_phase,
    binary_roots,
    chordal,
    conj_partition_indices,
    deflate,
    intersect_curves,
    min_separation,
    newton_pair_batch,
    normalize_c,
    normalize_r,
    restrict_to_line,
)
from .errors import (
    CorrectorDiverged,
    DiscriminantHit,
    MatchAmbiguity,
    NonSimpleStart,
    NotARoot,
    NotCubic,
    OffCurve,
    TrackingFailure,
)
from .family import CuttingSystem, LoopFamily
from .topology import CurveTopology, locate_batch


@dataclass(frozen=True)
class TrackerConfig:
    steps: int = 2000
    corrector_tol: float = 1e-11
    collision_tol: float = 1e-6
    max_retries: int = 8

    @property
    def snap_tol(self) -> float:
        # imaginary drift allowed on a real point before it counts as leaving the real locus
        return 100.0 * self.corrector_tol

    def to_json(self) -> dict:
        return {
            "steps": self.steps,
            "corrector_tol": self.corrector_tol,
            "collision_tol": self.collision_tol,
            "max_retries": self.max_retries,
            "snap_tol": self.snap_tol,
        }


@dataclass(frozen=True, eq=False)
class Divisor:
    """A simple effective divisor, split into real points and conjugate pairs."""

    points: np.ndarray  # (n, 3) complex, unit norm
    real: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]  # (tracked half, conjugate partner)
    owner: np.ndarray  # line index per point; 0 for curve systems
    multiplicities: np.ndarray | None = None

    @property
    def degree(self) -> int:
        if self.multiplicities is None:
            return len(self.points)
        return int(np.sum(self.multiplicities))

    @property
    def purely_real(self) -> bool:
        return not self.pairs

    def min_separation(self) -> float:
        return min_separation(self.points)

    def is_simple(self, collision_tol: float = 1e-6) -> bool:
        mult_ok = self.multiplicities is None or bool(np.all(self.multiplicities == 1))
        return mult_ok and self.min_separation() > collision_tol

    def conjugate(self) -> Divisor:
        return Divisor(np.conj(self.points), self.real, self.pairs, self.owner.copy(), self.multiplicities)


@dataclass(eq=False)
class DivisorPath:
    t: np.ndarray  # (N+1,)
    points: np.ndarray  # (N+1, n, 3) complex, phase-continuous
    real: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    owner: np.ndarray
    component: np.ndarray  # component id per point, -1 if not real
    lifts: np.ndarray  # (N+1, n) unwrapped arc parameter, nan if not real
    max_residual: float = 0.0
    min_margin: float = np.inf
    kind: str = "Synthetic"
    meta: dict = field(default_factory=dict)

    @property
    def n_points(self) -> int:
        return self.points.shape[1]

    @property
    def period(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def purely_real(self) -> bool:
        return not self.pairs

    def point_class(self, j: int) -> str:
        return "real" if j in self.real else "complex"

    def start(self) -> np.ndarray:
        return self.points[0]

    def end(self) -> np.ndarray:
        return self.points[-1]

    def closure_error(self) -> float:
        """Largest distance from an end point to its nearest start point (and back)."""
        D = chordal(self.points[-1][:, None, :], self.points[0][None, :, :])
        return float(max(np.max(np.min(D, axis=1)), np.max(np.min(D, axis=0))))


# ---------------------------------------------------------------- solving one system


def line_basis(line: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal real basis (u, v) of the plane of points on ``line``."""
    n = np.asarray(line, dtype=float)
    n = n / np.linalg.norm(n)
    e = np.zeros(3)
    e[int(np.argmin(np.abs(n)))] = 1.0
    u = np.cross(n, e)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v


def _line_form(F: HomPoly3, line: np.ndarray, base_points) -> tuple[BinaryForm, np.ndarray, np.ndarray]:
    u, v = line_basis(line)
    B = restrict_to_line(F, u, v)
    for bp in base_points:
        if abs(line @ bp) < 1e-9:
            B = deflate(B, [u @ bp, v @ bp])
    return B, u, v


def _remove_base_points(P: np.ndarray, base_points, tol: float = 1e-6) -> np.ndarray:
    keep = np.ones(len(P), dtype=bool)
    for bp in base_points:
        d = chordal(P, bp[None, :])
        d[~keep] = np.inf
        k = int(np.argmin(d))
        if d[k] > tol:
            raise NotARoot("base point is not an intersection point")
        keep[k] = False
    return P[keep]


def _make_divisor(P: np.ndarray, owner: np.ndarray, mult: np.ndarray, cfg: TrackerConfig) -> Divisor:
    real, pairs = conj_partition_indices(P, tol=1e-7)
    P = P.astype(complex).copy()
    for i in real:
        P[i] = normalize_r(normalize_c(P[i]).real) + 0j
    for i, j in pairs:
        P[j] = np.conj(P[i])
    D = Divisor(P, tuple(real), tuple(pairs), owner, mult)
    if not D.is_simple(cfg.collision_tol):
        raise NonSimpleStart(f"start divisor not simple (min separation {D.min_separation():.3g})")
    return D


def solve_system(F: HomPoly3, system: CuttingSystem, cfg: TrackerConfig | None = None) -> Divisor:
    """Full re-solve of F against one cutting system, base points removed."""
    cfg = cfg or TrackerConfig()
    if system.is_lines:
        pts, owner, mult = [], [], []
        for li, line in enumerate(system.lines):
            B, u, v = _line_form(F, line, system.base_points)
            for r in binary_roots(B):
                a, b = r.point
                p = a * u + b * v
                pts.append(p / np.linalg.norm(p))
                owner.append(li)
                mult.append(r.multiplicity)
        P = np.array(pts, dtype=complex).reshape(-1, 3)
        owner_arr, mult_arr = np.array(owner, dtype=int), np.array(mult, dtype=int)
    else:
        P = intersect_curves(F, system.curve)
        P = _remove_base_points(P, system.base_points)
        owner_arr, mult_arr = np.zeros(len(P), dtype=int), np.ones(len(P), dtype=int)
    if np.any(mult_arr > 1):
        raise NonSimpleStart("a cut point has multiplicity > 1")
    return _make_divisor(P, owner_arr, mult_arr, cfg)


def initial_divisor(F: HomPoly3, fam: LoopFamily, cfg: TrackerConfig | None = None, t: float = 0.0) -> Divisor:
    return solve_system(F, fam(t), cfg)


# ---------------------------------------------------------------- corrector


class _StepFailure(Exception):
    def __init__(self, j: int, why: str):
        self.j = j
        self.why = why


def _newton_binary(coeffs: np.ndarray, a: complex, b: complex, tol: float, maxiter: int = 25):
    """Newton on B(alpha, beta) = 0 from (a : b) in the chart where the root has modulus <= 1."""
    a, b = complex(a), complex(b)
    if abs(b) >= abs(a):
        z, high, flip = a / b, [complex(c) for c in coeffs[::-1]], False
    else:
        z, high, flip = b / a, [complex(c) for c in coeffs], True
    for _ in range(maxiter):
        f = df = 0j
        for c in high:  # Horner for the value and the derivative
            df = df * z + f
            f = f * z + c
        if df == 0:
            return None
        dz = f / df
        z = z - dz
        if not (abs(z) < 1e8):
            return None
        if abs(dz) <= tol * (1.0 + abs(z)):
            return (1.0, z) if flip else (z, 1.0)
    return None


def _correct(F: HomPoly3, system: CuttingSystem, pred: np.ndarray, active: list[int], owner: np.ndarray,
             cfg: TrackerConfig) -> np.ndarray:
    """Corrected positions of the ``active`` points, in that order."""
    out = np.empty((len(active), 3), dtype=complex)
    if system.is_lines:
        forms = {}
        for a, j in enumerate(active):
            li = int(owner[j])
            if li not in forms:
                forms[li] = _line_form(F, system.lines[li], system.base_points)
            B, u, v = forms[li]
            p = pred[j]
            ab = _newton_binary(B.coeffs, u @ p, v @ p, cfg.corrector_tol)
            if ab is None:
                raise _StepFailure(j, "newton")
            q = ab[0] * u + ab[1] * v
            out[a] = q / np.linalg.norm(q)
    else:
        Q, ok = newton_pair_batch(F, system.curve, pred[active], tol=cfg.corrector_tol)
        if not np.all(ok):
            raise _StepFailure(active[int(np.argmin(ok))], "newton")
        out = Q
    return out


# ---------------------------------------------------------------- tracking loop


class _State:
    __slots__ = ("P", "P_prev", "h_prev", "sep")

    def __init__(self, P, P_prev=None, h_prev=None, sep=None):
        self.P = P
        self.P_prev = P_prev
        self.h_prev = h_prev
        self.sep = min_separation(P) if sep is None else sep


def _advance(F, fam, state: _State, t0: float, h: float, active, real_idx, pairs, owner, cfg) -> _State:
    P = state.P
    if state.P_prev is not None:
        pred = P + (h / state.h_prev) * (P - state.P_prev)
        pred /= np.linalg.norm(pred, axis=1, keepdims=True)
    else:
        pred = P
    system = fam(t0 + h)
    new = _correct(F, system, pred, active, owner, cfg)
    Q = P.copy()
    Q[active] = align_phase(new, P[active])
    if real_idx.size:
        R = Q[real_idx]
        drift = np.max(np.abs(R.imag), axis=1)
        if np.any(drift > cfg.snap_tol):
            raise _StepFailure(int(real_idx[int(np.argmax(drift))]), "imaginary drift")
        Q[real_idx] = R.real / np.linalg.norm(R.real, axis=1, keepdims=True) + 0j
    for i, k in pairs:
        Q[k] = np.conj(Q[i])
    sep = np.inf
    if len(Q) > 1:
        moves = chordal(Q, P)
        bad = np.nonzero(moves > 0.5 * state.sep)[0]
        if len(bad):
            raise _StepFailure(int(bad[0]), "match")
        sep = min_separation(Q)
        if sep < cfg.collision_tol:
            raise DiscriminantHit(t0 + h, "two divisor points collided")
    return _State(Q, P, h, sep)


def _advance_adaptive(F, fam, state, t0, h, depth, ctx):
    try:
        return _advance(F, fam, state, t0, h, *ctx)
    except _StepFailure as e:
        if depth >= ctx[-1].max_retries:
            raise _Exhausted(t0 + h, e) from None
    # halve the step and do both halves
    half = 0.5 * h
    state = _advance_adaptive(F, fam, state, t0, half, depth + 1, ctx)
    return _advance_adaptive(F, fam, state, t0 + half, half, depth + 1, ctx)


class _Exhausted(Exception):
    def __init__(self, t: float, failure: _StepFailure):
        self.t = t
        self.failure = failure


def _classify(F, fam, cfg, t_fail: float, P: np.ndarray, n_real: int, failure: _StepFailure):
    """Decide whether a stalled step sits on the discriminant or is a numerical failure."""
    try:
        D = solve_system(F, fam(t_fail), cfg)
    except (NonSimpleStart, NotARoot):
        return DiscriminantHit(t_fail, "non-simple divisor at the stalled step")
    except Exception:  # noqa: BLE001 - a failing oracle cannot certify a regular point
        return DiscriminantHit(t_fail, "re-solve failed at the stalled step")
    if len(D.real) != n_real:
        return DiscriminantHit(t_fail, f"real point count changed from {n_real} to {len(D.real)}")
    if min(D.min_separation(), min_separation(P)) < 1e-2:
        return DiscriminantHit(t_fail, "divisor points nearly collide")
    if failure.why == "match":
        return MatchAmbiguity(t_fail)
    return CorrectorDiverged(t_fail, failure.j)


def _lift_real_points(P, real, topo, prev, hints, tol=1e-3):
    """Arc parameters of real points, continued from ``prev`` by nearest lift."""
    out = np.full(len(P), np.nan)
    if not real:
        return out
    idx = list(real)
    cids, phis, segs = locate_batch(P[idx].real, topo, [hints.get(j) for j in idx], tol=tol)
    for j, cid, phi, seg in zip(idx, cids, phis, segs):
        if j in hints and cid != hints[j][0]:
            raise TrackingFailure(f"point {j} jumped from component {hints[j][0]} to {cid}")
        hints[j] = (int(cid), int(seg))
        if prev is not None:
            phi = phi + np.round(prev[j] - phi)
        out[j] = phi
    return out


def track_loop(F: HomPoly3, fam: LoopFamily, cfg: TrackerConfig | None = None,
               topo: CurveTopology | None = None, start: Divisor | None = None) -> DivisorPath:
    """Track the cut divisor once around ``fam``.

    With ``topo`` the real points also get unwrapped arc-parameter lifts.
    ``start`` overrides the start divisor (it must solve sampler(0)).
    """
    cfg = cfg or TrackerConfig()
    D = start if start is not None else initial_divisor(F, fam, cfg)
    real, pairs, owner = tuple(D.real), tuple(D.pairs), D.owner
    real_idx = np.array(real, dtype=int)
    active = sorted(list(real) + [i for i, _ in pairs])
    n = len(D.points)
    N = cfg.steps
    ts = np.linspace(0.0, fam.period, N + 1)
    traj = np.empty((N + 1, n, 3), dtype=complex)
    traj[0] = D.points
    lifts = np.full((N + 1, n), np.nan)
    component = np.full(n, -1, dtype=int)
    hints: dict[int, tuple[int, int]] = {}
    if topo is not None:
        lifts[0] = _lift_real_points(D.points, real, topo, None, hints)
        for j in real:
            component[j] = hints[j][0]

    ctx = (active, real_idx, pairs, owner, cfg)
    state = _State(D.points.copy())
    margin = state.sep
    for k in range(N):
        h = ts[k + 1] - ts[k]
        try:
            state = _advance_adaptive(F, fam, state, ts[k], h, 0, ctx)
        except _Exhausted as ex:
            raise _classify(F, fam, cfg, ex.t, state.P, len(real), ex.failure) from None
        traj[k + 1] = state.P
        margin = min(margin, state.sep)
        if topo is not None:
            try:
                lifts[k + 1] = _lift_real_points(state.P, real, topo, lifts[k], hints)
            except OffCurve as e:
                raise TrackingFailure(f"real point left the traced locus at t={ts[k + 1]:.6g}: {e}") from None

    path = DivisorPath(ts, traj, real, pairs, owner.copy(), component, lifts,
                       kind=fam.kind, meta={"tracker": cfg.to_json()})
    path.min_margin = float(margin)
    path.max_residual = system_residual(F, fam, path)
    return path


# ---------------------------------------------------------------- diagnostics


def system_residual(F: HomPoly3, fam: LoopFamily, path: DivisorPath) -> float:
    """max over grid and points of |F(p)| and |system(p)| at unit representatives."""
    worst = float(np.max(np.abs(F(path.points))))
    for k, t in enumerate(path.t):
        s = fam(t)
        P = path.points[k]
        if s.is_lines:
            vals = np.abs(np.einsum("ij,ij->i", P, s.lines[path.owner]))
        else:
            vals = np.abs(s.curve(P))
        worst = max(worst, float(np.max(vals)) if len(vals) else 0.0)
    return worst


def transversality_margin(path: DivisorPath) -> float:
    if path.n_points < 2:
        return float("inf")
    return float(min(min_separation(P) for P in path.points))


def vieta_residual(F: HomPoly3, fam: LoopFamily, path: DivisorPath) -> float:
    """Largest projective mismatch between the product of tracked chart roots and each line's form."""
    worst = 0.0
    for k, t in enumerate(path.t):
        s = fam(t)
        if not s.is_lines:
            raise ValueError("Vieta check applies to line systems only")
        for li, line in enumerate(s.lines):
            B, u, v = _line_form(F, line, s.base_points)
            prod = np.array([1.0 + 0j])
            for j in np.nonzero(path.owner == li)[0]:
                a, b = u @ path.points[k, j], v @ path.points[k, j]
                # factor (b*alpha - a*beta): coefficient of beta is -a, of alpha is b
                prod = np.convolve(prod, np.array([-a, b]))
            worst = max(worst, float(chordal(prod, B.coeffs)))
    return worst


def _omega(F: HomPoly3, P: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Holomorphic differential of a plane cubic on tangent vectors, chart free.

    On the curve p x dp is parallel to grad F, and the ratio is the form
    (equal to dx / F_y in the chart z = 1). Invariant under rescaling p.
    """
    G = F.gradient(P)
    C = np.cross(P, V)
    return np.sum(C * np.conj(G), axis=-1) / np.sum(np.abs(G) ** 2, axis=-1)


def abel_jacobi_residual(F: HomPoly3, path: DivisorPath) -> float:
    """max_t |sum_j omega(v_j)| relative to max_t max_j |omega(v_j)|.

    Velocities are central differences at interior grid values. A path
    whose points do not move has residual 0.
    """
    if F.degree != 3:
        raise NotCubic(f"degree {F.degree}")
    X = path.points
    if len(X) < 3:
        return 0.0
    h = np.diff(path.t)
    V = (X[2:] - X[:-2]) / (h[1:] + h[:-1])[:, None, None]
    W = _omega(F, X[1:-1], V)
    scale = float(np.max(np.abs(W))) if W.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(np.sum(W, axis=1))) / scale)


def export_csv(path: DivisorPath, file) -> None:
    cols = ["t", "point_id", "class", "x_re", "x_im", "y_re", "y_im", "z_re", "z_im", "component_id", "angle_lift"]
    own = not hasattr(file, "write")
    fh = open(file, "w", newline="") if own else file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for k, t in enumerate(path.t):
            for j in range(path.n_points):
                p = path.points[k, j]
                lift = path.lifts[k, j]
                w.writerow([
                    f"{t:.12g}", j, path.point_class(j),
                    *(f"{c:.15g}" for z in p for c in (z.real, z.imag)),
                    int(path.component[j]),
                    "" if np.isnan(lift) else f"{lift:.12g}",
                ])
    finally:
        if own:
            fh.close()
