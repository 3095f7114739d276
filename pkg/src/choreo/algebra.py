"""Homogeneous polynomials in three variables, binary forms and their roots.

Projective points are plain numpy arrays. Complex points of the plane are
unit 3-vectors with the first nonzero coordinate made real positive; real
points are unit real 3-vectors with the first nonzero coordinate positive.
Points of the projective line are handled the same way as 2-vectors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import DegenerateLine, NotARoot, UnpairedPoint

_EPS = np.finfo(float).eps
_PHASE_FLOOR = 1e-8  # coordinates below this never fix the canonical phase

_MONOMIAL_RE = re.compile(r"([xyz])(?:\^(\d+))?")


def monomials(degree: int) -> list[tuple[int, int, int]]:
    """Exponent triples of degree ``degree`` in graded-lexicographic order."""
    return [
        (a, b, degree - a - b)
        for a in range(degree, -1, -1)
        for b in range(degree - a, -1, -1)
    ]


def _parse_monomial(text: str) -> tuple[int, int, int]:
    exps = {"x": 0, "y": 0, "z": 0}
    stripped = text.replace("*", " ").strip()
    if stripped in ("", "1"):
        return (0, 0, 0)
    pos = 0
    for m in _MONOMIAL_RE.finditer(stripped):
        if stripped[pos:m.start()].strip():
            raise ValueError(f"bad monomial {text!r}")
        exps[m.group(1)] += int(m.group(2) or 1)
        pos = m.end()
    if stripped[pos:].strip():
        raise ValueError(f"bad monomial {text!r}")
    return (exps["x"], exps["y"], exps["z"])


def _format_monomial(e: tuple[int, int, int]) -> str:
    parts = [v if k == 1 else f"{v}^{k}" for v, k in zip("xyz", e) if k > 0]
    return " ".join(parts) or "1"


@dataclass(frozen=True, eq=False)
class HomPoly3:
    """Real homogeneous polynomial in x, y, z, scaled so max |coefficient| = 1."""

    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        d = int(self.degree)
        if d < 1:
            raise ValueError("degree must be >= 1")
        c = np.asarray(self.coeffs, dtype=float).copy()
        if c.shape != ((d + 1) * (d + 2) // 2,):
            raise ValueError(f"expected {(d + 1) * (d + 2) // 2} coefficients, got {c.shape}")
        scale = np.max(np.abs(c))
        if not np.isfinite(scale) or scale == 0.0:
            raise ValueError("polynomial is identically zero")
        c /= scale
        c.setflags(write=False)
        object.__setattr__(self, "degree", d)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_terms(cls, degree: int, terms: dict[tuple[int, int, int], float]) -> HomPoly3:
        index = {e: i for i, e in enumerate(monomials(degree))}
        c = np.zeros(len(index))
        for e, v in terms.items():
            if sum(e) != degree:
                raise ValueError(f"monomial {e} is not of degree {degree}")
            c[index[tuple(e)]] += v
        return cls(degree, c)

    @classmethod
    def from_dict(cls, spec: dict) -> HomPoly3:
        """Parse ``{"degree": d, "coeffs": {"x^a y^b z^c": value}}``."""
        d = int(spec["degree"])
        terms: dict[tuple[int, int, int], float] = {}
        for key, value in spec["coeffs"].items():
            e = _parse_monomial(key)
            terms[e] = terms.get(e, 0.0) + float(value)
        return cls.from_terms(d, terms)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "coeffs": {
                _format_monomial(e): float(v)
                for e, v in zip(monomials(self.degree), self.coeffs)
                if v != 0.0
            },
        }

    @cached_property
    def exponents(self) -> np.ndarray:
        return np.array(monomials(self.degree), dtype=int)

    def _powers(self, p):
        p = np.asarray(p)
        k = np.arange(self.degree + 1)
        return p[..., None, :] ** k[:, None]  # (..., d+1, 3)

    def __call__(self, p) -> np.ndarray | complex:
        pw = self._powers(p)
        a, b, c = self.exponents.T
        mono = pw[..., a, 0] * pw[..., b, 1] * pw[..., c, 2]
        return mono @ self.coeffs

    def gradient(self, p) -> np.ndarray:
        return self.value_and_gradient(p)[1]

    def value_and_gradient(self, p):
        pw = self._powers(p)
        a, b, c = self.exponents.T
        am, bm, cm = np.maximum(a - 1, 0), np.maximum(b - 1, 0), np.maximum(c - 1, 0)
        px, py, pz = pw[..., a, 0], pw[..., b, 1], pw[..., c, 2]
        val = (px * py * pz) @ self.coeffs
        gx = (a * pw[..., am, 0] * py * pz) @ self.coeffs
        gy = (b * px * pw[..., bm, 1] * pz) @ self.coeffs
        gz = (c * px * py * pw[..., cm, 2]) @ self.coeffs
        return val, np.stack([gx, gy, gz], axis=-1)

    def combine(self, a: float, other: HomPoly3, b: float) -> HomPoly3:
        """The form ``a*self + b*other`` (renormalized)."""
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        return HomPoly3(self.degree, a * self.coeffs + b * other.coeffs)

    def __mul__(self, other: HomPoly3) -> HomPoly3:
        terms: dict[tuple[int, int, int], float] = {}
        for e1, c1 in zip(monomials(self.degree), self.coeffs):
            if c1 == 0.0:
                continue
            for e2, c2 in zip(monomials(other.degree), other.coeffs):
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                terms[e] = terms.get(e, 0.0) + c1 * c2
        return HomPoly3.from_terms(self.degree + other.degree, terms)

    @classmethod
    def linear(cls, line) -> HomPoly3:
        a, b, c = (float(v) for v in line)
        return cls(1, np.array([a, b, c]))

    def __repr__(self) -> str:
        return f"HomPoly3(degree={self.degree}, coeffs={np.array2string(self.coeffs, precision=4)})"


def eval_hom(F: HomPoly3, p) -> complex:
    return F(p)


def gradient_hom(F: HomPoly3, p) -> np.ndarray:
    return F.gradient(p)


# ---------------------------------------------------------------- points


def normalize_c(p) -> np.ndarray:
    """Unit complex representative with the first nonzero coordinate real positive."""
    p = np.asarray(p, dtype=complex)
    p = p / np.linalg.norm(p, axis=-1, keepdims=True)
    mag = np.abs(p)
    idx = np.argmax(mag > _PHASE_FLOOR * np.max(mag, axis=-1, keepdims=True), axis=-1)
    lead = np.take_along_axis(p, idx[..., None], axis=-1)
    return p * (np.conj(lead) / np.abs(lead))


def normalize_r(p) -> np.ndarray:
    """Unit real representative with the first nonzero coordinate positive."""
    p = np.real(np.asarray(p)).astype(float)
    p = p / np.linalg.norm(p, axis=-1, keepdims=True)
    mag = np.abs(p)
    idx = np.argmax(mag > _PHASE_FLOOR * np.max(mag, axis=-1, keepdims=True), axis=-1)
    lead = np.take_along_axis(p, idx[..., None], axis=-1)
    return p * np.sign(lead)


def affine_point(x: float, y: float) -> np.ndarray:
    return normalize_r([x, y, 1.0])


def chordal(p, q) -> np.ndarray | float:
    """Fubini-Study chordal distance (sine of the angle) between projective points.

    Broadcasts over leading axes. Computed from the orthogonal residual, so it
    stays accurate for nearly equal points.
    """
    p = np.asarray(p)
    q = np.asarray(q)
    p = p / np.linalg.norm(p, axis=-1, keepdims=True)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    inner = np.sum(np.conj(p) * q, axis=-1, keepdims=True)
    return np.linalg.norm(q - inner * p, axis=-1)


def pairwise_chordal(P) -> np.ndarray:
    P = np.asarray(P)
    return chordal(P[:, None, :], P[None, :, :])


def min_separation(P) -> float:
    P = np.asarray(P)
    if len(P) < 2:
        return np.inf
    D = pairwise_chordal(P)
    np.fill_diagonal(D, np.inf)
    return float(np.min(D))


def align_phase(p, ref) -> np.ndarray:
    """Rescale ``p`` (unit norm) so that <ref, p> is real and positive."""
    p = np.asarray(p, dtype=complex)
    p = p / np.linalg.norm(p, axis=-1, keepdims=True)
    inner = np.sum(np.conj(ref) * p, axis=-1, keepdims=True)
    mag = np.abs(inner)
    ph = np.where(mag > 0, np.conj(inner) / np.where(mag > 0, mag, 1.0), 1.0)
    return p * ph


# ---------------------------------------------------------------- binary forms


@dataclass(frozen=True, eq=False)
class BinaryForm:
    """B(alpha, beta) = sum_k coeffs[k] * alpha**k * beta**(degree - k)."""

    degree: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.degree + 1,):
            raise ValueError("coefficient count must be degree + 1")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, alpha, beta):
        k = np.arange(self.degree + 1)
        alpha = np.asarray(alpha)[..., None]
        beta = np.asarray(beta)[..., None]
        return np.sum(self.coeffs * alpha**k * beta ** (self.degree - k), axis=-1)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def residual(self, root) -> float:
        """|B(root)| / ||B|| at the unit representative of ``root``."""
        r = np.asarray(root, dtype=complex)
        r = r / np.linalg.norm(r)
        return float(abs(self(r[0], r[1])) / self.norm)

    def swapped(self) -> BinaryForm:
        return BinaryForm(self.degree, self.coeffs[::-1])

    def times_linear(self, root) -> BinaryForm:
        """Multiply by the linear form beta0*alpha - alpha0*beta vanishing at ``root``."""
        a0, b0 = np.asarray(root, dtype=complex)
        out = np.zeros(self.degree + 2, dtype=complex)
        out[1:] += b0 * self.coeffs
        out[:-1] -= a0 * self.coeffs
        return BinaryForm(self.degree + 1, out)

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= 1e-14 * max(self.norm, 1e-300)))


def restrict_to_line(F: HomPoly3, u, v) -> BinaryForm:
    """Binary form B(alpha, beta) = F(alpha*u + beta*v)."""
    u = np.asarray(u)
    v = np.asarray(v)
    d = F.degree
    # powers[i][k] = coefficient array of (u_i alpha + v_i beta)^k, indexed by alpha power
    powers = []
    for i in range(3):
        lin = np.array([v[i], u[i]])
        acc = [np.ones(1, dtype=lin.dtype)]
        for _ in range(d):
            acc.append(np.convolve(acc[-1], lin))
        powers.append(acc)
    out = np.zeros(d + 1, dtype=np.result_type(u, v, float))
    for (a, b, c), coef in zip(monomials(d), F.coeffs):
        if coef == 0.0:
            continue
        out += coef * np.convolve(np.convolve(powers[0][a], powers[1][b]), powers[2][c])
    scale = np.sum(np.abs(F.coeffs)) * (np.linalg.norm(u) + np.linalg.norm(v)) ** d
    if np.max(np.abs(out)) <= 64 * _EPS * scale:
        raise DegenerateLine("the line is a component of the curve")
    return BinaryForm(d, out)


def aberth(coeffs, tol: float = 4 * _EPS, maxiter: int = 500) -> np.ndarray:
    """All roots of sum_k coeffs[k] t**k by Aberth-Ehrlich simultaneous iteration."""
    c = np.asarray(coeffs, dtype=complex)
    n = len(c) - 1
    if n <= 0:
        return np.zeros(0, dtype=complex)
    if c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    a = c / c[-1]
    if n == 1:
        return np.array([-a[0]])
    high = a[::-1]
    dhigh = np.polyder(high)
    center = -a[n - 1] / n
    shifted = np.abs(np.polyval(high, center)) ** (1.0 / n)
    radius = max(shifted, max(abs(a[k]) ** (1.0 / (n - k)) for k in range(n)) * 0.5, 1e-3)
    z = center + radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    for _ in range(maxiter):
        pz = np.polyval(high, z)
        dpz = np.polyval(dhigh, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(pz == 0, 0.0, pz / dpz)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            w = np.where(pz == 0, 0.0, ratio / (1.0 - ratio * s))
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= tol * np.maximum(1.0, np.abs(z))):
            break
    return z


def _newton_polish(high, z, steps: int = 3):
    dhigh = np.polyder(high)
    for _ in range(steps):
        dp = np.polyval(dhigh, z)
        if dp == 0:
            break
        step = np.polyval(high, z) / dp
        if not np.isfinite(step) or abs(step) > 1e-3 * max(1.0, abs(z)):
            break
        z = z - step
    return z


class BinaryRoot(NamedTuple):
    point: np.ndarray  # unit complex 2-vector, canonical phase
    multiplicity: int


def _normalize_cp1(r) -> np.ndarray:
    return normalize_c(np.asarray(r, dtype=complex))


def binary_roots(B: BinaryForm, tol: float = 1e-8, cluster: float = 1e-6) -> list[BinaryRoot]:
    """Roots of a binary form on CP^1, with multiplicity estimates.

    The core polynomial is solved by Aberth iteration in the chart whose
    leading coefficient dominates; each root is then polished in the chart
    where it has modulus at most one. Roots closer than ``cluster`` (chordal)
    are merged and reported with their count as multiplicity.
    """
    b = B.coeffs
    d = B.degree
    if not np.any(b != 0):
        raise DegenerateLine("identically zero binary form")
    m0 = 0
    while b[m0] == 0:
        m0 += 1
    minf = 0
    while b[d - minf] == 0:
        minf += 1
    core = b[m0 : d + 1 - minf]
    n = len(core) - 1
    raw: list[np.ndarray] = [np.array([0.0, 1.0], dtype=complex)] * m0
    raw += [np.array([1.0, 0.0], dtype=complex)] * minf
    if n > 0:
        if abs(core[-1]) >= abs(core[0]):
            roots = aberth(core)
            pts = [np.array([t, 1.0]) for t in roots]
        else:
            roots = aberth(core[::-1])
            pts = [np.array([1.0, s]) for s in roots]
        high_t = core[::-1]  # polynomial in t = alpha/beta, highest first
        high_s = core  # polynomial in s = beta/alpha, highest first
        for p in pts:
            if abs(p[1]) >= abs(p[0]):
                t = _newton_polish(high_t, p[0] / p[1])
                raw.append(np.array([t, 1.0]))
            else:
                s = _newton_polish(high_s, p[1] / p[0])
                raw.append(np.array([1.0, s]))
    pts = np.array([_normalize_cp1(r) for r in raw])
    # greedy clustering into multiplicity groups
    used = np.zeros(len(pts), dtype=bool)
    out: list[BinaryRoot] = []
    D = pairwise_chordal(pts) if len(pts) else np.zeros((0, 0))
    for i in range(len(pts)):
        if used[i]:
            continue
        members = np.where((D[i] < cluster) & ~used)[0]
        used[members] = True
        rep = pts[i]
        if len(members) > 1:
            rep = normalize_c(np.mean(align_phase(pts[members], pts[i]), axis=0))
        out.append(BinaryRoot(rep, int(len(members))))
    out.sort(key=lambda r: tuple(np.round(np.concatenate([r.point.real, r.point.imag]), 9)))
    return out


def deflate(B: BinaryForm, root, tol: float = 1e-8) -> BinaryForm:
    """Remove the linear factor vanishing at ``root`` by synthetic division."""
    r = np.asarray(root, dtype=complex)
    r = r / np.linalg.norm(r)
    if B.residual(r) > tol:
        raise NotARoot(f"residual {B.residual(r):.3g} exceeds {tol:.3g}")
    a0, b0 = r
    b = B.coeffs
    d = B.degree
    if d == 0:
        raise NotARoot("cannot deflate a constant form")
    if abs(b0) >= abs(a0):
        t0 = a0 / b0
        q = np.zeros(d, dtype=complex)
        q[d - 1] = b[d]
        for k in range(d - 1, 0, -1):
            q[k - 1] = b[k] + t0 * q[k]
        # B = (alpha - t0 beta) * B'
        out = q
    else:
        s0 = b0 / a0
        # q(s) = sum_j b[d-j] s^j, divide by (s - s0)
        rev = b[::-1]
        q = np.zeros(d, dtype=complex)
        q[d - 1] = rev[d]
        for k in range(d - 1, 0, -1):
            q[k - 1] = rev[k] + s0 * q[k]
        # B = (beta - s0 alpha) * B', with B' coefficient of alpha^k equal to q[d-1-k]
        out = q[::-1]
    if B.is_real and abs(r[0].imag) < 1e-300 and abs(r[1].imag) < 1e-300:
        out = out.real.astype(complex)
    return BinaryForm(d - 1, out)


# ---------------------------------------------------------------- conjugation


def conj_partition_indices(points, tol: float = 1e-8) -> tuple[list[int], list[tuple[int, int]]]:
    """Split points into real ones and conjugate pairs; returns indices.

    Pairs are ordered so that the first member is the canonical half: in the
    canonical-phase representative, the first coordinate with non-negligible
    imaginary part has positive imaginary part.
    """
    P = normalize_c(np.asarray(points, dtype=complex).reshape(-1, 3))
    imag = np.max(np.abs(P.imag), axis=1)
    real_idx = [i for i in range(len(P)) if imag[i] < tol]
    rest = [i for i in range(len(P)) if imag[i] >= tol]
    pairs: list[tuple[int, int]] = []
    used: set[int] = set()
    for i in rest:
        if i in used:
            continue
        cands = [j for j in rest if j != i and j not in used]
        if not cands:
            raise UnpairedPoint(f"point {i} has no conjugate partner")
        dist = chordal(np.conj(P[i])[None, :], P[cands])
        k = int(np.argmin(dist))
        if dist[k] >= tol:
            raise UnpairedPoint(f"point {i} has no conjugate within {tol:.3g} (nearest {dist[k]:.3g})")
        j = cands[k]
        used.update((i, j))
        pairs.append((i, j) if _is_upper_half(P[i], tol) else (j, i))
    return real_idx, pairs


def _is_upper_half(p: np.ndarray, tol: float) -> bool:
    for c in p:
        if abs(c.imag) >= tol:
            return c.imag > 0
    return True


def conj_partition(points, tol: float = 1e-8):
    """(real points, conjugate pairs) of a conjugation-closed multiset."""
    P = np.asarray(points, dtype=complex).reshape(-1, 3)
    real_idx, pairs = conj_partition_indices(P, tol)
    real = [normalize_r(P[i]) for i in real_idx]
    pair_pts = [(normalize_c(P[i]), normalize_c(P[j])) for i, j in pairs]
    return real, pair_pts


# ---------------------------------------------------------------- curve intersection

# fixed generic rotations used to eliminate a variable; the first one that
# yields a clean, complete solution set is accepted
_ROTATION_ANGLES = [
    (0.3141, 0.7183, 1.4142),
    (1.1234, 0.4321, 2.2361),
    (2.7182, 1.6180, 0.5772),
    (0.9003, 2.0012, 1.3010),
]


def _rotation(angles) -> np.ndarray:
    a, b, c = angles
    Rz = np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1]])
    Ry = np.array([[np.cos(b), 0, np.sin(b)], [0, 1, 0], [-np.sin(b), 0, np.cos(b)]])
    Rx = np.array([[1, 0, 0], [0, np.cos(c), -np.sin(c)], [0, np.sin(c), np.cos(c)]])
    return Rz @ Ry @ Rx


def _sylvester_det(f: np.ndarray, g: np.ndarray) -> complex:
    # f, g highest-degree first
    m, n = len(f) - 1, len(g) - 1
    S = np.zeros((m + n, m + n), dtype=complex)
    for i in range(n):
        S[i, i : i + m + 1] = f
    for i in range(m):
        S[n + i, i : i + n + 1] = g
    return np.linalg.det(S)


def local_chart(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis (2, 3) of the Hermitian complement of ``p``."""
    p = np.asarray(p, dtype=complex)
    p = p / np.linalg.norm(p)
    M = np.column_stack([p, np.eye(3, dtype=complex)])
    Q, _ = np.linalg.qr(M)
    # Q[:, 0] is parallel to p; the next two columns span its complement
    return Q[:, 1:3].T


def newton_pair(F: HomPoly3, G: HomPoly3, p, tol: float = 1e-13, maxiter: int = 30):
    """Newton's method for F = G = 0 in the affine chart orthogonal to ``p``.

    Returns (point, converged).
    """
    p = np.asarray(p, dtype=complex)
    p = p / np.linalg.norm(p)
    E = local_chart(p)
    x = np.zeros(2, dtype=complex)
    for _ in range(maxiter):
        q = p + x @ E
        J = np.array([F.gradient(q) @ E.T, G.gradient(q) @ E.T])
        r = np.array([F(q), G(q)])
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return q / np.linalg.norm(q), False
        x = x + dx
        if np.linalg.norm(dx) <= tol * (1.0 + np.linalg.norm(x)):
            q = p + x @ E
            return q / np.linalg.norm(q), True
    q = p + x @ E
    return q / np.linalg.norm(q), False


def local_charts(P: np.ndarray) -> np.ndarray:
    """Batched ``local_chart``: (m, 2, 3) orthonormal complements of the rows of P."""
    P = np.asarray(P, dtype=complex)
    P = P / np.linalg.norm(P, axis=1, keepdims=True)
    e = np.zeros(P.shape, dtype=complex)
    e[np.arange(len(P)), np.argmin(np.abs(P), axis=1)] = 1.0
    u = e - np.sum(np.conj(P) * e, axis=1, keepdims=True) * P
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    w = np.conj(np.cross(P, u))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return np.stack([u, w], axis=1)


def newton_pair_batch(F: HomPoly3, G: HomPoly3, P, tol: float = 1e-13, maxiter: int = 30):
    """``newton_pair`` on many starting points at once; returns (points, converged mask)."""
    P = np.asarray(P, dtype=complex)
    P = P / np.linalg.norm(P, axis=1, keepdims=True)
    E = local_charts(P)
    x = np.zeros((len(P), 2), dtype=complex)
    done = np.zeros(len(P), dtype=bool)
    for _ in range(maxiter):
        Q = P + np.einsum("mk,mkj->mj", x, E)
        fv, fg = F.value_and_gradient(Q)
        gv, gg = G.value_and_gradient(Q)
        J = np.stack([np.einsum("mj,mkj->mk", fg, E), np.einsum("mj,mkj->mk", gg, E)], axis=1)
        r = np.stack([fv, gv], axis=1)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        ok = np.abs(det) > 0
        safe = np.where(ok, det, 1.0)
        dx = np.stack([-(J[:, 1, 1] * r[:, 0] - J[:, 0, 1] * r[:, 1]) / safe,
                       -(-J[:, 1, 0] * r[:, 0] + J[:, 0, 0] * r[:, 1]) / safe], axis=1)
        dx[~ok | done] = 0.0
        x = x + dx
        done |= ok & (np.linalg.norm(dx, axis=1) <= tol * (1.0 + np.linalg.norm(x, axis=1)))
        if np.all(done):
            break
    Q = P + np.einsum("mk,mkj->mj", x, E)
    Q /= np.linalg.norm(Q, axis=1, keepdims=True)
    return Q, done & np.all(np.isfinite(Q), axis=1)


def intersect_curves(F: HomPoly3, G: HomPoly3, tol: float = 1e-9) -> np.ndarray:
    """All deg(F)*deg(G) intersection points of two plane curves.

    Eliminates y through the Sylvester resultant in a generically rotated
    frame (interpolated from samples on a circle), back-substitutes for y,
    and polishes each point with Newton's method on the pair of equations.
    Raises ``ValueError`` if no rotation gives a clean, complete solution.
    """
    n_expected = F.degree * G.degree
    for angles in _ROTATION_ANGLES:
        R = _rotation(angles)
        ex, ey, ez = R[:, 0], R[:, 1], R[:, 2]
        npts = n_expected + 1
        xs = np.exp(2j * np.pi * np.arange(npts) / npts)

        def row_polys(x0):
            # with alpha = 1 and beta = y, coefficient k multiplies y**(d - k):
            # the stored order is already highest-first in y
            u = x0 * ex + ez
            return restrict_to_line(F, u, ey).coeffs, restrict_to_line(G, u, ey).coeffs

        vals = np.array([_sylvester_det(*row_polys(x0)) for x0 in xs])
        res = np.fft.fft(vals) / npts  # r(x) coefficients, lowest first
        if abs(res[-1]) < 1e-12 * np.max(np.abs(res)):
            continue
        xroots = aberth(res)
        found = []
        for x0 in xroots:
            u = x0 * ex + ez
            fB = restrict_to_line(F, u, ey)
            gB = restrict_to_line(G, u, ey)
            best = None
            for r in binary_roots(fB, cluster=0.0):
                val = abs(gB(*r.point)) / gB.norm
                if best is None or val < best[0]:
                    best = (val, r.point)
            alpha, beta = best[1]
            q = alpha * u + beta * ey
            q, ok = newton_pair(F, G, q)
            if ok:
                found.append(q)
        if len(found) != n_expected:
            continue
        P = normalize_c(np.array(found))
        if min_separation(P) < 1e-7:
            continue
        if np.max(np.abs(F(P))) > tol or np.max(np.abs(G(P))) > tol:
            continue
        return P
    raise ValueError("curve intersection failed for every elimination frame")
