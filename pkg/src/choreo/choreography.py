"""Real tracing, monodromy and theorem verdicts for closed divisor paths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import chordal
from .errors import EndpointMismatch, MatchFailure, NonIntegerWinding, UnoccupiedNonzero
from .topology import CurveTopology, CurveType, _project
from .tracking import DivisorPath

WINDING_TOL = 0.01
MATCH_TOL = 1e-6


@dataclass(frozen=True)
class TracingVector:
    c: dict[int, int]  # winding per component id, in the oriented basis
    basis: str  # "complex_orientation" | "marching"
    raw: dict[int, float] = field(default_factory=dict)  # unrounded sums in stored order

    def as_list(self) -> list[int]:
        return [self.c[k] for k in sorted(self.c)]

    def __add__(self, other: TracingVector) -> TracingVector:
        return TracingVector({k: self.c[k] + other.c[k] for k in self.c}, self.basis)

    def __neg__(self) -> TracingVector:
        return TracingVector({k: -v for k, v in self.c.items()}, self.basis)

    def to_json(self) -> dict:
        return {
            "c": {str(k): v for k, v in sorted(self.c.items())},
            "basis": self.basis,
            "raw": {str(k): round(v, 9) for k, v in sorted(self.raw.items())},
        }


@dataclass(frozen=True)
class MonodromyPermutation:
    perm: dict[int, int]  # real start index j -> index of the start point where j ends
    cyclic_order: dict[int, list[int]]  # per component, real indices in oriented cyclic order
    powers: dict[int, int | None]  # e with mu|A_i = nu^e, None if not a rotation

    def cycles(self) -> list[list[int]]:
        seen: set[int] = set()
        out = []
        for j in sorted(self.perm):
            if j in seen:
                continue
            cyc = [j]
            seen.add(j)
            k = self.perm[j]
            while k != j:
                cyc.append(k)
                seen.add(k)
                k = self.perm[k]
            out.append(cyc)
        return out

    @property
    def is_identity(self) -> bool:
        return all(k == v for k, v in self.perm.items())

    def to_json(self) -> dict:
        return {
            "permutation": [[int(k), int(v)] for k, v in sorted(self.perm.items())],
            "cycles": self.cycles(),
            "cyclic_order": {str(k): v for k, v in sorted(self.cyclic_order.items())},
            "cyclic_powers": {str(k): v for k, v in sorted(self.powers.items())},
        }


@dataclass(frozen=True)
class TheoremVerdict:
    theorem: str  # Th1a | Th1b | Th1c | Th2a | Th2b | Th3-consistency | Sec3_3
    applicable: bool
    satisfied: bool | None
    detail: str = ""

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "applicable": self.applicable,
                "satisfied": self.satisfied, "detail": self.detail}


# ---------------------------------------------------------------- tracing and monodromy


def real_tracing(path: DivisorPath, topo: CurveTopology) -> TracingVector:
    c, raw = {}, {}
    for comp in topo.components:
        members = [j for j in path.real if path.component[j] == comp.id]
        s = float(sum(path.lifts[-1, j] - path.lifts[0, j] for j in members))
        if abs(s - round(s)) > WINDING_TOL:
            raise NonIntegerWinding(f"component {comp.id} winding sum {s:.4f} is not an integer")
        raw[comp.id] = s
        c[comp.id] = int(round(s)) * comp.orientation
    basis = "complex_orientation" if topo.complex_orientation_fixed else "marching"
    return TracingVector(c, basis, raw)


def monodromy(path: DivisorPath, topo: CurveTopology) -> MonodromyPermutation:
    real = list(path.real)
    perm: dict[int, int] = {}
    if real:
        start = path.points[0, real]
        end = path.points[-1, real]
        D = chordal(end[:, None, :], start[None, :, :])
        for a, j in enumerate(real):
            b = int(np.argmin(D[a]))
            if D[a, b] > MATCH_TOL:
                raise MatchFailure(f"end of point {j} is {D[a, b]:.3g} from every start point")
            perm[j] = real[b]
        if len(set(perm.values())) != len(perm):
            raise MatchFailure("end points do not match start points one to one")

    order: dict[int, list[int]] = {}
    powers: dict[int, int | None] = {}
    for comp in topo.components:
        members = [j for j in real if path.component[j] == comp.id]
        if not members:
            continue
        key = [(comp.orientation * path.lifts[0, j]) % 1.0 for j in members]
        cyc = [members[i] for i in np.argsort(key, kind="stable")]
        order[comp.id] = cyc
        n = len(cyc)
        pos = {j: i for i, j in enumerate(cyc)}
        if any(path.component[perm[j]] != comp.id for j in cyc):
            raise MatchFailure(f"monodromy leaves component {comp.id}")
        e = (pos[perm[cyc[0]]] - 0) % n
        ok = all(pos[perm[cyc[i]]] == (i + e) % n for i in range(n))
        powers[comp.id] = e if ok else None
    return MonodromyPermutation(perm, order, powers)


def check_tracing_monodromy(tv: TracingVector, mp: MonodromyPermutation) -> TheoremVerdict:
    """mu restricted to each occupied component is nu to the power c_i."""
    bad = []
    for cid, cyc in mp.cyclic_order.items():
        n = len(cyc)
        e = mp.powers[cid]
        if e is None or (tv.c[cid] - e) % n != 0:
            bad.append(f"component {cid}: power {e}, c={tv.c[cid]}, |A|={n}")
    detail = "; ".join(bad) if bad else "mu|A_i = nu^c_i on every occupied component"
    return TheoremVerdict("Sec3_3", True, not bad, detail)


def check_theorems(tv: TracingVector, divisor_realness: str, curve_type, occupied: set[int],
                   contractible: bool | None = None, monodromy: MonodromyPermutation | None = None
                   ) -> list[TheoremVerdict]:
    """Verdicts for the inclusions stated by the theorems; converses are never asserted.

    ``divisor_realness`` is "purely_real" or "mixed". The optional
    ``contractible`` flag adds a null-homotopy consistency verdict.
    """
    ctype = CurveType(curve_type)
    pure = divisor_realness == "purely_real"
    type1 = ctype == CurveType.TYPE_I
    values = list(tv.c.values())
    unoccupied = sorted(set(tv.c) - set(occupied))
    all_equal = len(set(values)) <= 1
    all_zero = all(v == 0 for v in values)
    same_parity = len({v % 2 for v in values}) <= 1
    all_even = all(v % 2 == 0 for v in values)
    cs = str(tv.as_list())

    def verdict(name, applicable, ok, why):
        return TheoremVerdict(name, applicable, ok if applicable else None, why if applicable else "not applicable")

    out = [
        verdict("Th1a", type1 and pure, all_equal, f"c={cs}: components must share one value"),
        verdict("Th1b", type1 and pure and bool(unoccupied), all_zero,
                f"c={cs}, unoccupied {unoccupied}: tracing must vanish"),
        verdict("Th1c", ctype == CurveType.TYPE_II and pure, all_zero, f"c={cs}: type II tracing must vanish"),
        verdict("Th2a", type1, same_parity, f"c={cs}: components must share parity"),
        verdict("Th2b", type1 and bool(unoccupied), all_even, f"c={cs}, unoccupied {unoccupied}: all c_k even"),
    ]
    if contractible is not None:
        ident = True if monodromy is None else monodromy.is_identity
        out.append(verdict("Th3-consistency", bool(contractible), all_zero and ident,
                           f"c={cs}, identity monodromy: {ident}"))
    return out


# ---------------------------------------------------------------- synthetic paths


def synthetic_loop(topo: CurveTopology, start: list[tuple[int, float]], c: dict[int, int] | list[int],
                   steps: int = 400, wiggle: float = 0.0, project: bool = True) -> DivisorPath:
    """A purely real closed path with prescribed winding per component.

    Points on a component move at constant arc speed (plus an optional
    common wiggle that vanishes at both ends) to the start positions shifted
    cyclically, so the windings sum to c_k in the oriented basis. No
    algebraic constraint is imposed.
    """
    if not isinstance(c, dict):
        c = dict(enumerate(c))
    occupied = {cid for cid, _ in start}
    for cid, v in c.items():
        if v != 0 and cid not in occupied:
            raise UnoccupiedNonzero(f"component {cid} has no points but c={v}")
    n = len(start)
    ts = np.linspace(0.0, 1.0, steps + 1)
    lifts = np.full((steps + 1, n), np.nan)
    comp_of = np.array([cid for cid, _ in start], dtype=int)
    phi0 = np.array([phi % 1.0 for _, phi in start])
    bump = wiggle * np.sin(2 * np.pi * ts) * np.sin(np.pi * ts)
    for comp in topo.components:
        members = np.nonzero(comp_of == comp.id)[0]
        if not len(members):
            continue
        order = members[np.argsort(phi0[members], kind="stable")]
        k = len(order)
        winding = int(c.get(comp.id, 0)) * comp.orientation  # in stored direction
        s, q = winding % k, winding // k
        for m, j in enumerate(order):
            tgt = phi0[order[(m + s) % k]] + q + (1 if m + s >= k else 0)
            lifts[:, j] = phi0[j] + ts * (tgt - phi0[j]) + bump
    pts = np.empty((steps + 1, n, 3), dtype=complex)
    for i in range(steps + 1):
        for j in range(n):
            p = topo.component(int(comp_of[j])).point_at(lifts[i, j])
            if project:
                p, _ = _project(topo.F, p, 1e-14)
            if i > 0 and np.real(p @ pts[i - 1, j]) < 0:
                p = -p
            pts[i, j] = p
    return DivisorPath(ts, pts, tuple(range(n)), (), np.zeros(n, dtype=int), comp_of, lifts,
                       kind="Synthetic")


def _match_ends(p: DivisorPath, q: DivisorPath) -> list[int]:
    """For each point of p, the index in q whose start is p's end."""
    D = chordal(p.points[-1][:, None, :], q.points[0][None, :, :])
    pi = [int(np.argmin(D[i])) for i in range(p.n_points)]
    if len(set(pi)) != len(pi) or max(D[i, pi[i]] for i in range(p.n_points)) > MATCH_TOL:
        raise EndpointMismatch("the second path does not start where the first ends")
    return pi


def loop_concat(p: DivisorPath, q: DivisorPath) -> DivisorPath:
    """p followed by q, reparametrized on [0, 1]; indices follow p."""
    pi = _match_ends(p, q)
    if any((j in p.real) != (pi[j] in q.real) for j in range(p.n_points)):
        raise EndpointMismatch("real and complex points do not correspond")
    Q = q.points[:, pi, :]
    # constant phase per trajectory so the joined representative is continuous
    inner = np.sum(np.conj(Q[0]) * p.points[-1], axis=1)
    Q = Q * (inner / np.abs(inner))[None, :, None]
    ql = q.lifts[:, pi]
    ql = ql - ql[0] + p.lifts[-1]
    tp = (p.t - p.t[0]) / p.period
    tq = (q.t - q.t[0]) / q.period
    t = np.concatenate([0.5 * tp, 0.5 + 0.5 * tq[1:]])
    pts = np.concatenate([p.points, Q[1:]], axis=0)
    lifts = np.concatenate([p.lifts, ql[1:]], axis=0)
    return DivisorPath(t, pts, p.real, p.pairs, p.owner.copy(), p.component.copy(), lifts, kind="Concat")


def loop_reverse(p: DivisorPath) -> DivisorPath:
    t = (p.t[-1] - p.t[::-1]) / p.period
    lifts = p.lifts[::-1].copy()
    lifts -= np.floor(np.nan_to_num(lifts[0]))[None, :]
    return DivisorPath(t, p.points[::-1].copy(), p.real, p.pairs, p.owner.copy(), p.component.copy(), lifts,
                       kind="Reverse")
