"""Projective systems of charts and algebroids, threads, limit sections.

A tower is a finite prefix ``M_0 <- M_1 <- ... <- M_D`` with consecutive
bonding maps; composites are built symbolically. Levels carry labels (for
example ``1..D`` for the oscillator tower) and every public method indexes
levels by label.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .algebroid import Algebroid, Matrix, Section, as_matrix, eval_matrix, verify_morphism
from .calculus import AlgebroidForm
from .checks import CheckReport, Sampling, random_polynomial, sup_norm
from .constructions import (NijenhuisTensor, distribution_algebroid, harmonic_oscillator_N,
                            nijenhuis_algebroid)
from .algebroid import StructureFunctions
from .expr import ZERO, Const, Expr, mul, simplify, sum_exprs
from .fields import Chart, SmoothMap, VectorField, coordinate_field

__all__ = [
    "ProjectiveSystem", "Thread", "AlgebroidTower", "TowerEntry", "TowerReport",
    "LimitSection", "CoherenceError", "verify_system", "validate_thread", "limit_section",
    "limit_bracket", "h0_membership", "nijenhuis_tower", "corank1_tower", "identity_tower",
    "truncation_system", "coherent_sections", "alpha_compatibility", "fourier_chart",
    "leibniz_lift_report",
]


def _mat_mul(A: Matrix, B: Matrix) -> Matrix:
    inner = len(B)
    cols = len(B[0]) if B else 0
    return tuple(tuple(simplify(sum_exprs(mul(A[r][k], B[k][c]) for k in range(inner)))
                       for c in range(cols)) for r in range(len(A)))


def _pull_matrix(F: SmoothMap, M: Matrix) -> Matrix:
    return tuple(tuple(F.pull(e) for e in row) for row in M)


def _identity_matrix(n: int) -> Matrix:
    return tuple(tuple(Const(1.0) if r == c else ZERO for c in range(n)) for r in range(n))


class ProjectiveSystem:
    """Charts ``M_0 .. M_D`` with bonding maps ``bonds[k]: M_{k+1} -> M_k``."""

    def __init__(self, charts: Sequence[Chart], bonds: Sequence[SmoothMap], labels=None):
        charts = tuple(charts)
        if not charts:
            raise ValueError("a projective system needs at least one level")
        if len(bonds) != len(charts) - 1:
            raise ValueError(f"{len(charts)} levels need {len(charts) - 1} bonding maps, got {len(bonds)}")
        for k, b in enumerate(bonds):
            if b.source != charts[k + 1] or b.target != charts[k]:
                raise ValueError(f"bonding map {k} does not go from level {k + 1} to level {k}")
        self.charts = charts
        self.bonds = tuple(bonds)
        self.labels = tuple(range(len(charts)) if labels is None else labels)
        if len(self.labels) != len(charts) or len(set(self.labels)) != len(charts):
            raise ValueError("labels must be distinct, one per level")
        self._composites: dict = {}

    @property
    def depth(self) -> int:
        """Number of bonds; a single level has depth 0."""
        return len(self.charts) - 1

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no level labelled {label!r}") from None

    def chart(self, label) -> Chart:
        return self.charts[self.index(label)]

    def composite(self, i, j) -> SmoothMap:
        """delta_i^j: M_j -> M_i for labels with i at or below j."""
        a, b = self.index(i), self.index(j)
        if a > b:
            raise ValueError(f"no bonding map from level {j} up to level {i}")
        if (a, b) not in self._composites:
            if a == b:
                m = SmoothMap.identity(self.charts[a])
            else:
                m = self.bonds[a]
                for k in range(a + 1, b):
                    m = m.compose(self.bonds[k])
            self._composites[(a, b)] = m
        return self._composites[(a, b)]

    def push_down(self, top_point) -> "Thread":
        """Thread through the images of a top-level point."""
        pts = [self.charts[-1].point(top_point)]
        for b in reversed(self.bonds):
            pts.append(b(pts[-1]))
        return Thread(tuple(reversed(pts)))

    def composition_report(self, sampling: Sampling, tol: float) -> dict:
        """Per (i, k): worst residual of delta_i^j(delta_j^k x) - delta_i^k(x) over j.

        The left side chains consecutive maps numerically, the right side is
        the symbolic composite, so the two routes are independent.
        """
        out = {}
        n = len(self.charts)
        for a, c in combinations(range(n), 2):
            pts = sampling.points(self.charts[c].dim, salt=c)
            direct = self.composite(self.labels[a], self.labels[c])(pts)
            res = np.zeros(len(pts))
            for b in range(a, c + 1):
                y = pts
                for k in range(c - 1, b - 1, -1):
                    y = self.bonds[k](y)
                y = self.composite(self.labels[a], self.labels[b])(y)
                res = np.maximum(res, sup_norm(y - direct))
            out[(self.labels[a], self.labels[c])] = CheckReport("composition", pts, res, tol)
        return out


@dataclass(frozen=True)
class Thread:
    """One point per level of a projective system."""

    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(np.asarray(p, dtype=float) for p in self.points))

    @property
    def depth(self) -> int:
        return len(self.points) - 1


def validate_thread(system: ProjectiveSystem, thread: Thread, tol: float = 1e-12) -> bool:
    """True iff delta_i^j(x_j) matches x_i within ``tol`` for all level pairs."""
    if thread.depth != system.depth:
        raise ValueError(f"thread of depth {thread.depth} on a system of depth {system.depth}")
    for a, b in combinations(range(len(system.charts)), 2):
        img = system.composite(system.labels[a], system.labels[b])(system.charts[b].point(thread.points[b]))
        if np.max(np.abs(img - system.charts[a].point(thread.points[a])), initial=0.0) > tol:
            return False
    return True


def truncation_system(dims: Sequence[int], prefix: str = "x") -> ProjectiveSystem:
    """R^{d_0} <- R^{d_1} <- ... by keeping leading coordinates."""
    charts = [Chart.euclidean(d, prefix) for d in dims]
    bonds = [SmoothMap.projection(charts[k + 1], charts[k]) for k in range(len(charts) - 1)]
    return ProjectiveSystem(charts, bonds)


class AlgebroidTower:
    """Algebroids over a projective system with consecutive bundle maps.

    ``morphisms[k]`` is the ``m_k x m_{k+1}`` matrix of ``f_k^{k+1}`` over
    the level ``k+1`` coordinates, covering ``system.bonds[k]``.
    """

    def __init__(self, system: ProjectiveSystem, algebroids: Sequence[Algebroid],
                 morphisms: Sequence, name: str = "tower"):
        algebroids = tuple(algebroids)
        if len(algebroids) != len(system.charts):
            raise ValueError("one algebroid per level is required")
        if len(morphisms) != len(algebroids) - 1:
            raise ValueError("one bundle map per consecutive level pair is required")
        for k, A in enumerate(algebroids):
            if A.chart != system.charts[k]:
                raise ValueError(f"algebroid at level {system.labels[k]} lives on another chart")
        self.system = system
        self.algebroids = algebroids
        self.morphisms: tuple[Matrix, ...] = tuple(
            as_matrix(system.charts[k + 1], M,
                      (algebroids[k].fiber_dim, algebroids[k + 1].fiber_dim), "bundle map")
            for k, M in enumerate(morphisms))
        self.name = name
        self._composites: dict = {}

    @property
    def labels(self):
        return self.system.labels

    @property
    def depth(self) -> int:
        return self.system.depth

    def algebroid(self, label) -> Algebroid:
        return self.algebroids[self.system.index(label)]

    def morphism(self, i, j) -> Matrix:
        """f_i^j over level-j coordinates: f_i^{i+1}(delta_{i+1}^j x) f_{i+1}^j(x)."""
        a, b = self.system.index(i), self.system.index(j)
        if a > b:
            raise ValueError(f"no bundle map from level {j} up to level {i}")
        if (a, b) not in self._composites:
            if a == b:
                M = _identity_matrix(self.algebroids[a].fiber_dim)
            else:
                M = self.morphisms[b - 1]
                for k in range(b - 2, a - 1, -1):
                    delta = self.system.composite(self.labels[k + 1], self.labels[b])
                    M = _mat_mul(_pull_matrix(delta, self.morphisms[k]), M)
            self._composites[(a, b)] = M
        return self._composites[(a, b)]

    def with_morphism(self, i, matrix) -> "AlgebroidTower":
        """Copy with f_i^{i+1} replaced (fault injection, experiments)."""
        k = self.system.index(i)
        ms = list(self.morphisms)
        ms[k] = matrix
        return AlgebroidTower(self.system, self.algebroids, ms, self.name)

    def with_algebroid(self, label, A: Algebroid) -> "AlgebroidTower":
        algs = list(self.algebroids)
        algs[self.system.index(label)] = A
        return AlgebroidTower(self.system, algs, self.morphisms, self.name)

    def scaled_morphism(self, i, factor: float) -> "AlgebroidTower":
        k = self.system.index(i)
        M = tuple(tuple(mul(Const(float(factor)), e) for e in row) for row in self.morphisms[k])
        return self.with_morphism(i, M)


# ---------------------------------------------------------------------------
# coherent section families


def _constant_value(M: Matrix, what: str) -> np.ndarray:
    vals = np.empty((len(M), len(M[0]) if M else 0))
    for r, row in enumerate(M):
        for c, e in enumerate(row):
            if not isinstance(e, Const):
                raise ValueError(f"{what} is not constant; coherent generation needs constant bundle maps")
            vals[r, c] = e.value
    return vals


def coherent_sections(T: AlgebroidTower, rng: np.random.Generator, degree: int = 2,
                      terms: int = 3) -> list[Section]:
    """Random family with f_k^{k+1} s_{k+1} = s_k o delta_k^{k+1} exactly.

    Built bottom-up: ``s_{k+1} = f^+ (s_k o delta) + (I - f^+ f) r`` with a
    random polynomial ``r``, which needs each consecutive ``f`` constant and
    of full row rank.
    """
    A0 = T.algebroids[0]
    names0 = A0.chart.names
    out = [A0.section([random_polynomial(names0, rng, degree, terms) for _ in range(A0.fiber_dim)])]
    for k, M in enumerate(T.morphisms):
        f = _constant_value(M, f"bundle map {T.labels[k]}->{T.labels[k + 1]}")
        if np.linalg.matrix_rank(f) != f.shape[0]:
            raise ValueError("coherent generation needs surjective bundle maps")
        fp = np.linalg.pinv(f)
        fp[np.abs(fp) < 1e-14] = 0.0
        kernel = np.eye(f.shape[1]) - fp @ f
        kernel[np.abs(kernel) < 1e-14] = 0.0
        A = T.algebroids[k + 1]
        pulled = [T.system.bonds[k].pull(c) for c in out[-1].components]
        r = [random_polynomial(A.chart.names, rng, degree, terms) for _ in range(A.fiber_dim)]
        comps = []
        for row in range(A.fiber_dim):
            terms_ = [mul(Const(fp[row, c]), pulled[c]) for c in range(len(pulled)) if fp[row, c] != 0]
            terms_ += [mul(Const(kernel[row, c]), r[c]) for c in range(A.fiber_dim) if kernel[row, c] != 0]
            comps.append(simplify(sum_exprs(terms_)))
        out.append(A.section(comps))
    return out


def _coherence_residual(T: AlgebroidTower, a: int, b: int, lower: Section, upper: Section,
                        pts: np.ndarray) -> np.ndarray:
    i, j = T.labels[a], T.labels[b]
    F = eval_matrix(T.morphism(i, j), T.system.charts[b], pts)
    lhs = np.einsum("krc,kc->kr", F, upper(pts))
    rhs = lower(T.system.composite(i, j)(pts))
    return sup_norm(lhs - rhs)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class TowerEntry:
    kind: str
    lower: object
    upper: object
    report: CheckReport


@dataclass
class TowerReport:
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.report.passed for e in self.entries)

    @property
    def max_residual(self) -> float:
        return max((e.report.max_residual for e in self.entries), default=0.0)

    def failing(self) -> list:
        return [e for e in self.entries if not e.report.passed]

    def get(self, kind: str, lower, upper) -> CheckReport:
        for e in self.entries:
            if (e.kind, e.lower, e.upper) == (kind, lower, upper):
                return e.report
        raise KeyError((kind, lower, upper))

    def rows(self) -> list[dict]:
        return [{"check": e.kind, "levels": [e.lower, e.upper],
                 "max_residual": e.report.max_residual, "tol": e.report.tol,
                 "passed": e.report.passed} for e in self.entries]

    def __str__(self):
        lines = [f"{e.kind:<12} ({e.lower},{e.upper})  {e.report.max_residual:.3e}  "
                 f"{'pass' if e.report.passed else 'FAIL'}" for e in self.entries]
        return "\n".join(lines + [f"overall: {'pass' if self.passed else 'FAIL'}"])


def verify_system(T: AlgebroidTower, samples: int | Sampling = 100, tol: float = 1e-9,
                  pairs: int = 3, morphisms: bool = False) -> TowerReport:
    """Check the compatibility conditions of a tower on every level pair.

    Entries: bonding composition, anchor compatibility
    rho_i o f_i^j = T delta_i^j o rho_j, and bracket compatibility
    f_i^j [s_j, t_j] = [s_i, t_i] o delta_i^j on ``pairs`` random coherent
    section pairs. With ``morphisms=True`` each consecutive f is also
    checked to commute with the exterior derivatives on random forms.
    Failures are report content, never exceptions.
    """
    sampling = samples if isinstance(samples, Sampling) else Sampling(count=int(samples))
    report = TowerReport()
    sys_ = T.system
    comp = sys_.composition_report(sampling, tol)
    n = len(T.algebroids)
    rng = np.random.default_rng(sampling.seed)
    families = []
    if n > 1:
        for _ in range(pairs):
            families.append((coherent_sections(T, rng), coherent_sections(T, rng)))
    brackets = [[T.algebroids[k].bracket(s[k], t[k]) for k in range(n)] for s, t in families]

    for a, b in combinations(range(n), 2):
        i, j = T.labels[a], T.labels[b]
        pts = sampling.points(sys_.charts[b].dim, salt=b)
        report.entries.append(TowerEntry("composition", i, j, comp[(i, j)]))

        delta = sys_.composite(i, j)
        F = eval_matrix(T.morphism(i, j), sys_.charts[b], pts)
        lhs = T.algebroids[a].anchor_at(delta(pts)) @ F
        rhs = delta.jacobian(pts) @ T.algebroids[b].anchor_at(pts)
        res = sup_norm((lhs - rhs).reshape(len(pts), -1))
        report.entries.append(TowerEntry("anchor", i, j, CheckReport("anchor compatibility", pts, res, tol)))

        res = np.zeros(len(pts))
        for br in brackets:
            res = np.maximum(res, _coherence_residual(T, a, b, br[a], br[b], pts))
        report.entries.append(TowerEntry("bracket", i, j, CheckReport("bracket compatibility", pts, res, tol)))

    if morphisms:
        for k in range(n - 1):
            A, A2 = T.algebroids[k + 1], T.algebroids[k]
            pts = sampling.points(A.chart.dim, salt=k + 1)
            forms = [random_polynomial(A2.chart.names, rng),
                     AlgebroidForm(A2, 1, [random_polynomial(A2.chart.names, rng)
                                           for _ in range(A2.fiber_dim)])]
            rep = verify_morphism(T.morphisms[k], sys_.bonds[k], A, A2, forms, pts, tol)
            report.entries.append(TowerEntry("morphism", T.labels[k], T.labels[k + 1], rep))
    return report


# ---------------------------------------------------------------------------
# limit sections


class CoherenceError(ValueError):
    """Per-level sections that do not form a coherent family."""

    def __init__(self, lower, upper, report: CheckReport):
        self.lower, self.upper, self.report = lower, upper, report
        super().__init__(f"sections are not coherent between levels {lower} and {upper} "
                         f"(max residual {report.max_residual:.3e}, tol {report.tol:g})")


@dataclass(frozen=True, eq=False)
class LimitSection:
    tower: AlgebroidTower
    sections: tuple
    sampling: Sampling
    tol: float
    max_residual: float

    def evaluate(self, thread: Thread) -> list[np.ndarray]:
        if thread.depth != self.tower.depth:
            raise ValueError("thread depth does not match the tower")
        return [s(np.asarray(p, dtype=float)) for s, p in zip(self.sections, thread.points)]

    def level(self, label) -> Section:
        return self.sections[self.tower.system.index(label)]


def limit_section(T: AlgebroidTower, sections: Sequence, samples: int | Sampling = 100,
                  tol: float = 1e-9) -> LimitSection:
    """Accept a per-level family iff f_i^j s_j = s_i o delta_i^j at the samples."""
    sampling = samples if isinstance(samples, Sampling) else Sampling(count=int(samples))
    if len(sections) != len(T.algebroids):
        raise ValueError(f"{len(sections)} sections for {len(T.algebroids)} levels")
    secs = []
    for A, s in zip(T.algebroids, sections):
        secs.append(s if isinstance(s, Section) else A.section(s))
        if secs[-1].algebroid is not A:
            raise ValueError("section belongs to a different algebroid")
    worst = 0.0
    for a, b in combinations(range(len(secs)), 2):
        pts = sampling.points(T.system.charts[b].dim, salt=b)
        res = _coherence_residual(T, a, b, secs[a], secs[b], pts)
        rep = CheckReport("coherence", pts, res, tol)
        if not rep.passed:
            raise CoherenceError(T.labels[a], T.labels[b], rep)
        worst = max(worst, rep.max_residual)
    return LimitSection(T, tuple(secs), sampling, tol, worst)


def limit_bracket(T: AlgebroidTower, ls1: LimitSection, ls2: LimitSection) -> LimitSection:
    """Levelwise bracket, re-verified for coherence."""
    if ls1.tower is not T or ls2.tower is not T:
        raise ValueError("limit sections belong to a different tower")
    secs = [A.bracket(s, t) for A, s, t in zip(T.algebroids, ls1.sections, ls2.sections)]
    return limit_section(T, secs, ls1.sampling, max(ls1.tol, ls2.tol))


def leibniz_lift_report(T: AlgebroidTower, ls1: LimitSection, ls2: LimitSection, g0,
                        samples: int | Sampling = 100, tol: float = 1e-9) -> CheckReport:
    """f_i^j (g_j [s_j, t_j]) vs (g_i [s_i, t_i]) o delta_i^j with g_j = g_0 o delta_0^j."""
    sampling = samples if isinstance(samples, Sampling) else Sampling(count=int(samples))
    base = T.labels[0]
    g0 = T.system.charts[0].parse(g0) if isinstance(g0, str) else g0
    gs = [T.system.composite(base, lab).pull(g0) for lab in T.labels]
    secs = [A.bracket(s, t).scale(g) for A, s, t, g in zip(T.algebroids, ls1.sections, ls2.sections, gs)]
    n = len(secs)
    parts, pts_all = [], None
    for a, b in combinations(range(n), 2):
        pts = sampling.points(T.system.charts[b].dim, salt=b)
        parts.append(np.max(_coherence_residual(T, a, b, secs[a], secs[b], pts)))
    res = np.asarray(parts) if parts else np.zeros(1)
    pts_all = np.arange(len(res), dtype=float).reshape(-1, 1)
    return CheckReport("leibniz lift", pts_all, res, tol)


# ---------------------------------------------------------------------------
# H^0 membership


def h0_membership(h: Sequence, lam: Sequence) -> bool:
    """True iff lam_k^j h_j = h_k lam_k^j exactly for all k <= j.

    ``h[k]`` is a square invertible matrix at level k and ``lam[k]`` the
    bonding map from level k+1 to level k (shape ``d_k x d_{k+1}``).
    Composites are products of consecutive maps. Integer and object
    (e.g. ``Fraction``) arrays are compared exactly.
    """
    hs = [np.asarray(x) for x in h]
    ls = [np.asarray(x) for x in lam]
    if len(ls) != max(len(hs) - 1, 0):
        raise ValueError(f"{len(hs)} levels need {len(hs) - 1} bonding maps, got {len(ls)}")
    for k, H in enumerate(hs):
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError(f"h_{k} is not square: shape {H.shape}")
        if np.linalg.matrix_rank(H.astype(float)) != H.shape[0]:
            raise ValueError(f"h_{k} is singular")
    for k, L in enumerate(ls):
        if L.shape != (hs[k].shape[0], hs[k + 1].shape[0]):
            raise ValueError(f"bonding map {k} has shape {L.shape}, expected "
                             f"{(hs[k].shape[0], hs[k + 1].shape[0])}")
    for k in range(len(hs)):
        comp = None
        for j in range(k + 1, len(hs)):
            comp = ls[k] if comp is None else comp @ ls[j - 1]
            if not np.array_equal(comp @ hs[j], hs[k] @ comp):
                return False
    return True


# ---------------------------------------------------------------------------
# named towers


def identity_tower(depth: int, dim: int = 1) -> AlgebroidTower:
    """Tangent algebroids of R^dim at every level, all maps the identity."""
    from .algebroid import tangent_algebroid

    chart = Chart.euclidean(dim)
    system = ProjectiveSystem([chart] * (depth + 1),
                              [SmoothMap.identity(chart) for _ in range(depth)])
    algs = [tangent_algebroid(chart) for _ in range(depth + 1)]
    return AlgebroidTower(system, algs, [_identity_matrix(dim)] * depth, name="identity")


def _projection_matrix(rows: int, cols: int) -> Matrix:
    return tuple(tuple(Const(1.0) if r == c else ZERO for c in range(cols)) for r in range(rows))


def nijenhuis_tower(depth: int, tensors: Sequence[NijenhuisTensor] | None = None) -> AlgebroidTower:
    """Levels i = 1..depth: oscillator recursion operators on R^{2i}.

    Bonding maps keep the leading coordinates and f_i^{i+1} is their
    (constant) tangent map.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    tensors = list(tensors) if tensors is not None else [harmonic_oscillator_N(i) for i in range(1, depth + 1)]
    if len(tensors) != depth:
        raise ValueError(f"{len(tensors)} tensors for depth {depth}")
    charts = [N.chart for N in tensors]
    bonds = [SmoothMap.projection(charts[k + 1], charts[k]) for k in range(depth - 1)]
    system = ProjectiveSystem(charts, bonds, labels=range(1, depth + 1))
    algs = [nijenhuis_algebroid(N) for N in tensors]
    fs = [_projection_matrix(charts[k].dim, charts[k + 1].dim) for k in range(depth - 1)]
    return AlgebroidTower(system, algs, fs, name="nijenhuis")


def fourier_chart(i: int) -> Chart:
    return Chart(("a0",) + tuple(n for k in range(1, i + 1) for n in (f"a{k}", f"b{k}")))


def corank1_tower(depth: int) -> AlgebroidTower:
    """Levels i = 1..depth: ker of the mean functional on truncated Fourier data.

    Level i has coordinates (a0, a1, b1, .., ai, bi); E_i is spanned by the
    coordinate fields other than d/da0, with vanishing structure functions.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    charts = [fourier_chart(i) for i in range(1, depth + 1)]
    bonds = [SmoothMap.projection(charts[k + 1], charts[k]) for k in range(depth - 1)]
    system = ProjectiveSystem(charts, bonds, labels=range(1, depth + 1))
    algs = []
    for chart in charts:
        frame = [coordinate_field(chart, k) for k in range(1, chart.dim)]
        algs.append(distribution_algebroid(frame, StructureFunctions.zero(len(frame))))
    fs = [_projection_matrix(algs[k].fiber_dim, algs[k + 1].fiber_dim) for k in range(depth - 1)]
    return AlgebroidTower(system, algs, fs, name="corank1")


def alpha_compatibility(T: AlgebroidTower, samples: int | Sampling = 100,
                        tol: float = 1e-12) -> CheckReport:
    """For the corank-1 tower: alpha_i o T delta_i^j = alpha_j and alpha_i o rho_i = 0.

    alpha_i is the a0 covector (1, 0, .., 0) at each level.
    """
    sampling = samples if isinstance(samples, Sampling) else Sampling(count=int(samples))
    res_all = []
    for b, chart in enumerate(T.system.charts):
        pts = sampling.points(chart.dim, salt=b)
        alpha_j = np.zeros(chart.dim)
        alpha_j[0] = 1.0
        res = np.abs(T.algebroids[b].anchor_at(pts).transpose(0, 2, 1) @ alpha_j).max(axis=1, initial=0.0)
        for a in range(b):
            alpha_i = np.zeros(T.system.charts[a].dim)
            alpha_i[0] = 1.0
            J = T.system.composite(T.labels[a], T.labels[b]).jacobian(pts)
            res = np.maximum(res, np.abs(alpha_i @ J - alpha_j).max(axis=1))
        res_all.append(res.max())
    res = np.asarray(res_all)
    return CheckReport("alpha compatibility", np.asarray(T.labels, dtype=float).reshape(-1, 1), res, tol)
