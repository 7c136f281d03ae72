"""Spherical vertex links and the local red-edge constraints.

A vertex whose incident face angles are all right angles has a link on
the unit sphere made of quarter-circle arcs. The polygon angle at each
link point equals the dihedral angle of the corresponding edge, so the
red/green pattern of a vertex can be studied on the sphere alone.

Sampling works with plain Python floats; numpy overhead dominates for
3-vectors and the lemma sweep draws tens of thousands of links.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .mesh import Mesh, MeshError
from .ortho import HALF_PI, RECTILINEAR_TOL, is_rectilinear, vector_angle

TWO_PI = 2 * math.pi
# red turns drawn uniformly are kept at least this far from k*pi/2
_RED_MARGIN = 1e-3


class NonQuarterArc(MeshError):
    pass


class SamplingFailure(RuntimeError):
    pass


class Separation(enum.Enum):
    ANTIPODAL = "antipodal"
    QUARTER = "quarter"
    OTHER = "other"


class Status(enum.Enum):
    CONSISTENT = "Consistent"
    LEMMA_VIOLATION = "LemmaViolation"


Vec = tuple[float, float, float]


def _dot(a: Vec, b: Vec) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a: Vec, b: Vec) -> Vec:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _norm(a: Vec) -> float:
    return math.sqrt(_dot(a, a))


def _unit(a: Vec) -> Vec:
    n = _norm(a)
    return (a[0] / n, a[1] / n, a[2] / n)


def _scaled_sum(ca: float, a: Vec, cb: float, b: Vec) -> Vec:
    return (ca * a[0] + cb * b[0], ca * a[1] + cb * b[1], ca * a[2] + cb * b[2])


def _sep(p: Vec, q: Vec) -> float:
    cx = p[1] * q[2] - p[2] * q[1]
    cy = p[2] * q[0] - p[0] * q[2]
    cz = p[0] * q[1] - p[1] * q[0]
    return math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), p[0] * q[0] + p[1] * q[1] + p[2] * q[2])


def _chord2(p: Vec, q: Vec) -> float:
    dx, dy, dz = p[0] - q[0], p[1] - q[1], p[2] - q[2]
    return dx * dx + dy * dy + dz * dz


def separation(p, q) -> float:
    """Great-circle distance between two unit vectors, in [0, pi]."""
    return _sep(tuple(map(float, p)), tuple(map(float, q)))


def classify_separation(p, q, tol: float = RECTILINEAR_TOL) -> Separation:
    d = separation(p, q)
    if abs(d - math.pi) <= tol:
        return Separation.ANTIPODAL
    if abs(d - HALF_PI) <= tol:
        return Separation.QUARTER
    return Separation.OTHER


def _tangent(p: Vec, q: Vec) -> Vec:
    # direction at p of the great circle towards q
    return _unit(_scaled_sum(1.0, q, -_dot(p, q), p))


def _link_angles(points: Sequence[Vec]) -> list[float]:
    n = len(points)
    out = []
    for i in range(n):
        p = points[i]
        a = _tangent(p, points[(i + 1) % n])
        b = _tangent(p, points[i - 1])
        out.append(math.atan2(_dot(p, _cross(a, b)), _dot(a, b)) % TWO_PI)
    return out


def link_angles(points) -> np.ndarray:
    """Polygon angle at each point, measured on the left of the walk.

    With points in vertex-star order this side is the inside of the solid,
    so the angles coincide with the interior dihedral angles.
    """
    pts = [tuple(map(float, p)) for p in points]
    return np.array(_link_angles(pts))


@dataclass(frozen=True, eq=False)
class SphericalLink:
    points: np.ndarray
    angles: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.angles is None:
            object.__setattr__(self, "angles", link_angles(pts))

    def __len__(self) -> int:
        return len(self.points)

    def red_positions(self, tol: float = RECTILINEAR_TOL) -> list[int]:
        return [i for i, a in enumerate(self.angles) if not is_rectilinear(float(a), tol)]

    def side_separations(self) -> list[float]:
        n = len(self)
        return [separation(self.points[i], self.points[(i + 1) % n]) for i in range(n)]


def spherical_link(mesh: Mesh, v: int, tol: float = RECTILINEAR_TOL) -> SphericalLink:
    """Link of ``v``: unit edge directions in star order.

    Every face at ``v`` must have a right angle there; a face with a
    straight or oblique angle at ``v`` raises :class:`NonQuarterArc`.
    """
    star = mesh.stars[v]
    if not star or star[-1][1] == -1:
        raise NonQuarterArc(f"vertex {v}: star is not a closed cycle")
    origin = mesh.vertices[v]
    dirs = []
    for (a, b), _ in star:
        other = b if a == v else a
        d = mesh.vertices[other] - origin
        dirs.append(d / np.linalg.norm(d))
    for i, (_, f) in enumerate(star):
        ang = vector_angle(dirs[i], dirs[(i + 1) % len(dirs)])
        if abs(ang - HALF_PI) > tol:
            raise NonQuarterArc(f"vertex {v}: face {f} has angle {ang:.12g} at the vertex")
    return SphericalLink(np.array(dirs))


def is_orthogonal_path(link: SphericalLink, i: int, j: int, tol: float = RECTILINEAR_TOL) -> bool:
    """True when every angle strictly between ``i`` and ``j`` (walking forward) is rectilinear."""
    n = len(link)
    if i % n == j % n:
        raise ValueError("path endpoints must differ")
    k = (i + 1) % n
    while k != j % n:
        if not is_rectilinear(float(link.angles[k]), tol):
            return False
        k = (k + 1) % n
    return True


def red_runs(link: SphericalLink, tol: float = RECTILINEAR_TOL) -> list[tuple[int, int]]:
    """Pairs of cyclically consecutive red positions.

    The link between each pair is an orthogonal path, so their separation
    must be a multiple of pi/2.
    """
    reds = link.red_positions(tol)
    return [(reds[m], reds[(m + 1) % len(reds)]) for m in range(len(reds))]


def is_plus_shape(points, tol: float) -> bool:
    """Four points forming two antipodal pairs that are a quarter apart."""
    pts = [tuple(map(float, p)) for p in points]
    if len(pts) != 4:
        return False
    for (a, b), (c, d) in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
        if abs(_sep(pts[a], pts[b]) - math.pi) > tol or abs(_sep(pts[c], pts[d]) - math.pi) > tol:
            continue
        if all(abs(_sep(pts[x], pts[y]) - HALF_PI) <= tol for x in (a, b) for y in (c, d)):
            return True
    return False


@dataclass(frozen=True)
class LocalVerdict:
    red_count: int
    status: Status
    lemma: str | None = None
    detail: dict = field(default_factory=dict)


def local_constraint_check(link: SphericalLink, tol: float = RECTILINEAR_TOL) -> LocalVerdict:
    """Check a link against the red-edge table: 0 ok, 1 never, 2 collinear, 3 never, 4 '+', 5+ ok.

    Collinearity and the '+' shape are judged at ``10 * tol``.
    """
    reds = link.red_positions(tol)
    k = len(reds)
    loose = 10 * tol
    if k == 1:
        return LocalVerdict(k, Status.LEMMA_VIOLATION, "one-red")
    if k == 3:
        return LocalVerdict(k, Status.LEMMA_VIOLATION, "three-red")
    if k == 2:
        i, j = reds
        sep = separation(link.points[i], link.points[j])
        antipodal = abs(sep - math.pi) <= loose
        detail = {
            "antipodal": antipodal,
            "separation": sep,
            "angles": [float(link.angles[i]), float(link.angles[j])],
        }
        if not antipodal:
            return LocalVerdict(k, Status.LEMMA_VIOLATION, "two-red", detail)
        return LocalVerdict(k, Status.CONSISTENT, None, detail)
    if k == 4:
        plus = is_plus_shape(link.points[reds], loose)
        if not plus:
            return LocalVerdict(k, Status.LEMMA_VIOLATION, "four-red", {"plus_shape": False})
        return LocalVerdict(k, Status.CONSISTENT, None, {"plus_shape": True})
    return LocalVerdict(k, Status.CONSISTENT)


def _on_arc(s: Vec, a: Vec, b: Vec, eps: float) -> bool:
    return _sep(a, s) + _sep(s, b) - _sep(a, b) <= eps


def _arcs_meet(a1: Vec, a2: Vec, b1: Vec, b2: Vec, eps: float) -> bool:
    # minor arcs of length <= pi/2 stay within pi/4 of their midpoints
    if _chord2(a1, a2) <= 2.0 + 1e-9 and _chord2(b1, b2) <= 2.0 + 1e-9:
        if _dot(_scaled_sum(1.0, a1, 1.0, a2), _scaled_sum(1.0, b1, 1.0, b2)) < -eps:
            return False
    na = _unit(_cross(a1, a2))
    nb = _unit(_cross(b1, b2))
    d = _cross(na, nb)
    if _norm(d) <= eps:
        return any(_on_arc(s, a1, a2, eps) for s in (b1, b2)) or any(
            _on_arc(s, b1, b2, eps) for s in (a1, a2)
        )
    q = _unit(d)
    mq = (-q[0], -q[1], -q[2])
    return any(_on_arc(s, a1, a2, eps) and _on_arc(s, b1, b2, eps) for s in (q, mq))


def is_simple(points, eps: float = 1e-8) -> bool:
    """No repeated points and no contact between non-adjacent arcs."""
    pts = [tuple(map(float, p)) for p in points]
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            if _sep(pts[i], pts[j]) <= eps:
                return False
    if n <= 3:
        return True
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _arcs_meet(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n], eps):
                return False
    return True


def _random_unit(rng: np.random.Generator) -> Vec:
    while True:
        v = tuple(float(x) for x in rng.normal(size=3))
        n = _norm(v)
        if n > 1e-6:
            return (v[0] / n, v[1] / n, v[2] / n)


def _turn(rng: np.random.Generator, kind: str) -> float:
    if kind == "g":
        return HALF_PI * int(rng.integers(1, 4))
    while True:
        phi = float(rng.uniform(0.0, TWO_PI))
        k = round(phi / HALF_PI)
        if abs(phi - k * HALF_PI) > _RED_MARGIN:
            return phi


def _step(prev: Vec, cur: Vec, phi: float) -> Vec:
    # rotate prev about cur by phi; prev is a quarter away from cur
    return _unit(_scaled_sum(math.cos(phi), prev, math.sin(phi), _cross(cur, prev)))


def _fresh_arc_ok(pts: list[Vec], eps: float) -> bool:
    # the newest arc must avoid every earlier non-adjacent arc and point
    new = pts[-1]
    if any(_chord2(new, q) <= eps * eps for q in pts[:-1]):
        return False
    a1, a2 = pts[-2], new
    return not any(_arcs_meet(a1, a2, pts[j], pts[j + 1], eps) for j in range(len(pts) - 3))


def _draw_link(
    n: int,
    rng: np.random.Generator,
    kind_at: Callable[[int], str],
    eps: float = 1e-8,
    step_tries: int = 20,
) -> list[Vec] | None:
    p0 = _random_unit(rng)
    seed_dir = _cross(p0, _random_unit(rng))
    if _norm(seed_dir) < 1e-6:
        return None
    p1 = _unit(seed_dir)
    pts = [p0, p1]
    for i in range(1, n - 2):
        for _ in range(step_tries):
            pts.append(_step(pts[i - 1], pts[i], _turn(rng, kind_at(i))))
            if _fresh_arc_ok(pts, eps):
                break
            pts.pop()
        else:
            return None
    last = pts[-1]
    c = _cross(last, p0)
    if _norm(c) > 1e-9:
        c = _unit(c)
        flip = rng.random() < 0.5
        # try both closing points, coin-flipped order
        for sign in ((-1.0, 1.0) if flip else (1.0, -1.0)):
            cand = (sign * c[0], sign * c[1], sign * c[2])
            if is_simple(pts + [cand], eps):
                return pts + [cand]
        return None
    if _dot(last, p0) > 0:
        return None
    # last is antipodal to p0: any point on their common equator closes
    pts.append(_step(pts[-2], last, _turn(rng, kind_at(n - 2))))
    return pts


def sample_closed_link(
    n: int,
    seed: int | np.random.Generator | None = None,
    tol: float = RECTILINEAR_TOL,
    rectilinear_prob: float = 0.5,
    max_tries: int = 1000,
) -> SphericalLink:
    """Draw a simple closed link of ``n`` quarter arcs.

    Points ``p1 .. p(n-2)`` are generated one at a time on the quarter
    circle around their predecessor; the turn at each point is rectilinear
    with probability ``rectilinear_prob`` and uniform otherwise. The last
    point is the (coin-flipped) intersection of the quarter circles around
    ``p(n-2)`` and ``p0``. Each new arc is checked against the earlier
    ones as it is drawn and its turn redrawn a few times on contact, so the
    walk stays self-avoiding; draws whose closing arcs are not simple are
    rejected.
    """
    if n < 3:
        raise ValueError("a closed link needs at least three points")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def kind_at(_: int) -> str:
        return "g" if rng.random() < rectilinear_prob else "r"

    for _ in range(max_tries):
        pts = _draw_link(n, rng, kind_at)
        if pts is None or not _quarter_sides(pts, tol) or not is_simple(pts, max(10 * tol, 1e-8)):
            continue
        return SphericalLink(np.array(pts))
    raise SamplingFailure(f"no simple closed {n}-link after {max_tries} tries")


def _quarter_sides(pts: Sequence[Vec], tol: float) -> bool:
    n = len(pts)
    return all(abs(_sep(pts[i], pts[(i + 1) % n]) - HALF_PI) <= tol for i in range(n))


def realize_pattern(
    pattern: str,
    seed: int | np.random.Generator | None = None,
    tol: float = RECTILINEAR_TOL,
    max_tries: int = 1000,
) -> SphericalLink | None:
    """Search for a simple link whose red/green angles match ``pattern`` exactly.

    ``pattern`` is a cyclic string over ``r``/``g``. Turns at the sampled
    points follow the pattern (under a random cyclic offset per attempt);
    the three angles fixed by the closure step are accepted only if they
    happen to match. Returns ``None`` when the budget runs out.
    """
    pattern = pattern.lower()
    if set(pattern) - {"r", "g"} or len(pattern) < 3:
        raise ValueError(f"bad pattern {pattern!r}")
    n = len(pattern)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(max_tries):
        offset = int(rng.integers(n))
        pts = _draw_link(n, rng, lambda i: pattern[(i + offset) % n])
        if pts is None or not _quarter_sides(pts, tol) or not is_simple(pts, max(10 * tol, 1e-8)):
            continue
        colors = "".join("g" if is_rectilinear(a, tol) else "r" for a in _link_angles(pts))
        want = "".join(pattern[(i + offset) % n] for i in range(n))
        if colors != want:
            continue
        # re-index so that link position j carries pattern[j]
        pts = [pts[(j - offset) % n] for j in range(n)]
        return SphericalLink(np.array(pts))
    return None


@dataclass
class SweepResult:
    samples: int
    histogram: dict[int, Counter] = field(default_factory=dict)
    violations: list[tuple[int, str]] = field(default_factory=list)
    sampling_failures: int = 0
    two_red_antipodal: int = 0
    four_red_plus: int = 0
    runs_checked: int = 0
    run_failures: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations and not self.run_failures

    def red_count_totals(self) -> Counter:
        total: Counter = Counter()
        for c in self.histogram.values():
            total.update(c)
        return total


def lemma_sweep(
    samples: int,
    degrees: Sequence[int] = tuple(range(3, 13)),
    seed: int = 0,
    tol: float = RECTILINEAR_TOL,
    rectilinear_prob: float = 0.5,
) -> SweepResult:
    """Sample links round-robin over ``degrees`` and check every local constraint."""
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    result = SweepResult(samples)
    loose = 10 * tol
    for s in range(samples):
        n = degrees[s % len(degrees)]
        try:
            link = sample_closed_link(n, rng, tol, rectilinear_prob)
        except SamplingFailure:
            result.sampling_failures += 1
            continue
        verdict = local_constraint_check(link, tol)
        result.histogram.setdefault(n, Counter())[verdict.red_count] += 1
        if verdict.status is Status.LEMMA_VIOLATION:
            result.violations.append((s, verdict.lemma))
        elif verdict.red_count == 2:
            result.two_red_antipodal += 1
        elif verdict.red_count == 4:
            result.four_red_plus += 1
        for i, j in red_runs(link, tol):
            result.runs_checked += 1
            d = separation(link.points[i], link.points[j])
            k = round(d / HALF_PI)
            if abs(d - k * HALF_PI) > loose:
                result.run_failures += 1
    return result
