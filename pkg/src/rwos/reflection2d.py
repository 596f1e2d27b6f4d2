"""Mirror maps for insulated boundary pieces and the walk-radius rule.

Each insulated (zero-Neumann) piece owns an anti-conformal involution: a line
reflection for segments, a circle inversion for arcs. The sphere radius at a
point is limited by every obstacle the walker must not jump across: the
Dirichlet part, junction points of adjoining Neumann pieces, every *other*
Neumann piece, and the mirror image of the rest of the boundary under the
nearest Neumann piece's map. Only the nearest piece's image set is used; when
several Neumann arcs lie on one circle the full union of image sets would
contain the crossable piece itself and freeze the walker.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry2d as g2
from .domain_model import DomainSpec2D
from .errors import GeometryError, SingularityError


@dataclass(frozen=True)
class LineReflection:
    point: np.ndarray
    direction: np.ndarray  # unit vector along the mirror line

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        d = np.asarray(self.direction, dtype=float)
        n = np.hypot(*d)
        if n == 0.0:
            raise GeometryError("mirror line needs a nonzero direction")
        object.__setattr__(self, "direction", d / n)

    def apply(self, p):
        pts, single = g2._as_points(p)
        rel = pts - self.point
        along = rel @ self.direction
        out = self.point + 2.0 * along[:, None] * self.direction - rel
        return out[0] if single else out


@dataclass(frozen=True)
class CircleInversion:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0.0:
            raise GeometryError("inversion radius must be positive")

    def apply(self, p):
        pts, single = g2._as_points(p)
        rel = pts - self.center
        rho2 = np.einsum("ij,ij->i", rel, rel)
        if np.any(rho2 < (1e-14 * self.radius) ** 2):
            raise SingularityError("inversion evaluated at its center")
        out = self.center + (self.radius**2 / rho2)[:, None] * rel
        return out[0] if single else out


ReflectionMap = LineReflection | CircleInversion


def apply(reflection: ReflectionMap, p):
    return reflection.apply(p)


def reflection_for(piece: g2.Piece) -> ReflectionMap:
    """The involution fixing the piece pointwise: reflection in the segment's
    supporting line, or inversion in the arc's full circle."""
    if isinstance(piece, g2.Segment):
        return LineReflection(piece.start, piece.end - piece.start)
    return CircleInversion(piece.center, piece.radius)


def _circle_through(p1, p2, p3):
    """Center and radius of the circle through three points, or None if they
    are (numerically) collinear."""
    A = 2.0 * np.stack([p2 - p1, p3 - p1])
    b = np.array([p2 @ p2 - p1 @ p1, p3 @ p3 - p1 @ p1])
    scale = max(np.abs(A).max(), 1e-300)
    if abs(np.linalg.det(A)) < 1e-12 * scale * scale:
        return None
    c = np.linalg.solve(A, b)
    return c, float(np.hypot(*(p1 - c)))


def _arc_from_points(center, radius, p_start, p_mid, p_end) -> g2.Arc:
    """Directed arc from p_start to p_end on the given circle, passing p_mid."""
    a0 = float(np.arctan2(*(p_start - center)[::-1]))
    a_mid = float(np.arctan2(*(p_mid - center)[::-1]))
    a_end = float(np.arctan2(*(p_end - center)[::-1]))
    off_mid = (a_mid - a0) % g2.TWO_PI
    off_end = (a_end - a0) % g2.TWO_PI
    sweep = off_end if off_mid <= off_end else off_end - g2.TWO_PI
    return g2.Arc(center, radius, a0, sweep)


def image_of_piece(piece: g2.Piece, reflection: ReflectionMap) -> g2.Piece:
    """Exact image of a piece; mirrors preserve the segment/arc classes and
    inversions map generalized circles to generalized circles."""
    if isinstance(reflection, LineReflection):
        if isinstance(piece, g2.Segment):
            return g2.Segment(reflection.apply(piece.start), reflection.apply(piece.end))
        alpha = float(np.arctan2(reflection.direction[1], reflection.direction[0]))
        return g2.Arc(
            reflection.apply(piece.center),
            piece.radius,
            2.0 * alpha - piece.angle0,
            -piece.sweep,
        )

    m, R = reflection.center, reflection.radius
    if g2.distance_to_piece(m, piece) < 1e-12 * max(R, 1.0):
        raise GeometryError(
            f"piece {piece!r} passes through the inversion center {m.tolist()}"
        )
    start, end = g2.piece_endpoints(piece)
    mid = piece.point_at(0.5)
    q_start, q_mid, q_end = (reflection.apply(q) for q in (start, mid, end))
    circ = _circle_through(q_start, q_mid, q_end)
    if circ is None:
        # generalized circle through the inversion center: image is straight
        return g2.Segment(q_start, q_end)
    center, radius = circ
    return _arc_from_points(center, radius, q_start, q_mid, q_end)


# ---------------------------------------------------------------------------
# Walk radius
# ---------------------------------------------------------------------------

def _signed_range_to_line(piece: g2.Piece, point, direction):
    """Range of the signed distance from the piece to the oriented line
    (positive on the left of ``direction``)."""
    nx, ny = -direction[1], direction[0]

    def signed(p):
        return float((p[0] - point[0]) * nx + (p[1] - point[1]) * ny)

    if isinstance(piece, g2.Segment):
        sa, sb = signed(piece.start), signed(piece.end)
        return min(sa, sb), max(sa, sb)
    h = signed(piece.center)
    return h - piece.radius, h + piece.radius


def _range_to_center(piece: g2.Piece, center):
    """Range of the distance from the piece to a point (full-circle bound for
    arcs, which is conservative)."""
    if isinstance(piece, g2.Segment):
        lo = g2.distance_to_piece(np.asarray(center, dtype=float), piece)
        hi = max(np.hypot(*(piece.start - center)), np.hypot(*(piece.end - center)))
        return float(lo), float(hi)
    d = float(np.hypot(*(piece.center - np.asarray(center, dtype=float))))
    return abs(d - piece.radius), d + piece.radius


def _image_prunable(image: g2.Piece, mirror: g2.Piece, tol: float) -> bool:
    """True when the image piece never extends strictly beyond the mirror
    into the far (non-domain) side.

    Only far-side material can bound the mirror half of the region a sphere
    may occupy; images on the domain side sit inside the domain itself and
    would act as phantom interior obstacles (e.g. the image of a wall
    adjacent to the mirror piece). Points where such an image touches the
    mirror are junctions of the real boundary and are already counted through
    the real obstacle distances. The domain side is known from orientation:
    the interior lies to the left of every positively oriented piece.
    """
    if isinstance(mirror, g2.Segment):
        lo, hi = _signed_range_to_line(image, mirror.start, mirror.end - mirror.start)
        return lo >= -tol  # never reaches the right (exterior) side
    lo, hi = _range_to_center(image, mirror.center)
    if mirror.sweep > 0:  # interior locally inside the circle, far side outside
        return hi <= mirror.radius + tol
    return lo >= mirror.radius - tol


@dataclass
class WalkTables:
    """Per-domain precomputation, one entry per Neumann piece: its reflection
    map, the image of the rest of the boundary under that map (images falling
    strictly inside the domain are pruned), and a combined obstacle set (the
    other Neumann pieces plus the kept images) used by the sampler."""

    domain: DomainSpec2D
    maps: dict
    reflected: dict  # piece id -> PieceSet of images of all other pieces
    obstacles: dict  # piece id -> PieceSet(other Neumann pieces + images)

    @classmethod
    def build(cls, domain: DomainSpec2D) -> "WalkTables":
        maps, reflected, obstacles = {}, {}, {}
        tol = 1e-12 * domain.diameter
        neu = domain.neumann_piece_ids()
        for i in neu:
            piece = domain.pieces[i].geometry
            refl = reflection_for(piece)
            maps[int(i)] = refl
            images = []
            for j in range(len(domain.pieces)):
                if j == i:
                    continue
                img = image_of_piece(domain.pieces[j].geometry, refl)
                if not _image_prunable(img, piece, tol):
                    images.append(img)
            reflected[int(i)] = g2.PieceSet(images)
            others = [domain.pieces[j].geometry for j in neu if j != i]
            obstacles[int(i)] = g2.PieceSet(others + images)
        return cls(domain, maps, reflected, obstacles)


def walk_tables(domain: DomainSpec2D) -> WalkTables:
    """Build (and cache on the domain) the reflection tables."""
    tables = getattr(domain, "_walk_tables", None)
    if tables is None:
        tables = WalkTables.build(domain)
        object.__setattr__(domain, "_walk_tables", tables)
    return tables


def walk_radius_batch(domain: DomainSpec2D, p, dist_matrix=None, dirichlet_min=None):
    """Vectorized walk radius.

    Returns ``(radius, active)`` where ``active[k]`` is the Neumann piece
    whose mirror the k-th sphere may cross, or -1 when the nearest piece is
    Dirichlet (the sphere then stays inside the closure of the domain).
    ``dist_matrix`` / ``dirichlet_min`` accept precomputed piece distances.
    """
    P = np.asarray(p, dtype=float).reshape(-1, 2)
    tables = walk_tables(domain)
    D = domain.boundary.distance_matrix(P) if dist_matrix is None else dist_matrix
    jstar = D.argmin(axis=0)
    radius = D[jstar, np.arange(D.shape[1])]
    active = np.where(domain.piece_is_dirichlet[jstar], -1, jstar)

    neumann_active = np.flatnonzero(active >= 0)
    if len(neumann_active):
        if dirichlet_min is None:
            dirichlet_min = D[domain.dirichlet_rows].min(axis=0)
        have_splits = len(domain.splitting_points) > 0
        dS = domain.split_distance(P) if have_splits else None
        for i in np.unique(active[neumann_active]):
            sel = np.flatnonzero(active == i)
            r = dirichlet_min[sel].copy()
            if have_splits:
                np.minimum(r, dS[sel], out=r)
            obstacles = tables.obstacles[int(i)]
            if len(obstacles):
                np.minimum(r, obstacles.min_distance(P[sel]), out=r)
            radius[sel] = r
    return radius, active


def walk_radius(domain: DomainSpec2D, p):
    """Walk radius at a single point: ``(radius, active piece id or None)``."""
    radius, active = walk_radius_batch(domain, np.asarray(p, dtype=float))
    a = int(active[0])
    return float(radius[0]), (None if a < 0 else a)
