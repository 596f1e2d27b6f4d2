"""Planar primitives for boundary chains made of line segments and circular arcs.

Pieces are immutable value objects; all queries are pure functions that accept
a single point ``(2,)`` or a batch ``(n, 2)`` and vectorize over the batch.
``PieceSet`` compiles a list of pieces into flat arrays so that per-step
distance and ray-crossing queries cost a handful of numpy calls regardless of
how many pieces the boundary has.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

TWO_PI = 2.0 * np.pi

# Fixed ray direction for point-in-domain parity tests. Any direction works
# for almost every query point; an incommensurate angle avoids hitting the
# axis-aligned edges and lattice vertices common in test domains.
_RAY_ANGLE = 0.5615764337
RAY_DIR = np.array([np.cos(_RAY_ANGLE), np.sin(_RAY_ANGLE)])


def _as_points(p) -> tuple[np.ndarray, bool]:
    """Return (points as (n,2) float array, was_single_point)."""
    a = np.asarray(p, dtype=float)
    if a.ndim == 1:
        return a.reshape(1, 2), True
    return a, False


@dataclass(frozen=True)
class Segment:
    """Directed line segment from ``start`` to ``end``."""

    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "end", np.asarray(self.end, dtype=float))
        if not (np.all(np.isfinite(self.start)) and np.all(np.isfinite(self.end))):
            raise GeometryError("segment endpoints must be finite")
        if np.allclose(self.start, self.end, rtol=0.0, atol=1e-300):
            raise GeometryError("segment endpoints coincide")

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.end - self.start)))

    def point_at(self, t):
        """Point at parameter ``t`` in [0, 1] (vectorizes over t)."""
        t = np.asarray(t, dtype=float)
        return self.start + np.multiply.outer(t, self.end - self.start)


@dataclass(frozen=True)
class Arc:
    """Directed circular arc: angle runs from ``angle0`` through ``angle0 + sweep``.

    ``sweep`` is signed (positive = counterclockwise) with 0 < |sweep| <= 2*pi.
    """

    center: np.ndarray
    radius: float
    angle0: float
    sweep: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "angle0", float(self.angle0))
        object.__setattr__(self, "sweep", float(self.sweep))
        if not np.all(np.isfinite(self.center)) or not np.isfinite(self.radius):
            raise GeometryError("arc parameters must be finite")
        if self.radius <= 0.0:
            raise GeometryError("arc radius must be positive")
        if not (0.0 < abs(self.sweep) <= TWO_PI + 1e-12):
            raise GeometryError("arc sweep must satisfy 0 < |sweep| <= 2*pi")

    @classmethod
    def from_angles(cls, center, radius, angle_start, angle_end, ccw=True) -> "Arc":
        """Build an arc from endpoint angles plus an orientation flag.

        Equal angles denote the full circle.
        """
        if ccw:
            sweep = (angle_end - angle_start) % TWO_PI
            if sweep == 0.0:
                sweep = TWO_PI
        else:
            sweep = -((angle_start - angle_end) % TWO_PI)
            if sweep == 0.0:
                sweep = -TWO_PI
        return cls(center, radius, angle_start, sweep)

    @property
    def start(self) -> np.ndarray:
        return self.point_at(0.0)

    @property
    def end(self) -> np.ndarray:
        return self.point_at(1.0)

    def point_at(self, t):
        """Point at parameter ``t`` in [0, 1] (vectorizes over t)."""
        ang = self.angle0 + np.asarray(t, dtype=float) * self.sweep
        return self.center + self.radius * np.stack(
            [np.cos(ang), np.sin(ang)], axis=-1
        )


Piece = Segment | Arc


def piece_endpoints(piece: Piece) -> tuple[np.ndarray, np.ndarray]:
    return np.array(piece.start, dtype=float), np.array(piece.end, dtype=float)


def piece_bbox(piece: Piece) -> np.ndarray:
    """Tight axis-aligned bounding box as [[xmin, ymin], [xmax, ymax]]."""
    if isinstance(piece, Segment):
        pts = np.stack([piece.start, piece.end])
    else:
        ts = [0.0, 1.0]
        # include axis-extreme angles that fall inside the sweep
        lo = piece.angle0 + min(0.0, piece.sweep)
        hi = piece.angle0 + max(0.0, piece.sweep)
        for k in range(int(np.ceil(lo / (np.pi / 2))), int(np.floor(hi / (np.pi / 2))) + 1):
            t = (k * np.pi / 2.0 - piece.angle0) / piece.sweep
            if 0.0 < t < 1.0:
                ts.append(t)
        pts = piece.point_at(np.array(ts))
    return np.stack([pts.min(axis=0), pts.max(axis=0)])


def area_contribution(piece: Piece) -> float:
    """Contribution of the piece to the chain integral (1/2) * oint(x dy - y dx)."""
    if isinstance(piece, Segment):
        a, b = piece.start, piece.end
        return 0.5 * float(a[0] * b[1] - b[0] * a[1])
    c, r = piece.center, piece.radius
    a0, a1 = piece.angle0, piece.angle0 + piece.sweep
    return 0.5 * float(
        r * c[0] * (np.sin(a1) - np.sin(a0))
        - r * c[1] * (np.cos(a1) - np.cos(a0))
        + r * r * piece.sweep
    )


def distance_to_piece(p, piece: Piece):
    """Euclidean distance from point(s) to the point set of the piece."""
    pts, single = _as_points(p)
    if isinstance(piece, Segment):
        d = _segment_distance(
            piece.start[None, :], piece.end[None, :], pts
        )[0]
    else:
        d = _arc_distance(
            piece.center[None, :],
            np.array([piece.radius]),
            np.array([piece.angle0]),
            np.array([piece.sweep]),
            pts,
        )[0]
    return float(d[0]) if single else d


def closest_point_on_piece(p, piece: Piece):
    """Nearest point of the piece to ``p`` (single point or batch)."""
    pts, single = _as_points(p)
    if isinstance(piece, Segment):
        out = _segment_closest(piece.start, piece.end, pts)
    else:
        out = _arc_closest(
            piece.center, piece.radius, piece.angle0, piece.sweep, pts
        )
    return out[0] if single else out


def uniform_unit_vector2(rng: np.random.Generator, n: int | None = None):
    """Unit vector(s) with angle uniform on [0, 2*pi)."""
    theta = rng.uniform(0.0, TWO_PI, size=n)
    v = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return v


# ---------------------------------------------------------------------------
# Vectorized kernels over stacked pieces
# ---------------------------------------------------------------------------

def _segment_distance(A, B, P):
    """Distances from points P (m,2) to segments A->B (s,2); returns (s, m)."""
    ax, ay = A[:, :1], A[:, 1:]                   # (s,1) columns
    abx, aby = B[:, :1] - ax, B[:, 1:] - ay
    inv_l2 = 1.0 / (abx * abx + aby * aby)
    px, py = P[:, 0], P[:, 1]
    apx = px - ax                                 # (s,m)
    apy = py - ay
    t = (apx * abx + apy * aby) * inv_l2
    np.clip(t, 0.0, 1.0, out=t)
    dx = apx - t * abx
    dy = apy - t * aby
    dx *= dx
    dy *= dy
    dx += dy
    return np.sqrt(dx, out=dx)


def _segment_closest(a, b, P):
    ab = b - a
    t = np.clip((P - a) @ ab / float(ab @ ab), 0.0, 1.0)
    return a + t[:, None] * ab


def _arc_angular_offset(A0, SW, phi):
    """Angular offset of ``phi`` from the arc start, measured along the sweep
    direction and reduced to [0, 2*pi). Shapes broadcast: (a,1) vs (a,m)."""
    return np.mod((phi - A0) * np.sign(SW), TWO_PI)


def _arc_window_params(A0, SW):
    """Per-arc constants for cross-product window tests: start/end radial
    directions scaled by the sweep sign, and a wide-sweep flag."""
    sgn = np.sign(SW)[:, None]
    u0 = np.stack([np.cos(A0), np.sin(A0)], axis=-1) * sgn
    a1 = A0 + SW
    u1 = np.stack([np.cos(a1), np.sin(a1)], axis=-1) * sgn
    wide = (np.abs(SW) > np.pi)[:, None]
    return u0, u1, wide


def _arc_in_window(vx, vy, u0, u1, wide, half_open: bool):
    """Whether direction (vx, vy) from the arc center falls inside the sweep.

    ``half_open`` excludes the arc's end direction (used for ray-crossing
    parity so chain junctions count once).
    """
    c0 = u0[:, :1] * vy - u0[:, 1:] * vx          # sign * cross(u0, v)
    c1 = vx * u1[:, 1:] - vy * u1[:, :1]          # sign * cross(v, u1)
    end_in = c1 > 0.0 if half_open else c1 >= 0.0
    return np.where(wide, (c0 >= 0.0) | end_in, (c0 >= 0.0) & end_in)


def _arc_distance(C, R, P, E0, E1, U0, U1, WIDE):
    """Distances from points P (m,2) to arcs (a,...); returns (a, m)."""
    cx, cy = C[:, :1], C[:, 1:]                   # (a,1) columns
    r = R[:, None]
    px, py = P[:, 0], P[:, 1]
    vx = px - cx                                  # (a,m)
    vy = py - cy
    rho = np.sqrt(vx * vx + vy * vy)
    in_window = _arc_in_window(vx, vy, U0, U1, WIDE, half_open=False)
    d0 = (px - E0[:, :1]) ** 2 + (py - E0[:, 1:]) ** 2
    d1 = (px - E1[:, :1]) ** 2 + (py - E1[:, 1:]) ** 2
    d_end = np.sqrt(np.minimum(d0, d1))
    return np.where(in_window, np.abs(rho - r), d_end)


def _arc_closest(c, r, a0, sw, P):
    V = P - c
    rho = np.hypot(V[:, 0], V[:, 1])
    phi = np.arctan2(V[:, 1], V[:, 0])
    off = _arc_angular_offset(a0, sw, phi)
    in_window = off <= abs(sw)
    safe = np.maximum(rho, 1e-300)
    radial = c + r * V / safe[:, None]
    # fallback direction for a query at the exact center
    radial[rho == 0.0] = c + r * np.array([np.cos(a0), np.sin(a0)])
    e0 = c + r * np.array([np.cos(a0), np.sin(a0)])
    e1 = c + r * np.array([np.cos(a0 + sw), np.sin(a0 + sw)])
    nearer0 = np.hypot(*(P - e0).T) <= np.hypot(*(P - e1).T)
    ends = np.where(nearer0[:, None], e0[None, :], e1[None, :])
    return np.where(in_window[:, None], radial, ends)


def _segment_crossings(A, B, P, d):
    """Ray-crossing counts of segments for rays P + t*d, t > 0; returns (m,) ints.

    Segments are half-open in chain direction (start included, end excluded)
    so shared junctions are counted exactly once.
    """
    AB = B - A                                    # (s,2)
    denom = d[0] * AB[:, 1] - d[1] * AB[:, 0]     # cross(d, AB), (s,)
    AP = A[:, None, :] - P[None, :, :]            # (s,m,2)
    cross_ap_ab = AP[:, :, 0] * AB[:, 1, None] - AP[:, :, 1] * AB[:, 0, None]
    cross_ap_d = AP[:, :, 0] * d[1] - AP[:, :, 1] * d[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross_ap_ab / denom[:, None]
        s = cross_ap_d / denom[:, None]
    hit = (np.abs(denom)[:, None] > 1e-300) & (t > 0.0) & (s >= 0.0) & (s < 1.0)
    return hit.sum(axis=0)


def _arc_crossings(C, R, P, U0, U1, WIDE, d):
    """Ray-crossing counts of arcs for rays P + t*d, t > 0; returns (m,) ints."""
    cx, cy = C[:, :1], C[:, 1:]                   # (a,1)
    px, py = P[:, 0], P[:, 1]
    ocx = px - cx                                 # (a,m)
    ocy = py - cy
    b = ocx * d[0] + ocy * d[1]
    cc = ocx * ocx + ocy * ocy - (R * R)[:, None]
    disc = b * b - cc
    ok = disc >= 0.0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    total = np.zeros(P.shape[0], dtype=np.int64)
    for sign in (-1.0, 1.0):
        t = sq * sign - b
        hit = ok & (t > 0.0)
        vx = ocx + t * d[0]                       # hit point minus center
        vy = ocy + t * d[1]
        inside = _arc_in_window(vx, vy, U0, U1, WIDE, half_open=True)
        total += (hit & inside).sum(axis=0)
    return total


@dataclass
class PieceSet:
    """A list of pieces compiled to flat arrays for batched queries.

    Piece order is preserved: row ``i`` of every per-piece result refers to
    ``pieces[i]``.
    """

    pieces: list
    seg_rows: np.ndarray = field(init=False)
    arc_rows: np.ndarray = field(init=False)

    def __post_init__(self):
        seg_rows, arc_rows = [], []
        seg_a, seg_b = [], []
        arc_c, arc_r, arc_a0, arc_sw = [], [], [], []
        for i, piece in enumerate(self.pieces):
            if isinstance(piece, Segment):
                seg_rows.append(i)
                seg_a.append(piece.start)
                seg_b.append(piece.end)
            elif isinstance(piece, Arc):
                arc_rows.append(i)
                arc_c.append(piece.center)
                arc_r.append(piece.radius)
                arc_a0.append(piece.angle0)
                arc_sw.append(piece.sweep)
            else:
                raise GeometryError(f"unsupported piece type {type(piece)!r}")
        self.seg_rows = np.array(seg_rows, dtype=np.int64)
        self.arc_rows = np.array(arc_rows, dtype=np.int64)
        self._seg_a = np.array(seg_a, dtype=float).reshape(-1, 2)
        self._seg_b = np.array(seg_b, dtype=float).reshape(-1, 2)
        self._arc_c = np.array(arc_c, dtype=float).reshape(-1, 2)
        self._arc_r = np.array(arc_r, dtype=float)
        self._arc_a0 = np.array(arc_a0, dtype=float)
        self._arc_sw = np.array(arc_sw, dtype=float)
        a1 = self._arc_a0 + self._arc_sw
        self._arc_e0 = self._arc_c + self._arc_r[:, None] * np.stack(
            [np.cos(self._arc_a0), np.sin(self._arc_a0)], axis=-1
        )
        self._arc_e1 = self._arc_c + self._arc_r[:, None] * np.stack(
            [np.cos(a1), np.sin(a1)], axis=-1
        )
        self._arc_u0, self._arc_u1, self._arc_wide = _arc_window_params(
            self._arc_a0, self._arc_sw
        )

    def __len__(self) -> int:
        return len(self.pieces)

    def distance_matrix(self, P) -> np.ndarray:
        """Distances (n_pieces, m) from each piece to each query point."""
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        out = np.empty((len(self.pieces), P.shape[0]))
        if len(self.seg_rows):
            out[self.seg_rows] = _segment_distance(self._seg_a, self._seg_b, P)
        if len(self.arc_rows):
            out[self.arc_rows] = _arc_distance(
                self._arc_c, self._arc_r, self._arc_a0, self._arc_sw, P,
                self._arc_e0, self._arc_e1,
            )
        return out

    def min_distance(self, P) -> np.ndarray:
        if not self.pieces:
            return np.full(np.asarray(P).reshape(-1, 2).shape[0], np.inf)
        return self.distance_matrix(P).min(axis=0)

    def crossing_counts(self, P, direction=RAY_DIR) -> np.ndarray:
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        total = np.zeros(P.shape[0], dtype=np.int64)
        if len(self.seg_rows):
            total += _segment_crossings(self._seg_a, self._seg_b, P, direction)
        if len(self.arc_rows):
            total += _arc_crossings(
                self._arc_c, self._arc_r, self._arc_a0, self._arc_sw, P, direction
            )
        return total

    def contains(self, P, direction=RAY_DIR) -> np.ndarray:
        """Parity test: odd crossing count = inside the closed chain."""
        return (self.crossing_counts(P, direction) % 2).astype(bool)

    def closest_points(self, P, piece_idx) -> np.ndarray:
        """For each query point, the nearest point on the piece named by
        ``piece_idx`` (one piece index per query point)."""
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        piece_idx = np.asarray(piece_idx, dtype=np.int64)
        out = np.empty_like(P)
        for i in np.unique(piece_idx):
            sel = piece_idx == i
            out[sel] = closest_point_on_piece(P[sel], self.pieces[i])
        return out

    def bbox(self) -> np.ndarray:
        boxes = np.stack([piece_bbox(p) for p in self.pieces])
        return np.stack([boxes[:, 0].min(axis=0), boxes[:, 1].max(axis=0)])
