"""Builders for the stock example domains (as domain-spec documents).

Each function returns a plain dict in the domain-spec schema so it can be
dumped to JSON, shipped with the repository, or parsed directly in tests.
"""

from __future__ import annotations

import numpy as np

from .errors import GeometryError

TWO_PI = 2.0 * np.pi


def rectangle_spec(h: float) -> dict:
    """Rectangle (0,1) x (0,h), marked so its modulus is ``h``.

    Side 1 (insulated) is the top edge, side 2 (value 0) the left edge,
    side 3 the bottom, side 4 (value 1) the right edge.
    """
    if h <= 0:
        raise GeometryError("rectangle height must be positive")
    return {
        "dimension": 2,
        "pieces": [
            {"kind": "segment", "from": [1.0, h], "to": [0.0, h], "side": 1},
            {"kind": "segment", "from": [0.0, h], "to": [0.0, 0.0], "side": 2},
            {"kind": "segment", "from": [0.0, 0.0], "to": [1.0, 0.0], "side": 3},
            {"kind": "segment", "from": [1.0, 0.0], "to": [1.0, h], "side": 4},
        ],
        "dirichlet_values": {"2": 0.0, "4": 1.0},
    }


def l_shape_spec() -> dict:
    """L-shaped hexagon with corners (0,0), (3,0), (3,1), (2,1), (2,2), (0,2).

    Marked points are (3,0), (2,1), (0,2), (0,0); the insulated side 1 is the
    two-piece run (3,0)->(3,1)->(2,1).
    """
    return {
        "dimension": 2,
        "pieces": [
            {"kind": "segment", "from": [3.0, 0.0], "to": [3.0, 1.0], "side": 1},
            {"kind": "segment", "from": [3.0, 1.0], "to": [2.0, 1.0], "side": 1},
            {"kind": "segment", "from": [2.0, 1.0], "to": [2.0, 2.0], "side": 2},
            {"kind": "segment", "from": [2.0, 2.0], "to": [0.0, 2.0], "side": 2},
            {"kind": "segment", "from": [0.0, 2.0], "to": [0.0, 0.0], "side": 3},
            {"kind": "segment", "from": [0.0, 0.0], "to": [3.0, 0.0], "side": 4},
        ],
        "dirichlet_values": {"2": 0.0, "4": 1.0},
    }


def _orthogonal_circle(theta_p: float, theta_q: float):
    """Circle through unit-circle points at the two angles, meeting the unit
    circle at right angles. Returns (center, radius) or None when the two
    points are antipodal (the orthogonal 'circle' is a diameter)."""
    P = np.array([np.cos(theta_p), np.sin(theta_p)])
    Q = np.array([np.cos(theta_q), np.sin(theta_q)])
    M = np.stack([P, Q])
    det = np.linalg.det(M)
    if abs(det) < 1e-12:
        return None
    center = np.linalg.solve(M, np.ones(2))
    radius = float(np.sqrt(center @ center - 1.0))
    return center, radius


def _arc_entry(center, radius, p_from, p_to, interior_pred, side: int) -> dict:
    """Arc piece from ``p_from`` to ``p_to`` on the given circle, choosing the
    sweep whose midpoint satisfies ``interior_pred``."""
    a_from = float(np.arctan2(p_from[1] - center[1], p_from[0] - center[0]))
    a_to = float(np.arctan2(p_to[1] - center[1], p_to[0] - center[0]))
    for ccw in (True, False):
        sweep = (a_to - a_from) % TWO_PI if ccw else -((a_from - a_to) % TWO_PI)
        mid_angle = a_from + 0.5 * sweep
        mid = center + radius * np.array([np.cos(mid_angle), np.sin(mid_angle)])
        if interior_pred(mid):
            return {
                "kind": "arc",
                "center": [float(center[0]), float(center[1])],
                "radius": float(radius),
                "from_angle": a_from,
                "to_angle": a_to,
                "ccw": ccw,
                "side": side,
            }
    raise GeometryError("neither arc orientation satisfies the interior predicate")


def _unit_arc_entry(a_from: float, a_to: float, side: int) -> dict:
    return {
        "kind": "arc",
        "center": [0.0, 0.0],
        "radius": 1.0,
        "from_angle": float(a_from),
        "to_angle": float(a_to),
        "ccw": True,
        "side": side,
    }


def _dirichlet_wall_entry(theta_p: float, theta_q: float, side: int) -> dict:
    """Piece joining two unit-circle points along the circle orthogonal to the
    unit circle (a diameter segment in the antipodal case)."""
    P = [float(np.cos(theta_p)), float(np.sin(theta_p))]
    Q = [float(np.cos(theta_q)), float(np.sin(theta_q))]
    ortho = _orthogonal_circle(theta_p, theta_q)
    if ortho is None:
        return {"kind": "segment", "from": P, "to": Q, "side": side}
    center, radius = ortho
    inside_disk = lambda m: float(np.hypot(*m)) < 1.0
    return _arc_entry(center, radius, np.array(P), np.array(Q), inside_disk, side)


def circular_quad_type_a_spec(a: float, b: float, c: float) -> dict:
    """Unit disk with two bites removed along circles orthogonal to the unit
    circle; marked points e^{ia}, e^{ib}, e^{ic}, 1 with 0 < a < b < c < 2*pi.
    The insulated sides are the unit-circle arcs a->b and c->2*pi."""
    if not (0.0 < a < b < c < TWO_PI):
        raise GeometryError("angles must satisfy 0 < a < b < c < 2*pi")
    return {
        "dimension": 2,
        "pieces": [
            _unit_arc_entry(a, b, side=1),
            _dirichlet_wall_entry(b, c, side=2),
            _unit_arc_entry(c, TWO_PI, side=3),
            _dirichlet_wall_entry(0.0, a, side=4),
        ],
        "dirichlet_values": {"2": 0.0, "4": 1.0},
    }


def circular_quad_type_b_spec(a: float, b: float, c: float) -> dict:
    """The full unit disk marked at e^{ia}, e^{ib}, e^{ic}, 1; all four sides
    are unit-circle arcs."""
    if not (0.0 < a < b < c < TWO_PI):
        raise GeometryError("angles must satisfy 0 < a < b < c < 2*pi")
    return {
        "dimension": 2,
        "pieces": [
            _unit_arc_entry(a, b, side=1),
            _unit_arc_entry(b, c, side=2),
            _unit_arc_entry(c, TWO_PI, side=3),
            _unit_arc_entry(0.0, a, side=4),
        ],
        "dirichlet_values": {"2": 0.0, "4": 1.0},
    }


# ---------------------------------------------------------------------------
# 3D shapes
# ---------------------------------------------------------------------------

def _prism_faces(polygon, z0: float, z1: float):
    """Cap and wall faces of a straight prism over a simple 2D polygon."""
    poly = [list(map(float, v)) for v in polygon]
    caps = [
        [[x, y, z0] for x, y in poly],
        [[x, y, z1] for x, y in poly],
    ]
    walls = []
    n = len(poly)
    for i in range(n):
        (x0, y0), (x1, y1) = poly[i], poly[(i + 1) % n]
        walls.append(
            [[x0, y0, z0], [x1, y1, z0], [x1, y1, z1], [x0, y0, z1]]
        )
    return caps, walls


def cube_spec() -> dict:
    """Unit cube, Dirichlet faces x=0 (value 0) and x=1 (value 1), the other
    four faces insulated. Exact solution u = x."""
    caps, walls = _prism_faces([(0, 0), (1, 0), (1, 1), (0, 1)], 0.0, 1.0)
    faces = []
    for verts in caps:  # z = 0, z = 1
        faces.append({"vertices": verts, "bc": {"type": "neumann"}})
    wall_bcs = [
        {"type": "neumann"},                  # y = 0
        {"type": "dirichlet", "value": 1.0},  # x = 1
        {"type": "neumann"},                  # y = 1
        {"type": "dirichlet", "value": 0.0},  # x = 0
    ]
    for verts, bc in zip(walls, wall_bcs):
        faces.append({"vertices": verts, "bc": bc})
    return {"dimension": 3, "faces": faces}


def l_polyhedron_spec() -> dict:
    """L-shaped prism (the L-shape cross-section extruded over z in [0,1]).

    The top face (y = 2) is Dirichlet with value 1 (hot), the rightmost face
    (x = 3) Dirichlet with value 0 (cold); every other face is insulated.
    """
    polygon = [(0, 0), (3, 0), (3, 1), (2, 1), (2, 2), (0, 2)]
    caps, walls = _prism_faces(polygon, 0.0, 1.0)
    faces = [{"vertices": v, "bc": {"type": "neumann"}} for v in caps]
    wall_bcs = [
        {"type": "neumann"},                  # y = 0
        {"type": "dirichlet", "value": 0.0},  # x = 3 (cold)
        {"type": "neumann"},                  # y = 1 notch
        {"type": "neumann"},                  # x = 2 notch
        {"type": "dirichlet", "value": 1.0},  # y = 2 (hot)
        {"type": "neumann"},                  # x = 0
    ]
    for verts, bc in zip(walls, wall_bcs):
        faces.append({"vertices": verts, "bc": bc})
    return {"dimension": 3, "faces": faces}


TABLE_ANGLE_UNIT = np.pi / 24.0


def table_triple_angles(m: int, n: int, r: int) -> tuple[float, float, float]:
    """Angles (m, n, r) * pi/24 used to index the circular-arc families."""
    if not (0 < m < n < r < 48):
        raise GeometryError("triple must satisfy 0 < m < n < r < 48")
    return (m * TABLE_ANGLE_UNIT, n * TABLE_ANGLE_UNIT, r * TABLE_ANGLE_UNIT)
