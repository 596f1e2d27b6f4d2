"""Boundary-value-problem domains: oriented piece chains with boundary data.

A domain is a positively oriented closed chain of segments and arcs, each
carrying either a Dirichlet value or a zero-Neumann marker plus a side label
in 1..4. Side labels follow the quadrilateral convention: sides 2 and 4 are
Dirichlet (default values 0 and 1), sides 1 and 3 are insulated. Domains that
are not quadrilaterals (e.g. an all-Dirichlet disk used as a harmonic-measure
oracle) can be built directly from pieces; only the file parser and the
``Quadrilateral`` wrapper enforce the side convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import geometry2d as g2
from .errors import DomainSyntaxError, DomainValidationError

NEUMANN_SIDES = (1, 3)
DIRICHLET_SIDES = (2, 4)
DEFAULT_DIRICHLET_VALUES = {2: 0.0, 4: 1.0}

# relative tolerances, all in units of the domain diameter
CHAIN_CLOSE_RTOL = 1e-9
MIN_PIECE_RTOL = 1e-12


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet with a constant value, or zero normal derivative."""

    value: float | None = None

    @classmethod
    def dirichlet(cls, value: float) -> "BoundaryCondition":
        value = float(value)
        if not np.isfinite(value):
            raise DomainValidationError("Dirichlet value must be finite")
        return cls(value)

    @classmethod
    def neumann(cls) -> "BoundaryCondition":
        return cls(None)

    @property
    def is_dirichlet(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class BoundaryPiece:
    geometry: g2.Piece
    bc: BoundaryCondition
    side: int

    def __post_init__(self):
        if self.side not in (1, 2, 3, 4):
            raise DomainValidationError(f"side label must be 1..4, got {self.side}")


@dataclass(frozen=True, eq=False)
class DomainSpec2D:
    """Validated closed boundary chain with per-piece boundary conditions."""

    pieces: tuple
    diameter: float = field(init=False)
    bbox: np.ndarray = field(init=False)
    splitting_points: np.ndarray = field(init=False)
    boundary: g2.PieceSet = field(init=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if len(pieces) < 1:
            raise DomainValidationError("domain needs at least one piece")
        object.__setattr__(self, "pieces", pieces)

        geoms = [p.geometry for p in pieces]
        boxes = np.stack([g2.piece_bbox(p) for p in geoms])
        bbox = np.stack([boxes[:, 0].min(axis=0), boxes[:, 1].max(axis=0)])
        diameter = float(np.hypot(*(bbox[1] - bbox[0])))
        if diameter <= 0.0:
            raise DomainValidationError("domain has zero extent")
        object.__setattr__(self, "bbox", bbox)
        object.__setattr__(self, "diameter", diameter)

        for i, geom in enumerate(geoms):
            length = (
                geom.length
                if isinstance(geom, g2.Segment)
                else geom.radius * abs(geom.sweep)
            )
            if length <= MIN_PIECE_RTOL * diameter:
                raise DomainValidationError(f"piece {i} is degenerately short")

        tol = CHAIN_CLOSE_RTOL * diameter
        n = len(pieces)
        for i in range(n):
            end = geoms[i].end
            start = geoms[(i + 1) % n].start
            if np.hypot(*(end - start)) > tol:
                raise DomainValidationError(f"open chain at piece {i}")

        area = sum(g2.area_contribution(geom) for geom in geoms)
        if area <= 0.0:
            raise DomainValidationError(
                "boundary must be positively oriented (signed area > 0), "
                f"got area {area:.6g}"
            )

        splits = []
        for i in range(n):
            j = (i + 1) % n
            if not pieces[i].bc.is_dirichlet and not pieces[j].bc.is_dirichlet:
                if n == 1:
                    continue  # a single closed Neumann piece has no junction
                splits.append(geoms[j].start)
        object.__setattr__(
            self, "splitting_points", np.array(splits, dtype=float).reshape(-1, 2)
        )
        object.__setattr__(self, "boundary", g2.PieceSet(geoms))

        is_d = np.array([p.bc.is_dirichlet for p in pieces], dtype=bool)
        if not is_d.any():
            raise DomainValidationError("domain needs at least one Dirichlet piece")
        values = np.array(
            [p.bc.value if p.bc.is_dirichlet else np.nan for p in pieces]
        )
        sides = np.array([p.side for p in pieces], dtype=np.int64)
        object.__setattr__(self, "piece_is_dirichlet", is_d)
        object.__setattr__(self, "piece_values", values)
        object.__setattr__(self, "piece_sides", sides)
        object.__setattr__(self, "dirichlet_rows", np.flatnonzero(is_d))

    # -- queries ------------------------------------------------------------

    def signed_area(self) -> float:
        return float(sum(g2.area_contribution(p.geometry) for p in self.pieces))

    def contains(self, p):
        """Strict interior test; points within ~1e-12*diameter of the boundary
        may classify either way."""
        pts, single = g2._as_points(p)
        inside = self.boundary.contains(pts)
        return bool(inside[0]) if single else inside

    def dirichlet_distance(self, p):
        """(distance to the Dirichlet part, index of the nearest Dirichlet
        piece); ties resolve to the lowest piece index."""
        pts, single = g2._as_points(p)
        D = self.boundary.distance_matrix(pts)[self.dirichlet_rows]
        j = D.argmin(axis=0)
        d = D[j, np.arange(D.shape[1])]
        idx = self.dirichlet_rows[j]
        if single:
            return float(d[0]), int(idx[0])
        return d, idx

    def project_to_dirichlet(self, p):
        """Nearest point on the Dirichlet part with its side label."""
        pts, single = g2._as_points(p)
        _, idx = self.dirichlet_distance(pts)
        idx = np.atleast_1d(idx)
        proj = self.boundary.closest_points(pts, idx)
        sides = self.piece_sides[idx]
        if single:
            return proj[0], int(sides[0])
        return proj, sides

    def split_distance(self, p):
        """Distance to the nearest splitting point (inf when there are none)."""
        pts, single = g2._as_points(p)
        if len(self.splitting_points) == 0:
            d = np.full(pts.shape[0], np.inf)
        else:
            sx = self.splitting_points[:, :1]  # (k,1)
            sy = self.splitting_points[:, 1:]
            dx = pts[:, 0] - sx
            dy = pts[:, 1] - sy
            d = np.sqrt((dx * dx + dy * dy).min(axis=0))
        return float(d[0]) if single else d

    def neumann_piece_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.piece_is_dirichlet)


def contains(domain: DomainSpec2D, p):
    return domain.contains(p)


def project_to_dirichlet(domain: DomainSpec2D, p):
    return domain.project_to_dirichlet(p)


def dirichlet_value(domain: DomainSpec2D, side: int) -> float:
    """The constant Dirichlet value on a side; raises if the side is Neumann."""
    rows = np.flatnonzero(domain.piece_sides == side)
    if len(rows) == 0:
        raise DomainValidationError(f"no pieces carry side label {side}")
    values = domain.piece_values[rows]
    if np.isnan(values).any():
        raise DomainValidationError(f"side {side} is a Neumann side")
    if not np.all(values == values[0]):
        raise DomainValidationError(f"side {side} carries non-constant values")
    return float(values[0])


# ---------------------------------------------------------------------------
# Quadrilateral marking and conjugation
# ---------------------------------------------------------------------------

def _side_runs(domain: DomainSpec2D) -> dict[int, int]:
    """Map side label -> first piece index of its (cyclic) run.

    Raises unless each of 1..4 appears exactly once as a contiguous cyclic run
    and the runs occur in increasing cyclic order.
    """
    sides = domain.piece_sides
    n = len(sides)
    starts = [i for i in range(n) if sides[i] != sides[(i - 1) % n]]
    if sorted(sides[starts].tolist()) != [1, 2, 3, 4]:
        raise DomainValidationError(
            "side labels 1..4 must each form exactly one contiguous run, "
            f"found runs {sides[starts].tolist()}"
        )
    labels = [int(sides[i]) for i in starts]
    shift = labels.index(1)
    if labels[shift:] + labels[:shift] != [1, 2, 3, 4]:
        raise DomainValidationError(
            f"side runs must appear in cyclic order 1,2,3,4, found {labels}"
        )
    return {int(sides[i]): i for i in starts}


def validate_side_convention(domain: DomainSpec2D) -> None:
    """Quadrilateral convention: contiguous runs 1..4, Neumann on 1,3 and
    Dirichlet on 2,4."""
    _side_runs(domain)
    for p in domain.pieces:
        if p.side in NEUMANN_SIDES and p.bc.is_dirichlet:
            raise DomainValidationError(f"side {p.side} must be Neumann")
        if p.side in DIRICHLET_SIDES and not p.bc.is_dirichlet:
            raise DomainValidationError(f"side {p.side} must be Dirichlet")
    for side in DIRICHLET_SIDES:
        dirichlet_value(domain, side)  # checks per-side constancy


@dataclass(frozen=True, eq=False)
class Quadrilateral:
    """A domain with the four side runs marked; vertices are the run junctions
    in order (start of side 1, start of side 2, start of side 3, start of
    side 4)."""

    domain: DomainSpec2D
    vertices: np.ndarray

    @classmethod
    def from_domain(cls, domain: DomainSpec2D) -> "Quadrilateral":
        validate_side_convention(domain)
        runs = _side_runs(domain)
        verts = np.stack(
            [domain.pieces[runs[s]].geometry.start for s in (1, 2, 3, 4)]
        )
        return cls(domain, verts)


def conjugate(q: Quadrilateral) -> Quadrilateral:
    """Same geometry with side labels shifted one step (old side j becomes
    new side j-1), so the Dirichlet and Neumann roles swap and the marked
    points rotate by one."""
    new_pieces = []
    for p in q.domain.pieces:
        side = p.side - 1 if p.side > 1 else 4
        if side in DIRICHLET_SIDES:
            bc = BoundaryCondition.dirichlet(DEFAULT_DIRICHLET_VALUES[side])
        else:
            bc = BoundaryCondition.neumann()
        new_pieces.append(BoundaryPiece(p.geometry, bc, side))
    return Quadrilateral.from_domain(DomainSpec2D(tuple(new_pieces)))


# ---------------------------------------------------------------------------
# Domain-spec documents
# ---------------------------------------------------------------------------

def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise DomainSyntaxError(f"{where}: missing key {key!r}")
    return obj[key]


def _parse_piece(entry: dict, index: int) -> tuple[g2.Piece, int]:
    where = f"piece {index}"
    if not isinstance(entry, dict):
        raise DomainSyntaxError(f"{where}: expected an object")
    kind = _require(entry, "kind", where)
    side = _require(entry, "side", where)
    if not isinstance(side, int):
        raise DomainSyntaxError(f"{where}: side must be an integer")
    try:
        if kind == "segment":
            geom = g2.Segment(_require(entry, "from", where), _require(entry, "to", where))
        elif kind == "arc":
            geom = g2.Arc.from_angles(
                _require(entry, "center", where),
                _require(entry, "radius", where),
                _require(entry, "from_angle", where),
                _require(entry, "to_angle", where),
                bool(entry.get("ccw", True)),
            )
        else:
            raise DomainSyntaxError(f"{where}: unknown kind {kind!r}")
    except (TypeError, ValueError) as e:
        raise DomainSyntaxError(f"{where}: {e}") from e
    return geom, side


def parse_domain(text: str) -> DomainSpec2D:
    """Parse and validate a 2D domain-spec document (JSON)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DomainSyntaxError(
            f"line {e.lineno} column {e.colno}: {e.msg}"
        ) from e
    return domain_from_dict(doc)


def domain_from_dict(doc: dict) -> DomainSpec2D:
    if not isinstance(doc, dict):
        raise DomainSyntaxError("document root must be an object")
    if doc.get("dimension") != 2:
        raise DomainSyntaxError("document must declare \"dimension\": 2")
    entries = _require(doc, "pieces", "document")
    if not isinstance(entries, list) or not entries:
        raise DomainSyntaxError("\"pieces\" must be a non-empty array")

    values = dict(DEFAULT_DIRICHLET_VALUES)
    for key, val in doc.get("dirichlet_values", {}).items():
        try:
            side = int(key)
        except ValueError:
            raise DomainSyntaxError(f"dirichlet_values: bad side key {key!r}")
        if side not in DIRICHLET_SIDES:
            raise DomainSyntaxError(
                f"dirichlet_values: side {side} is not a Dirichlet side"
            )
        values[side] = float(val)

    pieces = []
    for i, entry in enumerate(entries):
        geom, side = _parse_piece(entry, i)
        if side in DIRICHLET_SIDES:
            bc = BoundaryCondition.dirichlet(values[side])
        else:
            bc = BoundaryCondition.neumann()
        pieces.append(BoundaryPiece(geom, bc, side))

    domain = DomainSpec2D(tuple(pieces))
    validate_side_convention(domain)
    return domain


def load_domain(path) -> DomainSpec2D:
    with open(path, "r", encoding="utf-8") as f:
        return parse_domain(f.read())


def domain_to_dict(domain: DomainSpec2D) -> dict:
    """Serialize back to the document schema (inverse of parse_domain)."""
    entries = []
    for p in domain.pieces:
        geom = p.geometry
        if isinstance(geom, g2.Segment):
            entries.append(
                {
                    "kind": "segment",
                    "from": geom.start.tolist(),
                    "to": geom.end.tolist(),
                    "side": int(p.side),
                }
            )
        else:
            entries.append(
                {
                    "kind": "arc",
                    "center": geom.center.tolist(),
                    "radius": geom.radius,
                    "from_angle": geom.angle0,
                    "to_angle": geom.angle0 + geom.sweep,
                    "ccw": bool(geom.sweep > 0),
                    "side": int(p.side),
                }
            )
    values = {
        str(side): dirichlet_value(domain, side)
        for side in DIRICHLET_SIDES
        if np.any(domain.piece_sides == side)
    }
    return {"dimension": 2, "pieces": entries, "dirichlet_values": values}
