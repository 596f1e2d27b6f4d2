"""Reflected walk-on-spheres sampling of Brownian exit points.

A walker repeatedly jumps to a uniform point on the largest sphere that stays
inside the union of the domain and its mirror image across the nearest
insulated piece. Jumps that land in the mirror world are folded back by that
piece's involution, so the insulated boundary never absorbs paths; the walk
stops once it enters the epsilon-shell of the Dirichlet part and the exit
point is the orthogonal projection onto it.

Randomness is organized in fixed 4096-path chunks, each driven by its own
counter-based stream derived from ``(rng_seed, *key, chunk_index, round)``.
A chunk's draw sequence depends only on its own paths' state trajectory, so
paths from many chunks can be advanced together in blocks, and stragglers
consolidated across blocks, without changing any result bit: the scheduling
is pure bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry2d as g2
from .domain_model import DomainSpec2D
from .errors import GeometryError, NonConvergenceError
from .reflection2d import walk_radius_batch, walk_tables

CHUNK_PATHS = 4096
BLOCK_PATHS = 64 * CHUNK_PATHS
TAIL_MIN_ACTIVE = 2048
MAX_RESAMPLE_ROUNDS = 8
DEFAULT_EPSILON_RTOL = 1e-4
STALL_RTOL = 1e-12
GRAZE_RTOL = 1e-9

# The sphere radius is never taken below this fraction of epsilon. Without a
# floor, log-distance to a Neumann-Neumann junction is a martingale and a
# macroscopic fraction of walkers grinds the radius down to the stall
# threshold. A floored sphere may cross both walls of a junction; folding
# back across the nearest mirror (up to max_reflections times) is exact for
# straight walls meeting at right angles and O(epsilon)-local otherwise.
RADIUS_FLOOR_FRAC = 0.5


@dataclass(frozen=True)
class WalkConfig:
    """Sampler parameters. ``epsilon`` is absolute; None resolves to
    1e-4 times the domain diameter at run time."""

    epsilon: float | None = None
    max_steps: int = 100_000
    max_reflections: int = 4
    rng_seed: int = 0

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_steps < 1 or self.max_reflections < 1:
            raise ValueError("step and reflection caps must be at least 1")

    def resolve_epsilon(self, domain) -> float:
        if self.epsilon is None:
            return DEFAULT_EPSILON_RTOL * domain.diameter
        if self.epsilon >= 0.1 * domain.diameter:
            raise ValueError("epsilon must be below 0.1 * domain diameter")
        return self.epsilon


@dataclass(frozen=True)
class ExitSample:
    point: np.ndarray
    side: int
    steps: int
    reflections: int


def chunk_generator(seed: int, key: tuple = ()) -> np.random.Generator:
    """Counter-based stream for one work unit, derived from the root seed and
    a tuple of non-negative integers."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


class _Outputs:
    """Per-path result arrays for a whole batch, written as paths finish."""

    def __init__(self, n: int):
        self.xy = np.full((n, 2), np.nan)
        self.piece = np.full(n, -1, dtype=np.int64)
        self.steps = np.zeros(n, dtype=np.int64)
        self.refl = np.zeros(n, dtype=np.int64)
        self.failed = np.zeros(n, dtype=bool)


class _State:
    """Positions and counters of the paths still walking."""

    __slots__ = ("pos", "steps", "refl", "slot", "chunk")

    def __init__(self, pos, steps, refl, slot, chunk):
        self.pos, self.steps, self.refl = pos, steps, refl
        self.slot, self.chunk = slot, chunk

    @classmethod
    def fresh(cls, start, slot, chunk):
        n = len(slot)
        return cls(
            np.tile(np.asarray(start, dtype=float), (n, 1)),
            np.zeros(n, dtype=np.int64),
            np.zeros(n, dtype=np.int64),
            slot,
            chunk,
        )

    def __len__(self):
        return self.pos.shape[0]

    def keep(self, mask_or_idx):
        return _State(
            self.pos[mask_or_idx],
            self.steps[mask_or_idx],
            self.refl[mask_or_idx],
            self.slot[mask_or_idx],
            self.chunk[mask_or_idx],
        )

    @staticmethod
    def concat(a: "_State", b: "_State") -> "_State":
        return _State(
            np.concatenate([a.pos, b.pos]),
            np.concatenate([a.steps, b.steps]),
            np.concatenate([a.refl, b.refl]),
            np.concatenate([a.slot, b.slot]),
            np.concatenate([a.chunk, b.chunk]),
        )


def _chunk_groups(chunk: np.ndarray):
    """(chunk ids, group sizes) for a sorted chunk-index array."""
    if chunk.size == 0:
        return chunk, chunk
    starts = np.flatnonzero(np.r_[True, chunk[1:] != chunk[:-1]])
    sizes = np.diff(np.r_[starts, chunk.size])
    return chunk[starts], sizes


def _advance(domain, st: _State, rngs: dict, eps, max_steps, max_reflections,
             out: _Outputs, min_active: int) -> _State:
    """Advance walkers until at most ``min_active`` are still running.

    Finished and failed paths are written to ``out`` at their slots; the
    returned state holds the paths still in flight.
    """
    tables = walk_tables(domain)
    stall_tol = STALL_RTOL * domain.diameter
    graze_tol = GRAZE_RTOL * domain.diameter
    dir_rows = domain.dirichlet_rows
    neu_rows = domain.neumann_piece_ids()
    floor = RADIUS_FLOOR_FRAC * eps

    while len(st) > min_active:
        D = domain.boundary.distance_matrix(st.pos)
        Dd = D[dir_rows]
        jd = Dd.argmin(axis=0)
        dD = Dd[jd, np.arange(Dd.shape[1])]

        done = dD <= eps
        if done.any():
            sl = st.slot[done]
            pieces = dir_rows[jd[done]]
            out.xy[sl] = domain.boundary.closest_points(st.pos[done], pieces)
            out.piece[sl] = pieces
            out.steps[sl] = st.steps[done]
            out.refl[sl] = st.refl[done]
            live = ~done
            st = st.keep(live)
            if len(st) == 0:
                break
            D, dD = D[:, live], dD[live]

        overstep = st.steps >= max_steps
        if overstep.any():
            sl = st.slot[overstep]
            out.failed[sl] = True
            out.steps[sl] = st.steps[overstep]
            out.refl[sl] = st.refl[overstep]
            live = ~overstep
            st = st.keep(live)
            if len(st) == 0:
                continue
            D, dD = D[:, live], dD[live]

        radius, active = walk_radius_batch(domain, st.pos, dist_matrix=D, dirichlet_min=dD)
        np.maximum(radius, floor, out=radius)
        stalled = radius <= stall_tol
        if stalled.any():
            out.failed[st.slot[stalled]] = True
            live = ~stalled
            st = st.keep(live)
            radius, active = radius[live], active[live]
            if len(st) == 0:
                continue

        ids, sizes = _chunk_groups(st.chunk)
        theta = np.concatenate(
            [rngs[int(c)].uniform(0.0, g2.TWO_PI, s) for c, s in zip(ids, sizes)]
        )
        new = st.pos + radius[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=-1)

        # only spheres with a crossable mirror piece can leave the domain
        # (for active < 0 the radius is at most the boundary distance)
        failed_now = None
        crossers = np.flatnonzero(active >= 0)
        if crossers.size:
            out_of = crossers[~domain.contains(new[crossers])]
            if out_of.size:
                fix = out_of
                piece_for = active[fix]
                for _ in range(max_reflections):
                    if fix.size == 0:
                        break
                    for i in np.unique(piece_for):
                        grp = fix[piece_for == i]
                        new[grp] = tables.maps[int(i)].apply(new[grp])
                    st.refl[fix] += 1
                    still = ~domain.contains(new[fix])
                    fix = fix[still]
                    if fix.size:
                        # numerical slivers: fold about the nearest mirror
                        Dn = domain.boundary.distance_matrix(new[fix])[neu_rows]
                        piece_for = neu_rows[Dn.argmin(axis=0)]
                if fix.size:
                    bd = domain.boundary.min_distance(new[fix])
                    bad = fix[bd > graze_tol]
                    if bad.size:
                        out.failed[st.slot[bad]] = True
                        failed_now = bad

        st.pos = new
        st.steps += 1
        if failed_now is not None:
            keep = np.ones(len(st), dtype=bool)
            keep[failed_now] = False
            st = st.keep(keep)
    return st


def iter_chunk_blocks(n_paths: int, block_paths: int | None = None):
    """Yield (first chunk index, chunk sizes) covering n_paths."""
    if block_paths is None:
        block_paths = BLOCK_PATHS
    sizes = [CHUNK_PATHS] * (n_paths // CHUNK_PATHS)
    if n_paths % CHUNK_PATHS:
        sizes.append(n_paths % CHUNK_PATHS)
    per_block = max(1, block_paths // CHUNK_PATHS)
    for c0 in range(0, len(sizes), per_block):
        yield c0, sizes[c0:c0 + per_block]


def _run_batch(domain, start, n_paths, cfg: WalkConfig, key: tuple) -> tuple[_Outputs, int]:
    """Walk ``n_paths`` paths (chunked, straggler-consolidated, resampled)."""
    start = np.asarray(start, dtype=float)
    if not domain.contains(start):
        raise GeometryError(f"start point {start.tolist()} is not interior")
    eps = cfg.resolve_epsilon(domain)
    out = _Outputs(n_paths)
    carry = _State.fresh(start, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    rngs = {}
    offset = 0
    for c0, sizes in iter_chunk_blocks(int(n_paths)):
        n_b = int(np.sum(sizes))
        slot = np.arange(offset, offset + n_b, dtype=np.int64)
        chunk = np.repeat(np.arange(c0, c0 + len(sizes)), sizes)
        for c in range(c0, c0 + len(sizes)):
            rngs[c] = chunk_generator(cfg.rng_seed, key + (c, 0))
        st = _State.fresh(start, slot, chunk)
        st = _advance(domain, st, rngs, eps, cfg.max_steps, cfg.max_reflections,
                      out, TAIL_MIN_ACTIVE)
        carry = _State.concat(carry, st)
        if len(carry) > 4 * TAIL_MIN_ACTIVE:
            carry = _advance(domain, carry, rngs, eps, cfg.max_steps,
                             cfg.max_reflections, out, TAIL_MIN_ACTIVE)
        offset += n_b
    _advance(domain, carry, rngs, eps, cfg.max_steps, cfg.max_reflections, out, 0)

    resampled = 0
    if out.failed.any():
        chunk_of_slot = np.arange(n_paths) // CHUNK_PATHS
        for c in np.unique(chunk_of_slot[out.failed]):
            bad = np.flatnonzero(out.failed & (chunk_of_slot == c))
            rnd = 0
            while bad.size:
                rnd += 1
                if rnd > MAX_RESAMPLE_ROUNDS:
                    raise GeometryError(
                        f"{bad.size} paths kept failing after "
                        f"{MAX_RESAMPLE_ROUNDS} resampling rounds"
                    )
                resampled += bad.size
                rng = {0: chunk_generator(cfg.rng_seed, key + (int(c), rnd))}
                st = _State.fresh(start, np.arange(bad.size, dtype=np.int64),
                                  np.zeros(bad.size, dtype=np.int64))
                sub = _Outputs(bad.size)
                _advance(domain, st, rng, eps, cfg.max_steps, cfg.max_reflections, sub, 0)
                out.xy[bad] = sub.xy
                out.piece[bad] = sub.piece
                out.steps[bad] = sub.steps
                out.refl[bad] = sub.refl
                out.failed[bad] = sub.failed
                bad = bad[sub.failed]
    return out, resampled


def sample_exit_batch(domain: DomainSpec2D, start, n_paths: int,
                      cfg: WalkConfig, key: tuple = ()):
    """Sample ``n_paths`` exit points from ``start``.

    Returns ``(exit_xy, piece, side, steps, reflections, resampled)`` with one
    row/entry per path, deterministic given (cfg.rng_seed, key).
    """
    out, resampled = _run_batch(domain, start, int(n_paths), cfg, tuple(key))
    side = np.where(out.piece >= 0, domain.piece_sides[np.maximum(out.piece, 0)], -1)
    return out.xy, out.piece, side, out.steps, out.refl, resampled


def sample_exit(domain: DomainSpec2D, start, cfg: WalkConfig,
                rng: np.random.Generator | None = None) -> ExitSample:
    """Simulate a single reflected trajectory and return its exit sample."""
    start = np.asarray(start, dtype=float)
    if not domain.contains(start):
        raise GeometryError(f"start point {start.tolist()} is not interior")
    if rng is None:
        rng = chunk_generator(cfg.rng_seed)
    eps = cfg.resolve_epsilon(domain)
    out = _Outputs(1)
    st = _State.fresh(start, np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64))
    _advance(domain, st, {0: rng}, eps, cfg.max_steps, cfg.max_reflections, out, 0)
    if out.failed[0]:
        raise NonConvergenceError(
            f"walker from {start.tolist()} failed (step cap {cfg.max_steps} "
            "or stalled radius); resample with fresh randomness"
        )
    side = int(domain.piece_sides[out.piece[0]])
    return ExitSample(out.xy[0], side, int(out.steps[0]), int(out.refl[0]))
