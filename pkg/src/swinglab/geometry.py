"""Pure 2-D geometric primitives for swing metrics.

Coordinate and sign conventions (used everywhere downstream):

- Image coordinates: +x rightward, +y DOWNWARD. "Higher in real-world terms"
  therefore means smaller y.
- For a right-handed golfer filmed face-on, the golfer's left-side (lead)
  joints sit at larger x and the target line points toward +x.
- ``vertex_angle`` is the unsigned interior angle in [0, 180] degrees.
- ``angle_from_horizontal`` is a line property in (-90, 90] degrees, signed by
  slope in real-world terms: positive when the segment rises toward +x, i.e.
  when its higher endpoint has the larger x. For a face-on shoulder line this
  is positive exactly when the lead (left) shoulder is the higher one. An
  exactly vertical segment maps to +90.
- ``angle_from_vertical`` is the lean of a segment off the vertical axis in
  (-90, 90] degrees: positive when the upper endpoint is displaced toward +x
  (the target side) relative to the lower one. An exactly horizontal segment
  maps to +90.

Both signed angles negate under reflection x -> -x, which is what makes the
mirror-symmetry properties of the metrics layer hold exactly.

All functions are stateless and safe to call concurrently.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .errors import DegenerateAngle, DegenerateSegment


class Point2(NamedTuple):
    """A point in normalized image coordinates (+y down)."""

    x: float
    y: float


def midpoint(p: Point2, q: Point2) -> Point2:
    return Point2((p.x + q.x) / 2.0, (p.y + q.y) / 2.0)


def distance(p: Point2, q: Point2) -> float:
    return math.hypot(q.x - p.x, q.y - p.y)


def vertex_angle(a: Point2, b: Point2, c: Point2) -> float:
    """Interior angle at vertex b between rays b->a and b->c, in degrees.

    Symmetric in (a, c). Raises DegenerateAngle when either ray has zero
    length. Computed with atan2(|cross|, dot), which stays accurate near 0
    and 180 degrees.
    """
    ux, uy = a.x - b.x, a.y - b.y
    vx, vy = c.x - b.x, c.y - b.y
    if (ux == 0.0 and uy == 0.0) or (vx == 0.0 and vy == 0.0):
        raise DegenerateAngle(f"zero-length ray at vertex ({b.x}, {b.y})")
    cross = ux * vy - uy * vx
    dot = ux * vx + uy * vy
    return math.degrees(math.atan2(abs(cross), dot))


def _fold_to_half_turn(deg: float) -> float:
    """Fold an angle in degrees into the line range (-90, 90]."""
    if deg > 90.0:
        return deg - 180.0
    if deg <= -90.0:
        return deg + 180.0
    return deg


def angle_from_horizontal(p: Point2, q: Point2) -> float:
    """Signed angle of segment pq against the horizontal axis, in (-90, 90].

    Positive when the segment rises toward +x (its higher endpoint has the
    larger x); symmetric in (p, q); invariant under translation and positive
    scaling; negates under x-reflection.
    """
    if p.x == q.x and p.y == q.y:
        raise DegenerateSegment("coincident endpoints")
    run = q.x - p.x
    rise = p.y - q.y  # +y is down, so real-world rise is the negated y delta
    return _fold_to_half_turn(math.degrees(math.atan2(rise, run)))


def angle_from_vertical(p: Point2, q: Point2) -> float:
    """Signed lean of segment pq off the vertical axis, in (-90, 90].

    Positive when the upper endpoint leans toward +x relative to the lower
    one; symmetric in (p, q); negates under x-reflection. An exactly
    horizontal segment maps to +90.
    """
    if p.x == q.x and p.y == q.y:
        raise DegenerateSegment("coincident endpoints")
    if p.y == q.y:
        return 90.0
    upper, lower = (p, q) if p.y < q.y else (q, p)
    lean = upper.x - lower.x
    extent = lower.y - upper.y  # > 0 by construction
    return math.degrees(math.atan2(lean, extent))
