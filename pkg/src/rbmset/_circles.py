"""Angular interval arithmetic on circles.

Sets of angles are kept as sorted lists of disjoint ``(lo, hi)`` pairs inside
``[0, 2*pi]``; an arc crossing angle 0 is stored as two pieces and re-joined
by :func:`to_arcs`.
"""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi
FULL = [(0.0, TWO_PI)]


def normalize(lo: float, hi: float) -> list[tuple[float, float]]:
    """Angular interval from ``lo`` counter-clockwise to ``hi`` (``hi >= lo``)."""
    span = hi - lo
    if span >= TWO_PI:
        return list(FULL)
    if span <= 0.0:
        return []
    lo = lo % TWO_PI
    hi = lo + span
    if hi <= TWO_PI:
        return [(lo, hi)]
    return [(0.0, hi - TWO_PI), (lo, TWO_PI)]


def union(pieces) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for lo, hi in sorted(pieces):
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def intersect(a, b) -> list[tuple[float, float]]:
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi > lo:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def complement(a) -> list[tuple[float, float]]:
    out = []
    prev = 0.0
    for lo, hi in a:
        if lo > prev:
            out.append((prev, lo))
        prev = max(prev, hi)
    if prev < TWO_PI:
        out.append((prev, TWO_PI))
    return out


def subtract(a, b) -> list[tuple[float, float]]:
    return intersect(a, complement(union(b)))


def to_arcs(pieces, min_span: float = 0.0) -> list[tuple[float, float]]:
    """Join pieces that meet across angle 0 and return ``(start, span)`` arcs.
    A full circle is returned as two half arcs."""
    pieces = [p for p in pieces if p[1] - p[0] > 0.0]
    if not pieces:
        return []
    if len(pieces) == 1 and pieces[0][0] <= 0.0 and pieces[0][1] >= TWO_PI:
        return [(0.0, math.pi), (math.pi, math.pi)]
    arcs = [(lo, hi - lo) for lo, hi in pieces]
    if len(pieces) > 1 and pieces[0][0] <= 0.0 and pieces[-1][1] >= TWO_PI:
        first = arcs.pop(0)
        lo, span = arcs.pop()
        arcs.append((lo, span + first[1]))
    return [a for a in arcs if a[1] > min_span]


def halfplane_on_circle(cx, cy, r, px, py, ex, ey) -> list[tuple[float, float]]:
    """Angles for which ``(cx, cy) + r u(theta)`` lies left of the directed
    line through ``p`` with direction ``e`` (closed half-plane)."""
    el = math.hypot(ex, ey)
    # cross(e, c - p) + r |e| sin(theta - phi_e) >= 0
    kappa = -(ex * (cy - py) - ey * (cx - px)) / (r * el)
    if kappa <= -1.0:
        return list(FULL)
    if kappa >= 1.0:
        return []
    mid = math.atan2(ey, ex) + 0.5 * math.pi
    half = math.acos(kappa)
    return normalize(mid - half, mid + half)


def disk_cover_on_circle(cx, cy, ox, oy, r) -> list[tuple[float, float]]:
    """Angles of the circle of radius ``r`` around ``c`` that fall inside the
    open disk of the same radius around ``o``."""
    d = math.hypot(ox - cx, oy - cy)
    if d >= 2.0 * r or d == 0.0:
        return [] if d > 0.0 else list(FULL)
    mid = math.atan2(oy - cy, ox - cx)
    half = math.acos(d / (2.0 * r))
    return normalize(mid - half, mid + half)


def segment_disk_cover(px, py, qx, qy, cx, cy, r):
    """Parameter interval ``(s0, s1)`` of the segment ``p + s (q - p)``,
    ``0 <= s <= 1``, lying inside the open disk; ``None`` if empty."""
    ex, ey = qx - px, qy - py
    fx, fy = px - cx, py - cy
    a = ex * ex + ey * ey
    b = ex * fx + ey * fy
    c = fx * fx + fy * fy - r * r
    disc = b * b - a * c
    if disc <= 0.0:
        return None
    sq = math.sqrt(disc)
    # numerically stable roots
    if b >= 0:
        t = -(b + sq)
    else:
        t = -b + sq
    s0, s1 = sorted((t / a, c / t if t != 0.0 else t / a))
    lo, hi = max(s0, 0.0), min(s1, 1.0)
    if hi <= lo:
        return None
    return lo, hi


def merge_line(intervals):
    """Union of parameter intervals on a line."""
    return union(intervals)


def line_complement(intervals, lo: float = 0.0, hi: float = 1.0):
    out = []
    prev = lo
    for a, b in union(intervals):
        if a > prev:
            out.append((prev, a))
        prev = max(prev, b)
    if prev < hi:
        out.append((prev, hi))
    return out
