"""Anchor layout, forward range model and the area-ratio position reconstruction.

The anchor robot carries three UWB anchors on a right triangle with legs of
length ``a``::

    q3 = [0, a]
     |
    q2 = [0, 0] ---- q1 = [a, 0]

The legs q2->q1 and q2->q3 act as virtual x and y axes. Three ranges fix the
tag's distance to each axis through the area of the triangles it forms with
the anchors, and the sign of each coordinate follows from the law of cosines.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive


@dataclass(frozen=True)
class AnchorLayout:
    a: float
    q1: np.ndarray = field(init=False, repr=False)
    q2: np.ndarray = field(init=False, repr=False)
    q3: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = check_positive(self.a, "a")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "q1", np.array([a, 0.0]))
        object.__setattr__(self, "q2", np.array([0.0, 0.0]))
        object.__setattr__(self, "q3", np.array([0.0, a]))

    @property
    def anchors(self):
        """Anchor positions stacked as a (3, 2) array, rows q1, q2, q3."""
        return np.vstack([self.q1, self.q2, self.q3])

    @property
    def area(self):
        return 0.5 * self.a**2


@dataclass(frozen=True)
class RangeTriple:
    d1: float
    d2: float
    d3: float
    step: int = 0

    def __post_init__(self):
        for name in ("d1", "d2", "d3"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"range {name} must be finite and nonnegative, got {value!r}")

    def as_array(self):
        return np.array([self.d1, self.d2, self.d3], dtype=float)

    @classmethod
    def from_array(cls, d, step=0):
        d = np.asarray(d, dtype=float)
        return cls(float(d[0]), float(d[1]), float(d[2]), step)


@dataclass(frozen=True)
class ConstructedMeasurement:
    r_meas: np.ndarray
    lambda1: float
    lambda3: float
    # (x side clamped, y side clamped): the triangle (d2, d3, a) resp. (d1, d2, a)
    # violated the triangle inequality and its squared area was set to 0
    degenerate_flags: tuple = (False, False)


def anchor_positions(a):
    """Return the anchor layout for leg length ``a`` (meters)."""
    return AnchorLayout(a)


def true_ranges(p_rel, layout, step=0):
    """Noiseless distances from each anchor to the tag at relative position ``p_rel``."""
    p = np.asarray(p_rel, dtype=float)
    d = np.linalg.norm(layout.anchors - p, axis=1)
    return RangeTriple.from_array(d, step)


def ranges_to_anchors(points, layout):
    """Vectorized forward model: (n, 2) points -> (n, 3) anchor distances."""
    points = np.asarray(points, dtype=float)
    return np.linalg.norm(points[:, None, :] - layout.anchors[None, :, :], axis=-1)


def _triangle_area(s1, s2, s3):
    """Triangle area from side lengths (Kahan's stable Heron form).

    Returns ``(area, clamped)``; when the sides violate the triangle inequality
    the squared area is negative and is clamped to zero.
    """
    a, b, c = sorted((float(s1), float(s2), float(s3)), reverse=True)
    sq = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    if sq < 0:
        return 0.0, True
    return 0.25 * np.sqrt(sq), False


def _sign(x):
    return 1.0 if x >= 0 else -1.0


def construct_measurement(ranges, layout):
    """Map a range triple to a planar relative position in the anchor frame.

    Parameters
    ----------
    ranges : RangeTriple or array-like of 3 floats
        Distances from q1, q2, q3 to the tag.
    layout : AnchorLayout

    Returns
    -------
    ConstructedMeasurement
        ``r_meas = [lambda1 * a, lambda3 * a]`` where ``|lambda1|`` and
        ``|lambda3|`` are the areas of (p, q2, q3) and (p, q1, q2) relative to
        the anchor triangle.
    """
    if isinstance(ranges, RangeTriple):
        d1, d2, d3 = ranges.d1, ranges.d2, ranges.d3
    else:
        d1, d2, d3 = (float(v) for v in np.asarray(ranges, dtype=float).reshape(3))
    if min(d1, d2, d3) < 0 or not np.all(np.isfinite([d1, d2, d3])):
        raise ValueError(f"ranges must be finite and nonnegative, got {(d1, d2, d3)!r}")

    a = layout.a
    area_x, clamp_x = _triangle_area(d2, d3, a)  # distance of p from the y axis
    area_y, clamp_y = _triangle_area(d1, d2, a)  # distance of p from the x axis
    s1 = _sign(d2**2 + a**2 - d1**2)
    s3 = _sign(d2**2 + a**2 - d3**2)

    lambda1 = float(s1 * area_x / layout.area)
    lambda3 = float(s3 * area_y / layout.area)
    r_meas = np.array([lambda1 * a, lambda3 * a])
    return ConstructedMeasurement(r_meas, lambda1, lambda3, (clamp_x, clamp_y))


def construct_measurements(D, layout):
    """Row-wise :func:`construct_measurement` for an (n, 3) range table."""
    D = np.asarray(D, dtype=float)
    out = np.empty((D.shape[0], 2))
    for i, row in enumerate(D):
        out[i] = construct_measurement(row, layout).r_meas
    return out
