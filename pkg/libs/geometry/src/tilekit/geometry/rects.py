import typing as t

import attr
import numpy as np


def _to_floats(value) -> t.Tuple[float, ...]:
    return tuple(float(v) for v in value)


@attr.s(frozen=True)
class Rect:
    """
    Axis aligned product of half-open intervals [lower_i, upper_i).
    """

    lower = attr.ib(converter=_to_floats)
    upper = attr.ib(converter=_to_floats)

    @upper.validator
    def _check_bounds(self, attribute, value):
        if len(value) != len(self.lower):
            raise ValueError("Parameter upper must have the same length as lower")
        if any(lo > up for lo, up in zip(self.lower, value)):
            raise ValueError(f"Rectangle bounds are inverted: {self.lower} > {value}")

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lower) + np.asarray(self.upper)) / 2

    @property
    def is_empty(self) -> bool:
        return any(lo == up for lo, up in zip(self.lower, self.upper))

    def contains_point(self, point) -> bool:
        return all(lo <= p < up for lo, p, up in zip(self.lower, point, self.upper))

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        """
        Vectorised half-open membership of points stacked along the last axis.
        """
        points = np.asarray(points, dtype=float)
        return np.all(
            (points >= np.asarray(self.lower)) & (points < np.asarray(self.upper)),
            axis=-1,
        )

    def contains(self, other: "Rect") -> bool:
        return all(
            lo <= olo and oup <= up
            for lo, up, olo, oup in zip(self.lower, self.upper, other.lower, other.upper)
        )

    def intersects(self, other: "Rect") -> bool:
        """
        True when the half-open rectangles share a point.
        """
        return all(
            max(lo, olo) < min(up, oup)
            for lo, up, olo, oup in zip(self.lower, self.upper, other.lower, other.upper)
        )

    def closures_intersect(self, other: "Rect") -> bool:
        return all(
            max(lo, olo) <= min(up, oup)
            for lo, up, olo, oup in zip(self.lower, self.upper, other.lower, other.upper)
        )

    @classmethod
    def centered(cls, center, lengths) -> "Rect":
        center = np.asarray(center, dtype=float)
        half = np.asarray(lengths, dtype=float) / 2
        return cls(center - half, center + half)
