"""Lifts of piecewise-linear circle homeomorphisms with rational breakpoints
and their translation numbers."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import floor

__all__ = ["CircleLift", "translation_number"]


@dataclass(frozen=True)
class CircleLift:
    """h on [0,1] given by breakpoints (x_i, y_i) with x_0 = 0, x_last = 1,
    y strictly increasing and y_last = y_0 + 1; extended by h(x+1) = h(x)+1."""

    xs: tuple
    ys: tuple

    def __post_init__(self):
        xs = tuple(Fraction(v) for v in self.xs)
        ys = tuple(Fraction(v) for v in self.ys)
        if len(xs) != len(ys) or len(xs) < 2:
            raise ValueError("need at least two breakpoints")
        if xs[0] != 0 or xs[-1] != 1:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoint abscissae must increase strictly")
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise ValueError("lift is not strictly increasing")
        if ys[-1] != ys[0] + 1:
            raise ValueError("lift must satisfy h(1) = h(0) + 1")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_points(cls, points) -> "CircleLift":
        return cls(tuple(p[0] for p in points), tuple(p[1] for p in points))

    @classmethod
    def translation(cls, t) -> "CircleLift":
        t = Fraction(t)
        return cls((0, 1), (t, t + 1))

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        k = floor(x)
        r = x - k
        i = min(bisect_right(self.xs, r) - 1, len(self.xs) - 2)
        x0, x1 = self.xs[i], self.xs[i + 1]
        y0, y1 = self.ys[i], self.ys[i + 1]
        return y0 + (y1 - y0) * (r - x0) / (x1 - x0) + k

    def inverse_at(self, y) -> Fraction:
        y = Fraction(y)
        k = floor(y - self.ys[0])
        r = y - k
        i = min(bisect_right(self.ys, r) - 1, len(self.ys) - 2)
        x0, x1 = self.xs[i], self.xs[i + 1]
        y0, y1 = self.ys[i], self.ys[i + 1]
        return x0 + (x1 - x0) * (r - y0) / (y1 - y0) + k

    def compose(self, other: "CircleLift") -> "CircleLift":
        """self after other: x -> self(other(x))."""
        pts = set(other.xs)
        lo, hi = other.ys[0], other.ys[-1]
        for k in range(floor(lo) - 1, floor(hi) + 2):
            for x in self.xs:
                y = x + k
                if lo < y < hi:
                    pts.add(other.inverse_at(y))
        xs = sorted(p for p in pts if 0 <= p <= 1)
        ys = [self(other(x)) for x in xs]
        # drop collinear interior points
        kx, ky = [xs[0]], [ys[0]]
        for j in range(1, len(xs) - 1):
            s1 = (ys[j] - ky[-1]) / (xs[j] - kx[-1])
            s2 = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j])
            if s1 != s2:
                kx.append(xs[j])
                ky.append(ys[j])
        kx.append(xs[-1])
        ky.append(ys[-1])
        return CircleLift(tuple(kx), tuple(ky))

    def __mul__(self, other: "CircleLift") -> "CircleLift":
        return self.compose(other)

    def to_json(self) -> dict:
        return {"breakpoints": [[str(x), str(y)] for x, y in zip(self.xs, self.ys)]}

    @classmethod
    def from_json(cls, data) -> "CircleLift":
        pts = data["breakpoints"] if isinstance(data, dict) else data
        for p in pts:
            if any(isinstance(v, float) for v in p):
                raise ValueError("breakpoints must be integers or 'p/q' strings")
        return cls.from_points([(Fraction(p[0]), Fraction(p[1])) for p in pts])


def translation_number(h: CircleLift, n_max: int = 1000) -> tuple:
    """(lo, hi, exact). Exact when h^q(0) is an integer p for some q <= n_max,
    giving p/q; otherwise h^n(0)/n -+ 1/n at n = n_max."""
    if n_max < 1:
        raise ValueError("n_max must be positive")
    x = Fraction(0)
    for q in range(1, n_max + 1):
        x = h(x)
        if x.denominator == 1:
            v = x / q
            return v, v, True
    n = n_max
    return x / n - Fraction(1, n), x / n + Fraction(1, n), False
