"""Interpolation schemes: node generation, node polynomials, admissibility.

A scheme supplies, for each n, the multiset of 2n interpolation nodes split
into finite nodes and a count at infinity, the monic node polynomial built
from the finite nodes, and a limiting node distribution of total mass 2
(finite discrete part plus an atom at infinity).
"""

from __future__ import annotations

import mpmath as mp

from .algebra import Poly, to_mpc, to_mpf
from .measure import _wrap_angle
from .potential import DiscreteMeasure

__all__ = [
    "AsymptoticDistribution",
    "InterpolationScheme",
    "ClassicalScheme",
    "CircleScheme",
    "ExplicitScheme",
    "make_scheme",
    "build_v2n",
    "admissibility_report",
    "arg_variation_on_hull",
]


class AsymptoticDistribution:
    """Limit of the normalized node counting measures; total mass 2."""

    __slots__ = ("finite", "mass_at_infinity")

    def __init__(self, finite: DiscreteMeasure | None, mass_at_infinity):
        self.finite = finite
        self.mass_at_infinity = mp.mpf(mass_at_infinity)
        total = self.mass_at_infinity + (finite.mass if finite is not None else 0)
        if abs(total - 2) > mp.mpf("1e-9"):
            raise ValueError(f"node distribution must have mass 2, got {mp.nstr(total, 10)}")


class InterpolationScheme:
    """Base interface; concrete kinds override nodes() and sigma()."""

    kind = "abstract"

    def nodes(self, n: int):
        """Finite nodes (list) and the count of nodes at infinity, 2n total."""
        raise NotImplementedError

    def v2n(self, n: int) -> Poly:
        finite, _ = self.nodes(n)
        if not finite:
            return Poly.one()
        return Poly.from_roots(finite)

    def sigma(self) -> AsymptoticDistribution:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind}


class ClassicalScheme(InterpolationScheme):
    """All interpolation at infinity; the node polynomial is 1."""

    kind = "classical"

    def nodes(self, n: int):
        return [], 2 * n

    def sigma(self) -> AsymptoticDistribution:
        return AsymptoticDistribution(None, 2)


class CircleScheme(InterpolationScheme):
    """2n equally spaced nodes on a circle; conjugate-symmetric for real center."""

    kind = "circle"

    def __init__(self, center="0", radius="3", sigma_points: int = 1024):
        self.center = to_mpc(center)
        self.radius = to_mpf(radius)
        self.sigma_points = int(sigma_points)
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")

    def _ring(self, count: int):
        # mirror the upper half so the node set is exactly conjugate-symmetric
        pts = [mp.mpc(0)] * count
        for j in range(count // 2 + 1):
            pts[j] = self.center + self.radius * mp.expjpi(2 * mp.mpf(j) / count)
        for j in range(count // 2 + 1, count):
            pts[j] = mp.conj(pts[count - j])
        return pts

    def nodes(self, n: int):
        return self._ring(2 * n), 0

    def sigma(self) -> AsymptoticDistribution:
        m = self.sigma_points
        spacing = 2 * mp.pi * self.radius / m
        finite = DiscreteMeasure(self._ring(m), [mp.mpf(2) / m] * m, [spacing] * m)
        return AsymptoticDistribution(finite, 0)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "center": str(self.center),
            "radius": str(self.radius),
        }


class ExplicitScheme(InterpolationScheme):
    """Nodes listed per n; missing balance is placed at infinity."""

    kind = "explicit"

    def __init__(self, nodes_by_n: dict):
        self.nodes_by_n = {
            int(k): [to_mpc(z) for z in v] for k, v in nodes_by_n.items()
        }

    def nodes(self, n: int):
        finite = self.nodes_by_n.get(n)
        if finite is None:
            raise ValueError(f"no nodes listed for n={n}")
        if len(finite) > 2 * n:
            raise ValueError(f"more than 2n nodes listed for n={n}")
        return list(finite), 2 * n - len(finite)

    def sigma(self) -> AsymptoticDistribution:
        n_ref = max(self.nodes_by_n)
        finite, at_inf = self.nodes(n_ref)
        meas = None
        if finite:
            meas = DiscreteMeasure(finite, [mp.mpf(1) / n_ref] * len(finite))
        return AsymptoticDistribution(meas, mp.mpf(at_inf) / n_ref)


def make_scheme(spec: dict) -> InterpolationScheme:
    kind = spec.get("kind", "classical")
    if kind == "classical":
        return ClassicalScheme()
    if kind == "circle":
        return CircleScheme(
            spec.get("center", "0"),
            spec.get("radius", "3"),
            int(spec.get("sigma_points", 1024)),
        )
    if kind == "explicit":
        return ExplicitScheme(spec["nodes"])
    raise ValueError(f"unknown scheme kind {kind!r}")


def build_v2n(scheme: InterpolationScheme, n: int) -> Poly:
    """Monic polynomial over the finite nodes of the n-th node set."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return scheme.v2n(n)


def arg_variation_on_hull(scheme, n, hull, gridN: int = 1024) -> mp.mpf:
    """Variation of the unwrapped argument of the node polynomial on the hull."""
    v = scheme.v2n(n)
    if v.degree < 1:
        return mp.mpf(0)
    a, b = to_mpf(hull[0]), to_mpf(hull[1])
    total = mp.mpf(0)
    prev = None
    for k in range(gridN):
        x = a + (b - a) * k / (gridN - 1)
        cur = mp.arg(v(x))
        if prev is not None:
            total += abs(_wrap_angle(cur - prev))
        prev = cur
    return total


def _positive_slope(ns, values, cutoff: float = 0.1, floor=None) -> bool:
    """Least-squares slope of log value vs log n, over non-negligible entries."""
    if floor is None:
        floor = mp.mpf(2) ** (-(mp.mp.prec // 4))
    pts = [
        (mp.log(n), mp.log(v))
        for n, v in zip(ns, values)
        if v > floor
    ]
    if len(pts) < 2:
        return False
    mx = mp.fsum(p[0] for p in pts) / len(pts)
    my = mp.fsum(p[1] for p in pts) / len(pts)
    num = mp.fsum((p[0] - mx) * (p[1] - my) for p in pts)
    den = mp.fsum((p[0] - mx) ** 2 for p in pts)
    if den == 0:
        return False
    return num / den > cutoff


def admissibility_report(scheme, n_range, hull, poles=(), grid_points: int = 512):
    """Numerical diagnostics for the admissibility of a scheme.

    For each n reports (a) the minimal distance of finite nodes to the hull
    of the support and to the given poles, (b) the sup of |d/dx arg v2n| on
    a hull grid, and (c) the sup over the hull of n times the imaginary part
    of the Cauchy kernel of the node counting measure. A diagnostic whose
    log-log trend against n has slope above 0.1 is flagged.
    """
    ns = sorted(set(int(n) for n in n_range))
    if not ns:
        raise ValueError("n_range must be nonempty")
    a, b = to_mpf(hull[0]), to_mpf(hull[1])
    grid = [a + (b - a) * k / (grid_points - 1) for k in range(grid_points)]
    rows = []
    for n in ns:
        finite, _ = scheme.nodes(n)
        if finite:
            dists = []
            for z in finite:
                dx = max(mp.mpf(0), a - z.real, z.real - b)
                d = mp.hypot(dx, z.imag)
                for eta in poles:
                    d = min(d, abs(z - mp.mpc(eta)))
                dists.append(d)
            min_dist = min(dists)
        else:
            min_dist = mp.inf
        v = scheme.v2n(n)
        dv = v.derivative()
        sup_darg = mp.mpf(0)
        sup_kernel = mp.mpf(0)
        for x in grid:
            if not v.is_zero() and v.degree >= 1:
                val = v(x)
                if val != 0:
                    sup_darg = max(sup_darg, abs((dv(x) / val).imag))
            if finite:
                ker = mp.fsum((1 / (x - z) for z in finite), absolute=False)
                sup_kernel = max(sup_kernel, abs(mp.mpc(ker).imag))
        rows.append(
            {
                "n": n,
                "min_node_distance": min_dist,
                "sup_darg_v2n": sup_darg,
                "sup_n_im_kernel": sup_kernel,
            }
        )
    flags = {
        "darg_growing": _positive_slope(ns, [r["sup_darg_v2n"] for r in rows]),
        "kernel_growing": _positive_slope(ns, [r["sup_n_im_kernel"] for r in rows]),
        "nodes_approach_singularities": any(
            r["min_node_distance"] < mp.mpf("1e-6") for r in rows
        ),
    }
    return {"rows": rows, "flags": flags, "admissible": not any(flags.values())}
