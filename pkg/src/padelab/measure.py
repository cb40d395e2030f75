"""Complex measures on unions of real intervals, and rational polar parts.

A measure is a list of components, each a closed interval carrying a complex
density expression in the real variable ``t``. A component flagged
``endpoint_singular`` additionally carries the implicit positive factor
``1/sqrt((t-a)(b-t))``; that is how inverse-square-root (arcsine-type)
endpoint behavior is expressed, since the density grammar itself has no
fractional powers. Such components are integrated after the substitution
``t = midpoint + halfwidth*cos(theta)``, which removes the singularity
exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp

from . import algebra
from .algebra import Poly, to_mpc, to_mpf
from .errors import (
    PointAtPole,
    PointOnSupport,
    QuadFailure,
    UnwrapFailure,
)

__all__ = [
    "DensityExpr",
    "MeasureComponent",
    "ComplexMeasure",
    "RationalPart",
    "quad_integrate",
    "cauchy_transform",
    "eval_F",
    "eval_F_derivative",
    "moments",
    "argument_variation",
]


# ---------------------------------------------------------------------------
# density expressions
# ---------------------------------------------------------------------------


class _Node:
    __slots__ = ()


class _Num(_Node):
    __slots__ = ("frac", "_prec", "_val")

    def __init__(self, frac: Fraction):
        self.frac = frac
        self._prec = None
        self._val = None

    def ev(self, t):
        if self._prec != mp.mp.prec:
            self._val = algebra.fraction_to_mpf(self.frac)
            self._prec = mp.mp.prec
        return self._val


class _Name(_Node):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def ev(self, t):
        if self.name == "t":
            return t
        if self.name in ("i", "j"):
            return mp.mpc(0, 1)
        if self.name == "pi":
            return mp.pi
        if self.name == "e":
            return mp.e
        raise ValueError(f"unknown symbol {self.name!r}")


class _Bin(_Node):
    __slots__ = ("op", "left", "right")

    def __init__(self, op, left, right):
        self.op = op
        self.left = left
        self.right = right

    def ev(self, t):
        a = self.left.ev(t)
        b = self.right.ev(t)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b


class _Pow(_Node):
    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent: int):
        self.base = base
        self.exponent = exponent

    def ev(self, t):
        return self.base.ev(t) ** self.exponent


class _Neg(_Node):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg

    def ev(self, t):
        return -self.arg.ev(t)


class _Fun(_Node):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        self.name = name
        self.arg = arg

    def ev(self, t):
        x = self.arg.ev(t)
        if self.name == "exp":
            return mp.exp(x)
        return mp.log(x)


class _Parser:
    """Recursive-descent parser for +, -, *, /, integer ** / ^, exp, log."""

    def __init__(self, text: str):
        self.toks = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text):
        toks = []
        i, n = 0, len(text)
        while i < n:
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit() or ch == ".":
                j = i
                while j < n and (text[j].isdigit() or text[j] == "."):
                    j += 1
                if j < n and text[j] in "eE" and j + 1 < n and (
                    text[j + 1].isdigit() or text[j + 1] in "+-"
                ):
                    k = j + 2 if text[j + 1] in "+-" else j + 1
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
                toks.append(("num", text[i:j]))
                i = j
            elif ch.isalpha():
                j = i
                while j < n and text[j].isalnum():
                    j += 1
                toks.append(("name", text[i:j]))
                i = j
            elif text.startswith("**", i):
                toks.append(("op", "**"))
                i += 2
            elif ch in "+-*/()^":
                toks.append(("op", "^" if ch == "^" else ch))
                i += 1
            else:
                raise ValueError(f"bad character {ch!r} in expression")
        toks.append(("end", ""))
        return toks

    def _peek(self):
        return self.toks[self.pos]

    def _take(self, kind=None, value=None):
        tok = self.toks[self.pos]
        if kind and tok[0] != kind or (value is not None and tok[1] != value):
            raise ValueError(f"unexpected token {tok} in expression")
        self.pos += 1
        return tok

    def parse(self):
        node = self._expr()
        if self._peek()[0] != "end":
            raise ValueError(f"trailing tokens in expression: {self._peek()}")
        return node

    def _expr(self):
        node = self._term()
        while self._peek() == ("op", "+") or self._peek() == ("op", "-"):
            op = self._take()[1]
            node = _Bin(op, node, self._term())
        return node

    def _term(self):
        node = self._unary()
        while self._peek() == ("op", "*") or self._peek() == ("op", "/"):
            op = self._take()[1]
            node = _Bin(op, node, self._unary())
        return node

    def _unary(self):
        if self._peek() == ("op", "-"):
            self._take()
            return _Neg(self._unary())
        if self._peek() == ("op", "+"):
            self._take()
            return self._unary()
        return self._power()

    def _power(self):
        base = self._atom()
        if self._peek() in (("op", "**"), ("op", "^")):
            self._take()
            sign = 1
            while self._peek() == ("op", "-"):
                self._take()
                sign = -sign
            tok = self._take("num")
            frac = Fraction(tok[1])
            if frac.denominator != 1:
                raise ValueError("only integer powers are supported")
            return _Pow(base, sign * int(frac))
        return base

    def _atom(self):
        kind, val = self._peek()
        if kind == "num":
            self._take()
            return _Num(Fraction(val))
        if kind == "name":
            self._take()
            if val in ("exp", "log", "ln"):
                self._take("op", "(")
                arg = self._expr()
                self._take("op", ")")
                return _Fun("exp" if val == "exp" else "log", arg)
            return _Name(val)
        if (kind, val) == ("op", "("):
            self._take()
            node = self._expr()
            self._take("op", ")")
            return node
        raise ValueError(f"unexpected token {(kind, val)} in expression")


class DensityExpr:
    """Closed expression in ``t`` over complex constants, exp, log, powers."""

    __slots__ = ("source", "_root")

    def __init__(self, source: str):
        self.source = str(source)
        self._root = _Parser(self.source).parse()

    def __call__(self, t):
        return mp.mpc(self._root.ev(t))

    def __repr__(self):
        return f"DensityExpr({self.source!r})"


# ---------------------------------------------------------------------------
# adaptive Gauss-Legendre quadrature
# ---------------------------------------------------------------------------

_GL_ORDER = 32
_GL_CACHE: dict[tuple[int, int], tuple[list, list]] = {}
PANEL_CAP = 2**16


def gauss_legendre_rule(order: int = _GL_ORDER):
    """Nodes and weights on [-1, 1] at the current precision, cached."""
    key = (order, mp.mp.prec)
    rule = _GL_CACHE.get(key)
    if rule is not None:
        return rule
    xs, ws = [], []
    n = order
    for k in range(n):
        x = mp.cos(mp.pi * (k + mp.mpf(3) / 4) / (n + mp.mpf(1) / 2))
        dp = mp.mpf(1)
        for _ in range(100):
            p0, p1 = mp.mpf(1), x
            for j in range(1, n):
                p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < mp.eps * (1 + abs(x)):
                break
        xs.append(x)
        ws.append(2 / ((1 - x * x) * dp * dp))
    _GL_CACHE[key] = (xs, ws)
    return xs, ws


def _gl_panel(f, a, b, xs, ws):
    h = (b - a) / 2
    m = (a + b) / 2
    acc = mp.mpc(0)
    acc_abs = mp.mpf(0)
    for x, w in zip(xs, ws):
        v = f(m + h * x)
        acc += w * v
        acc_abs += w * abs(v)
    return h * acc, abs(h) * acc_abs


def quad_integrate(f, interval, tol=None):
    """Integral of ``f`` over a real interval by adaptive panel bisection.

    Each panel is accepted once splitting it changes its value by less than
    its share of ``tol`` relative to the integrand's L1 mass; panels are
    processed in a fixed order so results are deterministic. Raises
    :class:`QuadFailure` once more than ``PANEL_CAP`` panels are needed.
    """
    a, b = (to_mpf(interval[0]), to_mpf(interval[1]))
    if tol is None:
        tol = algebra.drop_tolerance()
    tol = mp.mpf(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a == b:
        return mp.mpc(0)
    xs, ws = gauss_legendre_rule()
    whole, l1 = _gl_panel(f, a, b, xs, ws)
    scale = max(l1, mp.mpf(2) ** (-mp.mp.prec))
    total_len = b - a

    acc = mp.mpc(0)
    panels = 0
    stack = [(a, b, whole)]
    while stack:
        pa, pb, pval = stack.pop()
        panels += 1
        if panels > PANEL_CAP:
            raise QuadFailure(
                f"panel budget {PANEL_CAP} exceeded on [{mp.nstr(a,8)}, {mp.nstr(b,8)}]"
            )
        pm = (pa + pb) / 2
        left, _ = _gl_panel(f, pa, pm, xs, ws)
        right, _ = _gl_panel(f, pm, pb, xs, ws)
        if abs(pval - left - right) <= tol * scale * (pb - pa) / total_len:
            acc += left + right
        else:
            stack.append((pm, pb, right))
            stack.append((pa, pm, left))
    return acc


# ---------------------------------------------------------------------------
# measure components
# ---------------------------------------------------------------------------


class MeasureComponent:
    """One interval of the support with its density expression."""

    __slots__ = ("a_exact", "b_exact", "density", "endpoint_singular")

    def __init__(self, interval, density, endpoint_singular=False):
        self.a_exact = self._exact(interval[0])
        self.b_exact = self._exact(interval[1])
        if self.b_exact <= self.a_exact:
            raise ValueError("interval must have positive length")
        self.density = (
            density if isinstance(density, DensityExpr) else DensityExpr(density)
        )
        self.endpoint_singular = bool(endpoint_singular)

    @staticmethod
    def _exact(x) -> Fraction:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, str):
            re_q, im_q = algebra.parse_complex(x)
            if im_q != 0:
                raise ValueError("interval endpoints must be real")
            return re_q
        return Fraction(x)

    @property
    def a(self) -> mp.mpf:
        return algebra.fraction_to_mpf(self.a_exact)

    @property
    def b(self) -> mp.mpf:
        return algebra.fraction_to_mpf(self.b_exact)

    def integrate(self, g, tol=None):
        """Integral of ``g`` against this component of the measure."""
        rho = self.density
        if not self.endpoint_singular:
            return quad_integrate(lambda t: g(t) * rho(t), (self.a, self.b), tol)
        mid = (self.a + self.b) / 2
        half = (self.b - self.a) / 2

        def integrand(theta):
            t = mid + half * mp.cos(theta)
            return g(t) * rho(t)

        return quad_integrate(integrand, (mp.mpf(0), mp.pi), tol)

    def sample_points(self, n: int):
        a, b = self.a, self.b
        return [a + (b - a) * k / (n - 1) for k in range(n)]


class ComplexMeasure:
    """Finite union of disjoint intervals, each carrying a complex density."""

    def __init__(self, components, density_floor=1e-12, waive_floor=False):
        comps = list(components)
        comps.sort(key=lambda c: c.a_exact)
        for u, v in zip(comps, comps[1:]):
            if v.a_exact <= u.b_exact:
                raise ValueError("measure intervals must be pairwise disjoint")
        self.components = comps
        self.density_floor = mp.mpf(density_floor)
        self.waive_floor = bool(waive_floor)
        self.floor_observed = None
        if comps:
            self._validate_densities()

    def _validate_densities(self, samples: int = 64):
        lo = mp.inf
        for comp in self.components:
            for t in comp.sample_points(samples):
                v = comp.density(t)
                if not (mp.isfinite(v.real) and mp.isfinite(v.imag)):
                    raise ValueError(
                        f"density {comp.density.source!r} not finite at t={mp.nstr(t, 8)}"
                    )
                lo = min(lo, abs(v))
        self.floor_observed = lo
        if not self.waive_floor and lo < self.density_floor:
            raise ValueError(
                f"sampled density magnitude {mp.nstr(lo, 6)} below floor "
                f"{mp.nstr(self.density_floor, 6)} (set waive_floor to accept)"
            )

    @property
    def intervals(self):
        return [(c.a, c.b) for c in self.components]

    @property
    def hull(self):
        if not self.components:
            return None
        return (self.components[0].a, self.components[-1].b)

    def is_empty(self) -> bool:
        return not self.components

    def support_distance(self, z) -> mp.mpf:
        """Euclidean distance from z to the union of support intervals."""
        if not self.components:
            return mp.inf
        z = mp.mpc(z)
        best = mp.inf
        for c in self.components:
            dx = max(mp.mpf(0), c.a - z.real, z.real - c.b)
            d = mp.hypot(dx, z.imag)
            best = min(best, d)
        return best

    def integrate(self, g, tol=None):
        return sum((c.integrate(g, tol) for c in self.components), mp.mpc(0))


class RationalPart:
    """Sum of polar parts r_{k}/(z-eta)^{k+1} over a finite set of poles."""

    class Pole:
        __slots__ = ("eta", "multiplicity", "coeffs")

        def __init__(self, eta, multiplicity, coeffs):
            self.eta = to_mpc(eta)
            self.multiplicity = int(multiplicity)
            self.coeffs = [to_mpc(c) for c in coeffs]
            if self.multiplicity < 1:
                raise ValueError("pole multiplicity must be >= 1")
            if len(self.coeffs) != self.multiplicity:
                raise ValueError("need exactly multiplicity Laurent coefficients")
            if self.coeffs[-1] == 0:
                raise ValueError("leading Laurent coefficient must be nonzero")

    def __init__(self, poles=()):
        self.poles = [
            p if isinstance(p, RationalPart.Pole) else RationalPart.Pole(*p)
            for p in poles
        ]
        for u in range(len(self.poles)):
            for v in range(u + 1, len(self.poles)):
                if self.poles[u].eta == self.poles[v].eta:
                    raise ValueError("poles must be pairwise distinct")

    @classmethod
    def empty(cls) -> "RationalPart":
        return cls(())

    def is_empty(self) -> bool:
        return not self.poles

    @property
    def s(self) -> int:
        return sum(p.multiplicity for p in self.poles)

    def denominator(self) -> Poly:
        roots = []
        for p in self.poles:
            roots.extend([p.eta] * p.multiplicity)
        return Poly.from_roots(roots) if roots else Poly.one()

    def pole_locations(self):
        return [p.eta for p in self.poles]

    def check_clear_of(self, lam: ComplexMeasure, clearance=mp.mpf("1e-12")):
        for p in self.poles:
            if lam.support_distance(p.eta) <= clearance:
                raise ValueError("rational-part poles must avoid the support")

    def eval(self, z):
        z = mp.mpc(z)
        acc = mp.mpc(0)
        for p in self.poles:
            w = z - p.eta
            invw = 1 / w
            term = invw
            for k in range(p.multiplicity):
                acc += p.coeffs[k] * term
                term *= invw
        return acc

    def eval_derivative(self, z, r: int):
        """r-th derivative of the rational part at z."""
        if r == 0:
            return self.eval(z)
        z = mp.mpc(z)
        acc = mp.mpc(0)
        for p in self.poles:
            w = z - p.eta
            for k in range(p.multiplicity):
                rising = mp.mpf(1)
                for j in range(1, r + 1):
                    rising *= k + j
                acc += p.coeffs[k] * (-1) ** r * rising * w ** (-(k + 1 + r))
        return acc

    def moment_contribution(self, j: int):
        """Coefficient of z^{-j-1} in the expansion of the rational part at infinity."""
        acc = mp.mpc(0)
        for p in self.poles:
            for k in range(p.multiplicity):
                if j < k:
                    continue
                acc += p.coeffs[k] * math.comb(j, k) * p.eta ** (j - k)
        return acc


# ---------------------------------------------------------------------------
# transforms, moments, argument variation
# ---------------------------------------------------------------------------


def _on_support_guard(lam: ComplexMeasure, z):
    z = mp.mpc(z)
    if lam.support_distance(z) <= 10 * mp.eps * max(1, abs(z)):
        raise PointOnSupport(f"z = {mp.nstr(z, 10)} lies on the support")
    return z


def cauchy_transform(lam: ComplexMeasure, z, tol=None):
    """Integral of 1/(z - t) against the measure."""
    z = _on_support_guard(lam, z)
    return lam.integrate(lambda t: 1 / (z - t), tol)


def _pole_guard(R: RationalPart, z):
    z = mp.mpc(z)
    for p in R.poles:
        if abs(z - p.eta) <= 10 * mp.eps * max(1, abs(z)):
            raise PointAtPole(f"z = {mp.nstr(z, 10)} is a pole of the rational part")
    return z


def eval_F(lam: ComplexMeasure, R: RationalPart, z, tol=None):
    """Cauchy transform of the measure plus the rational polar part."""
    z = _pole_guard(R, z)
    return cauchy_transform(lam, z, tol) + R.eval(z)


def eval_F_derivative(lam: ComplexMeasure, R: RationalPart, z, r: int, tol=None):
    """r-th derivative of eval_F at z (r >= 0)."""
    if r == 0:
        return eval_F(lam, R, z, tol)
    z = _pole_guard(R, z)
    z = _on_support_guard(lam, z)
    fact = mp.factorial(r) * (-1) ** r
    ct = lam.integrate(lambda t: fact / (z - t) ** (r + 1), tol)
    return ct + R.eval_derivative(z, r)


def moments(lam: ComplexMeasure, R: RationalPart, J: int, tol=None):
    """Power moments c_0..c_J of the full function at infinity.

    c_j integrates t^j against the measure; the rational part contributes
    the Laurent expansion of its polar terms.
    """
    if J < 0:
        raise ValueError("J must be >= 0")
    out = []
    for j in range(J + 1):
        cj = lam.integrate(lambda t, j=j: t**j, tol) if not lam.is_empty() else mp.mpc(0)
        cj += R.moment_contribution(j)
        out.append(cj)
    return out


def _wrap_angle(x):
    y = mp.fmod(x + mp.pi, 2 * mp.pi)
    if y <= 0:
        y += 2 * mp.pi
    return y - mp.pi


def argument_variation(lam: ComplexMeasure, gridN: int):
    """Total variation of the unwrapped density argument on a sampling grid.

    Within each interval consecutive samples are unwrapped by nearest-branch
    continuation, guarded by the pi/2 jump test; gaps between intervals
    contribute the principal-value jump (the linear-interpolation extension
    of the argument across the gap). The result is a lower bound of the true
    variation that is nondecreasing under grid refinement.
    """
    if gridN < 2:
        raise ValueError("gridN must be >= 2")
    total = mp.mpf(0)
    prev_raw = None
    for comp in lam.components:
        raw = []
        for t in comp.sample_points(gridN):
            v = comp.density(t)
            if v == 0:
                raise UnwrapFailure(
                    f"density vanishes at sample t={mp.nstr(t, 8)}; argument undefined"
                )
            raw.append(mp.arg(v))
        if prev_raw is not None:
            total += abs(_wrap_angle(raw[0] - prev_raw))
        for u, v in zip(raw, raw[1:]):
            step = _wrap_angle(v - u)
            if abs(step) >= mp.pi / 2:
                raise UnwrapFailure(
                    "argument jump >= pi/2 between samples; refine the grid"
                )
            total += abs(step)
        prev_raw = raw[-1]
    return total
