"""Charge lattices, torsors, twisting signs and truncated series of X-variables.

Labels come in three kinds:

* ``Charge``          an element of the lattice, integer coordinates in a fixed basis
* ``TorsorPoint``     gamma_i^0 + offset, one torsor per vacuum index i
* ``RelativeCharge``  gamma_i^0 - gamma_j^0 + offset, with i != j

Only the compositions listed in ``compose`` exist; anything else raises
``CompositionError`` (and multiplies to zero inside a series).
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CompositionError, ConeError, ConfigError, ContextError


@dataclass(frozen=True)
class PairingContext:
    name: str
    matrix: tuple

    @property
    def rank(self):
        return len(self.matrix)

    def __post_init__(self):
        n = len(self.matrix)
        for i in range(n):
            if len(self.matrix[i]) != n:
                raise ConfigError("pairing matrix must be square")
            for j in range(n):
                if self.matrix[i][j] != -self.matrix[j][i]:
                    raise ConfigError("pairing matrix must be antisymmetric")


RANK2 = PairingContext("rank2", ((0, 1), (-1, 0)))


@dataclass(frozen=True, order=True)
class Charge:
    coeffs: tuple
    ctx: PairingContext = field(default=RANK2, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if len(self.coeffs) != self.ctx.rank:
            raise ContextError("charge length does not match its pairing context")

    def _check(self, other):
        if self.ctx != other.ctx:
            raise ContextError("charges live in different pairing contexts")

    def __add__(self, other):
        if isinstance(other, Charge):
            self._check(other)
            return Charge(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.ctx)
        return NotImplemented

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Charge(tuple(-a for a in self.coeffs), self.ctx)

    def __mul__(self, k):
        return Charge(tuple(k * a for a in self.coeffs), self.ctx)

    __rmul__ = __mul__

    def is_zero(self):
        return not any(self.coeffs)

    def __repr__(self):
        return "Charge%s" % (self.coeffs,)


def charge(q, p, ctx=RANK2):
    return Charge((q, p), ctx)


GAMMA_E = Charge((1, 0))
GAMMA_M = Charge((0, 1))


def zero_charge(ctx=RANK2):
    return Charge((0,) * ctx.rank, ctx)


@dataclass(frozen=True)
class TorsorPoint:
    vacuum: int
    offset: Charge = field(default_factory=zero_charge)

    def __repr__(self):
        return "Torsor(%s, %s)" % (self.vacuum, self.offset.coeffs)


@dataclass(frozen=True)
class RelativeCharge:
    i: int
    j: int
    offset: Charge = field(default_factory=zero_charge)

    def __post_init__(self):
        if self.i == self.j:
            raise CompositionError("relative charge needs two distinct vacua")

    def __repr__(self):
        return "Rel(%s, %s, %s)" % (self.i, self.j, self.offset.coeffs)


def pair(g1, g2):
    """Antisymmetric integer pairing of two lattice charges."""
    if not isinstance(g1, Charge) or not isinstance(g2, Charge):
        raise CompositionError("pairing is defined on lattice charges only")
    g1._check(g2)
    m = g1.ctx.matrix
    total = 0
    for a, ca in enumerate(g1.coeffs):
        if ca:
            for b, cb in enumerate(g2.coeffs):
                if cb and m[a][b]:
                    total += ca * cb * m[a][b]
    return total


def offset_of(label):
    return label if isinstance(label, Charge) else label.offset


def compose(a, b):
    """Partial sum of two labels; raises CompositionError when undefined."""
    if isinstance(a, Charge) and isinstance(b, Charge):
        return a + b
    if isinstance(a, Charge):
        if isinstance(b, TorsorPoint):
            return TorsorPoint(b.vacuum, a + b.offset)
        return RelativeCharge(b.i, b.j, a + b.offset)
    if isinstance(b, Charge):
        if isinstance(a, TorsorPoint):
            return TorsorPoint(a.vacuum, a.offset + b)
        return RelativeCharge(a.i, a.j, a.offset + b)
    if isinstance(a, RelativeCharge):
        if isinstance(b, TorsorPoint) and b.vacuum == a.j:
            return TorsorPoint(a.i, a.offset + b.offset)
        if isinstance(b, RelativeCharge) and b.i == a.j and b.j != a.i:
            return RelativeCharge(a.i, b.j, a.offset + b.offset)
    raise CompositionError("composition %r + %r is not defined" % (a, b))


def is_defined(a, b):
    try:
        compose(a, b)
    except CompositionError:
        return False
    return True


def _default_extra(a, b):
    return 1


class TwistingFunction:
    """Sign sigma(a, b) attached to every defined composition.

    On two lattice charges it is (-1)^<a,b>.  When a torsor or relative
    label is involved, the base markers gamma_i^0 are taken to pair
    trivially, so the sign is (-1)^<offset a, offset b>, times an optional
    user supplied factor ``extra(a, b)``.  Any bilinear exponent satisfies
    the cocycle identity, so the default is a valid twisting function; a
    custom ``extra`` must itself be a cocycle for the identity to survive.
    """

    def __init__(self, extra=None):
        self.extra = extra or _default_extra

    def __call__(self, a, b):
        if not is_defined(a, b):
            raise CompositionError("sigma needs a defined composition")
        s = -1 if pair(offset_of(a), offset_of(b)) % 2 else 1
        if isinstance(a, Charge) and isinstance(b, Charge):
            return s
        return s * self.extra(a, b)


DEFAULT_SIGMA = TwistingFunction()


def sigma(a, b):
    return DEFAULT_SIGMA(a, b)


def monodromy_apply(power, g, delta):
    """(q, p) -> (q - delta*p, p), applied ``power`` times (negative allowed)."""
    if g.ctx.rank != 2:
        raise ContextError("monodromy is defined on rank-2 charges")
    q, p = g.coeffs
    return Charge((q - power * delta * p, p), g.ctx)


# ---------------------------------------------------------------- grading


def _solve_rational(basis, target):
    """Coordinates of ``target`` in ``basis`` (square, invertible) as Fractions."""
    n = len(basis)
    rows = [[Fraction(basis[c].coeffs[r]) for c in range(n)] + [Fraction(target[r])]
            for r in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if piv is None:
            raise ConfigError("cone basis is not linearly independent")
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [v * inv for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [v - f * w for v, w in zip(rows[r], rows[col])]
    return [rows[r][n] for r in range(n)]


@dataclass(frozen=True)
class Cone:
    """Degree function on labels.

    mode "cone": simplicial cone spanned by ``basis``; degree is the sum of
    the coordinates, a linear functional, so truncation is an ideal and
    every computation is exact up to ``max_degree``.

    mode "norm": degree is the sum of absolute coordinates.  Needed when
    the active charges are not contained in any strictly convex cone
    (for instance +gamma and -gamma both carry BPS states).  Products can
    lower this degree, so callers work at a raised internal degree and
    truncate at the end (see ``wallcrossing.ordered_product``).
    """

    basis: tuple
    mode: str = "cone"

    def __post_init__(self):
        if self.mode not in ("cone", "norm"):
            raise ConfigError("unknown cone mode %r" % self.mode)
        if len(self.basis) != self.basis[0].ctx.rank:
            raise ConfigError("cone basis must have full rank")
        _solve_rational(self.basis, self.basis[0].coeffs)

    def coords(self, g):
        return _solve_rational(self.basis, g.coeffs)

    def degree(self, label):
        c = self.coords(offset_of(label))
        if self.mode == "cone":
            return sum(c)
        return sum(abs(x) for x in c)

    def contains(self, g):
        c = self.coords(g)
        if self.mode == "norm":
            return not g.is_zero()
        return all(x >= 0 for x in c) and any(x > 0 for x in c)

    def key(self):
        return [list(b.coeffs) for b in self.basis], self.mode


def standard_cone(ctx=RANK2, mode="cone"):
    n = ctx.rank
    return Cone(tuple(Charge(tuple(1 if i == j else 0 for j in range(n)), ctx)
                      for i in range(n)), mode)


# ---------------------------------------------------------------- series


def label_sort_key(label):
    if isinstance(label, Charge):
        return (0, (), label.coeffs)
    if isinstance(label, TorsorPoint):
        return (1, (label.vacuum,), label.offset.coeffs)
    return (2, (label.i, label.j), label.offset.coeffs)


def label_to_json(label):
    if isinstance(label, Charge):
        return {"kind": "charge", "coeffs": list(label.coeffs)}
    if isinstance(label, TorsorPoint):
        return {"kind": "torsor", "vacuum": label.vacuum, "coeffs": list(label.offset.coeffs)}
    return {"kind": "relative", "i": label.i, "j": label.j, "coeffs": list(label.offset.coeffs)}


def label_from_json(d, ctx=RANK2):
    off = Charge(tuple(d["coeffs"]), ctx)
    if d["kind"] == "charge":
        return off
    if d["kind"] == "torsor":
        return TorsorPoint(d["vacuum"], off)
    return RelativeCharge(d["i"], d["j"], off)


class TruncatedSeries:
    """Finite sum of X_label with exact rational coefficients.

    Terms whose degree exceeds ``max_degree`` are dropped on construction
    and after every product.
    """

    def __init__(self, terms, cone, max_degree, sigma=DEFAULT_SIGMA):
        if max_degree <= 0:
            raise ConfigError("max_degree must be positive")
        self.cone = cone
        self.max_degree = max_degree
        self.sigma = sigma
        self.terms = {}
        for lab, c in dict(terms).items():
            c = Fraction(c)
            if c != 0 and cone.degree(lab) <= max_degree:
                self.terms[lab] = c

    @classmethod
    def variable(cls, label, cone, max_degree, coeff=1, sigma=DEFAULT_SIGMA):
        return cls({label: coeff}, cone, max_degree, sigma)

    def _like(self, terms):
        return TruncatedSeries(terms, self.cone, self.max_degree, self.sigma)

    def compatible(self, other):
        if self.cone != other.cone or self.max_degree != other.max_degree:
            raise ConfigError("series use different truncation settings")

    def __add__(self, other):
        self.compatible(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return self._like(out)

    def __neg__(self):
        return self._like({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return self._like({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        return series_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.cone == other.cone and self.max_degree == other.max_degree
                and self.terms == other.terms)

    def __repr__(self):
        parts = ["%s*X[%r]" % (v, k) for k, v in sorted(self.terms.items(),
                                                         key=lambda kv: label_sort_key(kv[0]))]
        return " + ".join(parts) if parts else "0"

    def truncated(self, max_degree):
        return TruncatedSeries(self.terms, self.cone, max_degree, self.sigma)

    def coefficient(self, label):
        return self.terms.get(label, Fraction(0))

    def to_json(self):
        items = sorted(self.terms.items(), key=lambda kv: label_sort_key(kv[0]))
        doc = {
            "cone": self.cone.key()[0],
            "mode": self.cone.mode,
            "max_degree": self.max_degree,
            "terms": [[label_to_json(k), str(v)] for k, v in items],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text, ctx=RANK2):
        doc = json.loads(text)
        cone = Cone(tuple(Charge(tuple(b), ctx) for b in doc["cone"]), doc["mode"])
        terms = {label_from_json(k, ctx): Fraction(v) for k, v in doc["terms"]}
        return cls(terms, cone, doc["max_degree"])


def label_product(a, b, sig=DEFAULT_SIGMA):
    """X_a X_b = sigma(a,b) X_{a+b}; returns (label, sign) or None if undefined."""
    try:
        c = compose(a, b)
    except CompositionError:
        return None
    return c, sig(a, b)


def series_mul(s1, s2):
    s1.compatible(s2)
    out = {}
    deg = s1.cone.degree
    for a, ca in s1.terms.items():
        for b, cb in s2.terms.items():
            r = label_product(a, b, s1.sigma)
            if r is None:
                continue
            lab, sg = r
            if deg(lab) > s1.max_degree:
                continue
            out[lab] = out.get(lab, 0) + sg * ca * cb
    return s1._like(out)


def check_in_cone(g, cone):
    if not cone.contains(g):
        raise ConeError("charge %r lies outside the truncation cone" % (g,))
