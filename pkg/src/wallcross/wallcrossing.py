"""Central charges, BPS rays, K- and S-factors and ordered products.

All series arithmetic is exact (Fractions).  Phases are floating point and
compared with ``EPS_RAY``.
"""

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

from .charges import (DEFAULT_SIGMA, RANK2, Charge, Cone, RelativeCharge, TorsorPoint, TruncatedSeries,
                      check_in_cone, compose, label_sort_key, pair)
from .errors import (AmbiguousOrderError, ConfigError, DegenerateChargeError,
                     NoSolutionError, RayOnBoundaryError)

EPS_RAY = 1e-9
TWO_PI = 2 * math.pi


@dataclass
class CentralCharge:
    """Linear map on the lattice plus one complex value per torsor."""

    basis_values: tuple
    torsor_values: dict = field(default_factory=dict)

    def __call__(self, label):
        if isinstance(label, Charge):
            return sum(c * z for c, z in zip(label.coeffs, self.basis_values))
        if isinstance(label, TorsorPoint):
            return self.torsor_values[label.vacuum] + self(label.offset)
        return self.torsor_values[label.i] - self.torsor_values[label.j] + self(label.offset)


@dataclass
class BPSData:
    omega: dict = field(default_factory=dict)
    mu: dict = field(default_factory=dict)
    omega_torsor: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omega = {g: int(v) for g, v in self.omega.items() if v}
        self.mu = {g: int(v) for g, v in self.mu.items() if v}
        self.omega_torsor = {k: Fraction(v) for k, v in self.omega_torsor.items()}
        vacua = sorted({i for (_, i) in self.omega_torsor})
        for g in self.omega:
            for i in vacua:
                for j in vacua:
                    if i != j:
                        w = self.torsor_omega(g, i) - self.torsor_omega(g, j)
                        if w.denominator != 1:
                            raise ConfigError("omega(gamma, gamma_ij) must be an integer",
                                              charge=g.coeffs, i=i, j=j)

    def torsor_omega(self, g, vacuum):
        return self.omega_torsor.get((g, vacuum), Fraction(0))


def omega_pair(data, g, label):
    """omega(gamma, a): Omega(gamma)<gamma,a> on the lattice, extended to torsors."""
    om = data.omega.get(g, 0)
    if isinstance(label, Charge):
        return Fraction(om * pair(g, label))
    base = Fraction(om * pair(g, label.offset))
    if isinstance(label, TorsorPoint):
        return data.torsor_omega(g, label.vacuum) + base
    w = data.torsor_omega(g, label.i) - data.torsor_omega(g, label.j) + base
    if w.denominator != 1:
        raise ConfigError("non-integral omega on a relative charge")
    return w


def ray_of(label, Z):
    """Phase of the ray Z_a * R_-, i.e. arg(-Z_a), in (-pi, pi]."""
    z = complex(Z(label))
    if z == 0:
        raise DegenerateChargeError("central charge vanishes", label=repr(label))
    phi = cmath.phase(-z)
    if phi <= -math.pi:
        phi += TWO_PI
    return phi


def _binomial_coeffs(w):
    """Coefficients of (1 - x)^(-w) = sum_k c_k x^k, generated lazily."""
    c = Fraction(1)
    k = 0
    while True:
        yield k, c
        c = c * (w + k) / (k + 1)
        k += 1
        if c == 0:
            return


def k_factor_apply(g, data, s, work_degree=None):
    """X_a -> (1 - X_g)^(-omega(g,a)) X_a on every term of ``s``."""
    check_in_cone(g, s.cone)
    top = s.max_degree if work_degree is None else work_degree
    deg = s.cone.degree
    dg = deg(g)
    out = {}
    for a, ca in s.terms.items():
        w = omega_pair(data, g, a)
        if w == 0:
            out[a] = out.get(a, 0) + ca
            continue
        da = deg(a)
        for k, ck in _binomial_coeffs(w):
            if k and s.cone.mode == "cone" and da + k * dg > top:
                break
            if k and s.cone.mode == "norm" and k * dg - da > top:
                break
            if k == 0:
                out[a] = out.get(a, 0) + ca
                continue
            kg = g * k
            lab = compose(kg, a)
            if deg(lab) > top:
                continue
            out[lab] = out.get(lab, 0) + s.sigma(kg, a) * ck * ca
    return TruncatedSeries(out, s.cone, top, s.sigma)


def s_factor_apply(gij, mu, s, work_degree=None):
    """X_a -> (1 - mu X_gij) X_a (1 + mu X_gij)."""
    top = s.max_degree if work_degree is None else work_degree
    if mu == 0:
        return TruncatedSeries(s.terms, s.cone, top, s.sigma)
    one = Charge((0,) * gij.offset.ctx.rank, gij.offset.ctx)
    left = TruncatedSeries({one: 1, gij: -mu}, s.cone, top, s.sigma)
    right = TruncatedSeries({one: 1, gij: mu}, s.cone, top, s.sigma)
    body = TruncatedSeries(s.terms, s.cone, top, s.sigma)
    return left * body * right


def _factors(Z, data):
    out = []
    for g, om in data.omega.items():
        out.append((ray_of(g, Z), "K", g))
    for gij, mu in data.mu.items():
        out.append((ray_of(gij, Z), "S", gij))
    return out


def _apply_factor(f, data, s, top):
    _, kind, lab = f
    if kind == "K":
        return k_factor_apply(lab, data, s, top)
    return s_factor_apply(lab, data.mu[lab], s, top)


def active_factors(sector, Z, data):
    """Factors with ray inside the open sector, sorted counterclockwise."""
    lo, hi = sector
    if not hi > lo or hi - lo > TWO_PI + EPS_RAY:
        raise ConfigError("sector must satisfy lo < hi <= lo + 2 pi")
    full = abs(hi - lo - TWO_PI) <= EPS_RAY
    act = []
    for phi, kind, lab in _factors(Z, data):
        p = lo + math.fmod(phi - lo, TWO_PI)
        if p < lo:
            p += TWO_PI
        near = [abs(p - lo), abs(p - hi), abs(p - lo - TWO_PI)]
        if min(near) < EPS_RAY:
            raise RayOnBoundaryError("ray lies on the sector boundary", label=repr(lab), phase=phi)
        if p < hi or full:
            act.append((p, kind, lab))
    act.sort(key=lambda f: (f[0], f[1], label_sort_key(f[2])))
    return act


def _slack(act, data, s):
    """Extra working degree for norm-mode truncation (mutually local spectra only)."""
    if s.cone.mode == "cone":
        return 0
    charges = [lab for _, kind, lab in act if kind == "K"]
    for a in charges:
        for b in charges:
            if pair(a, b) != 0:
                raise ConfigError("norm-mode truncation needs mutually local active charges")
    if any(kind == "S" for _, kind, _ in act):
        raise ConfigError("norm-mode truncation does not support S-factors")
    w = 1
    for g in charges:
        for a in s.terms:
            w = max(w, abs(omega_pair(data, g, a)))
    extra = sum(s.cone.degree(g) for g in charges) * w
    return int(math.ceil(extra))


def ordered_product(sector, Z, data, s):
    """Apply every K/S factor whose ray lies in ``sector`` to ``s``.

    The factors form the operator product F_1 F_2 ... F_n with phases
    increasing counterclockwise from left to right; acting on ``s`` the
    rightmost (largest phase) factor is applied first.
    """
    act = active_factors(sector, Z, data)
    groups = []
    for f in act:
        if groups and abs(f[0] - groups[-1][-1][0]) < EPS_RAY:
            groups[-1].append(f)
        else:
            groups.append([f])
    top = s.max_degree + _slack(act, data, s)
    cur = TruncatedSeries(s.terms, s.cone, top, s.sigma)
    for grp in reversed(groups):
        if len(grp) > 1:
            _check_commute(grp, data, cur, top)
        for f in grp:
            cur = _apply_factor(f, data, cur, top)
    return cur.truncated(s.max_degree)


def _check_commute(grp, data, s, top):
    for i, f in enumerate(grp):
        for g in grp[i + 1:]:
            fg = _apply_factor(f, data, _apply_factor(g, data, s, top), top)
            gf = _apply_factor(g, data, _apply_factor(f, data, s, top), top)
            if fg.truncated(s.max_degree) != gf.truncated(s.max_degree):
                raise AmbiguousOrderError("non-commuting factors share a ray phase",
                                          first=repr(f[2]), second=repr(g[2]))


def basis_labels(ctx=RANK2, vacua=()):
    n = ctx.rank
    labs = [Charge(tuple(1 if i == j else 0 for j in range(n)), ctx) for i in range(n)]
    labs += [TorsorPoint(v, Charge((0,) * n, ctx)) for v in vacua]
    return labs


def _vacua(*datas):
    v = set()
    for d in datas:
        v |= {i for (_, i) in d.omega_torsor}
        for r in d.mu:
            v |= {r.i, r.j}
    return sorted(v)


def verify_wcf(Z1, data1, Z2, data2, sector, max_degree, cone, labels=None):
    """Compare the two ordered products on basis variables.

    Returns ``(equal, report)``; the report names the first discrepancy,
    ordered by correction order (label degree minus basis degree) and then
    by label.
    """
    if labels is None:
        labels = basis_labels(cone.basis[0].ctx, _vacua(data1, data2))
    diffs = []
    for b in labels:
        s = TruncatedSeries.variable(b, cone, max_degree)
        p1 = ordered_product(sector, Z1, data1, s)
        p2 = ordered_product(sector, Z2, data2, s)
        for lab in set(p1.terms) | set(p2.terms):
            c1, c2 = p1.coefficient(lab), p2.coefficient(lab)
            if c1 != c2:
                order = cone.degree(lab) - cone.degree(b)
                diffs.append((order, label_sort_key(b), label_sort_key(lab), b, lab, c1, c2))
    if not diffs:
        return True, {"equal": True, "max_degree": max_degree, "checked": len(labels)}
    diffs.sort(key=lambda d: d[:3])
    order, _, _, b, lab, c1, c2 = diffs[0]
    return False, {
        "equal": False,
        "max_degree": max_degree,
        "basis": repr(b),
        "label": repr(lab),
        "degree": int(order),
        "label_degree": int(cone.degree(lab)),
        "lhs": str(c1),
        "rhs": str(c2),
        "n_discrepancies": len(diffs),
    }


def _charges_of_degree(cone, d):
    n = len(cone.basis)
    out = []
    for combo in iproduct(range(d + 1), repeat=n):
        if sum(combo) == d:
            g = cone.basis[0] * 0
            for k, b in zip(combo, cone.basis):
                g = g + b * k
            out.append(g)
    return out


def factorize_spectrum(target, Z, max_degree, cone, sector=(-math.pi, math.pi)):
    """Recover integer BPS numbers from an ordered-product action.

    ``target`` maps basis charges to their images (TruncatedSeries).  The
    unknown Omega at cone degree d enter the degree-d correction linearly
    through the first-order term of their K-factor, so they are solved one
    degree at a time.
    """
    if cone.mode != "cone":
        raise ConfigError("factorization needs a strictly convex cone")
    basis = list(target)
    min_deg = min(cone.degree(b) for b in basis)
    data = BPSData()
    for d in range(1, int(max_degree - min_deg) + 1):
        resid = {}
        for b in basis:
            s = TruncatedSeries.variable(b, cone, max_degree)
            p = ordered_product(sector, Z, data, s)
            diff = target[b] - p
            for lab, c in diff.terms.items():
                if cone.degree(lab) - cone.degree(b) < d:
                    raise NoSolutionError("target is not an ordered product",
                                          degree=d, label=repr(lab))
                if cone.degree(lab) - cone.degree(b) == d:
                    resid[(b, lab)] = c
        found = {}
        for g in _charges_of_degree(cone, d):
            vals = set()
            for b in basis:
                lab = compose(g, b)
                c = resid.pop((b, lab), Fraction(0))
                k = pair(g, b)
                if k == 0:
                    if c != 0:
                        raise NoSolutionError("correction along a central direction",
                                              degree=d, label=repr(lab))
                    continue
                vals.add(c / (k * DEFAULT_SIGMA(g, b)))
            if len(vals) > 1:
                raise NoSolutionError("inconsistent BPS number", degree=d, charge=g.coeffs)
            if vals:
                om = vals.pop()
                if om.denominator != 1:
                    raise NoSolutionError("non-integral BPS number", degree=d, charge=g.coeffs)
                if om:
                    found[g] = int(om)
        if any(v != 0 for v in resid.values()):
            raise NoSolutionError("unmatched correction terms", degree=d)
        if found:
            merged = dict(data.omega)
            merged.update(found)
            data = BPSData(merged)
    for b in basis:
        s = TruncatedSeries.variable(b, cone, max_degree)
        if ordered_product(sector, Z, data, s) != target[b]:
            raise NoSolutionError("factorization does not reproduce the target")
    return data


def action_on_basis(sector, Z, data, max_degree, cone, labels=None):
    if labels is None:
        labels = basis_labels(cone.basis[0].ctx)
    return {b: ordered_product(sector, Z, data, TruncatedSeries.variable(b, cone, max_degree))
            for b in labels}


# ---------------------------------------------------------------- JSON I/O


def _parse_charge(text, ctx=RANK2):
    if isinstance(text, (list, tuple)):
        return Charge(tuple(int(x) for x in text), ctx)
    return Charge(tuple(int(x) for x in str(text).split(",")), ctx)


def chamber_from_json(doc, ctx=RANK2):
    """Read {charges, omega, mu, Z, Z_torsor, omega_torsor} into (Z, BPSData).

    ``omega`` maps "q,p" to an integer (or is a list aligned with
    ``charges``); ``mu`` maps "i,j,q,p"; ``omega_torsor`` maps "q,p|i".
    """
    zre = doc["Z"]["re"]
    zim = doc["Z"]["im"]
    tors = {int(k): complex(v["re"], v["im"]) for k, v in doc.get("Z_torsor", {}).items()}
    Z = CentralCharge(tuple(complex(r, i) for r, i in zip(zre, zim)), tors)
    om = doc.get("omega", {})
    if isinstance(om, list):
        omega = {_parse_charge(c, ctx): v for c, v in zip(doc["charges"], om)}
    else:
        omega = {_parse_charge(k, ctx): v for k, v in om.items()}
    mu = {}
    for k, v in doc.get("mu", {}).items():
        parts = [int(x) for x in k.split(",")]
        mu[RelativeCharge(parts[0], parts[1], Charge(tuple(parts[2:]), ctx))] = v
    omt = {}
    for k, v in doc.get("omega_torsor", {}).items():
        c, i = k.split("|")
        omt[(_parse_charge(c, ctx), int(i))] = Fraction(v)
    return Z, BPSData(omega, mu, omt)
