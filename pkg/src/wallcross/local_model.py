"""Elliptic surface rho^2 = -(2u + w) f(u) + f'(u)^2 / 4, its Q-action, and the
instanton comparison with the Ooguri-Vafa holomorphic symplectic form."""

import cmath
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import DegenerateSurfaceError, DomainError, SingularBaseError, SingularPointError
from .numerics import bessel_k
from .ooguri_vafa import (FiberPoint, OVParams, central_charges, distance_to_singular,
                          holomorphic_form, singular_set, wedge1)
from .twistor import TWISTOR_FORM_NORMALIZATION

TWO_PI = 2 * math.pi
WORK_DPS = 30


# ---------------------------------------------------------------- polynomials


def _poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return out


def _poly_add(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _deriv(p):
    return [i * c for i, c in enumerate(p)][1:] or [0]


def _eval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def surface_poly_in_u(a, b, w):
    """Coefficients (low to high) of P_w(u) = -(2u + w) f(u) + f'(u)^2 / 4."""
    f = [b, a, 0, 1]
    fp = [a, 0, 3]
    half = Fraction(1, 4) if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)) \
        and isinstance(w, (int, Fraction)) else 0.25
    return _trim(_poly_add(_poly_mul([-w, -2], f), [half * c for c in _poly_mul(fp, fp)]))


def _det(M):
    """Determinant by fraction-free-safe Gaussian elimination (works for Fraction and mpc)."""
    M = [row[:] for row in M]
    n = len(M)
    det = 1
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(M[r][k]))
        if M[piv][k] == 0:
            return 0 * det
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            det = -det
        det *= M[k][k]
        for r in range(k + 1, n):
            fac = M[r][k] / M[k][k]
            for c in range(k, n):
                M[r][c] -= fac * M[k][c]
    return det


def sylvester_resultant(p, q):
    """Res(p, q) for coefficient lists (low to high)."""
    p = _trim(p)
    q = _trim(q)
    m = len(p) - 1
    n = len(q) - 1
    size = m + n
    rows = []
    ph = list(reversed(p))
    qh = list(reversed(q))
    zero = 0 * p[0]
    for i in range(n):
        rows.append([zero] * i + ph + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + qh + [zero] * (size - n - 1 - i))
    return _det(rows)


def _interpolate(xs, ys):
    """Coefficients (low to high) of the interpolating polynomial, exact for Fractions."""
    n = len(xs)
    coeffs = [0] * n
    for i in range(n):
        basis = [1]
        denom = 1
        for j in range(n):
            if j != i:
                basis = _poly_mul(basis, [-xs[j], 1])
                denom *= xs[i] - xs[j]
        scale = ys[i] / denom
        for k in range(n):
            coeffs[k] += basis[k] * scale
    return _trim(coeffs)


def _poly_divmod(p, d):
    p = list(p)
    d = _trim(d)
    out = [0] * max(len(p) - len(d) + 1, 1)
    while len(_trim(p)) >= len(d) and any(p):
        p = _trim(p)
        k = len(p) - len(d)
        c = p[-1] / d[-1]
        out[k] = c
        for i, x in enumerate(d):
            p[i + k] -= c * x
        p = _trim(p)
        if len(p) < len(d):
            break
    return out, _trim(p)


def _poly_gcd(p, q):
    p = _trim(p)
    q = _trim(q)
    while any(q):
        _, r = _poly_divmod(p, q)
        p, q = q, r
    return [c / p[-1] for c in p]


# ---------------------------------------------------------------- surface


def _is_exact(x):
    return isinstance(x, (int, Fraction))


@dataclass
class EllipticSurface:
    a: complex
    b: complex
    sigma0: complex = 1.0

    def __post_init__(self):
        for name in ("a", "b"):
            v = getattr(self, name)
            if isinstance(v, float):
                setattr(self, name, Fraction(v))
            elif isinstance(v, complex) and v.imag == 0:
                setattr(self, name, Fraction(v.real))
        if complex(self.sigma0) == 0:
            raise DomainError("sigma0 must be nonzero")
        disc = -(4 * self.a ** 3 + 27 * self.b ** 2)
        if disc == 0:
            raise DomainError("f is not squarefree")

    @property
    def exact(self):
        return _is_exact(self.a) and _is_exact(self.b)

    def rhs(self, u, w):
        a, b = self.a, self.b
        if not self.exact:
            a, b = mpmath.mpc(a), mpmath.mpc(b)
        else:
            a, b = mpmath.mpf(a.numerator) / a.denominator, mpmath.mpf(b.numerator) / b.denominator
        f = u ** 3 + a * u + b
        fp = 3 * u ** 2 + a
        return -(2 * u + w) * f + fp ** 2 / 4

    @classmethod
    def from_json(cls, doc):
        def c(v):
            return complex(v["re"], v["im"])
        return cls(c(doc["a"]), c(doc["b"]), c(doc.get("sigma0", {"re": 1.0, "im": 0.0})))


@dataclass
class SingularFiberSet:
    e: list               # three w-values
    w0: list              # -w sigma0^2 / 2
    resultant: list       # coefficients in w (low to high)
    multiplicities: list


def w_resultant(s):
    """Res_u(P_w, dP_w/du) as a polynomial in w, by exact (or 30 digit) interpolation."""
    deg_bound = 8
    if s.exact:
        xs = [Fraction(k) for k in range(deg_bound + 1)]
        ys = []
        for x in xs:
            P = surface_poly_in_u(s.a, s.b, x)
            ys.append(sylvester_resultant(P, _deriv(P)))
        return _interpolate(xs, ys)
    with mpmath.workdps(WORK_DPS):
        xs = [mpmath.mpf(k) for k in range(deg_bound + 1)]
        a, b = mpmath.mpc(s.a), mpmath.mpc(s.b)
        ys = []
        for x in xs:
            P = [mpmath.mpc(c) for c in _float_poly(a, b, x)]
            ys.append(sylvester_resultant(P, _deriv(P)))
        co = _interpolate(xs, ys)
        scale = max(abs(c) for c in co)
        return _trim([c if abs(c) > scale * mpmath.mpf(10) ** (-WORK_DPS + 5) else mpmath.mpc(0)
                      for c in co])


def _float_poly(a, b, w):
    f = [b, a, 0, 1]
    fp = [a, 0, 3]
    return _trim(_poly_add(_poly_mul([-w, -2], f), [c / 4 for c in _poly_mul(fp, fp)]))


def _to_mp(c):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    return mpmath.mpc(c)


def singular_fibers(s):
    """The three w-values where two roots of P_w coincide, with w_0 images."""
    res = w_resultant(s)
    if all(c == 0 for c in res):
        raise DegenerateSurfaceError("the w-resultant vanishes identically")
    with mpmath.workdps(WORK_DPS):
        if s.exact:
            sq = _poly_gcd(res, _deriv(res))
            core, _ = _poly_divmod(res, sq)   # squarefree part
            core = [_to_mp(c) for c in core]
            mult = len(res) - 1
            roots = mpmath.polyroots(list(reversed(core)), maxsteps=200, extraprec=60)
        else:
            rp = [_to_mp(c) for c in res]
            mult = len(rp) - 1
            raw = mpmath.polyroots(list(reversed(rp)), maxsteps=400, extraprec=120)
            roots = _cluster(raw)
            d1 = _deriv(rp)
            polished = []
            for r in roots:
                # double roots of the resultant are simple roots of its derivative
                d2 = _deriv(d1)
                r = r - _eval(d1, r) / _eval(d2, r)
                polished.append(r)
            roots = polished
        e = sorted((complex(r) for r in roots), key=lambda z: (round(z.real, 12), z.imag))
    sig2 = complex(s.sigma0) ** 2
    counts = [2] * len(e) if mult == 2 * len(e) else [mult // max(len(e), 1)] * len(e)
    return SingularFiberSet(e, [-w * sig2 / 2 for w in e], [complex(_to_mp(c)) for c in res], counts)


def _cluster(roots, tol=1e-8):
    groups = []
    for r in roots:
        for g in groups:
            if abs(g[0] - r) < tol * max(1, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    return [sum(g) / len(g) for g in groups]


# ---------------------------------------------------------------- Q-action


def t_action(k, e, point):
    """T_k acting on (rho, u, w); k = 1, 2, 3 uses the cyclic relabeling of e."""
    e1, e2, e3 = [e[(k - 1 + j) % 3] for j in range(3)]
    rho, u, w = point
    d = u - e1
    u2 = (e1 * u + e2 * e3 - e1 * e3 - e1 * e2) / d
    rho2 = -(e1 - e2) * (e1 - e3) / d ** 2 * rho
    return rho2, u2, w


def _f_roots_mp(s, dps):
    with mpmath.workdps(dps):
        return [mpmath.mpc(r) for r in mpmath.polyroots([1, 0, _to_mp(s.a), _to_mp(s.b)],
                                                          maxsteps=200, extraprec=2 * dps)]


def double_points(s, k, e, dps=60):
    """(rho = 0, u, w = e_k) points where P_{e_k} has its double roots."""
    with mpmath.workdps(dps):
        w = e[k - 1]
        P = _float_poly(_to_mp(s.a), _to_mp(s.b), w)
        roots = _cluster(mpmath.polyroots(list(reversed(P)), maxsteps=400, extraprec=4 * dps), 1e-15)
        return [(mpmath.mpc(0), r, w) for r in roots]


def q_action_verify(s, samples=100, seed=0, dps=60, tol=1e-20):
    """Check T_1 preserves the surface, T_k^2 = id, T_1 T_2 = T_3 and w is fixed."""
    rng = random.Random(seed)
    with mpmath.workdps(dps):
        e = _f_roots_mp(s, dps)
        worst = {"surface": 0.0, "involution": 0.0, "composition": 0.0, "w_fixed": 0.0}
        witness = None
        for _ in range(samples):
            u = mpmath.mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))
            w = mpmath.mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))
            rho = mpmath.sqrt(s.rhs(u, w))
            pt = (rho, u, w)
            scale = max(abs(rho) ** 2, 1)
            for k in (1, 2, 3):
                im = t_action(k, e, pt)
                r = abs(im[0] ** 2 - s.rhs(im[1], im[2])) / max(abs(im[0]) ** 2, scale, 1)
                worst["surface"] = max(worst["surface"], float(r))
                back = t_action(k, e, im)
                inv = max(abs(back[j] - pt[j]) for j in range(3)) / max(abs(u), abs(rho), 1)
                worst["involution"] = max(worst["involution"], float(inv))
                worst["w_fixed"] = max(worst["w_fixed"], float(abs(im[2] - w)))
            c12 = t_action(1, e, t_action(2, e, pt))
            c3 = t_action(3, e, pt)
            comp = max(abs(c12[j] - c3[j]) for j in range(3)) / max(abs(u), abs(rho), 1)
            worst["composition"] = max(worst["composition"], float(comp))
            if witness is None and max(worst.values()) > tol:
                witness = {"u": complex(u), "w": complex(w)}
        dps_fixed = 0.0
        for dp in double_points(s, 1, e, dps):
            img = t_action(1, e, dp)
            dps_fixed = max(dps_fixed, float(abs(img[1] - dp[1])), float(abs(img[0])))
    ok = all(v < tol for v in worst.values())
    return {"ok": ok, "residuals": worst, "double_points_fixed": dps_fixed,
            "e": [complex(x) for x in e], "witness": witness, "samples": samples}


# ---------------------------------------------------------------- instanton corrections


def _bessel_sums(ag, theta, R, n_max=None, tail_eps=1e-16):
    V = 0j
    S = 0j
    n = 0
    r = abs(ag)
    while True:
        n += 1
        x = TWO_PI * R * n * r
        k0 = bessel_k(0, x)
        k1 = bessel_k(1, x)
        ph = cmath.exp(1j * n * theta)
        V += ph * k0
        S += ph * r * k1
        if n_max is not None and n >= n_max:
            break
        if n_max is None and max(k0, k1) < tail_eps * 1e-3:
            break
    return V, S


@dataclass
class InstantonCorrectionSample:
    q: int
    point: FiberPoint
    xi: complex
    form: np.ndarray

    def antisymmetry_defect(self):
        return float(np.abs(self.form + self.form.T).max())


def instanton_sample(q, pt, xi, R, omega_count=1, n_max=None):
    return InstantonCorrectionSample(q, pt, xi, omega_inst_eval(q, pt, xi, R, omega_count, n_max))


def omega_inst_eval(q, pt, xi, R, omega_count=1, n_max=None):
    """Instanton 2-form of gamma' = q gamma_e at a fiber point, in (x1, x2, x3, theta_m)."""
    if omega_count == 0:
        return np.zeros((4, 4), dtype=complex)
    a = pt.a
    if a == 0:
        raise SingularBaseError("a_gamma' vanishes")
    ag = q * a
    theta = q * pt.theta_e
    da = q * np.array([1, 1j, 0, 0])
    dab = q * np.array([1, -1j, 0, 0])
    dth = q * np.array([0, 0, TWO_PI * R, 0])
    dlog_y = math.pi * R * da / xi + 1j * dth + math.pi * R * xi * dab
    vs, ss = _bessel_sums(ag, theta, R, n_max)
    V = R * q * q / TWO_PI * vs
    A = -(R * q * q / (4 * math.pi)) * (da / ag - dab / ag.conjugate()) * ss
    bracket = math.pi * 1j * A + 0.5j * math.pi * V * (da / xi - xi * dab)
    return -omega_count / (4 * math.pi ** 2 * R) * wedge1(dlog_y, bracket)


def semiflat_twistor_form(pt, p, xi):
    """(1/8 pi^2 R) dlog X_e^sf ^ dlog X_m^sf from the central charges directly."""
    R = p.R
    _, _, tau = central_charges(pt, p)
    u = math.pi * R / xi
    v = math.pi * R * xi
    de = np.array([u + v, 1j * (u - v), 1j * TWO_PI * R, 0])
    dm = np.array([u * tau + v * tau.conjugate(), 1j * (u * tau - v * tau.conjugate()), 0, 1j])
    return wedge1(de, dm) / (8 * math.pi ** 2 * R)


def ov_twistor_form(pt, p, xi):
    """Twistor-normalized holomorphic form of the Ooguri-Vafa metric."""
    return TWISTOR_FORM_NORMALIZATION * holomorphic_form(pt, p, xi, "poisson")


def fit_lambda(a_ref, tau_ref, delta):
    """Lambda with tau(a_ref) = tau_ref for tau = (Delta / 2 pi i) log(a / Lambda)."""
    return a_ref * cmath.exp(-TWO_PI * 1j * tau_ref / delta)


def instanton_form_sum(pt, xi, R, charges, n_max=None):
    return sum(omega_inst_eval(q, pt, xi, R, om, n_max) for q, om in charges)


def fit_normalization(pt, p, xi, charges):
    """Least-squares kappa with kappa * (Omega^OV - Omega^sf) = summed instanton forms."""
    inst = ov_twistor_form(pt, p, xi) - semiflat_twistor_form(pt, p, xi)
    lem = instanton_form_sum(pt, xi, p.R, charges)
    x = inst.ravel()
    y = lem.ravel()
    return complex(np.vdot(x, y) / np.vdot(x, x))


LOCAL_SPECTRUM = {2: 1, -2: 1}
MIRROR_PRESET = {1: 2, -1: 2}


def local_compare(points, xis, R_values, include_minus=True, lam=1.0, ref=None, ref_R=1.0):
    """Compare kappa Omega^sf + sum_{+-gamma} Omega^inst with kappa Omega^OV (q_gamma = 2).

    kappa is fitted once at ``ref`` with radius ``ref_R`` and the first xi,
    where the instanton part is large enough to pin it down.
    """
    charges = [(2, 1), (-2, 1)] if include_minus else [(2, 1)]
    ref = ref or FiberPoint(complex(math.log(0.3), 0.5 - TWO_PI), 0.4, 0.1)
    lam = complex(lam)
    # identify local coordinates: Lambda from tau at the reference point
    p_true = OVParams(lam, R_values[0], LOCAL_SPECTRUM)
    lam_fit = fit_lambda(ref.a, central_charges(ref, p_true)[2], 4)
    p0 = OVParams(lam_fit, ref_R, LOCAL_SPECTRUM)
    kappa = fit_normalization(ref, p0, xis[0], charges)
    per_R = {}
    worst_all = 0.0
    rows = []
    for R in R_values:
        p = OVParams(lam_fit, R, LOCAL_SPECTRUM)
        worst = 0.0
        for pt in points:
            if distance_to_singular(pt, p) < 1e-12:
                raise SingularPointError("grid point on the singular set")
            for xi in xis:
                lhs = kappa * semiflat_twistor_form(pt, p, xi) + instanton_form_sum(pt, xi, R, charges)
                rhs = kappa * ov_twistor_form(pt, p, xi)
                d = float(np.abs(lhs - rhs).max() / np.abs(rhs).max())
                worst = max(worst, d)
                rows.append((R, pt.z.real, pt.z.imag, pt.theta_e, xi.real, xi.imag, d))
        per_R[R] = worst
        worst_all = max(worst_all, worst)
    mirror = OVParams(lam_fit, R_values[0], MIRROR_PRESET)
    return {"kappa": kappa, "lambda_fit": lam_fit, "max_discrepancy": worst_all,
            "per_R": per_R, "rows": rows,
            "mirror_preset": {"delta": mirror.delta, "singular_set": singular_set(mirror)},
            "include_minus_gamma": include_minus}
