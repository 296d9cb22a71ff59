"""Modified Bessel functions K_0, K_1 and the ray integral kernel.

Bessel evaluation uses three regimes:

* x < 2        ascending series in x^2/4 with the logarithmic part,
* 2 <= x < 25  trapezoidal rule on K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt,
               which converges geometrically in the step size,
* x >= 25      Hankel asymptotic expansion, at least 10 terms.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError, XiNearRayError

EULER_GAMMA = 0.57721566490153286061
EPS_XI = 1e-3

SERIES_MAX = 2.0
ASYMPTOTIC_MIN = 25.0
UNDERFLOW_X = 745.0


def _k_series(order, x):
    y = 0.25 * x * x
    lg = math.log(0.5 * x)
    if order == 0:
        term = 1.0
        harm = 0.0
        i0 = 1.0
        acc = 0.0
        k = 0
        while True:
            k += 1
            term *= y / (k * k)
            harm += 1.0 / k
            i0 += term
            acc += term * harm
            if term * max(harm, 1.0) < 1e-18 * abs(acc + i0):
                break
        return -(lg + EULER_GAMMA) * i0 + acc
    # order 1
    term = 0.5 * x
    i1 = term
    psi_sum = (1.0 - EULER_GAMMA) + (-EULER_GAMMA)  # psi(1) + psi(2)
    acc = psi_sum * term
    h1 = 0.0
    h2 = 1.0
    k = 0
    while True:
        k += 1
        term *= y / (k * (k + 1))
        h1 += 1.0 / k
        h2 += 1.0 / (k + 1)
        i1 += term
        contrib = (h1 + h2 - 2 * EULER_GAMMA) * term
        acc += contrib
        if abs(contrib) < 1e-18 * abs(acc) and term < 1e-18 * i1:
            break
    return 1.0 / x + lg * i1 - 0.5 * acc


def _k_trapezoid(order, x, h=0.125):
    # integrand exp(-x cosh t) cosh(nu t); stop when exp(-x (cosh t - 1)) < 1e-19
    tmax = math.acosh(1.0 + 44.0 / x)
    n = int(tmax / h) + 2
    t = np.arange(n + 1) * h
    f = np.exp(-x * (np.cosh(t) - 1.0))
    if order == 1:
        f = f * np.cosh(t)
    return h * (0.5 * f[0] + f[1:].sum()) * math.exp(-x)


def _k_asymptotic(order, x):
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        new = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if k > 10 and (abs(new) > abs(term) or abs(new) < 1e-17 * abs(total)):
            break
        term = new
        total += term
        if k > 60:
            break
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) * total


def bessel_k(order, x):
    """K_0 or K_1 at positive real x, relative error about 1e-14."""
    if order not in (0, 1):
        raise DomainError("only orders 0 and 1 are provided")
    x = float(x)
    if not x > 0:
        raise DomainError("bessel_k needs x > 0", x=x)
    if x < SERIES_MAX:
        return _k_series(order, x)
    if x < ASYMPTOTIC_MIN:
        return _k_trapezoid(order, x)
    if x > UNDERFLOW_X:
        return 0.0
    return _k_asymptotic(order, x)


def k0(x):
    return bessel_k(0, x)


def k1(x):
    return bessel_k(1, x)


def bessel_k_array(order, xs):
    xs = np.asarray(xs, dtype=float)
    return np.array([bessel_k(order, v) for v in xs.ravel()]).reshape(xs.shape)


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    tail_eps: float = 1e-16

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.tail_eps > 0):
            raise DomainError("quadrature tolerances must be positive")

    def scaled(self, factor):
        return QuadratureConfig(self.abs_tol * factor, self.rel_tol * factor,
                                self.max_subdivisions, self.tail_eps)


DEFAULT_QUAD = QuadratureConfig()

# 15-point Kronrod rule with embedded 7-point Gauss rule on [-1, 1]
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WKFULL = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (x_1, x_3, x_5, x_7=0)
_WGFULL = np.zeros(15)
_WGFULL[[1, 3, 5]] = _WG[:3]
_WGFULL[7] = _WG[3]
_WGFULL[[9, 11, 13]] = _WG[:3][::-1]


def _gk_panel(f, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    vals = f(c + h * _NODES)
    k = h * np.dot(_WKFULL, vals)
    g = h * np.dot(_WGFULL, vals)
    return k, abs(k - g)


def gauss_kronrod(f, a, b, cfg=DEFAULT_QUAD, breakpoints=()):
    """Adaptive G7-K15 integral of a vectorised f over [a, b]."""
    edges = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    panels = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        k, e = _gk_panel(f, lo, hi)
        panels.append((e, lo, hi, k))
    for _ in range(cfg.max_subdivisions):
        total = sum(p[3] for p in panels)
        err = sum(p[0] for p in panels)
        if err <= max(cfg.abs_tol, cfg.rel_tol * abs(total)):
            return total, err
        panels.sort(key=lambda p: p[0])
        e, lo, hi, _ = panels.pop()
        mid = 0.5 * (lo + hi)
        for l2, h2 in ((lo, mid), (mid, hi)):
            k, e2 = _gk_panel(f, l2, h2)
            panels.append((e2, l2, h2, k))
    raise QuadratureError("adaptive quadrature did not converge",
                          error=float(sum(p[0] for p in panels)))


def angular_distance(a, b):
    d = math.fmod(a - b, 2 * math.pi)
    if d > math.pi:
        d -= 2 * math.pi
    if d < -math.pi:
        d += 2 * math.pi
    return abs(d)


def ray_kernel_integral(f, phi, xi, cfg=DEFAULT_QUAD, eps_xi=EPS_XI):
    """int over xi' = e^{i phi} t, t in (0, inf) of dxi'/xi' (xi'+xi)/(xi'-xi) f(xi').

    ``f`` must accept a numpy array of complex points and decay at both
    ends of the ray.  The integral is taken in s = log t, with panels grown
    outward from the point nearest to xi until |integrand| < tail_eps.
    """
    xi = complex(xi)
    if xi != 0 and angular_distance(cmath.phase(xi), phi) < eps_xi:
        raise XiNearRayError("xi is too close to the integration ray",
                             phi=phi, arg_xi=cmath.phase(xi))
    e = cmath.exp(1j * phi)

    def integrand(s):
        w = e * np.exp(s)
        return (w + xi) / (w - xi) * f(w)

    s0 = math.log(abs(xi)) if xi != 0 and abs(xi) > 1e-300 else 0.0
    s0 = min(max(s0, -40.0), 40.0)
    lo, hi = s0 - 1.0, s0 + 1.0
    step = 1.0
    while abs(integrand(np.array([lo]))[0]) > cfg.tail_eps:
        lo -= step
        step *= 1.5
        if lo < -700:
            raise QuadratureError("integrand does not decay towards t = 0")
    step = 1.0
    while abs(integrand(np.array([hi]))[0]) > cfg.tail_eps:
        hi += step
        step *= 1.5
        if hi > 700:
            raise QuadratureError("integrand does not decay towards t = infinity")
    # scan a few interior points to avoid missing a bump between the ends
    bps = list(np.linspace(lo, hi, 9)[1:-1]) + [s0]
    re, _ = gauss_kronrod(lambda s: integrand(s).real, lo, hi, cfg, bps)
    im, _ = gauss_kronrod(lambda s: integrand(s).imag, lo, hi, cfg, bps)
    return complex(re, im)
