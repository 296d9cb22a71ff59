"""Twistor coordinates, the F_q factors, and integral-equation solvers.

Integral equations use the exponent -(1/4 pi i) Omega(g') <g', g> int ...,
so crossing a ray counterclockwise multiplies by the K-factor
X_g -> X_g (1 - X_g')^(-Omega(g') <g', g>).  With <gamma_e, gamma_m> = 1
this reproduces X_m = X_m^sf prod F_q^(q Omega_q).

"Side" limits on a ray: ``cw`` is the limit from the clockwise side,
``ccw`` from the counterclockwise side.  They are computed by rotating the
integration contour, which is exact because the integrand is analytic in
the half-plane around its ray.
"""

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .charges import DEFAULT_SIGMA, Charge, TorsorPoint, pair
from .errors import ConfigError, NoConvergenceError, WallError
from .numerics import DEFAULT_QUAD, angular_distance, ray_kernel_integral
from .ooguri_vafa import FiberPoint, central_charges

TWO_PI = 2 * math.pi
# (1/8 pi^2 R) dlog X_e ^ dlog X_m equals this multiple of Omega(xi) from the Kahler triple
TWISTOR_FORM_NORMALIZATION = -0.5
SIDE_ROTATION = 0.1


def ysf(Zval, theta, R, xi):
    return np.exp(math.pi * R * Zval / xi + 1j * theta + math.pi * R * np.conj(Zval) * xi)


def ray_phase(Zval):
    """Phase of the ray {xi : Z/xi in R_-}."""
    return cmath.phase(-Zval)


def _contour_phase(phi, side):
    if side is None:
        return phi
    if side == "cw":
        return phi + SIDE_ROTATION
    if side == "ccw":
        return phi - SIDE_ROTATION
    raise ConfigError("side must be None, 'cw' or 'ccw'")


def _on_ray(phi, xi, tol=1e-3):
    return angular_distance(cmath.phase(xi), phi) < tol


# ---------------------------------------------------------------- Ooguri-Vafa twistor coordinates


def xsf_eval(label, pt, xi, p, torsor_values=None):
    """Semiflat twistor coordinate for a charge q gamma_e + p gamma_m or a torsor point."""
    xi = complex(xi)
    if xi == 0:
        raise ConfigError("xi must be nonzero")
    ze, zm, _ = central_charges(pt, p)
    if isinstance(label, TorsorPoint):
        zi = (torsor_values or {})[label.vacuum]
        off = label.offset.coeffs
        zval = zi + off[0] * ze + off[1] * zm
        theta = off[0] * pt.theta_e + off[1] * pt.theta_m
        return complex(ysf(zval, theta, p.R, xi))
    q, m = label.coeffs if isinstance(label, Charge) else label
    return complex(ysf(q * ze + m * zm, q * pt.theta_e + m * pt.theta_m, p.R, xi))


def _fq_integral(q, pt, xi, p, cfg, side):
    a = pt.a
    phi = _contour_phase(ray_phase(q * a), side)
    R = p.R

    def f(w):
        return np.log1p(-np.exp(q * (math.pi * R * a / w + 1j * pt.theta_e
                                     + math.pi * R * a.conjugate() * w)))

    return ray_kernel_integral(f, phi, xi, cfg)


def sheet_index(pt, p):
    """m with Im z - 2 pi m in the fundamental domain [Im log Lambda - 2 pi, Im log Lambda)."""
    base = p.log_lambda.imag - TWO_PI
    return math.floor((pt.z.imag - base) / TWO_PI)


def fq_eval(q, pt, xi, p, cfg=DEFAULT_QUAD, side=None):
    """F_q(z, theta_e, xi), continued off the fundamental domain by quasi-periodicity."""
    if q == 0:
        raise ConfigError("F_q needs q != 0")
    xi = complex(xi)
    val = cmath.exp(-_fq_integral(q, pt, xi, p, cfg, side) / (4j * math.pi))
    m = sheet_index(pt, p)
    if m:
        xe = xsf_eval((1, 0), pt, xi, p)
        val *= (1 - xe ** q) ** (-m)
    return val


def dlog_xe(pt, xi, p):
    """Gradient of log X_e in (x1, x2, x3, theta_m)."""
    u = math.pi * p.R / xi
    v = math.pi * p.R * xi
    return np.array([u + v, 1j * (u - v), 1j * TWO_PI * p.R, 0])


def fq_log_gradient(q, pt, xi, p, cfg=DEFAULT_QUAD):
    """Gradient of log F_q in (x1, x2, x3, theta_m), differentiating under the integral."""
    xi = complex(xi)
    a = pt.a
    R = p.R
    phi = ray_phase(q * a)

    def weight(w):
        x = np.exp(q * (math.pi * R * a / w + 1j * pt.theta_e + math.pi * R * a.conjugate() * w))
        return -q * x / (1 - x)

    d_a = ray_kernel_integral(lambda w: weight(w) * math.pi * R / w, phi, xi, cfg)
    d_ab = ray_kernel_integral(lambda w: weight(w) * math.pi * R * w, phi, xi, cfg)
    d_th = ray_kernel_integral(lambda w: weight(w) * 1j, phi, xi, cfg)
    grad_int = np.array([d_a + d_ab, 1j * (d_a - d_ab), d_th * TWO_PI * R, 0])
    out = -grad_int / (4j * math.pi)
    m = sheet_index(pt, p)
    if m:
        x = xsf_eval((1, 0), pt, xi, p) ** q
        out = out - m * (-q * x / (1 - x)) * dlog_xe(pt, xi, p)
    return out


def fq_side_limit_richardson(q, pt, xi, p, side, eps=(0.016, 0.008, 0.004, 0.002), cfg=DEFAULT_QUAD):
    """Limit of F_q towards a point on its ray by polynomial extrapolation in the angle."""
    sgn = -1.0 if side == "cw" else 1.0
    vals = [fq_eval(q, pt, xi * cmath.exp(1j * sgn * e), p, cfg) for e in eps]
    e = np.array(eps)
    V = np.vander(e, len(e))
    coef = np.linalg.solve(V, np.array(vals))
    return complex(coef[-1])


def xm_eval(pt, xi, p, cfg=DEFAULT_QUAD, side=None):
    """X_m = X_m^sf prod_q F_q^(q Omega_q).  ``side`` applies to factors whose ray holds xi."""
    val = xsf_eval((0, 1), pt, xi, p)
    for q, om in sorted(p.spectrum.items()):
        s = side if side and _on_ray(ray_phase(q * pt.a), xi) else None
        val *= fq_eval(q, pt, xi, p, cfg, s) ** (q * om)
    return val


def _shift(pt, dx):
    a = pt.a
    a2 = a + complex(dx[0], dx[1])
    return FiberPoint(pt.z + cmath.log(a2 / a), pt.theta_e + dx[2], pt.theta_m + dx[3])


def twistor_two_form(pt, p, xi, h=1e-4, cfg=DEFAULT_QUAD):
    """(1/8 pi^2 R) dlog X_e ^ dlog X_m in (x1, x2, x3, theta_m) by central differences."""
    tight = cfg.scaled(1e-2)
    steps = [h, h, h * TWO_PI * p.R, h]
    grads = []
    for fn in (lambda q_: xsf_eval((1, 0), q_, xi, p), lambda q_: xm_eval(q_, xi, p, tight)):
        g = np.zeros(4, dtype=complex)
        for k in range(4):
            d = np.zeros(4)
            d[k] = steps[k]
            # fourth order stencil on log ratios
            f1 = cmath.log(fn(_shift(pt, d)) / fn(_shift(pt, -d)))
            f2 = cmath.log(fn(_shift(pt, 2 * d)) / fn(_shift(pt, -2 * d)))
            g[k] = (8 * f1 - f2) / (12 * h)
        grads.append(g)
    de, dm = grads
    return (np.outer(de, dm) - np.outer(dm, de)) / (8 * math.pi ** 2 * p.R)


# ---------------------------------------------------------------- general TBA


@dataclass
class TBAConfig:
    tol: float = 1e-10
    max_iter: int = 50
    step: float = 0.02
    decay: float = 37.0
    growth_limit: int = 3
    quad: object = DEFAULT_QUAD


@dataclass
class TBAProblem:
    """Spectrum {Charge: Omega}, central charge (callable on labels), angles per basis element."""

    omega: dict
    Z: object
    theta: tuple
    R: float

    def __post_init__(self):
        self.omega = {g: int(v) for g, v in self.omega.items() if v}
        if not self.R > 0:
            raise ConfigError("R must be positive")

    def theta_of(self, g):
        return sum(c * t for c, t in zip(g.coeffs, self.theta))

    def y_sf(self, g, xi):
        return ysf(self.Z(g), self.theta_of(g), self.R, xi)


def _ray_nodes(Zval, R, cfg):
    # |Y^sf| = exp(-pi R |Z| (t + 1/t)) on the ray; keep t + 1/t <= decay/(pi R |Z|)
    c = cfg.decay / (math.pi * R * abs(Zval))
    smax = math.acosh(max(c, 1.0) / 2.0) if c > 2 else 0.5
    n = max(int(math.ceil(smax / cfg.step)), 8)
    s = np.arange(-n, n + 1) * cfg.step
    phi = ray_phase(Zval)
    return phi, s, -(Zval / abs(Zval)) * np.exp(s)


def _kernel(xi_src, xi_tgt):
    return (xi_src[None, :] + xi_tgt[:, None]) / (xi_src[None, :] - xi_tgt[:, None])


class TBASolution:
    def __init__(self, problem, cfg, rays, values, history, iterations):
        self.problem = problem
        self.cfg = cfg
        self.rays = rays          # {g: (phi, s, xi)}
        self.values = values      # {g: Y on nodes}
        self.history = history
        self.iterations = iterations
        self.conjectural_uniqueness = True

    def _coupled(self, g):
        pr = self.problem
        return [(gp, pr.omega[gp] * pair(gp, g)) for gp in self.rays if pr.omega[gp] * pair(gp, g)]

    def y_on_ray(self, gp, w):
        """Nystrom interpolation of Y_{g'} at points w on (or near) its own ray."""
        pr = self.problem
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        expo = np.zeros(w.shape, dtype=complex)
        for gs, c in self._coupled(gp):
            _, _, xs = self.rays[gs]
            L = np.log1p(-self.values[gs])
            expo += c * (_kernel(xs, w) @ L) * self.cfg.step
        return pr.y_sf(gp, w) * np.exp(-expo / (4j * math.pi))

    def evaluate(self, g, xi, side=None):
        """Y_g(xi) for any charge g, by adaptive ray integrals of the converged data."""
        pr = self.problem
        xi = complex(xi)
        expo = 0j
        for gp, c in self._coupled(g):
            phi = self.rays[gp][0]
            s = side if side and _on_ray(phi, xi) else None
            f = (lambda w, gp=gp: np.log1p(-self.y_on_ray(gp, w)))
            expo += c * ray_kernel_integral(f, _contour_phase(phi, s), xi, self.cfg.quad)
        return complex(pr.y_sf(g, xi) * cmath.exp(-expo / (4j * math.pi)))

    def jump(self, g, xi):
        """Measured ratio Y_g(ccw side) / Y_g(cw side) at a point of a ray."""
        return self.evaluate(g, xi, "ccw") / self.evaluate(g, xi, "cw")

    def expected_jump(self, g, xi):
        """K-factors of every ray through xi, evaluated on the measured Y values."""
        out = 1 + 0j
        for gp, c in self._coupled(g):
            if _on_ray(self.rays[gp][0], xi):
                out *= (1 - self.evaluate(gp, xi)) ** (-c)
        return out

    def to_rows(self):
        rows = []
        for g in sorted(self.rays, key=lambda c: c.coeffs):
            phi, s, _ = self.rays[g]
            for sk, y in zip(s, self.values[g]):
                rows.append((list(g.coeffs), phi, float(math.exp(sk)), y.real, y.imag))
        return rows


def tba_solve(problem, cfg=None):
    """Plain Picard iteration on the ray nodes, starting from Y^sf."""
    cfg = cfg or TBAConfig()
    pr = problem
    rays = {g: _ray_nodes(pr.Z(g), pr.R, cfg) for g in pr.omega}
    for g in rays:
        for h in rays:
            if g != h and pair(g, h) and abs(rays[g][0] - rays[h][0]) < 1e-9:
                raise WallError("mutually nonlocal charges share a ray", a=g.coeffs, b=h.coeffs)
    kern = {}
    coupling = {}
    for g in rays:
        coupling[g] = [(h, pr.omega[h] * pair(h, g)) for h in rays if pr.omega[h] * pair(h, g)]
        for h, _ in coupling[g]:
            kern[(g, h)] = _kernel(rays[h][2], rays[g][2]) * cfg.step
    base = {g: pr.y_sf(g, rays[g][2]) for g in rays}
    cur = dict(base)
    history = []
    growth = 0
    for it in range(1, cfg.max_iter + 1):
        for g, y in cur.items():
            if np.any(np.abs(y) >= 1):
                raise NoConvergenceError("|Y| >= 1 on a ray; log branch undefined", charge=g.coeffs)
        logs = {g: np.log1p(-y) for g, y in cur.items()}
        new = {}
        for g in rays:
            expo = np.zeros(len(rays[g][1]), dtype=complex)
            for h, c in coupling[g]:
                expo += c * (kern[(g, h)] @ logs[h])
            new[g] = base[g] * np.exp(-expo / (4j * math.pi))
        res = max((float(np.max(np.abs(new[g] - cur[g]) / np.abs(cur[g]))) for g in rays), default=0.0)
        history.append(res)
        cur = new
        if res < cfg.tol:
            return TBASolution(pr, cfg, rays, cur, history, it)
        if len(history) > 1 and res > history[-2]:
            growth += 1
            if growth >= cfg.growth_limit:
                raise NoConvergenceError("TBA residual grew three times in a row", history=history)
        else:
            growth = 0
    raise NoConvergenceError("TBA did not reach tolerance", history=history)


def ov_problem(pt, p):
    """TBA instance for the Ooguri-Vafa spectrum at a fiber point."""
    ze, zm, _ = central_charges(pt, p)
    from .wallcrossing import CentralCharge
    omega = {Charge((q, 0)): v for q, v in p.spectrum.items()}
    return TBAProblem(omega, CentralCharge((ze, zm)), (pt.theta_e, pt.theta_m), p.R)


# ---------------------------------------------------------------- Riemann-Hilbert sectors


@dataclass
class RaySpec:
    phase: float
    charges: list  # [(Charge, Omega)]


@dataclass
class RHSectors:
    rays: list
    sectors: list = field(default_factory=list)  # [(start_phase, end_phase)]

    def transition_exponents(self, ray, target):
        """{charge g: exponent e} so that crossing ccw sends X_t -> X_t prod (1 - X_g)^e."""
        return {g: -om * pair(g, target) for g, om in ray.charges if om * pair(g, target)}

    def numeric_transition(self, ray, target, values):
        """Factor multiplying X_target when crossing ``ray`` counterclockwise; values: {g: X_g}."""
        out = 1 + 0j
        for g, e in self.transition_exponents(ray, target).items():
            out *= (1 - values[g]) ** e
        return out


def rh_sectors(Z, omega):
    """Rays of a BPS spectrum sorted by phase, and the sectors between them."""
    rays = {}
    for g, om in omega.items():
        if om:
            ph = ray_phase(Z(g))
            key = next((k for k in rays if abs(k - ph) < 1e-9), ph)
            rays.setdefault(key, []).append((g, om))
    out = []
    for ph in sorted(rays):
        grp = rays[ph]
        for g, _ in grp:
            for h, _ in grp:
                if pair(g, h):
                    raise WallError("coincident rays of mutually nonlocal charges",
                                    a=g.coeffs, b=h.coeffs)
        out.append(RaySpec(ph, sorted(grp, key=lambda x: x[0].coeffs)))
    res = RHSectors(out)
    if not out:
        res.sectors = [(-math.pi, math.pi)]
    else:
        ph = [r.phase for r in out]
        res.sectors = [(ph[k], ph[(k + 1) % len(ph)] + (TWO_PI if k + 1 == len(ph) else 0))
                       for k in range(len(ph))]
    return res


def _poly_mul(A, B, keep):
    out = {}
    for ka, va in A.items():
        for kb, vb in B.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            if keep(k):
                out[k] = out.get(k, 0) + va * vb
    return {k: v for k, v in out.items() if v}


def _binom_series(g, e, keep):
    # (1 - x^g)^e = sum_k C(e, k) (-1)^k x^{k g}
    out = {tuple(0 for _ in g): Fraction(1)}
    c = Fraction(1)
    k = 0
    while True:
        k += 1
        c = c * (e - k + 1) / k
        if c == 0:
            break
        key = tuple(k * x for x in g)
        if not keep(key):
            break
        out[key] = c * (-1) ** k
    return out


def compose_full_circle(rh, target, degree_of, max_degree):
    """Transport X_target once around xi = 0 (commutative series), phases ascending.

    Returns {coeffs: Fraction}.  ``degree_of`` measures exponent vectors.
    """
    # later factors can pull high-degree terms back down, so expand with slack
    slack = sum(degree_of(g.coeffs) * abs(om) * (abs(pair(g, target)) + 1)
                for ray in rh.rays for g, om in ray.charges)
    work = max_degree + slack
    keep = lambda k: degree_of(k) <= work  # noqa: E731
    cur = {target.coeffs: Fraction(1)}
    # operator product F_1 ... F_n acts with the largest phase first
    for ray in reversed(rh.rays):
        nxt = {}
        for mono, c in cur.items():
            t = Charge(mono, target.ctx)
            fac = {mono: c}
            for g, e in rh.transition_exponents(ray, t).items():
                fac = _poly_mul(fac, _binom_series(g.coeffs, e, keep), keep)
            for k, v in fac.items():
                nxt[k] = nxt.get(k, 0) + v
        cur = {k: v for k, v in nxt.items() if v}
    return {k: v for k, v in cur.items() if degree_of(k) <= max_degree}


# ---------------------------------------------------------------- 2d-4d sections


@dataclass
class SectionProblem:
    """Vacua with central charges, omega(g, gamma_i), mu(gamma_ij), and a Y provider."""

    vacua: tuple
    Z: object                   # CentralCharge with torsor values
    R: float
    omega_torsor: dict          # {(Charge, i): rational}
    mu: dict                    # {RelativeCharge: int}
    y_provider: object = None   # callable (g, w array) -> Y_g on g's ray; w on l_g
    sigma: object = DEFAULT_SIGMA


def _torsor_ysf(pr, i, xi):
    zi = pr.Z(TorsorPoint(i, _zero(pr)))
    return np.exp(math.pi * pr.R * zi / xi + math.pi * pr.R * np.conj(zi) * xi)


def _zero(pr):
    return Charge(tuple(0 for _ in pr.Z.basis_values))


def x_section(pr, i, xi, cfg=DEFAULT_QUAD, side=None):
    """x_{gamma_i}(xi) = Y^sf_{gamma_i} exp[-(1/4 pi i) sum omega(g, gamma_i) int ...]."""
    xi = complex(xi)
    expo = 0j
    for (g, vac), w in sorted(pr.omega_torsor.items(), key=lambda kv: (kv[0][0].coeffs, kv[0][1])):
        if vac != i or not w:
            continue
        phi = ray_phase(pr.Z(g))
        s = side if side and _on_ray(phi, xi) else None
        f = (lambda ws, g=g: np.log1p(-pr.y_provider(g, ws)))
        expo += float(w) * ray_kernel_integral(f, _contour_phase(phi, s), xi, cfg)
    return complex(_torsor_ysf(pr, i, xi) * cmath.exp(-expo / (4j * math.pi)))


class SectionSolution:
    def __init__(self, problem, cfg, quad, rays, g_nodes, x_nodes, history):
        self.problem = problem
        self.cfg = cfg
        self.quad = quad
        self.rays = rays            # {RelativeCharge: (phi, s, xi)}
        self.g_nodes = g_nodes      # {(vacuum, RelativeCharge): vector over vacua on nodes}
        self.x_nodes = x_nodes      # {RelativeCharge: x_{gamma_li} on its nodes}
        self.history = history
        self.index = {v: k for k, v in enumerate(problem.vacua)}

    def _sources(self, i):
        return [(r, self.problem.mu[r]) for r in self.rays if r.j == i]

    def g_nystrom(self, i, w):
        """g_i at points w away from its own source rays, by the node rule."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        out = np.zeros((len(self.problem.vacua), len(w)), dtype=complex)
        out[self.index[i]] = 1
        for r, mu in self._sources(i):
            src = self.g_nodes[(r.i, r)] * self.x_nodes[r][None, :]
            K = _kernel(self.rays[r][2], w) * self.cfg.step
            out -= mu * (src @ K.T) / (4j * math.pi)
        return out

    def x_relative(self, r, w):
        pr = self.problem
        sig = pr.sigma(r, TorsorPoint(r.j, _zero(pr)))
        return np.array([x_section(pr, r.i, v, self.quad) / x_section(pr, r.j, v, self.quad)
                         for v in np.atleast_1d(w)]) / sig

    def g_eval(self, i, xi, side=None):
        """g_i(xi) as a vector over vacua."""
        pr = self.problem
        xi = complex(xi)
        out = np.zeros(len(pr.vacua), dtype=complex)
        out[self.index[i]] = 1
        for r, mu in self._sources(i):
            phi = self.rays[r][0]
            ss = side if side and _on_ray(phi, xi) else None
            for comp in range(len(pr.vacua)):
                def f(w, r=r, comp=comp):
                    return self.g_nystrom(r.i, w)[comp] * self.x_relative(r, w)
                out[comp] -= mu * ray_kernel_integral(f, _contour_phase(phi, ss), xi,
                                                      self.quad) / (4j * math.pi)
        return out

    def y_eval(self, i, xi, side=None):
        return self.g_eval(i, xi, side) * x_section(self.problem, i, xi, self.quad, side)

    def jump(self, r, i_target, xi):
        """Measured change of Y_{gamma_target} across the ray of r (ccw minus cw)."""
        return self.y_eval(i_target, xi, "ccw") - self.y_eval(i_target, xi, "cw")

    def expected_jump(self, r, i_target, xi):
        """S-factor X_{gamma_j} -> X_{gamma_j} - mu sigma(gamma_ij, gamma_j) X_{gamma_i}, numerically."""
        pr = self.problem
        out = np.zeros(len(pr.vacua), dtype=complex)
        if r.j != i_target:
            return out
        sig = pr.sigma(r, TorsorPoint(r.j, _zero(pr)))
        return -pr.mu[r] * sig * self.y_eval(r.i, xi)


def sections_solve(pr, cfg=None, quad=DEFAULT_QUAD):
    """Fixed point for g_i on the nodes of every mu-ray, then Y_{gamma_i} = g_i x_{gamma_i}."""
    cfg = cfg or TBAConfig()
    vac = list(pr.vacua)
    idx = {v: k for k, v in enumerate(vac)}
    rays = {}
    x_nodes = {}
    for r, mu in pr.mu.items():
        if not mu:
            continue
        zr = pr.Z(r)
        rays[r] = _ray_nodes(zr, pr.R, cfg)
        xs = rays[r][2]
        sig = pr.sigma(r, TorsorPoint(r.j, _zero(pr)))
        xi_vals = np.array([x_section(pr, r.i, w, quad) for w in xs])
        xj_vals = np.array([x_section(pr, r.j, w, quad) for w in xs])
        x_nodes[r] = xi_vals / xj_vals / sig
    n_vac = len(vac)
    # g_l is needed on the nodes of each ray r = gamma_li (l = r.i)
    g_nodes = {}
    for r in rays:
        v = np.zeros((n_vac, len(rays[r][1])), dtype=complex)
        v[idx[r.i]] = 1
        g_nodes[(r.i, r)] = v
    history = []
    for it in range(1, cfg.max_iter + 1):
        new = {}
        for (l, r) in g_nodes:
            xs_t = rays[r][2]
            v = np.zeros((n_vac, len(xs_t)), dtype=complex)
            v[idx[l]] = 1
            for r2, mu in pr.mu.items():
                if r2 not in rays or r2.j != l:
                    continue
                xs_s = rays[r2][2]
                if r2 == r or abs(rays[r2][0] - rays[r][0]) < 1e-9:
                    raise WallError("a relative charge ray feeds itself", ray=str(r2))
                src = g_nodes[(r2.i, r2)] * x_nodes[r2][None, :]
                K = _kernel(xs_s, xs_t) * cfg.step
                v -= mu * (src @ K.T) / (4j * math.pi)
            new[(l, r)] = v
        res = max((float(np.max(np.abs(new[k] - g_nodes[k]))) for k in g_nodes), default=0.0)
        history.append(res)
        g_nodes = new
        if res < cfg.tol:
            return SectionSolution(pr, cfg, quad, rays, g_nodes, x_nodes, history)
        if len(history) > 3 and all(history[-k] > history[-k - 1] for k in (1, 2, 3)):
            raise NoConvergenceError("section iteration diverges", history=history)
    raise NoConvergenceError("section iteration did not converge", history=history)
