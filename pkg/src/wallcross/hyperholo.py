"""Hyperholomorphic connection data over the Ooguri-Vafa space.

The GMN connection is recovered numerically: at a point, A = i a (a real)
must make d log X_W + A a (1,0)-form for every sampled complex structure.
A one-form is (1,0) for the structure of Omega(xi) exactly when it kills
the kernel of Omega(xi), so each xi contributes four real linear equations
for the four components of a.
"""

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (ConfigError, DomainError, InconsistencyError, SingularBaseError,
                     SingularPointError)
from .numerics import DEFAULT_QUAD, angular_distance
from .ooguri_vafa import (FiberPoint, OVParams, distance_to_singular, holomorphic_form,
                          kahler_triple, tau_of, wedge2)
from .twistor import _fq_integral, _on_ray, fq_log_gradient, ray_phase, sheet_index, xsf_eval

TWO_PI = 2 * math.pi
RHO_MIN_FACTOR = 0.05
RESIDUAL_FAIL = 1e-3


def _symmetric_rational(omega):
    out = {}
    for q, v in omega.items():
        q = int(q)
        v = Fraction(v).limit_denominator(10 ** 9) if isinstance(v, float) else Fraction(v)
        if q == 0:
            raise ConfigError("omega_0 is not allowed")
        out[q] = v
    for q in list(out):
        if -q not in out:
            out[-q] = out[q]
        elif out[-q] != out[q]:
            raise ConfigError("omega must satisfy omega_q = omega_-q", q=q)
    return {q: v for q, v in out.items() if v}


@dataclass
class ConnectionParams:
    delta: Fraction
    omega: dict
    lambda1: complex = 1.0
    tail: tuple = ()
    host: OVParams = None
    nonholomorphic: complex = 0j   # coefficient of abar^2 added to W (diagnostics only)
    twisted: bool = field(init=False, default=False)

    def __post_init__(self):
        self.delta = Fraction(self.delta).limit_denominator(10 ** 9) \
            if isinstance(self.delta, float) else Fraction(self.delta)
        if (2 * self.delta).denominator != 1:
            raise ConfigError("delta must be an integer or a half integer")
        self.omega = _symmetric_rational(self.omega)
        total = sum(q * v for q, v in self.omega.items() if q > 0)
        if total != self.delta:
            raise ConfigError("delta must equal sum_{q>0} q omega_q",
                              delta=str(self.delta), sum=str(total))
        self.lambda1 = complex(self.lambda1)
        if self.lambda1 == 0:
            raise ConfigError("Lambda_1 must be nonzero")
        self.tail = tuple(complex(w) for w in self.tail)
        if self.host is None:
            self.host = OVParams(1.0, 1.0, {1: 1, -1: 1})
        self.twisted = self.delta.denominator == 2

    def exponent(self, q):
        """Power of F_q in X_W: omega_q for q > 0 and -omega_|q| for q < 0."""
        return self.omega.get(q, 0) if q > 0 else -self.omega.get(-q, 0)

    @property
    def n_omega(self):
        return sum(v for q, v in self.omega.items() if q > 0)

    @classmethod
    def from_json(cls, doc, host=None):
        lam = doc.get("lambda1", {"re": 1.0, "im": 0.0})
        tail = [complex(w["re"], w["im"]) if isinstance(w, dict) else complex(w)
                for w in doc.get("tail", [])]
        nh = doc.get("nonholomorphic", {"re": 0.0, "im": 0.0})
        return cls(Fraction(str(doc["delta"])), {int(k): Fraction(str(v)) for k, v in doc["omega"].items()},
                   complex(lam["re"], lam["im"]), tuple(tail), host, complex(nh["re"], nh["im"]))

    def to_json(self):
        return {"delta": str(self.delta),
                "omega": {str(q): str(v) for q, v in sorted(self.omega.items())},
                "lambda1": {"re": self.lambda1.real, "im": self.lambda1.imag},
                "tail": [{"re": w.real, "im": w.imag} for w in self.tail]}


def _pt(pt):
    return pt if isinstance(pt, FiberPoint) else FiberPoint(complex(pt))


def w_analytic(a, c):
    return sum(w * a ** (k + 2) for k, w in enumerate(c.tail))


def w_eval(pt, c, leading_only=False):
    """W = (delta/2 pi i)(a log(a/Lambda_1) - a) + W^analytic, log a taken from z."""
    pt = _pt(pt)
    if pt.z.real < -700:
        raise SingularBaseError("a = 0")
    a = pt.a
    d = float(c.delta)
    w0 = d / (2j * math.pi) * (a * (pt.z - cmath.log(c.lambda1)) - a)
    if leading_only:
        return w0
    return w0 + w_analytic(a, c) + c.nonholomorphic * a.conjugate() ** 2


def t_eval(pt, c):
    """t = dW/da; with the abar^2 diagnostic term this is dW/dx1."""
    pt = _pt(pt)
    a = pt.a
    t = float(c.delta) / (2j * math.pi) * (pt.z - cmath.log(c.lambda1))
    t += sum((k + 2) * w * a ** (k + 1) for k, w in enumerate(c.tail))
    return t + 2 * c.nonholomorphic * a.conjugate()


@dataclass
class SplitData:
    eta: float
    alpha: float
    t: complex
    tau: complex

    def reconstruct(self):
        return self.eta + self.tau * self.alpha


def eta_alpha_split(pt, c, t=None, tau=None):
    """Real (eta, alpha) with eta + tau alpha = t."""
    pt = _pt(pt)
    tau = tau_of(pt, c.host) if tau is None else tau
    if not tau.imag > 0:
        raise DomainError("Im tau must be positive")
    t = t_eval(pt, c) if t is None else t
    alpha = t.imag / tau.imag
    eta = t.real - tau.real * alpha
    return SplitData(eta, alpha, t, tau)


@dataclass
class ConnectionSample:
    point: FiberPoint
    components: np.ndarray   # complex, in (x1, x2, x3, theta_m); purely imaginary
    residual: float = 0.0

    def as_named(self, R):
        c = self.components
        a_comp = 0.5 * (c[0] - 1j * c[1])
        return {"a": a_comp, "abar": 0.5 * (c[0] + 1j * c[1]),
                "theta_e": c[2] / (TWO_PI * R), "theta_m": c[3]}


def semiflat_connection(pt, c):
    """A^sf = i(eta d theta_e + alpha d theta_m)."""
    pt = _pt(pt)
    s = eta_alpha_split(pt, c)
    R = c.host.R
    return ConnectionSample(pt, np.array([0, 0, 1j * s.eta * TWO_PI * R, 1j * s.alpha]))


def _shift(pt, dx):
    a = pt.a
    return FiberPoint(pt.z + cmath.log((a + complex(dx[0], dx[1])) / a),
                      pt.theta_e + dx[2], pt.theta_m + dx[3])


def curvature(conn_fn, pt, R, h=1e-5):
    """F = dA by central differences; conn_fn(point) -> components in x-coordinates."""
    steps = [h, h, h * TWO_PI * R, h]
    J = np.zeros((4, 4), dtype=complex)
    for k in range(4):
        d = np.zeros(4)
        d[k] = steps[k]
        J[k] = (conn_fn(_shift(pt, d)) - conn_fn(_shift(pt, -d))) / (2 * h)
    return J - J.T


def semiflat_curvature(pt, c, h=1e-5):
    return curvature(lambda q: semiflat_connection(q, c).components, _pt(pt), c.host.R, h)


def hat_t_connection_shift(pt, c):
    """Pull back of A^sf from the T-hat image minus A^sf, in x-coordinates.

    The fiber coordinate shifts by psi -> psi - delta theta_e + pi n_omega, so the
    difference must equal i delta d theta_e.
    """
    pt = _pt(pt)
    R = c.host.R
    img = pt.hat_t(c.host.delta)
    J = np.eye(4)
    J[3, 2] = c.host.delta * TWO_PI * R
    pulled = semiflat_connection(img, c).components @ J
    return pulled - semiflat_connection(pt, c).components


# ---------------------------------------------------------------- X_W


def _fq_power_exact(q, pt, xi, host, power, cfg):
    # power of F_q through its exponent, so rational powers follow the continuation
    expo = -_fq_integral(q, pt, xi, host, cfg, None) / (4j * math.pi)
    val = cmath.exp(float(power) * expo)
    m = sheet_index(pt, host)
    if m:
        xe = xsf_eval((1, 0), pt, xi, host) ** q
        val *= cmath.exp(-m * float(power) * cmath.log(1 - xe))
    return val


def xw_eval(pt, xi, c, psi=0.0, cfg=DEFAULT_QUAD, semiflat_only=False):
    """X_W = exp(pi R W/xi - i psi + pi R xi conj(W)) prod F_q^omega_q."""
    pt = _pt(pt)
    R = c.host.R
    w = w_eval(pt, c)
    val = cmath.exp(math.pi * R * w / xi - 1j * psi + math.pi * R * xi * w.conjugate())
    if semiflat_only:
        return val
    for q in sorted(c.omega):
        val *= _fq_power_exact(q, pt, xi, c.host, c.exponent(q), cfg)
    return val


def xw_split(pt, xi, c, psi=0.0, cfg=DEFAULT_QUAD):
    """(X_W^omega, X^analytic): X_m built with Omega_eff = omega_q/q, theta_m -> -psi."""
    pt = _pt(pt)
    R = c.host.R
    zm_eff = w_eval(pt, c, leading_only=True)
    xw_om = cmath.exp(math.pi * R * zm_eff / xi - 1j * psi + math.pi * R * xi * zm_eff.conjugate())
    for q in sorted(c.omega):
        om_eff = Fraction(c.omega[q], abs(q))   # symmetric in q
        xw_om *= _fq_power_exact(q, pt, xi, c.host, q * om_eff, cfg)
    wa = w_analytic(pt.a, c) + c.nonholomorphic * pt.a.conjugate() ** 2
    xan = cmath.exp(math.pi * R * wa / xi + math.pi * R * xi * wa.conjugate())
    return xw_om, xan


def xw_hat_t(pt, xi, c, psi=0.0, cfg=DEFAULT_QUAD):
    """X_W at the T-hat image of (point, psi)."""
    img = _pt(pt).hat_t(c.host.delta)
    psi2 = psi - float(c.delta) * pt.theta_e + math.pi * float(c.n_omega)
    return xw_eval(img, xi, c, psi2, cfg)


def dlog_xw(pt, xi, c, cfg=DEFAULT_QUAD, semiflat_only=False):
    """Gradient of log X_W in (x1, x2, x3, theta_m) at psi = 0."""
    pt = _pt(pt)
    R = c.host.R
    t = t_eval(pt, c)
    u = math.pi * R * t / xi
    v = math.pi * R * xi * t.conjugate()
    g = np.array([u + v, 1j * (u - v), 0, 0], dtype=complex)
    if c.nonholomorphic:
        # W has an abar^2 part: d/da gives the holomorphic t, d/dabar gives 2 eps abar
        th = t - 2 * c.nonholomorphic * pt.a.conjugate()
        wb = 2 * c.nonholomorphic * pt.a.conjugate()
        da = math.pi * R * th / xi + math.pi * R * xi * wb.conjugate()
        dab = math.pi * R * wb / xi + math.pi * R * xi * th.conjugate()
        g = np.array([da + dab, 1j * (da - dab), 0, 0], dtype=complex)
    if semiflat_only:
        return g
    for q in sorted(c.omega):
        g = g + float(c.exponent(q)) * fq_log_gradient(q, pt, xi, c.host, cfg)
    return g


# ---------------------------------------------------------------- GMN connection


def default_xi_samples(pt, host, extra=()):
    """Representatives of J_1 (xi = i), J_2 (xi = -1), J_3 (small |xi|), plus generic points,
    nudged off every active ray."""
    base = [1j, -1.0, 0.05 * cmath.exp(0.37j), 1.0, -1j, 0.5 * cmath.exp(0.7j),
            2.0 * cmath.exp(-2.1j)] + list(extra)
    rays = [ray_phase(q * pt.a) for q in host.spectrum]
    out = []
    for x in base:
        x = complex(x)
        for _ in range(20):
            if all(angular_distance(cmath.phase(x), ph) > 0.05 for ph in rays):
                break
            x *= cmath.exp(0.07j)
        out.append(x)
    return out


def _kernel_vectors(M):
    _, s, vh = np.linalg.svd(M)
    return vh[-2:].conj().T   # columns span the null space


def gmn_connection_solve(pt, c, xi_samples=None, cfg=DEFAULT_QUAD, semiflat=False,
                         rho_min=None, raise_on_residual=True):
    """Least-squares connection making X_W holomorphic in every sampled complex structure.

    ``semiflat=True`` drops every F_q and uses the semiflat Kahler triple.
    """
    pt = _pt(pt)
    host = c.host
    rho_min = RHO_MIN_FACTOR * abs(host.Lambda) if rho_min is None else rho_min
    if not semiflat and distance_to_singular(pt, host) < rho_min:
        raise SingularPointError("point inside the exclusion radius of a singular point",
                                 rho_min=rho_min)
    xis = xi_samples or default_xi_samples(pt, host)
    rows = []
    rhs = []
    scale = 0.0
    for xi in xis:
        M = holomorphic_form(pt, host, xi, "sf" if semiflat else "poisson")
        V = _kernel_vectors(M)
        beta = dlog_xw(pt, xi, c, cfg, semiflat_only=semiflat)
        scale = max(scale, float(np.max(np.abs(beta))))
        for k in range(2):
            v = V[:, k]
            # i a.v = -beta.v
            rows.append(np.real(1j * v))
            rows.append(np.imag(1j * v))
            b = -(beta @ v)
            rhs.extend([b.real, b.imag])
    A = np.array(rows)
    b = np.array(rhs)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.max(np.abs(A @ sol - b))) / max(scale, 1.0)
    if raise_on_residual and resid > RESIDUAL_FAIL:
        raise InconsistencyError("holomorphy conditions are inconsistent here", residual=resid)
    return ConnectionSample(pt, 1j * sol, resid)


def curvature_type_check(pt, c, h=1e-4, semiflat=False, cfg=DEFAULT_QUAD):
    """|F ^ Omega(xi)| / (|F| |Omega(xi)|) for J_1, J_2, J_3 (xi = i, -1, small)."""
    pt = _pt(pt)
    F = curvature(lambda q: gmn_connection_solve(q, c, cfg=cfg, semiflat=semiflat).components,
                  pt, c.host.R, h)
    out = {}
    for name, xi in (("J1", 1j), ("J2", -1.0), ("J3", 0.05 * cmath.exp(0.37j))):
        M = holomorphic_form(pt, c.host, xi, "sf" if semiflat else "poisson")
        denom = max(np.abs(F).max() * np.abs(M).max(), 1e-300)
        out[name] = float(abs(wedge2(F, M)) / denom)
    return out


# ---------------------------------------------------------------- mirror section


def lagrangian_section_check(c, a_points, h=1e-5):
    """max |pull-back of (1/2 pi) da ^ (d th_e^ + tau d th_m^)| over the graph (eta, alpha)."""
    worst = 0.0
    for a in a_points:
        pt = _pt(FiberPoint.from_a(a)) if not isinstance(a, FiberPoint) else a
        grads = []
        for d in ((h, 0), (0, h)):
            plus = eta_alpha_split(_shift(pt, (d[0], d[1], 0, 0)), c)
            minus = eta_alpha_split(_shift(pt, (-d[0], -d[1], 0, 0)), c)
            grads.append(((plus.eta - minus.eta) / (2 * h), (plus.alpha - minus.alpha) / (2 * h)))
        tau = tau_of(pt, c.host)
        b1 = grads[0][0] + tau * grads[0][1]
        b2 = grads[1][0] + tau * grads[1][1]
        # da ^ (b1 dx1 + b2 dx2) = (b2 - i b1) dx1 ^ dx2
        worst = max(worst, abs(b2 - 1j * b1) / TWO_PI)
    return worst


def kahler_forms(pt, c):
    return kahler_triple(pt, c.host)


def xw_jump(q, pt, xi_on_ray, c, cfg=DEFAULT_QUAD):
    """(measured, expected) ratio of X_W between the cw and ccw sides of l_{q gamma_e}."""
    pt = _pt(pt)
    phi = ray_phase(q * pt.a)
    if not _on_ray(phi, xi_on_ray):
        raise ConfigError("xi is not on the ray of q gamma_e")
    om = float(c.exponent(q))
    cw = cmath.exp(-om * _fq_integral(q, pt, xi_on_ray, c.host, cfg, "cw") / (4j * math.pi))
    ccw = cmath.exp(-om * _fq_integral(q, pt, xi_on_ray, c.host, cfg, "ccw") / (4j * math.pi))
    xe = xsf_eval((1, 0), pt, xi_on_ray, c.host) ** q
    return cw / ccw, cmath.exp(om * cmath.log(1 - xe))

