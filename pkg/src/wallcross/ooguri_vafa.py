"""Ooguri-Vafa space: central charges, harmonic potential, connection, metrics.

Coordinates: the base point is stored as z on the universal cover of the
punctured disk (a = e^z, and log a is always z).  Tensors are expressed in
(x1, x2, x3, theta_m) with x1 + i x2 = a and x3 = theta_e / (2 pi R).

The instanton part of the potential is

    U_q^inst = (R / 2 pi) sum_{n != 0} e^{i n q theta_e} K_0(2 pi R |n q a|),

which is what Poisson summation of the lattice form gives and what the
stated instanton connection requires through dA = *dU.
"""

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (ConfigError, ConstraintError, DomainError, NotPositiveDefiniteError,
                     SingularBaseError, SingularPointError)
from .numerics import DEFAULT_QUAD, bessel_k

TWO_PI = 2 * math.pi
SINGULAR_TOL = 1e-12


def symmetric_spectrum(positive):
    """{q: Omega_q} for q > 0 -> the symmetric map over +-q."""
    out = {}
    for q, om in positive.items():
        q = int(q)
        if q <= 0:
            raise ConfigError("symmetric_spectrum takes positive charges")
        out[q] = int(om)
        out[-q] = int(om)
    return out


@dataclass
class OVParams:
    Lambda: complex = 1.0
    R: float = 1.0
    spectrum: dict = field(default_factory=dict)
    tau0: complex = None

    def __post_init__(self):
        self.Lambda = complex(self.Lambda)
        self.R = float(self.R)
        if self.Lambda == 0:
            raise ConfigError("Lambda must be nonzero")
        if not self.R > 0:
            raise ConfigError("R must be positive")
        spec = {int(q): int(v) for q, v in self.spectrum.items() if int(v) != 0}
        if 0 in spec:
            raise ConfigError("Omega_0 is not part of the spectrum")
        for q, v in spec.items():
            if spec.get(-q, 0) != v:
                raise ConfigError("spectrum must satisfy Omega_q = Omega_-q", q=q)
        self.spectrum = spec
        if self.delta == 0:
            if self.tau0 is None or complex(self.tau0).imag <= 0:
                raise ConfigError("Delta = 0 needs tau0 with positive imaginary part")
            self.tau0 = complex(self.tau0)

    @property
    def delta(self):
        return sum(q * q * v for q, v in self.spectrum.items() if q > 0)

    @property
    def log_lambda(self):
        return cmath.log(self.Lambda)

    def positive(self):
        return sorted((q, v) for q, v in self.spectrum.items() if q > 0)

    def to_json(self):
        doc = {"lambda": {"re": self.Lambda.real, "im": self.Lambda.imag}, "R": self.R,
               "spectrum": {str(q): v for q, v in sorted(self.spectrum.items())}}
        if self.tau0 is not None:
            doc["tau0"] = {"re": self.tau0.real, "im": self.tau0.imag}
        return doc

    @classmethod
    def from_json(cls, doc):
        lam = doc.get("lambda", {"re": 1.0, "im": 0.0})
        tau0 = doc.get("tau0")
        return cls(complex(lam["re"], lam["im"]), doc["R"],
                   {int(k): v for k, v in doc.get("spectrum", {}).items()},
                   None if tau0 is None else complex(tau0["re"], tau0["im"]))


@dataclass(frozen=True)
class FiberPoint:
    z: complex
    theta_e: float = 0.0
    theta_m: float = 0.0

    @property
    def a(self):
        return cmath.exp(self.z)

    @classmethod
    def from_a(cls, a, theta_e=0.0, theta_m=0.0):
        return cls(cmath.log(a), theta_e, theta_m)

    def hat_t(self, delta, k=1):
        """Monodromy (z, te, tm) -> (z + 2 pi i, te, tm + Delta te + pi Delta), k times."""
        return FiberPoint(self.z + 2j * math.pi * k, self.theta_e,
                          self.theta_m + k * (delta * self.theta_e + math.pi * delta))

    def coords(self, R):
        a = self.a
        return np.array([a.real, a.imag, self.theta_e / (TWO_PI * R), self.theta_m])


def _as_point(pt):
    if isinstance(pt, FiberPoint):
        return pt
    return FiberPoint(complex(pt))


def log_ratio(pt, p):
    """log(a / Lambda) on the cover: z - log Lambda."""
    return _as_point(pt).z - p.log_lambda


def central_charges(pt, p):
    """(Z_e, Z_m, tau) at a cover point."""
    pt = _as_point(pt)
    if pt.z.real >= math.log(abs(p.Lambda)):
        raise DomainError("|a| must be smaller than |Lambda|")
    if pt.z.real < -700:
        raise SingularBaseError("a = 0 is the singular fiber")
    a = pt.a
    if p.delta == 0:
        return a, p.tau0 * a, p.tau0
    L = log_ratio(pt, p)
    c = p.delta / (2j * math.pi)
    return a, c * (a * L - a), c * L


def tau_of(pt, p):
    return central_charges(pt, p)[2]


# ---------------------------------------------------------------- potential


def distance_to_singular(pt, p):
    """Distance in (x1, x2, x3) from the point to the nearest s_{n,q}."""
    pt = _as_point(pt)
    r = abs(pt.a)
    best = math.inf
    for q, _ in p.positive():
        step = TWO_PI / q
        th = pt.theta_e - step * round(pt.theta_e / step)
        best = min(best, math.hypot(r, th / (TWO_PI * p.R)))
    return best


def _check_regular(pt, p):
    if distance_to_singular(pt, p) < SINGULAR_TOL:
        raise SingularPointError("point lies on the singular set")


def _inst_sums(r, theta, q, R, tail_eps):
    """sum_{n>0} of cos(nq th) K0, nq sin(nq th) K0, cos(nq th) K1 * beta_n, sin(nq th) K1."""
    c0 = s0 = c1 = s1 = 0.0
    n = 0
    while True:
        n += 1
        beta = TWO_PI * R * n * q
        x = beta * r
        kk0 = bessel_k(0, x)
        kk1 = bessel_k(1, x)
        c0 += math.cos(n * q * theta) * kk0
        s0 += n * q * math.sin(n * q * theta) * kk0
        c1 += math.cos(n * q * theta) * kk1 * beta
        s1 += math.sin(n * q * theta) * kk1
        if max(kk0, kk1) * (1 + beta) < tail_eps:
            return c0, s0, c1, s1
        if n > 100000:
            raise DomainError("instanton sum did not converge")


def potential_u(pt, p, mode="poisson", n_max=10000, cfg=DEFAULT_QUAD):
    """Harmonic potential U in mode 'sf', 'poisson' or 'lattice'.

    Mode 'instanton' returns U - U^sf from the Bessel sums alone, which
    avoids cancellation when the correction is far below U itself.
    """
    pt = _as_point(pt)
    if p.delta <= 0:
        raise ConfigError("the potential needs Delta > 0")
    tau = tau_of(pt, p)
    if mode == "sf":
        return p.R * tau.imag
    _check_regular(pt, p)
    if mode in ("poisson", "instanton"):
        r = abs(pt.a)
        total = p.R * tau.imag if mode == "poisson" else 0.0
        for q, om in p.positive():
            c0 = _inst_sums(r, pt.theta_e, q, p.R, cfg.tail_eps)[0]
            total += q * q * om * (p.R / math.pi) * c0
        return total
    if mode == "lattice":
        return sum(q * q * om * lattice_uq(pt, p, q, n_max)
                   for q, om in p.positive())
    raise ConfigError("unknown potential mode %r" % mode)


def potential_uq_poisson(pt, p, q, cfg=DEFAULT_QUAD):
    pt = _as_point(pt)
    r = abs(pt.a)
    sf = -(p.R / TWO_PI) * math.log(r / abs(p.Lambda))
    return sf + (p.R / math.pi) * _inst_sums(r, pt.theta_e, q, p.R, cfg.tail_eps)[0]


def _lattice_raw(r, theta, q, R, n_max):
    """4 pi U_q without kappa_0, and its (d/dr, d/dtheta) derivatives."""
    c = q * r
    x = q * theta / TWO_PI
    n = np.arange(1, n_max + 1, dtype=float)
    fp = 1.0 / np.sqrt(c * c + ((x + n) / R) ** 2)
    fm = 1.0 / np.sqrt(c * c + ((x - n) / R) ** 2)
    f0 = 1.0 / math.sqrt(c * c + (x / R) ** 2)
    val = f0 + np.sum(fp - R / n) + np.sum(fm - R / n)
    dc = -c * (f0 ** 3 + np.sum(fp ** 3) + np.sum(fm ** 3))
    dx = -(x * f0 ** 3 + np.sum((x + n) * fp ** 3) + np.sum((x - n) * fm ** 3)) / (R * R)
    # midpoint tail estimate for |n| > n_max
    A = n_max + 0.5
    for u, sgn in ((x + A, 1.0), (A - x, -1.0)):
        w = u / (R * c)
        sq = math.sqrt(1 + w * w)
        val += R * (math.log(2.0 / (R * c)) - math.asinh(w) + math.log(A))
        dc += -R / c + u / (c * c * sq)
        dx += -sgn / (c * sq)
    return val, dc * q, dx * q / TWO_PI


@lru_cache(maxsize=256)
def _kappa0(q, R, lam_abs, n_max):
    ref = FiberPoint(complex(math.log(0.5 * lam_abs), 0.3), 1.0)
    raw = _lattice_raw(abs(ref.a), ref.theta_e, q, R, n_max)[0]
    r = abs(ref.a)
    sf = -(R / TWO_PI) * math.log(r / lam_abs)
    inst = (R / math.pi) * _inst_sums(r, ref.theta_e, q, R, DEFAULT_QUAD.tail_eps)[0]
    return raw - 4 * math.pi * (sf + inst)


def lattice_uq(pt, p, q, n_max=10000):
    """U_q from the regularized lattice sum, kappa_n = R/|n|, kappa_0 fitted once."""
    pt = _as_point(pt)
    raw = _lattice_raw(abs(pt.a), pt.theta_e, q, p.R, n_max)[0]
    return (raw - _kappa0(q, p.R, abs(p.Lambda), n_max)) / (4 * math.pi)


def potential_gradient(pt, p, mode="poisson", n_max=10000, cfg=DEFAULT_QUAD):
    """(dU/dx1, dU/dx2, dU/dx3) computed analytically in the given mode."""
    pt = _as_point(pt)
    _check_regular(pt, p)
    a = pt.a
    r = abs(a)
    dr = dth = 0.0
    for q, om in p.positive():
        w = q * q * om
        if mode == "lattice":
            _, d_r, d_t = _lattice_raw(r, pt.theta_e, q, p.R, n_max)
            dr += w * d_r / (4 * math.pi)
            dth += w * d_t / (4 * math.pi)
        elif mode == "poisson":
            _, s0, c1, _ = _inst_sums(r, pt.theta_e, q, p.R, cfg.tail_eps)
            dr += w * (-(p.R / TWO_PI) / r - (p.R / math.pi) * c1)
            dth += w * (-(p.R / math.pi) * s0)
        elif mode == "sf":
            dr += w * (-(p.R / TWO_PI) / r)
        else:
            raise ConfigError("unknown potential mode %r" % mode)
    return np.array([dr * a.real / r, dr * a.imag / r, dth * TWO_PI * p.R])


# ---------------------------------------------------------------- connection


def connection_a_gh(pt, p, mode="poisson", cfg=DEFAULT_QUAD):
    """Components (A_a, A_abar, A_theta_e) of the Gibbons-Hawking connection."""
    pt = _as_point(pt)
    a = pt.a
    L = log_ratio(pt, p)
    a_te = p.delta * (1j / (8 * math.pi ** 2)) * (L - L.conjugate())
    a_te = a_te.real
    if mode == "sf":
        return 0j, 0j, a_te
    _check_regular(pt, p)
    r = abs(a)
    S = 0j
    for q, om in p.positive():
        s1 = _inst_sums(r, pt.theta_e, q, p.R, cfg.tail_eps)[3]
        # sum_{n != 0} sgn(n) e^{i n q th} |a| K1 = 2 i |a| sum_{n>0} sin(n q th) K1
        S += q * q * om * 2j * r * s1
    A_a = -(p.R / (4 * math.pi)) * S / a
    A_ab = (p.R / (4 * math.pi)) * S / a.conjugate()
    return A_a, A_ab, a_te


def connection_x(pt, p, mode="poisson"):
    """Real components (A_1, A_2, A_3) in the x-coordinates."""
    A_a, A_ab, a_te = connection_a_gh(pt, p, mode)
    return np.array([(A_a + A_ab).real, (1j * (A_a - A_ab)).real, a_te * TWO_PI * p.R])


# ---------------------------------------------------------------- metrics


def metric_assemble(pt, p, mode="gh", u_mode="poisson"):
    """4x4 metric in (x1, x2, x3, theta_m); dual_semiflat uses (x1, x2, th_e^, th_m^)."""
    pt = _as_point(pt)
    if p.delta <= 0:
        raise NotPositiveDefiniteError("metric needs Delta > 0")
    R = p.R
    if mode == "gh":
        U = potential_u(pt, p, u_mode)
        A = connection_x(pt, p, "sf" if u_mode == "sf" else "poisson")
        v = np.array([A[0], A[1], A[2], 1 / TWO_PI])
        g = np.outer(v, v) / U
        g[:3, :3] += U * np.eye(3)
        return g
    tau = tau_of(pt, p)
    it = tau.imag
    if mode == "semiflat":
        g = np.zeros((4, 4))
        g[0, 0] = g[1, 1] = R * it
        # |d th_m - tau d th_e|^2 with d th_e = 2 pi R dx3
        w = np.array([0, 0, -tau * TWO_PI * R, 1.0])
        g += np.real(np.outer(w, w.conjugate()) + np.outer(w.conjugate(), w)) / 2 / (4 * math.pi ** 2 * R * it)
        return g
    if mode == "dual_semiflat":
        g = np.zeros((4, 4))
        g[0, 0] = g[1, 1] = 4 * math.pi ** 2 * R * R * it
        w = np.array([0, 0, 1.0, tau])
        g += np.real(np.outer(w, w.conjugate()) + np.outer(w.conjugate(), w)) / 2 / it
        return g / (4 * math.pi ** 2 * R)
    raise ConfigError("unknown metric mode %r" % mode)


def dual_to_semiflat_jacobian(R):
    """d(x1, x2, th_e^, th_m^)/d(x1, x2, x3, th_m) for th_m^ = th_e, th_e^ = -th_m."""
    J = np.zeros((4, 4))
    J[0, 0] = J[1, 1] = 1.0
    J[2, 3] = -1.0
    J[3, 2] = TWO_PI * R
    return J


# ---------------------------------------------------------------- two-forms


def wedge1(alpha, beta):
    """Matrix of alpha ^ beta for one-forms given as component vectors."""
    alpha = np.asarray(alpha)
    beta = np.asarray(beta)
    return np.outer(alpha, beta) - np.outer(beta, alpha)


def wedge2(M, N):
    """Coefficient of dx1^dx2^dx3^dx4 in M ^ N for 4x4 antisymmetric matrices."""
    return (M[0, 1] * N[2, 3] - M[0, 2] * N[1, 3] + M[0, 3] * N[1, 2]
            + M[2, 3] * N[0, 1] - M[1, 3] * N[0, 2] + M[1, 2] * N[0, 3])


def kahler_triple(pt, p, mode="poisson"):
    """(omega_1, omega_2, omega_3, Omega_3) as antisymmetric 4x4 matrices."""
    pt = _as_point(pt)
    U = potential_u(pt, p, "sf" if mode == "sf" else "poisson")
    A = connection_x(pt, p, mode)
    theta = np.array([A[0], A[1], A[2], 1 / TWO_PI])
    e = np.eye(4)
    w1 = wedge1(e[0], theta) + U * wedge1(e[1], e[2])
    w2 = wedge1(e[1], theta) + U * wedge1(e[2], e[0])
    w3 = wedge1(e[2], theta) + U * wedge1(e[0], e[1])
    da = np.array([1, 1j, 0, 0])
    W3 = wedge1(da, theta - 1j * U * e[2])
    return w1, w2, w3, W3


def holomorphic_form(pt, p, xi, mode="poisson"):
    """Omega(xi) = -(i/2 xi) omega_+ + omega_3 - (i/2) xi omega_-."""
    w1, w2, w3, _ = kahler_triple(pt, p, mode)
    wp = w1 + 1j * w2
    wm = w1 - 1j * w2
    return -0.5j / xi * wp + w3 - 0.5j * xi * wm


# ---------------------------------------------------------------- singular set, mirrors


def singular_set(p):
    """theta_e values (mod 2 pi) of the points s_{n,q} at a = 0."""
    out = set()
    for q, _ in p.positive():
        for n in range(q):
            out.add(round(TWO_PI * n / q, 15))
    return sorted(out)


def mirror_build(p, mode="self", new_spectrum=None):
    """Self mirror or modified self mirror; returns (params, swap rule)."""
    rule = {"theta_e": "theta_m_dual", "theta_m": "-theta_e_dual"}
    if mode == "self":
        return OVParams(p.Lambda, p.R, dict(p.spectrum), p.tau0), rule
    if mode == "modified":
        q = OVParams(p.Lambda, p.R, new_spectrum or {}, p.tau0 if p.tau0 is not None else 1j)
        if q.delta != p.delta:
            raise ConstraintError("modified mirror must keep Delta", old=p.delta, new=q.delta)
        return q, rule
    raise ConfigError("unknown mirror mode %r" % mode)


# ---------------------------------------------------------------- periods


def fiber_one_form(pt, p, mode="poisson"):
    """Components (d theta_e, d theta_m) of d theta_m/2pi + A - (iU/2piR) d theta_e on a fiber."""
    U = potential_u(pt, p, "sf" if mode == "sf" else "poisson")
    a_te = connection_a_gh(pt, p, mode)[2]
    return a_te - 1j * U / (TWO_PI * p.R), 1 / TWO_PI


def periods_check(p, z, n_nodes=64, mode="poisson", theta_m=0.0, theta_e=0.0):
    """Periods of the fiber coordinate over the theta_m- and theta_e-cycles.

    Integrands are periodic, so the trapezoidal rule converges geometrically.
    The theta_e-cycle is traversed with decreasing theta_e, which makes its
    period tau rather than -tau.
    """
    nodes = np.arange(n_nodes) * TWO_PI / n_nodes
    h = TWO_PI / n_nodes
    pm = sum(fiber_one_form(FiberPoint(z, theta_e, t), p, mode)[1] for t in nodes) * h
    pe = sum(fiber_one_form(FiberPoint(z, t, theta_m), p, mode)[0] for t in nodes) * h
    return complex(pm), -complex(pe)


def hat_t_jacobian(delta, R, k=1):
    """Jacobian of the monodromy in (x1, x2, x3, theta_m); pull back with J^T g J."""
    J = np.eye(4)
    J[3, 2] = k * delta * TWO_PI * R
    return J


def singular_coefficient(pt, p):
    """Expected leading coefficient c in U ~ c / distance near a point of S_Omega."""
    pt = _as_point(pt)
    total = 0.0
    for q, om in p.positive():
        step = TWO_PI / q
        if abs(pt.theta_e - step * round(pt.theta_e / step)) < 1e-9:
            total += q * om / (4 * math.pi)
    return total
