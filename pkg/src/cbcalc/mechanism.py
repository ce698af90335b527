"""Branching mechanisms.

A mechanism is the convex function

    psi(lam) = alpha*lam + (1/2)*sigma2*lam^2
               + int_0^inf (exp(-lam*r) - 1 + lam*r) pi(dr),

with drift alpha >= 0 (critical alpha = 0, subcritical alpha > 0; supercritical
drifts are rejected), Gaussian coefficient sigma2 >= 0 and a jump measure pi
on (0, inf) with int (r ^ r^2) pi(dr) < inf.  The module evaluates psi and
psi', classifies the integral conditions that drive everything downstream
(almost-sure extinction, finiteness of the expected absorption time, the
r*log r moment), and parses the JSON mechanism configs used by the CLI.
"""

import json
import math

import numpy as np
from scipy.integrate import quad

from .quadrature import head_integral, tail_integral

# below this, exp(-x)-1+x and 1-exp(-x) switch to series to avoid cancellation
_SERIES_CUT = 1e-4


class MechanismError(ValueError):
    """Invalid or unsupported mechanism input."""


def _compensated_exp(x):
    """exp(-x) - 1 + x, accurate for small x (4-term series below the cut)."""
    if x < _SERIES_CUT:
        return x * x / 2.0 - x ** 3 / 6.0 + x ** 4 / 24.0 - x ** 5 / 120.0
    return math.exp(-x) - 1.0 + x


def _one_minus_exp(x):
    """1 - exp(-x), accurate for small x."""
    return -math.expm1(-x)


class LevyMeasure:
    """Jump measure pi on (0, inf).

    Kinds:
      * none: no jumps.
      * power_law: pi(dr) = c * r^(-1-a) dr with c > 0 and a in (1, 2).
      * table: density sampled on a positive grid, extended beyond the last
        grid point by a power tail r^(-(1+tail_exponent)); zero below the
        first point.  tail_exponent may be omitted, in which case psi treats
        the density as truncated and classification refuses to decide.
    """

    def __init__(self, kind="none", c=None, a=None, r=None, density=None,
                 tail_exponent=None):
        self.kind = kind
        self.c = c
        self.a = a
        self.tail_exponent = tail_exponent
        if kind == "none":
            pass
        elif kind == "power_law":
            if not (c is not None and c > 0.0):
                raise MechanismError("power_law Levy measure needs c > 0")
            if not (a is not None and 1.0 < a < 2.0):
                raise MechanismError(
                    "power_law exponent a must lie in (1, 2); got %r" % (a,))
        elif kind == "table":
            self.r = np.asarray(r, dtype=float)
            self.density = np.asarray(density, dtype=float)
            if self.r.ndim != 1 or self.r.shape != self.density.shape or self.r.size < 2:
                raise MechanismError("table Levy measure needs matching r/density grids")
            if not (np.all(np.diff(self.r) > 0.0) and self.r[0] > 0.0):
                raise MechanismError("table grid must be positive and strictly increasing")
            if np.any(self.density < 0.0):
                raise MechanismError("table density must be nonnegative")
            if tail_exponent is not None and tail_exponent <= 1.0:
                # int r pi(dr) over the tail would diverge -> r^r^2 moment fails
                raise MechanismError(
                    "tabulated tail exponent %.3g makes int (r^r^2) pi(dr) divergent"
                    % tail_exponent)
        else:
            raise MechanismError("unknown Levy measure kind %r" % (kind,))

    # -- moments and tail functionals ------------------------------------

    def is_trivial(self):
        return self.kind == "none"

    def _tail_coef(self):
        """(coef, exponent) of the density tail d(r) ~ coef * r^(-1-q)."""
        if self.kind == "power_law":
            return self.c, self.a
        if self.kind == "table" and self.tail_exponent is not None:
            q = self.tail_exponent
            return self.density[-1] * self.r[-1] ** (1.0 + q), q
        return 0.0, None

    def tails(self, r):
        """(pibar(r), pibarbar(r)) where pibar(r) = pi((r, inf)) and
        pibarbar(r) = int_r^inf pibar(y) dy."""
        if r <= 0.0:
            raise MechanismError("tail functionals need r > 0")
        if self.kind == "none":
            return 0.0, 0.0
        if self.kind == "power_law":
            c, a = self.c, self.a
            return c * r ** -a / a, c * r ** (1.0 - a) / (a * (a - 1.0))
        return self._table_tails(r)

    def _table_tails(self, r):
        grid, dens = self.r, self.density
        coef, q = self._tail_coef()
        if q is not None:
            tail_bar = coef * grid[-1] ** -q / q
            tail_bbar = coef * grid[-1] ** (1.0 - q) / (q * (q - 1.0))
        else:
            tail_bar = tail_bbar = 0.0
        # pibar on the grid by reverse trapezoid
        seg = 0.5 * (dens[1:] + dens[:-1]) * np.diff(grid)
        pibar_grid = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) + tail_bar
        if r >= grid[-1]:
            if q is None:
                return 0.0, 0.0
            return coef * r ** -q / q, coef * r ** (1.0 - q) / (q * (q - 1.0))
        pibar = float(np.interp(r, grid, pibar_grid))
        # pibarbar: trapezoid of pibar over [r, r_N] plus the analytic tail
        mask = grid > r
        ys = np.concatenate([[r], grid[mask]])
        vals = np.concatenate([[pibar], pibar_grid[mask]])
        pibarbar = float(np.trapezoid(vals, ys)) + tail_bbar
        return pibar, pibarbar

    def frac_moment_check(self):
        """int (r ^ r^2) pi(dr), the existence moment; raises when divergent."""
        if self.kind == "none":
            return 0.0
        if self.kind == "power_law":
            c, a = self.c, self.a
            # int_0^1 r^2 pi + int_1^inf r pi, both closed-form
            return c / (2.0 - a) + c / (a - 1.0)
        grid, dens = self.r, self.density
        integrand = np.minimum(grid, grid * grid) * dens
        val = float(np.trapezoid(integrand, grid))
        coef, q = self._tail_coef()
        if q is not None:
            tail, ok = tail_integral(
                lambda r: min(r, r * r) * coef * r ** (-1.0 - q), grid[-1])
            if not ok:
                raise MechanismError(
                    "tabulated tail exponent %.3g makes int (r^r^2) pi(dr) "
                    "divergent" % q)
            val += tail
        return val

    def xlogx_integral(self):
        """int_1^inf r*log(r) pi(dr); +inf when the tail is too heavy."""
        if self.kind == "none":
            return 0.0
        if self.kind == "power_law":
            return self.c / (self.a - 1.0) ** 2
        grid, dens = self.r, self.density
        mask = grid >= 1.0
        val = 0.0
        if mask.sum() >= 2:
            g = grid[mask]
            val += float(np.trapezoid(g * np.log(g) * dens[mask], g))
        coef, q = self._tail_coef()
        if q is None:
            return val
        rN = max(grid[-1], 1.0)
        # int_rN^inf log(r) r^(-q) dr = rN^(1-q) (log rN/(q-1) + 1/(q-1)^2)
        val += coef * rN ** (1.0 - q) * (math.log(rN) / (q - 1.0) + (q - 1.0) ** -2)
        return val


class ClosedForm:
    """Named closed-form psi with derivative; complex-capable for inversion."""

    def __init__(self, name, psi, psi_prime):
        self.name = name
        self.psi = psi
        self.psi_prime = psi_prime


class MechanismClass:
    """Criticality plus the three integral-condition verdicts."""

    def __init__(self, criticality, grey_holds, potential_finite, xlogx_holds):
        self.criticality = criticality
        self.grey_holds = grey_holds
        self.potential_finite = potential_finite
        self.xlogx_holds = xlogx_holds

    def __repr__(self):
        return ("MechanismClass(criticality=%r, grey_holds=%r, "
                "potential_finite=%r, xlogx_holds=%r)"
                % (self.criticality, self.grey_holds,
                   self.potential_finite, self.xlogx_holds))

    def __eq__(self, other):
        return (isinstance(other, MechanismClass)
                and self.criticality == other.criticality
                and self.grey_holds == other.grey_holds
                and self.potential_finite == other.potential_finite
                and self.xlogx_holds == other.xlogx_holds)


class BranchingMechanism:
    """Immutable mechanism triplet (alpha, sigma2, pi) with optional closed form.

    When a closed form is attached it takes precedence for evaluation; the
    constructor cross-checks it against a nontrivial triplet at 16 log-spaced
    points and against the declared drift at lam = 1e-6.
    """

    def __init__(self, alpha=0.0, sigma2=0.0, levy=None, closed_form=None,
                 tol=1e-10):
        if alpha < 0.0:
            raise MechanismError(
                "alpha < 0 is supercritical; only critical/subcritical "
                "mechanisms are supported")
        if sigma2 < 0.0:
            raise MechanismError("sigma2 must be nonnegative")
        self.alpha = float(alpha)
        self.sigma2 = float(sigma2)
        self.levy = levy if levy is not None else LevyMeasure("none")
        self.closed_form = closed_form
        self.tol = tol
        self.levy.frac_moment_check()
        if closed_form is None and sigma2 == 0.0 and self.levy.is_trivial() \
                and alpha == 0.0:
            raise MechanismError("degenerate mechanism: psi is identically zero")
        if closed_form is not None:
            self._check_closed_form()

    # -- construction helpers ---------------------------------------------

    def _check_closed_form(self):
        cf = self.closed_form
        # drift consistency at lam = 1e-6: the excess slope psi(lam)/lam - alpha
        # is the nonlinear part's chord, so it must be nonnegative, bounded by
        # the chord at lam = 1 (convexity), and shrinking as lam decreases.
        dev = cf.psi(1e-6) / 1e-6 - self.alpha
        dev_smaller = cf.psi(1e-8) / 1e-8 - self.alpha
        cap = cf.psi(1.0) - self.alpha
        if not (-self.tol * (1.0 + self.alpha) <= dev <= cap + self.tol
                and dev_smaller <= dev + self.tol):
            raise MechanismError(
                "closed form slope at lam=1e-6 (excess %.6g over declared "
                "alpha=%.6g) is inconsistent with a convex mechanism" %
                (dev, self.alpha))
        if self.sigma2 > 0.0 or not self.levy.is_trivial():
            for lam in np.geomspace(1e-3, 1e3, 16):
                a = self._psi_triplet(lam)
                b = cf.psi(lam)
                if not abs(a - b) <= 1e-7 * max(abs(b), 1e-12):
                    raise MechanismError(
                        "closed form and triplet disagree at lam=%.4g: "
                        "%.12g vs %.12g" % (lam, b, a))

    # -- real-axis evaluation ----------------------------------------------

    def psi(self, lam):
        """psi(lam) for lam >= 0, relative accuracy ~ tol."""
        if np.ndim(lam) > 0:
            return np.array([self.psi(x) for x in np.asarray(lam)])
        lam = float(lam)
        if lam < 0.0:
            raise MechanismError("psi requires lam >= 0")
        if lam == 0.0:
            return 0.0
        if self.closed_form is not None:
            return float(self.closed_form.psi(lam))
        return self._psi_triplet(lam)

    def _psi_triplet(self, lam):
        return self.alpha * lam + 0.5 * self.sigma2 * lam * lam \
            + self._jump_part(lam)

    def psi_nonlinear(self, lam):
        """psi(lam) - alpha*lam computed without cancellation."""
        if lam == 0.0:
            return 0.0
        if self.closed_form is not None and self.levy.is_trivial() \
                and self.sigma2 == 0.0:
            return float(self.closed_form.psi(lam)) - self.alpha * lam
        return 0.5 * self.sigma2 * lam * lam + self._jump_part(lam)

    def _jump_part(self, lam):
        """int (exp(-lam r)-1+lam r) pi(dr), adaptive quadrature split at r=1."""
        lv = self.levy
        if lv.kind == "none":
            return 0.0
        if lv.kind == "power_law":
            c, a = lv.c, lv.a
            low = quad(lambda r: _compensated_exp(lam * r) * c * r ** (-1.0 - a),
                       0.0, 1.0, epsabs=0.0, epsrel=1e-11, limit=300,
                       full_output=1)[0]
            # on [1, inf): the (lam*r - 1) piece is closed-form, the exponential
            # piece decays and is truncated at 80/lam
            lin = c * (lam / (a - 1.0) - 1.0 / a)
            hi, _ = quad(lambda r: math.exp(-lam * r) * c * r ** (-1.0 - a),
                         1.0, max(2.0, 80.0 / lam), epsabs=1e-300, epsrel=1e-12,
                         limit=300)
            return low + lin + hi
        return self._jump_part_table(lam)

    def _jump_part_table(self, lam):
        lv = self.levy
        grid, dens = lv.r, lv.density
        core = np.array([_compensated_exp(lam * r) for r in grid])
        val = float(np.trapezoid(core * dens, grid))
        coef, q = lv._tail_coef()
        if q is None:
            return val
        rN = grid[-1]
        lin = coef * (lam * rN ** (1.0 - q) / (q - 1.0) - rN ** -q / q)
        hi, _ = quad(lambda r: math.exp(-lam * r) * coef * r ** (-1.0 - q),
                     rN, max(2.0 * rN, rN + 80.0 / lam), epsabs=1e-300,
                     epsrel=1e-12, limit=300)
        return val + lin + hi

    def psi_prime(self, lam):
        """psi'(lam) = alpha + sigma2*lam + int (1-exp(-lam r)) r pi(dr), lam > 0."""
        if np.ndim(lam) > 0:
            return np.array([self.psi_prime(x) for x in np.asarray(lam)])
        lam = float(lam)
        if lam <= 0.0:
            raise MechanismError("psi_prime requires lam > 0")
        if self.closed_form is not None:
            return float(self.closed_form.psi_prime(lam))
        return self.alpha + self.psi_prime_nonlinear(lam)

    def psi_prime_nonlinear(self, lam):
        """psi'(lam) - alpha, cancellation-free."""
        if self.closed_form is not None and self.levy.is_trivial() \
                and self.sigma2 == 0.0:
            return float(self.closed_form.psi_prime(lam)) - self.alpha
        lv = self.levy
        val = self.sigma2 * lam
        if lv.kind == "none":
            return val
        if lv.kind == "power_law":
            c, a = lv.c, lv.a
            low = quad(lambda r: _one_minus_exp(lam * r) * c * r ** -a,
                       0.0, 1.0, epsabs=0.0, epsrel=1e-11, limit=300,
                       full_output=1)[0]
            lin = c / (a - 1.0)
            hi, _ = quad(lambda r: math.exp(-lam * r) * c * r ** -a,
                         1.0, max(2.0, 80.0 / lam), epsabs=1e-300, epsrel=1e-12,
                         limit=300)
            return val + low + lin - hi
        grid, dens = lv.r, lv.density
        core = np.array([_one_minus_exp(lam * r) for r in grid])
        val += float(np.trapezoid(core * grid * dens, grid))
        coef, q = lv._tail_coef()
        if q is None:
            return val
        rN = grid[-1]
        lin = coef * rN ** (1.0 - q) / (q - 1.0)
        hi, _ = quad(lambda r: math.exp(-lam * r) * coef * r ** -q,
                     rN, max(2.0 * rN, rN + 80.0 / lam), epsabs=1e-300,
                     epsrel=1e-12, limit=300)
        return val + lin - hi

    # -- complex continuation (inversion back-end) --------------------------

    def psi_complex(self, z):
        """Analytic continuation of psi to Re z > 0.

        Used by the Laplace-inversion back-end, which samples a vertical
        contour; the triplet quadrature itself only converges on the real
        axis for the heavy-tailed kinds, so the power-law part uses its
        closed continuation c*Gamma(2-a)/(a(a-1)) * z^a.
        """
        if self.closed_form is not None:
            return self.closed_form.psi(z)
        val = self.alpha * z + 0.5 * self.sigma2 * z * z
        lv = self.levy
        if lv.kind == "none":
            return val
        if lv.kind == "power_law":
            c, a = lv.c, lv.a
            return val + c * math.gamma(2.0 - a) / (a * (a - 1.0)) * z ** a
        grid, dens = lv.r, lv.density
        core = np.exp(-z * grid) - 1.0 + z * grid
        val += np.trapezoid(core * dens, grid)
        coef, q = lv._tail_coef()
        if q is None:
            return val
        rN = grid[-1]
        val += coef * (z * rN ** (1.0 - q) / (q - 1.0) - rN ** -q / q)
        # exponential tail piece, small once Re(z)*rN is moderate
        re_part, _ = quad(lambda r: (np.exp(-z * r) * coef * r ** (-1.0 - q)).real,
                          rN, rN + 80.0 / max(z.real, 1e-3), limit=300)
        im_part, _ = quad(lambda r: (np.exp(-z * r) * coef * r ** (-1.0 - q)).imag,
                          rN, rN + 80.0 / max(z.real, 1e-3), limit=300)
        return val + re_part + 1j * im_part

    # -- structure probes ---------------------------------------------------

    def small_scale(self):
        """(exponent m, coefficient C) with psi(u) - alpha*u ~ C u^m as u -> 0."""
        lv = self.levy
        sig_term = (2.0, 0.5 * self.sigma2) if self.sigma2 > 0.0 else None
        jump_term = None
        coef, q = lv._tail_coef()
        if q is not None and q < 2.0:
            jump_term = (q, coef * math.gamma(2.0 - q) / (q * (q - 1.0)))
        elif not lv.is_trivial():
            # light-tailed jumps contribute (u^2/2) * int r^2 pi(dr)
            m2 = self._second_moment()
            if m2 > 0.0:
                jump_term = (2.0, 0.5 * m2)
        terms = [t for t in (sig_term, jump_term) if t is not None]
        if not terms:
            return None
        m = min(t[0] for t in terms)
        coefsum = sum(t[1] for t in terms if t[0] == m)
        return m, coefsum

    def _second_moment(self):
        lv = self.levy
        if lv.kind == "power_law":
            return math.inf
        if lv.kind == "table":
            grid, dens = lv.r, lv.density
            val = float(np.trapezoid(grid * grid * dens, grid))
            coef, q = lv._tail_coef()
            if q is not None:
                if q <= 2.0:
                    return math.inf
                val += coef * grid[-1] ** (2.0 - q) / (q - 2.0)
            return val
        return 0.0

    def growth_exponent(self):
        """Asymptotic power p with psi(lam) ~ lam^p as lam -> +inf.

        2 with a Gaussian part, the power-law exponent a for pure-jump stable
        kinds, and 1 when psi is asymptotically linear (Grey fails).
        """
        return self.large_scale()[0]

    def large_scale(self):
        """(exponent p, coefficient C) with psi(lam) ~ C lam^p as lam -> inf."""
        if self.sigma2 > 0.0:
            return 2.0, 0.5 * self.sigma2
        lv = self.levy
        if lv.kind == "power_law":
            c, a = lv.c, lv.a
            return a, c * math.gamma(2.0 - a) / (a * (a - 1.0))
        if self.closed_form is not None and lv.is_trivial():
            big = 1e8
            p = math.log(self.closed_form.psi(2 * big) / self.closed_form.psi(big)) \
                / math.log(2.0)
            return p, self.closed_form.psi(big) / big ** p
        # jump measure with finite mass and mean: asymptotically linear
        mean = 0.0
        if lv.kind == "table":
            grid, dens = lv.r, lv.density
            mean = float(np.trapezoid(grid * dens, grid))
            coef, q = lv._tail_coef()
            if q is not None:
                mean += coef * grid[-1] ** (1.0 - q) / (q - 1.0)
        return 1.0, self.alpha + mean

    # -- classification -----------------------------------------------------

    def grey_integral(self, lower=1.0):
        """int_lower^inf dlam/psi(lam); math.inf when divergent."""
        val, ok = tail_integral(lambda u: 1.0 / self.psi(u), lower)
        return val if ok else math.inf

    def potential_integral(self, upper=1.0):
        """int_0^upper u/psi(u) du; math.inf when divergent."""
        if self.alpha > 0.0:
            val, _ = quad(lambda u: u / self.psi(u), 0.0, upper,
                          epsabs=0.0, epsrel=1e-10, limit=300)
            return val
        small = self.small_scale()
        if small is not None and small[0] >= 2.0:
            return math.inf
        val, ok = head_integral(lambda u: u / self.psi(u), upper)
        return val if ok else math.inf

    def classify(self):
        """Criticality and the three integral conditions.

        grey_holds: int^inf dlam/psi < inf (extinction is almost sure);
        potential_finite: int_0+ u/psi(u) du < inf (E_x[absorption time] < inf);
        xlogx_holds: alpha > 0 together with int^inf r log r pi(dr) < inf.
        """
        if self.levy.kind == "table" and self.levy.tail_exponent is None:
            raise MechanismError(
                "tabulated Levy density without a declared tail exponent: "
                "the integral conditions are numerically undecidable")
        criticality = "critical" if self.alpha == 0.0 else "subcritical"
        grey = self.growth_exponent() > 1.0
        if grey:
            # numeric confirmation; cheap since the integrand decays fast
            grey = math.isfinite(self.grey_integral())
        # subcritical: u/psi(u) -> 1/alpha at 0, so the integral is always finite
        potential = self.alpha > 0.0 or math.isfinite(self.potential_integral())
        xlogx = self.alpha > 0.0 and math.isfinite(self.levy.xlogx_integral())
        return MechanismClass(criticality, grey, potential, xlogx)

    def levy_tails(self, r):
        """(pibar(r), pibarbar(r)) tail functionals of the jump measure."""
        return self.levy.tails(r)

    def __repr__(self):
        cf = self.closed_form.name if self.closed_form else None
        return ("BranchingMechanism(alpha=%g, sigma2=%g, levy=%s, closed_form=%r)"
                % (self.alpha, self.sigma2, self.levy.kind, cf))


# -- closed-form registry ----------------------------------------------------

def quadratic():
    """psi(lam) = lam^2  (critical; sigma2 = 2)."""
    cf = ClosedForm("quadratic", lambda z: z * z, lambda z: 2.0 * z)
    return BranchingMechanism(alpha=0.0, sigma2=2.0, closed_form=cf)


def linear_plus_quadratic():
    """psi(lam) = lam + lam^2  (subcritical; alpha = 1, sigma2 = 2)."""
    cf = ClosedForm("linear_plus_quadratic",
                    lambda z: z + z * z, lambda z: 1.0 + 2.0 * z)
    return BranchingMechanism(alpha=1.0, sigma2=2.0, closed_form=cf)


def stable(beta):
    """psi(lam) = lam^beta, 1 < beta <= 2 (critical).

    For beta < 2 the canonical triplet is the pure-jump power law with
    c = beta(beta-1)/Gamma(2-beta); beta = 2 is the Gaussian case.
    """
    if not 1.0 < beta <= 2.0:
        raise MechanismError("stable exponent must lie in (1, 2]")
    if beta == 2.0:
        cf = ClosedForm("stable(2)", lambda z: z * z, lambda z: 2.0 * z)
        return BranchingMechanism(alpha=0.0, sigma2=2.0, closed_form=cf)
    cf = ClosedForm("stable(%g)" % beta,
                    lambda z: z ** beta, lambda z: beta * z ** (beta - 1.0))
    levy = stable_levy_measure(beta)
    return BranchingMechanism(alpha=0.0, sigma2=0.0, levy=levy, closed_form=cf)


def stable_levy_measure(beta):
    """Power-law measure whose compensated transform is exactly lam^beta."""
    c = beta * (beta - 1.0) / math.gamma(2.0 - beta)
    return LevyMeasure("power_law", c=c, a=beta)


_REGISTRY = {
    "quadratic": quadratic,
    "linear_plus_quadratic": linear_plus_quadratic,
}


def _registry_lookup(name):
    name = name.strip()
    if name in _REGISTRY:
        return _REGISTRY[name]()
    if name.startswith("stable(") and name.endswith(")"):
        try:
            beta = float(name[len("stable("):-1])
        except ValueError:
            raise MechanismError("malformed closed-form name %r" % name)
        return stable(beta)
    raise MechanismError(
        "unknown closed-form name %r (registry: quadratic, "
        "linear_plus_quadratic, stable(beta))" % name)


def mechanism_from_config(cfg):
    """Build a mechanism from the JSON config schema.

    Schema: {"alpha": num, "sigma2": num,
             "levy": {"kind": "none" | "power_law" | "table", ...},
             "closed_form": optional registry name, "tol": optional}.
    A registry closed_form with a trivial triplet adopts the canonical
    triplet of that family so Levy-dependent operations stay available.
    """
    if isinstance(cfg, (str, bytes)):
        cfg = json.loads(cfg)
    if not isinstance(cfg, dict):
        raise MechanismError("mechanism config must be a JSON object")
    unknown = set(cfg) - {"alpha", "sigma2", "levy", "closed_form", "tol"}
    if unknown:
        raise MechanismError("unknown config fields: %s" % sorted(unknown))
    alpha = float(cfg.get("alpha", 0.0))
    sigma2 = float(cfg.get("sigma2", 0.0))
    levy_cfg = cfg.get("levy", {"kind": "none"})
    if not isinstance(levy_cfg, dict) or "kind" not in levy_cfg:
        raise MechanismError("config field 'levy' must be an object with 'kind'")
    kind = levy_cfg["kind"]
    if kind == "none":
        levy = LevyMeasure("none")
    elif kind == "power_law":
        levy = LevyMeasure("power_law", c=float(levy_cfg.get("c", 0.0)),
                           a=float(levy_cfg.get("a", 0.0)))
    elif kind == "table":
        levy = LevyMeasure("table", r=levy_cfg.get("r"),
                           density=levy_cfg.get("density"),
                           tail_exponent=levy_cfg.get("tail_exponent"))
    else:
        raise MechanismError("unknown Levy kind %r" % (kind,))
    tol = float(cfg.get("tol", 1e-10))
    name = cfg.get("closed_form")
    if name is None:
        return BranchingMechanism(alpha=alpha, sigma2=sigma2, levy=levy, tol=tol)
    canonical = _registry_lookup(name)
    if sigma2 == 0.0 and levy.is_trivial():
        if abs(alpha - canonical.alpha) > 1e-12 * max(1.0, canonical.alpha):
            raise MechanismError(
                "declared alpha=%.6g does not match registry %r (alpha=%.6g)"
                % (alpha, name, canonical.alpha))
        return canonical
    return BranchingMechanism(alpha=alpha, sigma2=sigma2, levy=levy,
                              closed_form=canonical.closed_form, tol=tol)


def load_mechanism(path):
    """Read a JSON mechanism config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return mechanism_from_config(json.load(fh))
