"""Scale function of the spectrally positive Levy process tied to a mechanism.

W is the unique increasing continuous function on [0, inf) with

    int_0^inf exp(-lam x) W(x) dx = 1 / psi(lam),      lam > 0,

extended by W(x) = 0 for x < 0.  Most of the downstream objects are built
from it: the stationary density W(x)/x, the potential (occupation) density
g(x, y) = (W(y) - W(y-x))/y, and the Levy densities of the conditional
limit laws.

W and W' (transform lam/psi(lam), since W(0) = 0) come from numerical
inversion; near the origin the inversion is replaced by the exact leading
asymptotics W(x) ~ x^(p-1)/(C Gamma(p)) dictated by psi(lam) ~ C lam^p at
infinity, glued multiplicatively at the crossover for continuity.
"""

import math

import numpy as np
from scipy.integrate import quad

from .invlaplace import DeHoogInverter
from .mechanism import MechanismError
from .quadrature import tail_integral
from .reference import lpq_family, stable_family


class ScaleFunction:
    """W, W' and derived densities for one mechanism.

    closed_form: optional pair (W, W_prime) of callables taking x > 0; when
    present it is used instead of the inversion back-end (the registry
    families have exact forms; see closed_form_scale).
    """

    def __init__(self, mechanism, tol=1e-11, degree=16, closed_form=None,
                 origin_cutoff=1e-3):
        self.mech = mechanism
        self.tol = tol
        self.degree = degree
        self.origin_cutoff = origin_cutoff
        self._closed = closed_form
        psi_c = mechanism.psi_complex
        self._winv = DeHoogInverter(lambda z: 1.0 / psi_c(z), tol, degree)
        self._wpinv = DeHoogInverter(lambda z: z / psi_c(z), tol, degree)
        self._p, self._C = mechanism.large_scale()
        self._blend = None

    # -- evaluation -----------------------------------------------------------

    def _origin_blend(self):
        # multiplicative continuity factors at the crossover
        if self._blend is None:
            xc = self.origin_cutoff
            fw = self._winv(xc) / self._asym_w(xc)
            fwp = self._wpinv(xc) / self._asym_wp(xc)
            self._blend = (fw, fwp)
        return self._blend

    def _asym_w(self, x):
        p, C = self._p, self._C
        return x ** (p - 1.0) / (C * math.gamma(p))

    def _asym_wp(self, x):
        p, C = self._p, self._C
        return (p - 1.0) * x ** (p - 2.0) / (C * math.gamma(p))

    def W(self, x):
        """Scale function; 0 for x <= 0, relative accuracy ~1e-10 for x > 0."""
        if np.ndim(x) > 0:
            return np.array([self.W(v) for v in np.asarray(x)])
        x = float(x)
        if x <= 0.0:
            return 0.0
        if self._closed is not None:
            return float(self._closed[0](x))
        if x < self.origin_cutoff and self._p > 1.0:
            return self._asym_w(x) * self._origin_blend()[0]
        return self._winv(x)

    def W_prime(self, x):
        """dW/dx for x > 0, inverted from lam/psi(lam) (not differenced)."""
        if np.ndim(x) > 0:
            return np.array([self.W_prime(v) for v in np.asarray(x)])
        x = float(x)
        if not x > 0.0:
            raise MechanismError("W_prime requires x > 0")
        if self._closed is not None:
            return float(self._closed[1](x))
        if x < self.origin_cutoff and self._p > 1.0:
            return self._asym_wp(x) * self._origin_blend()[1]
        return self._wpinv(x)

    def stationary_density(self, x):
        """Density W(x)/x of the unique stationary measure on (0, inf)."""
        if not x > 0.0:
            raise MechanismError("stationary_density requires x > 0")
        return self.W(x) / x

    def potential_density(self, x, y):
        """g(x, y) = (W(y) - W(y-x))/y, the occupation density started at x."""
        if not (x > 0.0 and y > 0.0):
            raise MechanismError("potential_density requires x, y > 0")
        if y <= x:
            return self.W(y) / y
        return (self.W(y) - self.W(y - x)) / y

    # -- transforms used by the gates ------------------------------------------

    def laplace_transform_W(self, lam):
        """int_0^inf exp(-lam x) W(x) dx by quadrature over the computed W."""
        if not lam > 0.0:
            raise MechanismError("transform requires lam > 0")
        val, _ = quad(lambda x: math.exp(-lam * x) * self.W(x),
                      0.0, np.inf, epsabs=1e-14, epsrel=1e-9, limit=400)
        return val

    def roundtrip_residual(self, lam):
        """Relative defect of the defining transform identity at lam."""
        target = 1.0 / self.mech.psi(lam)
        return abs(self.laplace_transform_W(lam) - target) / target

    def potential_transform(self, x, lam):
        """int exp(-lam y) g(x, y) dy  (-> phi(lam) as x -> inf)."""
        if not (x > 0.0 and lam > 0.0):
            raise MechanismError("potential_transform requires x, lam > 0")
        head, _ = quad(lambda y: math.exp(-lam * y) * self.W(y) / y,
                       0.0, x, epsabs=1e-14, epsrel=1e-10, limit=400)
        tail, _ = quad(lambda y: math.exp(-lam * y)
                       * (self.W(y) - self.W(y - x)) / y,
                       x, x + 80.0 / lam, epsabs=1e-14, epsrel=1e-10, limit=400)
        return head + tail


def potential_mass(kernel, x):
    """Total potential mass int g(x, y) dy = E_x[absorption time].

    Finite exactly when int_0+ u/psi(u) du converges; returns math.inf
    otherwise (critical finite-variance mechanisms).
    """
    if not x > 0.0:
        raise MechanismError("potential_mass requires x > 0")
    if not kernel.mechanism_class.potential_finite:
        return math.inf

    def integrand(t):
        return -math.expm1(-x * kernel.varphi(t))

    head, _ = quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-10, limit=200)
    tail, ok = tail_integral(integrand, 1.0, rel_tol=1e-10)
    if not ok:
        return math.inf
    return head + tail


def closed_form_scale(mechanism, **kwargs):
    """ScaleFunction with the registry closed form attached when one exists."""
    name = mechanism.closed_form.name if mechanism.closed_form else None
    pair = None
    if name == "linear_plus_quadratic":
        fam = lpq_family()
        pair = (fam.W, fam.W_prime)
    elif name == "quadratic" or name == "stable(2)":
        fam = stable_family(2.0)
        pair = (fam.W, fam.W_prime)
    elif name is not None and name.startswith("stable("):
        fam = stable_family(float(name[len("stable("):-1]))
        pair = (fam.W, fam.W_prime)
    return ScaleFunction(mechanism, closed_form=pair, **kwargs)
