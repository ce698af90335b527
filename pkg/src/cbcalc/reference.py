"""Closed-form oracle families.

Two families admit a complete closed-form calculus and anchor every
numerical gate in the test suite:

  * stable(beta), psi(lam) = lam^beta with 1 < beta <= 2 (critical):
        phi(lam)   = lam^(1-beta) / (beta-1)
        varphi(t)  = ((beta-1) t)^(-1/(beta-1))
        W(x)       = x^(beta-1) / Gamma(beta)
        W_s ~ Gamma(shape beta-1, rate varphi(s)); V_q ~ Gamma(beta, varphi(q))
  * linear_plus_quadratic, psi(lam) = lam + lam^2 (subcritical):
        phi(lam)   = log(1 + 1/lam)
        varphi(t)  = 1 / (e^t - 1)
        W(x)       = 1 - e^(-x)
        Yaglom law = Exp(1); W_s ~ Exp(1 + varphi(s));
        V_q ~ Gamma(2, 1 + varphi(q)); V_inf ~ Gamma(2, 1)

Values are exact up to floating arithmetic (math.gamma is accurate to
~1e-15 relative, well inside the 1e-13 budget).
"""

import math

from .mechanism import MechanismError, linear_plus_quadratic, stable


class OracleError(MechanismError):
    """Quantity undefined for the requested family."""


class OracleFamily:
    """Closed forms for one family; construct via stable_family / lpq_family."""

    def __init__(self, family_id, beta=None):
        if family_id not in ("stable", "linear_plus_quadratic"):
            raise OracleError("unknown oracle family %r" % (family_id,))
        if family_id == "stable":
            if beta is None or not 1.0 < beta <= 2.0:
                raise OracleError("stable family needs beta in (1, 2]")
        self.family_id = family_id
        self.beta = beta

    # -- construction of the matching mechanism ---------------------------

    def mechanism(self):
        if self.family_id == "stable":
            return stable(self.beta)
        return linear_plus_quadratic()

    @property
    def alpha(self):
        return 0.0 if self.family_id == "stable" else 1.0

    def _critical(self):
        return self.family_id == "stable"

    # -- extinction calculus ----------------------------------------------

    def psi(self, lam):
        if self.family_id == "stable":
            return lam ** self.beta
        return lam + lam * lam

    def psi_prime(self, lam):
        if self.family_id == "stable":
            return self.beta * lam ** (self.beta - 1.0)
        return 1.0 + 2.0 * lam

    def phi(self, lam):
        if self.family_id == "stable":
            return lam ** (1.0 - self.beta) / (self.beta - 1.0)
        return math.log1p(1.0 / lam)

    def varphi(self, t):
        if self.family_id == "stable":
            return ((self.beta - 1.0) * t) ** (-1.0 / (self.beta - 1.0))
        return 1.0 / math.expm1(t)

    def ut(self, t, lam):
        if t == 0.0:
            return lam
        return self.varphi(t + self.phi(lam))

    # -- scale function -----------------------------------------------------

    def W(self, x):
        if x <= 0.0:
            return 0.0
        if self.family_id == "stable":
            return x ** (self.beta - 1.0) / math.gamma(self.beta)
        return -math.expm1(-x)

    def W_prime(self, x):
        if self.family_id == "stable":
            b = self.beta
            return (b - 1.0) * x ** (b - 2.0) / math.gamma(b)
        return math.exp(-x)

    # -- limit laws -----------------------------------------------------------

    def yaglom_lt(self, lam):
        if self._critical():
            raise OracleError("no Yaglom law for the critical stable family")
        return 1.0 / (1.0 + lam)

    def ws_lt(self, s, lam):
        """Law of the state conditioned on extinction within (t, t+s], t -> inf."""
        v = self.varphi(s)
        if self._critical():
            return (1.0 + lam / v) ** (1.0 - self.beta)
        return (1.0 + v) / (lam + 1.0 + v)

    def ws_mean(self, s):
        v = self.varphi(s)
        if self._critical():
            return (self.beta - 1.0) / v
        return 1.0 / (1.0 + v)

    def vq_lt(self, q, lam):
        """Law of the state q before a fixed extinction time, t -> inf."""
        v = self.varphi(q)
        if self._critical():
            return (1.0 + lam / v) ** (-self.beta)
        return ((1.0 + v) / (lam + 1.0 + v)) ** 2

    def vq_density(self, q, x):
        v = self.varphi(q)
        if self._critical():
            b = self.beta
            return x ** (b - 1.0) * v ** b * math.exp(-v * x) / math.gamma(b)
        r = 1.0 + v
        return r * r * x * math.exp(-r * x)

    def ws_density(self, s, x):
        v = self.varphi(s)
        if self._critical():
            b = self.beta
            return x ** (b - 2.0) * v ** (b - 1.0) * math.exp(-v * x) / math.gamma(b - 1.0) \
                if b > 1.0 else 0.0
        r = 1.0 + v
        return r * math.exp(-r * x)

    def vinf_lt(self, lam):
        if self._critical():
            raise OracleError("V_inf degenerates for the critical stable family")
        return (1.0 + lam) ** -2.0

    def vinf_density(self, x):
        if self._critical():
            raise OracleError("V_inf degenerates for the critical stable family")
        return x * math.exp(-x)

    def yaglom_density(self, x):
        if self._critical():
            raise OracleError("no Yaglom law for the critical stable family")
        return math.exp(-x)


def stable_family(beta):
    return OracleFamily("stable", beta=beta)


def lpq_family():
    return OracleFamily("linear_plus_quadratic")


_QUANTITIES = ("psi", "psi_prime", "phi", "varphi", "ut", "W", "Wprime",
               "yaglom_lt", "ws_lt", "vq_lt", "vinf_lt")


def oracle_eval(family, quantity, *args):
    """Evaluate a closed-form quantity; args follow the method signatures.

    family: OracleFamily, or a string "stable(beta)" / "linear_plus_quadratic".
    """
    if isinstance(family, str):
        name = family.strip()
        if name.startswith("stable(") and name.endswith(")"):
            family = stable_family(float(name[len("stable("):-1]))
        elif name == "quadratic":
            family = stable_family(2.0)
        elif name == "linear_plus_quadratic":
            family = lpq_family()
        else:
            raise OracleError("unknown oracle family %r" % (name,))
    if quantity not in _QUANTITIES:
        raise OracleError("unknown oracle quantity %r (one of %s)"
                          % (quantity, ", ".join(_QUANTITIES)))
    method = {"Wprime": "W_prime"}.get(quantity, quantity)
    return getattr(family, method)(*args)
