"""Extinction calculus for almost-surely-extinguishing mechanisms.

Everything rests on the decreasing bijection

    phi(lam) = int_lam^inf du / psi(u),        lam > 0,

its inverse varphi, and the log-Laplace flow u_t(lam) = varphi(t + phi(lam)).
The absorption time zeta then has P_x(zeta <= t) = exp(-x varphi(t)).

phi is evaluated from a strictly monotone log-grid cache: node values are
accumulated once (tail by extrapolated dyadic windows, panels by fixed Gauss
segments that are exact at this spacing), and a query integrates the short
remainder panel from the nearest cached node, so every returned value is a
genuine quadrature result rather than an interpolation.  varphi is a
bracketed, safeguarded Newton iteration on the cache using phi'(x) = -1/psi(x).

For subcritical mechanisms varphi(t) decays like exp(-alpha t) and leaves
double range near t ~ 700; the kernel switches to the exact small-argument
expansion  phi(x) = -(1/alpha) log x + C + eps(x)  (eps(x) -> 0, computed by
cancellation-free quadrature), which also provides log_varphi for arbitrarily
large t.
"""

import math
import warnings

import numpy as np
from scipy.integrate import quad, solve_ivp

from .mechanism import MechanismError
from .quadrature import gauss_segment, tail_integral

_NODES_PER_DECADE = 8
_VARPHI_CAP = 1e12


class ExtinctionKernel:
    """phi / varphi / u_t evaluator bound to one mechanism.

    Immutable after warm-up in the sense that cache extensions recompute pure
    values idempotently; concurrent readers may at worst duplicate work.
    """

    def __init__(self, mechanism, tol_phi=1e-9, lam_lo=1e-8, lam_hi=1e8):
        cls = mechanism.classify()
        if not cls.grey_holds:
            raise MechanismError(
                "non-extinguishing mechanism: int^inf dlam/psi(lam) diverges")
        self.mech = mechanism
        self.mechanism_class = cls
        self.tol_phi = tol_phi
        self._inv_psi = lambda u: 1.0 / mechanism.psi(u)
        self._build_grid(lam_lo, lam_hi)
        # subcritical small-x expansion phi(x) = -log(x)/alpha + C + eps(x)
        self._small_switch = lam_lo
        self._C = self._expansion_constant() if mechanism.alpha > 0.0 else None

    # -- phi cache ----------------------------------------------------------

    def _build_grid(self, lam_lo, lam_hi):
        n = int(round(_NODES_PER_DECADE * math.log10(lam_hi / lam_lo))) + 1
        nodes = np.geomspace(lam_lo, lam_hi, n)
        tail, ok = tail_integral(self._inv_psi, nodes[-1],
                                 rel_tol=min(self.tol_phi, 1e-11) * 0.1)
        if not ok:
            raise MechanismError("phi tail integral failed to converge")
        phis = np.empty_like(nodes)
        phis[-1] = tail
        for i in range(n - 2, -1, -1):
            phis[i] = phis[i + 1] + gauss_segment(self._inv_psi, nodes[i],
                                                  nodes[i + 1])
        self._nodes = nodes
        self._phis = phis

    def _extend_down(self, lam):
        nodes, phis = self._nodes, self._phis
        new_nodes = []
        lo = nodes[0]
        while lo > lam:
            lo /= 10.0 ** (1.0 / _NODES_PER_DECADE)
            new_nodes.append(lo)
        new_nodes = np.array(new_nodes[::-1])
        add = np.empty_like(new_nodes)
        acc = phis[0]
        ref = nodes[0]
        for i in range(len(new_nodes) - 1, -1, -1):
            acc += gauss_segment(self._inv_psi, new_nodes[i], ref)
            add[i] = acc
            ref = new_nodes[i]
        self._nodes = np.concatenate([new_nodes, nodes])
        self._phis = np.concatenate([add, phis])

    def _extend_up(self, lam):
        nodes, phis = self._nodes, self._phis
        hi = nodes[-1]
        new_nodes = []
        while hi < lam:
            hi *= 10.0 ** (1.0 / _NODES_PER_DECADE)
            new_nodes.append(hi)
        new_nodes = np.array(new_nodes)
        tail, ok = tail_integral(self._inv_psi, new_nodes[-1],
                                 rel_tol=min(self.tol_phi, 1e-11) * 0.1)
        if not ok:
            raise MechanismError("phi tail integral failed to converge")
        add = np.empty_like(new_nodes)
        add[-1] = tail
        for i in range(len(new_nodes) - 2, -1, -1):
            add[i] = add[i + 1] + gauss_segment(self._inv_psi, new_nodes[i],
                                                new_nodes[i + 1])
        self._nodes = np.concatenate([nodes, new_nodes])
        self._phis = np.concatenate([phis, add])

    def _expansion_constant(self):
        alpha = self.mech.alpha
        x0 = self._small_switch
        eps0 = self._eps_integral(x0)
        return self.phi(x0) + math.log(x0) / alpha - eps0

    def _eps_integral(self, x):
        """eps(x) = int_0^x (1/(alpha u) - 1/psi(u)) du, cancellation-free."""
        alpha = self.mech.alpha
        if x <= 0.0:
            return 0.0

        def integrand(u):
            return self.mech.psi_nonlinear(u) / (alpha * u * self.mech.psi(u))

        val, _ = quad(integrand, 0.0, x, epsabs=1e-16, epsrel=1e-11, limit=200)
        return val

    # -- phi / varphi ------------------------------------------------------

    def phi(self, lam):
        """phi(lam) = int_lam^inf du/psi(u), relative accuracy ~ tol_phi."""
        if np.ndim(lam) > 0:
            return np.array([self.phi(x) for x in np.asarray(lam)])
        lam = float(lam)
        if not lam > 0.0:
            raise MechanismError("phi requires lam > 0")
        if self.mech.alpha > 0.0 and lam < self._small_switch:
            return -math.log(lam) / self.mech.alpha + self._C \
                + self._eps_integral(lam)
        if lam < self._nodes[0]:
            self._extend_down(lam)
        if lam > self._nodes[-1]:
            if lam > 1e14:
                # far tail: integrate directly instead of growing the cache
                val, ok = tail_integral(self._inv_psi, lam,
                                        rel_tol=self.tol_phi * 0.1)
                if not ok:
                    raise MechanismError("phi tail integral failed to converge")
                return val
            self._extend_up(lam)
        nodes, phis = self._nodes, self._phis
        j = int(np.searchsorted(nodes, lam, side="right"))
        if j >= len(nodes):
            return float(phis[-1])
        anchor = nodes[j]
        if anchor == lam:
            return float(phis[j])
        return float(phis[j]) + gauss_segment(self._inv_psi, lam, anchor)

    def varphi(self, t):
        """Inverse of phi: the unique x > 0 with phi(x) = t.

        Residual |phi(varphi(t)) - t| <= 5e-12 * max(t, 1).  Values above
        1e12 (t below phi(1e12)) are clamped with a RuntimeWarning.
        """
        if np.ndim(t) > 0:
            return np.array([self.varphi(x) for x in np.asarray(t)])
        t = float(t)
        if not t > 0.0:
            raise MechanismError("varphi requires t > 0")
        mech = self.mech
        if mech.alpha > 0.0 and t >= self.phi(self._small_switch):
            return math.exp(self.log_varphi(t))
        if t < self._phis[-1] and t <= self.phi(_VARPHI_CAP):
            warnings.warn(
                "varphi(%.3g) exceeds the evaluation cap 1e12; clamped" % t,
                RuntimeWarning)
            return _VARPHI_CAP
        return self._varphi_newton(t)

    def _varphi_newton(self, t):
        nodes, phis = self._nodes, self._phis
        # ensure the root is inside the cached range
        while t > phis[0]:
            self._extend_down(nodes[0] * 0.1)
            nodes, phis = self._nodes, self._phis
        while t < phis[-1]:
            self._extend_up(nodes[-1] * 10.0)
            nodes, phis = self._nodes, self._phis
        # initial guess + bracket from the monotone node table
        x = float(np.interp(t, phis[::-1], nodes[::-1]))
        j = int(np.clip(np.searchsorted(-phis, -t, side="right"), 1, len(nodes) - 1))
        lo, hi = nodes[j - 1], nodes[j]
        x = min(max(x, lo), hi)
        tol = 5e-12 * max(t, 1.0)
        for _ in range(100):
            r = self.phi(x) - t
            if abs(r) <= tol:
                return x
            if r > 0.0:
                lo = max(lo, x)  # phi too large -> root is to the right
            else:
                hi = min(hi, x)
            step = r * self.mech.psi(x)  # Newton with phi'(x) = -1/psi(x)
            xn = x + step
            if not (lo < xn < hi):
                xn = math.sqrt(lo * hi)
            x = xn
        raise MechanismError(
            "varphi bracketing failed at t=%.6g (last bracket [%g, %g])"
            % (t, lo, hi))

    def log_varphi(self, t):
        """log varphi(t), valid for arbitrarily large t.

        Subcritical: solved from the small-argument expansion, so it stays
        exact long after varphi itself underflows.  Otherwise the plain log.
        """
        t = float(t)
        mech = self.mech
        if mech.alpha > 0.0 and t >= self.phi(self._small_switch):
            alpha, C = mech.alpha, self._C
            lv = -alpha * (t - C)
            for _ in range(3):
                v = math.exp(lv) if lv > -700.0 else 0.0
                lv_new = -alpha * (t - C - self._eps_integral(v))
                if abs(lv_new - lv) <= 1e-14 * max(1.0, abs(lv_new)):
                    lv = lv_new
                    break
                lv = lv_new
            return lv
        return math.log(self.varphi(t))

    # -- flow and extinction law ---------------------------------------------

    def u_t(self, t, lam, crosscheck=False):
        """u_t(lam) = varphi(t + phi(lam)); u_0(lam) = lam exactly.

        crosscheck=True integrates du/dt = -psi(u) with an adaptive explicit
        scheme and asserts agreement within 1e-6 relative.
        """
        if not lam > 0.0:
            raise MechanismError("u_t requires lam > 0")
        if t < 0.0:
            raise MechanismError("u_t requires t >= 0")
        if t == 0.0:
            return float(lam)
        val = self.varphi(t + self.phi(lam))
        if crosscheck:
            ode = self._u_t_ode(t, lam)
            if not abs(ode - val) <= 1e-6 * max(val, 1e-300):
                raise ArithmeticError(
                    "u_t crosscheck failed: root path %.12g vs ODE %.12g"
                    % (val, ode))
        return val

    def _u_t_ode(self, t, lam):
        sol = solve_ivp(lambda _s, u: [-self.mech.psi(u[0])], (0.0, t), [lam],
                        method="RK45", rtol=1e-9, atol=1e-13)
        if not sol.success:
            raise ArithmeticError("u_t ODE crosscheck did not converge")
        return float(sol.y[0, -1])

    def extinction_cdf(self, x, t):
        """P_x(zeta <= t) = exp(-x varphi(t))."""
        if not (x > 0.0 and t > 0.0):
            raise MechanismError("extinction_cdf requires x, t > 0")
        return math.exp(-x * self.varphi(t))

    def extinction_pdf(self, x, t):
        """Density of zeta under P_x:  x e^(-x varphi(t)) psi(varphi(t))."""
        if not (x > 0.0 and t > 0.0):
            raise MechanismError("extinction_pdf requires x, t > 0")
        v = self.varphi(t)
        return x * math.exp(-x * v) * self.mech.psi(v)

    def varphi_ratio(self, t, s):
        """varphi(t+s)/varphi(t) computed in log space (-> e^(-alpha s))."""
        return math.exp(self.log_varphi(t + s) - self.log_varphi(t))


def normalized_transition_transform(kernel, x, lam, t):
    """(E_x[e^(-lam Z_t); Z_t > 0]) / (x psi(varphi(t))), evaluated stably.

    As t -> inf this tends to phi(lam) in the critical case and to
    (1 - e^(-alpha phi(lam)))/alpha in the subcritical case.
    """
    v = kernel.varphi(t)
    u = kernel.u_t(t, lam)
    # e^{-xu} - e^{-xv} = e^{-xv} expm1(x(v-u)); v-u stays well-conditioned
    return math.exp(-x * v) * math.expm1(x * (v - u)) \
        / (x * kernel.mech.psi(v))


def rescaled_conditional_transform(kernel, x, theta, t):
    """E_x[exp(-theta Z_t / t) | zeta > t], critical rescaling t*Q_t = 1.

    For psi(lam)=lam^2 this tends to 1/(1+theta) as t -> inf.
    """
    v = kernel.varphi(t)
    u = kernel.u_t(t, theta / t)
    num = math.exp(-x * v) * math.expm1(x * (v - u))
    den = -math.expm1(-x * v)
    return num / den
