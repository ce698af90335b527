"""Conditional and limit laws at the Laplace-transform level.

All laws live on (0, inf) and are described primarily through their Laplace
transforms built from the extinction calculus:

  * quasi-stationary family (subcritical): nu_beta^(lam) = 1 - e^(-beta phi(lam)),
    0 < beta <= alpha; beta = alpha is the Yaglom law, the limit of Z_t
    conditioned on survival.
  * mu_s: size-biased stationary measure, density e^(-varphi(s)x) W(x)/(s x);
    the critical near-extinction limit.
  * W_s: limit of Z_t conditioned on extinction within (t, t+s].
  * V_q: limit of the state q before a fixed extinction time; infinitely
    divisible with exponent l_q(lam), drift 0 and Levy density v_q(x)/x.
  * V_inf: q -> inf limit of V_q, nondegenerate exactly under the
    drift + r log r condition; also the long-run law of the process
    conditioned on never dying (the h-transform by Z_t e^(alpha t)).
"""

import math

import numpy as np
from scipy.integrate import quad

from .mechanism import MechanismError

_DEFAULT_GRID = (0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)


class LawDomainError(MechanismError):
    """The requested law does not exist for this mechanism."""


class LimitLaw:
    """A law on (0, inf): transform evaluator plus optional extras.

    lt(lam) is always available; density, mean and the Levy pair
    (drift, levy_density = x -> v(x)/x) are filled where closed or
    quadrature forms exist.
    """

    def __init__(self, kind, params, lt, density=None, mean=None,
                 drift=None, levy_density=None):
        self.kind = kind
        self.params = params
        self.lt = lt
        self.density = density
        self.mean = mean
        self.drift = drift
        self.levy_density = levy_density

    def __repr__(self):
        return "LimitLaw(kind=%r, params=%r)" % (self.kind, self.params)


# -- quasi-stationary / Yaglom -------------------------------------------------


def qsd_lt(kernel, beta, lam):
    """Transform 1 - e^(-beta phi(lam)) of the QSD with decay rate beta."""
    alpha = kernel.mech.alpha
    if alpha <= 0.0:
        raise LawDomainError("critical mechanisms admit no QSD")
    if not 0.0 < beta <= alpha:
        raise LawDomainError("QSD rate must satisfy 0 < beta <= alpha=%g" % alpha)
    if not lam > 0.0:
        raise MechanismError("transform argument must be positive")
    return -math.expm1(-beta * kernel.phi(lam))


def yaglom_lt(kernel, lam):
    """Transform of the Yaglom law (the QSD with beta = alpha)."""
    alpha = kernel.mech.alpha
    if alpha <= 0.0:
        raise LawDomainError(
            "no Yaglom law in this normalization for critical mechanisms")
    return qsd_lt(kernel, alpha, lam)


def yaglom_mean(kernel):
    """Mean of the Yaglom law; +inf when the r log r moment fails.

    Computed from the subcritical expansion constant C of the kernel:
    varphi(t) ~ e^(alpha C) e^(-alpha t), and the mean equals e^(-alpha C).
    A small-lambda limit of (1 - lt)/lam is used as a crosscheck in tests.
    """
    alpha = kernel.mech.alpha
    if alpha <= 0.0:
        raise LawDomainError(
            "no Yaglom law in this normalization for critical mechanisms")
    if not kernel.mechanism_class.xlogx_holds:
        return math.inf
    return math.exp(-alpha * kernel._C)


# -- size-biased stationary law -------------------------------------------------


def mu_s_density(scale, kernel, s, x):
    """Density e^(-varphi(s) x) W(x) / (s x) of the size-biased stationary law."""
    if not (s > 0.0 and x > 0.0):
        raise MechanismError("mu_s_density requires s, x > 0")
    return math.exp(-kernel.varphi(s) * x) * scale.W(x) / (s * x)


def mu_s_lt(kernel, s, lam):
    """Transform phi(lam + varphi(s)) / s."""
    if not (s > 0.0 and lam >= 0.0):
        raise MechanismError("mu_s_lt requires s > 0, lam >= 0")
    return kernel.phi(lam + kernel.varphi(s)) / s


# -- near-extinction limit W_s ---------------------------------------------------


def ws_lt(kernel, s, lam):
    """Transform of W_s, the limit conditioned on extinction in (t, t+s]."""
    if not (s > 0.0 and lam > 0.0):
        raise MechanismError("ws_lt requires s, lam > 0")
    alpha = kernel.mech.alpha
    shifted = kernel.phi(lam + kernel.varphi(s))
    if alpha == 0.0:
        return shifted / s
    return math.expm1(-alpha * shifted) / math.expm1(-alpha * s)


def ws_mean(kernel, s):
    """E[W_s] = alpha / ((e^(alpha s) - 1) psi(varphi(s))), or the alpha=0 form."""
    if not s > 0.0:
        raise MechanismError("ws_mean requires s > 0")
    alpha = kernel.mech.alpha
    pv = kernel.mech.psi(kernel.varphi(s))
    if alpha == 0.0:
        return 1.0 / (s * pv)
    return alpha / (math.expm1(alpha * s) * pv)


# -- fixed-extinction-time limit V_q ---------------------------------------------


def vq_laplace_exponent(kernel, q, lam, crosscheck=False):
    """l_q(lam) = alpha (phi(lam + varphi(q)) - q) + log(psi(lam+varphi(q)) / psi(varphi(q))).

    crosscheck=True also evaluates the integral form
    int_{varphi(q)}^{lam+varphi(q)} (psi'(s) - alpha)/psi(s) ds and asserts
    agreement within 1e-7.
    """
    if not (q > 0.0 and lam >= 0.0):
        raise MechanismError("vq_laplace_exponent requires q > 0, lam >= 0")
    if lam == 0.0:
        return 0.0
    mech = kernel.mech
    alpha = mech.alpha
    vq = kernel.varphi(q)
    if vq > 0.0 and vq > 1e-250:
        val = alpha * (kernel.phi(lam + vq) - q) \
            + math.log(mech.psi(lam + vq) / mech.psi(vq))
    else:
        # varphi(q) under/near underflow: psi(varphi(q)) ~ alpha varphi(q),
        # so log psi(varphi(q)) = log alpha + log_varphi(q) exactly
        val = alpha * (kernel.phi(lam) - q) + math.log(mech.psi(lam)) \
            - math.log(alpha) - kernel.log_varphi(q)
    if crosscheck:
        ref = _vq_exponent_integral(kernel, q, lam)
        if not abs(ref - val) <= 1e-7 * max(1.0, abs(val)):
            raise ArithmeticError(
                "V_q exponent crosscheck failed: closed %.12g vs integral %.12g"
                % (val, ref))
    return val


def _vq_exponent_integral(kernel, q, lam):
    mech = kernel.mech
    vq = kernel.varphi(q)
    val, _ = quad(lambda s: mech.psi_prime_nonlinear(s) / mech.psi(s),
                  vq, lam + vq, epsabs=1e-14, epsrel=1e-10, limit=300)
    return val


def vq_lt(kernel, q, lam):
    """Transform e^(-l_q(lam)) of V_q."""
    return math.exp(-vq_laplace_exponent(kernel, q, lam))


def vq_levy_density(scale, kernel, q, x):
    """v_q(x) = e^(-varphi(q) x) [sigma2 W'(x) + int (W(x) - W(x-r)) r pi(dr)].

    The Levy measure of V_q is v_q(x)/x dx with zero drift.  The jump
    quadrature is split at r = x, the kink of W(x - r).
    """
    if not (q > 0.0 and x > 0.0):
        raise MechanismError("vq_levy_density requires q, x > 0")
    return math.exp(-kernel.varphi(q) * x) * _levy_core(scale, x)


def _levy_core(scale, x):
    mech = scale.mech
    if mech.sigma2 == 0.0 and mech.levy.is_trivial():
        raise MechanismError(
            "mechanism has neither Gaussian nor jump part; not accepted")
    val = mech.sigma2 * scale.W_prime(x)
    lv = mech.levy
    if lv.is_trivial():
        return val
    Wx = scale.W(x)

    def integrand(r):
        return (Wx - scale.W(x - r)) * r * _levy_density_value(lv, r)

    near, _ = quad(integrand, 0.0, x, epsabs=1e-13, epsrel=1e-9, limit=300,
                   points=None)
    # beyond r = x the bracket is the constant W(x)
    far = Wx * _levy_first_moment_tail(lv, x)
    return val + near + far


def _levy_density_value(lv, r):
    if lv.kind == "power_law":
        return lv.c * r ** (-1.0 - lv.a)
    if lv.kind == "table":
        coef, qexp = lv._tail_coef()
        if r > lv.r[-1]:
            return coef * r ** (-1.0 - qexp) if qexp is not None else 0.0
        return float(np.interp(r, lv.r, lv.density, left=0.0))
    return 0.0


def _levy_first_moment_tail(lv, x):
    """int_x^inf r pi(dr)."""
    if lv.kind == "power_law":
        return lv.c * x ** (1.0 - lv.a) / (lv.a - 1.0)
    if lv.kind == "table":
        val, _ = quad(lambda r: r * _levy_density_value(lv, r), x,
                      max(2.0 * x, lv.r[-1]), epsabs=1e-13, epsrel=1e-9,
                      limit=300)
        coef, qexp = lv._tail_coef()
        lo = max(x, lv.r[-1])
        if qexp is not None:
            val += coef * lo ** (1.0 - qexp) / (qexp - 1.0)
        return val
    return 0.0


# -- q -> inf limit V_inf -----------------------------------------------------------


def vinf_exists(mechanism):
    """True when alpha > 0 and int r log r pi(dr) < inf (V_q stays tight)."""
    return mechanism.classify().xlogx_holds


def vinf_laplace_exponent(kernel, lam):
    """l_inf(lam) = int_0^lam (psi'(s) - alpha)/psi(s) ds."""
    if not lam > 0.0:
        raise MechanismError("vinf_laplace_exponent requires lam > 0")
    if not kernel.mechanism_class.xlogx_holds:
        raise LawDomainError(
            "V_inf degenerate at infinity: drift or r log r condition fails")
    mech = kernel.mech
    val, _ = quad(lambda s: mech.psi_prime_nonlinear(s) / mech.psi(s),
                  0.0, lam, epsabs=1e-14, epsrel=1e-10, limit=300)
    return val


def vinf_lt(kernel, lam):
    """Transform e^(-l_inf(lam)) of V_inf."""
    return math.exp(-vinf_laplace_exponent(kernel, lam))


def vinf_levy_density(scale, x):
    """v_inf(x) = sigma2 W'(x) + int (W(x) - W(x-r)) r pi(dr), Levy density v/x."""
    if not x > 0.0:
        raise MechanismError("vinf_levy_density requires x > 0")
    return _levy_core(scale, x)


# -- size-bias relations and law factory ---------------------------------------------


def size_bias_check(law_a, law_b, lam_grid=_DEFAULT_GRID, h_scale=1e-4):
    """sup_lam | L_A(lam) + L_B'(lam) / E[B] |.

    Zero (up to differencing error) when A is the size-biased version of B,
    since the size-biased transform is -L_B'(lam)/E[B].  L_B' is a central
    difference with h = h_scale * (1 + lam).
    """
    if law_b.mean is None or not math.isfinite(law_b.mean):
        raise MechanismError("size_bias_check needs a finite mean for law B")
    worst = 0.0
    for lam in lam_grid:
        h = h_scale * (1.0 + lam)
        deriv = (law_b.lt(lam + h) - law_b.lt(lam - h)) / (2.0 * h)
        worst = max(worst, abs(law_a.lt(lam) + deriv / law_b.mean))
    return worst


def limit_law(kernel, kind, scale=None, **params):
    """Assemble a LimitLaw record for one of the supported kinds.

    kinds: "qsd" (beta=...), "yaglom", "mus" (s=...), "ws" (s=...),
    "vq" (q=...), "vinf".  scale is required for kinds carrying a density
    or a Levy density ("mus", "vq", "vinf").
    """
    if kind == "qsd":
        beta = params["beta"]
        return LimitLaw("qsd", {"beta": beta},
                        lambda lam: qsd_lt(kernel, beta, lam))
    if kind == "yaglom":
        return LimitLaw("yaglom", {}, lambda lam: yaglom_lt(kernel, lam),
                        mean=yaglom_mean(kernel))
    if kind == "mus":
        s = params["s"]
        dens = None
        if scale is not None:
            dens = lambda x: mu_s_density(scale, kernel, s, x)
        return LimitLaw("mus", {"s": s},
                        lambda lam: mu_s_lt(kernel, s, lam), density=dens)
    if kind == "ws":
        s = params["s"]
        return LimitLaw("ws", {"s": s}, lambda lam: ws_lt(kernel, s, lam),
                        mean=ws_mean(kernel, s))
    if kind == "vq":
        q = params["q"]
        levy = None
        if scale is not None:
            levy = lambda x: vq_levy_density(scale, kernel, q, x) / x
        return LimitLaw("vq", {"q": q}, lambda lam: vq_lt(kernel, q, lam),
                        drift=0.0, levy_density=levy)
    if kind == "vinf":
        if not vinf_exists(kernel.mech):
            raise LawDomainError(
                "V_inf degenerate at infinity: drift or r log r condition fails")
        levy = None
        if scale is not None:
            levy = lambda x: vinf_levy_density(scale, x) / x
        return LimitLaw("vinf", {}, lambda lam: vinf_lt(kernel, lam),
                        drift=0.0, levy_density=levy)
    raise MechanismError("unknown law kind %r" % (kind,))


def frullani_residual(scale, kernel, q, lam):
    """| int (1 - e^(-lam x)) v_q(x)/x dx - l_q(lam) |, the triplet identity."""
    target = vq_laplace_exponent(kernel, q, lam)

    def integrand(x):
        return -math.expm1(-lam * x) * vq_levy_density(scale, kernel, q, x) / x

    val, _ = quad(integrand, 0.0, 80.0 / min(1.0, kernel.varphi(q)),
                  epsabs=1e-12, epsrel=1e-8, limit=400)
    return abs(val - target)
