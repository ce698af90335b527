"""Cross-module consistency gates behind the `verify` command.

Each gate measures one identity the analytic layers must satisfy jointly
(transform round trips, the flow property, limit theorems at their stated
horizons) and compares against a fixed threshold.  Everything here is a thin
composition of library calls so the CLI output is reproducible from the API.
"""

import math

import numpy as np

from . import laws
from .extinction import ExtinctionKernel, normalized_transition_transform
from .scale import ScaleFunction


class GateResult:
    """One verify row: measured value vs threshold; passed=None means n/a."""

    def __init__(self, name, value, threshold, passed, note=""):
        self.name = name
        self.value = value
        self.threshold = threshold
        self.passed = passed
        self.note = note

    def row(self):
        status = "n/a" if self.passed is None else ("pass" if self.passed else "FAIL")
        val = "" if self.value is None else "%.3e" % self.value
        thr = "" if self.threshold is None else "%.1e" % self.threshold
        return (self.name, val, thr, status, self.note)


def _gate(name, value, threshold, note=""):
    return GateResult(name, value, threshold, bool(value <= threshold), note)


def _na(name, note):
    return GateResult(name, None, None, None, note)


def run_verify(mechanism, seed=1234):
    """Run the full gate suite; returns a list of GateResult."""
    kernel = ExtinctionKernel(mechanism)
    scale = ScaleFunction(mechanism)
    alpha = mechanism.alpha
    results = []

    # transform round trip of the numerically inverted scale function
    worst = max(scale.roundtrip_residual(lam) for lam in (0.5, 1.0, 2.0, 5.0, 10.0))
    results.append(_gate("laplace-roundtrip", worst, 1e-6,
                         "int e^(-lam x) W dx vs 1/psi at 5 points"))

    # flow property u_{t+s} = u_t o u_s on a seeded random grid
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(8):
        t, s = rng.uniform(0.1, 4.0, 2)
        lam = rng.uniform(0.2, 5.0)
        a = kernel.u_t(t + s, lam)
        b = kernel.u_t(t, kernel.u_t(s, lam))
        worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    results.append(_gate("flow-property", worst, 1e-7,
                         "u_{t+s}(lam) vs u_t(u_s(lam)), 8 random triples"))

    # stationarity identity through three computed routines
    worst = 0.0
    for t in (0.5, 1.0, 2.0, 4.0, 8.0):
        for lam in (0.25, 0.5, 1.0, 2.0, 4.0):
            worst = max(worst, abs(kernel.phi(kernel.u_t(t, lam)) - t
                                   - kernel.phi(lam)))
    results.append(_gate("stationarity-identity", worst, 1e-9,
                         "|phi(u_t(lam)) - t - phi(lam)| on a 5x5 grid"))

    # normalized transition limit
    lam, x = 1.0, 1.0
    if alpha == 0.0:
        val = normalized_transition_transform(kernel, x, lam, 1e4)
        target = kernel.phi(lam)
        results.append(_gate("transition-limit", abs(val - target), 2e-4,
                             "critical normalization at t=1e4 vs phi(lam)"))
    else:
        val = normalized_transition_transform(kernel, x, lam, 30.0)
        target = -math.expm1(-alpha * kernel.phi(lam)) / alpha
        results.append(_gate("transition-limit", abs(val - target), 1e-4,
                             "subcritical normalization at t=30"))

    # potential measure converges vaguely to the stationary measure
    worst = max(abs(scale.potential_transform(50.0, lam) - kernel.phi(lam))
                for lam in (1.0, 2.0))
    results.append(_gate("potential-vague-limit", worst, 1e-4,
                         "int e^(-lam y) g(50, y) dy vs phi(lam)"))

    # V_q is the size-biased near-extinction law
    q = 1.0
    law_vq = laws.limit_law(kernel, "vq", q=q)
    law_wq = laws.limit_law(kernel, "ws", s=q)
    resid = laws.size_bias_check(law_vq, law_wq)
    results.append(_gate("size-bias-vq-wq", resid, 1e-4,
                         "V_q transform vs size-biased W_q at q=1"))

    # subcritical-only families
    if alpha > 0.0:
        betas = np.linspace(alpha / 4.0, alpha, 4)
        ordered = all(
            laws.qsd_lt(kernel, b1, lam) <= laws.qsd_lt(kernel, b2, lam) + 1e-12
            for lam in (0.5, 1.0, 2.0)
            for b1, b2 in zip(betas[:-1], betas[1:]))
        results.append(GateResult("qsd-ordering", 0.0 if ordered else 1.0, 0.5,
                                  ordered, "transform increasing in the decay rate"))
        if kernel.mechanism_class.xlogx_holds:
            law_vinf = laws.limit_law(kernel, "vinf")
            law_th = laws.limit_law(kernel, "yaglom")
            resid = laws.size_bias_check(law_vinf, law_th)
            results.append(_gate("size-bias-vinf-yaglom", resid, 1e-4,
                                 "V_inf transform vs size-biased Yaglom law"))
        else:
            results.append(_na("size-bias-vinf-yaglom",
                               "n/a (r log r moment fails)"))
    else:
        results.append(_na("qsd-ordering", "n/a (critical)"))
        results.append(_na("size-bias-vinf-yaglom", "n/a (critical)"))

    return results


def all_passed(results):
    return all(r.passed is not False for r in results)
