"""Seeded Monte Carlo: exact transitions, Lamperti paths, conditioned estimators.

Sampling strategies
-------------------
For the two closed-form families the transition law is compound Poisson with
exponential clusters:

    Z_t | Z_0 = x  =  sum of N clusters,  N ~ Poisson(x varphi(t)),
    cluster ~ Exp(mean m(t)),  m(t) = t (quadratic) or 1 - e^(-t) (lin+quad),

which reproduces E[e^(-lam Z_t)] = e^(-x u_t(lam)) exactly.  The conditioned
estimators build on the same decomposition restricted to {Z_t > 0} (where all
the weight lives) and, for the fixed-time law, exponentially tilted by
e^(-varphi(q) z); both operations stay inside the compound-Poisson family, so
the proposals are exact and the constant factors cancel in self-normalized
weights.  General mechanisms fall back to the Lamperti construction: an Euler
scheme for the spectrally positive Levy path (small jumps below eps folded
into the Gaussian term) time-changed by the trapezoidal clock of 1/X, with
the step shrunk near the boundary so the clock singularity is resolved.

Determinism
-----------
Work is split into fixed batches; batch b draws from Philox(seed).jumped(b)
and results are reduced in batch order, so estimates are bit-identical for a
fixed seed regardless of worker_count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mechanism import MechanismError

_FAMILIES = ("quadratic", "linear_plus_quadratic")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_paths: int = 100_000
    dt: float = 1e-3
    eps: float = 1e-3
    horizon: float = 200.0
    worker_count: int = 1
    batch_size: int = 1 << 15

    def __post_init__(self):
        if self.dt <= 0.0 or self.eps <= 0.0:
            raise MechanismError("SimConfig needs dt > 0 and eps > 0")


@dataclass
class McEstimate:
    estimate: float
    n: int
    half_width: float
    diagnostics: dict = field(default_factory=dict)


class EstimatorGuardError(RuntimeError):
    """An acceptance-rate or effective-sample-size guard tripped."""


# -- batching ------------------------------------------------------------------


def _batch_sizes(n, batch_size):
    sizes = [batch_size] * (n // batch_size)
    if n % batch_size:
        sizes.append(n % batch_size)
    return sizes


def _rng(seed, batch_index):
    return np.random.Generator(np.random.Philox(seed).jumped(batch_index))


def _map_batches(cfg, sizes, fn, first_index=0):
    """fn(rng, size) per batch, results returned in batch order."""
    jobs = [(first_index + i, s) for i, s in enumerate(sizes)]
    if cfg.worker_count > 1:
        with ThreadPoolExecutor(max_workers=cfg.worker_count) as ex:
            return list(ex.map(lambda js: fn(_rng(cfg.seed, js[0]), js[1]), jobs))
    return [fn(_rng(cfg.seed, j), s) for j, s in jobs]


# -- exact transition sampling ----------------------------------------------------


def _cluster_mean(family, t):
    if family == "quadratic":
        return t
    if family == "linear_plus_quadratic":
        return -math.expm1(-t)
    raise MechanismError(
        "no exact transition decomposition for family %r; use "
        "simulate_lamperti for general mechanisms" % (family,))


def sample_transition_exact(kernel, family, x, t, cfg):
    """n_paths exact draws of Z_t from Z_0 = x (zeros included)."""
    if not (x > 0.0 and t > 0.0):
        raise MechanismError("sample_transition_exact requires x, t > 0")
    m = _cluster_mean(family, t)
    rate = x * kernel.varphi(t)

    def batch(rng, size):
        n_clusters = rng.poisson(rate, size)
        return rng.gamma(n_clusters, m)

    parts = _map_batches(cfg, _batch_sizes(cfg.n_paths, cfg.batch_size), batch)
    return np.concatenate(parts)


def _truncated_poisson(rng, rate, size):
    """Poisson(rate) conditioned on >= 1, vectorized inverse CDF."""
    if rate < 1e-8:
        # P(N >= 2 | N >= 1) < 5e-9: the conditioned law is the point mass 1
        return np.ones(size, dtype=np.int64)
    u = rng.random(size)
    n = np.ones(size, dtype=np.int64)
    pk = rate * math.exp(-rate) / -math.expm1(-rate)
    cum = pk
    k = 1
    pending = u > cum
    while pending.any():
        k += 1
        if k > 10_000_000:
            raise MechanismError("truncated Poisson sampler failed to terminate")
        pk *= rate / k
        cum += pk
        n[pending] += 1
        pending = u > cum
    return n


def sample_transition_positive(kernel, family, x, t, cfg, tilt=0.0, n=None):
    """Exact draws of Z_t conditioned on Z_t > 0, tilted by e^(-tilt * z).

    The tilted zero-truncated law is again compound Poisson-exponential with
    rate x varphi(t)/(1 + m tilt) and cluster mean m/(1 + m tilt), truncated
    at N >= 1; normalizing constants cancel in self-normalized estimators.
    """
    if not (x > 0.0 and t > 0.0 and tilt >= 0.0):
        raise MechanismError("sample_transition_positive requires x, t > 0, tilt >= 0")
    m = _cluster_mean(family, t)
    vt = math.exp(kernel.log_varphi(t))
    rate = x * vt / (1.0 + m * tilt)
    scale = m / (1.0 + m * tilt)
    size = cfg.n_paths if n is None else n

    def batch(rng, bsize):
        n_clusters = _truncated_poisson(rng, rate, bsize)
        return rng.gamma(n_clusters, scale)

    parts = _map_batches(cfg, _batch_sizes(size, cfg.batch_size), batch)
    return np.concatenate(parts)


# -- result containers -------------------------------------------------------------


class ConditionedSample:
    """Unweighted accepted samples of a conditioned law."""

    def __init__(self, samples, diagnostics):
        self.samples = np.asarray(samples)
        self.diagnostics = diagnostics

    @property
    def n(self):
        return self.samples.size

    def laplace(self, lam):
        g = np.exp(-lam * self.samples)
        est = float(g.mean())
        hw = 1.96 * float(g.std(ddof=1)) / math.sqrt(g.size)
        return McEstimate(est, g.size, hw, dict(self.diagnostics))

    def ecdf(self):
        zs = np.sort(self.samples)
        return zs, np.arange(1, zs.size + 1) / zs.size

    def ks_distance(self, cdf):
        """sup |F_n - F| against a callable reference CDF."""
        zs = np.sort(self.samples)
        ref = np.array([cdf(z) for z in zs])
        i = np.arange(1, zs.size + 1)
        return float(max(np.max(ref - (i - 1) / zs.size),
                         np.max(i / zs.size - ref)))


class WeightedSample:
    """Self-normalized importance sample (weights w, points z)."""

    def __init__(self, samples, weights, diagnostics):
        self.samples = np.asarray(samples)
        self.weights = np.asarray(weights)
        self.diagnostics = diagnostics

    @property
    def ess(self):
        sw = float(self.weights.sum())
        sw2 = float((self.weights ** 2).sum())
        return sw * sw / sw2 if sw2 > 0.0 else 0.0

    def laplace(self, lam):
        w = self.weights
        g = np.exp(-lam * self.samples)
        sw = float(w.sum())
        est = float((w * g).sum()) / sw
        resid = w * (g - est)
        hw = 1.96 * math.sqrt(float((resid ** 2).sum())) / sw
        diag = dict(self.diagnostics)
        diag["ess"] = self.ess
        return McEstimate(est, self.samples.size, hw, diag)


# -- conditioned estimators -----------------------------------------------------------


def mc_near_extinction(kernel, family, x, t, s, cfg, n_accept=20_000,
                       min_acceptance=1e-4, max_batches=100_000):
    """Empirical law of Z_t conditioned on extinction within [t, t+s).

    Proposals are exact positive transitions at time t (a zero draw means the
    process died before t and is always rejected); a positive draw z is
    accepted with probability e^(-z varphi(s)) = P_z(extinct within s).
    """
    if not (s > 0.0 and t > 0.0):
        raise MechanismError("mc_near_extinction requires t, s > 0")
    vs = kernel.varphi(s)
    m = _cluster_mean(family, t)
    rate = x * math.exp(kernel.log_varphi(t))

    accepted = []
    proposed = 0
    batch_index = 0
    while sum(a.size for a in accepted) < n_accept:
        if batch_index >= max_batches:
            raise EstimatorGuardError(
                "near-extinction sampler exhausted its batch budget")
        rng = _rng(cfg.seed, batch_index)
        n_clusters = _truncated_poisson(rng, rate, cfg.batch_size)
        z = rng.gamma(n_clusters, m)
        u = rng.random(cfg.batch_size)
        accepted.append(z[u < np.exp(-vs * z)])
        proposed += cfg.batch_size
        batch_index += 1
        if proposed >= 10 * cfg.batch_size:
            acc = sum(a.size for a in accepted) / proposed
            if acc < min_acceptance:
                raise EstimatorGuardError(
                    "acceptance rate %.2e below %.0e: increase t or s"
                    % (acc, min_acceptance))
    samples = np.concatenate(accepted)[:n_accept]
    acc_rate = sum(a.size for a in accepted) / proposed
    diag = {
        "acceptance_rate": float(acc_rate),
        "proposed_positive": proposed,
        "survival_prob": float(-math.expm1(-x * math.exp(kernel.log_varphi(t)))),
    }
    return ConditionedSample(samples, diag)


def mc_fixed_time(kernel, family, x, t, q, cfg, min_ess=100.0):
    """Weighted empirical law of Z_{t-q} conditioned on extinction at time t.

    The h-transform density against the unconditioned law is proportional to
    z e^(-varphi(q) z); the exponential factor is absorbed into the tilted
    proposal, leaving self-normalized weights w(z) = z.
    """
    if not 0.0 < q < t:
        raise MechanismError("mc_fixed_time requires 0 < q < t")
    theta = kernel.varphi(q)
    z = sample_transition_positive(kernel, family, x, t - q, cfg, tilt=theta)
    sample = WeightedSample(z, z, {"tilt": float(theta), "t": t, "q": q})
    if sample.ess < min_ess:
        raise EstimatorGuardError(
            "effective sample size %.1f below %g" % (sample.ess, min_ess))
    return sample


def mc_qprocess(kernel, family, x, t, cfg, min_ess=100.0):
    """Weighted empirical law of the process conditioned on non-extinction.

    Weights are the martingale ratio Z_t e^(alpha t)/x restricted to the
    positive part (zeros carry no weight); the constants cancel in the
    self-normalized transform, and the mean-one property of the full weight
    is reported in diagnostics as `mean_weight`.
    """
    if not t > 0.0:
        raise MechanismError("mc_qprocess requires t > 0")
    z = sample_transition_positive(kernel, family, x, t, cfg, tilt=0.0)
    alpha = kernel.mech.alpha
    lv = kernel.log_varphi(t)
    vt = math.exp(lv)
    if x * vt > 1e-12:
        log_surv = math.log(-math.expm1(-x * vt))
    else:
        log_surv = math.log(x) + lv
    mean_weight = float(z.mean()) * math.exp(alpha * t + log_surv) / x
    sample = WeightedSample(z, z, {
        "t": t, "mean_weight": mean_weight,
        "survival_prob": float(-math.expm1(-x * vt)) if x * vt > 1e-12
        else float(x * vt),
    })
    if sample.ess < min_ess:
        raise EstimatorGuardError(
            "effective sample size %.1f below %g" % (sample.ess, min_ess))
    return sample


def mc_reverse_from_extinction(kernel, family, x, q, cfg,
                               max_unabsorbed=0.01):
    """Empirical law of the state q before absorption, on {zeta > q}.

    The chain is advanced by exact transitions on a uniform grid whose step
    divides q, so the recorded state at zeta_hat - q is an exact grid sample;
    the only discretization is zeta_hat - zeta in [0, step).
    """
    if not (q > 0.0 and x > 0.0):
        raise MechanismError("mc_reverse_from_extinction requires x, q > 0")
    lag = max(1, round(q / cfg.dt))
    step = q / lag
    m = _cluster_mean(family, step)
    v_step = kernel.varphi(step)
    max_steps = int(math.ceil(cfg.horizon / step))

    def batch(rng, size):
        z = np.full(size, float(x))
        ring = np.zeros((lag + 1, size))
        ring[0] = z
        recorded = np.full(size, np.nan)
        absorbed_early = 0
        active = np.arange(size)
        for k in range(1, max_steps + 1):
            za = z[active]
            n_clusters = rng.poisson(v_step * za)
            znew = rng.gamma(n_clusters, m)
            z[active] = znew
            ring[k % (lag + 1), active] = znew
            died = active[znew == 0.0]
            if died.size:
                if k > lag:
                    recorded[died] = ring[(k - lag) % (lag + 1), died]
                else:
                    absorbed_early += died.size
                active = active[znew > 0.0]
            if active.size == 0:
                break
        return recorded, absorbed_early, active.size

    sizes = _batch_sizes(cfg.n_paths, cfg.batch_size)
    parts = _map_batches(cfg, sizes, batch)
    recorded = np.concatenate([p[0] for p in parts])
    absorbed_early = sum(p[1] for p in parts)
    unabsorbed = sum(p[2] for p in parts)
    if unabsorbed > max_unabsorbed * cfg.n_paths:
        raise EstimatorGuardError(
            "%d of %d paths not absorbed by the horizon %.3g"
            % (unabsorbed, cfg.n_paths, cfg.horizon))
    samples = recorded[np.isfinite(recorded)]
    diag = {
        "step": step,
        "absorbed_before_q": absorbed_early,
        "unabsorbed": unabsorbed,
        "grid_bias_bound": "zeta_hat - zeta in [0, %.3g)" % step,
    }
    return ConditionedSample(samples, diag)


# -- Lamperti time-change simulation ---------------------------------------------------


@dataclass
class LampertiPath:
    """One simulated path: Levy skeleton, clock, and the CB readout."""

    times: np.ndarray
    levy_values: np.ndarray
    clock: np.ndarray
    cb_times: np.ndarray
    cb_values: np.ndarray
    absorption_index: int | None
    extinction_time: float | None
    martingale_weights: np.ndarray | None = None
    bridge_weights: np.ndarray | None = None


def _levy_step_params(mech, eps):
    """(jump_rate, jump_sampler, drift_comp, var_small) above/below the cutoff."""
    lv = mech.levy
    if lv.kind == "none":
        return 0.0, None, 0.0, 0.0
    if lv.kind == "power_law":
        c, a = lv.c, lv.a
        rate = c * eps ** -a / a
        mean_big = c * eps ** (1.0 - a) / (a - 1.0)
        var_small = c * eps ** (2.0 - a) / (2.0 - a)

        def sampler(rng, count):
            return eps * rng.random(count) ** (-1.0 / a)

        return rate, sampler, mean_big, var_small
    # tabulated: inverse-CDF over the grid restricted to r >= eps
    grid = lv.r
    lo = max(eps, grid[0])
    pibar_eps, _ = lv.tails(lo)
    rate = pibar_eps
    mean_big = _table_mean_above(lv, lo)
    var_small = _table_var_below(lv, eps)

    def sampler(rng, count):
        u = rng.random(count)
        return np.array([_table_tail_quantile(lv, lo, ui) for ui in u])

    return rate, sampler, mean_big, var_small


def _table_mean_above(lv, lo):
    from scipy.integrate import quad as _quad
    grid = lv.r
    val, _ = _quad(lambda r: r * _table_density(lv, r), lo, grid[-1],
                   epsabs=1e-13, epsrel=1e-9, limit=200)
    coef, qexp = lv._tail_coef()
    if qexp is not None:
        val += coef * grid[-1] ** (1.0 - qexp) / (qexp - 1.0)
    return val


def _table_var_below(lv, eps):
    from scipy.integrate import quad as _quad
    if eps <= lv.r[0]:
        return 0.0
    val, _ = _quad(lambda r: r * r * _table_density(lv, r), lv.r[0],
                   min(eps, lv.r[-1]), epsabs=1e-13, epsrel=1e-9, limit=200)
    return val


def _table_density(lv, r):
    coef, qexp = lv._tail_coef()
    if r > lv.r[-1]:
        return coef * r ** (-1.0 - qexp) if qexp is not None else 0.0
    return float(np.interp(r, lv.r, lv.density, left=0.0))


def _table_tail_quantile(lv, lo, u):
    """Inverse of r -> pibar(r)/pibar(lo) on [lo, inf), by bisection."""
    target = (1.0 - u) * lv.tails(lo)[0]
    a, b = lo, lo * 2.0
    while lv.tails(b)[0] > target:
        b *= 2.0
        if b > 1e12:
            break
    for _ in range(80):
        mid = math.sqrt(a * b)
        if lv.tails(mid)[0] > target:
            a = mid
        else:
            b = mid
    return math.sqrt(a * b)


def _check_jump_rate(rate):
    if rate > 1e7:
        raise MechanismError(
            "jump rate %.3g per unit time exceeds 1e7; increase eps" % rate)


_STEP_DIFFUSE = 0.05   # ds <= _STEP_DIFFUSE * X^2 / var_rate
_STEP_DRIFT = 0.1      # ds <= _STEP_DRIFT * X / |drift|
_ABS_FLOOR_FRAC = 1e-5


def _lamperti_batch(mech, x, t_target, cfg, rng, size):
    """Advance `size` Lamperti paths to CB time t_target or absorption.

    Returns (Z_at_target, absorbed mask, zeta_hat values for absorbed paths).
    """
    rate, sampler, mean_big, var_small = _levy_step_params(mech, cfg.eps)
    _check_jump_rate(rate)
    sig2 = mech.sigma2 + var_small
    drift = -mech.alpha - mean_big        # full compensation of the jump part
    floor = _ABS_FLOOR_FRAC * max(1.0, x)

    X = np.full(size, float(x))
    A = np.zeros(size)
    Z_out = np.zeros(size)
    zeta = np.full(size, np.nan)
    absorbed = np.zeros(size, bool)
    active = np.arange(size)
    levy_elapsed = np.zeros(size)
    # Levy-time guard: the clock reaches t_target before s ~ t_target * max X
    s_guard = 1e4 * max(1.0, t_target) * 50.0

    while active.size:
        Xa = X[active]
        ds = np.minimum(cfg.dt, _STEP_DIFFUSE * Xa * Xa / max(sig2, 1e-300))
        if drift != 0.0:
            ds = np.minimum(ds, _STEP_DRIFT * Xa / abs(drift))
        incr = drift * ds + np.sqrt(sig2 * ds) * rng.standard_normal(active.size)
        if rate > 0.0:
            counts = rng.poisson(rate * ds)
            total = int(counts.sum())
            if total:
                sizes_j = sampler(rng, total)
                owner = np.repeat(np.arange(active.size), counts)
                incr += np.bincount(owner, weights=sizes_j,
                                    minlength=active.size)
        Xn = Xa + incr
        hit = Xn <= floor
        # trapezoidal clock; on the crossing step keep the last safe value
        denom = np.where(hit, Xa, np.maximum(Xn, floor))
        An = A[active] + ds * 0.5 * (1.0 / Xa + 1.0 / denom)
        crossed = An >= t_target
        if crossed.any():
            idx = active[crossed]
            frac = (t_target - A[idx]) / (An[crossed] - A[idx])
            x_end = np.maximum(np.where(hit, 0.0, Xn), 0.0)
            Z_out[idx] = np.maximum(
                X[idx] + frac * (x_end[crossed] - X[idx]), 0.0)
        if hit.any():
            idx = active[hit]
            zeta[idx] = An[hit]
            absorbed[idx] = An[hit] <= t_target
        X[active] = np.where(hit, 0.0, Xn)
        A[active] = An
        levy_elapsed[active] += ds
        if np.any(levy_elapsed[active] > s_guard):
            raise EstimatorGuardError(
                "Lamperti path exceeded the Levy-time guard; raise dt or "
                "lower the target time")
        done = hit | crossed
        active = active[~done]
    return Z_out, absorbed, zeta


def lamperti_terminal_ensemble(mech, x, t_target, cfg):
    """n_paths Lamperti paths: (Z at t_target, absorbed-by-t_target mask, zeta)."""
    sizes = _batch_sizes(cfg.n_paths, cfg.batch_size)
    parts = _map_batches(
        cfg, sizes,
        lambda rng, size: _lamperti_batch(mech, x, t_target, cfg, rng, size))
    Z = np.concatenate([p[0] for p in parts])
    absorbed = np.concatenate([p[1] for p in parts])
    zeta = np.concatenate([p[2] for p in parts])
    return Z, absorbed, zeta


def simulate_lamperti(mech, x, cfg, kernel=None, bridge_horizon=None):
    """One stored Lamperti path up to CB time cfg.horizon or absorption.

    kernel + bridge_horizon attach the h-transform weight series: the
    martingale Z_t e^(alpha t) and, when bridge_horizon=T is given, the
    extinction-at-T bridge weight Z_t e^(-varphi(T-t) Z_t) psi(varphi(T-t)).
    """
    if not x > 0.0:
        raise MechanismError("simulate_lamperti requires x > 0")
    rate, sampler, mean_big, var_small = _levy_step_params(mech, cfg.eps)
    _check_jump_rate(rate)
    sig2 = mech.sigma2 + var_small
    drift = -mech.alpha - mean_big
    floor = _ABS_FLOOR_FRAC * max(1.0, x)
    rng = _rng(cfg.seed, 0)

    times = [0.0]
    xs = [float(x)]
    clock = [0.0]
    X = float(x)
    A = 0.0
    s = 0.0
    ext_time = None
    while A < cfg.horizon:
        ds = min(cfg.dt, _STEP_DIFFUSE * X * X / max(sig2, 1e-300))
        if drift != 0.0:
            ds = min(ds, _STEP_DRIFT * X / abs(drift))
        incr = drift * ds + math.sqrt(sig2 * ds) * rng.standard_normal()
        if rate > 0.0:
            count = rng.poisson(rate * ds)
            if count:
                incr += float(np.sum(sampler(rng, count)))
        Xn = X + incr
        s += ds
        if Xn <= floor:
            A += ds * 0.5 * (1.0 / X + 1.0 / X)
            X = 0.0
            times.append(s)
            xs.append(0.0)
            clock.append(A)
            ext_time = A
            break
        A += ds * 0.5 * (1.0 / X + 1.0 / Xn)
        X = Xn
        times.append(s)
        xs.append(X)
        clock.append(A)

    times = np.array(times)
    xs = np.array(xs)
    clock = np.array(clock)
    t_end = ext_time if ext_time is not None else cfg.horizon
    n_out = min(2048, max(2, int(math.ceil(t_end / cfg.dt))))
    cb_times = np.linspace(0.0, t_end, n_out)
    cb_values = np.interp(cb_times, clock, xs)
    absorption_index = None
    if ext_time is not None:
        absorption_index = int(np.searchsorted(cb_times, ext_time))
        cb_values[absorption_index:] = 0.0

    mart = None
    bridge = None
    if kernel is not None:
        mart = cb_values * np.exp(kernel.mech.alpha * cb_times)
        if bridge_horizon is not None:
            T = bridge_horizon
            bridge = np.array([
                z * math.exp(-kernel.varphi(T - t) * z)
                * kernel.mech.psi(kernel.varphi(T - t))
                if 0.0 < t < T and z > 0.0 else (z if t == 0.0 else 0.0)
                for t, z in zip(cb_times, cb_values)])
    return LampertiPath(times, xs, clock, cb_times, cb_values,
                        absorption_index, ext_time, mart, bridge)
