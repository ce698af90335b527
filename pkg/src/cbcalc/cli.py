"""Command-line front end.

Every number printed here is reproducible through a library call with the
same arguments; the CLI only parses, dispatches and formats.  Curves go to
CSV (header row, 10 significant digits), scalar results to JSON (sorted
keys, so identical runs are byte-identical).  With --out DIR the same
payloads are written to files and a run manifest is recorded.

Exit codes: 0 success, 1 gate or estimator failure, 2 configuration error.
"""

import hashlib
import json
import math
import sys
import time

import click
import numpy as np

from . import __version__, laws
from .extinction import ExtinctionKernel, rescaled_conditional_transform
from .gates import all_passed, run_verify
from .mechanism import MechanismError, load_mechanism
from .montecarlo import (EstimatorGuardError, SimConfig, mc_fixed_time,
                         mc_near_extinction, mc_qprocess,
                         mc_reverse_from_extinction)
from .reference import OracleError, oracle_eval
from .scale import ScaleFunction, closed_form_scale, potential_mass

_EXIT_GATE = 1
_EXIT_CONFIG = 2


def _fmt(x):
    if isinstance(x, float):
        return "%.10g" % x
    return str(x)


class _Run:
    """Collects output files and writes the manifest when --out is given."""

    def __init__(self, command, out_dir, mech_path=None, seed=None):
        self.command = command
        self.out_dir = out_dir
        self.seed = seed
        self.started = time.time()
        self.outputs = []
        self.mech_hash = None
        if mech_path is not None:
            with open(mech_path, "rb") as fh:
                self.mech_hash = hashlib.sha256(fh.read()).hexdigest()

    def emit_csv(self, name, header, rows):
        text = ",".join(header) + "\n" + "\n".join(
            ",".join(_fmt(v) for v in row) for row in rows) + "\n"
        click.echo(text, nl=False)
        self._write(name, text)

    def emit_json(self, name, payload):
        text = json.dumps(payload, sort_keys=True) + "\n"
        click.echo(text, nl=False)
        self._write(name, text)

    def _write(self, name, text):
        if self.out_dir is None:
            return
        import os
        os.makedirs(self.out_dir, exist_ok=True)
        path = os.path.join(self.out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        self.outputs.append(name)

    def finish(self):
        if self.out_dir is None:
            return
        import os
        manifest = {
            "command": self.command,
            "mechanism_config_sha256": self.mech_hash,
            "seed": self.seed,
            "tool_version": __version__,
            "wall_time_s": round(time.time() - self.started, 3),
            "outputs": self.outputs,
        }
        path = os.path.join(self.out_dir, "run_manifest.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")


def _mech(path):
    try:
        return load_mechanism(path)
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc


def _values(ctx, param, raw):
    try:
        return [float(v) for v in raw]
    except ValueError as exc:
        raise click.BadParameter(str(exc))


def _grid(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise click.BadParameter("bad numeric list %r" % text) from exc


@click.group()
@click.version_option(__version__)
def main():
    """Extinction calculus, scale functions, limit laws and Monte Carlo
    for continuous-state branching processes."""


@main.command()
@click.option("--mech", "mech_path", required=True, type=click.Path(exists=True))
def info(mech_path):
    """Classify a mechanism: criticality, extinction, mean absorption time."""
    m = _mech(mech_path)
    cls = m.classify()
    grey_val = m.grey_integral()
    pot_val = m.potential_integral()
    xlogx_val = m.levy.xlogx_integral() if m.alpha > 0.0 else None
    click.echo("criticality:        %s (alpha=%.10g, gamma=0)"
               % (cls.criticality, m.alpha))
    click.echo("extinction (a.s.):  %s   int_1^inf dlam/psi = %s"
               % ("yes" if cls.grey_holds else "no", _fmt(grey_val)))
    click.echo("E_x[absorption]:    %s   int_0^1 u/psi(u) du = %s"
               % ("finite" if cls.potential_finite else "infinite", _fmt(pot_val)))
    if m.alpha > 0.0:
        click.echo("r log r moment:     %s   int_1^inf r log r pi(dr) = %s"
                   % ("holds" if cls.xlogx_holds else "fails", _fmt(xlogx_val)))
    else:
        click.echo("r log r moment:     n/a (critical)")


@main.command()
@click.option("--mech", "mech_path", required=True, type=click.Path(exists=True))
def verify(mech_path):
    """Run the analytic gate suite; exit 0 iff every gate passes."""
    m = _mech(mech_path)
    results = run_verify(m)
    width = max(len(r.name) for r in results)
    click.echo("%-*s  %-10s  %-8s  %-5s  %s"
               % (width, "gate", "value", "limit", "state", "note"))
    for r in results:
        name, val, thr, status, note = r.row()
        click.echo("%-*s  %-10s  %-8s  %-5s  %s"
                   % (width, name, val, thr, status, note))
    if not all_passed(results):
        sys.exit(_EXIT_GATE)


def _kernel_command(quantity):
    @click.option("--mech", "mech_path", required=True,
                  type=click.Path(exists=True))
    @click.option("--out", "out_dir", default=None, type=click.Path())
    @click.argument("values", nargs=-1, required=True, callback=_values)
    def cmd(mech_path, out_dir, values, **extra):
        m = _mech(mech_path)
        k = ExtinctionKernel(m)
        run = _Run(quantity, out_dir, mech_path)
        rows = []
        for v in values:
            if quantity == "phi":
                val = k.phi(v)
                err = k.tol_phi * val
                rows.append((v, val, err))
            elif quantity == "varphi":
                val = k.varphi(v)
                err = 5e-12 * max(v, 1.0) * m.psi(val) if val > 0 else 0.0
                rows.append((v, val, err))
            elif quantity == "ut":
                t = extra["t"]
                val = k.u_t(t, v)
                err = 5e-12 * max(t + k.phi(v), 1.0) * m.psi(val) if val > 0 else 0.0
                rows.append((v, val, err))
            else:  # extinction CDF
                x = extra["x"]
                val = k.extinction_cdf(x, v)
                err = x * val * 5e-12 * max(v, 1.0) * m.psi(k.varphi(v))
                rows.append((v, val, err))
        header = {"phi": ("lam", "phi", "est_error"),
                  "varphi": ("t", "varphi", "est_error"),
                  "ut": ("lam", "u_t", "est_error"),
                  "extinction": ("t", "cdf", "est_error")}[quantity]
        run.emit_csv("%s.csv" % quantity, header, rows)
        run.finish()
    return cmd


phi = main.command(name="phi")(_kernel_command("phi"))
varphi = main.command(name="varphi")(_kernel_command("varphi"))
ut = main.command(name="ut")(
    click.option("--t", type=float, required=True)(_kernel_command("ut")))
extinction = main.command(name="extinction")(
    click.option("--x", type=float, required=True)(_kernel_command("extinction")))


@main.command(name="scale-table")
@click.option("--mech", "mech_path", required=True, type=click.Path(exists=True))
@click.option("--xmin", type=float, required=True)
@click.option("--xmax", type=float, required=True)
@click.option("--n", type=int, default=50, show_default=True)
@click.option("--out", "out_dir", default=None, type=click.Path())
def scale_table(mech_path, xmin, xmax, n, out_dir):
    """Tabulate W, W' and the stationary density on a grid."""
    m = _mech(mech_path)
    s = ScaleFunction(m)
    if not 0.0 < xmin < xmax:
        raise click.ClickException("need 0 < xmin < xmax")
    run = _Run("scale-table", out_dir, mech_path)
    xs = np.linspace(xmin, xmax, n)
    rows = [(x, s.W(x), s.W_prime(x), s.stationary_density(x)) for x in xs]
    run.emit_csv("scale_table.csv", ("x", "W", "W_prime", "mu_density"), rows)
    run.finish()


@main.command()
@click.option("--mech", "mech_path", required=True, type=click.Path(exists=True))
@click.option("--x", type=float, required=True)
@click.option("--ymin", type=float, default=None)
@click.option("--ymax", type=float, default=None)
@click.option("--n", type=int, default=50, show_default=True)
@click.option("--out", "out_dir", default=None, type=click.Path())
def potential(mech_path, x, ymin, ymax, n, out_dir):
    """Tabulate the potential density g(x, y); prints the total mass."""
    m = _mech(mech_path)
    s = ScaleFunction(m)
    k = ExtinctionKernel(m)
    run = _Run("potential", out_dir, mech_path)
    ymin = ymin if ymin is not None else x / 50.0
    ymax = ymax if ymax is not None else 4.0 * x
    ys = np.linspace(ymin, ymax, n)
    rows = [(y, s.potential_density(x, y)) for y in ys]
    run.emit_csv("potential.csv", ("y", "g"), rows)
    mass = potential_mass(k, x)
    run.emit_json("potential_mass.json",
                  {"x": x, "mass": mass if math.isfinite(mass) else "inf"})
    run.finish()


@main.command()
@click.option("--mech", "mech_path", required=True, type=click.Path(exists=True))
@click.option("--kind", type=click.Choice(["qsd", "yaglom", "mus", "ws",
                                           "vq", "vinf"]), required=True)
@click.option("--s", "s_param", type=float, default=None)
@click.option("--q", "q_param", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--lambda-grid", "lam_grid", default="0.5,1,2",
              show_default=True)
@click.option("--density/--no-density", default=False,
              help="Append the density at x = lambda grid points (oracle "
                   "families only).")
@click.option("--out", "out_dir", default=None, type=click.Path())
def law(mech_path, kind, s_param, q_param, beta, lam_grid, density, out_dir):
    """Evaluate a conditional/limit law transform on a lambda grid."""
    m = _mech(mech_path)
    k = ExtinctionKernel(m)
    sc = closed_form_scale(m)
    params = {}
    if kind == "qsd":
        if beta is None:
            raise click.ClickException("--kind qsd needs --beta")
        params["beta"] = beta
    if kind in ("mus", "ws"):
        if s_param is None:
            raise click.ClickException("--kind %s needs --s" % kind)
        params["s"] = s_param
    if kind == "vq":
        if q_param is None:
            raise click.ClickException("--kind vq needs --q")
        params["q"] = q_param
    lawobj = laws.limit_law(k, kind, scale=sc, **params)
    run = _Run("law", out_dir, mech_path)
    rows = []
    for lam in _grid(lam_grid):
        row = [lam, lawobj.lt(lam)]
        if density:
            if lawobj.density is None:
                raise click.ClickException(
                    "no density available for kind %r" % kind)
            row.append(lawobj.density(lam))
        rows.append(tuple(row))
    header = ("lam", "transform") + (("density",) if density else ())
    run.emit_csv("law_%s.csv" % kind, header, rows)
    run.finish()


@main.command(name="levy-triplet")
@click.option("--mech", "mech_path", required=True, type=click.Path(exists=True))
@click.option("--q", "q_param", type=float, required=True)
@click.option("--xmin", type=float, default=0.05, show_default=True)
@click.option("--xmax", type=float, default=5.0, show_default=True)
@click.option("--n", type=int, default=40, show_default=True)
@click.option("--out", "out_dir", default=None, type=click.Path())
def levy_triplet(mech_path, q_param, xmin, xmax, n, out_dir):
    """Tabulate the Levy density v_q(x) of the fixed-time limit law."""
    m = _mech(mech_path)
    k = ExtinctionKernel(m)
    sc = closed_form_scale(m)
    run = _Run("levy-triplet", out_dir, mech_path)
    xs = np.linspace(xmin, xmax, n)
    rows = [(x, laws.vq_levy_density(sc, k, q_param, x)) for x in xs]
    run.emit_csv("levy_triplet.csv", ("x", "v_q"), rows)
    run.finish()


@main.command()
@click.option("--family", required=True,
              help='"quadratic", "linear_plus_quadratic" or "stable(beta)"')
@click.option("--quantity", required=True)
@click.option("--args", "arg_list", default="", show_default=True,
              help="comma-separated positional arguments")
def oracle(family, quantity, arg_list):
    """Closed-form oracle values for the reference families."""
    args = _grid(arg_list) if arg_list else []
    try:
        val = oracle_eval(family, quantity, *args)
    except OracleError as exc:
        raise click.ClickException(str(exc))
    click.echo(_fmt(val))


_EXPERIMENTS = ("near-extinction", "fixed-time", "reverse", "qprocess",
                "yaglom-rescaled")


@main.command()
@click.argument("experiment", type=click.Choice(_EXPERIMENTS))
@click.option("--mech", "mech_path", required=True, type=click.Path(exists=True))
@click.option("--family", default=None,
              help="exact-sampler family; defaults to the mechanism's "
                   "registry name")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", "n_paths", type=int, default=100_000, show_default=True)
@click.option("--x", type=float, default=1.0, show_default=True)
@click.option("--t", type=float, default=None)
@click.option("--s", "s_param", type=float, default=None)
@click.option("--q", "q_param", type=float, default=None)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--horizon", type=float, default=200.0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--lambda-grid", "lam_grid", default="0.5,1,2", show_default=True)
@click.option("--out", "out_dir", default=None, type=click.Path())
def mc(experiment, mech_path, family, seed, n_paths, x, t, s_param, q_param,
       dt, horizon, workers, lam_grid, out_dir):
    """Run a conditioned Monte Carlo experiment; prints a JSON estimate."""
    m = _mech(mech_path)
    k = ExtinctionKernel(m)
    if family is None:
        family = m.closed_form.name if m.closed_form else None
        if family not in ("quadratic", "linear_plus_quadratic"):
            raise click.ClickException(
                "experiment needs --family quadratic|linear_plus_quadratic")
    cfg = SimConfig(seed=seed, n_paths=n_paths, dt=dt, horizon=horizon,
                    worker_count=workers)
    run = _Run("mc %s" % experiment, out_dir, mech_path, seed=seed)
    lams = _grid(lam_grid)
    payload = {"experiment": experiment, "seed": seed, "n": n_paths}

    if experiment == "yaglom-rescaled":
        tt = t if t is not None else 1e4
        estimates = {str(th): rescaled_conditional_transform(k, x, th, tt)
                     for th in lams}
        targets = {str(th): 1.0 / (1.0 + th) for th in lams}
        payload.update({"t": tt, "estimate": estimates, "target": targets,
                        "max_abs_diff": max(
                            abs(estimates[key] - targets[key])
                            for key in estimates),
                        "diagnostics": {"analytic": True}})
        run.emit_json("mc_%s.json" % experiment, payload)
        run.finish()
        return

    try:
        if experiment == "near-extinction":
            if t is None or s_param is None:
                raise click.ClickException("near-extinction needs --t and --s")
            res = mc_near_extinction(k, family, x, t, s_param, cfg,
                                     n_accept=min(n_paths, 50_000))
            ests = {str(lam): res.laplace(lam) for lam in lams}
            zs, fs = res.ecdf()
            stride = max(1, zs.size // 512)
            run.emit_csv("ecdf.csv", ("z", "F"),
                         list(zip(zs[::stride], fs[::stride])))
            payload["diagnostics"] = res.diagnostics
        elif experiment == "fixed-time":
            if t is None or q_param is None:
                raise click.ClickException("fixed-time needs --t and --q")
            res = mc_fixed_time(k, family, x, t, q_param, cfg)
            ests = {str(lam): res.laplace(lam) for lam in lams}
            payload["diagnostics"] = {"ess": res.ess, **res.diagnostics}
        elif experiment == "reverse":
            if q_param is None:
                raise click.ClickException("reverse needs --q")
            res = mc_reverse_from_extinction(k, family, x, q_param, cfg)
            ests = {str(lam): res.laplace(lam) for lam in lams}
            payload["diagnostics"] = res.diagnostics
        else:  # qprocess
            if t is None:
                raise click.ClickException("qprocess needs --t")
            res = mc_qprocess(k, family, x, t, cfg)
            ests = {str(lam): res.laplace(lam) for lam in lams}
            payload["diagnostics"] = {"ess": res.ess, **res.diagnostics}
    except EstimatorGuardError as exc:
        click.echo("estimator guard: %s" % exc, err=True)
        sys.exit(_EXIT_GATE)

    payload["estimate"] = {key: e.estimate for key, e in ests.items()}
    payload["half_width"] = {key: e.half_width for key, e in ests.items()}
    run.emit_json("mc_%s.json" % experiment, payload)
    run.finish()


def entry():
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        click.echo("error: %s" % exc.format_message(), err=True)
        sys.exit(_EXIT_CONFIG)
    except click.Abort:
        sys.exit(_EXIT_CONFIG)
    except MechanismError as exc:
        click.echo("error: %s" % exc, err=True)
        sys.exit(_EXIT_CONFIG)
    except EstimatorGuardError as exc:
        click.echo("estimator guard: %s" % exc, err=True)
        sys.exit(_EXIT_GATE)


if __name__ == "__main__":
    entry()
