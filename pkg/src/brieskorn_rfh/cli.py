"""Command line front end: ``brieskorn-rfh cz|brieskorn|floer|rfh|morse``.

Exit codes: 0 success, 1 malformed input, 2 a computation could not
proceed, 3 I/O failure.  JSON output is sorted and rounded so identical
arguments give byte-identical output; every number is wrapped as
``{"value": ..., "provenance": "paper" | "derived" | "computed"}``.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import click
import numpy as np

from . import __version__
from . import brieskorn as bk
from . import cz_index as cz
from . import floer_algebra as fa
from . import morse_flow as mf
from . import rfh_brieskorn as rfh
from .errors import AxiomViolation, DimensionTooLow, InputError, MathError, UnsupportedCriticalManifold

EXIT_INPUT, EXIT_MATH, EXIT_IO = 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    fmt: str = "json"
    out: str | None = None
    seed: int = 0
    tol_crossing: float = cz.DEFAULT_TOL.refine
    tol_kernel: float = cz.DEFAULT_TOL.kernel
    tol_integrator: float = 1e-10

    def __post_init__(self):
        for name in ("tol_crossing", "tol_kernel", "tol_integrator"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name.replace('_', '-')} must be positive")

    @property
    def cz_tol(self) -> cz.Tolerances:
        return cz.Tolerances(kernel=self.tol_kernel, refine=self.tol_crossing)


# ---------------------------------------------------------------------------
# output


def _num(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return float(f"{x:.12g}")
    return x


def tag(obj, provenance: str):
    """Wrap every number in obj as {"value", "provenance"}."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, float, Fraction, np.integer, np.floating)):
        return {"value": _num(obj), "provenance": provenance}
    if isinstance(obj, dict):
        return {str(k): tag(v, provenance) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [tag(v, provenance) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict) and set(obj) == {"value", "provenance"}:
        yield prefix, obj["value"]
    elif isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def emit(cfg: RunConfig, payload: dict, csv_text: str | None = None) -> None:
    if cfg.fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    elif cfg.fmt == "csv":
        if csv_text is None:
            raise InputError("this command has no CSV output; use --format json or table")
        text = csv_text
    else:
        text = "".join(f"{k} = {v}\n" for k, v in _flatten(payload))
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _config(fmt, out, seed, tol_crossing=None, tol_kernel=None, tol_integrator=None) -> RunConfig:
    kw = {"fmt": fmt, "out": out, "seed": seed}
    for name, val in (("tol_crossing", tol_crossing), ("tol_kernel", tol_kernel), ("tol_integrator", tol_integrator)):
        if val is not None:
            kw[name] = val
    return RunConfig(**kw)


def _common(f):
    f = click.option("--out", type=str, default=None, help="Write output to a file.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["json", "csv", "table"]), default="json")(f)
    f = click.option("--seed", type=int, default=0, show_default=True)(f)
    return f


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError as exc:
        raise InputError(f"expected LO:HI, got {text!r}") from exc
    if lo > hi:
        raise InputError("empty degree range")
    return lo, hi


def _parse_tuple(text: str, min_len: int = 3) -> bk.BrieskornTuple:
    a = bk.BrieskornTuple.parse(text)
    if len(a) < min_len:
        raise InputError(f"need at least {min_len} exponents, got {len(a)}")
    return a


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(__version__)
def cli():
    """Conley-Zehnder indices, Floer triples and RFH tables of Brieskorn manifolds."""


@cli.command("cz")
@click.argument("spec")
@click.option("--tol-crossing", type=float, default=None, help="Crossing-time refinement tolerance.")
@click.option("--tol-kernel", type=float, default=None, help="Kernel detection tolerance.")
@click.option("--grid", type=int, default=None, help="Integration grid size.")
@_common
def cmd_cz(spec, tol_crossing, tol_kernel, grid, fmt, out, seed):
    """Index of a block path, e.g. 'rot:1,hyp T=2pi'."""
    cfg = _config(fmt, out, seed, tol_crossing, tol_kernel)
    path = cz.parse_block_spec(spec)
    res = cz.cz_index(path, cfg.cz_tol, grid_size=grid)
    crossings = [
        {"t": c.t, "kernel_dim": c.kernel_dim, "signature": c.signature, "kind": c.kind, "regular": c.regular}
        for c in res.crossings
    ]
    payload = {
        "spec": spec,
        "mu_cz": tag(res.mu_cz, "computed"),
        "mean_index": tag(res.mean_index, "derived"),
        "crossings": tag(crossings, "computed"),
        "all_regular": res.all_regular,
    }
    csv_text = "t,kernel_dim,signature,kind\n" + "".join(
        f"{c['t']:.12g},{c['kernel_dim']},{c['signature']},{c['kind']}\n" for c in crossings
    )
    emit(cfg, payload, csv_text)


def _critical_manifold_record(a: bk.BrieskornTuple, L: int) -> dict:
    N = bk.critical_manifold(a, L)
    try:
        ranks = bk.critical_homology(N.subtuple)
    except UnsupportedCriticalManifold:
        ranks = None
    return {
        "L": L,
        "subtuple": list(N.subtuple),
        "dim": N.dim,
        "mu_cz": bk.mu_cz_closed(a, L),
        "degrees": [bk.mu_index(a, L, j) for j in range(N.dim + 1)],
        "homology": None if ranks is None else {str(j): r for j, r in sorted(ranks.items())},
    }


@cli.command("brieskorn")
@click.argument("tuple_text", metavar="TUPLE")
@click.option("--lmax", type=int, default=20, show_default=True)
@click.option("--rfh", "with_rfh", is_flag=True, help="Append the RFH degree table.")
@click.option("--sphere", "need_sphere", is_flag=True, help="Fail if the sphere test does not apply.")
@_common
def cmd_brieskorn(tuple_text, lmax, with_rfh, need_sphere, fmt, out, seed):
    """Spectrum, critical manifolds, indices and sphere test for a tuple like 2,2,2,3."""
    cfg = _config(fmt, out, seed)
    a = _parse_tuple(tuple_text)
    reg = bk.regime(a)
    try:
        sphere = bk.is_topological_sphere(a)
    except DimensionTooLow:
        if need_sphere:
            raise
        sphere = None
    spectrum = bk.spectrum(a, lmax)
    payload = {
        "tuple": tag(list(a.a), "paper"),
        "n": tag(a.n, "derived"),
        "dim": tag(a.dim, "derived"),
        "regime": {"kind": reg.regime, "s": tag(reg.s, "derived"), "A": tag(reg.A, "derived"), "D_bounds": tag(list(reg.D_bounds), "derived")},
        "spectrum": tag(spectrum, "derived"),
        "critical_manifolds": tag([_critical_manifold_record(a, L) for L in [0] + spectrum], "derived"),
        "sphere": sphere,
    }
    csv_text = None
    if with_rfh:
        table = rfh.rfh_dims(rfh.chain_model(a, lmax))
        payload["rfh"] = tag(table.as_dict(), "derived")
        csv_text = table.to_csv()
    emit(cfg, payload, csv_text)


@cli.command("floer")
@click.argument("path")
@click.option("--window", nargs=2, type=float, default=None, help="Action window A B.")
@click.option("--prefer", type=click.Choice(["lowest", "highest"]), default="lowest")
@_common
def cmd_floer(path, window, prefer, fmt, out, seed):
    """Homology and reduction report of a Floer triple JSON file."""
    cfg = _config(fmt, out, seed)
    with open(path) as fh:
        triple = fa.FloerTriple.from_json(fh.read())
    report = fa.validate(triple)
    if not report.ok:
        raise AxiomViolation(report)
    full = fa.homology_window(triple)
    red = fa.reduced_homology(fa.build_reduction(triple, prefer))
    payload = {
        "generators": tag(triple.size, "computed"),
        "fh": {"dim": tag(full.dim, "computed"), "by_degree": tag({str(k): v for k, v in full.dims_by_degree.items()}, "computed")},
        "reduction": {
            "dim": tag(red.dim, "computed"),
            "isomorphism": red.isomorphism,
            "filtration_preserving": red.filtration_preserving,
            "boundary": [{"source": s, "targets": t} for s, t in fa.reduced_boundary_terms(fa.build_reduction(triple, prefer))],
        },
    }
    if window:
        w = fa.homology_window(triple, *window)
        payload["window"] = {"bounds": tag(list(window), "paper"), "dim": tag(w.dim, "computed"), "by_degree": tag({str(k): v for k, v in w.dims_by_degree.items()}, "computed")}
    emit(cfg, payload)


@cli.command("rfh")
@click.argument("tuple_text", metavar="TUPLE")
@click.option("--lmax", type=int, default=None, help="Period cutoff; chosen from --degrees when omitted.")
@click.option("--degrees", type=str, default=None, help="Degree range LO:HI.")
@click.option("--growth", "f_class", type=click.Choice(["id", "log", "exp"]), default=None, help="Report growth rates.")
@click.option("--distinguish", "other", type=str, default=None, help="Second tuple to tell apart.")
@_common
def cmd_rfh(tuple_text, lmax, degrees, f_class, other, fmt, out, seed):
    """RFH degree table with bounds and policy tags."""
    cfg = _config(fmt, out, seed)
    a = _parse_tuple(tuple_text)
    rng = _parse_range(degrees) if degrees else None
    if lmax is None:
        lmax = rfh.L_max_for(a, *rng) if rng else 40
    if lmax < 0:
        raise InputError("--lmax must be non-negative")
    model = rfh.chain_model(a, lmax)
    table = rfh.rfh_dims(model, range(rng[0], rng[1] + 1) if rng else None)
    payload = {"lmax": tag(lmax, "derived"), "table": tag(table.as_dict(), "derived")}
    if f_class:
        growth = {}
        # the census needs several full periods lcm(a) regardless of the table cutoff
        census_model = model if lmax >= 10 * a.lcm else rfh.chain_model(a, 10 * a.lcm)
        for sign in ("+", "-"):
            g = rfh.growth_rate(census_model, sign, f_class)
            growth[sign] = {"gamma": tag(g.gamma, "computed"), "exact": g.exact, "shape": g.shape, "counts": tag(list(g.counts), "computed")}
        payload["growth"] = growth
    if other:
        w = rfh.distinguish(a, _parse_tuple(other))
        payload["distinguish"] = None if w is None else {
            "degree": tag(w.degree, "derived"),
            "first": tag(w.first.as_dict(), "derived"),
            "second": tag(w.second.as_dict(), "derived"),
        }
    emit(cfg, payload, table.to_csv())


def _sstar_label(label: str) -> str:
    """S^3 labels c_i^+- go to their images under Phi; z-labels pass through."""
    if label.startswith("z"):
        return label
    s3 = mf.S3FlowSetup()
    hit = [c for c in mf.critical_points(s3) if c.label == label]
    if not hit:
        raise InputError(f"unknown critical point {label!r}")
    image = mf.covering_map(hit[0].point)
    ss = mf.EmbeddedMorseSetup(n=3)
    return min(ss.seeds(), key=lambda t: float(np.linalg.norm(t[1] - image)))[0]


@cli.command("morse")
@click.option("--n", "n", type=int, default=3, show_default=True)
@click.option("--a", "a", type=float, default=2.0, show_default=True)
@click.option("--metric", type=click.Choice([mf.PUSHFORWARD, mf.AMBIENT]), default=mf.PUSHFORWARD)
@click.option("--starts", type=int, default=10, show_default=True, help="Random flow starts.")
@click.option("--count", "pair", type=str, default=None, help="Count orbits between X:Y, e.g. c4+:c3+.")
@click.option("--tol-integrator", type=float, default=None)
@_common
def cmd_morse(n, a, metric, starts, pair, tol_integrator, fmt, out, seed):
    """Critical points, flows and orbit counts of psi on S*S^(n-1)."""
    cfg = _config(fmt, out, seed, tol_integrator=tol_integrator)
    if not 2 <= n <= 6:
        raise InputError(f"--n must be in 2..6, got {n}")
    if a <= 1:
        raise InputError("--a must exceed 1")
    setup = mf.EmbeddedMorseSetup(n=n, a=a, metric=metric)
    if pair:
        if n != 3:
            raise InputError("orbit counts are implemented for n = 3")
        try:
            x, y = pair.split(":")
        except ValueError as exc:
            raise InputError(f"expected X:Y, got {pair!r}") from exc
        res = mf.count_connecting(setup, _sstar_label(x), _sstar_label(y))
        payload = {"source": list(res.source), "target": list(res.target), "count": tag(res.count, "computed")}
        if x.startswith("c") and y.startswith("c"):
            s3 = mf.count_connecting(mf.S3FlowSetup.from_a(a), x[:-1] if x[-1] in "+-" else x, y[:-1] if y[-1] in "+-" else y)
            payload["s3_count"] = tag(s3.count, "computed")
        emit(cfg, payload)
        return
    crit = mf.critical_points(setup)
    rng = np.random.default_rng(cfg.seed)
    flows = []
    for _ in range(starts):
        z0 = setup.project(rng.normal(size=2 * n))
        tr = mf.integrate_flow(setup, z0, gtol=cfg.tol_integrator)
        lyap = mf.lyapunov_check(tr, setup)
        flows.append({"limit": tr.limit, "steps": len(tr.times), "constraint_residual": tr.constraint_residual, "lyapunov_min_delta": lyap.min_delta})
    payload = {
        "n": tag(n, "paper"),
        "a": tag(a, "paper"),
        "critical_points": [
            {"label": c.label, "point": tag(np.round(c.point, 12) + 0.0, "computed"), "value": tag(c.value, "computed"), "index": tag(c.index, "computed")}
            for c in crit
        ],
        "flows": [{**{k: tag(v, "computed") for k, v in f.items()}} for f in flows],
        "homology": tag({str(k): v for k, v in mf.morse_homology_counts(n).items()}, "derived"),
    }
    if n == 3:
        rep = mf.check_covering(200, seed=cfg.seed, a=a)
        payload["covering"] = {"ok": rep.ok, "frame_norms": tag(list(rep.frame_norms), "computed")}
    csv_text = "label,value,index\n" + "".join(f"{c.label},{c.value:.12g},{c.index}\n" for c in crit)
    emit(cfg, payload, csv_text)


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="brieskorn-rfh", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except (click.UsageError, click.BadParameter, click.Abort) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    except MathError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_MATH
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
