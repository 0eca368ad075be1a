"""Command-line front end: ``sphquad build-rule | integrate | hyperfit | opnorm``.

Exit codes: 0 on success, 1 for bad input data, 2 for usage errors and 3
for numerical failures (with a JSON diagnostic on stderr).
"""
from __future__ import annotations

import csv
import io
import json
import sys
import time
import warnings
from pathlib import Path

import click
import numpy as np

from . import testfunctions
from .basis import build_ortho_basis
from .compress import caratheodory_compress
from .errors import GeometryError, IllConditionedWarning, NumericalError
from .geometry import builtin_polygon, load_polygon
from .hyper import (
    VARIANTS,
    NoiseSpec,
    add_noise,
    average_errors,
    fit,
    noise_experiment,
    operator_norm,
    write_experiment_csv,
)
from .polygon import MAX_DEGREE, polygon_rule
from .reference import adaptive_integrate
from .rule import CubatureRule

EXIT_INPUT = 1
EXIT_NUMERICAL = 3


def _open_polygon(spec):
    """A file path, or the name of a bundled polygon."""
    if Path(spec).exists():
        return load_polygon(spec)
    try:
        return builtin_polygon(spec)
    except FileNotFoundError:
        raise click.BadParameter(f"{spec!r} is neither a file nor a bundled polygon", param_hint="--polygon")


def _parse_noise(text):
    fields = {"a": 0.0, "sigma": 0.0, "seed": 0}
    for part in filter(None, text.split(",")):
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in fields:
            raise click.BadParameter(f"unknown noise field {key!r}", param_hint="--noise")
        try:
            fields[key] = int(value) if key == "seed" else float(value)
        except ValueError:
            raise click.BadParameter(f"bad value for {key}: {value!r}", param_hint="--noise") from None
    try:
        return NoiseSpec(**fields)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--noise") from None


def _report(msg):
    click.echo(msg, err=True)


def _compressed_rule(poly, degree, nnls_mode):
    parent = polygon_rule(poly, degree)
    return parent, caratheodory_compress(parent, degree, mode=nnls_mode)


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Positive interior cubature and hyperinterpolation on spherical polygons."""
    warnings.simplefilter("ignore", IllConditionedWarning)


@cli.command("build-rule")
@click.option("--polygon", "polygon", required=True, help="GeoJSON/CSV file or bundled polygon name.")
@click.option("--degree", type=click.IntRange(1, MAX_DEGREE), required=True)
@click.option("--compress", is_flag=True, help="Apply Caratheodory-Tchakaloff compression.")
@click.option("--nnls", "nnls_mode", type=click.Choice(["lh", "dm"]), default="lh", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), help="Rule JSON output.")
def build_rule(polygon, degree, compress, nnls_mode, out):
    """Build the composite rule of a polygon, optionally compressed."""
    poly = _open_polygon(polygon)
    t0 = time.perf_counter()
    rule = polygon_rule(poly, degree)
    t_basic = time.perf_counter() - t0
    stats = {"degree": degree, "basic": len(rule), "basic_seconds": round(t_basic, 3)}
    if compress:
        t1 = time.perf_counter()
        parent, rule = len(rule), caratheodory_compress(rule, degree, mode=nnls_mode)
        stats.update(
            compressed=len(rule),
            ratio=round(parent / len(rule), 2),
            moment_residual=rule.moment_residual,
            compress_seconds=round(time.perf_counter() - t1, 3),
        )
    if out:
        rule.save(out)
    click.echo(json.dumps(stats))


@cli.command("integrate")
@click.option("--rule", "rule_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--fn", "fn", type=click.Choice(sorted(testfunctions.FUNCTIONS)))
@click.option("--fn-all", is_flag=True, help="Integrate f1..f6.")
@click.option("--reference", is_flag=True, help="Compare with the adaptive reference (needs --polygon).")
@click.option("--polygon", "polygon", help="Region of the rule, for --reference.")
@click.option("--rel-tol", type=float, default=1e-14, show_default=True)
def integrate(rule_path, fn, fn_all, reference, polygon, rel_tol):
    """Apply a stored rule to the built-in integrands; CSV on stdout."""
    if not fn and not fn_all:
        raise click.UsageError("give --fn NAME or --fn-all")
    if reference and not polygon:
        raise click.UsageError("--reference needs --polygon")
    rule = CubatureRule.load(rule_path)
    names = ["f1", "f2", "f3", "f4", "f5", "f6"] if fn_all else [fn]
    poly = _open_polygon(polygon) if reference else None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["function", "degree", "nodes", "value", "reference", "rel_error"])
    for name in names:
        f = testfunctions.get(name)
        value = rule.integrate(f)
        ref = err = ""
        if poly is not None:
            ref = adaptive_integrate(poly, f, rel_tol).value
            err = repr(abs(value - ref) / abs(ref)) if ref else repr(abs(value))
            ref = repr(ref)
        writer.writerow([name, rule.degree, len(rule), repr(value), ref, err])
    click.echo(buf.getvalue(), nl=False)


@cli.command("hyperfit")
@click.option("--polygon", "polygon", required=True)
@click.option("--degree", type=click.IntRange(0, MAX_DEGREE // 2), required=True)
@click.option("--variant", "variants", multiple=True, type=click.Choice([*VARIANTS, "all"]),
              default=("classical",), show_default=True)
@click.option("--lambda", "lam", type=click.FloatRange(min=0, min_open=True))
@click.option("--lambda-rank", type=click.IntRange(min=1))
@click.option("--noise", "noise", default="", help="a=A,sigma=S,seed=T")
@click.option("--trials", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--fn", "fn", type=click.Choice(sorted(testfunctions.FUNCTIONS)), required=True)
@click.option("--rule", "rule_path", type=click.Path(exists=True, dir_okay=False),
              help="Precomputed rule of degree >= 2N on the polygon (skips construction).")
@click.option("--l2-degree", type=click.IntRange(1, MAX_DEGREE), default=30, show_default=True)
@click.option("--nnls", "nnls_mode", type=click.Choice(["lh", "dm"]), default="lh", show_default=True)
@click.option("--coeffs-out", type=click.Path(dir_okay=False, writable=True))
@click.option("--csv-out", type=click.Path(dir_okay=False, writable=True))
def hyperfit(polygon, degree, variants, lam, lambda_rank, noise, trials, fn, rule_path, l2_degree,
             nnls_mode, coeffs_out, csv_out):
    """Fit (noisy) samples with hyperinterpolation variants and report L2 errors."""
    variants = VARIANTS if "all" in variants else tuple(dict.fromkeys(variants))
    needs_lambda = any(v in ("lasso", "hybrid") for v in variants)
    if needs_lambda and (lam is None) == (lambda_rank is None):
        raise click.UsageError("lasso/hybrid need exactly one of --lambda, --lambda-rank")
    spec = _parse_noise(noise)
    poly = _open_polygon(polygon)
    f = testfunctions.get(fn)
    if rule_path:
        rule = CubatureRule.load(rule_path)
        if rule.degree < 2 * degree:
            raise click.BadParameter(f"rule degree {rule.degree} is below {2 * degree}", param_hint="--rule")
    else:
        _, rule = _compressed_rule(poly, 2 * degree, nnls_mode)
    basis = build_ortho_basis(rule, degree)
    quad = polygon_rule(poly, l2_degree)
    rows = noise_experiment(basis, f, quad, spec, trials, variants, lam=lam, lambda_rank=lambda_rank)
    buf = io.StringIO()
    write_experiment_csv(rows, buf)
    if csv_out:
        Path(csv_out).write_text(buf.getvalue())
    else:
        click.echo(buf.getvalue(), nl=False)
    if coeffs_out:
        samples = add_noise(f(*rule.nodes.T), spec)  # trial 0
        lt = {r["variant"]: r["lambda"] for r in rows if r["trial"] == 0}
        fits = [fit(basis, samples, v, lt[v] or None).to_json() for v in variants]
        Path(coeffs_out).write_text(json.dumps({"rule_hash": rule.content_hash(), "fits": fits}))
    _report(json.dumps({"average_l2_error": average_errors(rows), "rule_nodes": len(rule)}))


@cli.command("opnorm")
@click.option("--polygon", "polygon", required=True)
@click.option("--degree", type=click.IntRange(0, MAX_DEGREE // 2), required=True)
@click.option("--dense-rule-degree", type=click.IntRange(0, MAX_DEGREE), default=10, show_default=True)
@click.option("--nnls", "nnls_mode", type=click.Choice(["lh", "dm"]), default="lh", show_default=True)
def opnorm(polygon, degree, dense_rule_degree, nnls_mode):
    """Estimate the uniform norm of the hyperinterpolation operator."""
    poly = _open_polygon(polygon)
    _, rule = _compressed_rule(poly, 2 * degree, nnls_mode)
    basis = build_ortho_basis(rule, degree)
    dense = polygon_rule(poly, dense_rule_degree).nodes
    click.echo(json.dumps({"degree": degree, "dense_points": len(dense),
                           "norm": operator_norm(basis, dense)}))


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="sphquad", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except NumericalError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        diag.update({k: (float(v) if isinstance(v, (np.floating, float)) else v)
                     for k, v in getattr(exc, "diagnostics", {}).items()})
        click.echo(json.dumps(diag, default=str), err=True)
        return EXIT_NUMERICAL
    except (GeometryError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
