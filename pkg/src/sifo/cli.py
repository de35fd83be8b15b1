"""Batch entry points.

Exit codes are a stable contract: 0 ok, 1 rejection (type or refinement
error), 2 usage/IO error, 3 internal soundness violation.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from sifo.lattice import LatticeError
from sifo.parser import ParseError, parse_lattice, parse_program, parse_script
from sifo.refiner import (
    RefinementError, SideConditionError, apply_step, export_method,
    start_session, step_from_script, verify_soundness,
)
from sifo.syntax import ClassTable, ClassTableError
from sifo.typechecker import Checker


@click.group()
def main() -> None:
    """SIFO: security-typed checking and hole-driven method construction."""


def _load_lattice(path: str):
    try:
        return parse_lattice(Path(path).read_text(), path)
    except OSError as err:
        click.echo(f"error: cannot read lattice file: {err}", err=True)
        sys.exit(2)


def _load_table(paths, lattice):
    decls = []
    errors = []
    for p in paths:
        try:
            text = Path(p).read_text()
        except OSError as err:
            click.echo(f"error: cannot read source file: {err}", err=True)
            sys.exit(2)
        frag = parse_program(text, p)
        decls.extend(frag.declarations)
        errors.extend(frag.diagnostics)
    if errors:
        for d in errors:
            click.echo(str(d), err=True)
        sys.exit(1)
    try:
        return ClassTable(decls, lattice.bottom)
    except ClassTableError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)


@main.command("check")
@click.argument("files", nargs=-1, required=True)
@click.option("--lattice", "lattice_path", required=True,
              help="lattice config file (.lat)")
def cmd_check(files, lattice_path):
    """Typecheck SIFO source files against a security lattice."""
    try:
        lat = _load_lattice(lattice_path)
    except ParseError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    ct = _load_table(files, lat)
    errors = Checker(ct, lat).check_program()
    for e in errors:
        click.echo(str(e), err=True)
    sys.exit(1 if errors else 0)


@main.command("refine")
@click.argument("files", nargs=-1, required=True)
@click.option("--script", "script_path", required=True,
              help="refinement script (.ifbc)")
@click.option("--method", required=True, help="target as Class.method")
@click.option("--lattice", "lattice_path", required=True)
@click.option("--allow-declassify", is_flag=True, default=False)
def cmd_refine(files, script_path, method, lattice_path, allow_declassify):
    """Replay a refinement script and print the constructed method."""
    try:
        lat = _load_lattice(lattice_path)
        script = parse_script(Path(script_path).read_text(), script_path)
    except (ParseError, OSError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    ct = _load_table(files, lat)
    if "." not in method:
        click.echo("error: --method must be Class.method", err=True)
        sys.exit(2)
    cls, meth = method.split(".", 1)
    try:
        sess = start_session(ct, lat, cls, meth, allow_declassify=allow_declassify)
    except RefinementError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    for index, raw in enumerate(script.steps, start=1):
        try:
            step = step_from_script(raw)
            sess = apply_step(sess, step)
        except (RefinementError, SideConditionError) as err:
            click.echo(f"step {index} ({raw.rule} @ {raw.hole_id}): {err}", err=True)
            sys.exit(1)
    if not sess.complete:
        click.echo(f"session incomplete, open holes: "
                   f"{', '.join(sess.open_holes())}", err=True)
        sys.exit(1)
    click.echo(export_method(sess))
    errors = verify_soundness(sess)
    if errors:
        click.echo("soundness oracle failed (engine bug):", err=True)
        for e in errors:
            click.echo(str(e), err=True)
        sys.exit(3)
    sys.exit(0)


@main.command("fuzz")
@click.option("--seed", type=int, default=1)
@click.option("--iterations", type=int, default=1000)
@click.option("--max-depth", type=int, default=24)
def cmd_fuzz(seed, iterations, max_depth):
    """Random rule walks; every completed session must re-typecheck."""
    from sifo.fuzz import run_fuzz

    report = run_fuzz(seed, iterations, max_depth)
    click.echo(report.summary())
    if not report.ok:
        for it, log in report.failures[:3]:
            click.echo(f"failing iteration {it}:", err=True)
            for line in log:
                click.echo(f"  {line}", err=True)
        sys.exit(3)
    sys.exit(0)


@main.command("serve")
@click.option("--bind", default="127.0.0.1:8080")
@click.option("--workspace", "workspace_path", required=True)
def cmd_serve(bind, workspace_path):
    """Serve the refinement protocol over HTTP for the web UI."""
    from sifo.service import CorruptWorkspace, serve

    try:
        serve(bind, workspace_path)
    except CorruptWorkspace as err:
        click.echo(f"error: corrupt workspace: {err}", err=True)
        sys.exit(2)
    except (OSError, ValueError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
