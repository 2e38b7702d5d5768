"""
tamemod - command-line entry point.

Every subcommand builds a ``RunConfig``, calls one report builder and prints the
rendered report on stdout. Logs go to stderr only.

Exit codes: 0 verdict true, 1 verdict false, 2 input error, 3 resource guard.
"""

import functools
import logging
import sys
from typing import Callable, Optional

import click

from catalog import parse_coefficients, resolve_functor
from components import reports
from components.reports import Report, RunConfig
from core.config import DEFAULT_PMAX, DEFAULT_TRUNCATION, STEMS_FILE, configure_logging
from core.errors import TameModError
from core.formatter import format_report
from core.presentation_io import save_functor
from core.specseq import load_stems
from core.tamemod import induce, shift, tensor_sigma, truncate_above

logger = logging.getLogger(__name__)

METHOD_CHOICES = click.Choice(["bar", "pres", "both"])


def _emit(report: Report, fmt: str) -> None:
    click.echo(format_report(report.payload, fmt))
    sys.exit(report.exit_code)


def command_errors(func: Callable) -> Callable:
    """Map library exceptions to exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except TameModError as e:
            logger.debug("%s failed", func.__name__, exc_info=True)
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)
        except ValueError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(2)

    return wrapper


def trunc_option(func):
    return click.option("--trunc", "N", type=click.IntRange(min=0), default=DEFAULT_TRUNCATION,
                        show_default=True, help="Truncation level N (ignored for file inputs).")(func)


def format_option(func):
    return click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text",
                        show_default=True)(func)


def pmax_option(func):
    return click.option("--pmax", "p_max", type=click.IntRange(min=0), default=DEFAULT_PMAX,
                        show_default=True, help="Highest homological degree.")(func)


def search_option(func):
    return click.option("--search", "L", type=click.IntRange(min=0), default=None,
                        help="Generator search level L (default N).")(func)


def _config(command: str, inputs, N: int, fmt: str, **extra) -> RunConfig:
    return RunConfig(command=command, inputs=tuple(inputs), N=N, fmt=fmt, **extra)


def _load(text: str, cfg: RunConfig):
    F = resolve_functor(text, cfg.N)
    return F, cfg.with_truncation(F.N)


@click.group()
@click.option("--log-level", default=None, help="Overrides TAMEMOD_LOG_LEVEL.")
def cli(log_level: Optional[str]) -> None:
    """Exact computations with tame modules over the injection monoid."""
    configure_logging(log_level)


# ============ PRESENTATIONS ============

@cli.command()
@click.argument("functor")
@trunc_option
@format_option
@command_errors
def validate(functor: str, N: int, fmt: str) -> None:
    """Check the I-functor relations of FUNCTOR (built-in name or JSON file)."""
    F, cfg = _load(functor, _config("validate", [functor], N, fmt))
    _emit(reports.validate_report(cfg, F), fmt)


@cli.command()
@click.argument("functor")
@click.option("--equal", nargs=2, default=None, help="Compare two elements in the colimit.")
@trunc_option
@format_option
@command_errors
def colim(functor: str, equal, N: int, fmt: str) -> None:
    """Levels and stabilization maps of FUNCTOR, optionally deciding an equality."""
    F, cfg = _load(functor, _config("colim", [functor], N, fmt))
    _emit(reports.colim_report(cfg, F, tuple(equal) if equal else None), fmt)


@cli.command()
@click.argument("functor")
@click.argument("element", required=False)
@click.option("--at-most", "k", type=click.IntRange(min=0), default=None,
              help="Decide filtration <= K instead of only reporting it.")
@trunc_option
@format_option
@command_errors
def filtration(functor: str, element: Optional[str], k: Optional[int], N: int, fmt: str) -> None:
    """Exact filtration of ELEMENT, or the filtration report of FUNCTOR without one."""
    inputs = [functor] + ([element] if element else [])
    F, cfg = _load(functor, _config("filtration", inputs, N, fmt))
    _emit(reports.filtration_report_for(cfg, F, element, k), fmt)


@cli.command()
@click.argument("functor")
@trunc_option
@format_option
@command_errors
def semistable(functor: str, N: int, fmt: str) -> None:
    """Whether M acts trivially on FUNCTOR, with a witness when it does not."""
    F, cfg = _load(functor, _config("semistable", [functor], N, fmt))
    _emit(reports.semistable_report(cfg, F), fmt)


# ============ CONSTRUCTIONS ============

def _construct(cfg: RunConfig, F, output: Optional[str]) -> None:
    if output:
        save_functor(F, output)
        logger.info("wrote %s to %s", F.display_name, output)
    _emit(reports.functor_report(cfg, F, output), cfg.fmt)


def output_option(func):
    return click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
                        help="Save the result as a tamemod-v1 file.")(func)


@cli.command(name="shift")
@click.argument("functor")
@trunc_option
@format_option
@output_option
@command_errors
def shift_cmd(functor: str, N: int, fmt: str, output: Optional[str]) -> None:
    """Shift functor: F(1 + -)."""
    F, cfg = _load(functor, _config("shift", [functor], N, fmt))
    _construct(cfg, shift(F.require_valid()), output)


@cli.command(name="induce")
@click.argument("functor")
@trunc_option
@format_option
@output_option
@command_errors
def induce_cmd(functor: str, N: int, fmt: str, output: Optional[str]) -> None:
    """Left adjoint of the shift."""
    F, cfg = _load(functor, _config("induce", [functor], N, fmt))
    _construct(cfg, induce(F), output)


@cli.command(name="truncate")
@click.argument("functor")
@click.option("--level", "i", type=click.IntRange(min=0), required=True, help="Keep levels 0..LEVEL.")
@trunc_option
@format_option
@output_option
@command_errors
def truncate_cmd(functor: str, i: int, N: int, fmt: str, output: Optional[str]) -> None:
    """Zero out every level above LEVEL."""
    F, cfg = _load(functor, _config("truncate", [functor, f"level={i}"], N, fmt))
    _construct(cfg, truncate_above(F, i), output)


@cli.command(name="tensor-sigma")
@click.argument("n", type=click.IntRange(min=0))
@click.argument("coefficients")
@click.option("--twist/--no-twist", default=False, help="Twist the action by the sign.")
@trunc_option
@format_option
@output_option
@command_errors
def tensor_sigma_cmd(n: int, coefficients: str, twist: bool, N: int, fmt: str, output: Optional[str]) -> None:
    """P(n) tensored over S_n with COEFFICIENTS (Z, Z/d, sign, sign/d, regular)."""
    cfg = _config("tensor-sigma", [str(n), coefficients] + (["twist"] if twist else []), N, fmt)
    _construct(cfg, tensor_sigma(n, parse_coefficients(coefficients, n), N, twist), output)


@cli.command()
@click.argument("functor")
@click.argument("k", type=click.IntRange(min=0))
@trunc_option
@format_option
@command_errors
def dstage(functor: str, k: int, N: int, fmt: str) -> None:
    """Stages F, F(1), ..., F(k) and whether each d is an isomorphism."""
    F, cfg = _load(functor, _config("dstage", [functor, str(k)], N, fmt))
    _emit(reports.dstage_report(cfg, F, k), fmt)


@cli.command()
@click.argument("n", type=click.IntRange(min=0))
@trunc_option
@format_option
@command_errors
def kappa(n: int, N: int, fmt: str) -> None:
    """Certify P(1+n) = induce(P(n)) level by level."""
    _emit(reports.kappa_report(_config("kappa", [str(n)], N, fmt), n), fmt)


# ============ HOMOLOGY ============

@cli.command()
@click.argument("functor")
@click.option("--method", type=METHOD_CHOICES, default="bar", show_default=True)
@trunc_option
@pmax_option
@search_option
@format_option
@command_errors
def tor(functor: str, method: str, N: int, p_max: int, L: Optional[int], fmt: str) -> None:
    """Tor_p(Z, FUNCTOR) over Z[M] for p <= PMAX."""
    cfg = _config("tor", [functor], N, fmt, p_max=p_max, L=L, method=method)
    F, cfg = _load(functor, cfg)
    _emit(reports.tor_report(cfg, F), fmt)


@cli.command()
@click.argument("n", type=click.IntRange(min=1))
@click.argument("coefficients")
@pmax_option
@format_option
@command_errors
def ghom(n: int, coefficients: str, p_max: int, fmt: str) -> None:
    """H_p(S_n; COEFFICIENTS) for p <= PMAX."""
    cfg = _config("ghom", [str(n), coefficients], n, fmt, p_max=p_max)
    _emit(reports.ghom_report(cfg, n, parse_coefficients(coefficients, n)), fmt)


@cli.command()
@click.argument("functor")
@trunc_option
@format_option
@command_errors
def coinv(functor: str, N: int, fmt: str) -> None:
    """Coinvariants Z (x)_M FUNCTOR and their stabilization."""
    F, cfg = _load(functor, _config("coinv", [functor], N, fmt))
    _emit(reports.coinv_report(cfg, F), fmt)


@cli.command()
@click.argument("functor")
@click.option("--degree", type=click.IntRange(min=0), default=None, help="Resolution length (default PMAX + 1).")
@trunc_option
@pmax_option
@search_option
@format_option
@command_errors
def resolve(functor: str, degree: Optional[int], N: int, p_max: int, L: Optional[int], fmt: str) -> None:
    """Resolution of FUNCTOR by sums of representables."""
    cfg = _config("resolve", [functor], N, fmt, p_max=p_max, L=L)
    F, cfg = _load(functor, cfg)
    _emit(reports.resolve_report(cfg, F, p_max + 1 if degree is None else degree), fmt)


@cli.command()
@click.argument("spectrum")
@click.option("--qmax", type=click.IntRange(min=0), default=3, show_default=True, help="Highest internal degree.")
@click.option("--method", type=METHOD_CHOICES, default="bar", show_default=True)
@click.option("--stems", type=click.Path(dir_okay=False), default=None,
              help="Stems table (default TAMEMOD_STEMS_FILE).")
@click.option("--workers", type=click.IntRange(min=1), default=4, show_default=True)
@trunc_option
@pmax_option
@search_option
@format_option
@command_errors
def e2(spectrum: str, qmax: int, method: str, stems: Optional[str], workers: int, N: int, p_max: int,
       L: Optional[int], fmt: str) -> None:
    """E2 page for SPECTRUM: free:n, semifree:n or sphere."""
    path = stems or STEMS_FILE
    cfg = _config("e2", [spectrum], N, fmt, p_max=p_max, L=L, method=method, stems=path)
    _emit(reports.e2_report(cfg, spectrum, load_stems(path), qmax, workers), fmt)


if __name__ == "__main__":
    cli()
