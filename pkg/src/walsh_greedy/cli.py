from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
import typer
from pydantic import ValidationError

from .adic import AdicInterval, StepFunction, indicator, sample_function
from .certificates import Certificate
from .chrestenson import analyze, synthesize
from .config import BudgetProfile, RunConfig, check_level
from .driver import correct_function
from .errors import InfeasibleError, InvalidParameterError, PrecisionError, ResolutionError
from .formats import (
    certificate_file,
    load_certificate,
    load_spectrum,
    load_step_function,
    parse_interval,
    save_certificate,
    save_spectrum,
    save_step_function,
    write_curve_csv,
    write_model,
)
from .greedy import greedy_error_curve
from .lemmas import lemma1_construct, lemma2_construct
from .suites import run_all
from .verify import verify_certificate

app = typer.Typer(add_completion=False, help="Chrestenson transforms, greedy approximation and certified correction")

EXIT_OK, EXIT_CERTIFICATE, EXIT_USAGE, EXIT_RESOLUTION = 0, 1, 2, 3
STATUS_COLOURS = {"PASS": typer.colors.GREEN, "NOT-MET": typer.colors.YELLOW, "FAIL": typer.colors.RED}


class Generator(str, Enum):
    linear = "linear"
    centered = "centered"
    sign = "sign"
    rand = "rand"
    indicator = "indicator"


class Method(str, Enum):
    fast = "fast"
    naive = "naive"


class Mode(str, Enum):
    direct = "direct"
    strict = "strict"


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress to stderr")) -> None:
    """walsh-greedy command line."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map library failures onto exit codes."""
    try:
        yield
    except (ResolutionError, InfeasibleError) as exc:
        typer.secho(f"resolution: {exc}", fg=typer.colors.RED, err=True)
        raise typer.Exit(code=EXIT_RESOLUTION)
    except (InvalidParameterError, PrecisionError, ValidationError, FileNotFoundError) as exc:
        typer.secho(f"usage: {exc}", fg=typer.colors.RED, err=True)
        raise typer.Exit(code=EXIT_USAGE)


def _config(order: int, max_level: Optional[int], **extra) -> RunConfig:
    return RunConfig.from_env(order=order, max_level=max_level, **extra)


def _load_function(
    path: Optional[Path],
    gen: Optional[Generator],
    config: RunConfig,
    level: int,
    scale: float,
) -> StepFunction:
    if (path is None) == (gen is None):
        raise InvalidParameterError("give exactly one of --in or --gen")
    if path is not None:
        return load_step_function(path)
    order = config.order
    if gen is Generator.indicator:
        return scale * indicator(AdicInterval(order, 1, 1), max(level, 1), max_level=config.max_level)
    if gen is Generator.rand:
        check_level(order, level, config.max_level, "random generator")
        rng = np.random.default_rng(config.seed)
        return StepFunction(order, level, scale * rng.uniform(-1, 1, order**level))
    funcs = {
        Generator.linear: lambda x: x,
        Generator.centered: lambda x: x - 0.5,
        Generator.sign: lambda x: np.sign(x - 1 / 3),
    }
    f = sample_function(funcs[gen], order, level, oversample=16, max_level=config.max_level)
    return scale * f


def _report(certificate: Certificate) -> None:
    for c in certificate.conclusions:
        mark = "ok" if c.passed else ("FAIL" if c.asserted else "info")
        typer.echo(f"  [{mark:>4}] {c.name}: {c.achieved_value:.6g} {c.relation} {c.claimed_bound:.6g}")
    colour = typer.colors.GREEN if certificate.passed else typer.colors.RED
    typer.secho(f"certificate {certificate.kind}: {'PASS' if certificate.passed else 'FAIL'}", fg=colour)


def _finish(certificate: Certificate) -> None:
    _report(certificate)
    if not certificate.passed:
        raise typer.Exit(code=EXIT_CERTIFICATE)


InOption = typer.Option(None, "--in", exists=True, readable=True, help="Step function JSON file")
GenOption = typer.Option(None, "--gen", help="Builtin generator projected at --level")
OrderOption = typer.Option(2, "--order", "-a", help="Order a of the system")
LevelOption = typer.Option(8, "--level", "-J", help="Grid level for generators")
MaxLevelOption = typer.Option(None, "--max-level", help="Resolution ceiling (default from --order)")
ScaleOption = typer.Option(1.0, "--scale", help="Multiply generated functions by this factor")
SeedOption = typer.Option(0, "--seed", help="Seed for random generators and suites")
EqTolOption = typer.Option(1e-10, "--eq-tol", help="Tolerance for value equalities in certificates")


@app.command()
def transform(
    input_path: Optional[Path] = InOption,
    gen: Optional[Generator] = GenOption,
    order: int = OrderOption,
    level: int = LevelOption,
    max_level: Optional[int] = MaxLevelOption,
    scale: float = ScaleOption,
    seed: int = SeedOption,
    method: Method = typer.Option(Method.fast, "--method", help="fast or naive analysis"),
    out: Optional[Path] = typer.Option(None, "--out", help="Spectrum JSON output"),
    inverse: bool = typer.Option(False, "--inverse", help="Read a spectrum with --in and synthesize it"),
) -> None:
    """Analyze a step function (or synthesize a spectrum with --inverse)."""
    with _exit_codes():
        config = _config(order, max_level, seed=seed)
        if inverse:
            if input_path is None:
                raise InvalidParameterError("--inverse needs --in SPECTRUM")
            f = synthesize(load_spectrum(input_path), max_level=config.max_level)
            target = config.output_path(out)
            if target:
                save_step_function(target, f)
            typer.echo(f"synthesized {f.size} cells at level {f.level}")
            return
        f = _load_function(input_path, gen, config, level, scale)
        spectrum = analyze(f, method.value, naive_max_cells=config.naive_max_cells)
        target = config.output_path(out)
        if target:
            save_spectrum(target, spectrum)
            typer.secho(f"✓ spectrum written to {target}", fg=typer.colors.GREEN)
        else:
            typer.echo(f"{len(spectrum)} nonzero coefficients at level {f.level}")


@app.command()
def greedy(
    input_path: Optional[Path] = InOption,
    gen: Optional[Generator] = GenOption,
    order: int = OrderOption,
    level: int = LevelOption,
    max_level: Optional[int] = MaxLevelOption,
    scale: float = ScaleOption,
    seed: int = SeedOption,
    m_max: int = typer.Option(64, "--m-max", help="Largest number of terms"),
    p: str = typer.Option("1", "--p", help="Error norm: 1, 2 or inf"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV output (m,error_p,partial_sum_norm_1)"),
) -> None:
    """Greedy approximation error curve."""
    with _exit_codes():
        config = _config(order, max_level, seed=seed)
        f = _load_function(input_path, gen, config, level, scale)
        curve = greedy_error_curve(f, m_max, p, zero_threshold=config.zero_threshold)
        target = config.output_path(out)
        if target:
            write_curve_csv(target, curve)
            typer.secho(f"✓ curve written to {target}", fg=typer.colors.GREEN)
        last = curve[-1]
        typer.echo(f"m={last.m} error={last.error:.6g}")


@app.command()
def lemma1(
    order: int = OrderOption,
    gamma: str = typer.Option("1", "--gamma", help="Nonzero complex value, e.g. 1 or 0.5+1j"),
    n0: int = typer.Option(2, "--n0", help="First admissible index (> 1)"),
    eps: float = typer.Option(..., "--eps", help="Measure parameter in (0, 1)"),
    interval: str = typer.Option(..., "--interval", help="a-adic interval as m:k"),
    max_level: Optional[int] = MaxLevelOption,
    eq_tol: float = EqTolOption,
    out: Optional[Path] = typer.Option(None, "--out", help="Certificate JSON output"),
) -> None:
    """Single-interval polynomial with its certificate."""
    with _exit_codes():
        config = _config(order, max_level, eq_tol=eq_tol)
        try:
            value = complex(gamma.replace(" ", ""))
        except ValueError as exc:
            raise InvalidParameterError(f"cannot read gamma {gamma!r}") from exc
        built = lemma1_construct(
            value, n0, eps, parse_interval(interval, order), max_level=config.max_level, eq_tol=config.eq_tol
        )
        derived = built.derived
        typer.echo(f"nu0={derived.nu0} s={derived.s} N={derived.n_max} terms={len(built.polynomial)}")
        target = config.output_path(out)
        if target:
            save_certificate(target, built)
    _finish(built.certificate)


@app.command()
def lemma2(
    input_path: Optional[Path] = InOption,
    gen: Optional[Generator] = GenOption,
    order: int = OrderOption,
    level: int = LevelOption,
    max_level: Optional[int] = MaxLevelOption,
    scale: float = ScaleOption,
    seed: int = SeedOption,
    n0: int = typer.Option(2, "--n0", help="First admissible index (> 1)"),
    eps: float = typer.Option(..., "--eps", help="Measure parameter in (0, 1)"),
    profile: BudgetProfile = typer.Option(BudgetProfile.VERBATIM, "--profile", help="verbatim or relaxed"),
    magnitude_cap: Optional[float] = typer.Option(None, "--magnitude-cap", help="Largest coefficient magnitude"),
    eq_tol: float = EqTolOption,
    out: Optional[Path] = typer.Option(None, "--out", help="Certificate JSON output"),
) -> None:
    """Whole-function corrector with monotone coefficient magnitudes."""
    with _exit_codes():
        config = _config(order, max_level, seed=seed, budget_profile=profile, eq_tol=eq_tol)
        f = _load_function(input_path, gen, config, level, scale)
        built = lemma2_construct(
            f,
            n0,
            eps,
            profile=config.budget_profile,
            magnitude_cap=magnitude_cap,
            max_level=config.max_level,
            eq_tol=config.eq_tol,
        )
        typer.echo(f"blocks={len(built.step_approx)} terms={len(built.polynomial)} level={built.level}")
        target = config.output_path(out)
        if target:
            save_certificate(target, built)
    _finish(built.certificate)


@app.command()
def correct(
    input_path: Optional[Path] = InOption,
    gen: Optional[Generator] = GenOption,
    order: int = OrderOption,
    level: int = LevelOption,
    max_level: Optional[int] = MaxLevelOption,
    scale: float = ScaleOption,
    seed: int = SeedOption,
    eps: float = typer.Option(..., "--eps", help="Measure of the modification set, in (0, 1)"),
    tol: float = typer.Option(1e-3, "--tol", help="Residual L1 tolerance"),
    q_max: int = typer.Option(8, "--q-max", help="Largest number of correction steps"),
    n0: int = typer.Option(2, "--n0", help="First admissible index (> 1)"),
    profile: BudgetProfile = typer.Option(BudgetProfile.VERBATIM, "--profile", help="verbatim or relaxed"),
    mode: Mode = typer.Option(Mode.direct, "--mode", help="direct step approximation or dictionary search"),
    search_depth: int = typer.Option(2000, "--search-depth", help="Dictionary elements searched in strict mode"),
    eq_tol: float = EqTolOption,
    out: Optional[Path] = typer.Option(None, "--out", help="Certificate JSON output"),
    g_out: Optional[Path] = typer.Option(None, "--g-out", help="Corrected function JSON output"),
) -> None:
    """Correct f on a small set so its series converges with monotone coefficients."""
    with _exit_codes():
        config = _config(order, max_level, seed=seed, budget_profile=profile, eq_tol=eq_tol)
        f = _load_function(input_path, gen, config, level, scale)
        run = correct_function(
            f,
            eps,
            tol,
            q_max,
            n0=n0,
            profile=config.budget_profile,
            mode=mode.value,
            search_depth=search_depth,
            max_level=config.max_level,
            eq_tol=config.eq_tol,
        )
        typer.echo(f"steps={len(run.trace)} terms={len(run.series)} stop={run.stop_reason}")
        target = config.output_path(out)
        if target:
            save_certificate(target, run)
        g_target = config.output_path(g_out)
        if g_target:
            save_step_function(g_target, run.g)
    _report(run.certificate)
    if run.stop_reason == "resolution":
        raise typer.Exit(code=EXIT_RESOLUTION)
    if not run.certificate.passed:
        raise typer.Exit(code=EXIT_CERTIFICATE)


@app.command()
def verify(
    input_path: Path = typer.Option(..., "--in", exists=True, readable=True, help="Certificate JSON file"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the recomputed certificate here"),
) -> None:
    """Recompute every conclusion of a certificate file from its embedded artifacts."""
    with _exit_codes():
        result, claimed = load_certificate(input_path)
        fresh = verify_certificate(result)
        if out:
            write_model(out, certificate_file(result, fresh))
    _report(fresh)
    claimed_flags = {c.name: c.passed for c in claimed.conclusions}
    disagreements = [c.name for c in fresh.conclusions if claimed_flags.get(c.name, c.passed) != c.passed]
    for name in disagreements:
        typer.secho(f"  claimed result differs for {name}", fg=typer.colors.YELLOW, err=True)
    if not fresh.passed or disagreements:
        raise typer.Exit(code=EXIT_CERTIFICATE)


@app.command()
def bench(
    order: int = OrderOption,
    level: int = typer.Option(20, "--level", "-J", help="Grid level"),
    repeat: int = typer.Option(3, "--repeat", help="Timed repetitions"),
    max_level: Optional[int] = MaxLevelOption,
) -> None:
    """Time fast (and, where permitted, naive) analysis."""
    with _exit_codes():
        config = _config(order, max_level)
        check_level(order, level, config.max_level, "benchmark")
        rng = np.random.default_rng(config.seed)
        f = StepFunction(order, level, rng.standard_normal(order**level))
        methods = ["fast"]
        if f.size <= config.naive_max_cells:
            methods.append("naive")
        for method in methods:
            best = float("inf")
            for _ in range(repeat):
                start = time.perf_counter()
                analyze(f, method, naive_max_cells=config.naive_max_cells)
                best = min(best, time.perf_counter() - start)
            typer.echo(f"{method}: a={order} J={level} {best:.4f}s ({f.size / best:,.0f} cells/s)")


@app.command()
def selftest(seed: int = SeedOption) -> None:
    """Run every property suite; exit 1 on any failure, 3 when a suite could not run all its inputs."""
    config = _config(2, None, seed=seed)
    results = run_all(config.seed, transform_tol=config.transform_tol)
    for suite in results:
        typer.secho(
            f"{suite.name}: {suite.status}, {suite.checks} checks, {len(suite.failures)} failures, "
            f"{len(suite.infeasible)} infeasible ({suite.elapsed:.2f}s) [{suite.scope}]",
            fg=STATUS_COLOURS[suite.status],
        )
        for failure in suite.failures[:10]:
            typer.echo(f"  - {failure}")
        for skipped in suite.infeasible[:3]:
            typer.echo(f"  ~ {skipped}")
    if not all(suite.passed for suite in results):
        raise typer.Exit(code=EXIT_CERTIFICATE)
    if not all(suite.met for suite in results):
        raise typer.Exit(code=EXIT_RESOLUTION)


if __name__ == "__main__":
    app()
