import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import click
import numpy as np

from . import __version__, bounds, coarsegrain, fit, oracle, partition, spinstar
from .config import (
    CoarseGrainParams,
    RunConfig,
    build_params,
    worker_count,
)
from .console import (
    LOG_LEVELS,
    print_banner,
    print_error,
    print_info,
    print_success,
    print_table,
    setup_logging,
)
from .emit import Records, Table, emit, read_xy_csv
from .errors import IntersubError
from .repro import DECAY_COLUMNS, Reproduction

logger = logging.getLogger(__name__)


class NumberList(click.ParamType):
    """Comma-separated numbers, e.g. ``0.6,0.4``."""

    def __init__(self, kind=float):
        self.kind = kind
        self.name = f"{kind.__name__}s"

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return list(value)
        try:
            return [self.kind(v) for v in str(value).split(",") if v.strip()]
        except ValueError:
            self.fail(f"{value!r} is not a comma-separated list of {self.kind.__name__}s", param, ctx)


FLOATS = NumberList(float)
INTS = NumberList(int)


def output_options(f):
    f = click.option(
        "--log-level",
        type=click.Choice(LOG_LEVELS, case_sensitive=False),
        default="WARNING",
        show_default=True,
    )(f)
    f = click.option(
        "--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True
    )(f)
    f = click.option(
        "--out", type=click.Path(dir_okay=False, path_type=Path), help="Output file (default: stdout)."
    )(f)
    return f


def _run_config(subcommand: str, values: dict) -> RunConfig:
    out = values.pop("out")
    fmt = values.pop("fmt")
    log_level = values.pop("log_level").upper()
    # unset options fall through to the model's defaults
    params = build_params(subcommand, {k: v for k, v in values.items() if v is not None})
    return RunConfig(subcommand=subcommand, params=params, out=out, fmt=fmt, log_level=log_level)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="intersub")
def cli():
    """Finite-resource intersubjectivity: bounds, coarse-graining, spin-star model."""


@cli.command("bounds")
@click.option("--a", type=FLOATS, required=True, help="Subspace traces a_x.")
@click.option("--n", type=int, required=True, help="Number of observers.")
@click.option("--p", type=FLOATS, required=True, help="System distribution p_S.")
@output_options
def bounds_cmd(**values):
    """Maximal agreement, noise distribution and optimal bias."""
    return _run_config("bounds", values)


@cli.command("partition")
@click.option("--energies", type=FLOATS)
@click.option("--energies-file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--beta", type=float, required=True)
@click.option("--dims", type=INTS, required=True, help="Subspace dimensions per outcome.")
@click.option("--renormalize", is_flag=True, help="Rescale traces when D_x do not cover the pointer.")
@output_options
def partition_cmd(**values):
    """Thermal pointer traces a_x from the greedy subspace assignment."""
    return _run_config("partition", values)


@cli.command("coarsegrain")
@click.option("--a", type=FLOATS, required=True)
@click.option("--lcg", type=INTS, required=True, help="Macrofraction sizes.")
@click.option("--n", type=int, help="Observers per macrofraction set (default 2).")
@click.option("--p", type=FLOATS, help="System distribution (default uniform).")
@click.option(
    "--method",
    type=click.Choice(["multinomial", "enumerate", "hypergeometric"]),
    help="Default multinomial; enumerate walks every composition; hypergeometric needs 2 outcomes, odd l.",
)
@output_options
def coarsegrain_cmd(**values):
    """Coarse-grained traces a^(l) with their agreement and bias bounds."""
    return _run_config("coarsegrain", values)


@cli.command("fit")
@click.option("--input", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--skip-first", type=int)
@click.option("--y-column", help="Header name of the y column (default: second column).")
@output_options
def fit_cmd(**values):
    """Fit y = c0 exp(c1 x) to an (x, y) CSV."""
    return _run_config("fit", values)


@cli.command("oracle")
@click.option("--p", type=FLOATS, required=True)
@click.option("--dims", type=INTS, required=True)
@click.option("--n", type=int, required=True)
@click.option("--beta", type=float, required=True)
@click.option("--energies", type=FLOATS, help="Pointer levels (default 0, 1, ..., d_P-1).")
@output_options
def oracle_cmd(**values):
    """Dense brute-force check of the bounds."""
    return _run_config("oracle", values)


def sweep_options(f):
    f = click.option("--pointer-h", type=click.Choice(["half", "unit"]))(f)
    f = click.option("--t-steps", type=int)(f)
    f = click.option("--t-max", type=float)(f)
    f = click.option("--g", type=float)(f)
    f = click.option("--p0", type=float)(f)
    f = click.option("--beta", type=float)(f)
    f = click.option("--n-total", type=int)(f)
    return f


@cli.command("spinstar")
@click.option("--lcg", type=int, help="Single macrofraction size: full time scan.")
@click.option("--lcg-list", type=INTS, help="Several sizes: extrema over time per size.")
@sweep_options
@output_options
def spinstar_cmd(**values):
    """Central-spin model with Helstrom-measuring observers."""
    return _run_config("spinstar", values)


@cli.command("repro-decay")
@click.option("--dims", type=INTS, help="Outcome counts (default 2,3,4,5).")
@click.option("--skip-first", type=int)
@click.option("--l-max-binary", type=int)
@click.option("--l-max", type=int)
@output_options
def repro_decay_cmd(**values):
    """Exponential fits of 1 - a_0^(l) against the published table."""
    return _run_config("repro-decay", values)


@cli.command("repro-sweep")
@click.option("--lcg-list", type=INTS)
@sweep_options
@output_options
def repro_sweep_cmd(**values):
    """Spin-star disagreement and bias against the coarse-grained bounds."""
    return _run_config("repro-sweep", values)


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Parse and validate a command line. Usage errors raise click exceptions,
    out-of-range values ConfigurationError."""
    result = cli.main(args=list(argv), prog_name="intersub", standalone_mode=False)
    if not isinstance(result, RunConfig):
        # --help / --version already printed
        raise click.exceptions.Exit(result or 0)
    return result


def _coarsegrain_table(params: CoarseGrainParams, workers: int) -> Table:
    p_s = params.system_probs
    if params.method == "hypergeometric":
        # a0 is the larger trace; p_s follows the same order
        p_sorted = np.asarray(p_s)[np.argsort(-np.asarray(params.a), kind="stable")]
        results = []
        for l_cg in params.lcg:
            a0 = coarsegrain.cg_a0_hypergeometric(params.a, l_cg)
            a_cg = (a0, 1.0 - a0)
            gamma, _ = bounds.max_agreement(a_cg, params.n)
            results.append(coarsegrain.CoarseGrainResult(
                l_cg=l_cg,
                avector_cg=a_cg,
                gamma_cg=gamma,
                bias_cg=bounds.optimal_bias(a_cg, params.n, p_sorted),
            ))
    else:
        method = "enumerate" if params.method == "enumerate" else "series"
        results = coarsegrain.cg_sweep(params.a, params.lcg, params.n, p_s, workers, method=method)

    columns = list(results[0].to_row())
    a_sorted = sorted(params.a, reverse=True)
    with_asymptote = len(a_sorted) == 2 and a_sorted[0] > a_sorted[1] > 0
    if with_asymptote:
        columns.append("a0_asymptotic")
    rows = []
    for r in results:
        row = list(r.to_row().values())
        if with_asymptote:
            row.append(coarsegrain.asymptotic_a0(params.a, r.l_cg) if r.l_cg >= 3 else None)
        rows.append(row)
    return Table.from_rows(columns, rows)


def execute(cfg: RunConfig, workers: int = 1) -> Records:
    """Run the configured subcommand and return what should be emitted."""
    p = cfg.params
    name = cfg.subcommand
    logger.info("running %s with %d worker(s)", name, workers)

    if name == "bounds":
        return bounds.bound_report(p.a, p.n, p.p).to_dict()

    if name == "partition":
        energies = p.energies if p.energies is not None else partition.read_energies(p.energies_file)
        spec = partition.PointerSpec(
            energies=tuple(float(e) for e in energies), beta=p.beta, subspace_dims=tuple(p.dims)
        )
        part = partition.pointer_partition(spec, renormalize=p.renormalize)
        rows = [
            (x, len(idx), part.avector[x], " ".join(str(i) for i in idx))
            for x, idx in sorted(part.assignment.items())
        ]
        outside = [int(i) for i in np.flatnonzero(part.labels() < 0)]
        if outside:
            logger.warning("weight outside every subspace: %.6g", part.residual)
            # a_x column carries the raw leftover weight on this row
            rows.append(("outside", len(outside), part.residual, " ".join(map(str, outside))))
        return Table.from_rows(("x", "dim", "a_x", "levels"), rows)

    if name == "coarsegrain":
        return _coarsegrain_table(p, workers)

    if name == "fit":
        points = read_xy_csv(p.input, p.y_column)
        return fit.fit_exponential(points, skip_first=p.skip_first).to_dict()

    if name == "oracle":
        return oracle.oracle_report(p.p, p.dims, p.n, p.beta, p.energies)

    if name == "spinstar":
        pt = spinstar.thermal_pointer(p.beta, p.pointer_h)
        grid = spinstar.time_grid(p.t_max, p.t_steps)
        if p.lcg is not None:
            scan = spinstar.time_scan(pt, p.lcg, p.n_total, p.p0, p.g, grid, workers)
            return Table.from_rows(spinstar.ScanRecord.COLUMNS, [r.to_row() for r in scan.records])
        rows = spinstar.lcg_sweep(pt, p.n_total, p.p0, p.g, grid, p.lcg_list, workers)
        return Table.from_rows(spinstar.SweepRow.COLUMNS, [r.to_row() for r in rows])

    print_banner(name)
    repro = Reproduction(workers=workers, on_status=print_info)
    if name == "repro-decay":
        rows = [r.to_row() for r in repro.decay_table(p.dims, p.skip_first, p.l_max_binary, p.l_max)]
        print_table("1 - a_0 decay fits", DECAY_COLUMNS, rows)
        return Table.from_rows(DECAY_COLUMNS, rows)

    if name == "repro-sweep":
        sweep = repro.lcg_sweep_table(
            n_total=p.n_total, beta=p.beta, p0=p.p0, g=p.g,
            t_max=p.t_max, t_steps=p.t_steps, lcg_list=p.lcg_list, pointer_h=p.pointer_h,
        )
        rows = [r.to_row() for r in sweep]
        print_table("spin star vs bounds", spinstar.SweepRow.COLUMNS, rows)
        return Table.from_rows(spinstar.SweepRow.COLUMNS, rows)

    raise click.UsageError(f"unknown subcommand {name!r}")


def main(argv: Optional[List[str]] = None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(args)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        print_error("aborted")
        return 1
    except IntersubError as e:
        print_error(str(e))
        return e.exit_code

    setup_logging(cfg.log_level)
    try:
        records = execute(cfg, worker_count())
        written = emit(records, cfg)
    except IntersubError as e:
        print_error(f"{cfg.subcommand}: {e}")
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    if written is not None:
        print_success(f"wrote {written}")
    return 0
