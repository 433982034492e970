"""Tests for the command line, configuration and output layer."""

import io
import json
import sys
from pathlib import Path

import click
import numpy as np
import pytest
import yaml

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src import bounds, coarsegrain, spinstar
from src.cli import main, parse_config
from src.config import THREADS_ENV, RunConfig, build_params, worker_count
from src.emit import Table, emit, read_xy_csv, sidecar_path
from src.errors import ConfigurationError, DomainError, OutputError, ValidationError
from src.fit import fit_exponential
from src.workers import parallel_map

BOUNDS_ARGS = ["bounds", "--a", "0.6,0.4", "--n", "3", "--p", "0.5,0.5"]


@pytest.fixture(autouse=True)
def _single_thread(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "1")


# --- parsing ---------------------------------------------------------------


def test_parse_bounds():
    """Flags land in the bounds model; output defaults to CSV on stdout."""
    cfg = parse_config(BOUNDS_ARGS)
    assert cfg.subcommand == "bounds"
    assert cfg.params.a == [0.6, 0.4]
    assert cfg.params.n == 3
    assert cfg.out is None and cfg.fmt == "csv"


def test_parse_defaults_fill_in():
    """Options left out take the model defaults."""
    cfg = parse_config(["coarsegrain", "--a", "0.6,0.4", "--lcg", "1,3,5"])
    assert cfg.params.lcg == [1, 3, 5]
    assert cfg.params.n == 2
    assert cfg.params.method == "multinomial"
    assert cfg.params.system_probs == [0.5, 0.5]

    cfg = parse_config(["repro-sweep"])
    assert cfg.params.n_total == 1024
    assert cfg.params.lcg_list == [1, 2, 4, 8, 16, 32, 64]


def test_parse_spinstar_requires_divisor():
    """l_cg must divide the pointer count; --lcg and --lcg-list exclude each other."""
    with pytest.raises(ConfigurationError, match="--n-total"):
        parse_config(["spinstar", "--lcg", "3", "--n-total", "8"])
    with pytest.raises(ConfigurationError):
        parse_config(["spinstar", "--lcg", "2", "--lcg-list", "1,2", "--n-total", "8"])


def test_parse_rejects_bad_values():
    """Out-of-range values are configuration errors naming the flag."""
    with pytest.raises(ConfigurationError, match="--n"):
        parse_config(["bounds", "--a", "0.6,0.4", "--n", "0", "--p", "0.5,0.5"])
    with pytest.raises(ConfigurationError, match="--a"):
        parse_config(["bounds", "--a", "0.6,0.6", "--n", "2", "--p", "0.5,0.5"])
    with pytest.raises(ConfigurationError):
        parse_config(["coarsegrain", "--a", "0.6,0.4", "--lcg", "2", "--method", "hypergeometric"])


def test_parse_usage_errors():
    """Missing options, unparsable lists and unknown commands are usage errors."""
    with pytest.raises(click.UsageError):
        parse_config(["bounds", "--a", "0.6,0.4", "--n", "3"])
    with pytest.raises(click.UsageError):
        parse_config(["bounds", "--a", "x,y", "--n", "3", "--p", "0.5,0.5"])
    with pytest.raises(click.UsageError):
        parse_config(["nonsense"])


def test_build_params_names_flag():
    """Validation messages use the command-line spelling."""
    with pytest.raises(ConfigurationError, match="--t-steps"):
        build_params("spinstar", {"lcg": 1, "t_steps": 0})


# --- exit codes ------------------------------------------------------------


def test_main_bounds_writes_json(capsys):
    """Scalar reports are JSON objects on stdout."""
    assert main(BOUNDS_ARGS) == 0
    data = json.loads(capsys.readouterr().out)
    assert set(data) == {"gamma", "delta", "mstar", "bias", "local_probs"}
    assert data["gamma"] + data["delta"] == pytest.approx(1.0)


def test_main_help_and_version(capsys):
    """--help and --version exit cleanly."""
    assert main(["--help"]) == 0
    assert main(["bounds", "--help"]) == 0
    assert main(["--version"]) == 0
    assert "0.1.0" in capsys.readouterr().out


def test_main_usage_and_config_errors():
    """Usage and configuration problems exit with 2."""
    assert main(["bounds", "--a", "0.6,0.4"]) == 2
    assert main(["bounds", "--a", "0.6,0.4", "--n", "0", "--p", "0.5,0.5"]) == 2


def test_main_bad_thread_setting(monkeypatch):
    """A non-numeric thread count is a configuration error."""
    monkeypatch.setenv(THREADS_ENV, "many")
    assert main(BOUNDS_ARGS) == 2


def test_main_resource_error():
    """Sizes beyond the block limit exit with 4."""
    args = ["spinstar", "--lcg", "130", "--n-total", "260", "--t-steps", "1"]
    assert main(args) == 4


def test_main_domain_error(tmp_path):
    """Unparsable numbers in the input exit with 3."""
    data = tmp_path / "xy.csv"
    data.write_text("x,y\n1,0.5\n2,abc\n")
    assert main(["fit", "--input", str(data)]) == 3


def test_main_output_errors(tmp_path):
    """Unreadable input and unwritable output exit with 5."""
    assert main(["fit", "--input", str(tmp_path / "missing.csv")]) == 5
    blocker = tmp_path / "file.txt"
    blocker.write_text("")
    assert main(BOUNDS_ARGS + ["--out", str(blocker / "out.json")]) == 5


# --- end to end ------------------------------------------------------------


def test_coarsegrain_csv_and_sidecar(tmp_path):
    """CSV to a new directory plus the provenance sidecar."""
    out = tmp_path / "cg" / "table.csv"
    assert main(["coarsegrain", "--a", "0.6,0.4", "--lcg", "1,3,5", "--out", str(out)]) == 0

    lines = out.read_text().splitlines()
    assert lines[0] == "l_cg,a0_cg,gamma_cg,one_minus_a0,bias_cg,a0_asymptotic"
    assert len(lines) == 4
    # no asymptote below l = 3
    assert lines[1].endswith(",")
    assert float(lines[2].split(",")[1]) == pytest.approx(0.648, abs=1e-15)

    side = yaml.safe_load(sidecar_path(out).read_text())["intersub_run"]
    assert side["subcommand"] == "coarsegrain"
    assert side["params"]["lcg"] == [1, 3, 5]
    assert side["format"] == "csv"


def test_coarsegrain_methods_agree(tmp_path):
    """All three summation methods give the same table."""
    tables = {}
    for method in ("multinomial", "enumerate", "hypergeometric"):
        out = tmp_path / f"{method}.csv"
        args = ["coarsegrain", "--a", "0.7,0.3", "--lcg", "1,5,9", "--method", method]
        assert main(args + ["--out", str(out)]) == 0
        tables[method] = [[float(v) for v in line.split(",")[:3]]
                          for line in out.read_text().splitlines()[1:]]
    for method in ("enumerate", "hypergeometric"):
        for row, ref in zip(tables[method], tables["multinomial"]):
            assert row == pytest.approx(ref, abs=1e-12)


def test_fit_round_trip(tmp_path):
    """Fitting the emitted decay column equals fitting the values directly."""
    table = tmp_path / "decay.csv"
    lcg = ",".join(str(l) for l in range(1, 40, 2))
    assert main(["coarsegrain", "--a", "0.6,0.4", "--lcg", lcg, "--out", str(table)]) == 0

    result = tmp_path / "fit.json"
    args = ["fit", "--input", str(table), "--y-column", "one_minus_a0", "--out", str(result)]
    assert main(args) == 0

    rows = coarsegrain.cg_sweep([0.6, 0.4], range(1, 40, 2), 2, [0.5, 0.5])
    direct = fit_exponential([(r.l_cg, r.one_minus_a0) for r in rows])
    assert json.loads(result.read_text()) == direct.to_dict()


def test_spinstar_scan_columns(capsys):
    """A single size gives one row per time point."""
    args = ["spinstar", "--lcg", "2", "--n-total", "4", "--t-steps", "5", "--t-max", "2"]
    assert main(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(spinstar.ScanRecord.COLUMNS)
    assert len(lines) == 6


def test_spinstar_sweep_json(capsys):
    """A size list gives one JSON record per size."""
    args = ["spinstar", "--lcg-list", "1,2", "--n-total", "4", "--t-steps", "5", "--format", "json"]
    assert main(args) == 0
    data = json.loads(capsys.readouterr().out)
    assert [r["l_cg"] for r in data] == [1, 2]
    assert set(data[0]) == set(spinstar.SweepRow.COLUMNS)


def test_partition_table(capsys):
    """One row per outcome with its levels."""
    args = ["partition", "--energies", "0,1,2,3", "--beta", "1", "--dims", "2,2"]
    assert main(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,dim,a_x,levels"
    assert lines[1].startswith("0,2,") and lines[1].endswith("0 1")


# --- emit and helpers ------------------------------------------------------


def _cfg(**kw) -> RunConfig:
    return RunConfig(subcommand="bounds", params=parse_config(BOUNDS_ARGS).params, **kw)


def test_emit_to_stream():
    """CSV and JSON on a stream; None becomes an empty cell or null."""
    buf = io.StringIO()
    table = Table.from_rows(("a", "b"), [(1, 0.5), (2, None)])
    assert emit(table, _cfg(), stream=buf) is None
    assert buf.getvalue() == "a,b\n1,0.5\n2,\n"

    buf = io.StringIO()
    emit(table, _cfg(fmt="json"), stream=buf)
    assert json.loads(buf.getvalue()) == [{"a": 1, "b": 0.5}, {"a": 2, "b": None}]


def test_emit_rejects_empty_results():
    """Nothing to write is a validation error."""
    with pytest.raises(ValidationError):
        emit(Table.from_rows(("a",), []), _cfg(), stream=io.StringIO())
    with pytest.raises(ValidationError):
        emit({}, _cfg(), stream=io.StringIO())


def test_table_rejects_ragged_rows():
    """Rows must match the header width."""
    with pytest.raises(ValidationError):
        Table.from_rows(("a", "b"), [(1,)])


def test_emit_unwritable_path(tmp_path):
    """A path under a regular file is an output error."""
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(OutputError):
        emit({"gamma": 0.5}, _cfg(out=blocker / "sub" / "x.json"))


def test_read_xy_csv(tmp_path):
    """Headerless and headed files, by default or named column."""
    plain = tmp_path / "plain.csv"
    plain.write_text("1,0.5\n2,0.25\n\n3,0.125\n")
    assert read_xy_csv(plain) == [(1.0, 0.5), (2.0, 0.25), (3.0, 0.125)]

    named = tmp_path / "named.csv"
    named.write_text("l,a,b\n1,9,0.5\n2,9,0.25\n")
    assert read_xy_csv(named) == [(1.0, 9.0), (2.0, 9.0)]
    assert read_xy_csv(named, "b") == [(1.0, 0.5), (2.0, 0.25)]
    with pytest.raises(DomainError):
        read_xy_csv(named, "c")
    with pytest.raises(DomainError):
        read_xy_csv(plain, "b")


def test_read_xy_csv_errors(tmp_path):
    """Missing, empty and single-column files are refused."""
    with pytest.raises(OutputError):
        read_xy_csv(tmp_path / "nope.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text("\n")
    with pytest.raises(DomainError):
        read_xy_csv(empty)
    short = tmp_path / "short.csv"
    short.write_text("1\n")
    with pytest.raises(DomainError):
        read_xy_csv(short)


def test_worker_count(monkeypatch):
    """The environment variable wins; unset means the CPU count."""
    assert worker_count() == 1
    monkeypatch.setenv(THREADS_ENV, "0")
    with pytest.raises(ConfigurationError):
        worker_count()
    monkeypatch.delenv(THREADS_ENV)
    assert worker_count() >= 1


def test_parallel_map_keeps_order():
    """Results come back in input order."""
    items = list(range(50))
    assert parallel_map(lambda x: x * x, items, workers=4) == [x * x for x in items]
    assert parallel_map(str, [], workers=4) == []


def test_partition_table_shows_uncovered_levels(capsys):
    """Levels outside every subspace get their own row with the leftover weight."""
    args = ["partition", "--energies", "0,1,2,3", "--beta", "1", "--dims", "1,1"]
    assert main(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    x, dim, weight, levels = lines[-1].split(",")
    assert (x, dim, levels) == ("outside", "2", "2 3")
    w = np.exp(-np.arange(4.0))
    assert float(weight) == pytest.approx(w[2:].sum() / w.sum(), abs=1e-15)


def test_partition_table_full_cover_has_no_outside_row(capsys):
    """When the dims cover the pointer there is nothing left over."""
    args = ["partition", "--energies", "0,1,2,3", "--beta", "1", "--dims", "2,2"]
    assert main(args) == 0
    assert "outside" not in capsys.readouterr().out


def test_coarsegrain_unsorted_outcomes(tmp_path):
    """Outcomes in any order give the bounds of the vectors as listed."""
    out = tmp_path / "cg.csv"
    args = ["coarsegrain", "--a", "0.2,0.3,0.5", "--p", "0.5,0.3,0.2", "--lcg", "1", "--out", str(out)]
    assert main(args) == 0
    header, row = out.read_text().splitlines()
    bias = float(row.split(",")[header.split(",").index("bias_cg")])
    assert bias == pytest.approx(bounds.optimal_bias([0.2, 0.3, 0.5], 2, [0.5, 0.3, 0.2]), abs=1e-15)


def test_hypergeometric_unsorted_outcomes(tmp_path):
    """The two-outcome closed form pairs p_S with a the same way as the series."""
    tables = {}
    for method in ("multinomial", "hypergeometric"):
        out = tmp_path / f"{method}.csv"
        args = ["coarsegrain", "--a", "0.4,0.6", "--p", "0.2,0.8", "--n", "3",
                "--lcg", "1,3,7", "--method", method, "--out", str(out)]
        assert main(args) == 0
        tables[method] = [[float(v) for v in line.split(",")[:5]]
                          for line in out.read_text().splitlines()[1:]]
    for row, ref in zip(tables["hypergeometric"], tables["multinomial"]):
        assert row == pytest.approx(ref, abs=1e-12)
