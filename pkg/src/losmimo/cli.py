"""Command-line front end: ``losmimo <command> [options]``.

Options may also come from a TOML/JSON config file (``--config``); flags
given on the command line override file values. Thread count for SNR grids
is taken from the ``LOSMIMO_THREADS`` environment variable.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import click

from . import experiments as ex
from .capacity import db_to_linear
from .channel import load_geometry

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

COMMANDS = (
    "bound-sweep", "eta-sweep", "plan", "transceive", "table1",
    "polarization", "surrogate-scaling", "three-spacing",
)


@dataclass
class ExperimentConfig:
    command: str
    n_tx: int = 256
    n_rx: int | None = None
    eta: float | None = None
    geometry: str | None = None
    snr_start_db: float = -30.0
    snr_stop_db: float = 20.0
    snr_step_db: float = 1.0
    output: str | None = None
    seed: int = 0
    plot_script: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.n_rx is None:
            self.n_rx = self.n_tx
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("antenna counts must be at least 1")
        if self.geometry is not None and not Path(self.geometry).exists():
            raise ValueError(f"geometry file not found: {self.geometry}")
        ex.snr_grid_db(self.snr_start_db, self.snr_stop_db, self.snr_step_db)

    @property
    def snrs_db(self):
        return ex.snr_grid_db(self.snr_start_db, self.snr_stop_db, self.snr_step_db)

    @classmethod
    def from_sources(cls, command: str, config_path: str | None, overrides: dict) -> "ExperimentConfig":
        record: dict = {}
        if config_path:
            path = Path(config_path)
            try:
                raw = path.read_bytes()
            except OSError as exc:
                raise ValueError(f"cannot read config {path}: {exc}") from exc
            record = tomllib.loads(raw.decode()) if path.suffix.lower() == ".toml" else json.loads(raw)
        record.update({k: v for k, v in overrides.items() if v is not None})
        record["command"] = command
        known = {f.name for f in fields(cls)}
        extra = {k: record.pop(k) for k in list(record) if k not in known}
        record.setdefault("extra", {}).update(extra)
        return cls(**record)


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    try:
        return f"{float(value):.12g}"
    except (TypeError, ValueError):
        return str(value)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


PLOT_TEMPLATE = """\
# Plot script for {csv}; run with a Python that has matplotlib.
import csv
import matplotlib.pyplot as plt

with open({csv!r}) as fh:
    rows = list(csv.reader(fh))
header, data = rows[0], [[float(v) for v in r] for r in rows[1:]]
x = [r[0] for r in data]
for j in range(1, len(header)):
    plt.plot(x, [r[j] for r in data], label=header[j])
plt.xlabel(header[0])
plt.legend()
plt.grid(True)
plt.savefig({png!r}, dpi=150)
"""


def emit(cfg: ExperimentConfig, header, rows) -> None:
    text = render_csv(header, rows)
    if cfg.output:
        path = Path(cfg.output)
        try:
            path.write_text(text)
        except OSError as exc:
            raise click.ClickException(f"cannot write {path}: {exc}") from exc
        if cfg.plot_script:
            script = Path(cfg.plot_script)
            try:
                script.write_text(PLOT_TEMPLATE.format(csv=str(path), png=str(path.with_suffix(".png"))))
            except OSError as exc:
                raise click.ClickException(f"cannot write {script}: {exc}") from exc
    else:
        if cfg.plot_script:
            raise click.ClickException("--plot-script needs --output")
        click.echo(text, nl=False)


def _build(ctx_command: str, config: str | None, **overrides) -> ExperimentConfig:
    try:
        return ExperimentConfig.from_sources(ctx_command, config, overrides)
    except (ValueError, TypeError) as exc:
        raise click.UsageError(str(exc)) from exc


def common_options(fn):
    opts = [
        click.option("--config", type=click.Path(dir_okay=False), help="TOML or JSON config file."),
        click.option("--nt", "n_tx", type=int, help="Transmit antennas."),
        click.option("--nr", "n_rx", type=int, help="Receive antennas (defaults to --nt)."),
        click.option("--snr-start-db", type=float),
        click.option("--snr-stop-db", type=float),
        click.option("--snr-step-db", type=float),
        click.option("--output", "-o", type=click.Path(dir_okay=False), help="CSV destination (stdout if omitted)."),
        click.option("--plot-script", type=click.Path(dir_okay=False), help="Also write a matplotlib script."),
        click.option("--seed", type=int),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Line-of-sight MIMO capacity, ULA planning and transceiver experiments."""


@main.command("bound-sweep")
@common_options
def bound_sweep_cmd(config, **kw):
    """Capacity upper bound (integer and relaxed) over an SNR grid."""
    cfg = _build("bound-sweep", config, **kw)
    emit(cfg, *ex.bound_sweep(cfg.n_tx, cfg.n_rx, cfg.snrs_db))


@main.command("eta-sweep")
@common_options
@click.option("--eta-points", type=int, help="Number of eta grid points in [1/N, 1].")
def eta_sweep_cmd(config, eta_points, **kw):
    """Best eta on a grid vs the bound, square arrays of size --nt."""
    cfg = _build("eta-sweep", config, eta_points=eta_points, **kw)
    emit(cfg, *ex.run_eta_sweep(cfg.n_tx, cfg.snrs_db, int(cfg.extra.get("eta_points", 100))))


@main.command("three-spacing")
@common_options
def three_spacing_cmd(config, **kw):
    """Three fixed spacings (tight, 1/sqrt(N), Rayleigh) vs the bound."""
    cfg = _build("three-spacing", config, **kw)
    emit(cfg, *ex.run_three_spacing(cfg.n_tx, cfg.snrs_db))


@main.command("table1")
@common_options
@click.option("--snr-db", "snr_db", type=float, multiple=True, help="SNR points (default -20,-10,0,10 dB).")
@click.option("--sweep-streams", is_flag=True, default=None, help="Pick the best MRC stream count.")
@click.option("--interference", type=click.Choice(["all", "active"]), help="MRC leakage accounting.")
def table1_cmd(config, snr_db, sweep_streams, interference, **kw):
    """Shares of the bound for parallel, rotated-SVD and Fourier+MRC ULAs."""
    cfg = _build("table1", config, sweep_streams=sweep_streams, interference=interference, **kw)
    snrs = list(snr_db) or list(cfg.extra.get("snr_db", ex.TABLE1_SNRS_DB))
    emit(cfg, *ex.run_table1(
        cfg.n_tx, snrs,
        sweep_streams=bool(cfg.extra.get("sweep_streams", False)),
        interference=cfg.extra.get("interference", "all"),
    ))


@main.command("polarization")
@common_options
@click.option("--eta", type=float, help="Configuration parameter (default 0.5).")
@click.option("--bins", type=int, help="Histogram bins.")
def polarization_cmd(config, eta, bins, **kw):
    """Histogram of the normalized Gram eigenvalues."""
    cfg = _build("polarization", config, eta=eta, bins=bins, **kw)
    eta_val = 0.5 if cfg.eta is None else cfg.eta
    header, rows = ex.run_polarization(cfg.n_tx, eta_val, int(cfg.extra.get("bins", 20)))
    values = ex.polarization_spectrum(eta_val, cfg.n_tx, cfg.n_tx)
    near_one, near_zero = ex.polarization_fractions(values)
    click.echo(f"near one: {near_one:.4f}  below 0.15: {near_zero:.4f}", err=True)
    emit(cfg, header, rows)


@main.command("surrogate-scaling")
@common_options
@click.option("--eta", type=float, help="Configuration parameter (default 0.5).")
@click.option("--sizes", help="Comma-separated array sizes (default 64,128,256,512).")
def surrogate_scaling_cmd(config, eta, sizes, **kw):
    """Circulant-surrogate Frobenius error against array size."""
    cfg = _build("surrogate-scaling", config, eta=eta, sizes=sizes, **kw)
    raw = cfg.extra.get("sizes") or "64,128,256,512"
    size_list = [int(s) for s in raw.split(",")] if isinstance(raw, str) else [int(s) for s in raw]
    emit(cfg, *ex.run_surrogate_scaling(0.5 if cfg.eta is None else cfg.eta, size_list))


@main.command("plan")
@common_options
@click.option("--r", "ratio", type=float, help="Geometric ratio of the eta series (0 < r < 1).")
@click.option("--snr-min-db", type=float, help="Lowest SNR to cover; truncates the bank.")
@click.option("--json-out", type=click.Path(dir_okay=False), help="Write the plan record here.")
def plan_cmd(config, ratio, snr_min_db, json_out, **kw):
    """Radial-ULA plan: angles, switching thresholds and guarantee."""
    cfg = _build("plan", config, ratio=ratio, snr_min_db=snr_min_db, json_out=json_out, **kw)
    r = cfg.extra.get("ratio")
    if r is None:
        raise click.UsageError("--r is required")
    smin = cfg.extra.get("snr_min_db")
    try:
        plan, header, rows = ex.run_plan_rates(float(r), cfg.n_tx, cfg.n_rx, smin, cfg.snrs_db)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    record = plan.to_dict()
    text = json.dumps(record, indent=2)
    if cfg.extra.get("json_out"):
        Path(cfg.extra["json_out"]).write_text(text + "\n")
    else:
        click.echo(text)
    click.echo(f"{'ULA':>4} {'eta':>8} {'angle [deg]':>12} {'switch below [dB]':>18}", err=True)
    thresholds = list(record["snr_thresholds_db"]) + [record["snr_floor_db"]]
    for i, (eta, ang) in enumerate(zip(record["etas"], record["angles_deg"])):
        click.echo(f"{i:>4} {eta:>8.4f} {ang:>12.2f} {thresholds[i]:>18.2f}", err=True)
    click.echo(f"guarantee {record['guarantee']:.4f}", err=True)
    if cfg.output:
        emit(cfg, header, rows)


@main.command("transceive")
@common_options
@click.option("--geometry", type=click.Path(exists=True, dir_okay=False), help="Geometry TOML/JSON.")
@click.option("--snr-db", type=float, help="Receive SNR in dB.")
@click.option("--streams", type=int, help="Number of Fourier streams.")
@click.option("--sweep-streams", is_flag=True, default=None)
@click.option("--model", type=click.Choice(["exact", "approx"]))
@click.option("--interference", type=click.Choice(["all", "active"]))
def transceive_cmd(config, geometry, snr_db, streams, sweep_streams, model, interference, **kw):
    """Per-stream SINR of the Fourier precoder + MRC receiver."""
    cfg = _build(
        "transceive", config, geometry=geometry, snr_db=snr_db, streams=streams,
        sweep_streams=sweep_streams, model=model, interference=interference, **kw,
    )
    if cfg.geometry is None:
        raise click.UsageError("--geometry is required")
    if cfg.extra.get("snr_db") is None:
        raise click.UsageError("--snr-db is required")
    if cfg.extra.get("streams") is not None and cfg.extra.get("sweep_streams"):
        raise click.UsageError("--streams and --sweep-streams are exclusive")
    try:
        geom = load_geometry(cfg.geometry)
        res, svd, header, rows = ex.run_transceive(
            geom, float(cfg.extra["snr_db"]), model=cfg.extra.get("model", "approx"),
            streams=cfg.extra.get("streams"), sweep_streams=bool(cfg.extra.get("sweep_streams")),
            interference=cfg.extra.get("interference", "all"),
        )
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(
        f"streams {res.n_streams}  rate {res.rate_bits:.6g} bits/s/Hz  svd capacity {svd:.6g} bits/s/Hz",
        err=True,
    )
    emit(cfg, header, rows)


def run_sweeps(cfg: ExperimentConfig):
    """Run one configured experiment and return ``(header, rows)``."""
    snrs = cfg.snrs_db
    if cfg.command == "bound-sweep":
        return ex.bound_sweep(cfg.n_tx, cfg.n_rx, snrs)
    if cfg.command == "eta-sweep":
        return ex.run_eta_sweep(cfg.n_tx, snrs, int(cfg.extra.get("eta_points", 100)))
    if cfg.command == "three-spacing":
        return ex.run_three_spacing(cfg.n_tx, snrs)
    if cfg.command == "table1":
        return ex.run_table1(cfg.n_tx, cfg.extra.get("snr_db", ex.TABLE1_SNRS_DB),
                             sweep_streams=bool(cfg.extra.get("sweep_streams", False)))
    if cfg.command == "polarization":
        return ex.run_polarization(cfg.n_tx, 0.5 if cfg.eta is None else cfg.eta)
    if cfg.command == "surrogate-scaling":
        return ex.run_surrogate_scaling(0.5 if cfg.eta is None else cfg.eta,
                                        cfg.extra.get("sizes", [64, 128, 256, 512]))
    if cfg.command == "plan":
        smin = cfg.extra.get("snr_min_db")
        _, header, rows = ex.run_plan_rates(float(cfg.extra["ratio"]), cfg.n_tx, cfg.n_rx, smin, snrs)
        return header, rows
    geom = load_geometry(cfg.geometry)
    _, _, header, rows = ex.run_transceive(geom, float(cfg.extra["snr_db"]),
                                           model=cfg.extra.get("model", "approx"))
    return header, rows


if __name__ == "__main__":  # pragma: no cover
    main()
