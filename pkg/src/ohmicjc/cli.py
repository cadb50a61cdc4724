"""Command-line front end: dynamics, sweeps, critical-coupling search,
validation bundle, and figure presets.

Units: the atomic frequency is 1, all frequencies are entered in units of it
and times in its inverse.  Output is CSV (RFC-4180-style quoting, '#' comment
lines carrying the resolved configuration) or a JSON array; every float is
serialized with 17 significant digits so identical configurations produce
byte-identical files.  Logs go to stderr, data to the chosen output.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 transition not
found, 4 validation failure.
"""

import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace, asdict

import numpy as np

from . import __version__
from .errors import (ConfigError, DomainError, NoTransitionError,
                     QuadratureError, OhmicJCError)
from .spectral import (ReservoirSpec, SystemSpec, TimeGrid,
                       CLOSED_FORM_EXPONENTS, decay_rate_closed,
                       decay_rate_quadrature)
from .dynamics import (InitialAtomState, amplitude, rate_series,
                       dressed_ode_oracle)
from .measures import (critical_coupling, evaluate_point, measure_report,
                       gamma_sigma_consistency, sigma_series)

log = logging.getLogger("ohmicjc")

SWEEPABLE = ("coupling", "eta", "omega_c", "s")
FORMATS = ("csv", "json")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NOT_FOUND = 3
EXIT_VALIDATION = 4


@dataclass(frozen=True)
class SweepBlock:
    param: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.param not in SWEEPABLE:
            raise ConfigError(f"sweep.param must be one of {SWEEPABLE}, got {self.param!r}")
        if self.steps < 2:
            raise ConfigError(f"sweep.steps must be >= 2, got {self.steps}")
        if not (self.start < self.stop):
            raise ConfigError(f"sweep.start must be < sweep.stop, got "
                              f"{self.start} >= {self.stop}")

    def values(self):
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    s: float = 1.0
    eta: float = 0.1
    omega_c: float = 2.0
    coupling: float = 3.0
    omega0: float = 1.0
    tau: float = 1.0
    steps: int = 1001
    sweep: SweepBlock = None
    output: str = None
    format: str = "csv"
    preset: str = None

    def reservoir(self) -> ReservoirSpec:
        return ReservoirSpec(s=self.s, eta=self.eta, omega_c=self.omega_c)

    def system(self) -> SystemSpec:
        return SystemSpec(omega0=self.omega0, coupling=self.coupling)

    def grid(self) -> TimeGrid:
        return TimeGrid(t_max=self.tau, n_steps=self.steps)

    def metadata(self):
        """Ordered (key, value) pairs describing the fully resolved run."""
        items = [("tool", f"ohmicjc {__version__}")]
        if self.preset:
            items.append(("preset", self.preset))
        items += [("s", self.s), ("eta", self.eta), ("omega_c", self.omega_c),
                  ("coupling", self.coupling), ("omega0", self.omega0),
                  ("tau", self.tau), ("steps", self.steps)]
        if self.sweep is not None:
            items.append(("sweep", f"{self.sweep.param}:{fmt_float(self.sweep.start)}"
                                   f"..{fmt_float(self.sweep.stop)}x{self.sweep.steps}"))
        return items


# Every preset pins the horizon to tau=1.0: the critical-coupling value and
# the Markovian window in these parameter studies exist on the first-revival
# timescale, not on long horizons (see README, "horizon").
PRESETS = {
    "fig1": dict(kind="dynamics", s=1.0, eta=0.1, omega_c=2.0, coupling=3.0,
                 tau=1.0, steps=1001),
    "fig2": dict(kind="sweep", s=1.0, eta=0.1, omega_c=2.0, tau=1.0, steps=1001,
                 sweep=SweepBlock("coupling", 0.0, 4.0, 81)),
    "fig3": dict(kind="sweep", s=1.0, eta=0.1, omega_c=2.0, tau=1.0, steps=1001,
                 sweep=SweepBlock("coupling", 0.0, 4.0, 81),
                 series=("eta", (0.1, 0.5, 0.9))),
    "fig4": dict(kind="sweep", s=1.0, eta=0.9, omega_c=2.0, tau=1.0, steps=1001,
                 sweep=SweepBlock("coupling", 0.0, 4.0, 81),
                 series=("omega_c", (2.0, 1.0, 0.5))),
    # eta 0.6 with the three standard exponents; sub-Ohmic member is the
    # low-coupling re-entrant case
    "fig5": dict(kind="sweep", s=0.5, eta=0.6, omega_c=2.0, tau=1.0, steps=1001,
                 sweep=SweepBlock("coupling", 0.0, 4.0, 81),
                 series=("s", (0.5, 1.0, 3.0))),
}


def fmt_float(x) -> str:
    """17-significant-digit text form, round-trip exact (negative zero folded)."""
    return format(float(x) + 0.0, ".17g")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float) and np.isnan(value):
        return ""
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    return str(value)


def write_csv(stream, header, rows, metadata):
    for key, value in metadata:
        stream.write(f"# {key}={_cell(value)}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])


def write_json(stream, header, rows, metadata):
    def jcell(value):
        if value is None:
            return "null"
        if isinstance(value, float) and np.isnan(value):
            return "null"
        if isinstance(value, (float, np.floating)):
            return fmt_float(value)
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        return json.dumps(value)

    meta = ", ".join(f"{json.dumps(k)}: {jcell(v)}" for k, v in metadata)
    stream.write("{\n")
    stream.write(f'"config": {{{meta}}},\n')
    stream.write('"rows": [\n')
    for i, row in enumerate(rows):
        body = ", ".join(f"{json.dumps(k)}: {jcell(v)}" for k, v in zip(header, row))
        comma = "," if i + 1 < len(rows) else ""
        stream.write(f"{{{body}}}{comma}\n")
    stream.write("]\n}\n")


def emit(config: RunConfig, header, rows, metadata):
    writer = write_csv if config.format == "csv" else write_json
    if config.output in (None, "-"):
        writer(sys.stdout, header, rows, metadata)
        return
    try:
        with open(config.output, "w", newline="") as fh:
            writer(fh, header, rows, metadata)
    except OSError as exc:
        raise _IOFailure(f"cannot write {config.output}: {exc}") from exc
    log.info("wrote %s", config.output)


class _IOFailure(OhmicJCError):
    pass


# ---------------------------------------------------------------- subcommands

DYNAMICS_HEADER = ("t", "p_re", "p_im", "pop", "trace_distance", "sigma",
                   "decoherence_rate", "frequency_shift", "beta1", "beta2")


def dynamics_rows(config: RunConfig):
    traj = amplitude(config.system(), config.reservoir(), config.grid())
    rates = rate_series(traj)
    sig = sigma_series(traj)
    rows = []
    for k, t in enumerate(traj.grid.samples):
        masked = bool(rates.mask[k])
        rows.append((t, traj.p[k].real, traj.p[k].imag, traj.pop[k],
                     traj.pop[k], sig[k],
                     None if masked else rates.gamma[k],
                     None if masked else rates.lamb[k],
                     traj.beta1[k], traj.beta2[k]))
    return rows


def cmd_dynamics(config: RunConfig) -> int:
    if config.sweep is not None:
        raise ConfigError("dynamics takes no sweep block; use the sweep subcommand")
    emit(config, DYNAMICS_HEADER, dynamics_rows(config), config.metadata())
    return EXIT_OK


def sweep_rows(config: RunConfig):
    block = config.sweep
    values = block.values()
    non_closed = sorted({float(v) for v in values
                         if block.param == "s" and float(v) not in CLOSED_FORM_EXPONENTS})
    if non_closed:
        log.info("rate path switches to quadrature for s in %s (no closed form)",
                 non_closed)

    def one(value):
        started = time.perf_counter()
        params = {"s": config.s, "eta": config.eta, "omega_c": config.omega_c,
                  "coupling": config.coupling}
        params[block.param] = float(value)
        report = evaluate_point(params["s"], params["eta"], params["omega_c"],
                                params["coupling"], config.grid(),
                                omega0=config.omega0)
        return report, time.perf_counter() - started

    with ThreadPoolExecutor() as pool:
        results = list(pool.map(one, values))
    # wall time stays out of the data files so identical configs stay
    # byte-identical; totals go to the log instead
    total = sum(dt for _, dt in results)
    log.info("sweep over %s: %d points, %.2fs total", block.param, len(values), total)
    rows = []
    for value, (report, _) in zip(values, results):
        rows.append((float(value), report.n_markov, report.qsl_ratio,
                     report.pop_tau, report.residual_n, report.residual_qsl))
    return rows


SWEEP_HEADER_TAIL = ("n_markov", "qsl_ratio", "pop_tau", "residual_n", "residual_qsl")


def cmd_sweep(config: RunConfig) -> int:
    if config.sweep is None:
        raise ConfigError("sweep requires a sweep block (--sweep-param/start/stop/steps)")
    header = (config.sweep.param,) + SWEEP_HEADER_TAIL
    emit(config, header, sweep_rows(config), config.metadata())
    return EXIT_OK


def cmd_critical(config: RunConfig, omega_min: float, omega_max: float,
                 eps_n: float, bracket: float) -> int:
    scan = critical_coupling(config.reservoir(), config.omega0, config.grid(),
                             omega_range=(omega_min, omega_max),
                             eps_n=eps_n, bracket=bracket)
    log.info("critical coupling %.6f (bracket %.2g, indicator %.2g)",
             scan.critical_coupling, scan.bracket, eps_n)
    header = ("critical_coupling", "bracket", "n_at_probe", "transitions")
    trans = ";".join(f"{fmt_float(a)}..{fmt_float(b)}:{d:+d}"
                     for a, b, d in scan.transitions)
    rows = [(scan.critical_coupling, scan.bracket, scan.n_at_probe, trans)]
    emit(config, header, rows, config.metadata())
    return EXIT_OK


def _validation_checks(config: RunConfig, quad_rel_tol: float):
    """Yield (name, passed, detail) for each bundled self-check.

    The closed-form/integral comparison is gated on the zero-frequency line,
    where the two are the same mathematics; away from it the closed forms are
    boundary-term approximations and the deviation is reported informationally
    (see README).  All other checks are exact identities of the implementation
    and must hold everywhere.
    """
    grid = config.grid()
    probe_times = (0.5, 1.0, 2.0, 5.0, 10.0, 25.0)
    # a deliberately unreachable rel_tol must actually fail, so the absolute
    # floor follows it down
    quad_abs_tol = min(1e-12, quad_rel_tol)

    worst = 0.0
    try:
        for s in CLOSED_FORM_EXPONENTS:
            r = ReservoirSpec(s=s, eta=config.eta or 0.1, omega_c=config.omega_c)
            for t in probe_times:
                closed = decay_rate_closed(0.0, t, r)
                quad = decay_rate_quadrature(0.0, t, r, rel_tol=quad_rel_tol,
                                             abs_tol=quad_abs_tol)
                worst = max(worst, abs(closed - quad) / (1.0 + abs(closed)))
        yield ("closed-vs-integral rate, zero-frequency line",
               worst < 1e-6, f"max normalized deviation {worst:.3e}")
    except QuadratureError as exc:
        yield ("closed-vs-integral rate, zero-frequency line", False,
               f"quadrature did not converge (achieved {exc.achieved:.3e})")

    try:
        r2 = ReservoirSpec(s=2.0, eta=0.1, omega_c=2.0)
        a = decay_rate_quadrature(1.0, 1.0, r2, rel_tol=quad_rel_tol,
                                  abs_tol=quad_abs_tol)
        b = decay_rate_quadrature(1.0, 1.0, r2, rel_tol=quad_rel_tol / 10.0,
                                  abs_tol=quad_abs_tol)
        yield ("integral rate self-consistency (s=2)",
               abs(a - b) < 1e-6, f"tolerance-tightening shift {abs(a - b):.3e}")
    except QuadratureError as exc:
        yield ("integral rate self-consistency (s=2)", False,
               f"quadrature did not converge (achieved {exc.achieved:.3e})")

    # informational only: the closed forms deviate off the zero-frequency line
    off_axis = 0.0
    try:
        r1 = ReservoirSpec(s=1.0, eta=config.eta or 0.1, omega_c=config.omega_c)
        for wj in (-1.0, 1.0, 3.0):
            for t in (1.0, 2.0):
                closed = decay_rate_closed(wj, t, r1)
                quad = decay_rate_quadrature(wj, t, r1, rel_tol=max(quad_rel_tol, 1e-10))
                off_axis = max(off_axis, abs(closed - quad) / (1.0 + abs(closed)))
        log.info("informational: closed-form rates deviate from the defining "
                 "integral off the zero-frequency line by up to %.3g "
                 "(boundary-term approximation; not gated)", off_axis)
    except QuadratureError:
        pass

    traj = amplitude(config.system(), config.reservoir(), grid)
    oracle = dressed_ode_oracle(config.system(), config.reservoir(), grid,
                                InitialAtomState.excited())
    dev = float(np.max(np.abs(oracle - traj.pop)))
    yield ("dressed-basis oracle population", dev < 1e-5, f"max deviation {dev:.3e}")

    res = gamma_sigma_consistency(traj)
    yield ("decoherence rate vs flow identity", res < 1e-8, f"max residual {res:.3e}")

    report = measure_report(traj)
    yield ("backflow route agreement", report.residual_n < 1e-8,
           f"residual {report.residual_n:.3e}")
    yield ("speed-limit route agreement", report.residual_qsl < 1e-10,
           f"residual {report.residual_qsl:.3e}")


def cmd_validate(config: RunConfig, quad_rel_tol: float) -> int:
    all_ok = True
    for name, ok, detail in _validation_checks(config, quad_rel_tol):
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all_ok else EXIT_VALIDATION


def cmd_figure(config: RunConfig, number: int, output_dir: str) -> int:
    from . import plots  # matplotlib pulled in only here
    import os

    name = f"fig{number}"
    preset = PRESETS[name]
    csv_path = os.path.join(output_dir, f"{name}.csv")
    png_path = os.path.join(output_dir, f"{name}.png")
    config = replace(config, output=csv_path, format="csv")

    if preset["kind"] == "dynamics":
        rows = dynamics_rows(config)
        emit(config, DYNAMICS_HEADER, rows, config.metadata())
        plots.render_dynamics(config, rows, png_path)
        log.info("wrote %s", png_path)
        return EXIT_OK

    series = preset.get("series")
    if series is None:
        rows = sweep_rows(config)
        emit(config, (config.sweep.param,) + SWEEP_HEADER_TAIL, rows,
             config.metadata())
        plots.render_sweep(config, {None: rows}, png_path, series_param=None)
        log.info("wrote %s", png_path)
        return EXIT_OK

    series_param, series_values = series
    combined = []
    per_series = {}
    for value in series_values:
        member = replace(config, **{series_param: value})
        rows = sweep_rows(member)
        per_series[value] = rows
        combined.extend((value,) + row for row in rows)
    header = (series_param, config.sweep.param) + SWEEP_HEADER_TAIL
    emit(config, header, combined, config.metadata())
    plots.render_sweep(config, per_series, png_path, series_param=series_param)
    log.info("wrote %s", png_path)
    return EXIT_OK


# ------------------------------------------------------------- config plumbing

class _Parser(argparse.ArgumentParser):
    # argparse normally exits(2) on usage errors; route them through the
    # config-error path so exit codes stay as documented
    def error(self, message):
        raise ConfigError(message)


def _apply_preset(config: RunConfig, name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    preset = PRESETS[name]
    fields = {k: v for k, v in preset.items() if k in
              ("s", "eta", "omega_c", "coupling", "tau", "steps", "sweep")}
    return replace(config, preset=name, **fields)


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise _IOFailure(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    allowed = {"s", "eta", "omega_c", "coupling", "omega0", "tau", "steps",
               "sweep", "output", "format", "preset"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    return data


def _coerce(name, value, kind):
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field {name}: expected {kind.__name__}, got {value!r}") from exc


def build_config(args) -> RunConfig:
    config = RunConfig()
    file_data = _load_config_file(args.config) if getattr(args, "config", None) else {}

    preset = getattr(args, "preset", None) or file_data.get("preset")
    if preset:
        config = _apply_preset(config, preset)

    for name, kind in (("s", float), ("eta", float), ("omega_c", float),
                       ("coupling", float), ("omega0", float), ("tau", float),
                       ("steps", int), ("output", str), ("format", str)):
        if name in file_data and file_data[name] is not None:
            config = replace(config, **{name: _coerce(name, file_data[name], kind)})
    if "sweep" in file_data and file_data["sweep"] is not None:
        sw = file_data["sweep"]
        if not isinstance(sw, dict):
            raise ConfigError("config field sweep must be an object")
        try:
            block = SweepBlock(param=str(sw["param"]),
                               start=_coerce("sweep.start", sw["start"], float),
                               stop=_coerce("sweep.stop", sw["stop"], float),
                               steps=_coerce("sweep.steps", sw["steps"], int))
        except KeyError as exc:
            raise ConfigError(f"sweep block missing field {exc}") from exc
        config = replace(config, sweep=block)

    for name, kind in (("s", float), ("eta", float), ("omega_c", float),
                       ("coupling", float), ("omega0", float), ("tau", float),
                       ("steps", int), ("output", str), ("format", str)):
        flag = getattr(args, name, None)
        if flag is not None:
            config = replace(config, **{name: kind(flag)})

    sweep_flags = {f: getattr(args, f"sweep_{f}", None)
                   for f in ("param", "start", "stop", "steps")}
    given = {k: v for k, v in sweep_flags.items() if v is not None}
    if given:
        if config.sweep is not None:
            base = {"param": config.sweep.param, "start": config.sweep.start,
                    "stop": config.sweep.stop, "steps": config.sweep.steps}
        elif len(given) == 4:
            base = {}
        else:
            raise ConfigError("no sweep block to override; give all of "
                              "--sweep-param/--sweep-start/--sweep-stop/--sweep-steps")
        base.update(given)
        config = replace(config, sweep=SweepBlock(str(base["param"]),
                                                  float(base["start"]),
                                                  float(base["stop"]),
                                                  int(base["steps"])))

    if config.format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {config.format!r}")
    return config


def _add_shared_flags(sub):
    sub.add_argument("--config", help="JSON config file; flags override its fields")
    sub.add_argument("--preset", help="figure preset (fig1..fig5)")
    sub.add_argument("--s", type=float, help="Ohmicity exponent")
    sub.add_argument("--eta", type=float, help="reservoir coupling")
    sub.add_argument("--omega-c", dest="omega_c", type=float, help="cutoff frequency")
    sub.add_argument("--coupling", type=float, help="atom-cavity coupling")
    sub.add_argument("--omega0", type=float, help="atomic frequency (the unit; default 1)")
    sub.add_argument("--tau", type=float, help="evolution horizon (default 1.0)")
    sub.add_argument("--steps", type=int, help="time samples (default 1001)")
    sub.add_argument("--output", help="output path, or - for stdout")
    sub.add_argument("--format", choices=FORMATS, help="output format (default csv)")


def _add_sweep_flags(sub):
    sub.add_argument("--sweep-param", choices=SWEEPABLE)
    sub.add_argument("--sweep-start", type=float)
    sub.add_argument("--sweep-stop", type=float)
    sub.add_argument("--sweep-steps", type=int)


def make_parser() -> _Parser:
    parser = _Parser(prog="ohmicjc",
                     description="Two-level atom in a lossy cavity with an "
                                 "Ohmic-class reservoir: dynamics, backflow "
                                 "measure, speed-limit ratio. Frequencies are "
                                 "in units of the atomic frequency, times in "
                                 "its inverse.")
    subs = parser.add_subparsers(dest="command", required=True)

    d = subs.add_parser("dynamics", help="time series for one parameter point")
    _add_shared_flags(d)

    s = subs.add_parser("sweep", help="measures along one swept parameter")
    _add_shared_flags(s)
    _add_sweep_flags(s)

    c = subs.add_parser("critical", help="bisect the Markovian transition coupling")
    _add_shared_flags(c)
    c.add_argument("--omega-min", type=float, default=0.0)
    c.add_argument("--omega-max", type=float, default=4.0)
    c.add_argument("--eps-n", type=float, default=1e-4,
                   help="backflow indicator threshold")
    c.add_argument("--bracket", type=float, default=1e-3,
                   help="final bisection bracket width")

    v = subs.add_parser("validate", help="run the bundled self-checks")
    _add_shared_flags(v)
    v.add_argument("--quad-rel-tol", type=float, default=1e-10,
                   help="relative tolerance for the quadrature checks")

    f = subs.add_parser("figure", help="write a preset's data file and plot")
    f.add_argument("number", type=int, choices=(1, 2, 3, 4, 5))
    f.add_argument("--output-dir", default=".")
    _add_shared_flags(f)
    _add_sweep_flags(f)
    return parser


def run(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "figure":
        implied = f"fig{args.number}"
        if getattr(args, "preset", None) not in (None, implied):
            raise ConfigError(f"figure {args.number} conflicts with --preset {args.preset}")
        args.preset = implied
    config = build_config(args)
    if args.command == "dynamics":
        return cmd_dynamics(config)
    if args.command == "sweep":
        return cmd_sweep(config)
    if args.command == "critical":
        return cmd_critical(config, args.omega_min, args.omega_max,
                            args.eps_n, args.bracket)
    if args.command == "validate":
        return cmd_validate(config, args.quad_rel_tol)
    if args.command == "figure":
        return cmd_figure(config, args.number, args.output_dir)
    raise ConfigError(f"unknown command {args.command!r}")


class _LiveStderrHandler(logging.Handler):
    # resolves sys.stderr at emit time, so redirected/captured streams
    # (pytest, shell pipelines set up after import) still receive logs
    def emit(self, record):
        try:
            print(self.format(record), file=sys.stderr)
        except Exception:
            self.handleError(record)


def main(argv=None) -> int:
    if not log.handlers:
        handler = _LiveStderrHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.INFO)
        log.propagate = False
    try:
        return run(argv)
    except ConfigError as exc:
        log.error("configuration: %s", exc)
        return EXIT_CONFIG
    except _IOFailure as exc:
        log.error("i/o: %s", exc)
        return EXIT_IO
    except NoTransitionError as exc:
        log.error("%s", exc)
        for coupling, value in (exc.scan or ()):
            log.info("scan %.4f -> %.3e", coupling, value)
        return EXIT_NOT_FOUND
    except (DomainError, OhmicJCError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("i/o: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
