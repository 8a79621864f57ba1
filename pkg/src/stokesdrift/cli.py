"""Command-line front end: sweeps, variance curves, peak reports, sorting demo.

Every command resolves its settings from built-in defaults, then the
matching section of an INI-style config file (``--config``), then
command-line flags of the same names.  CSV outputs begin with a comment
block embedding the fully resolved configuration, carry 17 significant
digits, and are byte-identical across re-runs with the same settings.

Exit codes: 0 success, 2 usage/config error, 3 numerical-accuracy failure,
4 Monte Carlo divergence, 5 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys

import numpy as np

from .asymptotics import (
    QuadratureAccuracyError,
    drift_classical,
    drift_eddy,
    drift_inertia,
    find_drift_peak,
    variance_rate_eddy,
)
from .mc import SimConfig, DivergenceError, estimate_drift, estimate_variance_rate
from .model import InvalidParameterError, ReducedParams, WaveSpec
from .sorting import (
    SpeciesSpec,
    UndefinedDirectionError,
    WaveField2D,
    direction_angle_stderr,
    fanout_angle,
    predicted_drift_vector,
    simulate_sorting,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ACCURACY = 3
EXIT_DIVERGENCE = 4
EXIT_IO = 5

WORKERS_ENV = "STOKESDRIFT_WORKERS"


class ConfigError(Exception):
    """Bad or missing configuration value."""


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected true/false, got {text!r}")


def _parse_str(text: str) -> str:
    return text.strip()


def _parse_model(text: str) -> str:
    model = text.strip()
    if model not in ("inertia", "eddy"):
        raise ConfigError(f"model must be 'inertia' or 'eddy', got {text!r}")
    return model


def _parse_phase(text: str):
    if text.strip().lower() == "uniform":
        return None
    return _parse_float(text)


def _parse_sweep(text: str) -> list[float]:
    """Either a comma list '0.5,1,2' or a log range 'log:lo:hi:n'."""
    text = text.strip()
    if not text:
        raise ConfigError("empty lambda sweep")
    if text.lower().startswith("log:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"log sweep must be log:lo:hi:n, got {text!r}")
        lo, hi = _parse_float(parts[1]), _parse_float(parts[2])
        n = _parse_int(parts[3])
        if not (0.0 < lo < hi and n >= 2):
            raise ConfigError(f"log sweep needs 0 < lo < hi and n >= 2, got {text!r}")
        return [float(v) for v in np.geomspace(lo, hi, n)]
    values = [_parse_float(part) for part in text.split(",") if part.strip()]
    if not values:
        raise ConfigError("empty lambda sweep")
    if any(v <= 0.0 for v in values):
        raise ConfigError("sweep values must be strictly positive")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("sweep values must be sorted strictly ascending")
    return values


def _parse_species(text: str) -> list[tuple[str, str, float]]:
    """Comma list of label:model:lambda entries."""
    entries = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        fields = part.split(":")
        if len(fields) != 3:
            raise ConfigError(f"species entry must be label:model:lambda, got {part!r}")
        entries.append((fields[0], _parse_model(fields[1]), _parse_float(fields[2])))
    if not entries:
        raise ConfigError("empty species list")
    return entries


def _parse_waves(text: str) -> list[tuple[float, float, float, float]]:
    """Semicolon list of angle_deg:u:k:omega wave entries."""
    entries = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        fields = part.split(":")
        if len(fields) != 4:
            raise ConfigError(f"wave entry must be angle_deg:u:k:omega, got {part!r}")
        entries.append(tuple(_parse_float(f) for f in fields))
    if not entries:
        raise ConfigError("empty wave list")
    return entries


def _default_workers() -> int:
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


# Per-command setting tables: key -> (parser, default).  Keys double as the
# config-file keys and (dash-prefixed) command-line flag names.
_SIM_KEYS = {
    "mc": (_parse_bool, False),
    "n-traj": (_parse_int, 256),
    "t-total": (_parse_float, 1000.0),
    "dt": (_parse_float, 1e-3),
    "seed": (_parse_int, 1),
    "scheme": (_parse_str, "euler"),
    "workers": (_parse_int, None),  # None -> STOKESDRIFT_WORKERS or 1
}
_WAVE_KEYS = {
    "epsilon": (_parse_float, 0.2),
    "sigma": (_parse_float, 1.0),
    "u": (_parse_float, 1.0),
    "k": (_parse_float, 1.0),
    "omega": (_parse_float, 1.0),
    "phase": (_parse_phase, None),
}
_OUTPUT_KEYS = {
    "output": (_parse_str, None),
    "columns": (_parse_str, None),
    "plot": (_parse_bool, False),
}

COMMAND_KEYS = {
    "sweep": {
        "model": (_parse_model, "eddy"),
        "lambda": (_parse_sweep, None),
        **_WAVE_KEYS,
        **_SIM_KEYS,
        **_OUTPUT_KEYS,
    },
    "variance": {
        "lambda": (_parse_sweep, None),
        **_WAVE_KEYS,
        **_SIM_KEYS,
        **_OUTPUT_KEYS,
    },
    "peak": {
        "model": (_parse_model, "eddy"),
        "lambda-min": (_parse_float, 0.05),
        "lambda-max": (_parse_float, 50.0),
        **_WAVE_KEYS,
        "output": (_parse_str, None),
    },
    "sort-demo": {
        "species": (_parse_species, [("slow", "inertia", 0.5), ("fast", "inertia", 5.0)]),
        "waves": (_parse_waves, [(45.0, 3.0, 1.0, 0.5), (-45.0, 3.0, 1.0, 2.0)]),
        "epsilon": (_parse_float, 0.1),
        "sigma": (_parse_float, 1.0),
        **_SIM_KEYS,
        **_OUTPUT_KEYS,
    },
}
# the sorting demo is Monte Carlo by definition
COMMAND_KEYS["sort-demo"]["mc"] = (_parse_bool, True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stokesdrift",
        description="Drift and dispersion of wave-driven noisy particles.",
    )
    parser.add_argument("--config", help="INI config file with one section per command")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "sweep": "drift against lambda (quadrature, optional Monte Carlo) -> CSV",
        "variance": "eddy variance rate against lambda -> CSV",
        "peak": "locate the drift maximum over a lambda range -> report",
        "sort-demo": "two-dimensional multi-wave sorting demo -> CSV",
    }
    for command, keys in COMMAND_KEYS.items():
        cmd_parser = sub.add_parser(command, help=helps[command])
        for key in keys:
            cmd_parser.add_argument(f"--{key}", dest=key.replace("-", "_"),
                                    default=None, metavar="VALUE")
    return parser


def resolve_settings(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the config-file section, then command-line flags."""
    table = COMMAND_KEYS[command]
    settings = {key: default for key, (_, default) in table.items()}
    if args.config is not None:
        parser = configparser.ConfigParser()
        read = parser.read(args.config)
        if not read:
            raise ConfigError(f"cannot read config file {args.config!r}")
        if parser.has_section(command):
            for key, raw in parser.items(command):
                if key not in table:
                    raise ConfigError(f"unknown key {key!r} in section [{command}]")
                settings[key] = table[key][0](raw)
    for key, (parse, _) in table.items():
        raw = getattr(args, key.replace("-", "_"))
        if raw is not None:
            settings[key] = parse(raw)
    if "workers" in settings and settings["workers"] is None:
        settings["workers"] = _default_workers()
    return settings


def _fmt(value) -> str:
    """17-significant-digit decimal for floats; plain text otherwise."""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _setting_repr(key: str, value) -> str:
    # floats use repr (shortest exact round-trip) so the header is a
    # faithful audit of the resolved configuration
    if value is None:
        return "uniform" if key == "phase" else ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        if value and isinstance(value[0], tuple):
            sep = ";" if len(value[0]) == 4 else ","
            return sep.join(":".join(repr(f) if isinstance(f, float) else str(f) for f in item)
                            for item in value)
        return ",".join(repr(v) for v in value)
    return str(value)


def _header_lines(command: str, settings: dict) -> list[str]:
    # workers is pure orchestration: results are independent of it, so it
    # stays out of the audit header to keep outputs bit-identical
    lines = [f"# stokesdrift {command}"]
    for key in sorted(settings):
        if key == "workers":
            continue
        lines.append(f"# {key} = {_setting_repr(key, settings[key])}")
    return lines


def _write_csv(path: str, header_lines: list[str], columns: list[str],
               rows: list[dict], selected: str | None, footer: list[str] | None = None):
    if selected is not None:
        wanted = [c.strip() for c in selected.split(",") if c.strip()]
        unknown = [c for c in wanted if c not in columns]
        if unknown:
            raise ConfigError(f"unknown columns {unknown}; available: {columns}")
        columns = wanted
    with open(path, "w", newline="") as handle:
        for line in header_lines:
            handle.write(line + "\n")
        handle.write(",".join(columns) + "\n")
        for row in rows:
            cells = ["" if row.get(c) is None else _fmt(row[c]) for c in columns]
            handle.write(",".join(cells) + "\n")
        for line in footer or []:
            handle.write(line + "\n")


def _plot_path(output: str) -> str:
    base, _ = os.path.splitext(output)
    return base + ".png"


def _wave_from_settings(settings: dict) -> WaveSpec:
    return WaveSpec(u=settings["u"], k=settings["k"], omega=settings["omega"],
                    phase=settings["phase"])


def cmd_sweep(settings: dict) -> int:
    if settings["lambda"] is None:
        raise ConfigError("sweep requires a lambda list (--lambda)")
    if settings["output"] is None:
        raise ConfigError("sweep requires an output path (--output)")
    wave = _wave_from_settings(settings)
    model = settings["model"]
    drift_fn = drift_inertia if model == "inertia" else drift_eddy
    status_exit = EXIT_OK
    rows = []
    for lam in settings["lambda"]:
        params = ReducedParams(lam=lam, sigma=settings["sigma"], epsilon=settings["epsilon"])
        row = {"lambda": lam, "v_asymptotic": None, "quad_error": None,
               "v_mc": None, "mc_stderr": None, "n_traj": None, "t_total": None,
               "dt": None, "seed": None, "status": "ok"}
        try:
            drift = drift_fn(params, wave)
            row["v_asymptotic"] = drift.value
            row["quad_error"] = drift.error
        except QuadratureAccuracyError as exc:
            row["status"] = f"quad-failure: {exc}"
            status_exit = max(status_exit, EXIT_ACCURACY)
        if settings["mc"]:
            config = SimConfig(dt=settings["dt"], t_total=settings["t-total"],
                               n_traj=settings["n-traj"], master_seed=settings["seed"],
                               model=model, scheme=settings["scheme"])
            try:
                estimate = estimate_drift(config, params, wave, workers=settings["workers"])
                row.update(v_mc=estimate.mean, mc_stderr=estimate.stderr,
                           n_traj=estimate.n_traj, t_total=settings["t-total"],
                           dt=settings["dt"], seed=settings["seed"])
            except DivergenceError as exc:
                row["status"] = f"mc-divergence: {exc}"
                status_exit = max(status_exit, EXIT_DIVERGENCE)
        rows.append(row)
    columns = ["lambda", "v_asymptotic", "quad_error", "v_mc", "mc_stderr",
               "n_traj", "t_total", "dt", "seed", "status"]
    _write_csv(settings["output"], _header_lines("sweep", settings), columns,
               rows, settings["columns"])
    if settings["plot"]:
        from . import plotting

        plotting.save_sweep_figure(_plot_path(settings["output"]), rows,
                                   model, settings["epsilon"])
    return status_exit


def cmd_variance(settings: dict) -> int:
    if settings["lambda"] is None:
        raise ConfigError("variance requires a lambda list (--lambda)")
    if settings["output"] is None:
        raise ConfigError("variance requires an output path (--output)")
    wave = _wave_from_settings(settings)
    status_exit = EXIT_OK
    rows = []
    for lam in settings["lambda"]:
        params = ReducedParams(lam=lam, sigma=settings["sigma"], epsilon=settings["epsilon"])
        row = {"lambda": lam, "variance_rate_asymptotic": None,
               "variance_rate_mc": None, "mc_stderr": None, "n_traj": None,
               "t_total": None, "dt": None, "seed": None, "status": "ok"}
        try:
            row["variance_rate_asymptotic"] = variance_rate_eddy(params, wave)
        except QuadratureAccuracyError as exc:
            row["status"] = f"quad-failure: {exc}"
            status_exit = max(status_exit, EXIT_ACCURACY)
        if settings["mc"]:
            config = SimConfig(dt=settings["dt"], t_total=settings["t-total"],
                               n_traj=settings["n-traj"], master_seed=settings["seed"],
                               model="eddy", scheme=settings["scheme"])
            try:
                rate, stderr = estimate_variance_rate(config, params, wave,
                                                      workers=settings["workers"])
                row.update(variance_rate_mc=rate, mc_stderr=stderr,
                           n_traj=settings["n-traj"], t_total=settings["t-total"],
                           dt=settings["dt"], seed=settings["seed"])
            except DivergenceError as exc:
                row["status"] = f"mc-divergence: {exc}"
                status_exit = max(status_exit, EXIT_DIVERGENCE)
        rows.append(row)
    columns = ["lambda", "variance_rate_asymptotic", "variance_rate_mc",
               "mc_stderr", "n_traj", "t_total", "dt", "seed", "status"]
    _write_csv(settings["output"], _header_lines("variance", settings), columns,
               rows, settings["columns"])
    if settings["plot"]:
        from . import plotting

        plotting.save_variance_figure(_plot_path(settings["output"]), rows,
                                      settings["epsilon"])
    return status_exit


def cmd_peak(settings: dict) -> int:
    lo, hi = settings["lambda-min"], settings["lambda-max"]
    if not (0.0 < lo <= hi):
        raise ConfigError(f"need 0 < lambda-min <= lambda-max, got ({lo}, {hi})")
    wave = _wave_from_settings(settings)
    params = ReducedParams(lam=1.0, sigma=settings["sigma"], epsilon=settings["epsilon"])
    result = find_drift_peak(settings["model"], params, wave, (lo, hi))
    classical = drift_classical(params, wave).value
    lines = [f"model = {settings['model']}",
             f"lambda range = [{lo:g}, {hi:g}]",
             f"classical-limit drift = {_fmt(classical)}"]
    if result.interior:
        lines.append(f"interior peak: lambda_star = {_fmt(result.lambda_star)}, "
                     f"drift = {_fmt(result.drift)}")
    else:
        lines.append(f"no interior peak: maximum at range endpoint "
                     f"lambda = {_fmt(result.lambda_star)}, drift = {_fmt(result.drift)}")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if settings["output"] is not None:
        with open(settings["output"], "w") as handle:
            handle.write(report)
    return EXIT_OK


def cmd_sort_demo(settings: dict) -> int:
    if settings["output"] is None:
        raise ConfigError("sort-demo requires an output path (--output)")
    directions = []
    specs = []
    for angle_deg, u, k, omega in settings["waves"]:
        theta = math.radians(angle_deg)
        directions.append((math.cos(theta), math.sin(theta)))
        specs.append(WaveSpec(u=u, k=k, omega=omega))
    field = WaveField2D(list(zip(directions, specs)))
    species = [SpeciesSpec(label, ReducedParams(lam=lam, sigma=settings["sigma"],
                                                epsilon=settings["epsilon"]), model)
               for label, model, lam in settings["species"]]

    rows = []
    predicted = {}
    for sp in species:
        vector = predicted_drift_vector(sp, field)
        predicted[sp.label] = vector
        rows.append({"species": sp.label, "predicted_vx": float(vector[0]),
                     "predicted_vy": float(vector[1]), "mc_vx": None, "mc_vy": None,
                     "stderr_vx": None, "stderr_vy": None, "status": "ok"})

    status_exit = EXIT_OK
    mc_results = None
    if settings["mc"]:
        config = SimConfig(dt=settings["dt"], t_total=settings["t-total"],
                           n_traj=settings["n-traj"], master_seed=settings["seed"],
                           model=species[0].model, scheme=settings["scheme"])
        try:
            mc_results = simulate_sorting(species, field, config,
                                          workers=settings["workers"])
            for row, result in zip(rows, mc_results):
                row.update(mc_vx=float(result.velocity[0]), mc_vy=float(result.velocity[1]),
                           stderr_vx=float(result.stderr[0]), stderr_vy=float(result.stderr[1]))
        except DivergenceError as exc:
            for row in rows:
                row["status"] = f"mc-divergence: {exc}"
            status_exit = EXIT_DIVERGENCE

    footer = []
    if len(species) >= 2:
        footer.append("# fanout angles (radians)")
        for i in range(len(species)):
            for j in range(i + 1, len(species)):
                a, b = species[i].label, species[j].label
                try:
                    angle = _fmt(fanout_angle(predicted[a], predicted[b]))
                except UndefinedDirectionError:
                    angle = "undefined (zero drift vector)"
                footer.append(f"# predicted[{a},{b}] = {angle}")
                if mc_results is not None:
                    ri, rj = mc_results[i], mc_results[j]
                    try:
                        mc_angle = fanout_angle(ri.velocity, rj.velocity)
                        combined = math.hypot(
                            direction_angle_stderr(ri.velocity, ri.stderr),
                            direction_angle_stderr(rj.velocity, rj.stderr))
                        footer.append(f"# mc[{a},{b}] = {_fmt(mc_angle)} "
                                      f"(angular stderr {_fmt(combined)})")
                    except UndefinedDirectionError:
                        footer.append(f"# mc[{a},{b}] = undefined (zero drift vector)")
    columns = ["species", "predicted_vx", "predicted_vy", "mc_vx", "mc_vy",
               "stderr_vx", "stderr_vy", "status"]
    _write_csv(settings["output"], _header_lines("sort-demo", settings), columns,
               rows, settings["columns"], footer)
    if settings["plot"]:
        from . import plotting

        entries = []
        for i, sp in enumerate(species):
            entry = {"label": sp.label, "predicted": predicted[sp.label]}
            if mc_results is not None:
                entry["mc"] = mc_results[i].velocity
                entry["stderr"] = mc_results[i].stderr
            entries.append(entry)
        plotting.save_sort_figure(_plot_path(settings["output"]), entries)
    return status_exit


COMMANDS = {
    "sweep": cmd_sweep,
    "variance": cmd_variance,
    "peak": cmd_peak,
    "sort-demo": cmd_sort_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args.command, args)
        return COMMANDS[args.command](settings)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureAccuracyError as exc:
        print(f"numerical accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except DivergenceError as exc:
        print(f"simulation divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
