"""Command-line driver: ``leedecay <command> --config FILE --out-dir DIR``.

Each command writes one CSV plus ``manifest.json``.  Numbers are printed in
scientific notation with 12 significant digits so that repeated runs are
byte-identical.  Exit codes: 0 success, 2 configuration error, 1 numerical
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .boost import DEVIATION_DEFINITION, deviation_scan
from .config import COMMANDS, RunConfig, load_config
from .errors import ChannelCountError, ConfigError, LeeDecayError
from .evolution import (
    amplitude_series,
    final_spectrum,
    flux_series,
    fwhm,
    survival_probability,
)
from .model import EnergyGrid
from .spectral import SpectralDensity, spectral_density, zeno_time
from .zeno import DetectorWindow, zeno_scan

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


def fmt(x) -> str:
    """12 significant digits, scientific; blank for NaN."""
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.11e}"


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    return "\n".join(lines) + "\n"


def _grid_span(cfg: RunConfig) -> tuple[float, float]:
    support = cfg.model.support()
    return support[0][0], support[-1][1]


def _density(cfg: RunConfig, n: int | None = None) -> SpectralDensity:
    grid = None
    if n is not None and cfg.model.coupled:
        grid = EnergyGrid(*_grid_span(cfg), n)
    return spectral_density(cfg.model, grid, cfg.spec, cfg.norm_tol)


def _times(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.get("grids.t_max"), cfg.get("grids.n_t"))


def cmd_spectral(cfg: RunConfig):
    sd = _density(cfg, cfg.get("grids.omega_n"))
    rows = [(fmt(m), fmt(d)) for m, d in zip(sd.m, sd.values)]
    extra = {"peak": sd.peak}
    return sd, {"spectral.csv": _csv(["m", "d_s"], rows)}, extra


def cmd_survival(cfg: RunConfig):
    sd = _density(cfg)
    series = amplitude_series(sd, _times(cfg))
    gamma = cfg.model.total_width
    rows = [
        (fmt(t), fmt(a.real), fmt(a.imag), fmt(p), fmt(math.exp(-gamma * t)))
        for t, a, p in zip(series.times, series.amps, series.probs)
    ]
    return sd, {"survival.csv": _csv(["t", "re_a", "im_a", "p", "p_exp"], rows)}, {}


def cmd_channels(cfg: RunConfig):
    if len(cfg.model.channels) != 2:
        raise ChannelCountError(
            f"model.channels: 'channels' needs exactly 2 channels, got {len(cfg.model.channels)}"
        )
    sd = _density(cfg)
    fs = flux_series(sd, _times(cfg))
    r_exp = fs.ratio_exp if fs.ratio_exp is not None else math.nan
    rows = [
        (fmt(t), fmt(h1), fmt(h2), fmt(r), fmt(r_exp))
        for t, h1, h2, r in zip(fs.times, fs.h[0], fs.h[1], fs.ratio)
    ]
    extra = {"flagged_times": [float(t) for t in fs.times[fs.flagged]]}
    return sd, {"channels.csv": _csv(["t", "h1", "h2", "r", "r_exp"], rows)}, extra


def _time_label(t: float) -> str:
    return format(t, "g")


def cmd_spectrum(cfg: RunConfig):
    sd = _density(cfg)
    omega = EnergyGrid(*_grid_span(cfg), cfg.get("grids.omega_n")).points(
        avoid=cfg.model.edges()
    )
    t_list = cfg.get("spectrum.t_list")
    etas, norms, fwhms, residuals = [], [], {}, {}
    for t in t_list:
        eta, norm = final_spectrum(sd, t, omega)
        etas.append(eta)
        norms.append(norm)
        label = _time_label(t)
        if np.all(np.isfinite(norm)):
            fwhms[label] = fwhm(omega, norm)
        residuals[label] = float(np.trapezoid(eta, omega) - (1 - survival_probability(sd, t)))
    header = ["omega"]
    header += [f"eta_t{_time_label(t)}" for t in t_list]
    header += [f"eta_norm_t{_time_label(t)}" for t in t_list]
    rows = [
        [fmt(w)] + [fmt(e[j]) for e in etas] + [fmt(n[j]) for n in norms]
        for j, w in enumerate(omega)
    ]
    extra = {"fwhm": fwhms, "trapezoid_unitarity_residual": residuals}
    return sd, {"spectrum.csv": _csv(header, rows)}, extra


def cmd_zeno(cfg: RunConfig):
    sd = _density(cfg)
    window = DetectorWindow(cfg.get("zeno.lambda"), cfg.get("zeno.center"))
    scan = zeno_scan(sd, window, cfg.get("zeno.t_total"), cfg.get("zeno.tau_list"))
    rows = [
        (fmt(r.tau), str(r.n), fmt(r.p_tau), fmt(r.w_lambda), fmt(r.p_noclick))
        for r in scan.rows
    ]
    extra = {
        "detector_window": list(window.bounds(cfg.model.m0)),
        "rounding_mismatch": [r.rounding for r in scan.rows],
        "noclick_steps_as_tau_decreases": scan.steps,
        "monotone": scan.monotone,
    }
    header = ["tau", "n", "p_tau", "w_lambda", "p_noclick"]
    return sd, {"zeno.csv": _csv(header, rows)}, extra


def cmd_boost(cfg: RunConfig):
    sd = _density(cfg)
    q_list = cfg.get("boost.q_list")
    if q_list is None:
        q_list = np.linspace(0.0, cfg.get("grids.q_max"), cfg.get("grids.q_n"))
    scan = deviation_scan(cfg.model.m0, cfg.model.total_width, q_list)
    rows = [
        (fmt(r.q), fmt(r.gamma_q), fmt(r.gamma_einstein), fmt(r.deviation))
        for r in scan.rows
    ]
    extra = {
        "q_argmax": scan.q_argmax,
        "max_abs_deviation": scan.max_abs_deviation,
        "deviation_definition": DEVIATION_DEFINITION,
    }
    header = ["q", "gamma_q", "gamma_einstein", "deviation"]
    return sd, {"boost.csv": _csv(header, rows)}, extra


HANDLERS = {
    "spectral": cmd_spectral,
    "survival": cmd_survival,
    "channels": cmd_channels,
    "spectrum": cmd_spectrum,
    "zeno": cmd_zeno,
    "boost": cmd_boost,
}


def _derived(cfg: RunConfig) -> dict:
    chans = cfg.model.channels
    out = {"gamma_per_channel": [ch.g2 for ch in chans], "gamma_total": cfg.model.total_width}
    out["tau_zeno"] = zeno_time(cfg.model) if cfg.model.coupled else None
    if len(chans) == 2 and chans[1].g2 > 0:
        out["gamma_ratio"] = chans[0].g2 / chans[1].g2
    return out


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(command: str, config_path: str | Path, out_dir: str | Path) -> dict:
    """Run one command and write its outputs; returns the manifest."""
    cfg = load_config(config_path, command)
    sd, outputs, extra = HANDLERS[command](cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        _write_atomic(out / name, text)
    manifest = {
        "tool": "leedecay",
        "version": __version__,
        "command": command,
        "config": cfg.raw,
        "poles": [{"position": p.position, "weight": p.weight} for p in sd.poles],
        "normalization_residual": sd.norm_residual,
        "derived": _derived(cfg),
        "outputs": {
            name: {
                "sha256": hashlib.sha256(text.encode()).hexdigest(),
                "rows": text.count("\n") - 1,
            }
            for name, text in outputs.items()
        },
        **extra,
    }
    _write_atomic(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leedecay",
        description="Time evolution of an unstable state in the box Lee model.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--out-dir", required=True, help="directory for CSV and manifest")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = run(args.command, args.config, args.out_dir)
    except (ConfigError, ChannelCountError) as exc:
        print(f"leedecay: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LeeDecayError as exc:
        print(f"leedecay: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for name in manifest["outputs"]:
        print(Path(args.out_dir) / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
