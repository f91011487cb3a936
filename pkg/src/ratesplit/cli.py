"""Command-line experiment dispatch.

Configuration is a flat key = value text file with [system] and
[experiment] sections; any key can be overridden on the command line with
repeated --set section.key=value flags. Every run writes a manifest (the
fully resolved configuration plus seed, package version, and kernel
backend) next to its outputs so results are reproducible byte for byte.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import configparser
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backend import KERNEL_BACKEND
from .baselines import InitScheme, init_precoder
from .channel import ScenarioPool
from .config import InvalidConfigError, SystemConfig
from .harness import (
    SCHEMES,
    HarnessSettings,
    dof_slope,
    esr_sweep,
    m_sensitivity,
    paper_weight_pairs,
    rate_region,
    write_esr_csv,
    write_region_csv,
    write_slopes_csv,
)
from .optimizer import ao_solve, conservative_solve
from .ratewmmse import PrecoderMode
from .selftest import run_selftest


class ConfigError(ValueError):
    pass


def _parse_float_list(s):
    return [float(v) for v in str(s).split(",") if v.strip()]


def _parse_int_list(s):
    return [int(v) for v in str(s).split(",") if v.strip()]


def _parse_str_list(s):
    return [v.strip() for v in str(s).split(",") if v.strip()]


# (section, key) -> (parser, default)
_SCHEMA = {
    ("system", "K"): (int, 2),
    ("system", "Nt"): (int, 2),
    ("system", "alpha"): (float, 0.6),
    ("system", "beta"): (float, 1.0),
    ("system", "sigma_n2"): (float, 1.0),
    ("system", "M"): (int, 100),
    ("system", "eps_R"): (float, 1e-4),
    ("system", "max_iters"): (int, 2000),
    ("system", "seed"): (int, 2024),
    ("experiment", "snr_db"): (float, 30.0),
    ("experiment", "snr_grid_db"): (_parse_float_list, [20.0, 25.0, 30.0, 35.0, 40.0]),
    ("experiment", "schemes"): (_parse_str_list, ["RS-Opt", "NoRS-Opt", "NoRS-ZF", "RS-ZF-SVD"]),
    ("experiment", "n_channels"): (int, 20),
    ("experiment", "m_val"): (int, 10000),
    ("experiment", "m_list"): (_parse_int_list, [1, 10, 100, 1000]),
    ("experiment", "init"): (str, "MRC-SVD"),
    ("experiment", "jobs"): (int, 1),
    ("experiment", "dof_window_db"): (_parse_float_list, [25.0, 40.0]),
    ("experiment", "region_pairs"): (str, "paper"),
}


def load_config(path, overrides):
    """Resolve defaults, an optional INI file, and --set overrides."""
    resolved = {sec_key: default for sec_key, (_, default) in _SCHEMA.items()}
    if path is not None:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            for key, raw in parser[section].items():
                _apply(resolved, section, key, raw)
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"malformed --set {ov!r}; expected section.key=value")
        target, raw = ov.split("=", 1)
        if "." not in target:
            raise ConfigError(f"malformed --set key {target!r}; expected section.key")
        section, key = target.split(".", 1)
        _apply(resolved, section.strip(), key.strip(), raw.strip())
    return resolved


def _apply(resolved, section, key, raw):
    sec_key = (section, key)
    if sec_key not in _SCHEMA:
        raise ConfigError(f"unknown configuration key [{section}] {key}")
    parse, _ = _SCHEMA[sec_key]
    try:
        resolved[sec_key] = parse(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r} ({exc})") from exc


def _system_config(resolved, snr_db=None) -> SystemConfig:
    g = lambda k: resolved[("system", k)]  # noqa: E731
    snr = resolved[("experiment", "snr_db")] if snr_db is None else snr_db
    return SystemConfig(
        K=g("K"), Nt=g("Nt"),
        Pt=g("sigma_n2") * 10.0 ** (snr / 10.0),
        sigma_n2=g("sigma_n2"), alpha=g("alpha"), beta=g("beta"),
        M=g("M"), eps_R=g("eps_R"), max_iters=g("max_iters"), seed=g("seed"),
    )


def _settings(resolved, jobs=None) -> HarnessSettings:
    e = lambda k: resolved[("experiment", k)]  # noqa: E731
    return HarnessSettings(
        n_channels=e("n_channels"), m_val=e("m_val"),
        init_scheme=InitScheme(e("init")),
        jobs=jobs if jobs is not None else e("jobs"),
    )


def _write_manifest(out: Path, command: str, resolved) -> None:
    cfg_tree = {}
    for (section, key), value in sorted(resolved.items()):
        cfg_tree.setdefault(section, {})[key] = value
    manifest = {
        "command": command,
        "config": cfg_tree,
        "seed": resolved[("system", "seed")],
        "version": __version__,
        "kernel_backend": KERNEL_BACKEND,
    }
    out.joinpath("manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _report_failures(points) -> int:
    n_failed = sum(getattr(p, "n_failed", 0) for p in points)
    if n_failed:
        print(f"warning: {n_failed} solver run(s) hit the iteration cap", file=sys.stderr)
    return n_failed


def cmd_solve_one(resolved, out: Path) -> int:
    cfg = _system_config(resolved)
    settings = _settings(resolved)
    pool = ScenarioPool(cfg.seed, cfg.Nt, cfg.K, 1, cfg.M)
    est = pool.estimate(0, cfg)
    sample = pool.conditional_sample(0, cfg)
    summary = []
    for scheme in resolved[("experiment", "schemes")]:
        if scheme == "RS-Opt":
            res = ao_solve(est, cfg, init_precoder(est, cfg, settings.init_scheme,
                                                    PrecoderMode.RS),
                           PrecoderMode.RS, sample=sample)
        elif scheme == "NoRS-Opt":
            res = ao_solve(est, cfg, init_precoder(est, cfg, settings.init_scheme,
                                                    PrecoderMode.NoRS),
                           PrecoderMode.NoRS, sample=sample)
        elif scheme == "Conservative-RS":
            res = conservative_solve(est, cfg, init_precoder(est, cfg, settings.init_scheme,
                                                             PrecoderMode.RS))
        else:
            continue
        tag = scheme.lower().replace("-", "_")
        res.trace.to_csv(out / f"trace_{tag}.csv")
        summary.append((scheme, res.asr, res.trace.n_iterations))
        print(f"{scheme}: asr={res.asr:.6f} iterations={res.trace.n_iterations}")
    if not summary:
        raise ConfigError("no AO scheme among experiment.schemes for solve-one")
    return 0


def cmd_esr_sweep(resolved, out: Path) -> int:
    cfg = _system_config(resolved)
    points = esr_sweep(cfg, resolved[("experiment", "snr_grid_db")],
                       resolved[("experiment", "schemes")], _settings(resolved))
    write_esr_csv(points, out / "esr.csv")
    _report_failures(points)
    return 0


def cmd_dof(resolved, out: Path) -> int:
    cfg = _system_config(resolved)
    schemes = resolved[("experiment", "schemes")]
    points = esr_sweep(cfg, resolved[("experiment", "snr_grid_db")], schemes,
                       _settings(resolved))
    write_esr_csv(points, out / "esr.csv")
    window = resolved[("experiment", "dof_window_db")]
    rows = []
    for scheme in schemes:
        sel = [p for p in points if p.scheme == scheme]
        rows.append((scheme, resolved[("system", "alpha")], resolved[("system", "K")],
                     dof_slope(sel, window)))
        print(f"{scheme}: slope={rows[-1][3]:.4f} over {window} dB")
    write_slopes_csv(rows, out / "slopes.csv")
    _report_failures(points)
    return 0


def cmd_m_sweep(resolved, out: Path) -> int:
    cfg = _system_config(resolved)
    points = m_sensitivity(cfg, resolved[("experiment", "m_list")],
                           resolved[("experiment", "snr_db")], _settings(resolved))
    write_esr_csv(points, out / "msweep.csv")
    for p in points:
        print(f"{p.scheme}: validated esr={p.esr:.4f} +- {p.stderr:.4f}")
    return 0


def cmd_region(resolved, out: Path) -> int:
    cfg = _system_config(resolved)
    spec = resolved[("experiment", "region_pairs")]
    if spec == "paper":
        pairs = paper_weight_pairs()
    elif spec == "quick":
        pairs = [(1.0, w) for w in (1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3)]
    else:
        raise ConfigError(f"region_pairs must be 'paper' or 'quick', got {spec!r}")
    points = rate_region(cfg, pairs, _settings(resolved))
    write_region_csv(points, out / "region.csv")
    return 0


def cmd_selftest(resolved, out: Path) -> int:
    failures = run_selftest()
    return 0 if failures == 0 else 2


_COMMANDS = {
    "solve-one": cmd_solve_one,
    "esr-sweep": cmd_esr_sweep,
    "dof": cmd_dof,
    "m-sweep": cmd_m_sweep,
    "region": cmd_region,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ratesplit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="INI configuration file")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="section.key=value", help="override one config key")
        p.add_argument("--jobs", type=int, default=None, help="worker processes")
    args = parser.parse_args(argv)

    try:
        resolved = load_config(args.config, args.overrides)
        if args.jobs is not None:
            resolved[("experiment", "jobs")] = args.jobs
        _system_config(resolved)  # surface invalid scenario parameters early
    except (ConfigError, InvalidConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    try:
        code = _COMMANDS[args.command](resolved, out)
    except (ConfigError, InvalidConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, AssertionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        _write_manifest(out, args.command, resolved)
        return 2
    _write_manifest(out, args.command, resolved)
    return code


if __name__ == "__main__":
    sys.exit(main())
