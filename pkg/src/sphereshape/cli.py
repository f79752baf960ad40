"""Command-line front end.

Every analysis in the package is reachable as a subcommand producing CSV
or JSON artifacts; numeric CSV fields are fixed at 6 significant digits,
JSON carries full doubles. Each run that writes an artifact also writes a
sidecar ``<artifact>.manifest.json`` recording the command, a digest of
the effective configuration, the seed and the toolkit version, so reruns
can be compared byte for byte.

Exit codes: 0 success, 2 configuration/input error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .air import NumericalError
from .constellation import InvalidParameterError, build_alphabet
from .distributions import (InfeasibleError, ccdm_analytics, fit_entropy,
                            partial_mb_pmf, pmf_stats, shaping_gain)
from .ess import (EssTrellis, InvalidIndexError, InvalidSequenceError,
                  PrecisionError, build_bounded_trellis, build_trellis,
                  complexity_report, deshape, find_emax, induced_stats,
                  load_trellis, save_trellis, shape)
from .paschain import make_config, simulate
from .sweeps import (ccdm_composition_for_rate, ccdm_rate_loss,
                     shaping_gain_curve, sphere_rate_loss,
                     sphere_rate_loss_asymptote)

_CONFIG_ERRORS = (InvalidParameterError, InvalidIndexError,
                  InvalidSequenceError, InfeasibleError,
                  ValueError, OSError, KeyError)
_NUMERIC_ERRORS = (NumericalError, PrecisionError, ArithmeticError)


def _fmt(value) -> str:
    """CSV cell: 6 significant digits for floats, plain text otherwise."""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class RunManifest:
    """Provenance record written next to every artifact."""

    command: str
    config: dict
    seed: int | None
    outputs: tuple[str, ...]
    version: str = __version__

    @property
    def digest(self) -> str:
        """Stable under key reordering: canonical (sorted) JSON is hashed."""
        blob = json.dumps(self.config, sort_keys=True,
                          separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def write(self) -> None:
        for out in self.outputs:
            _write_json(out + ".manifest.json", {
                "command": self.command,
                "config_digest": self.digest,
                "config": self.config,
                "seed": self.seed,
                "outputs": list(self.outputs),
                "version": self.version,
            })


def _effective(args: argparse.Namespace, keys) -> dict:
    """Merge a JSON config file with flag overrides; flags win."""
    merged = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise InvalidParameterError("config file must hold a JSON object")
        for key in keys:
            if key in loaded:
                merged[key] = loaded[key]
    for key in keys:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            merged[key] = flag
    return merged


def _parse_amplitudes(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(","))


def _table2(entropy: float, m: int) -> dict:
    amps = build_alphabet(m).amplitudes
    out = {"amplitudes": list(amps), "target_amplitude_entropy": entropy,
           "columns": {}}
    for shaped in range(m - 1, 0, -1):
        group = 2 ** (m - 1 - shaped)
        lam = fit_entropy(entropy, amps, group)
        pmf = partial_mb_pmf(lam, amps, group)
        h, e = pmf_stats(pmf)
        out["columns"][f"{shaped}-bit"] = {
            "group_size": group, "lambda": lam,
            "probs": [float(p) for p in pmf.probs],
            "entropy": h, "avg_energy": e,
            "shaping_gain_db": shaping_gain(h, e),
        }
    return out


_TABLE3_ROWS = (  # (name, shaped bits s, uniform bits u)
    ("3-bit ESS", 3, 0), ("2-bit P-ESS", 2, 1), ("1-bit P-ESS", 1, 2))
_TABLE4_PRECISION = {"3-bit ESS": (17, 9), "2-bit P-ESS": (10, 9),
                     "1-bit P-ESS": (8, 7)}


def _table3(n: int, m: int, amp_rate: Fraction) -> dict:
    rows = {}
    for name, s, u in _TABLE3_ROWS:
        k = round(n * float(amp_rate - u))
        reduced = build_alphabet(s + 1).amplitudes
        e_max = find_emax(n, reduced, k)
        trellis = build_trellis(n, reduced, e_max)
        _, e_red, _ = induced_stats(trellis)
        factor = 4**u
        e_full = factor * e_red + (factor - 1) / 3.0
        rows[name] = {"k_shaper": k, "u": u, "e_max": e_max,
                      "avg_energy": e_full,
                      "shaping_gain_db": shaping_gain(float(amp_rate), e_full)}
    comp = ccdm_composition_for_rate(n, m, amp_rate)
    rate, energy = ccdm_analytics(comp)
    rows["CCDM"] = {"composition": list(comp.counts), "rate": rate,
                    "avg_energy": energy,
                    "shaping_gain_db": shaping_gain(rate, energy)}
    return rows


def _table4(n: int, amp_rate: Fraction) -> dict:
    rows = {}
    for name, s, u in _TABLE3_ROWS:
        k = round(n * float(amp_rate - u))
        reduced = build_alphabet(s + 1).amplitudes
        e_max = find_emax(n, reduced, k)
        levels = (e_max - n) // 8 + 1
        n_m, n_p = _TABLE4_PRECISION[name]
        rep = complexity_report(levels, n, n_m, n_p, len(reduced), k / n)
        rows[name] = {"num_levels": levels, "n_m": n_m, "n_p": n_p,
                      "storage_kb": rep.bounded_storage_kb,
                      "bit_ops_per_dim": rep.bounded_bit_ops_per_dim}
    return rows


def _trellis_from_args(cfg: dict) -> EssTrellis:
    if cfg.get("file"):
        return load_trellis(cfg["file"])
    n = cfg["n"]
    amps = _parse_amplitudes(cfg["amplitudes"]) \
        if isinstance(cfg["amplitudes"], str) else tuple(cfg["amplitudes"])
    e_max = cfg.get("e_max")
    if e_max is None:
        e_max = find_emax(n, amps, cfg["k"])
    if cfg.get("n_m") is not None:
        return build_bounded_trellis(n, amps, e_max, cfg["n_m"], cfg["n_p"])
    return build_trellis(n, amps, e_max)


def _cmd_fit(args) -> int:
    cfg = _effective(args, ["entropy", "m", "out"])
    cfg.setdefault("entropy", 8.0 / 3.0)
    cfg.setdefault("m", 4)
    table = _table2(cfg["entropy"], cfg["m"])
    _write_json(cfg["out"], table)
    RunManifest("fit", cfg, None, (cfg["out"],)).write()
    return 0


def _cmd_gap_sweep(args) -> int:
    keys = ["m", "shaped_bits", "rate", "h_min", "h_max", "h_step", "out"]
    cfg = _effective(args, keys)
    cfg.setdefault("m", 4)
    cfg.setdefault("rate", 3.0)
    grid = np.arange(cfg["h_min"], cfg["h_max"] + 1e-12, cfg["h_step"])
    curve = shaping_gain_curve(cfg["m"], cfg["shaped_bits"], cfg["rate"], grid)
    _write_csv(cfg["out"], ["input_entropy", "gain_db"], curve)
    RunManifest("gap-sweep", cfg, None, (cfg["out"],)).write()
    return 0


def _cmd_rate_loss(args) -> int:
    keys = ["schemes", "n_min", "n_max", "n_step", "m", "out"]
    cfg = _effective(args, keys)
    cfg.setdefault("m", 4)
    cfg.setdefault("schemes", "ess,pess-u1,pess-u2,ccdm")
    rows = []
    for scheme in cfg["schemes"].split(","):
        for n in range(cfg["n_min"], cfg["n_max"] + 1, cfg["n_step"]):
            if scheme == "ccdm":
                loss = ccdm_rate_loss(n, cfg["m"])
            elif scheme.startswith("pess-u"):
                loss = sphere_rate_loss(n, int(scheme[-1]), cfg["m"])
            elif scheme == "ess":
                loss = sphere_rate_loss(n, 0, cfg["m"])
            else:
                raise InvalidParameterError(f"unknown scheme '{scheme}'")
            rows.append((n, scheme, loss))
    _write_csv(cfg["out"], ["n", "scheme", "rate_loss"], rows)
    RunManifest("rate-loss", cfg, None, (cfg["out"],)).write()
    return 0


def _cmd_trellis(args) -> int:
    keys = ["file", "n", "amplitudes", "e_max", "k", "n_m", "n_p", "out"]
    cfg = _effective(args, keys)
    trellis = _trellis_from_args(cfg)
    if args.action == "build":
        save_trellis(trellis, cfg["out"])
        RunManifest("trellis-build", {k: v for k, v in cfg.items()
                                      if k != "out"}, None,
                    (cfg["out"],)).write()
        return 0
    info = {"n": trellis.n_dims, "amplitudes": list(trellis.amplitudes),
            "e_max": trellis.e_max, "num_levels": trellis.num_levels,
            "sphere_size": str(trellis.sphere_size),
            "num_input_bits": trellis.num_input_bits,
            "shaping_rate": trellis.shaping_rate,
            "bounded": trellis.is_bounded}
    json.dump(info, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _cmd_shape(args) -> int:
    keys = ["file", "n", "amplitudes", "e_max", "k", "n_m", "n_p"]
    trellis = _trellis_from_args(_effective(args, keys))
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        seq = shape(int(line, 16), trellis)
        sys.stdout.write(",".join(str(a) for a in seq) + "\n")
    return 0


def _cmd_deshape(args) -> int:
    keys = ["file", "n", "amplitudes", "e_max", "k", "n_m", "n_p"]
    trellis = _trellis_from_args(_effective(args, keys))
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        index = deshape(_parse_amplitudes(line), trellis)
        sys.stdout.write(f"{index:x}\n")
    return 0


def _cmd_simulate(args) -> int:
    keys = ["scheme", "snr_db", "seed", "min_errors", "max_frames", "out"]
    cfg = _effective(args, keys)
    cfg.setdefault("seed", 0)
    cfg.setdefault("min_errors", 100)
    cfg.setdefault("max_frames", 1_000_000)
    snrs = [float(s) for s in str(cfg["snr_db"]).split(",")]
    config = make_config(cfg["scheme"])
    results = simulate(config, snrs, seed=cfg["seed"],
                       min_errors=cfg["min_errors"],
                       max_frames=cfg["max_frames"])
    rows = [(r.snr_db, r.frames, r.frame_errors, r.fer,
             r.ci95[0], r.ci95[1],
             r.bit_errors / (r.frames * config.num_data_bits))
            for r in results]
    _write_csv(cfg["out"], ["snr_db", "frames", "frame_errors", "fer",
                            "fer_ci_lo", "fer_ci_hi", "ber"], rows)
    RunManifest("simulate", cfg, cfg["seed"], (cfg["out"],)).write()
    return 0


def _cmd_tables(args) -> int:
    cfg = _effective(args, ["n", "m", "out"])
    cfg.setdefault("n", 162)
    cfg.setdefault("m", 4)
    amp_rate = Fraction(8, 3)
    payload = {
        "distributions": _table2(float(amp_rate), cfg["m"]),
        "finite_length": _table3(cfg["n"], cfg["m"], amp_rate),
        "complexity": _table4(cfg["n"], amp_rate),
        "rate_loss_asymptotes": {
            "pess-u1": sphere_rate_loss_asymptote(1, cfg["m"]),
            "pess-u2": sphere_rate_loss_asymptote(2, cfg["m"]),
        },
    }
    _write_json(cfg["out"], payload)
    RunManifest("tables", cfg, None, (cfg["out"],)).write()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphereshape",
        description="Sphere-shaping toolkit: distributions, trellises, "
                    "information rates and link simulation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override it")

    p = sub.add_parser("fit", help="fitted amplitude distributions (JSON)")
    common(p)
    p.add_argument("--entropy", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("gap-sweep", help="shaping-gain curve (CSV)")
    common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--shaped-bits", type=int, required=True)
    p.add_argument("--rate", type=float)
    p.add_argument("--h-min", type=float, required=True)
    p.add_argument("--h-max", type=float, required=True)
    p.add_argument("--h-step", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gap_sweep)

    p = sub.add_parser("rate-loss", help="finite-length rate-loss curves (CSV)")
    common(p)
    p.add_argument("--schemes")
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--n-step", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_rate_loss)

    for name, func in (("shape", _cmd_shape), ("deshape", _cmd_deshape)):
        p = sub.add_parser(name, help=f"{name} stdin lines through a trellis")
        common(p)
        p.add_argument("--file")
        p.add_argument("--n", type=int)
        p.add_argument("--amplitudes")
        p.add_argument("--e-max", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--n-m", type=int)
        p.add_argument("--n-p", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("trellis", help="build or inspect a trellis file")
    common(p)
    p.add_argument("action", choices=["build", "info"])
    p.add_argument("--file")
    p.add_argument("--n", type=int)
    p.add_argument("--amplitudes")
    p.add_argument("--e-max", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--n-m", type=int)
    p.add_argument("--n-p", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_trellis)

    p = sub.add_parser("simulate", help="Monte Carlo FER curve (CSV)")
    common(p)
    p.add_argument("--scheme",
                   choices=["uniform", "ess", "pess-u1", "pess-u2"])
    p.add_argument("--snr-db", help="comma-separated SNR list in dB")
    p.add_argument("--seed", type=int)
    p.add_argument("--min-errors", type=int)
    p.add_argument("--max-frames", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("tables", help="all summary tables in one JSON")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_tables)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
