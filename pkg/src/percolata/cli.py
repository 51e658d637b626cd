"""Command-line entry point.

Every subcommand emits self-describing records (JSON lines by default, CSV
on request). Each record carries the schema version and the fully resolved
configuration, and holds no timestamps, so identical configurations give
byte-identical output.

Exit codes: 0 success, 1 acceptance failure, 2 usage error, 3 hard
invariant failure, 4 other runtime error (budget, censoring).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import ArgumentError, InvariantError, PercolataError

SCHEMA = "percolata.record"
SCHEMA_VERSION = {"major": 1, "minor": 0}

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INVARIANT, EXIT_RUNTIME = 0, 1, 2, 3, 4


class UsageError(Exception):
    def __init__(self, key: str, message: str):
        super().__init__(f"invalid value for '{key}': {message}")
        self.key = key


# ---------------------------------------------------------------------------
# value parsers
# ---------------------------------------------------------------------------


def parse_grid(text: str) -> list:
    """``start:stop:step`` (stop included within 1e-12), a comma list, or one number."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("grid must look like start:stop:step")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        if stop < start:
            raise ValueError("grid stop is below start")
        out = []
        i = 0
        while start + i * step <= stop + 1e-12:
            out.append(round(start + i * step, 12))
            i += 1
        return out
    return [float(x) for x in text.split(",") if x.strip()]


def parse_int_grid(text: str) -> list:
    text = str(text).strip()
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        if len(parts) == 2:
            parts.append(1)
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError("integer grid must look like start:stop[:step]")
        return list(range(parts[0], parts[1] + 1, parts[2]))
    return [int(x) for x in text.split(",") if x.strip()]


def parse_vertex(text: str) -> tuple | str:
    text = str(text).strip()
    if text.lower() in ("inf", "infinity", "sink"):
        return "inf"
    return tuple(int(x) for x in text.strip("()").split(",") if x.strip())


def parse_complex(text: str) -> complex:
    text = str(text).strip()
    if "," in text:
        re_, im = text.split(",")
        return complex(float(re_), float(im))
    return complex(text.replace("i", "j"))


# ---------------------------------------------------------------------------
# option table: name -> (parser, default, help)
# ---------------------------------------------------------------------------

OPTIONS: dict = {
    "spec": (str, None, "graph spec, e.g. inf,inf or inf,inf,6"),
    "other": (str, "inf,inf,inf", "second graph spec (locality-radius)"),
    "radius": (int, None, "window radius"),
    "r_max": (int, 10, "largest radius compared (locality-radius)"),
    "p": (parse_grid, None, "retention parameter or grid start:stop:step"),
    "samples": (int, None, "Monte Carlo samples"),
    "seed": (int, None, "seed (mandatory for sampling subcommands)"),
    "distances": (parse_int_grid, "2:10", "distances (two-point)"),
    "ks": (parse_int_grid, "16,32,64,128,256,512", "size thresholds (tail)"),
    "u": (parse_vertex, None, "source vertex, e.g. 0,0"),
    "v": (parse_vertex, None, "target vertex, e.g. 3,0 or inf"),
    "k": (int, 10, "size threshold (oracle tail event)"),
    "kind": (str, "vertex", "vertex or bond (cutsets)"),
    "max_size": (int, 8, "largest cutset or interface size"),
    "connectivity": (str, "no", "yes: report empirical C* over the pair u-v"),
    "N": (int, 1, "scale parameter"),
    "t": (int, 2, "t-connectivity of interfaces"),
    "scales": (str, "standard", "standard or toy scale profile"),
    "mode": (str, None, "mode of the subcommand"),
    "n_max": (int, 12, "largest expansion size"),
    "z": (parse_complex, None, "complex parameter re,im"),
    "event": (str, "connect", "connect, two-point, tail or interface-ie (oracle)"),
    "clipped": (str, "yes", "clipped goodness near the window boundary (yes/no)"),
    "only": (parse_int_grid, None, "subset of acceptance criteria, e.g. 1,2,9"),
    "format": (str, "json", "json or csv"),
    "output": (str, "-", "output path, - for stdout"),
}

COMMANDS: dict = {
    "ball": ["spec", "radius"],
    "locality-radius": ["spec", "other", "r_max"],
    "theta-sweep": ["spec", "p", "radius", "samples", "seed"],
    "two-point": ["spec", "p", "distances", "radius", "samples", "seed"],
    "tail": ["spec", "p", "ks", "radius", "samples", "seed"],
    "cutsets": ["spec", "radius", "u", "v", "kind", "max_size", "connectivity"],
    "interfaces": ["spec", "radius", "N", "t", "scales", "mode", "p", "samples", "seed", "n_max", "z", "clipped"],
    "series": ["spec", "radius", "N", "t", "scales", "mode", "p", "samples", "seed", "n_max", "z", "clipped"],
    "oracle": ["spec", "radius", "event", "u", "v", "k", "p", "N", "t", "scales", "clipped"],
    "accept": ["only"],
}
COMMON = ["format", "output"]
SEEDED = {"theta-sweep", "two-point", "tail"}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="percolata", description="Percolation on products of cycles.")
    ap.add_argument("--version", action="version", version=f"percolata {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, keys in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key = value file; flags override it")
        for key in keys + COMMON:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None, help=OPTIONS[key][2])
    return ap


def read_config_file(path: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=", ":"))
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_string("[config]\n" + fh.read())
    except OSError as exc:
        raise UsageError("config", str(exc)) from None
    except configparser.Error as exc:
        raise UsageError("config", f"cannot parse: {exc}") from None
    return {k.replace("-", "_"): v for k, v in cp["config"].items()}


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags, then parse every value."""
    keys = COMMANDS[command] + COMMON
    raw = {k: OPTIONS[k][1] for k in keys}
    if ns.config:
        for k, v in read_config_file(ns.config).items():
            if k not in raw:
                raise UsageError(k, f"unknown key for '{command}'")
            raw[k] = v
    for k in keys:
        v = getattr(ns, k)
        if v is not None:
            raw[k] = v
    cfg = {}
    for k in keys:
        v = raw[k]
        if v is None or not isinstance(v, str):
            cfg[k] = v
            continue
        try:
            cfg[k] = OPTIONS[k][0](v)
        except (ValueError, ArgumentError) as exc:
            raise UsageError(k, str(exc)) from None
    if command in SEEDED and cfg.get("seed") is None:
        raise UsageError("seed", f"'{command}' needs an explicit seed")
    if cfg.get("format") not in ("json", "csv"):
        raise UsageError("format", "must be json or csv")
    for k in ("clipped", "connectivity"):
        if k in cfg:
            if str(cfg[k]).lower() not in ("yes", "no", "true", "false", "1", "0"):
                raise UsageError(k, "must be yes or no")
            cfg[k] = str(cfg[k]).lower() in ("yes", "true", "1")
    return cfg


def need(cfg: dict, *keys):
    for k in keys:
        if cfg.get(k) is None:
            raise UsageError(k, "is required")


def single_p(cfg: dict) -> float:
    need(cfg, "p")
    if len(cfg["p"]) != 1:
        raise UsageError("p", "this subcommand takes one value")
    return cfg["p"][0]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, Fraction):
        return str(x)
    return x


def envelope(command: str, cfg: dict, payload: dict) -> dict:
    rec = {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "config": _plain({k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.items()}),
    }
    rec.update(_plain(payload))
    return rec


def write_records(records: Sequence[dict], fmt: str, stream) -> None:
    if fmt == "json":
        for r in records:
            stream.write(json.dumps(r, sort_keys=True) + "\n")
        return
    keys = sorted({k for r in records for k in r})
    w = csv.DictWriter(stream, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: json.dumps(r[k], sort_keys=True) if isinstance(r.get(k), (dict, list)) else r.get(k, "")
                    for k in keys})


def threads() -> int:
    try:
        n = int(os.environ.get("PERCOLATA_THREADS", "1"))
    except ValueError:
        raise UsageError("PERCOLATA_THREADS", "must be an integer") from None
    return max(1, n)


def map_units(fn: Callable, units: Sequence) -> list:
    """Run independent units on the worker pool; results come back in unit order."""
    n = min(threads(), len(units)) or 1
    if n == 1:
        return [fn(u) for u in units]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, units))


# ---------------------------------------------------------------------------
# subcommands (each returns a list of payload dicts)
# ---------------------------------------------------------------------------


def _scales(cfg: dict):
    from .percolation import Scales

    name = cfg.get("scales", "standard")
    if name == "standard":
        return Scales.standard(cfg["N"])
    if name == "toy":
        return Scales.toy()
    raise UsageError("scales", "must be standard or toy")


def cmd_ball(cfg):
    from .graphs import ball

    need(cfg, "spec", "radius")
    b = ball(cfg["spec"], cfg["radius"])
    spheres = [len(b.sphere(r)) for r in range(cfg["radius"] + 1)]
    return [{"n_vertices": len(b), "n_edges": len(b.edges), "sphere_sizes": spheres}]


def cmd_locality(cfg):
    from .graphs import locality_radius

    need(cfg, "spec", "other")
    r = locality_radius(cfg["spec"], cfg["other"], cfg["r_max"])
    return [{"locality_radius": int(r), "capped": bool(getattr(r, "capped", False))}]


def cmd_theta(cfg):
    from .percolation import connection_estimate

    need(cfg, "spec", "p", "radius", "samples")
    ests = map_units(lambda p: connection_estimate(cfg["spec"], p, cfg["radius"], cfg["samples"], cfg["seed"]),
                     cfg["p"])
    return [e.as_record() for e in ests]


def cmd_two_point(cfg):
    from .percolation import decay_fit, two_point_profile

    need(cfg, "spec", "radius", "samples")
    p = single_p(cfg)
    ests = two_point_profile(cfg["spec"], p, cfg["distances"], cfg["radius"], cfg["samples"], cfg["seed"])
    fit = decay_fit(cfg["distances"], [e.estimate for e in ests])
    out = [e.as_record() for e in ests]
    out.append({"fit": {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2, "points": fit.n_points}})
    return out


def cmd_tail(cfg):
    from .percolation import stretch_exponent_fit, tail_profile

    need(cfg, "spec", "radius", "samples")
    p = single_p(cfg)
    ests = tail_profile(cfg["spec"], p, cfg["ks"], cfg["radius"], cfg["samples"], cfg["seed"])
    fit = stretch_exponent_fit(cfg["ks"], [e.estimate for e in ests])
    out = [e.as_record() for e in ests]
    out.append({"fit": {"exponent": fit.slope, "intercept": fit.intercept, "r2": fit.r2, "points": fit.n_points}})
    return out


def cmd_cutsets(cfg):
    from .cutsets import cut_connectivity, enumerate_minimal_cutsets
    from .window import make_window

    need(cfg, "spec", "radius", "v")
    w = make_window(cfg["spec"], cfg["radius"])
    u = cfg["u"] if cfg["u"] is not None else w.vertex(w.origin)
    if cfg["kind"] not in ("vertex", "bond"):
        raise UsageError("kind", "must be vertex or bond")
    if cfg["connectivity"]:
        return [cut_connectivity(w, [(u, cfg["v"])], cfg["max_size"], cfg["kind"]).as_record()]
    cs = enumerate_minimal_cutsets(w, u, cfg["v"], cfg["max_size"], cfg["kind"])
    return [c.as_record() for c in cs]


def cmd_interfaces(cfg):
    from .acceptance import interface_audit
    from .interfaces import occurring_census, theta_series
    from .percolation import sample_configuration
    from .window import make_window

    need(cfg, "spec", "radius", "mode")
    mode = cfg["mode"]
    sc = _scales(cfg)
    if mode == "census":
        need(cfg, "samples", "seed")
        p = single_p(cfg)
        w = make_window(cfg["spec"], cfg["radius"])
        out = []
        for i in range(cfg["samples"]):
            c = occurring_census(sample_configuration(w, p, cfg["seed"], i), cfg["N"], cfg["t"], cfg["n_max"],
                                 sc, cfg["clipped"])
            if not (c.disjoint and c.geodesic_ok):
                raise InvariantError(f"census audit failed in sample {i}", witness=c.as_record())
            out.append({"sample": i, **c.as_record()})
        return out
    if mode == "series":
        need(cfg, "z")
        w = make_window(cfg["spec"], cfg["radius"])
        return [theta_series(w, cfg["N"], cfg["t"], cfg["z"], cfg["n_max"], sc, cfg["clipped"]).as_record()]
    if mode == "audit":
        need(cfg, "samples", "seed")
        if str(cfg["spec"]).replace(" ", "") not in ("inf,inf",):
            raise UsageError("spec", "the planted audit is implemented for inf,inf")
        p = single_p(cfg)
        d = interface_audit(radius=cfg["radius"], p=p, N=cfg["N"], t=cfg["t"], target=cfg["samples"],
                            max_samples=4 * cfg["samples"], natural_samples=0, seed=cfg["seed"],
                            time_limit=math.inf)
        d.pop("seconds")
        if sum(d["violations"].values()):
            raise InvariantError("interface audit found violations", witness=d)
        return [d]
    raise UsageError("mode", "must be census, series or audit")


def cmd_series(cfg):
    from .interfaces import expansion_term
    from .window import make_window

    need(cfg, "spec", "radius")
    mode = cfg["mode"] or "exact"
    sc = _scales(cfg)
    w = make_window(cfg["spec"], cfg["radius"])
    out = []
    for n in range(1, cfg["n_max"] + 1):
        if mode == "exact":
            term = expansion_term(w, cfg["N"], cfg["t"], n, "exact", sc, clipped=cfg["clipped"])
            rec = term.as_record()
            if cfg["p"]:
                rec["values"] = {str(p): float(term.evaluate(Fraction(str(p)))) for p in cfg["p"]}
            if cfg["z"] is not None:
                rec["value_at_z"] = complex(term.evaluate(cfg["z"]))
        elif mode == "monte_carlo":
            need(cfg, "samples", "seed")
            term = expansion_term(w, cfg["N"], cfg["t"], n, "monte_carlo", sc, single_p(cfg), cfg["samples"],
                                  cfg["seed"], cfg["clipped"])
            rec = term.as_record()
        else:
            raise UsageError("mode", "must be exact or monte_carlo")
        out.append(rec)
    return out


def cmd_oracle(cfg):
    from .oracle import (
        connection_event,
        exact_event_polynomial,
        tail_event,
        two_point_event,
        verify_inclusion_exclusion,
    )
    from .window import make_window

    need(cfg, "spec", "radius")
    w = make_window(cfg["spec"], cfg["radius"])
    ev = cfg["event"]
    if ev == "interface-ie":
        rep = verify_inclusion_exclusion(w, cfg["N"], cfg["t"], _scales(cfg), cfg["clipped"])
        return [rep.as_record()]
    if ev == "connect":
        pred = connection_event(w)
    elif ev == "two-point":
        need(cfg, "u", "v")
        pred = two_point_event(w, cfg["u"], cfg["v"])
    elif ev == "tail":
        pred = tail_event(w, cfg["k"])
    else:
        raise UsageError("event", "must be connect, two-point, tail or interface-ie")
    poly = exact_event_polynomial(w, pred, vectorized=True)
    rec = {"event": ev, **poly.as_record()}
    if cfg["p"]:
        rec["values"] = {str(p): float(poly.evaluate(Fraction(str(p)))) for p in cfg["p"]}
    return [rec]


def cmd_accept(cfg):
    from .acceptance import run_suite

    results = run_suite(cfg["only"], emit=lambda line: print(line, file=sys.stderr, flush=True))
    return [r.as_record() for r in results]


HANDLERS = {
    "ball": cmd_ball,
    "locality-radius": cmd_locality,
    "theta-sweep": cmd_theta,
    "two-point": cmd_two_point,
    "tail": cmd_tail,
    "cutsets": cmd_cutsets,
    "interfaces": cmd_interfaces,
    "series": cmd_series,
    "oracle": cmd_oracle,
    "accept": cmd_accept,
}


def run(command: str, cfg: dict) -> tuple:
    """Dispatch one resolved configuration; returns ``(exit_code, records)``."""
    payloads = HANDLERS[command](cfg)
    records = [envelope(command, cfg, p) for p in payloads]
    code = EXIT_OK
    if command == "accept" and not all(r["passed"] for r in records):
        code = EXIT_FAILED
    return code, records


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = resolve(ns.command, ns)
        code, records = run(ns.command, cfg)
    except UsageError as exc:
        print(f"percolata {ns.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"percolata {ns.command}: invariant failure: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(json.dumps(_plain(exc.witness), sort_keys=True), file=sys.stderr)
        return EXIT_INVARIANT
    except (ArgumentError, ValueError) as exc:
        print(f"percolata {ns.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PercolataError as exc:
        print(f"percolata {ns.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if cfg["output"] == "-":
        write_records(records, cfg["format"], sys.stdout)
    else:
        buf = io.StringIO()
        write_records(records, cfg["format"], buf)
        with open(cfg["output"], "w", newline="") as fh:
            fh.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
