"""Command-line front end.

Every subcommand takes ``--config FILE`` (JSON object keyed by option name,
dashes or underscores) and explicit flags; a flag given on the command line
wins over the config file, which wins over the built-in default.

Tabular output is CSV: a ``# {metadata}`` line, a column header, then rows.
The metadata echoes the resolved config so the artifact reproduces its own
run.  Wall time goes only to the JSON summary, keeping CSV bit-identical
across repeated runs.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from chowlab import __version__
from chowlab._backend import BACKEND
from chowlab.correlator import (CoverageError, DependentFamilyError, correlation_scan,
                                katai_pair_stat, local_fourier_sup,
                                mrt_stat, short_interval_stat, twisted_short_interval_stat)
from chowlab.functions import EvaluatedTable, SpecError, parse_spec, tabulate
from chowlab.patterns import PatternError, PatternQuery, pattern_scan
from chowlab.pretense import (SearchConfig, distance_sq, distance_to_archimedean,
                              min_distance, strong_aperiodicity_scan)
from chowlab.shifts import FamilyError, LatticeBox, parse_family
from chowlab.sieve import DEFAULT_SEGMENT, SieveError, build_block, cached_block

EXIT_OK, EXIT_VALIDATION, EXIT_COVERAGE, EXIT_INTERNAL = 0, 2, 3, 4


class ValidationError(ValueError):
    pass


def fmt(x):
    """17 significant digits, so doubles round-trip."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


# --------------------------------------------------------------------------
# value parsing

def int_value(x):
    if isinstance(x, int):
        return x
    s = str(x).strip()
    try:
        return int(s)
    except ValueError:
        v = float(s)
        if not v.is_integer():
            raise ValidationError(f"{s!r} is not an integer")
        return int(v)


def int_list(x):
    if isinstance(x, (list, tuple)):
        return [int_value(v) for v in x]
    return [int_value(v) for v in str(x).split(",") if v.strip()]


def float_list(x):
    if isinstance(x, (list, tuple)):
        return [float(v) for v in x]
    return [float(v) for v in str(x).split(",") if v.strip()]


def spec_list(x):
    """Specs separated by ';' (JSON specs contain commas), or a JSON/config list."""
    if isinstance(x, (list, tuple)):
        return [parse_spec(v) for v in x]
    s = str(x).strip()
    if s.startswith("["):
        return [parse_spec(v) for v in json.loads(s)]
    return [parse_spec(v) for v in s.split(";") if v.strip()]


def eps_vector(x):
    if isinstance(x, (list, tuple)):
        return tuple(int(v) for v in x)
    s = str(x).strip()
    if s and set(s) <= {"+", "-"}:
        return tuple(1 if c == "+" else -1 for c in s)
    return tuple(int(v) for v in s.split(","))


# --------------------------------------------------------------------------
# subcommand table: name -> (help, options, defaults)

COMMON = {"config": None, "out": None, "summary": None, "threads": 1}

OPTIONS = {
    "sieve": ("sieve a range and report counts", {
        "lo": 1, "hi": None, "segment": DEFAULT_SEGMENT, "cache_dir": None, "rows": False}),
    "eval": ("tabulate a function", {"f": None, "lo": 1, "hi": None}),
    "distance": ("pretentious distance D^2(f, g; N) or M(f; N)", {
        "f": None, "g": None, "t": None, "N": None, "min": False}),
    "aperiodicity": ("M(f chi; N) curves for all characters chi mod q <= q_max", {
        "f": None, "q_max": 4, "cutoffs": None, "increase_threshold": 0.2,
        "level_threshold": 0.05}),
    "correlate": ("multi-shift correlation scan over a box", {
        "functions": "liouville", "family": None, "box": None, "M": None,
        "allow_dependent": False}),
    "shortint": ("short-interval averages", {"f": "liouville", "M": None, "N": None, "t": 0.0}),
    "mrt": ("single-correlation average over shifts n <= N", {
        "f": "liouville", "M": None, "N": None}),
    "fourier": ("local Fourier sup over an oversampled grid", {
        "f": "liouville", "M": None, "N": None, "oversample": 8}),
    "katai": ("E_n a(pn) conj a(qn)", {
        "f": None, "alpha": None, "p": 2, "q": 3, "N": None}),
    "patterns": ("sign or residue pattern densities over a box", {
        "mode": "sign", "functions": "liouville", "eps": None, "moduli": None,
        "residues": None, "counters": "omega", "family": None, "box": None, "M": None}),
}

FLAGS = {"rows", "min", "allow_dependent"}


def build_parser():
    parser = argparse.ArgumentParser(prog="chowlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (helptext, opts) in OPTIONS.items():
        p = sub.add_parser(name, help=helptext)
        for key in list(COMMON) + list(opts):
            flag = "--" + key.replace("_", "-")
            if key in FLAGS:
                p.add_argument(flag, dest=key, action="store_true", default=None)
            else:
                p.add_argument(flag, dest=key, default=None)
    rp = sub.add_parser("report", help="summarize artifacts")
    rp.add_argument("paths", nargs="*")
    return parser


def resolve(args):
    """Merge defaults, config file and explicit flags (in increasing precedence)."""
    _, opts = OPTIONS[args.command]
    cfg = dict(COMMON)
    cfg.update(opts)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValidationError("config must be a JSON object")
        for k, v in loaded.items():
            k = k.replace("-", "_")
            if k not in cfg:
                raise ValidationError(f"unknown config key {k!r} for {args.command}")
            cfg[k] = v
    for k in cfg:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    cfg.pop("config")
    return cfg


def _need(cfg, *keys):
    for k in keys:
        if cfg.get(k) in (None, ""):
            raise ValidationError(f"missing required option --{k.replace('_', '-')}")


# --------------------------------------------------------------------------
# output

class Artifact:
    def __init__(self, command, cfg, columns):
        self.command = command
        self.cfg = cfg
        self.columns = columns
        self.rows = []
        self.summary = {}

    def add(self, *row):
        self.rows.append(row)

    def metadata(self):
        echo = {k: v for k, v in self.cfg.items() if k not in ("out", "summary")}
        return {"command": self.command, "version": __version__, "backend": BACKEND,
                "config": _jsonable(echo)}

    def csv_text(self):
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.metadata(), sort_keys=True) + "\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(x) for x in row) + "\n")
        return buf.getvalue()

    def write(self, wall_time):
        out = self.cfg.get("out")
        text = self.csv_text()
        if out:
            Path(out).write_text(text)
        else:
            sys.stdout.write(text)
        spath = self.cfg.get("summary") or (f"{out}.summary.json" if out else None)
        if spath:
            summary = dict(self.metadata(), wall_time=wall_time, **_jsonable(self.summary))
            Path(spath).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# commands

def cmd_sieve(cfg):
    _need(cfg, "hi")
    lo, hi = int_value(cfg["lo"]), int_value(cfg["hi"])
    seg = int_value(cfg["segment"])
    if cfg["cache_dir"]:
        block = cached_block(lo, hi, cache_dir=cfg["cache_dir"], segment=seg)
    else:
        block = build_block(lo, hi, segment=seg)
    art = Artifact("sieve", cfg, ["n", "omega", "big_omega", "mu", "lambda"])
    if cfg["rows"]:
        for i in range(len(block)):
            art.add(lo + i, int(block.omega[i]), int(block.big_omega[i]),
                    int(block.mu[i]), int(block.lam[i]))
    art.summary = {"lo": lo, "hi": hi,
                   "sum_lambda": int(block.lam.astype(np.int64).sum()),
                   "sum_mu": int(block.mu.astype(np.int64).sum()),
                   "squarefree": int(block.squarefree.sum())}
    if not cfg["rows"]:
        art.columns = ["lo", "hi", "sum_lambda", "sum_mu", "squarefree"]
        art.add(lo, hi, *list(art.summary.values())[2:])
    return art


def cmd_eval(cfg):
    _need(cfg, "f", "hi")
    f = parse_spec(cfg["f"])
    lo, hi = int_value(cfg["lo"]), int_value(cfg["hi"])
    table = tabulate(f, lo, hi)
    art = Artifact("eval", cfg, ["n", "re", "im"])
    for i, v in enumerate(table.values):
        art.add(lo + i, v.real, v.imag)
    return art


def cmd_distance(cfg):
    _need(cfg, "f", "N")
    f = parse_spec(cfg["f"])
    Ns = int_list(cfg["N"])
    if cfg["min"]:
        art = Artifact("distance", cfg, ["q", "chi_index", "N", "t_star", "M_value"])
        for N in Ns:
            r = min_distance(f, N)
            art.add(1, 0, N, r.t_star, r.value)
        return art
    art = Artifact("distance", cfg, ["N", "distance_sq"])
    for N in Ns:
        if cfg["t"] is not None:
            v = distance_to_archimedean(f, float(cfg["t"]), N)
        else:
            _need(cfg, "g")
            v = distance_sq(f, parse_spec(cfg["g"]), N)
        art.add(N, v)
    return art


def cmd_aperiodicity(cfg):
    _need(cfg, "f", "cutoffs")
    rep = strong_aperiodicity_scan(parse_spec(cfg["f"]), int_value(cfg["q_max"]),
                                   int_list(cfg["cutoffs"]), SearchConfig(),
                                   float(cfg["increase_threshold"]),
                                   float(cfg["level_threshold"]))
    art = Artifact("aperiodicity", cfg, ["q", "chi_index", "N", "t_star", "M_value"])
    for row in rep.rows():
        art.add(*row)
    art.summary = {"verdict": rep.verdict, "curves": len(rep.curves)}
    return art


def _box(text):
    try:
        return LatticeBox.parse(str(text))
    except FamilyError as exc:
        raise ValidationError(f"box {text!r}: {exc}") from exc


def cmd_correlate(cfg):
    _need(cfg, "family", "box", "M")
    family = parse_family(cfg["family"])
    box = _box(cfg["box"])
    series = correlation_scan(spec_list(cfg["functions"]), family, box, int_list(cfg["M"]),
                              threads=int_value(cfg["threads"]),
                              allow_dependent=bool(cfg["allow_dependent"]))
    cols = [f"n_{i + 1}" for i in range(box.arity)] + ["M", "re", "im", "abs"]
    art = Artifact("correlate", cfg, cols)
    for pt, M, c in series.rows():
        art.add(*pt, M, c.real, c.imag, abs(c))
    art.summary = {"family": family.to_json(),
                   "functions": [f.to_json() for f in series.functions],
                   "independence": family.independence,
                   "M_grid": list(series.M_grid), "ud_statistic": series.summary,
                   "differences": series.differences}
    return art


def _grid_stat(cfg, name, cols, fn):
    _need(cfg, "M", "N")
    f = parse_spec(cfg["f"])
    Ms, Ns = int_list(cfg["M"]), int_list(cfg["N"])
    table = tabulate(f, 1, max(Ms) + max(Ns) + 1)
    art = Artifact(name, cfg, cols)
    for M in Ms:
        for N in Ns:
            art.add(M, N, *fn(table, M, N))
    return art


def cmd_shortint(cfg):
    t = float(cfg["t"])
    threads = int_value(cfg["threads"])
    if t == 0:
        return _grid_stat(cfg, "shortint", ["M", "N", "t", "value"],
                          lambda tb, M, N: (t, short_interval_stat(tb, M, N, threads)))
    return _grid_stat(cfg, "shortint", ["M", "N", "t", "value"],
                      lambda tb, M, N: (t, twisted_short_interval_stat(tb, M, N, t, threads)))


def cmd_mrt(cfg):
    threads = int_value(cfg["threads"])
    return _grid_stat(cfg, "mrt", ["M", "N", "value"],
                      lambda tb, M, N: (mrt_stat(tb, M, N, threads),))


def cmd_fourier(cfg):
    threads = int_value(cfg["threads"])
    k = int_value(cfg["oversample"])

    def run(tb, M, N):
        r = local_fourier_sup(tb, M, N, k, threads)
        return k, r.value, r.gap
    return _grid_stat(cfg, "fourier", ["M", "N", "oversample", "value", "gap"], run)


def cmd_katai(cfg):
    _need(cfg, "N")
    p, q = int_value(cfg["p"]), int_value(cfg["q"])
    art = Artifact("katai", cfg, ["p", "q", "N", "re", "im", "abs"])
    for N in int_list(cfg["N"]):
        hi = max(p, q) * N + 1
        if cfg["alpha"] is not None:
            alpha = float(cfg["alpha"])
            n = np.arange(1, hi, dtype=np.float64)
            table = EvaluatedTable.from_values(np.exp(2j * math.pi * ((n * alpha) % 1.0)))
        else:
            _need(cfg, "f")
            table = tabulate(parse_spec(cfg["f"]), 1, hi)
        v = katai_pair_stat(table, p, q, N)
        art.add(p, q, N, v.real, v.imag, abs(v))
    return art


def cmd_patterns(cfg):
    _need(cfg, "family", "box", "M")
    family = parse_family(cfg["family"])
    box = _box(cfg["box"])
    Ms = int_list(cfg["M"])
    mode = cfg["mode"]
    k = family.size + 1
    if mode == "sign":
        eps = eps_vector(cfg["eps"]) if cfg["eps"] else (1,) * k
        template = PatternQuery("sign", family, (box.bounds[i][0] for i in range(box.arity)),
                                Ms[-1], eps=eps, functions=tuple(spec_list(cfg["functions"])))
    else:
        _need(cfg, "moduli")
        moduli = int_list(cfg["moduli"])
        residues = int_list(cfg["residues"]) if cfg["residues"] else [0] * len(moduli)
        counters = cfg["counters"]
        counters = counters if isinstance(counters, list) else str(counters).split(",")
        template = PatternQuery("residue", family, (box.bounds[i][0] for i in range(box.arity)),
                                Ms[-1], moduli=moduli, residues=residues, counters=counters)
    scan = pattern_scan(template, box, Ms, threads=int_value(cfg["threads"]))
    cols = [f"n_{i + 1}" for i in range(box.arity)] + [
        "M", "pattern", "density", "expansion_density", "target"]
    art = Artifact("patterns", cfg, cols)
    for pt, M, r in scan.rows():
        art.add(*pt, M, r.query.label, r.density, r.expansion_density, r.target)
    art.summary = {"mode": mode, "pattern": template.label, "target": template.target,
                   "M_grid": list(scan.M_grid), "ud_statistic": scan.summary,
                   "ud_by_pattern": scan.summary_by_pattern,
                   "zeta": "e(1/b)" if mode == "residue" else None,
                   "errors": {",".join(map(str, pt)): m for pt, m in scan.errors.items()}}
    return art


COMMANDS = {"sieve": cmd_sieve, "eval": cmd_eval, "distance": cmd_distance,
            "aperiodicity": cmd_aperiodicity, "correlate": cmd_correlate,
            "shortint": cmd_shortint, "mrt": cmd_mrt, "fourier": cmd_fourier,
            "katai": cmd_katai, "patterns": cmd_patterns}


# --------------------------------------------------------------------------
# report

class ArtifactError(ValueError):
    pass


def read_artifact(path):
    """(metadata, columns, rows) of a CSV artifact; rows stay strings."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ArtifactError(f"{path}: {exc}") from exc
    if len(lines) < 2 or not lines[0].startswith("# "):
        raise ArtifactError(f"{path}: missing metadata header")
    try:
        meta = json.loads(lines[0][2:])
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: bad metadata: {exc}") from exc
    if "command" not in meta:
        raise ArtifactError(f"{path}: metadata has no command")
    cols = lines[1].split(",")
    rows = [ln.split(",") for ln in lines[2:] if ln]
    if any(len(r) != len(cols) for r in rows):
        raise ArtifactError(f"{path}: ragged rows")
    return meta, cols, rows


def _convergence(meta, cols, rows):
    """Mean of the main statistic per M (or per (M, N)) for one artifact."""
    cmd = meta["command"]
    idx = {c: i for i, c in enumerate(cols)}
    groups = {}
    if cmd in ("correlate",):
        for r in rows:
            groups.setdefault(("M", r[idx["M"]]), []).append(float(r[idx["abs"]]))
        return "E_n |c(M; n)|", groups
    if cmd == "patterns":
        for r in rows:
            d = abs(float(r[idx["density"]]) - float(r[idx["target"]]))
            groups.setdefault(("M", r[idx["M"]]), []).append(d)
        return "E |density - target|", groups
    if cmd in ("shortint", "mrt", "fourier"):
        for r in rows:
            groups.setdefault(("M,N", f"{r[idx['M']]},{r[idx['N']]}"), []).append(
                float(r[idx["value"]]))
        return "value", groups
    if cmd in ("aperiodicity",) or (cmd == "distance" and "M_value" in idx):
        for r in rows:
            groups.setdefault(("q,chi,N", f"{r[0]},{r[1]},{r[2]}"), []).append(
                float(r[idx["M_value"]]))
        return "M(f chi; N)", groups
    if cmd == "distance":
        for r in rows:
            groups.setdefault(("N", r[idx["N"]]), []).append(float(r[idx["distance_sq"]]))
        return "D^2", groups
    if cmd == "katai":
        for r in rows:
            groups.setdefault(("N", r[idx["N"]]), []).append(float(r[idx["abs"]]))
        return "|average|", groups
    return "rows", {("rows", str(len(rows))): [float(len(rows))]}


def report(paths, stream=None):
    """Plain-text convergence tables grouped by statistic kind."""
    stream = stream or sys.stdout
    by_kind = {}
    for p in paths:
        meta, cols, rows = read_artifact(p)
        by_kind.setdefault(meta["command"], []).append((p, meta, cols, rows))
    for kind in sorted(by_kind):
        stream.write(f"== {kind} ==\n")
        for p, meta, cols, rows in by_kind[kind]:
            label, groups = _convergence(meta, cols, rows)
            stream.write(f"{p}\n")
            for (key, val), xs in groups.items():
                stream.write(f"  {key}={val}\t{label}={fmt(math.fsum(xs) / len(xs))}\n")
    return by_kind


# --------------------------------------------------------------------------
# entry point

def _fail(code, exc):
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            report(args.paths)
            return EXIT_OK
        cfg = resolve(args)
        start = time.perf_counter()
        art = COMMANDS[args.command](cfg)
        art.write(time.perf_counter() - start)
        return EXIT_OK
    except (CoverageError, OverflowError) as exc:
        return _fail(EXIT_COVERAGE, exc)
    except (ValidationError, SpecError, FamilyError, PatternError, DependentFamilyError,
            SieveError, ArtifactError, ValueError) as exc:
        return _fail(EXIT_VALIDATION, exc)
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_INTERNAL, exc)


if __name__ == "__main__":
    sys.exit(main())
