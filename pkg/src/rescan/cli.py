"""Command-line front end: ``rescan {scan,oracle,diagnostics,fuzz}``.

Settings come from an optional flat ``key=value`` file (``--config``) and
command-line flags; a flag beats the file, which beats the default.  Exit
codes: 0 success, 1 fuzz violations, 2 configuration error, 3 numerical
failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, EmptyLattice, NumericalError, RescanError
from .kernel import aligned_resolution
from .oracle import SquareWellSpec, find_zeros, lemma_fuzz, well_determinant
from .potential import SupportBox, load_sampled_potential, make_builtin
from .resolvent import ThresholdRule
from .scan import (ScanResult, cluster_flags, convergence_diagnostic, gamma_n, local_minima, resolve_workers,
                   suspect_clusters, theta_set)
from .tiling import Box, LatticeSpec

log = logging.getLogger("rescan")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4
TARGET_POINTS = 1_000_000

FIELD_HEADER = ["re", "im", "sheet", "sigma", "flagged"]
CLUSTER_HEADER = ["re_centroid", "im_centroid", "count", "min_sigma"]
ORACLE_HEADER = ["re", "im", "abs_F"]


@dataclass
class RunConfig:
    potential: str = "square_well"
    potential_file: str | None = None
    params: dict = field(default_factory=dict)
    M: float = 2.0
    d: int = 1
    n: int = 100
    mode: str = "box"
    box: tuple | None = None
    tiles: int | None = None
    sheet_depth: int | None = None
    spacing: float | None = None
    exclusion: float | None = None
    cutoff: float = 200.0
    theoretical: bool = False
    workers: int = 1
    out: str = "rescan_out"
    seed: int = 42
    trials: int = 1000
    max_dim: int = 20
    n_list: tuple = ()
    V0: float = 1.0
    a: float = 1.0
    mirror: bool = True
    figure: bool = False

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["box"] = list(self.box) if self.box is not None else None
        d["n_list"] = list(self.n_list)
        return d


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _parse_bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_floats(s, count=None):
    if isinstance(s, (list, tuple)):
        vals = [float(v) for v in s]
    else:
        vals = [float(v) for v in str(s).replace(",", " ").split()]
    if count is not None and len(vals) != count:
        raise ConfigError(f"expected {count} numbers, got {s!r}")
    return tuple(vals)


def _parse_param(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        return value


_FIELD_TYPES = {
    "potential": str, "potential_file": str, "M": float, "d": int, "n": int, "mode": str,
    "box": lambda s: _parse_floats(s, 4), "tiles": int, "sheet_depth": int, "spacing": float,
    "exclusion": float, "cutoff": float, "theoretical": _parse_bool, "workers": int, "out": str,
    "seed": int, "trials": int, "max_dim": int,
    "n_list": lambda s: tuple(int(v) for v in _parse_floats(s)), "V0": float, "a": float,
    "mirror": _parse_bool, "figure": _parse_bool,
}


def _apply(cfg: RunConfig, key: str, value, origin: str):
    if key.startswith("param."):
        cfg.params[key[len("param."):]] = _parse_param(value)
        return
    if key == "params" and isinstance(value, dict):
        cfg.params.update(value)
        return
    conv = _FIELD_TYPES.get(key)
    if conv is None:
        raise ConfigError(f"{origin}: unknown key {key!r}")
    try:
        setattr(cfg, key, None if value is None else conv(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{origin}: bad value for {key!r}: {value!r}") from exc


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "manifest", None):
        try:
            data = json.loads(Path(args.manifest).read_text(encoding="utf-8"))["config"]
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load manifest {args.manifest}: {exc}") from exc
        for k, v in data.items():
            _apply(cfg, k, v, str(args.manifest))
    if getattr(args, "config", None):
        for k, v in read_config_file(args.config).items():
            _apply(cfg, k, v, str(args.config))
    for key in _FIELD_TYPES:
        v = getattr(args, key, None)
        if v is not None:
            _apply(cfg, key, v, "command line")
    for item in getattr(args, "param", None) or []:
        if "=" not in item:
            raise ConfigError(f"--param expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg.params[k.strip()] = _parse_param(v.strip())
    return cfg


def rule_for(cfg: RunConfig) -> ThresholdRule:
    if cfg.theoretical:
        return ThresholdRule.theoretical(cfg.d)
    return ThresholdRule(cutoff=cfg.cutoff, d=cfg.d)


def potential_for(cfg: RunConfig):
    support = SupportBox(cfg.M, cfg.d)
    if cfg.potential_file:
        path = Path(cfg.potential_file)
        if not path.is_file():
            raise ConfigError(f"potential file not found: {path}")
        return load_sampled_potential(path, support)
    return make_builtin(cfg.potential, support, **cfg.params)


def default_spacing(box: Box, target: int = TARGET_POINTS) -> float:
    area = (box.re_max - box.re_min) * (box.im_max - box.im_min)
    if area <= 0:
        raise ConfigError("default spacing needs a box with positive area; set spacing")
    return math.sqrt(area / target)


def align_n(cfg: RunConfig) -> int:
    n = aligned_resolution(cfg.n, cfg.M)
    if n != cfg.n:
        log.warning("n=%d does not make n*M integral for M=%g; using n=%d", cfg.n, cfg.M, n)
    return n


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _open_csv(path: Path, header):
    fh = open(path, "w", encoding="utf-8", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    return fh, w


def field_rows(res: ScanResult, only_flagged=False):
    for z, s, v, f in zip(res.points, res.sheets, res.sigma, res.flags):
        if only_flagged and not f:
            continue
        yield [_fmt(z.real), _fmt(z.imag), int(s), _fmt(v), int(bool(f))]


def write_clusters(path: Path, clusters):
    fh, w = _open_csv(path, CLUSTER_HEADER)
    with fh:
        for c in clusters:
            w.writerow([_fmt(c.centroid.real), _fmt(c.centroid.imag), c.count, _fmt(c.min_sigma)])


def write_manifest(path: Path, cfg: RunConfig, extra: dict):
    import scipy

    doc = {
        "config": cfg.as_dict(),
        "versions": {"rescan": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
    }
    doc.update(extra)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from exc
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def run_scan(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    p = potential_for(cfg)
    n = align_n(cfg)
    rule = rule_for(cfg)
    workers = resolve_workers(cfg.workers)
    out = _outdir(cfg)

    fh, writer = _open_csv(out / "field.csv", FIELD_HEADER)
    written = set()

    def stream(tile, res):
        # checkpoint: each finished tile is flushed before the next starts
        for row, s, (a, b) in zip(field_rows(res), res.sheets, res.lattice):
            key = (int(s), int(a), int(b))
            if key not in written:
                written.add(key)
                writer.writerow(row)
        fh.flush()

    with fh:
        if cfg.mode == "box":
            if cfg.box is None:
                raise ConfigError("box mode needs box = re_min,re_max,im_min,im_max")
            box = Box(*cfg.box)
            h = cfg.spacing or default_spacing(box)
            res = theta_set(p, n, LatticeSpec(box, h, 0, cfg.exclusion), rule, workers, cfg.mirror)
            res.meta["tiles"] = [[1, 1]]
            stream(None, res)
        elif cfg.mode == "tiles":
            depth = cfg.tiles if p.d % 2 else (cfg.sheet_depth or cfg.tiles)
            if depth is None:
                raise ConfigError("tiles mode needs tiles (odd d) or sheet_depth (even d)")
            h = cfg.spacing or default_spacing(Box(0, 1, 0, 1), TARGET_POINTS // max(depth, 1))
            res = gamma_n(p, n, depth, h, rule, workers, cfg.exclusion, on_tile=stream, mirror=cfg.mirror)
        else:
            raise ConfigError(f"mode must be 'box' or 'tiles', got {cfg.mode!r}")

    fh, w = _open_csv(out / "flagged.csv", FIELD_HEADER)
    with fh:
        w.writerows(field_rows(res, only_flagged=True))
    clusters = cluster_flags(res)
    write_clusters(out / "clusters.csv", clusters)
    figure = None
    if cfg.figure:
        from .plotting import plot_field

        figure = str(plot_field(res, out / "field.png", clusters=clusters))
    meta = {k: v for k, v in res.meta.items() if k != "wall_time"}
    write_manifest(out / "manifest.json", cfg, {
        "n_requested": cfg.n, "n_used": n, "spacing_used": h, "workers_used": workers,
        "scan": meta, "flagged": int(res.flags.sum()), "clusters": len(clusters),
        "outputs": ["field.csv", "flagged.csv", "clusters.csv"] + (["field.png"] if figure else []),
        "wall_time": time.perf_counter() - t0,
    })
    print(f"scanned {len(res)} points at n={n}, h={h:g}: {int(res.flags.sum())} flagged, "
          f"{len(clusters)} clusters -> {out}")
    return EXIT_OK


def run_oracle(cfg: RunConfig) -> int:
    if cfg.box is None:
        raise ConfigError("oracle needs box = re_min,re_max,im_min,im_max")
    spec = SquareWellSpec(cfg.V0, cfg.a)
    box = Box(*cfg.box)
    if box.contains(0j):
        raise ConfigError("oracle box must avoid z = 0")
    zeros = [] if cfg.V0 == 0 else find_zeros(spec, box)
    out = _outdir(cfg)
    fh, w = _open_csv(out / "zeros.csv", ORACLE_HEADER)
    with fh:
        for z in zeros:
            w.writerow([_fmt(z.real), _fmt(z.imag), _fmt(abs(well_determinant(spec, z)))])
    print(f"{len(zeros)} zeros in {box.as_tuple()} -> {out / 'zeros.csv'}")
    return EXIT_OK


def run_diagnostics(cfg: RunConfig) -> int:
    if len(cfg.n_list) < 2:
        raise ConfigError("diagnostics need at least two values in n_list")
    if cfg.box is None:
        raise ConfigError("diagnostics need box = re_min,re_max,im_min,im_max")
    p = potential_for(cfg)
    box = Box(*cfg.box)
    n_list = [aligned_resolution(n, cfg.M) for n in cfg.n_list]
    h = cfg.spacing or default_spacing(box)
    rule = rule_for(cfg)
    table, results = convergence_diagnostic(p, n_list, box, h, rule, resolve_workers(cfg.workers),
                                            keep_results=True, mirror=cfg.mirror)
    out = _outdir(cfg)
    fh, w = _open_csv(out / "diagnostics.csv", ["n_prev", "n", "aw_distance"])
    with fh:
        for prev, (n, dist) in zip(n_list, table):
            w.writerow([prev, n, _fmt(dist)])
    fh, w = _open_csv(out / "suspects.csv", ["n"] + CLUSTER_HEADER + ["suspect"])
    lines = ["# convergence and aliasing report", f"box: {list(box.as_tuple())}", f"spacing: {h:g}", ""]
    for prev, (n, dist) in zip(n_list, table):
        lines.append(f"d_AW(n={prev}, n={n}) = {dist:.6g}")
    lines.append("")
    with fh:
        for n, res in zip(n_list, results):
            clusters = cluster_flags(res)
            suspects = set(id(c) for c in suspect_clusters(clusters, n))
            bound = 0.8 * math.pi * n
            lines.append(f"n={n}: {len(clusters)} clusters, {len(suspects)} suspect (|Re z| > {bound:.4g})")
            for c in clusters:
                flag = id(c) in suspects
                w.writerow([n, _fmt(c.centroid.real), _fmt(c.centroid.imag), c.count, _fmt(c.min_sigma),
                            int(flag)])
                lines.append(f"  {'SUSPECT' if flag else 'ok     '} {c.centroid.real:+.5f}{c.centroid.imag:+.5f}i "
                             f"count={c.count} min_sigma={c.min_sigma:.3e}")
            dips = local_minima(res, None)
            if dips:
                lines.append("  deepest unflagged sigma minima:")
                lines += [f"    {z.real:+.5f}{z.imag:+.5f}i sigma={s:.4g}" for z, s in dips[:5]]
            far = [t for t in dips if abs(t[0].real) > bound][:5]
            if far:
                lines.append(f"  deepest unflagged sigma minima beyond |Re z| > {bound:.4g}:")
                lines += [f"    {z.real:+.5f}{z.imag:+.5f}i sigma={s:.4g}" for z, s in far]
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_manifest(out / "manifest.json", cfg, {"n_used": n_list, "spacing_used": h,
                                                "distances": [[n, d] for n, d in table]})
    print("\n".join(lines))
    return EXIT_OK


def run_fuzz(cfg: RunConfig) -> int:
    rep = lemma_fuzz(cfg.trials, cfg.max_dim, cfg.seed)
    out = _outdir(cfg)
    (out / "fuzz.json").write_text(json.dumps(rep.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{rep.trials} trials, seed {rep.seed}: {rep.total_violations} violations {rep.violations}")
    return EXIT_OK if rep.total_violations == 0 else EXIT_VIOLATION


COMMANDS = {"scan": run_scan, "oracle": run_oracle, "diagnostics": run_diagnostics, "fuzz": run_fuzz}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rescan", description="Resonance scans by discretised resolvent norms.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--box", nargs=4, type=float, metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))

    pot = argparse.ArgumentParser(add_help=False)
    pot.add_argument("--potential", help="builtin name: zero, square_well, square_barrier, gaussian, double_bump")
    pot.add_argument("--potential-file", dest="potential_file", help="sampled potential (x..., re, im per line)")
    pot.add_argument("--param", action="append", metavar="NAME=VALUE", help="builtin parameter, repeatable")
    pot.add_argument("-M", dest="M", type=float, help="side of the support cube Q_M")
    pot.add_argument("-d", dest="d", type=int, choices=(1, 2, 3))
    pot.add_argument("--spacing", "-H", dest="spacing", type=float, help="lattice spacing h")
    pot.add_argument("--exclusion", type=float, help="radius of the excluded disc around 0")
    pot.add_argument("--cutoff", "-C", dest="cutoff", type=float)
    pot.add_argument("--theoretical", action="store_const", const=True,
                     help="use the n-dependent cutoff 1/(2 sqrt(n^(-1/d)))")
    pot.add_argument("--no-mirror", dest="mirror", action="store_const", const=False,
                     help="evaluate both members of each pair z, -conj z")
    pot.add_argument("--workers", "-j", dest="workers", type=int)

    p = sub.add_parser("scan", parents=[common, pot], help="flag lattice points with small sigma_min")
    p.add_argument("--manifest", help="re-run the configuration stored in a manifest.json")
    p.add_argument("-n", dest="n", type=int)
    p.add_argument("--mode", choices=("box", "tiles"))
    p.add_argument("--tiles", type=int)
    p.add_argument("--sheet-depth", dest="sheet_depth", type=int)
    p.add_argument("--figure", action="store_const", const=True, help="also render field.png (needs matplotlib)")

    p = sub.add_parser("oracle", parents=[common], help="square-well resonances by the argument principle")
    p.add_argument("--V0", type=float)
    p.add_argument("-a", dest="a", type=float)

    p = sub.add_parser("diagnostics", parents=[common, pot], help="Attouch-Wets convergence and suspect clusters")
    p.add_argument("--n-list", dest="n_list", nargs="+", type=int)

    p = sub.add_parser("fuzz", parents=[common], help="random checks of the resolvent-norm inequalities")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-dim", dest="max_dim", type=int)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, EmptyLattice) as exc:
        print(f"rescan: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError) as exc:
        print(f"rescan: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"rescan: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RescanError as exc:
        print(f"rescan: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
