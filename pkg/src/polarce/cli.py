"""Command-line front end.

Exit codes: 0 success, 1 usage or domain error, 2 atom or output budget
exceeded, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from ._numeric import Backend
from .bsc import closed_form_k3, closed_form_k4, recursive_bhatt
from .density import ChannelSpec, DensityError, load_channel_spec
from .engine import AtomOverflowError, EngineConfig, all_bhattacharyya, select_info_set
from .oracle import OutputOverflowError, brute_force_z
from .patterns import BitPattern

__all__ = [
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_RESOURCE",
    "EXIT_VERIFY",
    "SCHEMA_VERSION",
    "CacheError",
    "ReliabilityTable",
    "build_table",
    "cmd_cache",
    "cmd_construct",
    "cmd_sweep",
    "cmd_verify",
    "load_cache",
    "main",
    "sweep_grid",
]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RESOURCE = 2
EXIT_VERIFY = 3
SCHEMA_VERSION = 1
MAX_LEVEL = 24
Z_SLACK = 1e-12

CLOSED_FORM_TOL = 1e-10
BRUTE_FORCE_TOL = 1e-9
RECURSION_TOL = 1e-10
DEFAULT_VERIFY_P = (0.05, 0.1, 0.2, 0.3, 0.45)


class CacheError(ValueError):
    """A cache file is malformed or written with another schema version."""


class _UsageError(Exception):
    pass


@dataclass
class ReliabilityTable:
    """Z of every bit-channel at one level, with provenance metadata."""

    channel: ChannelSpec
    level: int
    rows: list[tuple[int, str, float]]
    metadata: dict = field(default_factory=dict)

    @property
    def z(self) -> list[float]:
        return [r[2] for r in self.rows]

    def validate(self) -> None:
        if self.level < 1:
            raise CacheError("level must be at least 1")
        if len(self.rows) != 2**self.level:
            raise CacheError(f"expected {2**self.level} rows, found {len(self.rows)}")
        for expect, (index, pattern, z) in enumerate(self.rows, start=1):
            if index != expect:
                raise CacheError(f"rows must be complete and index-sorted; row {expect} has index {index}")
            if pattern != str(BitPattern.from_index(index, self.level)):
                raise CacheError(f"row {index} has pattern {pattern!r}, which does not match its index")
            if not (isinstance(z, float) and -Z_SLACK <= z <= 1 + Z_SLACK):
                raise CacheError(f"row {index} has z={z!r} outside [0, 1]")

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "channel": self.channel.to_dict(),
            "level": self.level,
            "rows": [{"index": i, "pattern": pat, "z": z} for i, pat, z in self.rows],
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReliabilityTable":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CacheError(f"cache is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise CacheError("cache root must be an object")
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise CacheError(f"unsupported cache schema_version {version!r}; this build reads version {SCHEMA_VERSION}")
        try:
            channel = ChannelSpec.from_dict(doc["channel"])
            level = int(doc["level"])
            rows = [(int(r["index"]), str(r["pattern"]), r["z"]) for r in doc["rows"]]
            metadata = dict(doc.get("metadata", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise CacheError(f"malformed cache: {exc}") from None
        table = cls(channel, level, rows, metadata)
        table.validate()
        return table


def _metadata(backend: Backend, config: EngineConfig) -> dict:
    return {
        "backend": backend.value,
        "merge_tolerance": config.tol(backend),
        "atom_cap": config.atom_cap,
        "version": __version__,
    }


def build_table(channel: ChannelSpec, level: int, backend: Backend, config: EngineConfig) -> ReliabilityTable:
    z = all_bhattacharyya(channel.density(backend), level, config)
    rows = [(i, str(BitPattern.from_index(i, level)), float(v)) for i, v in enumerate(z, start=1)]
    return ReliabilityTable(channel, level, rows, _metadata(backend, config))


def load_cache(path: str | Path) -> ReliabilityTable:
    return ReliabilityTable.from_json(Path(path).read_text(encoding="utf-8"))


def _write_text(text: str, out_path: str | None) -> None:
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _check_level(level: int) -> None:
    if not 1 <= level <= MAX_LEVEL:
        raise _UsageError(f"level must lie in 1..{MAX_LEVEL}")


def cmd_construct(
    channel: ChannelSpec,
    level: int,
    *,
    gamma: float | None = None,
    rate: float | None = None,
    out_path: str | None = None,
    backend: Backend = Backend.FLOAT,
    config: EngineConfig = EngineConfig(),
) -> int:
    """Write ``index,pattern,z,selected`` for every bit-channel and report the set size."""
    _check_level(level)
    table = build_table(channel, level, backend, config)
    chosen = set(select_info_set(table.z, threshold=gamma, rate=rate))
    rows = [(i, pat, z, int(i in chosen)) for i, pat, z in table.rows]
    _write_text(_csv_text(("index", "pattern", "z", "selected"), rows), out_path)
    stream = sys.stderr if out_path in (None, "-") else sys.stdout
    print(f"selected {len(chosen)} of {2**level}", file=stream)
    return EXIT_OK


def _verify_channel(channel: ChannelSpec, level: int, brute_level: int, config: EngineConfig) -> list[dict]:
    checks = []
    z = all_bhattacharyya(channel.density(), level, config)

    def record(kind: str, index: int, pat_level: int, got: float, want: float, tol: float):
        checks.append(
            {
                "check": kind,
                "channel": channel.label(),
                "level": pat_level,
                "index": index,
                "pattern": str(BitPattern.from_index(index, pat_level)),
                "engine": got,
                "reference": want,
                "error": abs(got - want),
                "tolerance": tol,
                "ok": abs(got - want) <= tol,
            }
        )

    if channel.kind == "bsc":
        p = float(channel.param)
        forms = {3: closed_form_k3, 4: closed_form_k4}
        if level in forms:
            for i, v in enumerate(z, start=1):
                record("closed_form", i, level, v, float(forms[level](i, p)), CLOSED_FORM_TOL)
        for i, v in enumerate(z, start=1):
            record("recursion", i, level, v, recursive_bhatt(BitPattern.from_index(i, level), p), RECURSION_TOL)
    for k in range(1, brute_level + 1):
        zk = z if k == level else all_bhattacharyya(channel.density(), k, config)
        for i, v in enumerate(zk, start=1):
            record("brute_force", i, k, v, brute_force_z(channel, BitPattern.from_index(i, k)), BRUTE_FORCE_TOL)
    return checks


def cmd_verify(
    level: int,
    channels: Sequence[ChannelSpec],
    *,
    brute_level: int | None = None,
    out_path: str | None = None,
    config: EngineConfig = EngineConfig(),
) -> int:
    """Compare the engine with closed forms, the recursion and brute force; emit a JSON report."""
    _check_level(level)
    if brute_level is None:
        brute_level = min(level, 3)
    if not 0 <= brute_level <= 4:
        raise _UsageError("brute-force level must lie in 0..4")
    start = time.perf_counter()
    checks = []
    for ch in channels:
        checks.extend(_verify_channel(ch, level, brute_level, config))
    failures = [c for c in checks if not c["ok"]]
    report = {
        "ok": not failures,
        "level": level,
        "brute_force_level": brute_level,
        "channels": [ch.label() for ch in channels],
        "comparisons": len(checks),
        "failures": len(failures),
        "max_error": max((c["error"] for c in checks), default=0.0),
        "first_failure": failures[0] if failures else None,
        "seconds": round(time.perf_counter() - start, 3),
        "checks": checks,
    }
    _write_text(json.dumps(report, indent=1) + "\n", out_path)
    if failures:
        f = failures[0]
        print(
            f"verification failed: {f['check']} {f['channel']} index {f['index']} error {f['error']!r}",
            file=sys.stderr,
        )
        return EXIT_VERIFY
    return EXIT_OK


def sweep_grid(family: str, points: int) -> list[float]:
    """``points`` equally spaced interior values of the family's parameter range."""
    if points < 1:
        raise _UsageError("need at least one grid point")
    upper = 0.5 if family == "bsc" else 1.0
    return [upper * j / (points + 1) for j in range(1, points + 1)]


def _family_channel(family: str, value: float) -> ChannelSpec:
    if family == "bsc":
        return ChannelSpec.bsc(value)
    if family == "bec":
        return ChannelSpec.bec(value)
    raise _UsageError(f"unknown channel family {family!r}; use bsc or bec")


def cmd_sweep(
    family: str,
    grid: Sequence[float],
    level: int,
    *,
    out_path: str | None = None,
    backend: Backend = Backend.FLOAT,
    config: EngineConfig = EngineConfig(),
) -> int:
    """Long-format ``param,index,z`` table over a parameter grid."""
    _check_level(level)
    rows = []
    for value in grid:
        z = all_bhattacharyya(_family_channel(family, value).density(backend), level, config)
        rows.extend((float(value), i, float(v)) for i, v in enumerate(z, start=1))
    _write_text(_csv_text(("param", "index", "z"), rows), out_path)
    return EXIT_OK


def cmd_cache(
    channel: ChannelSpec,
    level: int,
    out_path: str | None,
    *,
    backend: Backend = Backend.FLOAT,
    config: EngineConfig = EngineConfig(),
) -> int:
    """Store the reliability table of one channel as versioned JSON."""
    _check_level(level)
    _write_text(build_table(channel, level, backend, config).to_json(), out_path)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("float", "rational"), default="float", help="number type (default float)")
    p.add_argument("--atom-cap", type=_positive_int, default=10**6, help="interior atom budget (default 1000000)")


def _add_channel(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--channel", help="bsc:P, bec:EPS or an inline JSON channel object")
    g.add_argument("--channel-file", help="JSON file describing the channel")


def _channel_from(args) -> ChannelSpec:
    if getattr(args, "channel_file", None):
        return load_channel_spec(args.channel_file)
    return ChannelSpec.parse(args.channel)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="polarce",
        description="Exact Bhattacharyya parameters of polar bit-channels for discrete symmetric channels.",
        epilog="exit codes: 0 success, 1 usage or domain error, 2 atom/output budget exceeded, "
        "3 verification failure",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("construct", help="reliability table and information set")
    _add_channel(p)
    p.add_argument("--level", type=_positive_int, required=True)
    crit = p.add_mutually_exclusive_group(required=True)
    crit.add_argument("--gamma", type=float, help="select bit-channels with Z < GAMMA")
    crit.add_argument("--rate", type=float, help="select the floor(RATE * N) most reliable bit-channels")
    p.add_argument("--out", help="CSV output path (default stdout)")
    _add_common(p)

    p = sub.add_parser("verify", help="cross-check the engine against independent references")
    p.add_argument("--level", type=_positive_int, default=3)
    p.add_argument("--channel", action="append", help="channel to check (repeatable); default: BSC grid")
    p.add_argument("--channel-file", action="append", default=[], help="JSON channel file (repeatable)")
    p.add_argument("--brute-level", type=int, help="largest level compared with brute force (default min(level, 3))")
    p.add_argument("--out", help="JSON report path (default stdout)")
    _add_common(p)

    p = sub.add_parser("sweep", help="Z of every bit-channel over a parameter grid")
    p.add_argument("--family", choices=("bsc", "bec"), required=True)
    p.add_argument("--level", type=_positive_int, required=True)
    grid = p.add_mutually_exclusive_group()
    grid.add_argument("--points", type=_positive_int, default=20, help="equally spaced interior points (default 20)")
    grid.add_argument("--grid", help="comma-separated parameter values")
    p.add_argument("--out", help="CSV output path (default stdout)")
    _add_common(p)

    p = sub.add_parser("cache", help="store a reliability table as JSON")
    _add_channel(p)
    p.add_argument("--level", type=_positive_int, required=True)
    p.add_argument("--out", required=True, help="JSON output path")
    _add_common(p)

    p = sub.add_parser("load", help="validate a cached table and print it as CSV")
    p.add_argument("path")
    return parser


def _dispatch(args) -> int:
    config = EngineConfig(atom_cap=getattr(args, "atom_cap", 10**6))
    backend = Backend.parse(getattr(args, "backend", "float"))
    if args.command == "construct":
        return cmd_construct(
            _channel_from(args), args.level, gamma=args.gamma, rate=args.rate, out_path=args.out,
            backend=backend, config=config,
        )
    if args.command == "verify":
        channels = [ChannelSpec.parse(c) for c in args.channel or []]
        channels += [load_channel_spec(f) for f in args.channel_file]
        if not channels:
            channels = [ChannelSpec.bsc(p) for p in DEFAULT_VERIFY_P]
        return cmd_verify(args.level, channels, brute_level=args.brute_level, out_path=args.out, config=config)
    if args.command == "sweep":
        if args.grid:
            values = [float(v) for v in args.grid.split(",") if v.strip()]
        else:
            values = sweep_grid(args.family, args.points)
        return cmd_sweep(args.family, values, args.level, out_path=args.out, backend=backend, config=config)
    if args.command == "cache":
        return cmd_cache(_channel_from(args), args.level, args.out, backend=backend, config=config)
    table = load_cache(args.path)
    sys.stdout.write(_csv_text(("index", "pattern", "z"), table.rows))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except (AtomOverflowError, OutputOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (_UsageError, DensityError, CacheError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
