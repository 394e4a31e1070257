"""``sector-hilbert``: batch front end for construction, growth sweeps and self-tests.

Every option may also come from a flat ``key = value`` config file given with
``--config``; keys are the long option names without dashes (``m-min`` or
``m_min``).  Command-line flags override the file.  The merged configuration
is validated before any computation starts.

Exit codes: 0 success, 1 a construction, sweep row or self-test failed,
2 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .construction import ConstructionError, certify
from .experiment import DualPathError, direction_generators, extremal_function, growth_sweep
from .grid import make_grid
from .io import _csv_text, atomic_write, certify_csv, growth_csv, write_state

__all__ = ["main", "RunConfig", "parse_config_file", "build_parser"]

DIRECTION_KINDS = ("uniform", "lacunary", "file")

DEFAULTS = {
    "construct": dict(m=3, grid=512, eps=0.02, directions="uniform", direction_file=None,
                      out=".", payload=True),
    "growth": dict(m_min=2, m_max=6, grid=1024, eps=0.02, directions="uniform",
                   direction_file=None, p="1,2", out=".", plot=True, timing=False),
    "selftest": dict(seed=0, out="."),
}

_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}


class UsageError(ValueError):
    """Invalid configuration; reported with exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    """Fully validated settings of one command."""

    command: str
    out: Path
    m: int | None = None
    m_range: tuple[int, ...] = ()
    R: int | None = None
    eps: float | None = None
    directions: str = "uniform"
    direction_file: Path | None = None
    ps: tuple[float, ...] = (1.0, 2.0)
    seed: int = 0
    plot: bool = True
    payload: bool = True
    timing: bool = False


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment; keys are normalised to underscores."""
    result = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise UsageError(f"{path}:{lineno}: empty key")
        result[key.replace("-", "_")] = value
    return result


def _as_int(key, v) -> int:
    if isinstance(v, bool):
        raise UsageError(f"{key}: expected an integer")
    if isinstance(v, int):
        return v
    try:
        return int(str(v).strip())
    except ValueError:
        raise UsageError(f"{key}: expected an integer, got {v!r}") from None


def _as_float(key, v) -> float:
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise UsageError(f"{key}: expected a number, got {v!r}") from None
    if not math.isfinite(x):
        raise UsageError(f"{key}: must be finite")
    return x


def _as_bool(key, v) -> bool:
    if isinstance(v, bool):
        return v
    try:
        return _BOOL_WORDS[str(v).strip().lower()]
    except KeyError:
        raise UsageError(f"{key}: expected true/false, got {v!r}") from None


def _grid(v) -> int:
    R = _as_int("grid", v)
    if R < 8 or R & (R - 1):
        raise UsageError(f"grid: power of two required (>= 8), got {R}")
    return R


def _eps(v) -> float:
    e = _as_float("eps", v)
    if e <= 0:
        raise UsageError(f"eps must be positive, got {e}")
    return e


def _depth(key, v) -> int:
    m = _as_int(key, v)
    if m < 1:
        raise UsageError(f"{key}: depth must be >= 1, got {m}")
    if m > 20:
        raise UsageError(f"{key}: depth {m} is beyond any feasible grid")
    return m


def _directions(opts: dict, N_values) -> tuple[str, Path | None]:
    kind = str(opts["directions"]).strip()
    if kind not in DIRECTION_KINDS:
        raise UsageError(f"directions must be one of {', '.join(DIRECTION_KINDS)}, got {kind!r}")
    path = opts.get("direction_file")
    if kind == "file":
        if not path:
            raise UsageError("directions = file needs direction-file")
        path = Path(path)
        try:
            for N in N_values:
                direction_generators("file", N, path)
        except OSError as exc:
            raise UsageError(f"direction-file: {exc.strerror}: {path}") from None
        except ValueError as exc:
            raise UsageError(f"direction-file: {exc}") from None
        return kind, path
    return kind, None


def _ps(v) -> tuple[float, ...]:
    if isinstance(v, (tuple, list)):
        items = list(v)
    else:
        items = [s for s in str(v).split(",") if s.strip()]
    if not items:
        raise UsageError("p: need at least one exponent")
    ps = tuple(_as_float("p", s) for s in items)
    for p in ps:
        if p < 1:
            raise UsageError(f"p: exponents must be >= 1, got {p}")
    if len(set(ps)) != len(ps):
        raise UsageError("p: duplicate exponent")
    return ps


def make_config(command: str, opts: dict) -> RunConfig:
    """Validate merged options (defaults < file < flags) into a :class:`RunConfig`."""
    known = set(DEFAULTS[command])
    unknown = sorted(set(opts) - known)
    if unknown:
        raise UsageError(f"unknown option(s) for {command}: {', '.join(unknown)}")
    merged = {**DEFAULTS[command], **opts}
    out = Path(merged["out"])

    if command == "construct":
        m = _depth("m", merged["m"])
        kind, path = _directions(merged, [2**m])
        return RunConfig(command, out, m=m, R=_grid(merged["grid"]), eps=_eps(merged["eps"]),
                         directions=kind, direction_file=path,
                         payload=_as_bool("payload", merged["payload"]))
    if command == "growth":
        lo = _depth("m-min", merged["m_min"])
        hi = _as_int("m-max", merged["m_max"])
        if hi < lo:
            raise UsageError(f"empty m range: m-min {lo} > m-max {hi}")
        _depth("m-max", hi)
        m_range = tuple(range(lo, hi + 1))
        kind, path = _directions(merged, [2**m for m in m_range])
        return RunConfig(command, out, m_range=m_range, R=_grid(merged["grid"]),
                         eps=_eps(merged["eps"]), directions=kind, direction_file=path,
                         ps=_ps(merged["p"]), plot=_as_bool("plot", merged["plot"]),
                         timing=_as_bool("timing", merged["timing"]))
    if command == "selftest":
        seed = _as_int("seed", merged["seed"])
        if seed < 0:
            raise UsageError("seed must be nonnegative")
        return RunConfig(command, out, seed=seed)
    raise UsageError(f"unknown command {command!r}")


# --------------------------------------------------------------------- commands


def cmd_construct(cfg: RunConfig) -> int:
    U = direction_generators(cfg.directions, 2**cfg.m, cfg.direction_file)
    grid = make_grid(cfg.R)
    cfg.out.mkdir(parents=True, exist_ok=True)
    try:
        _, state = extremal_function(U, grid, cfg.eps)
    except ConstructionError as exc:
        atomic_write(cfg.out / "certify.csv",
                     certify_csv(None, [("construction", exc.node or 0, None, None, False)]))
        print(f"construction failed: {exc}", file=sys.stderr)
        return 1
    report = certify(state)
    write_state(cfg.out / "state.txt", state, payload=cfg.payload)
    atomic_write(cfg.out / "certify.csv", certify_csv(report))
    print(f"{len(state.nodes)} nodes, empirical c1 = {report.c1:.6g}, "
          f"{len(report.failures())} of {len(report.rows)} checks failed")
    for r in report.failures():
        print(f"FAIL {r.check_id} node={r.node} value={r.value:.6g} bound={r.bound:.6g}",
              file=sys.stderr)
    return 0 if report.passed else 1


def _plot_growth(table, out: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    plt.rcParams["svg.hashsalt"] = "sector-hilbert"
    ok = [r for r in table.ok if math.isfinite(r.ratio_T)]
    fig, ax = plt.subplots(figsize=(5, 4))
    if ok:
        x = np.array([math.sqrt(math.log(r.N)) for r in ok])
        y = np.array([r.ratio_T for r in ok])
        ax.plot(x, y, "o", label="ratio_T")
        for r, xi, yi in zip(ok, x, y):
            ax.annotate(f"m={r.m}", (xi, yi), textcoords="offset points", xytext=(4, -10), fontsize=8)
        if len(ok) >= 2:
            a, b = np.polyfit(x, y, 1)
            xs = np.linspace(x.min(), x.max(), 2)
            ax.plot(xs, a * xs + b, "-", label=f"fit: {a:.3g} x + {b:.3g}")
    else:
        ax.text(0.5, 0.5, "no successful rows", ha="center", va="center", transform=ax.transAxes)
    ax.set_xlabel("sqrt(log N)")
    ax.set_ylabel("||T_U f||_1 / ||f||_2")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(out / "growth.svg", format="svg", metadata={"Date": None})
    plt.close(fig)

    with_field = [r for r in ok if r.T_U is not None]
    if with_field:
        r = max(with_field, key=lambda rec: rec.m)
        fig, ax = plt.subplots(figsize=(5, 4.4))
        im = ax.imshow(r.T_U.values.T, origin="lower", extent=(-math.pi, math.pi, -math.pi, math.pi),
                       cmap="viridis")
        fig.colorbar(im, ax=ax, label="T_U f")
        ax.set_title(f"T_U f, m = {r.m}, R = {r.R}")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        fig.tight_layout()
        fig.savefig(out / "tu_heatmap.png", format="png", metadata={"Software": None})
        plt.close(fig)


def cmd_growth(cfg: RunConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    table = growth_sweep(cfg.m_range, cfg.R, cfg.eps, cfg.directions, cfg.ps, cfg.direction_file)
    atomic_write(cfg.out / "growth.csv", growth_csv(table, timing=cfg.timing))
    for r in table.records:
        if r.status == "ok":
            print(f"m={r.m} ratio_T={r.ratio_T:.6g} level={r.level_measure:.6g}")
        else:
            print(f"m={r.m} failed: {r.message}", file=sys.stderr)
    if cfg.plot:
        _plot_growth(table, cfg.out)
    return 0 if table.all_ok else 1


def cmd_selftest(cfg: RunConfig) -> int:
    from .selftest import SUITES, run_all

    rows = run_all(cfg.seed)
    cfg.out.mkdir(parents=True, exist_ok=True)
    text = _csv_text(("suite", "case", "value", "bound", "pass"),
                     [(r.suite, r.case, r.value, r.bound, bool(r.passed)) for r in rows])
    atomic_write(cfg.out / "selftest.csv", text)
    failed = 0
    for name in SUITES:
        mine = [r for r in rows if r.suite == name]
        bad = [r for r in mine if not r.passed]
        failed += len(bad)
        print(f"{'PASS' if not bad else 'FAIL'} {name}: {len(mine) - len(bad)}/{len(mine)}")
    return 0 if failed == 0 else 1


COMMANDS = {"construct": cmd_construct, "growth": cmd_growth, "selftest": cmd_selftest}


# ----------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="sector-hilbert", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="flat 'key = value' file; flags override it")
        p.add_argument("--out", default=S, help="output directory (default: .)")

    def directions(p):
        p.add_argument("--directions", choices=DIRECTION_KINDS, default=S,
                       help="direction generator (default: uniform)")
        p.add_argument("--direction-file", dest="direction_file", default=S,
                       help="angles in radians, one per line (with --directions file)")

    c = sub.add_parser("construct", help="build and certify the extremal witness for one depth")
    common(c)
    c.add_argument("--m", type=int, default=S, help="depth; N = 2**m directions (default: 3)")
    c.add_argument("--grid", type=int, default=S, help="samples per axis, power of two (default: 512)")
    c.add_argument("--eps", type=float, default=S,
                   help="smoothing tolerance in units of sqrt|Q| (default: 0.02)")
    directions(c)
    c.add_argument("--no-payload", dest="payload", action="store_false", default=S,
                   help="omit mask and field arrays from state.txt")

    g = sub.add_parser("growth", help="sweep depths and record operator growth")
    common(g)
    g.add_argument("--m-min", dest="m_min", type=int, default=S, help="(default: 2)")
    g.add_argument("--m-max", dest="m_max", type=int, default=S, help="(default: 6)")
    g.add_argument("--grid", type=int, default=S, help="(default: 1024)")
    g.add_argument("--eps", type=float, default=S, help="(default: 0.02)")
    directions(g)
    g.add_argument("--p", default=S, help="comma separated exponents for H_U ratios (default: 1,2)")
    g.add_argument("--plot", dest="plot", action="store_true", default=S,
                   help="write growth.svg and tu_heatmap.png (default)")
    g.add_argument("--no-plot", dest="plot", action="store_false", default=S)
    g.add_argument("--timing", action="store_true", default=S,
                   help="fill the wall_ms column (makes the CSV non-reproducible)")

    s = sub.add_parser("selftest", help="run the invariant suites")
    common(s)
    s.add_argument("--seed", type=int, default=S, help="seed for synthetic test data (default: 0)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_opts = parse_config_file(args.config) if args.config else {}
        cfg = make_config(args.command, {**file_opts, **opts})
    except UsageError as exc:
        parser.error(str(exc))
    try:
        return COMMANDS[cfg.command](cfg)
    except (DualPathError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
