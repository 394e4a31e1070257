"""Text formats written by the command line tools.

``state.txt``::

    # sector-hilbert v0.1.0 state
    m 3
    R 512
    eps 0.02
    kernel cubic
    nodes 7
    n k j p q l eps_achieved sector
    1 0 1 5 -5 8 0 4
    ...
    array E_1 bool 512 512
    <512 lines of 512 characters 0/1>
    array g_1 float 512 512
    <512 lines of 512 space separated values, 17 significant digits>
    ...

The node table comes first; the ``array`` blocks (masks ``E_n`` and smoothed
indicators ``g_n``) follow and may be omitted.  ``f_n`` and ``f~_n`` are
recomputed from ``(p, q, g, E, m)`` on load.

CSV files start with the comment line ``# sector-hilbert v<version>`` followed
by a fixed header.  Floats are written with 17 significant digits; empty
fields mean "not available".
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .construction import CertifyReport, ConstructionNode, ConstructionState, SQRT_AREA_Q, default_kernel
from .experiment import GrowthTable
from .grid import GridField, lp_norm, make_grid
from .tree import double_index

__all__ = [
    "VERSION_LINE",
    "fmt",
    "atomic_write",
    "write_state",
    "read_state",
    "certify_csv",
    "growth_csv",
    "growth_header",
]

VERSION_LINE = f"# sector-hilbert v{__version__}"
CERTIFY_HEADER = ("check_id", "node", "value", "bound", "pass")


def fmt(x) -> str:
    """17 significant digits; integers verbatim; NaN and None as empty."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(VERSION_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def certify_csv(report: CertifyReport | None, extra_rows: Sequence[Sequence] = ()) -> str:
    rows = [] if report is None else [
        (r.check_id, r.node, r.value, r.bound, bool(r.passed)) for r in report.rows
    ]
    return _csv_text(CERTIFY_HEADER, list(rows) + list(extra_rows))


def growth_header(ps: Sequence[float]) -> list[str]:
    cols = ["m", "N", "R", "eps", "ratio_T"]
    cols += [f"ratio_H_p{fmt(p)}" for p in ps]
    cols += ["ratio_over_sqrtlog", "level_measure", "wall_ms", "status"]
    return cols


def growth_csv(table: GrowthTable, timing: bool = False) -> str:
    """One row per depth; ``wall_ms`` is left empty unless ``timing`` (it is not reproducible)."""
    rows = []
    for r in table.records:
        row = [r.m, r.N, r.R, r.eps, r.ratio_T]
        row += [r.ratio_H.get(p, math.nan) for p in table.ps]
        row += [r.ratio_over_sqrtlog, r.level_measure, 1e3 * r.wall_time if timing else None, r.status]
        rows.append(row)
    return _csv_text(growth_header(table.ps), rows)


def write_state(path, state: ConstructionState, payload: bool = True) -> None:
    R = state.grid.resolution
    lines = [
        f"{VERSION_LINE} state",
        f"m {state.m}",
        f"R {R}",
        f"eps {fmt(state.eps)}",
        f"kernel {state.kernel.name}",
        f"nodes {len(state.nodes)}",
        "n k j p q l eps_achieved sector",
    ]
    for nd in state.nodes:
        lines.append(
            f"{nd.n} {nd.k} {nd.j} {nd.p} {nd.q} {nd.l} {fmt(nd.eps_achieved) or '0'} {nd.sector_index}"
        )
    out = "\n".join(lines) + "\n"
    if payload:
        parts = [out]
        for nd in state.nodes:
            parts.append(f"array E_{nd.n} bool {R} {R}\n")
            parts.append("\n".join("".join("1" if v else "0" for v in row) for row in nd.E) + "\n")
            parts.append(f"array g_{nd.n} float {R} {R}\n")
            parts.append("\n".join(" ".join(format(v, ".17g") for v in row) for row in nd.g.values) + "\n")
        out = "".join(parts)
    atomic_write(path, out)


def read_state(path, sectors=None) -> dict:
    """Parse ``state.txt``; returns header values, node records and any arrays.

    When the payload is present and ``sectors`` (node order) is given, a full
    :class:`ConstructionState` is rebuilt under the key ``"state"``.
    """
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# sector-hilbert"):
        raise ValueError(f"{path}: missing version line")
    it = iter(text[1:])
    header = {}
    for key in ("m", "R", "eps", "kernel", "nodes"):
        k, v = next(it).split(maxsplit=1)
        if k != key:
            raise ValueError(f"{path}: expected {key!r}, found {k!r}")
        header[key] = v
    m, R, count = int(header["m"]), int(header["R"]), int(header["nodes"])
    eps = float(header["eps"])
    if next(it).split() != ["n", "k", "j", "p", "q", "l", "eps_achieved", "sector"]:
        raise ValueError(f"{path}: bad node table header")
    records = []
    for _ in range(count):
        n, k, j, p, q, l, e, s = next(it).split()
        records.append(dict(n=int(n), k=int(k), j=int(j), p=int(p), q=int(q), l=int(l),
                            eps_achieved=float(e), sector=int(s)))
    arrays = {}
    for line in it:
        if not line.strip():
            continue
        tag, name, kind, r0, r1 = line.split()
        if tag != "array":
            raise ValueError(f"{path}: unexpected line {line[:40]!r}")
        rows = [next(it) for _ in range(int(r0))]
        if kind == "bool":
            arrays[name] = np.array([[c == "1" for c in row] for row in rows], dtype=bool)
        else:
            arrays[name] = np.array([[float(v) for v in row.split()] for row in rows])
    result = dict(m=m, R=R, eps=eps, kernel=header["kernel"], nodes=records, arrays=arrays)

    if sectors is not None and arrays:
        grid = make_grid(R)
        X, Y = grid.mesh
        nodes = []
        for rec in records:
            n = rec["n"]
            E = arrays[f"E_{n}"]
            g = GridField(grid, arrays[f"g_{n}"])
            f = GridField(grid, np.exp(1j * (rec["p"] * X + rec["q"] * Y)) * g.values / math.sqrt(m))
            k, j = double_index(n)
            nodes.append(ConstructionNode(
                n=n, k=k, j=j, sector_index=rec["sector"], E=E, g=g, l=rec["l"], p=rec["p"],
                q=rec["q"], eps_achieved=lp_norm(g - E.astype(float), 2) / SQRT_AREA_Q,
                f=f, f_tilde=GridField(grid, f.values.real * E)))
        result["state"] = ConstructionState(
            m, eps, grid, tuple(sectors), nodes, default_kernel(),
            tuple(rec["sector"] for rec in records))
    return result
