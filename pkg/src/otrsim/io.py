"""Flat-file formats: node/matrix CSV, plain PGM heat-map, manifests, price series."""
from __future__ import annotations

import csv
import io
from collections import OrderedDict
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .estimator import OpportunitySeries
from .mesh import Mesh, SweepResult

NODE_HEADER = ("pt", "sl", "mean", "std", "sharpe", "n_pt_exits", "n_sl_exits", "n_horizon_exits")
PRICE_HEADER = ("opportunity_id", "t", "price", "forecast")
MATRIX_CORNER = "pt\\sl"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def fmt(x) -> str:
    """10 significant digits, '.' separator, independent of locale."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    s = format(float(x), ".10g")
    return "0" if s == "-0" else s


def _write_text(path: Path, text: str):
    path = Path(path)
    try:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def node_csv(result: SweepResult) -> str:
    lines = [",".join(NODE_HEADER)]
    for _, i, j, pt, sl in result.mesh.nodes():
        s = result.stats(i, j)
        lines.append(",".join(fmt(v) for v in (pt, sl, s.mean, s.std, s.sharpe, s.n_pt_exits,
                                                 s.n_sl_exits, s.n_horizon_exits)))
    return "\n".join(lines) + "\n"


def matrix_csv(result: SweepResult) -> str:
    sharpe = result.sharpe
    lines = [",".join([MATRIX_CORNER] + [fmt(v) for v in result.mesh.stop_loss_levels])]
    for i, pt in enumerate(result.mesh.profit_taking_levels):
        lines.append(",".join([fmt(pt)] + [fmt(v) for v in sharpe[i]]))
    return "\n".join(lines) + "\n"


def read_matrix_csv(path) -> tuple[Mesh, np.ndarray]:
    """Inverse of :func:`matrix_csv`: the mesh and its Sharpe grid."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise ParseError("matrix CSV needs a header row and at least one body row")
    sl = [float(v) for v in rows[0][1:]]
    pt = [float(r[0]) for r in rows[1:]]
    body = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    if body.shape != (len(pt), len(sl)):
        raise ParseError("ragged matrix CSV")
    return Mesh(pt, sl), body


def gray_levels(values: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Linear map of ``values`` onto 0..255; returns (pixels, lo, hi)."""
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi > lo:
        px = np.rint((values - lo) * (255.0 / (hi - lo)))
    else:
        px = np.zeros_like(values)
    return np.clip(px, 0, 255).astype(np.uint8), lo, hi


def pgm(pixels: np.ndarray, comment: str | None = None) -> str:
    """Plain (ASCII, P2) portable graymap, maxval 255."""
    h, w = pixels.shape
    out = io.StringIO()
    out.write("P2\n")
    if comment:
        out.write(f"# {comment}\n")
    out.write(f"{w} {h}\n255\n")
    for row in pixels:
        out.write(" ".join(str(int(v)) for v in row) + "\n")
    return out.getvalue()


def read_pgm(path) -> np.ndarray:
    tokens = []
    with open(path) as fh:
        for line in fh:
            tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise ParseError("not a plain PGM (P2) file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    if data.size != w * h or data.max(initial=0) > maxval:
        raise ParseError("PGM body does not match its header")
    return data.reshape(h, w)


def manifest(entries: Mapping[str, object]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in entries.items())


def read_manifest(path) -> "OrderedDict[str, str]":
    out = OrderedDict()
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                k, v = line.split("=", 1)
                out[k.strip()] = v.strip()
    return out


def read_price_csv(path) -> list[OpportunitySeries]:
    """Opportunities from a ``opportunity_id,t,price,forecast`` file.

    Rows of one opportunity must be contiguous, with ``t`` running 0, 1, 2, ...
    and a constant forecast.
    """
    with open(path, newline="") as fh:
        return parse_price_rows(csv.reader(fh))


def parse_price_rows(rows: Iterable[list]) -> list[OpportunitySeries]:
    it = iter(rows)
    header = None
    line = 0
    for line, header in enumerate(it, start=1):
        if header and any(c.strip() for c in header):
            break
    else:
        raise ParseError("empty file", line or 1)
    if tuple(c.strip() for c in header) != PRICE_HEADER:
        raise ParseError(f"expected header {','.join(PRICE_HEADER)}", line)

    groups: "OrderedDict[str, tuple[list, float]]" = OrderedDict()
    current = None
    for line, row in enumerate(it, start=line + 1):
        if not row or not any(c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", line)
        oid = row[0].strip()
        try:
            t = int(row[1])
            price = float(row[2])
            forecast = float(row[3])
        except ValueError as exc:
            raise ParseError(str(exc), line) from None
        if not (np.isfinite(price) and np.isfinite(forecast)):
            raise ParseError("non-finite value", line)
        if oid != current:
            if oid in groups:
                raise ParseError(f"rows of opportunity {oid!r} are not contiguous", line)
            groups[oid] = ([], forecast)
            current = oid
        prices, f0 = groups[oid]
        if t != len(prices):
            raise ParseError(f"expected t={len(prices)} for opportunity {oid!r}, got {t}", line)
        if forecast != f0:
            raise ParseError(f"forecast changes within opportunity {oid!r}", line)
        prices.append(price)
    if not groups:
        raise ParseError("no data rows", line)
    out = []
    for oid, (prices, forecast) in groups.items():
        if len(prices) < 2:
            raise ParseError(f"opportunity {oid!r} has fewer than 2 prices")
        out.append(OpportunitySeries(prices, forecast))
    return out


def write_price_csv(path, opportunities: Iterable[OpportunitySeries], ids=None):
    lines = [",".join(PRICE_HEADER)]
    for k, opp in enumerate(opportunities):
        oid = ids[k] if ids is not None else k
        lines.extend(f"{oid},{t},{float(p)!r},{float(opp.forecast)!r}" for t, p in enumerate(opp.prices))
    _write_text(path, "\n".join(lines) + "\n")
