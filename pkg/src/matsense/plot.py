"""Standalone SVG rendering of aggregate error curves.

Each input CSV is one series: a solid line at the trial mean and two dotted
companion lines at mean +/- std/2.  The writer emits plain SVG paths (class
"mean" for solid, "band" for dotted), so outputs are easy to inspect and
byte-reproducible.  On a logarithmic axis, nonpositive values are dropped
point by point.
"""

import math
import os

EXPECTED_HEADER = ["iter", "train_mean", "train_std", "test_mean", "test_std"]

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_WIDTH, _HEIGHT = 720, 480
_ML, _MR, _MT, _MB = 78, 24, 30, 56  # plot margins


def _read_aggregate_csv(path):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = [c.strip() for c in lines[0].split(",")]
    for i, want in enumerate(EXPECTED_HEADER):
        got = header[i] if i < len(header) else "<missing>"
        if got != want:
            raise ValueError(f"{path}: column {i + 1}: expected {want!r}, found {got!r}")
    if len(header) != len(EXPECTED_HEADER):
        raise ValueError(f"{path}: column {len(EXPECTED_HEADER) + 1}: unexpected "
                         f"{header[len(EXPECTED_HEADER)]!r}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append(tuple(float(x) for x in parts))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def _series_label(path):
    stem = os.path.splitext(os.path.basename(path))[0]
    return stem[:-4] if stem.endswith("_agg") else stem


def _path_d(points):
    if not points:
        return None
    parts = [f"M {points[0][0]:.2f},{points[0][1]:.2f}"]
    parts.extend(f"L {x:.2f},{y:.2f}" for x, y in points[1:])
    return " ".join(parts)


def _log_ticks(lo, hi):
    lo_e, hi_e = math.floor(lo), math.ceil(hi)
    step = max(1, (hi_e - lo_e) // 8)
    return [float(e) for e in range(lo_e, hi_e + 1, step)]


def _lin_ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def render_plot(csv_paths, output_svg_path, y_log=True, column="train"):
    """Render aggregate CSVs to a standalone SVG; returns the output path.

    `column` selects the train or test error panel.  Solid lines show the
    trial mean, dotted lines mean +/- std/2.  Nothing is written unless every
    input parses and carries data.
    """
    if column not in ("train", "test"):
        raise ValueError(f"column must be 'train' or 'test', got {column!r}")
    if not csv_paths:
        raise ValueError("no CSV paths given")
    mean_i, std_i = (1, 2) if column == "train" else (3, 4)

    series = []
    for path in csv_paths:
        rows = _read_aggregate_csv(path)
        pts = []
        for row in rows:
            k, mean, std = row[0], row[mean_i], row[std_i]
            pts.append((k, mean, mean - std / 2.0, mean + std / 2.0))
        series.append((_series_label(path), pts))

    def keep(v):
        return math.isfinite(v) and (not y_log or v > 0.0)

    xs = [p[0] for _, pts in series for p in pts]
    ys = [v for _, pts in series for p in pts for v in p[1:] if keep(v)]
    if not ys:
        raise ValueError("no plottable values (all nonpositive on a log axis?)")
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_log:
        y_lo, y_hi = math.log10(min(ys)), math.log10(max(ys))
    else:
        y_lo, y_hi = min(ys), max(ys)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.03 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    px_w = _WIDTH - _ML - _MR
    px_h = _HEIGHT - _MT - _MB

    def to_px(k, v):
        x = _ML + (k - x_lo) / (x_hi - x_lo) * px_w
        vv = math.log10(v) if y_log else v
        y = _MT + (y_hi - vv) / (y_hi - y_lo) * px_h
        return x, y

    out = []
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
               f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">')
    out.append(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>')

    # axes
    x0, y0 = _ML, _HEIGHT - _MB
    x1, y1 = _WIDTH - _MR, _MT
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for tx in _lin_ticks(x_lo, x_hi):
        px = _ML + (tx - x_lo) / (x_hi - x_lo) * px_w
        out.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{y0 + 20}" font-size="12" '
                   f'text-anchor="middle">{tx:.0f}</text>')
    ticks = _log_ticks(y_lo, y_hi) if y_log else _lin_ticks(y_lo, y_hi)
    for tv in ticks:
        py = _MT + (y_hi - tv) / (y_hi - y_lo) * px_h
        if not _MT <= py <= _HEIGHT - _MB:
            continue
        label = f"1e{tv:.0f}" if y_log else f"{tv:.3g}"
        out.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" font-size="12" '
                   f'text-anchor="end">{label}</text>')
    out.append(f'<text x="{(_ML + _WIDTH - _MR) / 2:.0f}" y="{_HEIGHT - 16}" '
               f'font-size="13" text-anchor="middle">iteration</text>')
    ylab = f"{column} error"
    out.append(f'<text x="18" y="{(_MT + _HEIGHT - _MB) / 2:.0f}" font-size="13" '
               f'text-anchor="middle" transform="rotate(-90 18 '
               f'{(_MT + _HEIGHT - _MB) / 2:.0f})">{ylab}</text>')

    for idx, (label, pts) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        mean_pts = [to_px(k, m) for k, m, lo, hi in pts if keep(m)]
        lo_pts = [to_px(k, lo) for k, m, lo, hi in pts if keep(lo)]
        hi_pts = [to_px(k, hi) for k, m, lo, hi in pts if keep(hi)]
        d = _path_d(mean_pts)
        if d:
            out.append(f'<path class="mean" fill="none" stroke="{color}" '
                       f'stroke-width="1.8" d="{d}"/>')
        for band in (lo_pts, hi_pts):
            d = _path_d(band)
            if d:
                out.append(f'<path class="band" fill="none" stroke="{color}" '
                           f'stroke-width="1.1" stroke-dasharray="3,4" d="{d}"/>')
        ly = _MT + 16 + 16 * idx
        lx = _WIDTH - _MR - 10
        out.append(f'<line x1="{lx - 150}" y1="{ly - 4}" x2="{lx - 120}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.8"/>')
        out.append(f'<text x="{lx - 114}" y="{ly}" font-size="12">{label}</text>')

    out.append("</svg>")
    with open(output_svg_path, "w") as fh:
        fh.write("\n".join(out))
        fh.write("\n")
    return output_svg_path
