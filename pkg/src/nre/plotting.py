"""Dependency-free SVG rendering of two-dimensional decision regions.

The plot rasterizes a score function on a grid: cells with positive score get
the positive-class fill, cells with negative score the negative fill, and
cells scoring exactly zero (empty support) stay unpainted. Data points are
drawn on top, blue for +1 and red for -1.
"""
from __future__ import annotations

import numpy as np

POSITIVE_FILL = "#9ecbff"
NEGATIVE_FILL = "#ffb3b3"
POSITIVE_POINT = "#1f4e9e"
NEGATIVE_POINT = "#c23b3b"


def data_bounds(features: np.ndarray, pad: float = 0.25) -> tuple[float, float, float, float]:
    x0, y0 = features.min(axis=0)
    x1, y1 = features.max(axis=0)
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0
    return (x0 - pad * dx, x1 + pad * dx, y0 - pad * dy, y1 + pad * dy)


def grid_points(bounds, resolution: int):
    """Cell-center grid over the bounds; returns (centers (R*R, 2), xs, ys)."""
    xmin, xmax, ymin, ymax = bounds
    xs = xmin + (np.arange(resolution) + 0.5) * (xmax - xmin) / resolution
    ys = ymin + (np.arange(resolution) + 0.5) * (ymax - ymin) / resolution
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()]), xs, ys


def grid_convexity_check(mask: np.ndarray) -> bool:
    """Discrete convexity of a boolean grid: midpoints of support cells stay in support.

    For every pair of support cells, at least one of the (up to four) cells
    surrounding their exact midpoint must be in the support too. The slack of
    one cell absorbs rasterization aliasing at curved boundaries while still
    failing decisively when the support splits into pieces or grows a dent.
    """
    cells = np.argwhere(mask)
    if cells.shape[0] < 3:
        return True
    for start in range(0, cells.shape[0], 256):
        block = cells[start : start + 256]
        mid = (block[:, None, :] + cells[None, :, :]) / 2.0
        lo = np.floor(mid).astype(int)
        hi = np.ceil(mid).astype(int)
        ok = (
            mask[lo[..., 0], lo[..., 1]]
            | mask[lo[..., 0], hi[..., 1]]
            | mask[hi[..., 0], lo[..., 1]]
            | mask[hi[..., 0], hi[..., 1]]
        )
        if not np.all(ok):
            return False
    return True


def support_mask(score_fn, bounds, resolution: int) -> np.ndarray:
    """Boolean grid (rows = y, cols = x) of cells with nonzero score."""
    pts, xs, ys = grid_points(bounds, resolution)
    vals = np.asarray(score_fn(pts))
    return (vals != 0.0).reshape(len(ys), len(xs))


def render_decision_regions(
    score_fn,
    features: np.ndarray,
    labels: np.ndarray,
    bounds=None,
    resolution: int = 200,
    size: int = 480,
) -> str:
    """SVG of the score function's sign regions with the data points overlaid.

    ``score_fn`` maps an (N, 2) array to N scores. The output is a pure
    function of the inputs, so repeated renders are byte-identical.
    """
    features = np.asarray(features, dtype=np.float64)
    if bounds is None:
        bounds = data_bounds(features)
    xmin, xmax, ymin, ymax = bounds
    pts, xs, ys = grid_points(bounds, resolution)
    vals = np.asarray(score_fn(pts)).reshape(len(ys), len(xs))

    def sx(x):
        return (x - xmin) / (xmax - xmin) * size

    def sy(y):
        return size - (y - ymin) / (ymax - ymin) * size  # svg y grows downward

    cell_w = size / resolution
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i in range(len(ys)):
        for j in range(len(xs)):
            v = vals[i, j]
            if v == 0.0:
                continue
            fill = POSITIVE_FILL if v > 0.0 else NEGATIVE_FILL
            x = sx(xs[j]) - cell_w / 2
            y = sy(ys[i]) - cell_w / 2
            out.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell_w:.2f}" '
                f'height="{cell_w:.2f}" fill="{fill}"/>'
            )
    for (px, py), lab in zip(features, labels):
        color = POSITIVE_POINT if lab > 0 else NEGATIVE_POINT
        out.append(
            f'<circle cx="{sx(px):.2f}" cy="{sy(py):.2f}" r="2.5" fill="{color}" '
            f'fill-opacity="0.8"/>'
        )
    out.append("</svg>")
    return "\n".join(out)
