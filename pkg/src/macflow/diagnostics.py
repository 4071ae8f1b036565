"""Run observables: order parameter, interface contours, tilt tracking."""
from dataclasses import dataclass

import numpy as np

from .matfield import PreconditionError, as_array, sup_frob


@dataclass(frozen=True)
class SeriesRecord:
    step: int
    t: float
    sup_frob: float
    energy_total: float
    energy_grad: float
    energy_pot: float
    alpha_min: float
    u31_sup: float = None


def order_parameter(field):
    """Determinant of the top-left 2x2 block at every node."""
    U = as_array(field)
    if U.shape[-1] != 2 or U.shape[-2] < 2:
        raise PreconditionError(f"order parameter needs m2 = 2 and m1 >= 2, got {U.shape[-2:]}")
    return U[..., 0, 0] * U[..., 1, 1] - U[..., 0, 1] * U[..., 1, 0]


def u31_sup(field):
    """``max |U_31|`` over the grid (out-of-plane tilt of the first column)."""
    U = as_array(field)
    if U.shape[-2] != 3:
        raise PreconditionError(f"U_31 needs m1 = 3, got m1 = {U.shape[-2]}")
    return float(np.max(np.abs(U[..., 2, 0])))


# corner order: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1)
# edge order:   0=bottom (y_j) 1=right (x_{i+1}) 2=top (y_{j+1}) 3=left (x_i)
_EDGE_CORNERS = ((0, 1), (1, 2), (3, 2), (0, 3))
_CORNER_EDGES = ((0, 3), (0, 1), (1, 2), (2, 3))


def _edge_key(i, j, e, nx, ny):
    if e == 0:
        return ("h", i % nx, j % ny)
    if e == 2:
        return ("h", i % nx, (j + 1) % ny)
    if e == 1:
        return ("v", (i + 1) % nx, j % ny)
    return ("v", i % nx, j % ny)


def zero_contour_segments(c):
    """Marching-squares segments of ``{c = 0}`` on the periodic grid.

    Returns ``(segments, keys)``: an ``(n, 2, 2)`` array of endpoints in
    domain coordinates (cells across the seam use the unwrapped coordinate
    ``1/2``) and the periodic edge key of each endpoint.
    """
    c = np.asarray(c, dtype=np.float64)
    nx, ny = c.shape
    hx, hy = 1.0 / nx, 1.0 / ny
    pos = c > 0
    corners = np.stack([pos, np.roll(pos, -1, 0), np.roll(np.roll(pos, -1, 0), -1, 1),
                        np.roll(pos, -1, 1)], axis=-1)
    mixed = np.nonzero(corners.any(axis=-1) & ~corners.all(axis=-1))
    segs, keys = [], []
    for i, j in zip(*mixed):
        v = (c[i, j], c[(i + 1) % nx, j], c[(i + 1) % nx, (j + 1) % ny], c[i, (j + 1) % ny])
        xy = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
        s = [vk > 0 for vk in v]
        pts = {}
        for e, (a, b) in enumerate(_EDGE_CORNERS):
            if s[a] != s[b]:
                t = v[a] / (v[a] - v[b])
                px = xy[a][0] + t * (xy[b][0] - xy[a][0])
                py = xy[a][1] + t * (xy[b][1] - xy[a][1])
                pts[e] = (-0.5 + px * hx, -0.5 + py * hy)
        if len(pts) == 2:
            pairs = [tuple(pts)]
        else:
            center = 0.25 * sum(v) > 0
            pairs = [_CORNER_EDGES[k] for k in range(4) if s[k] != center]
        for e0, e1 in pairs:
            segs.append((pts[e0], pts[e1]))
            keys.append((_edge_key(i, j, e0, nx, ny), _edge_key(i, j, e1, nx, ny)))
    return np.array(segs, dtype=np.float64).reshape(-1, 2, 2), keys


def _chain(keys):
    """Group segment indices into ordered chains sharing edge keys."""
    touching = {}
    for n, (k0, k1) in enumerate(keys):
        touching.setdefault(k0, []).append((n, 0))
        touching.setdefault(k1, []).append((n, 1))
    used = np.zeros(len(keys), dtype=bool)
    chains = []
    for start in range(len(keys)):
        if used[start]:
            continue
        used[start] = True
        chain = [(start, False)]
        # extend forward from endpoint 1, then backward from endpoint 0
        for direction in (1, 0):
            n, end = start, direction
            while True:
                key = keys[n][end]
                nxt = [(m, e) for m, e in touching[key] if not used[m]]
                if not nxt:
                    break
                m, e = nxt[0]
                used[m] = True
                flipped = e == 1  # entered at endpoint 1 -> traverse reversed
                if direction == 1:
                    chain.append((m, flipped))
                else:
                    chain.insert(0, (m, not flipped))
                n, end = m, 1 - e
        chains.append(chain)
    return chains


def zero_contour(cfield):
    """Polylines (``(k, 2)`` arrays, domain coordinates) approximating ``{c = 0}``.

    Polylines are split where they cross the periodic seam.
    """
    segs, keys = zero_contour_segments(cfield)
    if len(segs) == 0:
        return []
    lines = []
    for chain in _chain(keys):
        pts = []
        for n, rev in chain:
            a, b = (segs[n][1], segs[n][0]) if rev else (segs[n][0], segs[n][1])
            if pts and np.max(np.abs(pts[-1] - a)) > 0.5:
                lines.append(np.array(pts))
                pts = []
            if not pts:
                pts.append(a)
            pts.append(b)
        lines.append(np.array(pts))
    return lines


def contour_length(polylines):
    return float(sum(np.sum(np.hypot(*np.diff(p, axis=0).T)) for p in polylines if len(p) > 1))


def record(step, t, field, energy_report, step_stats=None):
    """Assemble one time-series row; ``step_stats=None`` means the initial state."""
    U = as_array(field)
    alpha_min = 1.0 if step_stats is None else step_stats.overall_alpha_min
    return SeriesRecord(
        step=int(step), t=float(t), sup_frob=sup_frob(U),
        energy_total=energy_report.total, energy_grad=energy_report.gradient_part,
        energy_pot=energy_report.potential_part, alpha_min=float(alpha_min),
        u31_sup=u31_sup(U) if U.shape[-2] == 3 else None)
