"""Deterministic grid + golden-section maximization over angle boxes.

Used by the violation maximizers.  Everything here is order-independent:
grid candidates are refined one by one and ties are broken by the
lexicographically smallest canonicalized coordinate tuple.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0   # 1/phi
_INVPHI2 = (3.0 - np.sqrt(5.0)) / 2.0  # 1/phi^2

# Hard cap on refined grid candidates; exact grid maximizers sort first, so
# ridge-shaped near-maximal sets cannot crowd a true family member out.
_MAX_CANDIDATES = 512


def golden_section_max(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    x_tol: float = 1e-8,
) -> tuple[float, float]:
    """Maximize a unimodal function on [lo, hi]; returns (x, f(x))."""
    a, b = float(lo), float(hi)
    h = b - a
    if h <= x_tol:
        mid = 0.5 * (a + b)
        return mid, func(mid)
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc, fd = func(c), func(d)
    while h > x_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


def refine_coordinatewise(
    func: Callable[[Sequence[float]], float],
    start: Sequence[float],
    half_width: float,
    x_tol: float = 1e-8,
    max_sweeps: int = 60,
) -> tuple[tuple[float, ...], float]:
    """Cyclic per-coordinate golden-section ascent around ``start``."""
    point = [float(v) for v in start]
    best = func(point)
    for _ in range(max_sweeps):
        improved = 0.0
        for i in range(len(point)):
            def slice_func(x, i=i):
                trial = list(point)
                trial[i] = x
                return func(trial)

            x, fx = golden_section_max(
                slice_func, point[i] - half_width, point[i] + half_width, x_tol
            )
            if fx > best:
                improved += fx - best
                point[i], best = x, fx
        if improved < 1e-15:
            break
    return tuple(point), best


def _lex_less(a: Sequence[float], b: Sequence[float], tol: float) -> bool:
    for x, y in zip(a, b):
        if abs(x - y) > tol:
            return x < y
    return False


def _grid_candidates(
    func_vec: Callable[..., np.ndarray],
    axis: np.ndarray,
    n_axes: int,
    slack: float,
) -> list[tuple[float, tuple[float, ...]]]:
    """(value, point) pairs within ``slack`` of the grid maximum.

    The first axis is evaluated slab by slab so dense grids never
    materialize the full mesh.
    """
    rest_shape = [len(axis)] * (n_axes - 1)
    rest = [
        axis.reshape([1] * i + [-1] + [1] * (n_axes - 2 - i)) for i in range(n_axes - 1)
    ]
    slabs: list[np.ndarray] = []
    grid_max = -np.inf
    for x0 in axis:
        values = np.asarray(func_vec(x0, *rest), dtype=float)
        values = np.broadcast_to(values, rest_shape) if rest_shape else values
        slabs.append(values)
        slab_max = float(values.max()) if values.size else float(values)
        grid_max = max(grid_max, slab_max)

    out: list[tuple[float, tuple[float, ...]]] = []
    for i0, values in enumerate(slabs):
        hits = np.argwhere(np.atleast_1d(values) >= grid_max - slack)
        for idx in hits:
            point = (float(axis[i0]),) + tuple(float(axis[i]) for i in idx[: n_axes - 1])
            value = float(np.atleast_1d(values)[tuple(idx)])
            out.append((value, point))
    # Exact maximizers first; index order breaks value ties deterministically.
    out.sort(key=lambda item: (-item[0], item[1]))
    return out[:_MAX_CANDIDATES]


def maximize_on_grid(
    func_vec: Callable[..., np.ndarray],
    n_axes: int,
    period: float,
    grid_step: float,
    refine: bool = True,
    x_tol: float = 1e-8,
    value_slack: float | None = None,
) -> tuple[tuple[float, ...], float]:
    """Grid scan over [0, period)^n followed by local refinement.

    ``func_vec`` must accept ``n_axes`` broadcastable arguments.  All grid
    points within ``value_slack`` of the grid maximum are refined so every
    member of a discrete family of maximizers is found; the winner is the
    lexicographically smallest canonical representative (coordinates reduced
    mod ``period``).
    """
    axis = np.arange(0.0, period, grid_step)
    if value_slack is None:
        # Covers the quadratic drop to the nearest grid point for the O(1)
        # curvature trigonometric functionals used here.
        value_slack = max(2.0 * grid_step**2, 1e-12)
    candidates = _grid_candidates(func_vec, axis, n_axes, value_slack)
    grid_best = candidates[0][0]

    if not refine:
        winners = [pt for val, pt in candidates if val >= grid_best - 1e-15]
        best_val = grid_best
    else:
        refined = []
        for _, cand in candidates:
            point, val = refine_coordinatewise(
                lambda p: float(func_vec(*p)), cand, half_width=grid_step, x_tol=x_tol
            )
            refined.append((point, val))
        best_val = max(val for _, val in refined)
        keep_tol = max(10.0 * x_tol**2, 1e-12)
        winners = [
            tuple(float(np.mod(x, period)) for x in point)
            for point, val in refined
            if val >= best_val - keep_tol
        ]

    pos_tol = max(10.0 * x_tol, 1e-9)
    winners = [
        tuple(0.0 if period - x < pos_tol else x for x in w) for w in winners
    ]
    best = winners[0]
    for cand in winners[1:]:
        if _lex_less(cand, best, pos_tol):
            best = cand
    return best, float(best_val)
