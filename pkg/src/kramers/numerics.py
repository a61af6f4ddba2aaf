"""Small numerical kernels shared by the pulse, bounds and propagator modules.

Adaptive Simpson quadrature (scalar and vectorised forms) and golden-section
minimisation.  Kept dependency-free apart from numpy so the analytic paths can
run without allocating any grid.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class QuadratureError(RuntimeError):
    pass


def _simpson(fa, fm, fb, a, b):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 60) -> float:
    """Integrate a scalar function on [a, b] to absolute tolerance ``tol``.

    Classic recursive scheme with Richardson correction; an explicit stack
    replaces recursion so deep refinements near integrable endpoints do not hit
    Python's recursion limit.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, a, b)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a_, b_, fa_, fm_, fb_, s_, tol_, depth = stack.pop()
        m_ = 0.5 * (a_ + b_)
        lm, rm = 0.5 * (a_ + m_), 0.5 * (m_ + b_)
        flm, frm = f(lm), f(rm)
        left = _simpson(fa_, flm, fm_, a_, m_)
        right = _simpson(fm_, frm, fb_, m_, b_)
        delta = left + right - s_
        if depth >= max_depth:
            raise QuadratureError(f"adaptive Simpson did not converge on [{a_}, {b_}]")
        if abs(delta) <= 15.0 * tol_:
            total += left + right + delta / 15.0
        else:
            stack.append((a_, m_, fa_, flm, fm_, left, 0.5 * tol_, depth + 1))
            stack.append((m_, b_, fm_, frm, fb_, right, 0.5 * tol_, depth + 1))
    if not math.isfinite(total):
        raise QuadratureError("non-finite integral")
    return sign * total


def simpson_intervals(f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray,
                      tol: float = 1e-10, max_depth: int = 40) -> np.ndarray:
    """Integrate ``f`` over every interval ``[edges[i], edges[i+1]]``.

    ``f`` maps an array of abscissae of shape (m,) to values of shape (m,) or
    (m, k).  The total absolute tolerance ``tol`` is shared equally between
    the intervals.  Returns an array of shape (len(edges) - 1, ...).
    """
    edges = np.asarray(edges, dtype=float)
    n_int = len(edges) - 1
    return adaptive_simpson_batch(lambda x, idx: f(x), edges[:-1], edges[1:],
                                  tol / max(n_int, 1), max_depth)


def adaptive_simpson_batch(g: Callable[[np.ndarray, np.ndarray], np.ndarray],
                           a: np.ndarray, b: np.ndarray, tol: float = 1e-10,
                           max_depth: int = 40) -> np.ndarray:
    """Independent adaptive Simpson integrals of many integrands at once.

    Item ``i`` integrates ``x -> g(x, i)`` over ``[a[i], b[i]]`` to absolute
    tolerance ``tol``.  ``g`` receives abscissae and the owning item index
    (equal-length arrays) and returns values of shape (m,) or (m, k).  Every
    live sub-interval is refined together, so the cost per level is one
    vectorised call of ``g``.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    n_int = len(a)
    owner = np.arange(n_int)
    tols = np.full(n_int, float(tol))
    fa, fb = g(a, owner), g(b, owner)
    fm = g(0.5 * (a + b), owner)
    whole = _simpson(fa, fm, fb, _bc(a, fa), _bc(b, fa))
    out = np.zeros((n_int,) + np.shape(fa)[1:])
    for _ in range(max_depth):
        m = 0.5 * (a + b)
        two = np.concatenate([0.5 * (a + m), 0.5 * (m + b)])
        ftwo = g(two, np.concatenate([owner, owner]))
        flm, frm = ftwo[: len(a)], ftwo[len(a):]
        left = _simpson(fa, flm, fm, _bc(a, fa), _bc(m, fa))
        right = _simpson(fm, frm, fb, _bc(m, fa), _bc(b, fa))
        delta = left + right - whole
        err = np.abs(delta) if delta.ndim == 1 else np.max(np.abs(delta), axis=1)
        done = err <= 15.0 * tols
        np.add.at(out, owner[done], (left + right + delta / 15.0)[done])
        if done.all():
            if not np.all(np.isfinite(out)):
                raise QuadratureError("non-finite integral")
            return out
        keep = ~done
        owner = np.concatenate([owner[keep], owner[keep]])
        a, m_, b = a[keep], m[keep], b[keep]
        tols = np.concatenate([tols[keep], tols[keep]]) * 0.5
        fa_k, fm_k, fb_k = fa[keep], fm[keep], fb[keep]
        flm_k, frm_k = flm[keep], frm[keep]
        a, b = np.concatenate([a, m_]), np.concatenate([m_, b])
        fa = np.concatenate([fa_k, fm_k])
        fm = np.concatenate([flm_k, frm_k])
        fb = np.concatenate([fm_k, fb_k])
        whole = np.concatenate([left[keep], right[keep]])
    raise QuadratureError("vectorised Simpson refinement did not converge")


def _bc(x, like):
    # broadcast interval endpoints against (m,) or (m, k) function values
    return x if np.ndim(like) == 1 else x[:, None]


def golden_section(f: Callable[[float], float], lo: float, hi: float,
                   xtol: float = 1e-12, max_iter: int = 500) -> tuple[float, float]:
    """Minimise a unimodal function on [lo, hi]; returns (argmin, min)."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    if fc < fd:
        return c, fc
    return d, fd
