"""Bessel functions J0 and J1 of real argument.

Power series below ``SERIES_LIMIT``, Hankel asymptotic expansion above it.
Both branches are vectorised over numpy arrays.
"""

import numpy as np

SERIES_LIMIT = 12.0
_SERIES_TERMS = 48
_ASYM_TERMS = 14


def _series(x, order):
    # sum_k (-1)^k (x/2)^(2k+order) / (k! (k+order)!)
    h = 0.25 * x * x
    term = np.ones_like(x) if order == 0 else 0.5 * x
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * (-h / (k * (k + order)))
        total = total + term
    return total


def _hankel_pq(x, order):
    # a_k = prod_{j<=k} (mu - (2j-1)^2) / (8 x j), summed up to the smallest term
    mu = 4.0 * order * order
    k = np.arange(1, 2 * _ASYM_TERMS + 1)
    ratio = ((mu - (2 * k - 1) ** 2) / k)[:, None] / (8.0 * x)[None, :]
    a = np.cumprod(ratio, axis=0)
    size = np.abs(a)
    grew = np.vstack([np.zeros((1, x.size), dtype=bool), size[1:] >= size[:-1]])
    live = ~np.logical_or.accumulate(grew, axis=0)
    # P = sum_m (-1)^m a_{2m},  Q = sum_m (-1)^m a_{2m+1}
    sign = np.where((k // 2) % 2, -1.0, 1.0)[:, None]
    terms = np.where(live, sign * a, 0.0)
    p = 1.0 + terms[1::2].sum(axis=0)
    q = terms[0::2].sum(axis=0)
    return p, q


def _asymptotic(x, order):
    p, q = _hankel_pq(x, order)
    chi = x - (2 * order + 1) * np.pi / 4
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def _eval(x, order):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax < SERIES_LIMIT
    if np.any(small):
        out[small] = _series(ax[small], order)
    if np.any(~small):
        out[~small] = _asymptotic(ax[~small].ravel(), order).reshape(ax[~small].shape)
    if order == 1:
        out = np.where(x < 0, -out, out)
    return out if out.ndim else float(out)


def j0(x):
    """Bessel function of the first kind, order 0."""
    return _eval(x, 0)


def j1(x):
    """Bessel function of the first kind, order 1."""
    return _eval(x, 1)
