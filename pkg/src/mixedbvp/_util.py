"""Small numeric and formatting helpers shared across modules."""

from __future__ import annotations

import json
import math

import numpy as np


def simpson_weights(npoints: int, h: float) -> np.ndarray:
    """Composite Simpson weights for npoints equally spaced nodes.

    npoints must be odd (an even number of panels).
    """
    if npoints < 3 or npoints % 2 == 0:
        raise ValueError("simpson rule needs an odd node count >= 3")
    w = np.ones(npoints)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def fd_weights(deriv_order: int, offsets) -> np.ndarray:
    """Finite-difference weights for d^m/dx^m at offset 0 on integer offsets.

    Returns weights in units of the grid spacing: divide by h**deriv_order
    before applying to samples.  The stencil is exact for polynomials of
    degree < len(offsets).
    """
    offsets = np.asarray(offsets, dtype=float)
    npts = len(offsets)
    if deriv_order >= npts:
        raise ValueError("stencil too short for requested derivative order")
    vander = np.vander(offsets, npts, increasing=True).T
    rhs = np.zeros(npts)
    rhs[deriv_order] = math.factorial(deriv_order)
    return np.linalg.solve(vander, rhs)


def central_fd_offsets(deriv_order: int, accuracy: int = 4) -> np.ndarray:
    """Symmetric integer offsets for an even-order central stencil."""
    if deriv_order % 2 != 0:
        raise ValueError("only even derivative orders are used here")
    half = deriv_order // 2 + accuracy // 2
    return np.arange(-half, half + 1)


def format_float(v: float) -> str:
    """Deterministic shortest-ish decimal form, stable across runs."""
    return format(float(v), ".17g")


def dump_json(obj, path) -> None:
    """Write JSON with sorted keys and no timestamps, byte-reproducible."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def jsonable(value):
    """Recursively convert numpy scalars/arrays to plain python types."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value
