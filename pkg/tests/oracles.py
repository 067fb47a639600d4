"""Finite-difference oracles, independent of the jet arithmetic.

These intentionally know nothing about TaylorValue internals: they drive
plain float evaluations, so agreement between extracted jet coefficients
and these estimates is a genuine two-route check.
"""

import numpy as np


def central_diff(fun, z, axis, h):
    zp = np.array(z, dtype=float)
    zm = np.array(z, dtype=float)
    zp[axis] += h
    zm[axis] -= h
    return (fun(zp) - fun(zm)) / (2.0 * h)


def nested_central(fun, z, axes, h):
    """Mixed partial by recursively nested central differences."""
    if not axes:
        return fun(np.asarray(z, dtype=float))
    axis, rest = axes[0], axes[1:]
    zp = np.array(z, dtype=float)
    zm = np.array(z, dtype=float)
    zp[axis] += h
    zm[axis] -= h
    return (
        nested_central(fun, zp, rest, h) - nested_central(fun, zm, rest, h)
    ) / (2.0 * h)


def richardson_partial(fun, z, axes, h):
    """Richardson-extrapolated mixed partial (error O(h^4))."""
    d1 = nested_central(fun, z, axes, h)
    d2 = nested_central(fun, z, axes, h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def rel_err(got, ref, floor=1.0):
    return abs(got - ref) / max(abs(got), abs(ref), floor)
