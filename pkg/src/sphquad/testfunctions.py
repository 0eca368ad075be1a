"""Integrands used for the polygon experiments."""
from __future__ import annotations

import numpy as np

CENTER = (-0.6325, 0.6668, -0.3908)


def _h(x, y, z):
    x0, y0, z0 = CENTER
    return (x - x0) ** 2 + (y - y0) ** 2 + (z - z0) ** 2


def f1(x, y, z):
    """Polynomial of total degree 6."""
    return 1 + x + y**2 + x**2 * y + x**4 + y**5 + x**2 * y**2 * z**2


def f2(x, y, z):
    return np.cos(10 * (x + y + z))


def f3(x, y, z):
    return np.sin(-_h(x, y, z))


def f4(x, y, z):
    return np.exp(-_h(x, y, z))


def f5(x, y, z):
    """C^1 at the center point."""
    return _h(x, y, z) ** 1.5


def f6(x, y, z):
    """C^2 at the center point."""
    return _h(x, y, z) ** 2.5


def fnoisy(x, y, z):
    """Smooth target of the noisy fitting experiments."""
    return np.exp(x**6 * np.cos(y + 2 * z))


FUNCTIONS = {"f1": f1, "f2": f2, "f3": f3, "f4": f4, "f5": f5, "f6": f6, "fnoisy": fnoisy}


def get(name):
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown function {name!r}; choose from {', '.join(FUNCTIONS)}") from None
