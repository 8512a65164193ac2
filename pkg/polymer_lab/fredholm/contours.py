"""
Quadrature contours in the complex plane.

A ``Contour`` carries its nodes and complex weights (``dz`` included), so
``contour.integrate(f(contour.nodes))`` approximates the contour integral of
f. ``refined()`` rebuilds the same contour with twice the resolution.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..utils.errors import ContourError

PANEL_NODES = 16


@dataclass(frozen=True)
class Contour:
    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    spec: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.nodes.shape[0]

    def integrate(self, values):
        return complex(np.sum(self.weights * values))

    def refined(self):
        builder = _BUILDERS[self.kind]
        spec = dict(self.spec)
        spec["resolution"] = 2 * spec["resolution"]
        return builder(**spec)


def gauss_legendre_panels(edges, per_panel=PANEL_NODES):
    """Composite Gauss-Legendre nodes/weights on consecutive ``edges``."""
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def circle(center=0.0, radius=1.0, resolution=64):
    """Positively oriented circle, trapezoid rule with ``resolution`` nodes."""
    if radius <= 0:
        raise ContourError("circle radius must be positive", radius=radius)
    theta = 2.0 * math.pi * np.arange(resolution) / resolution
    unit = np.exp(1j * theta)
    nodes = center + radius * unit
    weights = 1j * radius * unit * (2.0 * math.pi / resolution)
    spec = {"center": center, "radius": radius, "resolution": resolution}
    return Contour("circle", nodes, weights, spec)


def vertical(re=0.0, half_height=1.0, resolution=PANEL_NODES, panel=0.5):
    """Upward segment re + i[-half_height, half_height], Gauss-Legendre panels."""
    if half_height <= 0:
        raise ContourError("half height must be positive", half_height=half_height)
    count = max(1, int(math.ceil(2.0 * half_height / panel)))
    y, w = gauss_legendre_panels(np.linspace(-half_height, half_height, count + 1), resolution)
    spec = {"re": re, "half_height": half_height, "resolution": resolution, "panel": panel}
    return Contour("vertical", re + 1j * y, 1j * w, spec)


def rays(base=0.0, angle=2.0 * math.pi / 3.0, length=6.0, resolution=8, panel=0.5):
    """
    Two rays from ``base`` at angles -angle and +angle, traversed so the
    imaginary part increases: in along the lower ray, out along the upper.
    """
    if length <= 0:
        raise ContourError("ray length must be positive", length=length)
    count = max(1, int(math.ceil(length / panel)))
    rho, w = gauss_legendre_panels(np.linspace(0.0, length, count + 1), resolution)
    up = np.exp(1j * angle)
    down = np.exp(-1j * angle)
    nodes = np.concatenate([base + rho[::-1] * down, base + rho * up])
    weights = np.concatenate([-w[::-1] * down, w * up])
    spec = {"base": base, "angle": angle, "length": length, "resolution": resolution, "panel": panel}
    return Contour("rays", nodes, weights, spec)


def graded_line(offset, half_height, fine_width, fine_extent, coarse_width, resolution=PANEL_NODES):
    """
    Upward line offset + i[-T, T] with panels of ``fine_width`` on
    |y| <= fine_extent and of ``coarse_width`` beyond. Returns a Contour
    in the line coordinate ``z = offset + i y``.
    """
    fine_extent = min(fine_extent, half_height)
    inner = max(1, int(math.ceil(2.0 * fine_extent / fine_width)))
    edges = list(np.linspace(-fine_extent, fine_extent, inner + 1))
    if half_height > fine_extent:
        outer = max(1, int(math.ceil((half_height - fine_extent) / coarse_width)))
        right = np.linspace(fine_extent, half_height, outer + 1)[1:]
        edges = list(-right[::-1]) + edges + list(right)
    y, w = gauss_legendre_panels(np.array(edges), resolution)
    spec = {
        "offset": offset,
        "half_height": half_height,
        "fine_width": fine_width,
        "fine_extent": fine_extent,
        "coarse_width": coarse_width,
        "resolution": resolution,
    }
    return Contour("graded_line", offset + 1j * y, 1j * w, spec)


_BUILDERS = {
    "circle": circle,
    "vertical": vertical,
    "rays": rays,
    "graded_line": graded_line,
}
