"""Discretized domains with zero Dirichlet data.

Three shapes are supported, all on uniform tensor grids:

* ``interval(L, n)``   -- [0, L] with ``n`` cells,
* ``rectangle(Lx, Ly, n)`` -- [0, Lx] x [0, Ly] with ``n`` cells per axis,
* ``disk(R, n)``       -- the disk of radius ``R`` masked out of the bounding
  square [-R, R]^2 with ``n`` cells per axis.

Fields on a domain are flat numpy arrays with one entry per grid node (row-major
``(i, j)`` with ``x`` the first axis). Boundary nodes carry the Dirichlet value 0
and are eliminated from every solve.

The 2D grids are split into right triangles whose legs follow the axes, so the
gradient of a piecewise-linear field on each element is a pair of one-sided
axis differences. The 1D grid uses the cells themselves as elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError

KINDS = ("interval", "rectangle", "disk")


@dataclass(frozen=True, eq=False)
class Mesh:
    """Element gradient operators and lumped masses on a grid.

    ``grads`` holds one sparse (n_elements x n_nodes) matrix per space dimension;
    ``areas`` the element measures and ``mass`` the lumped nodal masses.
    """

    grads: tuple
    areas: np.ndarray
    mass: np.ndarray


@dataclass(frozen=True, eq=False)
class Domain:
    kind: str
    extents: tuple
    resolution: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown domain kind {self.kind!r}")
        if int(self.resolution) != self.resolution or self.resolution < 2:
            raise ConfigError("resolution must be an integer >= 2")
        want = {"interval": 1, "rectangle": 2, "disk": 1}[self.kind]
        if len(self.extents) != want:
            raise ConfigError(f"{self.kind} takes {want} extent(s), got {self.extents}")
        if not all(np.isfinite(e) and e > 0 for e in self.extents):
            raise ConfigError("domain extents must be positive and finite")
        if self.kind == "disk" and self.interior_mask.sum() == 0:
            raise ConfigError("disk resolution too coarse: no interior nodes")

    # -- grid --------------------------------------------------------------

    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def shape(self) -> tuple:
        n = self.resolution + 1
        return (n,) if self.dim == 1 else (n, n)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def spacing(self) -> tuple:
        n = self.resolution
        if self.kind == "interval":
            return (self.extents[0] / n,)
        if self.kind == "rectangle":
            return (self.extents[0] / n, self.extents[1] / n)
        h = 2.0 * self.extents[0] / n
        return (h, h)

    @cached_property
    def axes(self) -> tuple:
        n = self.resolution
        if self.kind == "disk":
            R = self.extents[0]
            t = np.linspace(-R, R, n + 1)
            return (t, t)
        return tuple(np.linspace(0.0, L, n + 1) for L in self.extents)

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape (n_nodes, dim)."""
        if self.dim == 1:
            return self.axes[0][:, None].copy()
        X, Y = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    @cached_property
    def interior_mask(self) -> np.ndarray:
        n = self.resolution
        if self.kind == "disk":
            R = self.extents[0]
            c = self.coords
            # strict inequality with a relative guard so nodes on the circle stay boundary
            return (c[:, 0] ** 2 + c[:, 1] ** 2) < R * R * (1.0 - 1e-12)
        m = np.zeros(self.shape, dtype=bool)
        if self.dim == 1:
            m[1:n] = True
        else:
            m[1:n, 1:n] = True
        return m.ravel()

    @cached_property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(self.interior_mask)

    @cached_property
    def closure_mask(self) -> np.ndarray:
        """Interior nodes plus every node touching an interior node (8-neighbourhood)."""
        m = self.interior_mask.reshape(self.shape)
        out = m.copy()
        if self.dim == 1:
            out[1:] |= m[:-1]
            out[:-1] |= m[1:]
        else:
            padded = np.pad(m, 1)
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    out |= padded[1 + di:1 + di + m.shape[0], 1 + dj:1 + dj + m.shape[1]]
        return out.ravel()

    @cached_property
    def boundary_adjacency(self) -> tuple:
        """(boundary_nodes, inward_neighbours, spacings) for the normal-quotient proxy.

        Only boundary nodes with an interior axis-neighbour are listed; rectangle
        corners have none and are skipped (the outward normal is undefined there).
        """
        interior = self.interior_mask.reshape(self.shape)
        nodes, inward, hs = [], [], []
        if self.dim == 1:
            n = self.resolution
            nodes, inward, hs = [0, n], [1, n - 1], [self.spacing[0]] * 2
            return np.array(nodes), np.array(inward), np.array(hs, dtype=float)
        nx, ny = self.shape
        hx, hy = self.spacing
        steps = ((1, 0, hx), (-1, 0, hx), (0, 1, hy), (0, -1, hy))
        for i in range(nx):
            for j in range(ny):
                if interior[i, j]:
                    continue
                best = None
                for di, dj, h in steps:
                    ii, jj = i + di, j + dj
                    if not (0 <= ii < nx and 0 <= jj < ny and interior[ii, jj]):
                        continue
                    if self.kind == "disk":
                        x, y = self.axes[0][i], self.axes[1][j]
                        r = math.hypot(x, y)
                        score = -(di * x + dj * y) / r
                    else:
                        score = 0.0
                    if best is None or score > best[0]:
                        best = (score, ii * ny + jj, h)
                if best is not None:
                    nodes.append(i * ny + j)
                    inward.append(best[1])
                    hs.append(best[2])
        return np.array(nodes, dtype=int), np.array(inward, dtype=int), np.array(hs)

    # -- geometry ----------------------------------------------------------

    def measure(self) -> float:
        """Lebesgue measure: exact for intervals/rectangles, cell counting for disks."""
        if self.kind == "interval":
            return float(self.extents[0])
        if self.kind == "rectangle":
            return float(self.extents[0] * self.extents[1])
        R = self.extents[0]
        h = self.spacing[0]
        centers = -R + h * (np.arange(self.resolution) + 0.5)
        X, Y = np.meshgrid(centers, centers, indexing="ij")
        return float(np.count_nonzero(X**2 + Y**2 < R * R)) * h * h

    def diameter(self) -> float:
        if self.kind == "interval":
            return float(self.extents[0])
        if self.kind == "rectangle":
            return float(math.hypot(*self.extents))
        return 2.0 * float(self.extents[0])

    # -- finite elements ---------------------------------------------------

    @cached_property
    def mesh(self) -> Mesh:
        if self.dim == 1:
            return _mesh_1d(self.resolution, self.spacing[0])
        return _mesh_2d(self.resolution, *self.spacing)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n_nodes)

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func(x)`` or ``func(x, y)`` at every node (boundary included)."""
        c = self.coords
        vals = func(c[:, 0]) if self.dim == 1 else func(c[:, 0], c[:, 1])
        return np.broadcast_to(np.asarray(vals, dtype=float), (self.n_nodes,)).copy()

    def restrict(self, values) -> np.ndarray:
        """Copy of ``values`` with every non-interior node set to 0."""
        out = np.array(values, dtype=float, copy=True)
        out[~self.interior_mask] = 0.0
        return out

    def distance_product(self) -> np.ndarray:
        """Product of distances to the boundary (positive inside, 0 on the boundary)."""
        c = self.coords
        if self.kind == "interval":
            L = self.extents[0]
            d = c[:, 0] * (L - c[:, 0])
        elif self.kind == "rectangle":
            Lx, Ly = self.extents
            d = c[:, 0] * (Lx - c[:, 0]) * c[:, 1] * (Ly - c[:, 1])
        else:
            R = self.extents[0]
            d = np.clip(R * R - c[:, 0] ** 2 - c[:, 1] ** 2, 0.0, None)
        return self.restrict(d)

    def describe(self) -> dict:
        return {"kind": self.kind, "extents": list(self.extents), "resolution": self.resolution}


def _mesh_1d(n: int, h: float) -> Mesh:
    rows = np.repeat(np.arange(n), 2)
    cols = np.column_stack([np.arange(n), np.arange(1, n + 1)]).ravel()
    vals = np.tile([-1.0 / h, 1.0 / h], n)
    G = sp.csr_matrix((vals, (rows, cols)), shape=(n, n + 1))
    areas = np.full(n, h)
    mass = np.full(n + 1, h)
    mass[[0, -1]] = 0.5 * h
    return Mesh((G,), areas, mass)


def _mesh_2d(n: int, hx: float, hy: float) -> Mesh:
    ny = n + 1
    I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a = (I * ny + J).ravel()          # (i, j)
    b = ((I + 1) * ny + J).ravel()    # (i+1, j)
    c = (I * ny + J + 1).ravel()      # (i, j+1)
    d = ((I + 1) * ny + J + 1).ravel()  # (i+1, j+1)
    ncell = a.size
    # lower triangle (a, b, c), right angle at a; upper triangle (d, c, b), right angle at d
    e_lo = np.arange(ncell)
    e_up = ncell + e_lo
    rows_x = np.concatenate([e_lo, e_lo, e_up, e_up])
    cols_x = np.concatenate([a, b, c, d])
    vals_x = np.concatenate([-np.ones(ncell), np.ones(ncell), -np.ones(ncell), np.ones(ncell)]) / hx
    rows_y = rows_x
    cols_y = np.concatenate([a, c, b, d])
    vals_y = vals_x * (hx / hy)
    nn = ny * ny
    Gx = sp.csr_matrix((vals_x, (rows_x, cols_x)), shape=(2 * ncell, nn))
    Gy = sp.csr_matrix((vals_y, (rows_y, cols_y)), shape=(2 * ncell, nn))
    area = 0.5 * hx * hy
    areas = np.full(2 * ncell, area)
    mass = np.zeros(nn)
    for tri in ((a, b, c), (d, c, b)):
        for idx in tri:
            np.add.at(mass, idx, area / 3.0)
    return Mesh((Gx, Gy), areas, mass)


def interval(length: float = 1.0, resolution: int = 256) -> Domain:
    return Domain("interval", (float(length),), int(resolution))


def rectangle(lx: float = 1.0, ly: float = 1.0, resolution: int = 64) -> Domain:
    return Domain("rectangle", (float(lx), float(ly)), int(resolution))


def disk(radius: float = 1.0, resolution: int = 64) -> Domain:
    return Domain("disk", (float(radius),), int(resolution))


def from_spec(spec: dict) -> Domain:
    """Build a domain from a config mapping such as ``{"kind": "interval", "length": 1}``."""
    try:
        kind = spec["kind"]
        res = spec.get("resolution", 256 if kind == "interval" else 64)
        if kind == "interval":
            return interval(spec.get("length", 1.0), res)
        if kind == "rectangle":
            return rectangle(spec.get("lx", 1.0), spec.get("ly", 1.0), res)
        if kind == "disk":
            return disk(spec.get("radius", 1.0), res)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad domain spec {spec!r}: {exc}") from None
    raise ConfigError(f"unknown domain kind {spec.get('kind')!r}")


def measure(domain: Domain) -> float:
    return domain.measure()


def diameter(domain: Domain) -> float:
    return domain.diameter()


def boundary_normal_quotient(domain: Domain, u) -> np.ndarray:
    """One-sided quotient (u(boundary) - u(inward neighbour)) / h at each listed boundary node.

    Approximates the outward normal derivative; negative values mean the field
    leaves the boundary with a strictly positive slope.
    """
    u = np.asarray(u, dtype=float)
    nodes, inward, h = domain.boundary_adjacency
    scale = max(1.0, float(np.max(np.abs(u)))) if u.size else 1.0
    off = np.abs(u[~domain.interior_mask])
    if off.size and off.max() > 1e-12 * scale:
        raise ConfigError("field does not vanish on the boundary")
    return (u[nodes] - u[inward]) / h
