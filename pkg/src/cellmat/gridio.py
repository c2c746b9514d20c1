"""Density grid files: diffable ASCII plus a PGM mirror for the eye.

Grid layout matches the mesh: element e = ey * n + ex, rows written in
ascending ey.  Values are serialized with 17 significant digits so a
write/read round trip is exact in double precision.
"""

import numpy as np

from .errors import ConfigError


def write_grid(path, rho, n):
    rho = np.asarray(rho, dtype=float)
    if rho.size != n * n:
        raise ConfigError(f"grid wants {n * n} values, got {rho.size}")
    grid = rho.reshape(n, n)
    with open(path, "w") as fh:
        fh.write(f"{n} {n}\n")
        for row in grid:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_grid(path):
    """Returns (rho, n); accepts any n_x == n_y header."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ConfigError(f"bad grid header in {path}: {header!r}")
        nx, ny = (int(v) for v in header)
        if nx != ny:
            raise ConfigError(f"only square grids are supported, got {nx}x{ny}")
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (ny, nx):
        raise ConfigError(
            f"grid body {data.shape} does not match header {ny}x{nx}")
    return data.ravel(), nx


def write_pgm(path, rho, n):
    """8-bit preview, solid material dark, top image row at ey = n-1."""
    rho = np.asarray(rho, dtype=float)
    if rho.size != n * n:
        raise ConfigError(f"grid wants {n * n} values, got {rho.size}")
    pix = 255 - np.rint(255.0 * np.clip(rho, 0.0, 1.0)).astype(int)
    grid = pix.reshape(n, n)[::-1]
    with open(path, "w") as fh:
        fh.write(f"P2\n{n} {n}\n255\n")
        for row in grid:
            fh.write(" ".join(str(v) for v in row) + "\n")
