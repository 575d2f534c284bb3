#!/usr/bin/env python3
"""Linear standing-wave frequencies for the shipped tank scenarios.

Linearizing the free-surface equations about a flat surface at rest gives
    eta_t = DtN(phi_s),   phi_s_t = -g0 eta + (tau/rho) eta_xx
so a mode cos(kx) oscillates with omega^2 = lambda(k) (g0 + (tau/rho) k^2),
where lambda(k) is the Dirichlet-to-Neumann eigenvalue of the layer.

lambda(k) is computed two ways: the closed form k tanh(k d), and a finite
difference solve of phi'' = k^2 phi on [-d, 0] with phi'(-d) = 0, phi(0) = 1,
extrapolated in the grid size. The script fails if they disagree.

Usage: dispersion.py [output.csv]
"""

import csv
import math
import sys

import numpy as np
from scipy.linalg import solve_banded

CASES = [
    # name, g0, tau/rho, k, depth
    ("gravity", 9.81, 0.0, 2.0 * math.pi, 0.5),
    ("capillary", 0.0, 1.0, 2.0 * math.pi, 0.5),
]


def dtn_fd(k, depth, n):
    """phi'(0) from a second-order FD solve on n cells, one-sided flux."""
    h = depth / n
    # unknowns phi_0 .. phi_{n-1} at y = -d + i h; phi_n = 1 at the surface
    ab = np.zeros((3, n))
    rhs = np.zeros(n)
    ab[1, :] = -2.0 - (k * h) ** 2
    ab[0, 1:] = 1.0
    ab[2, :-1] = 1.0
    # ghost node mirror for phi'(-d) = 0
    ab[0, 1] = 2.0
    rhs[-1] = -1.0
    phi = np.append(solve_banded((1, 1), ab, rhs), 1.0)
    # second-order one-sided derivative plus the k^2 phi h/2 correction
    return (phi[-1] - phi[-2]) / h + 0.5 * h * k * k * phi[-1]


def dtn_extrapolated(k, depth):
    a = dtn_fd(k, depth, 400)
    b = dtn_fd(k, depth, 800)
    return (4.0 * b - a) / 3.0


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "scripts/dispersion_reference.csv"
    rows = []
    for name, g0, tau, k, depth in CASES:
        exact = k * math.tanh(k * depth)
        fd = dtn_extrapolated(k, depth)
        if abs(fd - exact) > 1e-8 * exact:
            raise SystemExit(f"{name}: DtN mismatch {fd} vs {exact}")
        omega = math.sqrt(exact * (g0 + tau * k * k))
        rows.append((name, g0, tau, k, depth, omega))
        print(f"{name}: lambda = {exact:.12f} (fd {fd:.12f}), omega = {omega:.12f}")
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["case", "g0", "tau_over_rho", "k", "depth", "omega"])
        for r in rows:
            w.writerow([r[0]] + [f"{x:.17e}" for x in r[1:]])


if __name__ == "__main__":
    main()
