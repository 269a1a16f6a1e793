"""Wigner function of a single-mode density matrix on a phase-space grid.

Convention: hbar = 1, ``x = sqrt(2) Re(alpha)``, ``p = sqrt(2) Im(alpha)``,
so the vacuum peaks at ``1/pi``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["WignerGrid", "wigner", "export_grid", "read_grid", "HEADER_COMMENT"]

MAX_DIM = 64
HEADER_COMMENT = "# wigner function, hbar=1, x=sqrt(2)*Re(alpha), p=sqrt(2)*Im(alpha)"


@dataclass
class WignerGrid:
    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray  # values[i, j] = W(x_axis[i], p_axis[j])
    source: str = ""

    def integral(self) -> float:
        """Riemann sum of W over the grid (uniform spacing assumed)."""
        dx = self.x_axis[1] - self.x_axis[0] if self.x_axis.size > 1 else 1.0
        dp = self.p_axis[1] - self.p_axis[0] if self.p_axis.size > 1 else 1.0
        return float(self.values.sum() * dx * dp)

    def at(self, x: float, p: float) -> float:
        i = int(np.argmin(np.abs(self.x_axis - x)))
        j = int(np.argmin(np.abs(self.p_axis - p)))
        return float(self.values[i, j])


def _check_rho(rho) -> np.ndarray:
    rho = np.atleast_2d(np.asarray(rho, dtype=complex))
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if rho.shape[0] > MAX_DIM:
        raise ValueError(f"density matrix dimension {rho.shape[0]} exceeds {MAX_DIM}")
    asym = np.max(np.abs(rho - rho.conj().T))
    if asym > 1e-8:
        raise ValueError(f"density matrix is not Hermitian (max asymmetry {asym:.2e})")
    if asym > 0:
        if asym > 1e-12:
            warnings.warn(f"symmetrizing density matrix (asymmetry {asym:.2e})", stacklevel=3)
        rho = 0.5 * (rho + rho.conj().T)
    return rho


def wigner(rho, x_axis, p_axis, source: str = "") -> WignerGrid:
    """Evaluate ``W(x, p)`` for every grid point.

    Fock matrix elements are generated with the three-term Laguerre
    recurrence, walking one diagonal of ``rho`` at a time, so no factorials
    appear and the sum stays accurate up to ``N = 64``.
    """
    rho = _check_rho(rho)
    x_axis = np.asarray(x_axis, dtype=float).ravel()
    p_axis = np.asarray(p_axis, dtype=float).ravel()
    n = rho.shape[0]
    xx, pp = np.meshgrid(x_axis, p_axis, indexing="ij")
    # a = alpha, with W_mn carrying the 2|alpha|^2 exponent
    a = (xx + 1j * pp) / np.sqrt(2.0)
    a2 = 4.0 * np.abs(a) ** 2

    # w[m] holds the (m, m + k) kernel on diagonal k; start with k = 0:
    # W_mm = (-1)^m / pi * exp(-a2/2) * L_m(a2)
    base = np.exp(-0.5 * a2) / np.pi
    total = np.zeros(xx.shape)
    # off-diagonal scale factor (2 alpha)^k / sqrt(k!) built incrementally
    prefactor = np.ones_like(a)
    for k in range(n):
        if k > 0:
            prefactor = prefactor * (2.0 * a) / np.sqrt(k)
        # normalized generalized Laguerre sqrt(m!/(m+k)!) L_m^k(a2) via forward recurrence
        l_prev = np.zeros_like(a2)
        l_curr = np.ones_like(a2)
        for m in range(n - k):
            if m > 0:
                # L_m^k = ((2m - 1 + k - x) L_{m-1}^k - (m - 1 + k) L_{m-2}^k) / m, rescaled
                # by sqrt(m!/(m+k)!) so consecutive terms stay O(1)
                l_next = ((2 * m - 1 + k - a2) * l_curr
                          - np.sqrt((m - 1) * (m - 1 + k)) * l_prev) / np.sqrt(m * (m + k))
                l_prev, l_curr = l_curr, l_next
            kernel = (-1) ** m * base * l_curr
            coef = rho[m, m + k]
            if k == 0:
                total += coef.real * kernel
            else:
                # rho_{m,m+k} and rho_{m+k,m} together; the pair carries (2 alpha)^k / sqrt(k!)
                total += 2.0 * np.real(coef * prefactor) * kernel
    return WignerGrid(x_axis=x_axis, p_axis=p_axis, values=total, source=source)


def export_grid(grid: WignerGrid, path) -> None:
    """CSV with a comment line, then header ``x,p,w``; rows run over x, then p."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(HEADER_COMMENT + (f"; source={grid.source}" if grid.source else "") + "\n")
        w = csv.writer(fh)
        w.writerow(["x", "p", "w"])
        for i, x in enumerate(grid.x_axis):
            for j, p in enumerate(grid.p_axis):
                w.writerow([f"{x:.17g}", f"{p:.17g}", f"{grid.values[i, j]:.17g}"])


def read_grid(path) -> WignerGrid:
    xs, ps, ws = [], [], []
    source = ""
    with open(path, newline="") as fh:
        first = fh.readline()
        if "source=" in first:
            source = first.split("source=", 1)[1].strip()
        reader = csv.DictReader(fh)
        for row in reader:
            xs.append(float(row["x"]))
            ps.append(float(row["p"]))
            ws.append(float(row["w"]))
    x_axis = np.unique(xs)
    p_axis = np.unique(ps)
    values = np.asarray(ws).reshape(x_axis.size, p_axis.size)
    return WignerGrid(x_axis=x_axis, p_axis=p_axis, values=values, source=source)
