"""Single-transmon levels and charge matrix elements from the charge-basis Hamiltonian.

The qubit is diagonalized as ``4 E_C n^2 - (E_J/2)(|n><n+1| + h.c.)`` on a
truncated charge lattice ``|n| <= cutoff`` (no offset charge; gate levels live
well below the cutoff).  The closed-form transmon asymptotics
``omega_01 ~ sqrt(8 E_J E_C) - E_C`` etc. are kept only as test oracles; the
device layer always consumes the numerically exact levels because the
three-qubit gate visits the third excited state, where the quartic
approximation degrades.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .core import NumericsError

DEFAULT_CHARGE_CUTOFF = 20
CONVERGENCE_ATOL_GHZ = 1e-3  # 1 MHz


@dataclass(frozen=True)
class TransmonParams:
    """Charging energy, maximum Josephson energy, cavity coupling, truncation.

    ``g`` is the bare 0-1 vacuum-Rabi coupling to the cavity in GHz; the device
    layer scales it to higher levels with normalized charge matrix elements.
    """

    ec: float  # E_C / h, GHz
    ejmax: float  # E_J^max / h, GHz
    g: float  # qubit-cavity coupling, GHz
    levels: int = 4

    def __post_init__(self):
        if self.ec <= 0 or self.ejmax <= 0:
            raise ValueError("ec and ejmax must be positive")
        if self.levels < 3:
            raise ValueError("need at least 3 transmon levels")
        if self.ejmax / self.ec <= 10:
            raise ValueError(
                f"EJmax/EC = {self.ejmax / self.ec:.1f} is outside the transmon regime (>10)"
            )


def ej_of_flux(ejmax: float, phi: float) -> float:
    """Flux-tuned Josephson energy ``EJmax |cos(pi phi)|`` (phi in flux quanta)."""
    if ejmax <= 0:
        raise ValueError("ejmax must be positive")
    return ejmax * abs(np.cos(np.pi * phi))


@lru_cache(maxsize=16384)
def _charge_basis_levels(ec: float, ej: float, levels: int, cutoff: int):
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    dim = n.size
    h = np.diag(4.0 * ec * n**2)
    off = -0.5 * ej * np.ones(dim - 1)
    h += np.diag(off, 1) + np.diag(off, -1)
    evals, vecs = np.linalg.eigh(h)
    # gauge: real eigenvectors with <j|n|j+1> >= 0
    for j in range(1, levels):
        elem = vecs[:, j - 1] @ (n * vecs[:, j])
        if elem < 0:
            vecs[:, j] = -vecs[:, j]
    omega = evals[:levels] - evals[0]
    n_mat = np.empty((levels, levels))
    for j in range(levels):
        for k in range(levels):
            n_mat[j, k] = vecs[:, j] @ (n * vecs[:, k])
    omega.flags.writeable = False
    n_mat.flags.writeable = False
    return omega, n_mat


def transmon_spectrum(params: TransmonParams, ej: float, cutoff: int = DEFAULT_CHARGE_CUTOFF):
    """Level frequencies ``omega_0j`` (GHz, omega_00 = 0) and charge matrix ``n_jk``.

    Raises :class:`NumericsError` if the requested levels are not converged to
    1 MHz when the charge cutoff is enlarged.
    """
    if ej <= 0:
        raise ValueError("ej must be positive")
    omega, n_mat = _charge_basis_levels(params.ec, ej, params.levels, cutoff)
    omega_check, _ = _charge_basis_levels(params.ec, ej, params.levels, cutoff + 8)
    drift = np.max(np.abs(omega - omega_check))
    if drift > CONVERGENCE_ATOL_GHZ:
        raise NumericsError(
            f"charge cutoff {cutoff} not converged: levels move {drift * 1e3:.2f} MHz"
        )
    return omega, n_mat


def transition_frequency(params: TransmonParams, ej: float) -> float:
    """0-1 transition frequency in GHz."""
    omega, _ = transmon_spectrum(params, ej)
    return float(omega[1])


def ej_for_frequency(params: TransmonParams, f01: float) -> float:
    """Invert ``omega_01(EJ) = f01`` (monotone in EJ) by bracketed root search."""
    lo, hi = 10.5 * params.ec, max(1.5 * params.ejmax, 12 * params.ec)
    f_lo = transition_frequency(params, lo)
    f_hi = transition_frequency(params, hi)
    if not f_lo <= f01 <= f_hi:
        raise ValueError(
            f"target frequency {f01} GHz outside reachable range "
            f"[{f_lo:.3f}, {f_hi:.3f}] GHz"
        )
    return float(brentq(lambda ej: transition_frequency(params, ej) - f01, lo, hi, xtol=1e-10))


def flux_for_frequency(params: TransmonParams, f01: float) -> float:
    """Flux bias (in Phi_0, branch [0, 0.5)) that puts the 0-1 transition at ``f01``."""
    ej = ej_for_frequency(params, f01)
    if ej > params.ejmax:
        raise ValueError(
            f"frequency {f01} GHz needs EJ = {ej:.2f} GHz > EJmax = {params.ejmax} GHz"
        )
    return float(np.arccos(ej / params.ejmax) / np.pi)
